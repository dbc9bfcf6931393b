"""Score a Big Five questionnaire reply the way an agent would send it back.

Run: python demos/01_score_questionnaire.py
"""
import random

from persona_lab.bfi import LETTERS, build_bfi_prompt, parse_answer_sheet, score, trait_range
from persona_lab.errors import IncompleteSheet
from persona_lab.persona import TRAITS

prompt = build_bfi_prompt()
print(prompt.splitlines()[0])
print(f"... ({len(prompt)} characters, 44 statements)\n")

# Models often wrap the answers in chatter; the parser only looks for "(letter) digit".
rng = random.Random(0)
reply = "Sure! Here are my ratings:\n" + "\n".join(f"({l}) {rng.randint(1, 5)}" for l in LETTERS)
scores = score(parse_answer_sheet(reply))
for t in TRAITS:
    lo, hi = trait_range(t)
    print(f"{t.value:<18} {scores[t]:>3}   (range {lo}-{hi})")

# A truncated reply is reported with the letters it is missing.
try:
    score(parse_answer_sheet("(a) 4\n(b) 2"))
except IncompleteSheet as exc:
    print(f"\nincomplete reply: {len(exc.missing)} items missing")
