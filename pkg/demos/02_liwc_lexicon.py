"""Parse a LIWC-2007 style dictionary and profile a few sentences.

The bundled ``demo`` dictionary is a small synthetic stand-in; point
``resolve_dictionary`` at a licensed LIWC2007 .dic file for real work.

Run: python demos/02_liwc_lexicon.py
"""
from persona_lab.liwc import analyze, parse_dic, tokenize
from persona_lab.report import resolve_dictionary

tiny = parse_dic("%\n1\tposemo\n2\tnegemo\n%\nhappy\t1\nhate\t2\nadmir*\t1\nadmirable\t2\n")
text = "I admire happy people, no hate. Admirable?"
print("tokens:", [t.surface for t in tokenize(text)])
v = analyze(text, tiny)
# "admirable" has its own entry, so it is not credited through the admir* stem
print("counts:", {tiny.categories[c]: n for c, n in v.counts.items()}, "of", v.total_tokens, "tokens\n")

demo = resolve_dictionary("demo")
print(f"demo dictionary: {len(demo.categories)} categories, "
      f"{len(demo.literal_entries)} words, {len(demo.stem_entries)} stems")
for sentence in ("We laughed together and shared a wonderful warm afternoon.",
                 "I should have known; I hate how lonely and bitter it felt."):
    vec = analyze(sentence, demo)
    top = sorted(((r, demo.categories[c]) for c, r in vec.rates.items() if r), reverse=True)[:4]
    print(f"{sentence}\n   " + ", ".join(f"{name} {r:.2f}" for r, name in top))
