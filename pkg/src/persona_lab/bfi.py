"""BFI questionnaire: prompt construction, answer-sheet parsing and trait scoring."""
from __future__ import annotations

import enum
import itertools
import re
import string
from dataclasses import dataclass

from .backend import ChatMessage, GenerationRequest, Role
from .errors import DuplicateLetter, IncompleteSheet, OutOfRangeAnswer, PersistentlyMalformed
from .persona import TRAITS, TraitName
from .prompts import BFI_TEMPLATE

STATEMENTS = (
    "Is talkative",
    "Tends to find fault with others",
    "Does a thorough job",
    "Is depressed, blue",
    "Is original, comes up with new ideas",
    "Is reserved",
    "Is helpful and unselfish with others",
    "Can be somewhat careless",
    "Is relaxed, handles stress well",
    "Is curious about many different things",
    "Is full of energy",
    "Starts quarrels with others",
    "Is a reliable worker",
    "Can be tense",
    "Is ingenious, a deep thinker",
    "Generates a lot of enthusiasm",
    "Has a forgiving nature",
    "Tends to be disorganized",
    "Worries a lot",
    "Has an active imagination",
    "Tends to be quiet",
    "Is generally trusting",
    "Tends to be lazy",
    "Is emotionally stable, not easily upset",
    "Is inventive",
    "Has an assertive personality",
    "Can be cold and aloof",
    "Perseveres until the task is finished",
    "Can be moody",
    "Values artistic, aesthetic experiences",
    "Is sometimes shy, inhibited",
    "Is considerate and kind to almost everyone",
    "Does things efficiently",
    "Remains calm in tense situations",
    "Prefers work that is routine",
    "Is outgoing, sociable",
    "Is sometimes rude to others",
    "Makes plans and follows through with them",
    "Gets nervous easily",
    "Likes to reflect, play with ideas",
    "Has few artistic interests",
    "Likes to cooperate with others",
    "Is easily distracted",
    "Is sophisticated in art, music, or literature",
)

# Scoring scale in 1-based item numbers; "R" marks reverse-keyed items.
SCORING_SCALE = {
    TraitName.EXTRAVERSION: "1, 6R, 11, 16, 21R, 26, 31R, 36",
    TraitName.AGREEABLENESS: "2R, 7, 12R, 17, 22, 27R, 32, 37R, 42",
    TraitName.CONSCIENTIOUSNESS: "3, 8R, 13, 18R, 23R, 28, 33, 38, 43R",
    TraitName.NEUROTICISM: "4, 9R, 14, 19, 24R, 29, 34R, 39",
    TraitName.OPENNESS: "5, 10, 15, 20, 25, 30, 35R, 40, 41R, 44",
}

N_ITEMS = 44
LETTERS = tuple(string.ascii_lowercase) + tuple("a" + c for c in string.ascii_lowercase[:18])


class Phase(str, enum.Enum):
    BEFORE_WRITING = "BeforeWriting"
    AFTER_NONINTERACTIVE = "AfterNonInteractiveWriting"
    AFTER_INTERACTIVE = "AfterInteractiveWriting"


@dataclass(frozen=True)
class BfiItem:
    letter: str
    text: str
    canonical_index: int
    trait: TraitName
    reversed: bool


def _build_items() -> tuple[BfiItem, ...]:
    assignment = {}
    for trait, spec in SCORING_SCALE.items():
        for tok in spec.split(","):
            tok = tok.strip()
            rev = tok.endswith("R")
            assignment[int(tok.rstrip("R"))] = (trait, rev)
    assert sorted(assignment) == list(range(1, N_ITEMS + 1))
    return tuple(
        BfiItem(letter, text, i, *assignment[i])
        for i, (letter, text) in enumerate(zip(LETTERS, STATEMENTS), start=1)
    )


ITEMS = _build_items()
ITEM_BY_LETTER = {item.letter: item for item in ITEMS}
ITEMS_PER_TRAIT = {t: sum(1 for i in ITEMS if i.trait is t) for t in TRAITS}


def trait_range(trait: TraitName) -> tuple[int, int]:
    n = ITEMS_PER_TRAIT[TraitName(trait)]
    return n, 5 * n


def build_bfi_prompt() -> str:
    statements = "\n".join(f"({item.letter}) {item.text}" for item in ITEMS)
    return BFI_TEMPLATE.replace("{BFI statements}", statements)


@dataclass
class BfiAnswerSheet:
    answers: dict
    source_text: str = ""

    @property
    def missing(self) -> frozenset:
        return frozenset(l for l in LETTERS if l not in self.answers)

    @property
    def complete(self) -> bool:
        return not self.missing


# "(a) 4", "( ab ): 2", "(c). 5", "Sure! (d) - 3"; the digit run is captured whole
# so that "(a) 10" is rejected instead of read as 1.
_ANSWER_RE = re.compile(r"\(\s*([a-z]{1,2})\s*\)\s*[:.\-]?\s*(\d+)(?![\d.]*\d)", re.IGNORECASE)


def parse_answer_sheet(text: str, strict: bool = False) -> BfiAnswerSheet:
    """Extract ``(letter) digit`` answers from free text.

    Surrounding prose is ignored. Returns a possibly partial sheet; with
    ``strict=True`` a partial sheet raises :class:`IncompleteSheet`.
    """
    answers: dict[str, int] = {}
    for m in _ANSWER_RE.finditer(text):
        letter = m.group(1).lower()
        if letter not in ITEM_BY_LETTER:
            continue
        value = int(m.group(2))
        if not 1 <= value <= 5:
            raise OutOfRangeAnswer(f"item ({letter}) answered {value}; expected 1..5")
        if letter in answers and answers[letter] != value:
            raise DuplicateLetter(f"item ({letter}) answered both {answers[letter]} and {value}")
        answers[letter] = value
    sheet = BfiAnswerSheet(answers=answers, source_text=text)
    if strict and not sheet.complete:
        raise IncompleteSheet(sheet.missing)
    return sheet


@dataclass
class TraitScores:
    scores: dict
    phase: Phase | None = None

    def __getitem__(self, trait) -> int:
        return self.scores[TraitName(trait)]

    def as_tuple(self) -> tuple[int, ...]:
        return tuple(self.scores[t] for t in TRAITS)


def score(sheet: BfiAnswerSheet, phase: Phase | None = None) -> TraitScores:
    if not sheet.complete:
        raise IncompleteSheet(sheet.missing)
    totals = {t: 0 for t in TRAITS}
    for item in ITEMS:
        x = sheet.answers[item.letter]
        totals[item.trait] += 6 - x if item.reversed else x
    return TraitScores(totals, phase)


def administer_bfi(agent, context, backend, phase: Phase, retries: int = 3, next_sequence=None,
                   model_id: str | None = None, transcript: list | None = None) -> TraitScores:
    """Ask ``agent`` the questionnaire on top of ``context`` and score the reply.

    Each failed parse triggers a fresh sample (no error feedback), up to
    ``retries`` calls in total. ``next_sequence`` is a zero-arg callable that
    hands out the agent's per-call counter. Raw completions are appended to
    ``transcript`` when one is given.
    """
    context = list(context)
    if not context or context[0].role is not Role.SYSTEM:
        raise ValueError("context must start with the agent's persona system prompt")
    messages = tuple(context) + (ChatMessage(Role.USER, build_bfi_prompt()),)
    counter = next_sequence or itertools.count().__next__
    extra = {} if model_id is None else {"model_id": model_id}
    raws = transcript if transcript is not None else []
    start = len(raws)
    for _ in range(retries):
        req = GenerationRequest(messages, temperature=agent.sampling_temperature,
                                agent_id=agent.agent_id, sequence=counter(), **extra)
        text = backend.generate(req).text
        raws.append(text)
        try:
            sheet = parse_answer_sheet(text, strict=True)
        except (IncompleteSheet, OutOfRangeAnswer, DuplicateLetter):
            continue
        return score(sheet, phase)
    raise PersistentlyMalformed(
        f"agent {agent.agent_id}: no usable answer sheet after {retries} attempt(s)", raws[start:]
    )
