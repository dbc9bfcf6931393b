"""Synthetic persona behaviour for the scripted mock backend.

The mock answers the questionnaire according to a profile's expected
polarities and writes stories whose content words come from persona-specific
seed lists. Every completion is a pure function of the request fingerprint
and a seed, so runs are reproducible in any call order.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .backend import Role, ScriptedMockBackend
from .bfi import ITEMS
from .errors import ConfigError
from .liwc import tokenize
from .persona import Polarity, builtin_profiles
from .prompts import INTERACTIVE_MARKER

POSEMO_WORDS = (
    "happy", "love", "joy", "wonderful", "excited", "admire", "adore", "accept", "active",
    "delight", "cheerful", "grateful", "glad", "warm", "kind", "laugh", "beautiful", "proud",
    "fun", "sweet", "brave", "peace", "smile", "trust",
)
INCL_WORDS = ("with", "and", "together", "along", "both", "around", "include", "add", "plus", "inside")
NEGEMO_WORDS = (
    "hate", "worthless", "nasty", "abandon", "abuse", "aching", "adverse", "angry", "bitter",
    "cruel", "cry", "grief", "sad", "sorrow", "lonely", "afraid", "annoyed", "hurt", "fail",
    "awful", "guilt", "ugly", "fear", "mess",
)
DISCREP_WORDS = ("should", "could", "would", "must", "ought", "need", "wish", "besides", "suppose", "lack")
FILLER_WORDS = (
    "the", "a", "day", "walked", "city", "morning", "friend", "i", "it", "that", "was", "to", "of",
    "in", "on", "went", "remember", "time", "house", "road", "think", "know", "maybe", "perhaps",
    "church", "pray", "we", "they", "she", "her", "my", "me", "you", "those", "this", "there",
    "under", "over", "after", "before", "saw", "heard", "looked", "window", "rain", "street",
    "work", "office", "train", "letter", "understand", "realize", "because", "reason", "never",
    "not", "always", "certain", "year", "family", "school", "river", "coffee", "door",
)

CREATIVE_CONTENT = POSEMO_WORDS + INCL_WORDS
ANALYTICAL_CONTENT = NEGEMO_WORDS + DISCREP_WORDS
_CONTENT_SET = frozenset(CREATIVE_CONTENT + ANALYTICAL_CONTENT)


@dataclass
class MockPersonaOptions:
    """Knobs of the synthetic behaviour. All probabilities are per word or per item."""

    seed: int = 0
    content_rate: float = 0.25          # share of story words that are content words
    own_share: float = 0.7              # share of content words drawn from the persona's own list
    blend: bool = False                 # both personas draw 50/50 from both lists
    story_words: tuple = (560, 840)
    short_story_rate: float = 0.0       # chance a story attempt comes out too short
    malformed_rate: float = 0.0         # chance a questionnaire reply is unusable
    answer_noise: float = 0.1           # chance an item is answered uniformly at random
    # chance per item that a persona answers like the opposite pole after writing
    writing_drift: dict = field(default_factory=lambda: {"analytical": 0.35, "creative": 0.0})
    interactive_drift: dict = field(default_factory=lambda: {"analytical": 0.2, "creative": 0.0})
    # share of content words copied from the partner's story in the interactive task
    alignment: dict = field(default_factory=lambda: {"analytical": 0.2, "creative": 0.6})

    @classmethod
    def from_dict(cls, d: dict | None) -> "MockPersonaOptions":
        d = dict(d or {})
        if "story_words" in d:
            d["story_words"] = tuple(d["story_words"])
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(f"bad mock options: {exc}") from None


def _rng(request, seed: int) -> random.Random:
    return random.Random(f"{seed}:{request.fingerprint()}")


def _answer(rng, item, polarity, noise) -> int:
    if rng.random() < noise:
        return rng.randint(1, 5)
    agree = (polarity is Polarity.HIGH) != item.reversed
    target = 5 if agree else 1
    step = rng.choices((0, 1, 2), weights=(0.6, 0.3, 0.1))[0]
    return target - step if agree else target + step


def questionnaire_reply(request, profile, opts: MockPersonaOptions) -> str:
    rng = _rng(request, opts.seed)
    if rng.random() < opts.malformed_rate:
        return "As an AI language model, I do not have personal characteristics."
    wrote = any(m.role is Role.ASSISTANT for m in request.messages)
    interactive = any(INTERACTIVE_MARKER in m.content for m in request.messages if m.role is Role.USER)
    drift_table = opts.interactive_drift if interactive else opts.writing_drift
    drift = drift_table.get(profile.id, 0.0) if wrote else 0.0
    lines = []
    for item in ITEMS:
        polarity = profile.expected_polarity[item.trait]
        if rng.random() < drift:
            polarity = polarity.flipped()
        lines.append(f"({item.letter}) {_answer(rng, item, polarity, opts.answer_noise)}")
    preface = "Sure, here are my answers:\n\n" if rng.random() < 0.3 else ""
    return preface + "\n".join(lines)


def _content_pools(profile_id: str, opts: MockPersonaOptions):
    own = CREATIVE_CONTENT if profile_id == "creative" else ANALYTICAL_CONTENT
    other = ANALYTICAL_CONTENT if profile_id == "creative" else CREATIVE_CONTENT
    share = 0.5 if opts.blend else opts.own_share
    return own, other, share


def _sentences(words, rng) -> str:
    out, i = [], 0
    while i < len(words):
        n = rng.randint(8, 15)
        chunk = words[i:i + n]
        chunk[0] = chunk[0].capitalize()
        out.append(" ".join(chunk) + ".")
        i += n
    return " ".join(out)


def story_reply(request, profile, opts: MockPersonaOptions) -> str:
    rng = _rng(request, opts.seed)
    lo, hi = opts.story_words
    n = rng.randint(200, 400) if rng.random() < opts.short_story_rate else rng.randint(lo, hi)
    own, other, share = _content_pools(profile.id, opts)
    borrowed: list = []
    borrow_rate = 0.0
    content = request.last_user_content
    if INTERACTIVE_MARKER in content:
        partner = content.split(INTERACTIVE_MARKER, 1)[1]
        borrowed = [t.surface for t in tokenize(partner) if t.surface in _CONTENT_SET]
        borrow_rate = opts.alignment.get(profile.id, 0.0) if borrowed else 0.0
    words = []
    for _ in range(n):
        if rng.random() >= opts.content_rate:
            words.append(rng.choice(FILLER_WORDS))
        elif rng.random() < borrow_rate:
            words.append(rng.choice(borrowed))
        else:
            words.append(rng.choice(own if rng.random() < share else other))
    return _sentences(words, rng)


def synthetic_backend(options: MockPersonaOptions | dict | None = None, profiles=None) -> ScriptedMockBackend:
    """A :class:`ScriptedMockBackend` scripted with synthetic persona behaviour."""
    opts = options if isinstance(options, MockPersonaOptions) else MockPersonaOptions.from_dict(options)
    profiles = profiles or builtin_profiles()
    script = {}
    for p in profiles:
        script[(p.id, "bfi")] = lambda req, p=p: questionnaire_reply(req, p, opts)
        script[(p.id, "write")] = lambda req, p=p: story_reply(req, p, opts)
        script[(p.id, "write_interactive")] = lambda req, p=p: story_reply(req, p, opts)
    return ScriptedMockBackend(script, profiles)
