import random
import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from persona_lab.backend import ChatMessage, Role, ScriptedMockBackend
from persona_lab.bfi import (
    ITEM_BY_LETTER,
    ITEMS,
    ITEMS_PER_TRAIT,
    LETTERS,
    BfiAnswerSheet,
    Phase,
    administer_bfi,
    build_bfi_prompt,
    parse_answer_sheet,
    score,
    trait_range,
)
from persona_lab.errors import DuplicateLetter, IncompleteSheet, OutOfRangeAnswer, PersistentlyMalformed
from persona_lab.persona import TRAITS, AgentSpec, TraitName, builtin_profiles

CREATIVE = builtin_profiles()[0]
AGENT = AgentSpec("creative-000", "creative", 1, 0.7)


def sheet_text(values):
    return "\n".join(f"({l}) {v}" for l, v in zip(LETTERS, values))


def full_sheet(values):
    return BfiAnswerSheet(dict(zip(LETTERS, values)))


# ---- prompt


def test_prompt_matches_golden(golden):
    assert build_bfi_prompt() == golden("bfi_prompt.txt")


def test_prompt_details():
    prompt = build_bfi_prompt()
    assert "such as `(a) 1' without explanation separated by new lines" in prompt
    lines = [ln for ln in prompt.splitlines() if re.match(r"^(Statements: )?\([a-z]{1,2}\) ", ln)]
    assert len(lines) == 44
    assert lines[0].endswith("(a) Is talkative")
    assert lines[-1] == "(ar) Is sophisticated in art, music, or literature"
    assert build_bfi_prompt() == build_bfi_prompt()


# ---- item table


def test_item_table():
    assert len(ITEMS) == 44
    assert len(set(LETTERS)) == 44
    assert LETTERS[0] == "a" and LETTERS[25] == "z" and LETTERS[26] == "aa" and LETTERS[-1] == "ar"
    assert [i.canonical_index for i in ITEMS] == list(range(1, 45))
    assert ITEMS_PER_TRAIT == {TraitName.EXTRAVERSION: 8, TraitName.AGREEABLENESS: 9,
                               TraitName.CONSCIENTIOUSNESS: 9, TraitName.NEUROTICISM: 8,
                               TraitName.OPENNESS: 10}


@pytest.mark.parametrize("letter,text,trait,rev", [
    ("f", "Is reserved", TraitName.EXTRAVERSION, True),
    ("a", "Is talkative", TraitName.EXTRAVERSION, False),
    ("b", "Tends to find fault with others", TraitName.AGREEABLENESS, True),
    ("i", "Is relaxed, handles stress well", TraitName.NEUROTICISM, True),
    ("ai", "Prefers work that is routine", TraitName.OPENNESS, True),
    ("ao", "Has few artistic interests", TraitName.OPENNESS, True),
    ("aq", "Is easily distracted", TraitName.CONSCIENTIOUSNESS, True),
    ("ar", "Is sophisticated in art, music, or literature", TraitName.OPENNESS, False),
])
def test_letter_number_mapping(letter, text, trait, rev):
    item = ITEM_BY_LETTER[letter]
    assert (item.text, item.trait, item.reversed) == (text, trait, rev)


# ---- parsing


def test_parse_well_formed():
    sheet = parse_answer_sheet(sheet_text([5, 1] + [3] * 42))
    assert sheet.complete
    assert sheet.answers["a"] == 5 and sheet.answers["b"] == 1 and sheet.answers["ar"] == 3


def test_parse_tolerates_prose_and_separators():
    sheet = parse_answer_sheet("Sure! (a): 4\n(b) 2\n( c ). 5 and (d) - 1\n(e)3")
    assert sheet.answers == {"a": 4, "b": 2, "c": 5, "d": 1, "e": 3}
    assert not sheet.complete
    assert "f" in sheet.missing


def test_parse_ignores_echoed_statements():
    sheet = parse_answer_sheet("(a) Is talkative\n(a) 2")
    assert sheet.answers == {"a": 2}


@pytest.mark.parametrize("text", ["(a) 7", "(a) 0", "(b) 10"])
def test_parse_out_of_range(text):
    with pytest.raises(OutOfRangeAnswer):
        parse_answer_sheet(text)


def test_parse_duplicates():
    assert parse_answer_sheet("(a) 2\n(a) 2").answers == {"a": 2}
    with pytest.raises(DuplicateLetter):
        parse_answer_sheet("(a) 2\n(a) 3")


def test_parse_strict_incomplete():
    with pytest.raises(IncompleteSheet) as info:
        parse_answer_sheet(sheet_text([3] * 43), strict=True)
    assert info.value.missing == {"ar"}


def _reference_parse(text):
    """Character-level scanner written separately from the regex parser."""
    out = {}
    i, n = 0, len(text)
    while i < n:
        if text[i] != "(":
            i += 1
            continue
        j = i + 1
        while j < n and text[j] == " ":
            j += 1
        k = j
        while k < n and text[k].isalpha():
            k += 1
        letter = text[j:k].lower()
        while k < n and text[k] == " ":
            k += 1
        if not letter or k >= n or text[k] != ")" or len(letter) > 2:
            i += 1
            continue
        k += 1
        while k < n and text[k] == " ":
            k += 1
        if k < n and text[k] in ":.-":
            k += 1
        while k < n and text[k] in " \t":
            k += 1
        m = k
        while m < n and text[m].isdigit():
            m += 1
        if m > k and letter in ITEM_BY_LETTER:
            out[letter] = int(text[k:m])
        i = max(m, i + 1)
    return out


def _fuzz_line(rng, letter, value):
    prefix = rng.choice(["", "Sure! ", "Answer: ", "  ", "- "])
    sep = rng.choice(["", ":", ".", "-"])
    ws1 = rng.choice(["", " "])
    ws2 = rng.choice(["", " ", "  ", "\t"])
    suffix = rng.choice(["", " ", " (agree)", " - Agree a little"])
    return f"{prefix}({ws1}{letter}{ws1}){sep}{ws2}{value}{suffix}"


def test_parser_matches_reference_on_fuzz_corpus():
    rng = random.Random(20231)
    for _ in range(300):
        letters = rng.sample(LETTERS, rng.randint(1, 44))
        answers = {l: rng.randint(1, 5) for l in letters}
        lines = [_fuzz_line(rng, l, v) for l, v in answers.items()]
        if rng.random() < 0.5:
            lines.insert(0, "Here are my responses to the statements:")
        text = rng.choice(["\n", "\n\n", "\r\n"]).join(lines)
        ref = _reference_parse(text)
        assert ref == answers
        assert parse_answer_sheet(text).answers == ref


# ---- scoring


def test_score_all_threes():
    assert score(full_sheet([3] * 44)).as_tuple() == (24, 27, 27, 24, 30)


def test_score_all_fives():
    assert score(full_sheet([5] * 44)).as_tuple() == (28, 29, 29, 28, 42)


def test_score_needs_complete_sheet():
    with pytest.raises(IncompleteSheet):
        score(full_sheet([3] * 43))


def _brute_force(values):
    scale = {
        "E": "1 6R 11 16 21R 26 31R 36", "A": "2R 7 12R 17 22 27R 32 37R 42",
        "C": "3 8R 13 18R 23R 28 33 38 43R", "N": "4 9R 14 19 24R 29 34R 39",
        "O": "5 10 15 20 25 30 35R 40 41R 44",
    }
    out = []
    for key in "EACNO":
        total = 0
        for tok in scale[key].split():
            x = values[int(tok.rstrip("R")) - 1]
            total += (6 - x) if tok.endswith("R") else x
        out.append(total)
    return tuple(out)


sheets = st.lists(st.integers(1, 5), min_size=44, max_size=44)


@given(sheets)
def test_score_matches_brute_force(values):
    assert score(full_sheet(values)).as_tuple() == _brute_force(values)


@given(sheets)
def test_score_range(values):
    s = score(full_sheet(values))
    for t in TRAITS:
        lo, hi = trait_range(t)
        assert lo <= s[t] <= hi


@given(sheets)
def test_reversal_involution(values):
    flipped_items = [type(i)(i.letter, i.text, i.canonical_index, i.trait, not i.reversed) for i in ITEMS]
    mirrored = [6 - v for v in values]
    totals = {t: 0 for t in TRAITS}
    for item, x in zip(flipped_items, mirrored):
        totals[item.trait] += 6 - x if item.reversed else x
    assert tuple(totals[t] for t in TRAITS) == score(full_sheet(values)).as_tuple()


@given(sheets, st.integers(0, 43))
def test_monotonicity(values, idx):
    if values[idx] == 5:
        values[idx] = 4
    before = score(full_sheet(values))
    bumped = list(values)
    bumped[idx] += 1
    after = score(full_sheet(bumped))
    item = ITEMS[idx]
    for t in TRAITS:
        delta = after[t] - before[t]
        if t is item.trait:
            assert delta == (-1 if item.reversed else 1)
        else:
            assert delta == 0


# ---- administration


def _context():
    return [ChatMessage(Role.SYSTEM, CREATIVE.system_prompt)]


def test_administer_happy_path():
    mock = ScriptedMockBackend({("creative", "bfi"): sheet_text([3] * 44)})
    s = administer_bfi(AGENT, _context(), mock, Phase.BEFORE_WRITING)
    assert s.as_tuple() == (24, 27, 27, 24, 30)
    assert s.phase is Phase.BEFORE_WRITING
    assert len(mock.calls) == 1
    assert mock.calls[0].messages[-1].content == build_bfi_prompt()


def test_administer_retries_then_succeeds():
    mock = ScriptedMockBackend({("creative", "bfi"): ["nonsense", "(a) 1", sheet_text([3] * 44)]})
    transcript = []
    s = administer_bfi(AGENT, _context(), mock, Phase.BEFORE_WRITING, retries=3, transcript=transcript)
    assert s.as_tuple() == (24, 27, 27, 24, 30)
    assert len(mock.calls) == 3
    assert transcript[:2] == ["nonsense", "(a) 1"]
    # every retry is a fresh sample with its own fingerprint
    assert len({c.fingerprint() for c in mock.calls}) == 3


def test_administer_gives_up():
    mock = ScriptedMockBackend({("creative", "bfi"): "I cannot answer that."})
    with pytest.raises(PersistentlyMalformed) as info:
        administer_bfi(AGENT, _context(), mock, Phase.BEFORE_WRITING, retries=3)
    assert len(mock.calls) == 3
    assert info.value.raw_texts == ["I cannot answer that."] * 3


def test_administer_requires_system_prompt():
    with pytest.raises(ValueError):
        administer_bfi(AGENT, [ChatMessage(Role.USER, "hi")], ScriptedMockBackend({}), Phase.BEFORE_WRITING)
