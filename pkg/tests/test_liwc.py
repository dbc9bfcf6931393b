import random
import string

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from persona_lab.errors import BadEntryLine, EmptyDocument, MalformedHeader, UnknownCategoryRef
from persona_lab.experiment import StoryPhase, StoryRecord
from persona_lab.liwc import LiwcDictionary, analyze, format_dic, parse_dic, tokenize, vectorize_corpus

from conftest import SMALL_DIC


def words(tokens):
    return [t.surface for t in tokens]


# ---- parsing


def test_parse_small_fixture(small_dic):
    assert small_dic.categories == {1: "posemo", 2: "negemo"}
    assert small_dic.literal_entries == {"happy": {1}, "hate": {2}}
    assert small_dic.stem_entries == {"admir": {1}}


def test_parse_tolerates_blank_lines_and_multi_ids():
    d = parse_dic("\n%\n1\tfunct\n\n2\tpronoun\n3\tppron\n%\n\ni\t1 2\t3\nwe*\t2\n\n")
    assert d.literal_entries["i"] == {1, 2, 3}
    assert d.category_names == ["funct", "pronoun", "ppron"]


def test_parse_flattens_context_codes():
    d = parse_dic("%\n1\tfunct\n2\tverb\n%\nlike\t1 (2 1)2/1\n")
    assert d.literal_entries["like"] == {1, 2}
    d = parse_dic("%\n2\tpronoun\n125\taffect\n134\tdiscrep\n%\nkind\t(02 134)125/464\n")
    assert d.literal_entries["kind"] == {125}


def test_unknown_category_reports_line():
    with pytest.raises(UnknownCategoryRef) as info:
        parse_dic("%\n1\tposemo\n%\nhappy\t1\nsad\t9\n")
    assert info.value.category_id == 9
    assert info.value.line_no == 5


@pytest.mark.parametrize("text", ["", "1\tposemo\n%\nhappy\t1\n", "%\n1\tposemo\nhappy\t1\n",
                                  "%\nposemo\n%\n", "%\n1\ta\n1\tb\n%\n"])
def test_malformed_header(text):
    with pytest.raises(MalformedHeader):
        parse_dic(text)


@pytest.mark.parametrize("entry", ["happy", "happy\tx", "*\t1"])
def test_bad_entry_line(entry):
    with pytest.raises(BadEntryLine) as info:
        parse_dic(f"%\n1\tposemo\n%\n{entry}\n")
    assert info.value.line_no == 4


def random_dictionary(rng, alphabet="abc"):
    n_cats = rng.randint(1, 5)
    cats = {cid: f"c{cid}" for cid in rng.sample(range(1, 500), n_cats)}
    ids = list(cats)

    def word():
        return "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 4)))

    lits = {word(): frozenset(rng.sample(ids, rng.randint(1, len(ids)))) for _ in range(rng.randint(0, 8))}
    stems = {word(): frozenset(rng.sample(ids, rng.randint(1, len(ids)))) for _ in range(rng.randint(0, 8))}
    return LiwcDictionary(cats, lits, stems)


def test_format_round_trip():
    rng = random.Random(11)
    for _ in range(100):
        d = random_dictionary(rng)
        text = format_dic(d)
        back = parse_dic(text)
        assert back == d
        assert format_dic(back) == text


def test_demo_dictionary_has_analysis_categories(demo_dic):
    names = set(demo_dic.category_names)
    assert {"posemo", "negemo", "discrep", "incl", "insight", "ppron", "tentat", "sad",
            "pronoun", "relig", "anger"} <= names


# ---- tokenizer


@pytest.mark.parametrize("text, expected", [
    ("I couldn't—wouldn't—stop.", ["i", "couldn't", "wouldn't", "stop"]),
    ("", []),
    ("Hello, HELLO", ["hello", "hello"]),
    ("'quoted' words''", ["quoted", "words"]),
    ("well-known 42nd o’clock", ["well", "known", "nd", "o'clock"]),
    ("snake_case", ["snake", "case"]),
])
def test_tokenize(text, expected):
    assert words(tokenize(text)) == expected


def test_token_positions_are_dense():
    toks = tokenize("a, b -- c")
    assert [t.position for t in toks] == [0, 1, 2]


@given(st.text())
def test_tokens_are_clean(text):
    for w in words(tokenize(text)):
        assert w and w == w.lower()
        assert not w.startswith("'") and not w.endswith("'")
        assert all(ch.isalpha() or ch == "'" for ch in w)


# ---- matching


def test_analyze_example(small_dic):
    v = analyze("I admire happy people, no hate", small_dic)
    assert v.counts == {1: 2, 2: 1}
    assert v.total_tokens == 6
    assert v.rates == {1: 2 / 6, 2: 1 / 6}


def test_no_hits_gives_zero_rates(small_dic):
    v = analyze("nothing to see here", small_dic)
    assert v.total_tokens == 4
    assert v.rates == {1: 0.0, 2: 0.0}


def test_literal_beats_stem():
    d = parse_dic("%\n1\tposemo\n2\tnegemo\n%\nadmir*\t1\nadmirable\t2\n")
    assert analyze("admirable", d).counts == {1: 0, 2: 1}
    assert analyze("admired", d).counts == {1: 1, 2: 0}


def test_longest_stem_wins():
    d = parse_dic("%\n1\ta\n2\tb\n%\ncar*\t1\ncare*\t2\n")
    assert d.longest_stem("careful") == "care"
    assert analyze("careful cart", d).counts == {1: 1, 2: 1}
    assert d.longest_stem("ca") is None


def test_empty_document(small_dic):
    v = analyze("  ... ", small_dic)
    assert v.empty and v.total_tokens == 0
    assert v.counts == {1: 0, 2: 0}
    assert all(np.isnan(r) for r in v.rates.values())
    with pytest.raises(EmptyDocument):
        analyze("", small_dic, strict=True)


def naive_counts(text, d):
    """Scan every entry for every token; no trie."""
    counts = {c: 0 for c in d.categories}
    for tok in tokenize(text):
        w = tok.surface
        hit = None
        for lit, cats in d.literal_entries.items():
            if lit == w:
                hit = cats
        if hit is None:
            best = ""
            for stem, cats in d.stem_entries.items():
                if w.startswith(stem) and len(stem) > len(best):
                    best, hit = stem, cats
        for c in hit or ():
            counts[c] += 1
    return counts


def random_text(rng, alphabet="abc"):
    pieces = []
    for _ in range(rng.randint(0, 30)):
        pieces.append("".join(rng.choice(alphabet) for _ in range(rng.randint(1, 6))))
        pieces.append(rng.choice([" ", ", ", ". ", "-", "\n", " '"]))
    return "".join(pieces)


def test_matches_naive_oracle():
    rng = random.Random(2024)
    for _ in range(200):
        d = random_dictionary(rng)
        text = random_text(rng)
        v = analyze(text, d)
        assert v.counts == naive_counts(text, d)
        assert v.total_tokens == len(tokenize(text))


@st.composite
def dict_and_texts(draw):
    seed = draw(st.integers(0, 10**6))
    rng = random.Random(seed)
    return random_dictionary(rng), random_text(rng), random_text(rng)


@settings(max_examples=150)
@given(dict_and_texts())
def test_additivity_and_rate_bounds(case):
    d, a, b = case
    va, vb, vab = analyze(a, d), analyze(b, d), analyze(a + " " + b, d)
    assert vab.counts == {c: va.counts[c] + vb.counts[c] for c in d.categories}
    assert vab.total_tokens == va.total_tokens + vb.total_tokens
    if vab.total_tokens:
        assert all(0.0 <= r <= 1.0 for r in vab.rates.values())
        assert len(vab.rates) == len(d.categories)


@given(st.text(alphabet=string.ascii_lowercase + " ", max_size=60))
def test_analysis_is_pure(text):
    d = parse_dic(SMALL_DIC)
    first, second = analyze(text, d), analyze(text, d)
    assert (first.counts, first.total_tokens, first.empty) == (second.counts, second.total_tokens, second.empty)


# ---- corpus


def story(agent, text, accepted=True):
    return StoryRecord(agent, StoryPhase.INDIVIDUAL, text, len(text.split()), accepted, 1, None, 0)


def test_vectorize_shape_and_alignment(demo_dic):
    stories = [story("a1", "happy happy love"), story("b1", "hate and sad"), story("a2", "happy happy love")]
    groups = {"a1": 1, "a2": 1, "b1": 0}
    m = vectorize_corpus(stories, demo_dic, groups)
    assert m.rates.shape == (3, len(demo_dic.categories))
    assert m.category_ids == sorted(demo_dic.categories)
    np.testing.assert_array_equal(m.rates[0], m.rates[2])
    assert list(m.labels) == [1, 0, 1]
    perm = vectorize_corpus([stories[1], stories[2], stories[0]], demo_dic, groups)
    assert perm.agent_ids == ["b1", "a2", "a1"]
    np.testing.assert_array_equal(perm.rates, m.rates[[1, 2, 0]])
    assert list(perm.labels) == [0, 1, 1]
    header = m.to_csv().splitlines()[0].split(",")
    assert header == ["agent_id", "group"] + demo_dic.category_names


def test_vectorize_rejects_bad_rows(small_dic):
    with pytest.raises(ValueError):
        vectorize_corpus([story("a", "happy", accepted=False)], small_dic, {"a": 1})
    with pytest.raises(EmptyDocument, match="a"):
        vectorize_corpus([story("a", "...")], small_dic, {"a": 1})
