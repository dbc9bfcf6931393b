"""LIWC-2007 dictionary parsing and per-document category counting."""
from __future__ import annotations

import csv
import io
import re
from itertools import groupby
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BadEntryLine, EmptyDocument, MalformedHeader, UnknownCategoryRef

_CATS = "\0"  # trie key holding the category set of a stem ending at this node


@dataclass(frozen=True)
class Token:
    surface: str
    position: int


@dataclass
class LiwcDictionary:
    categories: dict
    literal_entries: dict
    stem_entries: dict
    _trie: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        trie: dict = {}
        for stem, cats in self.stem_entries.items():
            if not stem:
                raise ValueError("empty stem")
            node = trie
            for ch in stem:
                node = node.setdefault(ch, {})
            node[_CATS] = frozenset(cats)
        self._trie = trie

    @property
    def category_ids(self) -> list[int]:
        return sorted(self.categories)

    @property
    def category_names(self) -> list[str]:
        return [self.categories[c] for c in self.category_ids]

    def category_id(self, name: str) -> int:
        for cid, cname in self.categories.items():
            if cname == name:
                return cid
        raise KeyError(name)

    def longest_stem(self, word: str) -> str | None:
        node, best = self._trie, None
        for i, ch in enumerate(word):
            node = node.get(ch)
            if node is None:
                break
            if _CATS in node:
                best = word[: i + 1]
        return best

    def lookup(self, word: str) -> frozenset:
        """Categories credited to ``word``: literal entry first, else the longest stem."""
        cats = self.literal_entries.get(word)
        if cats is not None:
            return cats
        node, best = self._trie, frozenset()
        for ch in word:
            node = node.get(ch)
            if node is None:
                break
            best = node.get(_CATS, best)
        return best


_ALT_RE = re.compile(r"^(?:\([\d\s]+\))?(\d+(?:/\d+)*)$")
_CODE_RE = re.compile(r"\([^)]*\)\S*|\S+")


def _entry_ids(tokens, line_no, line, declared):
    ids = set()
    for tok in tokens:
        if tok.isdigit():
            cid = int(tok)
            if cid not in declared:
                raise UnknownCategoryRef(cid, line_no)
            ids.add(cid)
            continue
        # context-dependent codes such as "(02 134)125/464" are flattened
        # to the union of their declared alternatives
        m = _ALT_RE.match(tok)
        if not m:
            raise BadEntryLine(line_no, line)
        ids.update(int(x) for x in m.group(1).split("/") if int(x) in declared)
    return ids


def parse_dic(text: str) -> LiwcDictionary:
    """Parse the LIWC 2007 ``.dic`` layout.

    ``%`` / ``id<TAB>name`` lines / ``%`` / ``word<TAB>id id ...``. A trailing
    ``*`` on a word makes it a prefix stem. Blank lines are skipped anywhere.
    """
    lines = text.splitlines()
    numbered = [(i, ln.strip()) for i, ln in enumerate(lines, 1) if ln.strip()]
    if not numbered or numbered[0][1] != "%":
        raise MalformedHeader("dictionary must start with a '%' line")
    try:
        close = next(k for k, (_, ln) in enumerate(numbered[1:], 1) if ln == "%")
    except StopIteration:
        raise MalformedHeader("no closing '%' after the category header") from None

    categories: dict[int, str] = {}
    for line_no, ln in numbered[1:close]:
        parts = ln.split()
        if len(parts) < 2 or not parts[0].isdigit():
            raise MalformedHeader(f"line {line_no}: bad category line {ln!r}")
        cid = int(parts[0])
        if cid in categories:
            raise MalformedHeader(f"line {line_no}: duplicate category id {cid}")
        categories[cid] = parts[1]

    literals: dict[str, frozenset] = {}
    stems: dict[str, frozenset] = {}
    for line_no, ln in numbered[close + 1:]:
        parts = ln.split("\t") if "\t" in ln else ln.split()
        parts = [p.strip() for p in parts if p.strip()]
        if len(parts) < 2:
            raise BadEntryLine(line_no, ln)
        word = parts[0].lower()
        ids = _entry_ids(_CODE_RE.findall(" ".join(parts[1:])), line_no, ln, categories)
        if word.endswith("*"):
            stem = word.rstrip("*")
            if not stem:
                raise BadEntryLine(line_no, ln)
            stems[stem] = stems.get(stem, frozenset()) | ids
        else:
            literals[word] = literals.get(word, frozenset()) | ids
    return LiwcDictionary(categories, literals, stems)


def load_dic(path) -> LiwcDictionary:
    return parse_dic(Path(path).read_text(encoding="utf-8", errors="replace"))


def format_dic(d: LiwcDictionary) -> str:
    """Serialise back to ``.dic`` text (sorted, so output is canonical)."""
    out = ["%"]
    out += [f"{cid}\t{d.categories[cid]}" for cid in d.category_ids]
    out.append("%")
    rows = [(w, cats) for w, cats in d.literal_entries.items()]
    rows += [(s + "*", cats) for s, cats in d.stem_entries.items()]
    for word, cats in sorted(rows):
        out.append(word + "\t" + "\t".join(str(c) for c in sorted(cats)))
    return "\n".join(out) + "\n"


def tokenize(text: str) -> list[Token]:
    """Lowercase, split on anything that is not a letter or apostrophe, trim apostrophes."""
    text = text.lower().replace("’", "'").replace("‘", "'")
    runs = ("".join(g) for keep, g in groupby(text, lambda ch: ch.isalpha() or ch == "'") if keep)
    words = (w.strip("'") for w in runs)
    return [Token(w, i) for i, w in enumerate(w for w in words if w)]


@dataclass
class LiwcVector:
    counts: dict
    total_tokens: int
    rates: dict
    empty: bool = False

    def rate_array(self, category_ids) -> np.ndarray:
        return np.array([self.rates[c] for c in category_ids], dtype=float)


def analyze(text: str, dictionary: LiwcDictionary, strict: bool = False) -> LiwcVector:
    """Count category hits in ``text``.

    An empty document yields zero counts, NaN rates and ``empty=True``, or
    raises :class:`EmptyDocument` when ``strict``.
    """
    counts = {c: 0 for c in dictionary.category_ids}
    tokens = tokenize(text)
    for tok in tokens:
        for c in dictionary.lookup(tok.surface):
            counts[c] += 1
    n = len(tokens)
    if n == 0:
        if strict:
            raise EmptyDocument("document has no tokens")
        return LiwcVector(counts, 0, {c: float("nan") for c in counts}, empty=True)
    return LiwcVector(counts, n, {c: v / n for c, v in counts.items()})


@dataclass
class CorpusMatrix:
    rates: np.ndarray
    counts: np.ndarray
    total_tokens: np.ndarray
    agent_ids: list
    labels: np.ndarray
    category_ids: list
    category_names: list

    def column(self, name: str) -> np.ndarray:
        return self.rates[:, self.category_names.index(name)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["agent_id", "group"] + self.category_names)
        for aid, lab, row in zip(self.agent_ids, self.labels, self.rates):
            w.writerow([aid, int(lab)] + [repr(float(x)) for x in row])
        return buf.getvalue()


def vectorize_corpus(stories, dictionary: LiwcDictionary, group_of) -> CorpusMatrix:
    """Rate matrix (one row per story, columns in ascending category id).

    ``group_of`` maps agent_id to its 0/1 group label.
    """
    ids = dictionary.category_ids
    rows, count_rows, totals, agents, labels = [], [], [], [], []
    for story in stories:
        if not story.accepted:
            raise ValueError(f"story by {story.agent_id} was rejected by the word-count filter")
        try:
            vec = analyze(story.text, dictionary, strict=True)
        except EmptyDocument:
            raise EmptyDocument(f"story by {story.agent_id} has no tokens") from None
        rows.append(vec.rate_array(ids))
        count_rows.append([vec.counts[c] for c in ids])
        totals.append(vec.total_tokens)
        agents.append(story.agent_id)
        labels.append(int(group_of[story.agent_id]))
    d = len(ids)
    return CorpusMatrix(
        rates=np.array(rows, dtype=float).reshape(len(rows), d),
        counts=np.array(count_rows, dtype=int).reshape(len(rows), d),
        total_tokens=np.array(totals, dtype=int),
        agent_ids=agents,
        labels=np.array(labels, dtype=int),
        category_ids=list(ids),
        category_names=dictionary.category_names,
    )
