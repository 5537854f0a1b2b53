"""Co-occurrence samples: triple ingestion, projections and class counts."""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, NamedTuple, Optional

from .taxonomy import Taxonomy


class CorpusFormatError(ValueError):
    """A malformed line in a triple or quadruple file."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class HeadKey(NamedTuple):
    head: str
    slot: str


@dataclass(frozen=True)
class PairSample:
    """Multiset of ``(value word, head key)`` pairs with aggregated counts.

    ``unknown`` holds the value words that are not leaves of the taxonomy the
    sample was ingested against (empty when no taxonomy was given).
    """

    counts: Mapping[tuple[str, HeadKey], int] = field(default_factory=dict)
    unknown: frozenset[str] = frozenset()

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def __len__(self) -> int:
        return self.total

    def head_keys(self) -> list[HeadKey]:
        return sorted({k for _, k in self.counts})

    def slots(self) -> list[str]:
        return sorted({k.slot for _, k in self.counts})

    def for_slot(self, slot: str) -> "PairSample":
        return PairSample(
            {(w, k): c for (w, k), c in self.counts.items() if k.slot == slot},
            frozenset(self.unknown),
        )

    def known(self) -> "PairSample":
        """The sample with unknown-word records dropped."""
        return PairSample(
            {(w, k): c for (w, k), c in self.counts.items() if w not in self.unknown}
        )

    def restrict_to(self, t: Taxonomy) -> "PairSample":
        return PairSample({(w, k): c for (w, k), c in self.counts.items() if w in t.leaf_of})


@dataclass(frozen=True)
class HeadSlice:
    key: Optional[HeadKey]
    counts: Mapping[str, int]

    @property
    def size(self) -> int:
        return sum(self.counts.values())


@dataclass(frozen=True)
class TestQuadruple:
    verb: str
    noun1: str
    prep: str
    noun2: str
    gold: str  # "V" or "N"

    __test__ = False  # keep pytest from collecting this class


def _identity(word: str) -> str:
    return word


_NUMERAL = re.compile(r"^[+-]?(\d+([.,]\d+)*|\d*\.\d+)$")


def preprocess_word(word: str, stemmer: Callable[[str], str] = _identity) -> str:
    """Normalize a token: years, then numerals, then the stemmer.

    >>> preprocess_word("1985"), preprocess_word("42"), preprocess_word("stock")
    ('year', 'number', 'stock')
    """
    if word.isdigit() and 1900 <= int(word) <= 2999:
        return "year"
    if _NUMERAL.match(word):
        return "number"
    return stemmer(word)


def _lines(stream: Iterable[str]):
    for lineno, raw in enumerate(stream, 1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        yield lineno, line


def ingest_triples(
    stream: Iterable[str],
    taxonomy: Optional[Taxonomy] = None,
    normalize: Optional[Callable[[str], str]] = None,
) -> PairSample:
    """Read ``head<TAB>slot<TAB>value[<TAB>count]`` lines into a sample.

    Repeated ``(head, slot, value)`` lines are merged.  When ``taxonomy`` is
    given, values that are not among its leaves are kept but flagged in
    ``PairSample.unknown``.  ``normalize`` is applied to heads and values.
    """
    counts: Counter = Counter()
    for lineno, line in _lines(stream):
        parts = line.split("\t")
        if len(parts) not in (3, 4):
            raise CorpusFormatError(lineno, f"expected 3 or 4 tab-separated fields, got {len(parts)}")
        head, slot, value = (p.strip() for p in parts[:3])
        if not head or not slot or not value:
            raise CorpusFormatError(lineno, "empty field")
        count = 1
        if len(parts) == 4:
            try:
                count = int(parts[3])
            except ValueError:
                raise CorpusFormatError(lineno, f"non-numeric count {parts[3]!r}") from None
            if count < 0:
                raise CorpusFormatError(lineno, f"negative count {count}")
        if normalize is not None:
            head, value = normalize(head), normalize(value)
        if count:
            counts[(value, HeadKey(head, slot))] += count
    unknown: frozenset[str] = frozenset()
    if taxonomy is not None:
        unknown = frozenset(w for w, _ in counts if w not in taxonomy.leaf_of)
    return PairSample(dict(counts), unknown)


def read_quadruples(
    stream: Iterable[str], normalize: Optional[Callable[[str], str]] = None
) -> list[TestQuadruple]:
    """Read ``verb<TAB>noun1<TAB>prep<TAB>noun2<TAB>gold`` lines, gold in {V, N}."""
    quads = []
    for lineno, line in _lines(stream):
        parts = [p.strip() for p in line.split("\t")]
        if len(parts) != 5:
            raise CorpusFormatError(lineno, f"expected 5 tab-separated fields, got {len(parts)}")
        verb, noun1, prep, noun2, gold = parts
        if gold not in ("V", "N"):
            raise CorpusFormatError(lineno, f"gold label must be V or N, got {gold!r}")
        if normalize is not None:
            verb, noun1, noun2 = normalize(verb), normalize(noun1), normalize(noun2)
        quads.append(TestQuadruple(verb, noun1, prep, noun2, gold))
    return quads


def project_values(s: PairSample) -> Counter:
    """Value-word marginal counts, summed over all head keys."""
    out: Counter = Counter()
    for (w, _), c in s.counts.items():
        out[w] += c
    return out


def slice_by_head(s: PairSample, key: HeadKey | tuple[str, str]) -> HeadSlice:
    key = HeadKey(*key)
    counts: Counter = Counter()
    for (w, k), c in s.counts.items():
        if k == key:
            counts[w] += c
    return HeadSlice(key, counts)


def slices(s: PairSample) -> dict[HeadKey, HeadSlice]:
    """All head slices in one pass."""
    grouped: dict[HeadKey, Counter] = {}
    for (w, k), c in s.counts.items():
        grouped.setdefault(k, Counter())[w] += c
    return {k: HeadSlice(k, grouped[k]) for k in sorted(grouped)}


def subtree_counts(t: Taxonomy, counts: Mapping[str, int]) -> list[int]:
    """Occurrence count of every node's class, indexed by node id.

    Words that are not leaves of ``t`` are ignored.
    """
    acc = [0] * len(t)
    for w, c in counts.items():
        v = t.leaf_of.get(w)
        if v is not None:
            acc[v] += c
    parents = t.parents
    for v in t.postorder:
        p = parents[v]
        if p is not None:
            acc[p] += acc[v]
    return acc


def class_count(t: Taxonomy, node: int, counts: Mapping[str, int]) -> int:
    """Number of occurrences of words belonging to the class of ``node``."""
    t.check_node(node)
    words = t.labels
    total = 0
    for v in t.subtree(node):
        if not t.children[v]:
            total += counts.get(words[v], 0)
    return total
