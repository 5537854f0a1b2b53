"""Input checks shared by the estimators."""

from __future__ import annotations

from collections import Counter
from collections.abc import Mapping
from typing import Iterable, Optional

from .corpus import HeadKey, PairSample, TestQuadruple
from .taxonomy import Taxonomy, parse_taxonomy


def check_taxonomy(taxonomy) -> Taxonomy:
    if isinstance(taxonomy, Taxonomy):
        return taxonomy
    if isinstance(taxonomy, str):
        return parse_taxonomy(taxonomy)
    if isinstance(taxonomy, dict):
        return Taxonomy.from_dict(taxonomy)
    raise TypeError(f"taxonomy must be a Taxonomy, taxonomy text or dict, got {type(taxonomy).__name__}")


def check_word_counts(X) -> Counter:
    """Word counts from a mapping or an iterable of words."""
    if isinstance(X, Mapping):
        out = Counter()
        for w, c in X.items():
            if int(c) != c or c < 0:
                raise ValueError(f"count for {w!r} must be a nonnegative integer, got {c!r}")
            out[str(w)] += int(c)
        return out
    if isinstance(X, str):
        raise TypeError("expected an iterable of words, got a single string")
    return Counter(str(w) for w in X)


def check_triples(X) -> PairSample:
    """A :class:`PairSample` from a sample or rows ``(head, slot, value[, count])``."""
    if isinstance(X, PairSample):
        return X
    counts: Counter = Counter()
    for i, row in enumerate(X):
        row = tuple(row)
        if len(row) not in (3, 4):
            raise ValueError(f"row {i}: expected (head, slot, value[, count]), got {row!r}")
        count = 1 if len(row) == 3 else row[3]
        if int(count) != count or count < 0:
            raise ValueError(f"row {i}: bad count {count!r}")
        counts[(str(row[2]), HeadKey(str(row[0]), str(row[1])))] += int(count)
    return PairSample(dict(+counts))


def check_quadruples(X, y: Optional[Iterable] = None) -> list[TestQuadruple]:
    """Quadruples from :class:`TestQuadruple` objects or 4/5-tuples.

    Gold labels come from ``y`` when given, else from the rows themselves
    (``"N"`` when absent, which only matters for evaluation).
    """
    quads = []
    labels = list(y) if y is not None else None
    for i, row in enumerate(X):
        if isinstance(row, TestQuadruple):
            q = row
        else:
            row = tuple(row)
            if len(row) not in (4, 5):
                raise ValueError(f"row {i}: expected (verb, noun1, prep, noun2[, gold]), got {row!r}")
            gold = row[4] if len(row) == 5 else "N"
            q = TestQuadruple(*(str(x) for x in row[:4]), gold=str(gold))
        if labels is not None:
            q = TestQuadruple(q.verb, q.noun1, q.prep, q.noun2, str(labels[i]))
        if q.gold not in ("V", "N"):
            raise ValueError(f"row {i}: gold label must be 'V' or 'N', got {q.gold!r}")
        quads.append(q)
    if labels is not None and len(labels) != len(quads):
        raise ValueError(f"{len(quads)} quadruples but {len(labels)} labels")
    return quads
