"""Tree cut models of a word distribution and their MDL estimation.

A tree cut model assigns a probability to every class of a cut and shares it
uniformly among the words in the class.  :func:`find_mdl` picks the cut whose
two-part code (half ``log2 N`` bits per class plus the data bits) is
shortest.  All logarithms are base 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Optional

import numpy as np

from ._arrays import best_cut, subtree_totals, tree_arrays
from .corpus import subtree_counts
from .taxonomy import InvalidCutError, Taxonomy, TreeCut, validate_cut

# number of parameters charged for a collapsed node inside find_mdl
_COLLAPSE_PARAMS = 1


@dataclass(frozen=True)
class TreeCutModel:
    """A cut plus one probability per cut member (aligned with ``cut``)."""

    taxonomy: Taxonomy = field(repr=False, compare=False)
    cut: TreeCut
    q: tuple[float, ...]
    n: Optional[int] = None  # sample size the model was fitted on

    def __post_init__(self):
        if len(self.q) != len(self.cut):
            raise ValueError("q must have one entry per cut member")
        if any(x < 0 for x in self.q):
            raise ValueError("probabilities must be nonnegative")
        if abs(math.fsum(self.q) - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {math.fsum(self.q)!r}, not 1")

    @cached_property
    def q_of(self) -> dict[int, float]:
        return dict(zip(self.cut.members, self.q))

    def member_of(self, leaf: int) -> int:
        members = self.q_of
        for a in self.taxonomy.ancestors(leaf):
            if a in members:
                return a
        raise AssertionError("cut does not cover leaf")  # excluded by validation

    def probability(self, word: str) -> float:
        return tcm_probability(self, self.taxonomy, word)


def tcm_probability(m: TreeCutModel, t: Taxonomy, word: str) -> float:
    """Per-word probability ``q(C) / |C|`` for the class ``C`` holding ``word``."""
    leaf = t.leaf(word)
    c = m.member_of(leaf)
    return m.q_of[c] / t.n_leaves[c]


def mle_tcm(t: Taxonomy, cut: TreeCut, counts: Mapping[str, int]) -> TreeCutModel:
    """Relative-frequency estimate of the class probabilities on a fixed cut."""
    problem = validate_cut(t, cut)
    if problem is not None:
        raise InvalidCutError(problem)
    acc = subtree_counts(t, counts)
    n = acc[t.root]
    if n <= 0:
        raise ValueError("cannot estimate from an empty sample")
    return TreeCutModel(t, cut, tuple(acc[c] / n for c in cut), n)


def _data_bits(k: int, n: int, size: int) -> float:
    # k * -log2((k / n) / size); an empty class costs nothing
    if k == 0:
        return 0.0
    return k * (math.log2(n) + math.log2(size) - math.log2(k))


def tcm_description_length(
    t: Taxonomy, cut: TreeCut, counts: Mapping[str, int], n: Optional[int] = None
) -> float:
    """Data bits of the maximum-likelihood model on ``cut`` plus
    ``|cut| / 2 * log2 n`` parameter bits.

    ``n`` defaults to the total count.
    """
    acc = subtree_counts(t, counts)
    total = acc[t.root]
    if n is None:
        n = total
    if n < 1:
        raise ValueError("sample size must be at least 1")
    data = math.fsum(_data_bits(acc[c], total, t.n_leaves[c]) for c in cut)
    return data + len(cut) / 2 * math.log2(n)


def find_mdl(
    t: Taxonomy, counts: Mapping[str, int], n: Optional[int] = None
) -> TreeCutModel:
    """Minimum description length tree cut model for ``counts``.

    Bottom-up: each internal node keeps its own class when that is strictly
    cheaper than the best cut found below it; ties keep the finer cut.
    ``n`` (the sample size in the penalty) defaults to the total count.
    """
    acc = subtree_totals(t, counts)
    total = int(acc[t.root])
    if n is None:
        n = total
    if total < 1 or n < 1:
        raise ValueError("cannot estimate from an empty sample")
    k = acc.astype(np.float64)
    size = tree_arrays(t).n_leaves
    with np.errstate(divide="ignore", invalid="ignore"):
        # k * -log2((k / total) / |C|); an empty class costs nothing
        data = np.where(k > 0, k * (math.log2(total) + np.log2(size) - np.log2(k)), 0.0)
    own = data + _COLLAPSE_PARAMS * math.log2(n) / 2
    members, _ = best_cut(t, own)
    return TreeCutModel(t, TreeCut(members), tuple(int(acc[c]) / total for c in members), n)
