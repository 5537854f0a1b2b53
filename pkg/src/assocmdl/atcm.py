"""Association tree cut models and their two-step MDL estimation.

Given a marginal tree cut model ``p`` over words, an association tree cut
model holds one association value ``A(C)`` per class of its own cut, so that
``h(n) = A(n) * p(n)`` is the conditional word distribution of one head.
The two cuts need not agree; :func:`extend_p_hat` carries the marginal to
any node of the tree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from ._arrays import best_cut, class_masses, subtree_totals
from .corpus import HeadKey, HeadSlice, PairSample, project_values, slice_by_head, subtree_counts
from .taxonomy import InvalidCutError, Taxonomy, TreeCut, validate_cut
from .tcm import TreeCutModel, find_mdl

_COLLAPSE_PARAMS = 1

DEFAULT_EPSILON = 1e-6


class EstimationError(ValueError):
    """Inputs admit no finite maximum likelihood association model."""


@dataclass(frozen=True)
class AssociationTreeCutModel:
    taxonomy: Taxonomy = field(repr=False, compare=False)
    cut: TreeCut
    a: tuple[float, ...]
    key: Optional[HeadKey] = None
    size: int = 0  # |S_v|, the slice size the model was fitted on

    def __post_init__(self):
        if len(self.a) != len(self.cut):
            raise ValueError("one association value per cut member is required")
        if any(not x >= 0 for x in self.a):
            raise ValueError("association values must be nonnegative")

    @cached_property
    def a_of(self) -> dict[int, float]:
        return dict(zip(self.cut.members, self.a))

    def member_of(self, leaf: int) -> int:
        a_of = self.a_of
        for v in self.taxonomy.ancestors(leaf):
            if v in a_of:
                return v
        raise AssertionError("cut does not cover leaf")

    def value(self, word: str) -> float:
        """Association value of ``word`` (that of its cut class)."""
        return self.a_of[self.member_of(self.taxonomy.leaf(word))]

    def scaled(self, c: float) -> "AssociationTreeCutModel":
        return AssociationTreeCutModel(
            self.taxonomy, self.cut, tuple(c * x for x in self.a), self.key, self.size
        )


@dataclass(frozen=True)
class TreeCutPairModel:
    """An association model together with the marginal it is relative to."""

    assoc: AssociationTreeCutModel
    marginal: TreeCutModel

    @property
    def taxonomy(self) -> Taxonomy:
        return self.assoc.taxonomy

    @property
    def key(self) -> Optional[HeadKey]:
        return self.assoc.key

    def residual(self) -> float:
        """Deviation of ``sum_C A(C) p(C)`` from 1."""
        return stochastic_residual(self)

    def conditional(self, word: str) -> float:
        return pair_conditional(self, self.taxonomy, word)


def p_hat_all(m: TreeCutModel, t: Taxonomy) -> list[float]:
    """Marginal probability of every node's class, indexed by node id.

    Cut members keep their own probability, nodes below a member get a
    share proportional to their leaf count, nodes above the cut sum their
    children.
    """
    return class_masses(t, m.cut.members, m.q).tolist()


def extend_p_hat(m: TreeCutModel, t: Taxonomy, node: int) -> float:
    """Marginal probability of an arbitrary node's class under ``m``."""
    t.check_node(node)
    q_of = m.q_of
    if node in q_of:
        return q_of[node]
    for a in t.ancestors(node):
        if a in q_of:
            return t.n_leaves[node] / t.n_leaves[a] * q_of[a]
    return math.fsum(extend_p_hat(m, t, c) for c in t.children[node])


def _association(k: int, size: int, p: float, v: int, t: Taxonomy, epsilon: Optional[float]) -> float:
    if k == 0:
        return 0.0
    if epsilon is not None:
        p = max(p, epsilon)
    if p <= 0.0:
        raise EstimationError(
            f"class {t.labels[v]!r} occurs {k} times in the slice but has marginal probability 0"
        )
    return k / size / p


def mle_pair(
    marginal: TreeCutModel,
    t: Taxonomy,
    cut: TreeCut,
    slice_: HeadSlice,
    epsilon: Optional[float] = None,
) -> tuple[AssociationTreeCutModel, tuple[float, ...]]:
    """Maximum likelihood association values on a fixed cut.

    Returns the model and the class probabilities ``h(C) = k(C) / |S_v|``.
    ``epsilon`` floors the marginal class probabilities when given.
    """
    problem = validate_cut(t, cut)
    if problem is not None:
        raise InvalidCutError(problem)
    size = slice_.size
    if size < 1:
        raise EstimationError("empty slice")
    acc = subtree_counts(t, slice_.counts)
    p = p_hat_all(marginal, t)
    h = tuple(acc[c] / size for c in cut)
    a = tuple(_association(acc[c], size, p[c], c, t, epsilon) for c in cut)
    return AssociationTreeCutModel(t, cut, a, slice_.key, size), h


def stochastic_residual(pm: TreeCutPairModel) -> float:
    t = pm.taxonomy
    p = p_hat_all(pm.marginal, t)
    return math.fsum(a * p[c] for c, a in zip(pm.assoc.cut, pm.assoc.a)) - 1.0


def pair_conditional(pm: TreeCutPairModel, t: Taxonomy, word: str) -> float:
    """``h(word) = A(word) * p(word)`` with ``p`` the per-word marginal."""
    leaf = t.leaf(word)
    return pm.assoc.a_of[pm.assoc.member_of(leaf)] * pm.marginal.probability(word)


def assoc_description_length(atcm: AssociationTreeCutModel, slice_: HeadSlice) -> float:
    """``|cut| / 2 * log2 |S_v|`` plus ``sum_C -k(C) log2 A(C)``.

    Only the terms that depend on the association model are included; the
    result may be negative.  A zero association on an observed class gives
    ``inf``.
    """
    size = slice_.size
    if size < 1:
        raise EstimationError("empty slice")
    t = atcm.taxonomy
    acc = subtree_counts(t, slice_.counts)
    terms = []
    for c, a in zip(atcm.cut, atcm.a):
        k = acc[c]
        if k == 0:
            continue
        if a == 0.0:
            return math.inf
        terms.append(-k * math.log2(a))
    return math.fsum(terms) + len(atcm.cut) / 2 * math.log2(size)


def find_assoc_mdl(
    slice_: HeadSlice,
    t: Taxonomy,
    marginal: TreeCutModel,
    epsilon: Optional[float] = None,
) -> AssociationTreeCutModel:
    """Association tree cut model of minimum description length.

    One bottom-up pass over the tree: a node's own class replaces the best
    cut below it only when strictly shorter.  Runs in time linear in the
    tree size plus the number of distinct slice words.
    """
    size = slice_.size
    if size < 1:
        raise EstimationError("empty slice")
    acc = subtree_totals(t, slice_.counts)
    if acc[t.root] != size:
        raise EstimationError("slice contains words outside the taxonomy")
    p = class_masses(t, marginal.cut.members, marginal.q)
    if epsilon is not None:
        p = np.maximum(p, epsilon)
    k = acc.astype(np.float64)
    seen = k > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        value = np.where(seen & (p > 0), k / size / p, 0.0)
        # -k log2 A, expanded to avoid the division
        data = np.where(seen, k * (math.log2(size) + np.log2(p) - np.log2(k)), 0.0)
    # observed but impossible under the marginal: never selectable
    data[seen & (p <= 0)] = math.inf
    own = data + _COLLAPSE_PARAMS * math.log2(size) / 2
    members, _ = best_cut(t, own)
    return AssociationTreeCutModel(
        t, TreeCut(members), tuple(float(value[c]) for c in members), slice_.key, size
    )


def assoc_mdl(
    t: Taxonomy,
    s: PairSample,
    key: HeadKey | tuple[str, str],
    epsilon: Optional[float] = None,
    marginal: Optional[TreeCutModel] = None,
) -> TreeCutPairModel:
    """Two-step estimate for one head: the marginal from the whole sample,
    then the association model from the head's slice.

    Pass ``marginal`` to reuse one already fitted on ``s``.
    """
    s = s.restrict_to(t)
    if marginal is None:
        counts = project_values(s)
        if not counts:
            raise EstimationError("empty sample")
        marginal = find_mdl(t, counts)
    slice_ = slice_by_head(s, key)
    if slice_.size < 1:
        raise EstimationError(f"no observations for head key {tuple(key)!r}")
    return TreeCutPairModel(find_assoc_mdl(slice_, t, marginal, epsilon), marginal)
