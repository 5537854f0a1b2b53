"""Brute-force verifiers and synthetic data for the MDL estimators.

Everything here is deliberately naive: cuts are enumerated exhaustively and
costs are summed leaf by leaf from word sets, without the per-node
bookkeeping the fast estimators rely on.

Random taxonomies follow a fixed protocol so that oracle corpora are
reproducible from a seed: starting from a single root, a random leaf of depth
below ``max_depth`` is expanded into 2 to 4 children (uniformly) until the
leaf budget would be exceeded or a coin flip stops growth.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterator, Mapping, Optional, Sequence

import numpy as np

from .atcm import AssociationTreeCutModel, TreeCutPairModel, mle_pair, stochastic_residual
from .corpus import HeadKey, HeadSlice, PairSample, TestQuadruple
from .modelio import dump_pair, load_pair, pair_extras
from .taxonomy import Taxonomy, TreeCut, meet
from .tcm import TreeCutModel

DEFAULT_CAP = 16


class EnumerationCapExceeded(ValueError):
    pass


def count_cuts(t: Taxonomy) -> int:
    """Number of tree cuts: 1 for a leaf, ``1 + prod(children)`` otherwise."""
    n = [1] * len(t)
    for v in t.postorder:
        if t.children[v]:
            n[v] = 1 + math.prod(n[c] for c in t.children[v])
    return n[t.root]


def _check_cap(t: Taxonomy, cap: int) -> None:
    n = t.n_leaves[t.root]
    if n > cap:
        raise EnumerationCapExceeded(f"taxonomy has {n} leaves, enumeration cap is {cap}")


def enumerate_cuts(t: Taxonomy, cap: int = DEFAULT_CAP) -> Iterator[TreeCut]:
    """Yield every tree cut of ``t`` once, members left to right."""
    _check_cap(t, cap)

    def rec(v: int) -> list[tuple[int, ...]]:
        out = [(v,)]
        if t.children[v]:
            for combo in itertools.product(*(rec(c) for c in t.children[v])):
                out.append(tuple(itertools.chain.from_iterable(combo)))
        return out

    for members in rec(t.root):
        yield TreeCut(members)


def _words_under(t: Taxonomy, v: int) -> list[str]:
    return [t.labels[u] for u in t.subtree(v) if not t.children[u]]


def _tcm_cost(t: Taxonomy, cut: TreeCut, counts: Mapping[str, int], n: int) -> float:
    total = sum(counts.get(w, 0) for w in t.words)
    bits = []
    for c in cut:
        words = _words_under(t, c)
        k = sum(counts.get(w, 0) for w in words)
        per_word = k / total / len(words)
        for w in words:
            m = counts.get(w, 0)
            if m:
                bits.append(-m * math.log2(per_word))
    return math.fsum(bits) + len(cut) / 2 * math.log2(n)


def _better(cost: float, size: int, best: Optional[tuple[float, int]]) -> bool:
    if best is None:
        return True
    tol = 1e-12 * max(1.0, abs(best[0]))
    if cost < best[0] - tol:
        return True
    return abs(cost - best[0]) <= tol and size > best[1]


def brute_force_mdl(
    t: Taxonomy, counts: Mapping[str, int], n: Optional[int] = None, cap: int = DEFAULT_CAP
) -> tuple[TreeCut, float]:
    """Exhaustive minimizer of the tree cut model description length.

    Ties go to the cut with more classes.
    """
    _check_cap(t, cap)
    total = sum(counts.get(w, 0) for w in t.words)
    if total < 1:
        raise ValueError("cannot estimate from an empty sample")
    n = total if n is None else n
    best_cut, best = None, None
    for cut in enumerate_cuts(t, cap):
        cost = _tcm_cost(t, cut, counts, n)
        if _better(cost, len(cut), best):
            best_cut, best = cut, (cost, len(cut))
    return best_cut, best[0]


def _leaf_marginal(t: Taxonomy, marginal: TreeCutModel) -> dict[str, float]:
    """Per-word marginal probability, class probability shared uniformly."""
    out = {}
    for c, q in zip(marginal.cut, marginal.q):
        words = _words_under(t, c)
        for w in words:
            out[w] = q / len(words)
    return out


def oracle_pair_mle(
    t: Taxonomy, marginal: TreeCutModel, cut: TreeCut, counts: Mapping[str, int]
) -> list[float]:
    """Association values on ``cut`` from word-level sums (no node arithmetic)."""
    pw = _leaf_marginal(t, marginal)
    size = sum(counts.get(w, 0) for w in t.words)
    out = []
    for c in cut:
        words = _words_under(t, c)
        k = sum(counts.get(w, 0) for w in words)
        p = math.fsum(pw[w] for w in words)
        out.append(0.0 if k == 0 else (k / size) / p if p > 0 else math.nan)
    return out


def _assoc_cost(t: Taxonomy, cut: TreeCut, a: Sequence[float], counts: Mapping[str, int]) -> float:
    size = sum(counts.get(w, 0) for w in t.words)
    bits = []
    for c, av in zip(cut, a):
        for w in _words_under(t, c):
            m = counts.get(w, 0)
            if not m:
                continue
            if not av > 0:
                return math.inf
            bits.append(-m * math.log2(av))
    return math.fsum(bits) + len(cut) / 2 * math.log2(size)


def brute_force_assoc_mdl(
    t: Taxonomy, marginal: TreeCutModel, slice_: HeadSlice, cap: int = DEFAULT_CAP
) -> tuple[TreeCut, float]:
    """Exhaustive minimizer of the association description length, with the
    maximum likelihood association values of every cut."""
    _check_cap(t, cap)
    if slice_.size < 1:
        raise ValueError("empty slice")
    best_cut, best = None, None
    for cut in enumerate_cuts(t, cap):
        a = oracle_pair_mle(t, marginal, cut, slice_.counts)
        cost = _assoc_cost(t, cut, a, slice_.counts)
        if _better(cost, len(cut), best):
            best_cut, best = cut, (cost, len(cut))
    return best_cut, best[0]


def _simplex_grid(dim: int, steps: int) -> np.ndarray:
    """All points of the ``dim``-simplex with coordinates in multiples of 1/steps."""
    if dim == 1:
        return np.ones((1, 1))
    if dim == 2:
        i = np.arange(steps + 1)
        return np.stack([i, steps - i], axis=1) / steps
    if dim == 3:
        i, j = np.meshgrid(np.arange(steps + 1), np.arange(steps + 1), indexing="ij")
        keep = i + j <= steps
        i, j = i[keep], j[keep]
        return np.stack([i, j, steps - i - j], axis=1) / steps
    if dim == 4:
        if (steps + 1) ** 3 > 2 * 10**7:
            raise ValueError("4-class grids need a resolution of 1/270 or coarser")
        i, j, k = np.meshgrid(*(np.arange(steps + 1),) * 3, indexing="ij")
        keep = i + j + k <= steps
        i, j, k = i[keep], j[keep], k[keep]
        return np.stack([i, j, k, steps - i - j - k], axis=1) / steps
    raise ValueError("grid search supports at most 4 classes")


def log_likelihood(
    t: Taxonomy, marginal: TreeCutModel, cut: TreeCut, a: np.ndarray, counts: Mapping[str, int]
) -> np.ndarray:
    """Log2 likelihood of the slice under ``A * p`` over the meet of ``cut``
    and the marginal's cut.  ``a`` may hold several candidate rows."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    pw = _leaf_marginal(t, marginal)
    fine = meet(t, cut, marginal.cut)
    pos = {c: i for i, c in enumerate(cut)}
    ll = np.zeros(a.shape[0])
    for c in fine:
        words = _words_under(t, c)
        k = sum(counts.get(w, 0) for w in words)
        if not k:
            continue
        owner = next(pos[u] for u in t.ancestors(c) if u in pos)
        p = math.fsum(pw[w] for w in words)
        with np.errstate(divide="ignore"):
            ll += k * np.log2(a[:, owner] * p)
    return ll


def grid_verify_mle(
    t: Taxonomy,
    marginal: TreeCutModel,
    cut: TreeCut,
    slice_: HeadSlice,
    resolution: float = 1e-3,
) -> float:
    """Best grid log-likelihood minus the closed-form estimate's.

    The grid covers association vectors satisfying ``sum_C A(C) p(C) = 1``
    through the class masses ``A(C) p(C)``, spaced by ``resolution``.  A
    correct closed form gives a gap of at most 0 up to rounding.
    """
    if len(cut) > 4:
        raise ValueError("grid search supports at most 4 classes")
    pw = _leaf_marginal(t, marginal)
    p = np.array([math.fsum(pw[w] for w in _words_under(t, c)) for c in cut])
    steps = int(round(1 / resolution))
    masses = _simplex_grid(len(cut), steps)
    ok = np.all((p > 0) | (masses == 0), axis=1)
    masses = masses[ok]
    with np.errstate(divide="ignore", invalid="ignore"):
        grid_a = np.where(p > 0, masses / np.where(p > 0, p, 1.0), 0.0)
    grid_best = log_likelihood(t, marginal, cut, grid_a, slice_.counts).max()
    est, _ = mle_pair(marginal, t, cut, slice_)
    est_ll = log_likelihood(t, marginal, cut, np.array(est.a), slice_.counts)[0]
    if grid_best == est_ll:
        # also covers a slice word the marginal rules out: both are -inf
        return 0.0
    return float(grid_best - est_ll)


# -- synthetic data ----------------------------------------------------


def random_taxonomy(
    rng: np.random.Generator, max_leaves: int = 12, max_depth: int = 4, stop: float = 0.15
) -> Taxonomy:
    parents: list[Optional[int]] = [None]
    depth = [0]
    leaves = [0]
    while True:
        expandable = [v for v in leaves if depth[v] < max_depth]
        if not expandable:
            break
        k = int(rng.integers(2, 5))
        if len(leaves) - 1 + k > max_leaves:
            break
        if len(leaves) > 1 and rng.random() < stop:
            break
        v = expandable[int(rng.integers(len(expandable)))]
        leaves.remove(v)
        for _ in range(k):
            parents.append(v)
            depth.append(depth[v] + 1)
            leaves.append(len(parents) - 1)
    return _from_parents(parents)


def _from_parents(parents: list[Optional[int]]) -> Taxonomy:
    has_child = {p for p in parents if p is not None}
    labels = [f"c{v}" if v in has_child else f"w{v}" for v in range(len(parents))]
    return Taxonomy(labels, parents)


def balanced_taxonomy(n_leaves: int, branching: int = 2) -> Taxonomy:
    """Complete tree with ``n_leaves`` leaves (a power of ``branching``)."""
    depth = round(math.log(n_leaves, branching))
    if branching**depth != n_leaves:
        raise ValueError("n_leaves must be a power of the branching factor")
    parents: list[Optional[int]] = [None]
    level = [0]
    for _ in range(depth):
        nxt = []
        for v in level:
            for _ in range(branching):
                parents.append(v)
                nxt.append(len(parents) - 1)
        level = nxt
    return _from_parents(parents)


def random_counts(
    rng: np.random.Generator, t: Taxonomy, total: int, zero_prob: float = 0.2
) -> Counter:
    """Multinomial word counts over a random Dirichlet distribution, some
    words forced to zero."""
    words = t.words
    w = rng.dirichlet(np.full(len(words), 0.7))
    w[rng.random(len(words)) < zero_prob] = 0.0
    if w.sum() == 0:
        w[int(rng.integers(len(words)))] = 1.0
    draws = rng.multinomial(total, w / w.sum())
    return Counter({word: int(c) for word, c in zip(words, draws) if c})


def thin_counts(rng: np.random.Generator, counts: Mapping[str, int], rate: float) -> Counter:
    """Binomial subsample of ``counts``; at least one occurrence survives."""
    out = Counter({w: int(rng.binomial(c, rate)) for w, c in counts.items()})
    out = +out
    if not out:
        w = max(counts, key=counts.get)
        out[w] = 1
    return out


@dataclass(frozen=True)
class PlantedModel:
    """Ground-truth pair model plus the seed and sample sizes to draw."""

    model: TreeCutPairModel
    seed: int = 0
    schedule: tuple[int, ...] = (10_000,)

    def __post_init__(self):
        res = abs(stochastic_residual(self.model))
        if res > 1e-9:
            raise ValueError(f"planted model violates the stochastic condition (residual {res:g})")
        h = word_distribution(self.model)
        if any(x < 0 or x > 1 for x in h.values()):
            raise ValueError("planted per-word probabilities must lie in [0, 1]")


def dump_planted(pm: PlantedModel) -> str:
    """Pair-model text plus ``seed`` and ``schedule`` records."""
    return dump_pair(pm.model, {"seed": str(pm.seed), "schedule": ",".join(map(str, pm.schedule))})


def load_planted(t: Taxonomy, text: str) -> PlantedModel:
    extras = pair_extras(text)
    schedule = tuple(int(x) for x in extras.get("schedule", "").split(",") if x)
    return PlantedModel(load_pair(t, text), int(extras.get("seed", 0)), schedule or (10_000,))


def word_distribution(pm: TreeCutPairModel) -> dict[str, float]:
    """Per-word ``A(n) p(n)`` of a pair model."""
    return {w: pm.conditional(w) for w in pm.taxonomy.words}


def plant(
    t: Taxonomy,
    marginal: Mapping[int, float],
    assoc: Mapping[int, float],
    key: HeadKey = HeadKey("v", "slot"),
    seed: int = 0,
    schedule: tuple[int, ...] = (10_000,),
) -> PlantedModel:
    """Build a planted model from ``{node: q}`` and ``{node: A}`` maps."""
    mcut = t.cut(marginal)
    acut = t.cut(assoc)
    m = TreeCutModel(t, mcut, tuple(marginal[c] for c in mcut))
    a = AssociationTreeCutModel(t, acut, tuple(assoc[c] for c in acut), key, 0)
    return PlantedModel(TreeCutPairModel(a, m), seed, schedule)


def sample_from_pair(
    pm: PlantedModel, n: int, seed: Optional[int] = None, n_background: Optional[int] = None
) -> tuple[HeadSlice, Counter]:
    """Draw ``n`` words from ``A * p`` for the head and ``n_background``
    (default ``n``) words from ``p`` for the background sample."""
    rng = np.random.default_rng(pm.seed if seed is None else seed)
    model = pm.model
    words = model.taxonomy.words
    h = np.array([model.conditional(w) for w in words])
    p = np.array([model.marginal.probability(w) for w in words])
    n_background = n if n_background is None else n_background
    head = rng.multinomial(n, h / h.sum()) if n else np.zeros(len(words), dtype=int)
    back = rng.multinomial(n_background, p / p.sum()) if n_background else np.zeros(len(words), dtype=int)
    slice_counts = Counter({w: int(c) for w, c in zip(words, head) if c})
    return HeadSlice(model.key, slice_counts), Counter({w: int(c) for w, c in zip(words, back) if c})


def class_association(t: Taxonomy, pm: TreeCutPairModel, node: int) -> float:
    """Effective association of a class: its ``h`` mass over its ``p`` mass."""
    words = _words_under(t, node)
    hm = math.fsum(pm.conditional(w) for w in words)
    pmass = math.fsum(pm.marginal.probability(w) for w in words)
    return hm / pmass if pmass > 0 else math.nan


@dataclass
class AttachmentSuite:
    """Synthetic training sample and test quadruples with planted gold labels."""

    taxonomy: Taxonomy
    sample: PairSample
    quads: list
    planted: dict  # HeadKey -> planted association per class node
    classes: tuple[int, ...]


def attachment_suite(
    seed: int,
    n_heads: int = 8,
    n_per_head: int = 10_000,
    n_quads: int = 200,
    n_classes: int = 4,
    leaves_per_class: int = 4,
    high: float = 2.5,
    slot: str = "with",
    n_background: Optional[int] = None,
    concentration: Optional[float] = None,
) -> AttachmentSuite:
    """Planted pair models over a two-level taxonomy, one per head.

    The marginal is uniform over ``n_classes`` classes.  By default each
    head prefers one class (association ``high``, the rest share what the
    stochastic condition leaves), so heads preferring different classes
    are separable.  With ``concentration`` the association vectors are
    instead Dirichlet draws, giving overlapping, harder instances.  Gold
    labels follow the planted ordering ``A_verb(noun2)`` vs
    ``A_noun1(noun2)``; ties are not generated.  A background head draws
    ``n_background`` words (default ``n_per_head``) from the marginal.
    """
    rng = np.random.default_rng(seed)
    parents: list[Optional[int]] = [None]
    for _ in range(n_classes):
        parents.append(0)
    for c in range(1, n_classes + 1):
        parents.extend([c] * leaves_per_class)
    t = _from_parents(parents)
    classes = tuple(range(1, n_classes + 1))
    q = 1.0 / n_classes
    marginal = {c: q for c in classes}
    planted: dict = {}
    counts: Counter = Counter()
    heads = [f"h{i}" for i in range(n_heads)]
    for i, head in enumerate(heads):
        key = HeadKey(head, slot)
        if concentration is None:
            low = (1.0 - high * q) / (q * (n_classes - 1))
            a = {c: (high if j == i % n_classes else low) for j, c in enumerate(classes)}
        else:
            mass = rng.dirichlet(np.full(n_classes, concentration))
            a = {c: float(m) / q for c, m in zip(classes, mass)}
        pm = plant(t, marginal, a, key)
        sl, _ = sample_from_pair(pm, n_per_head, seed=int(rng.integers(2**32)), n_background=0)
        planted[key] = a
        for w, c in sl.counts.items():
            counts[(w, key)] += c
    bg_key = HeadKey("_background", slot)
    n_bg = n_per_head if n_background is None else n_background
    bg = rng.multinomial(n_bg, np.full(len(t.words), 1 / len(t.words)))
    for w, c in zip(t.words, bg):
        if c:
            counts[(w, bg_key)] += int(c)

    quads = []
    while len(quads) < n_quads:
        v, n1 = rng.choice(n_heads, 2, replace=False)
        kv, kn = HeadKey(heads[v], slot), HeadKey(heads[n1], slot)
        word = t.words[int(rng.integers(len(t.words)))]
        c = t.parents[t.leaf(word)]
        av, an = planted[kv][c], planted[kn][c]
        if av == an:
            continue
        quads.append(TestQuadruple(heads[v], heads[n1], slot, word, "V" if av > an else "N"))
    return AttachmentSuite(t, PairSample(dict(counts)), quads, planted, classes)
