"""Oracle equivalence suite: fast estimators against exhaustive search."""

from __future__ import annotations

import contextlib
import math
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator
from unittest import mock

import numpy as np

from . import atcm as atcm_mod
from . import tcm as tcm_mod
from .atcm import TreeCutPairModel, assoc_description_length, find_assoc_mdl, mle_pair, stochastic_residual
from .corpus import HeadKey, HeadSlice
from .oracle import (
    brute_force_assoc_mdl,
    brute_force_mdl,
    grid_verify_mle,
    random_counts,
    random_taxonomy,
    thin_counts,
)
from .taxonomy import Taxonomy, parse_taxonomy
from .tcm import find_mdl, tcm_description_length

MAX_LEAVES = 12
COST_TOL = 1e-9
RESIDUAL_TOL = 1e-9
GRID_TOL = 1e-9


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    failures: list[str] = field(default_factory=list)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}: {self.detail} ({self.seconds:.2f}s)"


def instances(seed: int, count: int, max_leaves: int = MAX_LEAVES) -> Iterator[tuple[Taxonomy, Counter, Counter]]:
    """Random ``(taxonomy, marginal counts, slice counts)`` triples.

    The slice is a binomial thinning of the marginal counts, so it is a
    sub-multiset of the sample the marginal is fitted on.
    """
    rng = np.random.default_rng(seed)
    for _ in range(count):
        t = random_taxonomy(rng, max_leaves=max_leaves)
        total = int(rng.integers(1, 400))
        counts = random_counts(rng, t, total)
        sl = thin_counts(rng, counts, float(rng.uniform(0.05, 0.6)))
        yield t, counts, sl


def _dump(t: Taxonomy, counts, extra: str = "") -> str:
    return f"tree={t.to_sexpr()} counts={dict(counts)} {extra}".strip()


def check_marginal(seed: int = 0, count: int = 200, cap: int = MAX_LEAVES) -> CheckResult:
    start = time.perf_counter()
    failures, skipped, worst = [], 0, 0.0
    for t, counts, _ in instances(seed, count):
        if t.n_leaves[t.root] > cap:
            skipped += 1
            continue
        fast = find_mdl(t, counts)
        fast_cost = tcm_description_length(t, fast.cut, counts)
        _, brute_cost = brute_force_mdl(t, counts, cap=cap)
        gap = abs(fast_cost - brute_cost)
        worst = max(worst, gap)
        if not gap <= COST_TOL:
            failures.append(_dump(t, counts, f"fast={fast_cost!r} brute={brute_cost!r}"))
    done = count - skipped
    detail = f"{done} instances, max |cost gap| {worst:.2e}"
    if skipped:
        detail += f", {skipped} skipped (enumeration cap {cap})"
    return CheckResult("marginal oracle equivalence", not failures, detail, failures,
                       time.perf_counter() - start)


def check_association(seed: int = 1, count: int = 200, cap: int = MAX_LEAVES) -> CheckResult:
    start = time.perf_counter()
    failures, skipped, worst, worst_res = [], 0, 0.0, 0.0
    for t, counts, sl_counts in instances(seed, count):
        if t.n_leaves[t.root] > cap:
            skipped += 1
            continue
        marginal = find_mdl(t, counts)
        sl = HeadSlice(HeadKey("v", "s"), sl_counts)
        fast = find_assoc_mdl(sl, t, marginal)
        fast_cost = assoc_description_length(fast, sl)
        _, brute_cost = brute_force_assoc_mdl(t, marginal, sl, cap=cap)
        gap = abs(fast_cost - brute_cost)
        worst = max(worst, gap)
        res = abs(stochastic_residual(TreeCutPairModel(fast, marginal)))
        worst_res = max(worst_res, res)
        if not gap <= COST_TOL or not res <= RESIDUAL_TOL:
            failures.append(_dump(t, sl_counts, f"marginal={dict(counts)} fast={fast_cost!r} brute={brute_cost!r} residual={res!r}"))
    done = count - skipped
    detail = f"{done} instances, max |cost gap| {worst:.2e}, max residual {worst_res:.2e}"
    if skipped:
        detail += f", {skipped} skipped (enumeration cap {cap})"
    return CheckResult("association oracle equivalence", not failures, detail, failures,
                       time.perf_counter() - start)


def grid_instances(seed: int, count: int, max_cut: int = 3):
    """Random ``(taxonomy, marginal, cut, slice)`` with a cut of at most ``max_cut`` classes."""
    from .oracle import enumerate_cuts

    rng = np.random.default_rng(seed)
    made = 0
    while made < count:
        t = random_taxonomy(rng, max_leaves=8)
        counts = random_counts(rng, t, int(rng.integers(5, 300)))
        marginal = find_mdl(t, counts)
        cuts = [c for c in enumerate_cuts(t) if len(c) <= max_cut]
        cut = cuts[int(rng.integers(len(cuts)))]
        sl = HeadSlice(HeadKey("v", "s"), thin_counts(rng, counts, float(rng.uniform(0.1, 0.7))))
        made += 1
        yield t, marginal, cut, sl


def check_grid(seed: int = 2, count: int = 50, resolution: float = 1e-3) -> CheckResult:
    start = time.perf_counter()
    failures, worst = [], -math.inf
    for t, marginal, cut, sl in grid_instances(seed, count):
        gap = grid_verify_mle(t, marginal, cut, sl, resolution)
        worst = max(worst, gap)
        if not gap <= GRID_TOL:
            failures.append(_dump(t, sl.counts, f"cut={cut.labels(t)} gap={gap!r}"))
    return CheckResult("maximum likelihood grid check", not failures,
                       f"{count} instances, resolution {resolution:g}, max gap {worst:.2e}",
                       failures, time.perf_counter() - start)


GOLDEN_TREE = "(BIRD swallow crow robin)"
GOLDEN_MARGINAL = {"swallow": 42, "crow": 66, "robin": 9}
GOLDEN_SLICE = {"swallow": 4, "crow": 7, "robin": 1}


def check_golden() -> CheckResult:
    start = time.perf_counter()
    t = parse_taxonomy(GOLDEN_TREE)
    counts = Counter(GOLDEN_MARGINAL)
    sl = HeadSlice(HeadKey("fly", "subj"), Counter(GOLDEN_SLICE))
    problems = []
    marginal = find_mdl(t, counts)
    leaf_bits = tcm_description_length(t, t.leaf_cut(), counts)
    root_bits = tcm_description_length(t, t.root_cut(), counts)
    if marginal.cut != t.leaf_cut():
        problems.append(f"marginal cut {marginal.cut.labels(t)} is not the leaf cut")
    if abs(leaf_bits - 160.20) > 0.01 or abs(root_bits - 188.88) > 0.01:
        problems.append(f"marginal lengths {leaf_bits:.4f} / {root_bits:.4f}")
    leaf_model, _ = mle_pair(marginal, t, t.leaf_cut(), sl)
    for got, want in zip(leaf_model.a, (0.928571, 1.034091, 1.083333)):
        if abs(got - want) > 1e-6:
            problems.append(f"leaf association {got!r} != {want}")
    leaf_cost = assoc_description_length(leaf_model, sl)
    assoc = find_assoc_mdl(sl, t, marginal)
    cost = assoc_description_length(assoc, sl)
    if assoc.cut != t.root_cut() or abs(cost - 1.79248) > 1e-4 or abs(leaf_cost - 5.3511) > 1e-3:
        problems.append(f"assoc cut {assoc.cut.labels(t)} cost {cost:.5f}, leaf cost {leaf_cost:.5f}")
    return CheckResult("golden bird example", not problems,
                       f"leaf/root {leaf_bits:.2f}/{root_bits:.2f} bits, assoc [BIRD] {cost:.5f} vs leaves {leaf_cost:.4f}",
                       problems, time.perf_counter() - start)


@contextlib.contextmanager
def penalty_mutation(extra: int = 1):
    """Charge ``1 + extra`` parameters per class inside the fast searches only."""
    with mock.patch.object(tcm_mod, "_COLLAPSE_PARAMS", 1 + extra), \
            mock.patch.object(atcm_mod, "_COLLAPSE_PARAMS", 1 + extra):
        yield


def run_suite(
    seed: int = 0,
    instances_per_check: int = 200,
    grid_count: int = 50,
    resolution: float = 1e-3,
    cap: int = MAX_LEAVES,
    mutate: bool = False,
) -> list[CheckResult]:
    ctx = penalty_mutation() if mutate else contextlib.nullcontext()
    with ctx:
        return [
            check_golden(),
            check_marginal(seed, instances_per_check, cap),
            check_association(seed + 1, instances_per_check, cap),
            check_grid(seed + 2, grid_count, resolution),
        ]
