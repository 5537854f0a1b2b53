"""Per-slot fitting of marginals, association models and conditional TCMs."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .atcm import EstimationError, TreeCutPairModel, assoc_description_length, find_assoc_mdl
from .corpus import HeadKey, HeadSlice, PairSample, TestQuadruple, project_values, slices
from .disambiguation import (
    AttachmentDecision,
    SelectionalAssociation,
    decide_attachment,
    default_decide,
    mdl_conditional_decide,
    sa_decide,
)
from .taxonomy import Taxonomy
from .tcm import TreeCutModel, find_mdl, tcm_description_length

log = logging.getLogger(__name__)


@dataclass
class FittedModels:
    """Everything fitted from one training sample, keyed by slot / head key."""

    marginals: dict[str, TreeCutModel] = field(default_factory=dict)
    pairs: dict[HeadKey, TreeCutPairModel] = field(default_factory=dict)
    conditionals: dict[HeadKey, TreeCutModel] = field(default_factory=dict)


def _fit_head(
    t: Taxonomy, marginal: TreeCutModel, sl: HeadSlice, epsilon: Optional[float]
) -> tuple[TreeCutPairModel, TreeCutModel]:
    pair = TreeCutPairModel(find_assoc_mdl(sl, t, marginal, epsilon), marginal)
    return pair, find_mdl(t, sl.counts)


def fit_models(
    t: Taxonomy,
    sample: PairSample,
    slots: Optional[Iterable[str]] = None,
    epsilon: Optional[float] = None,
    n_jobs: Optional[int] = None,
) -> FittedModels:
    """Fit one marginal per slot, then every head of the slot.

    Heads are fitted on a thread pool of ``n_jobs`` workers (serially when
    ``None`` or 1); results are collected in sorted head order.
    """
    usable = sample.restrict_to(t)
    if usable.total == 0:
        raise EstimationError("empty usable sample: no value word is in the taxonomy")
    wanted = set(slots) if slots is not None else None
    out = FittedModels()
    for slot in usable.slots():
        if wanted is not None and slot not in wanted:
            continue
        part = usable.for_slot(slot)
        counts = project_values(part)
        marginal = find_mdl(t, counts)
        out.marginals[slot] = marginal
        log.info(
            "slot %s: |S|=%d marginal cut size %d, %.3f bits",
            slot, marginal.n, len(marginal.cut), tcm_description_length(t, marginal.cut, counts),
        )
        heads = list(slices(part).values())
        if n_jobs is not None and n_jobs > 1:
            with ThreadPoolExecutor(n_jobs) as pool:
                results = list(pool.map(lambda sl: _fit_head(t, marginal, sl, epsilon), heads))
        else:
            results = [_fit_head(t, marginal, sl, epsilon) for sl in heads]
        for sl, (pair, cond) in zip(heads, results):
            out.pairs[sl.key] = pair
            out.conditionals[sl.key] = cond
            log.debug(
                "%s/%s: |S_v|=%d assoc cut %d (%.3f bits), conditional cut %d",
                slot, sl.key.head, sl.size, len(pair.assoc.cut),
                assoc_description_length(pair.assoc, sl), len(cond.cut),
            )
    if wanted is not None and not out.marginals:
        raise EstimationError(f"no usable triples for slot(s) {sorted(wanted)}")
    return out


METHODS = ("Default", "MDL", "SA", "Assoc")


def decide_all(
    t: Taxonomy,
    quads: Iterable[TestQuadruple],
    models: FittedModels,
    sample: PairSample,
    threshold: Optional[float] = None,
) -> dict[str, list[tuple[AttachmentDecision, str]]]:
    """Decisions of every method on every quadruple, paired with gold labels."""
    quads = list(quads)
    sa_by_slot: dict[str, SelectionalAssociation] = {}
    out: dict[str, list] = {m: [] for m in METHODS}
    for q in quads:
        kv, kn = HeadKey(q.verb, q.prep), HeadKey(q.noun1, q.prep)
        out["Default"].append((default_decide(q), q.gold))
        out["MDL"].append(
            (mdl_conditional_decide(q, models.conditionals.get(kv), models.conditionals.get(kn), threshold), q.gold)
        )
        if q.prep not in sa_by_slot:
            sa_by_slot[q.prep] = SelectionalAssociation(sample.for_slot(q.prep), t)
        out["SA"].append((sa_decide(q, sa_by_slot[q.prep], t, threshold), q.gold))
        out["Assoc"].append((decide_attachment(q, models.pairs.get(kv), models.pairs.get(kn), threshold), q.gold))
    return out
