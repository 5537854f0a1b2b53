"""PP-attachment decisions, baselines and coverage/accuracy evaluation.

Each method scores the verb side and the noun side of a
``(verb, noun1, prep, noun2)`` quadruple and attaches to the larger score.
Equal or unavailable scores leave the quadruple undecided.  A confidence
value (score difference over its approximate standard deviation) lets a
threshold trade coverage for accuracy.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence, Union

from .atcm import AssociationTreeCutModel, TreeCutPairModel
from .corpus import HeadKey, PairSample, TestQuadruple, project_values, slices
from .taxonomy import Taxonomy
from .tcm import TreeCutModel


class Attachment(str, Enum):
    VERB = "V"
    NOUN = "N"
    UNDECIDED = "-"


@dataclass(frozen=True)
class AttachmentDecision:
    choice: Attachment
    verb_score: Optional[float] = None
    noun_score: Optional[float] = None
    confidence: Optional[float] = None

    @property
    def decided(self) -> bool:
        return self.choice is not Attachment.UNDECIDED

    def preferred(self) -> Attachment:
        """Side with the larger score, ignoring any confidence threshold."""
        return _compare(self.verb_score, self.noun_score)


@dataclass(frozen=True)
class CurvePoint:
    threshold: float
    coverage: float  # ratio in [0, 1]
    accuracy: Optional[float]  # ratio, None when nothing is decided


@dataclass(frozen=True)
class EvaluationReport:
    coverage: float  # percent
    accuracy: Optional[float]  # percent
    n_test: int
    curve: list[CurvePoint] = field(default_factory=list)


def _compare(vs: Optional[float], ns: Optional[float]) -> Attachment:
    if vs is None or ns is None or vs == ns or math.isnan(vs) or math.isnan(ns):
        return Attachment.UNDECIDED
    return Attachment.VERB if vs > ns else Attachment.NOUN


def _passes(confidence: Optional[float], threshold: Optional[float]) -> bool:
    if threshold is None:
        return True
    if math.isinf(threshold) or confidence is None:
        return False
    return confidence >= threshold


def _decision(
    vs: Optional[float], ns: Optional[float], confidence: Optional[float], threshold: Optional[float]
) -> AttachmentDecision:
    choice = _compare(vs, ns)
    if choice is not Attachment.UNDECIDED and not _passes(confidence, threshold):
        choice = Attachment.UNDECIDED
    return AttachmentDecision(choice, vs, ns, confidence)


def difference_confidence(
    x1: float, x2: float, values1: Sequence[float], n1: int, values2: Sequence[float], n2: int
) -> float:
    """``|x1 - x2| / sqrt(var1 / n1 + var2 / n2)`` with population variances.

    A zero denominator gives ``inf`` for a nonzero difference and 0 for none.
    """
    diff = abs(x1 - x2)
    if math.isnan(diff):
        return 0.0
    var = 0.0
    for values, n in ((values1, n1), (values2, n2)):
        if n > 0 and len(values) > 1:
            var += statistics.pvariance(values) / n
    if var == 0.0:
        return math.inf if diff > 0 else 0.0
    return diff / math.sqrt(var)


Model = Union[TreeCutPairModel, AssociationTreeCutModel]


def _assoc(m: Model) -> AssociationTreeCutModel:
    return m.assoc if isinstance(m, TreeCutPairModel) else m


def confidence_score(verb_model: Model, noun_model: Model, noun2: str) -> float:
    """Confidence that the two association values at ``noun2`` differ."""
    a1, a2 = _assoc(verb_model), _assoc(noun_model)
    return difference_confidence(a1.value(noun2), a2.value(noun2), a1.a, a1.size, a2.a, a2.size)


def _check_slot(q: TestQuadruple, *models) -> None:
    for m in models:
        key = getattr(m, "key", None)
        if m is not None and key is not None and key.slot != q.prep:
            raise ValueError(f"model for slot {key.slot!r} used on preposition {q.prep!r}")


def decide_attachment(
    q: TestQuadruple,
    verb_model: Optional[Model],
    noun_model: Optional[Model],
    threshold: Optional[float] = None,
) -> AttachmentDecision:
    """Compare the association of ``noun2`` with the verb and with ``noun1``.

    A missing model (head never observed) or a ``noun2`` outside the
    taxonomy leaves the quadruple undecided.
    """
    _check_slot(q, _assoc(verb_model) if verb_model is not None else None,
                _assoc(noun_model) if noun_model is not None else None)
    if verb_model is None or noun_model is None:
        return AttachmentDecision(Attachment.UNDECIDED)
    t = _assoc(verb_model).taxonomy
    if q.noun2 not in t.leaf_of:
        return AttachmentDecision(Attachment.UNDECIDED)
    vs = _assoc(verb_model).value(q.noun2)
    ns = _assoc(noun_model).value(q.noun2)
    return _decision(vs, ns, confidence_score(verb_model, noun_model, q.noun2), threshold)


def _log2(x: float) -> float:
    return math.log2(x) if x > 0 else -math.inf


def mdl_conditional_decide(
    q: TestQuadruple,
    verb_tcm: Optional[TreeCutModel],
    noun_tcm: Optional[TreeCutModel],
    threshold: Optional[float] = None,
) -> AttachmentDecision:
    """Compare conditional word probabilities ``p(noun2 | head)``.

    The confidence uses the difference formula on log probabilities, with
    the variance taken over the log per-word probabilities of each cut.
    """
    if verb_tcm is None or noun_tcm is None:
        return AttachmentDecision(Attachment.UNDECIDED)
    t = verb_tcm.taxonomy
    if q.noun2 not in t.leaf_of:
        return AttachmentDecision(Attachment.UNDECIDED)
    vs, ns = verb_tcm.probability(q.noun2), noun_tcm.probability(q.noun2)

    def logs(m: TreeCutModel) -> list[float]:
        return [math.log2(x / t.n_leaves[c]) for c, x in zip(m.cut, m.q) if x > 0]

    lv, ln = _log2(vs), _log2(ns)
    if lv == ln:
        conf = 0.0
    elif math.isinf(lv) or math.isinf(ln):
        conf = math.inf
    else:
        conf = difference_confidence(lv, ln, logs(verb_tcm), verb_tcm.n or 0, logs(noun_tcm), noun_tcm.n or 0)
    return _decision(vs, ns, conf, threshold)


class SelectionalAssociation:
    """Class-level selectional association scores over one sample.

    All probabilities are relative frequencies in ``sample`` restricted to
    the words of ``taxonomy``; pass ``marginal`` to take ``p(n)`` from a
    tree cut model instead.
    """

    def __init__(self, sample: PairSample, taxonomy: Taxonomy, marginal: Optional[TreeCutModel] = None):
        self.taxonomy = taxonomy
        self.sample = sample.restrict_to(taxonomy)
        self.marginal = marginal
        self.values = project_values(self.sample)
        self.total = sum(self.values.values())
        self.slices = slices(self.sample)
        self._cache: dict[tuple[int, HeadKey], float] = {}

    def score(self, node: int, key: HeadKey | tuple[str, str]) -> float:
        key = HeadKey(*key)
        hit = self._cache.get((node, key))
        if hit is not None:
            return hit
        t = self.taxonomy
        t.check_node(node)
        if self.total == 0:
            raise ValueError("selectional association of an empty sample")
        sl = self.slices.get(key)
        terms = []
        if sl is not None:
            size = sl.size
            for w, c in sl.counts.items():
                leaf = t.leaf_of[w]
                if not c or not t.dominates(node, leaf):
                    continue
                pn = self.values[w] / self.total if self.marginal is None else self.marginal.probability(w)
                # p(n) log2 (p(n,v) / (p(n) p(v))), with p(n,v) = c/|S|, p(v) = |S_v|/|S|
                terms.append(pn * math.log2(c / (pn * size)))
        out = math.fsum(terms)
        self._cache[(node, key)] = out
        return out

    def chain(self, word: str, key: HeadKey | tuple[str, str]) -> list[float]:
        """Scores of ``word``'s leaf and each of its ancestors."""
        t = self.taxonomy
        return [self.score(v, key) for v in t.ancestors(t.leaf(word))]

    def slice_size(self, key: HeadKey | tuple[str, str]) -> int:
        sl = self.slices.get(HeadKey(*key))
        return sl.size if sl is not None else 0


def selectional_association(
    s: PairSample,
    t: Taxonomy,
    node: int,
    key: HeadKey | tuple[str, str],
    marginal: Optional[TreeCutModel] = None,
) -> float:
    """``sum_{n in C} p(n) log2(p(n, v) / (p(n) p(v)))`` for the class of ``node``."""
    return SelectionalAssociation(s, t, marginal).score(node, key)


def sa_decide(
    q: TestQuadruple,
    s: PairSample | SelectionalAssociation,
    t: Taxonomy,
    threshold: Optional[float] = None,
) -> AttachmentDecision:
    """Compare the best selectional association over ``noun2``'s ancestors.

    ``s`` is the training sample of the slot ``q.prep`` (other slots are
    ignored), or a prepared :class:`SelectionalAssociation` for it.
    """
    if isinstance(s, SelectionalAssociation):
        sa = s
    else:
        sa = SelectionalAssociation(s.for_slot(q.prep), t)
    if q.noun2 not in t.leaf_of or sa.total == 0:
        return AttachmentDecision(Attachment.UNDECIDED)
    kv, kn = HeadKey(q.verb, q.prep), HeadKey(q.noun1, q.prep)
    cv, cn = sa.chain(q.noun2, kv), sa.chain(q.noun2, kn)
    vs, ns = max(cv), max(cn)
    conf = difference_confidence(vs, ns, cv, sa.slice_size(kv), cn, sa.slice_size(kn))
    return _decision(vs, ns, conf, threshold)


def default_decide(q: TestQuadruple) -> AttachmentDecision:
    return AttachmentDecision(Attachment.NOUN, confidence=math.inf)


def evaluate(decisions: Iterable[tuple[AttachmentDecision, str]]) -> EvaluationReport:
    """Coverage and accuracy (in percent) of a list of ``(decision, gold)``."""
    total = decided = correct = 0
    for d, gold in decisions:
        total += 1
        if d.decided:
            decided += 1
            correct += d.choice.value == _gold(gold)
    coverage = 100.0 * decided / total if total else 0.0
    accuracy = 100.0 * correct / decided if decided else None
    return EvaluationReport(coverage, accuracy, total)


def _gold(gold) -> str:
    return gold.value if isinstance(gold, Attachment) else str(gold)


def coverage_accuracy_curve(
    scored: Sequence[tuple[AttachmentDecision, str]], thresholds: Sequence[float]
) -> list[CurvePoint]:
    """Coverage and accuracy ratios as the confidence threshold decreases."""
    if any(b > a for a, b in zip(thresholds, thresholds[1:])):
        raise ValueError("thresholds must be in descending order")
    prepared = []
    for d, gold in scored:
        if d.confidence is None and d.preferred() is not Attachment.UNDECIDED:
            raise ValueError("every decision needs a confidence score")
        prepared.append((d.preferred(), d.confidence, _gold(gold)))
    n = len(prepared)
    points = []
    for th in thresholds:
        decided = correct = 0
        for side, conf, gold in prepared:
            if side is not Attachment.UNDECIDED and _passes(conf, th):
                decided += 1
                correct += side.value == gold
        points.append(
            CurvePoint(th, decided / n if n else 0.0, correct / decided if decided else None)
        )
    return points


def break_even(curve: Sequence[CurvePoint]) -> Optional[float]:
    """Coverage at which accuracy equals coverage, interpolating linearly
    between adjacent curve points; ``None`` if the curve never crosses."""
    pts = [(p.coverage, p.accuracy) for p in curve if p.accuracy is not None]
    for (c0, a0), (c1, a1) in zip(pts, pts[1:]):
        d0, d1 = a0 - c0, a1 - c1
        if d0 == 0:
            return c0
        if d0 * d1 < 0:
            s = d0 / (d0 - d1)
            return c0 + s * (c1 - c0)
    if pts and pts[-1][1] == pts[-1][0]:
        return pts[-1][0]
    return None


def default_baseline(quads: Iterable[TestQuadruple]) -> EvaluationReport:
    """Always attach to ``noun1``."""
    return evaluate((default_decide(q), q.gold) for q in quads)


def format_table(rows: dict[str, EvaluationReport]) -> str:
    """Method / coverage / accuracy TSV table."""
    out = ["method\tcoverage\taccuracy"]
    for name, r in rows.items():
        acc = "NA" if r.accuracy is None else f"{r.accuracy:.1f}"
        out.append(f"{name}\t{r.coverage:.1f}\t{acc}")
    return "\n".join(out) + "\n"


def format_curve(curve: Sequence[CurvePoint]) -> str:
    out = ["threshold\tcoverage\taccuracy"]
    for p in curve:
        acc = "NA" if p.accuracy is None else f"{p.accuracy:.6f}"
        out.append(f"{p.threshold:g}\t{p.coverage:.6f}\t{acc}")
    return "\n".join(out) + "\n"
