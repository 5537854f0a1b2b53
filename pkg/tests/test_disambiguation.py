import math
from collections import Counter

import numpy as np
import pytest

from assocmdl.atcm import AssociationTreeCutModel, TreeCutPairModel, find_assoc_mdl, mle_pair
from assocmdl.corpus import HeadKey, PairSample, TestQuadruple
from assocmdl.disambiguation import (
    Attachment,
    AttachmentDecision,
    SelectionalAssociation,
    break_even,
    confidence_score,
    coverage_accuracy_curve,
    decide_attachment,
    default_baseline,
    evaluate,
    format_curve,
    format_table,
    mdl_conditional_decide,
    sa_decide,
    selectional_association,
)
from assocmdl.oracle import attachment_suite, plant, sample_from_pair
from assocmdl.pipeline import decide_all, fit_models
from assocmdl.taxonomy import parse_taxonomy
from assocmdl.tcm import TreeCutModel, find_mdl

from conftest import FLY, MARGINAL, node

# mpmath, fly owns 12 of 117 subject triples, eat the other 105
SA_BIRD_FLY = -0.00221524944155336
SA_CROW_FLY = 0.0272817044705328

Q = TestQuadruple("eat", "pizza", "with", "fork", "V")


def const_model(t, a, key, size=100, cut=None):
    cut = cut or t.root_cut()
    return AssociationTreeCutModel(t, cut, tuple(a), key, size)


class TestDecide:
    def test_larger_wins(self, birds):
        t = parse_taxonomy("(T fork)")
        v = const_model(t, (1.5,), HeadKey("eat", "with"))
        n = const_model(t, (0.3,), HeadKey("pizza", "with"))
        d = decide_attachment(Q, v, n)
        assert d.choice is Attachment.VERB
        assert (d.verb_score, d.noun_score) == (1.5, 0.3)

    def test_equal_undecided(self):
        t = parse_taxonomy("(T fork)")
        v = const_model(t, (1.0,), HeadKey("eat", "with"))
        n = const_model(t, (1.0,), HeadKey("pizza", "with"))
        assert decide_attachment(Q, v, n).choice is Attachment.UNDECIDED

    def test_missing_model_or_word(self):
        t = parse_taxonomy("(T knife)")
        v = const_model(t, (1.0,), HeadKey("eat", "with"))
        assert not decide_attachment(Q, v, None).decided
        assert not decide_attachment(Q, v, const_model(t, (2.0,), HeadKey("pizza", "with"))).decided

    def test_slot_mismatch(self):
        t = parse_taxonomy("(T fork)")
        v = const_model(t, (1.0,), HeadKey("eat", "on"))
        with pytest.raises(ValueError, match="slot"):
            decide_attachment(Q, v, v)

    def test_planted_ordering(self, animals):
        marg = {node(animals, "BIRD"): 0.5, node(animals, "INSECT"): 0.5}
        models = {}
        for head, a in (("see", {node(animals, "BIRD"): 1.8, node(animals, "INSECT"): 0.2}),
                        ("nest", {node(animals, "BIRD"): 0.6, node(animals, "INSECT"): 1.4})):
            pm = plant(animals, marg, a, HeadKey(head, "with"))
            sl, back = sample_from_pair(pm, 5000, seed=7)
            models[head] = TreeCutPairModel(find_assoc_mdl(sl, animals, find_mdl(animals, back)), find_mdl(animals, back))
        q = TestQuadruple("see", "nest", "with", "crow", "V")
        assert decide_attachment(q, models["see"], models["nest"]).choice is Attachment.VERB


class TestConfidence:
    def test_identical(self, birds, bird_marginal, fly_slice):
        a, _ = mle_pair(bird_marginal, birds, birds.leaf_cut(), fly_slice)
        assert confidence_score(a, a, "crow") == 0.0

    def test_zero_variance(self, birds):
        v = const_model(birds, (1.0,), HeadKey("v", "s"))
        n = const_model(birds, (2.0,), HeadKey("n", "s"))
        assert confidence_score(v, n, "crow") == math.inf

    def test_matches_formula(self, animals):
        marg = {node(animals, "BIRD"): 0.5, node(animals, "INSECT"): 0.5}
        pm = plant(animals, marg, {node(animals, "BIRD"): 1.5, node(animals, "INSECT"): 0.5})
        s1, back = sample_from_pair(pm, 400, seed=1)
        s2, _ = sample_from_pair(pm, 250, seed=2)
        m = find_mdl(animals, back)
        a1, _ = mle_pair(m, animals, animals.leaf_cut(), s1)
        a2, _ = mle_pair(m, animals, animals.leaf_cut(), s2)
        x1, x2 = np.array(a1.a), np.array(a2.a)
        i = animals.words.index("bee")
        want = abs(x1[i] - x2[i]) / math.sqrt(x1.var() / 400 + x2.var() / 250)
        assert confidence_score(a1, a2, "bee") == pytest.approx(want, rel=1e-12)

    def test_threshold(self):
        t = parse_taxonomy("(T (A fork spoon) (B knife))")
        v = AssociationTreeCutModel(t, t.leaf_cut(), (1.2, 1.0, 0.8), HeadKey("eat", "with"), 50)
        n = AssociationTreeCutModel(t, t.leaf_cut(), (1.0, 1.0, 1.0), HeadKey("pizza", "with"), 50)
        c = confidence_score(v, n, "fork")
        assert decide_attachment(Q, v, n, threshold=c).decided
        assert not decide_attachment(Q, v, n, threshold=c * 1.01).decided
        assert not decide_attachment(Q, v, n, threshold=math.inf).decided


def bird_sample():
    fly, eat = HeadKey("fly", "subj"), HeadKey("eat", "subj")
    counts = {(w, fly): c for w, c in FLY.items()}
    counts.update({(w, eat): MARGINAL[w] - c for w, c in FLY.items()})
    return PairSample(counts)


def brute_sa(t, sample, v, key):
    """SA summed straight from relative frequencies."""
    total = sample.total
    f_n = Counter()
    f_nv = Counter()
    for (w, k), c in sample.counts.items():
        f_n[w] += c
        if k == key:
            f_nv[w] += c
    p_v = sum(f_nv.values()) / total
    out = 0.0
    for leaf in t.subtree(v):
        w = t.labels[leaf]
        if t.children[leaf] or not f_nv[w]:
            continue
        p_n = f_n[w] / total
        out += p_n * math.log2((f_nv[w] / total) / (p_n * p_v))
    return out


class TestSelectionalAssociation:
    def test_golden(self, birds):
        got = selectional_association(bird_sample(), birds, birds.root, ("fly", "subj"))
        assert got == pytest.approx(SA_BIRD_FLY, abs=1e-12)

    def test_single_noun(self, birds):
        got = selectional_association(bird_sample(), birds, birds.leaf("crow"), ("fly", "subj"))
        assert got == pytest.approx(SA_CROW_FLY, abs=1e-12)
        p = 66 / 117
        assert got == pytest.approx(p * math.log2((7 / 12) / p))

    def test_no_mass(self, animals):
        s = PairSample({("crow", HeadKey("fly", "subj")): 3, ("bee", HeadKey("buzz", "subj")): 2})
        assert selectional_association(s, animals, node(animals, "INSECT"), ("fly", "subj")) == 0.0

    def test_chain_matches_brute_force(self, animals):
        s = PairSample({("crow", HeadKey("fly", "subj")): 3, ("robin", HeadKey("fly", "subj")): 1,
                        ("bee", HeadKey("fly", "subj")): 2, ("crow", HeadKey("eat", "subj")): 5,
                        ("bug", HeadKey("eat", "subj")): 4, ("swallow", HeadKey("eat", "subj")): 1})
        sa = SelectionalAssociation(s, animals)
        for key in (HeadKey("fly", "subj"), HeadKey("eat", "subj")):
            chain = sa.chain("crow", key)
            want = [brute_sa(animals, s, v, key) for v in animals.ancestors(animals.leaf("crow"))]
            assert chain == pytest.approx(want, abs=1e-12)
        d = sa_decide(TestQuadruple("fly", "eat", "subj", "crow", "V"), s, animals)
        want_v = max(brute_sa(animals, s, v, HeadKey("fly", "subj")) for v in animals.ancestors(animals.leaf("crow")))
        want_n = max(brute_sa(animals, s, v, HeadKey("eat", "subj")) for v in animals.ancestors(animals.leaf("crow")))
        assert (d.verb_score, d.noun_score) == pytest.approx((want_v, want_n))
        assert d.choice is (Attachment.VERB if want_v > want_n else Attachment.NOUN)

    def test_absent_noun(self, animals):
        s = PairSample({("crow", HeadKey("fly", "subj")): 3, ("bee", HeadKey("eat", "subj")): 3})
        d = sa_decide(TestQuadruple("fly", "eat", "subj", "robin", "V"), s, animals)
        assert d.choice is Attachment.UNDECIDED

    def test_positive_side_wins(self, animals):
        # eat is never seen, so its whole ancestor chain scores 0
        s = PairSample({("crow", HeadKey("fly", "subj")): 3, ("bee", HeadKey("buzz", "subj")): 3})
        d = sa_decide(TestQuadruple("fly", "eat", "subj", "crow", "V"), s, animals)
        assert d.verb_score > 0 and d.noun_score == 0
        assert d.choice is Attachment.VERB


class TestMdlConditional:
    def test_identical(self, birds, bird_marginal):
        q = TestQuadruple("a", "b", "s", "crow", "V")
        assert mdl_conditional_decide(q, bird_marginal, bird_marginal).choice is Attachment.UNDECIDED

    def test_zero_class(self, animals):
        cut = animals.cut([node(animals, "BIRD"), node(animals, "INSECT")])
        v = TreeCutModel(animals, cut, (1.0, 0.0))
        n = TreeCutModel(animals, cut, (0.5, 0.5))
        q = TestQuadruple("a", "b", "s", "bee", "N")
        assert mdl_conditional_decide(q, v, n).choice is Attachment.NOUN

    def test_disagrees_with_assoc(self):
        # smack appears with few words overall, but prefers artifacts far more
        # strongly than the (frequent) postman does, relative to the slot
        t = parse_taxonomy("(ENTITY (ARTIFACT bottle jar can) (PERSON postman sailor clerk))")
        smack = {"bottle": 3, "jar": 5, "can": 1, "postman": 4, "sailor": 4}
        postman = {"bottle": 5, "jar": 12, "can": 8, "sailor": 11, "clerk": 10}
        other = {"bottle": 50, "jar": 10, "can": 5, "postman": 51, "sailor": 1, "clerk": 32}
        counts = {}
        for head, cs in (("smack", smack), ("postman", postman), ("other", other)):
            counts.update({(w, HeadKey(head, "with")): c for w, c in cs.items()})
        s = PairSample(counts)
        fitted = fit_models(t, s)
        q = TestQuadruple("smack", "postman", "with", "bottle", "V")
        kv, kn = HeadKey("smack", "with"), HeadKey("postman", "with")
        cond = mdl_conditional_decide(q, fitted.conditionals[kv], fitted.conditionals[kn])
        assoc = decide_attachment(q, fitted.pairs[kv], fitted.pairs[kn])
        assert cond.verb_score < cond.noun_score and cond.choice is Attachment.NOUN
        assert assoc.verb_score > assoc.noun_score and assoc.choice is Attachment.VERB
        assert cond.verb_score == pytest.approx(1 / 6)
        assert fitted.pairs[kv].assoc.cut.labels(t) == ["ARTIFACT", "postman", "sailor", "clerk"]


def decisions(*spec):
    out = []
    for choice, gold in spec:
        out.append((AttachmentDecision(Attachment(choice), 1.0, 0.0, 1.0), gold))
    return out


class TestEvaluate:
    def test_arithmetic(self):
        ds = decisions(*[("V", "V")] * 7, ("N", "V"), ("-", "V"), ("-", "N"))
        rep = evaluate(ds)
        assert (rep.coverage, rep.accuracy, rep.n_test) == (80.0, 87.5, 10)

    def test_all_undecided(self):
        rep = evaluate(decisions(("-", "V"), ("-", "N")))
        assert rep.coverage == 0.0 and rep.accuracy is None

    def test_default(self):
        qs = [TestQuadruple("a", "b", "p", "c", "N")] * 3
        assert default_baseline(qs).accuracy == 100.0
        qs = [TestQuadruple("a", "b", "p", "c", "V")] * 3
        assert default_baseline(qs).accuracy == 0.0

    def test_table_format(self):
        table = format_table({"Assoc": evaluate(decisions(("V", "V"), ("-", "N")))})
        assert table.splitlines() == ["method\tcoverage\taccuracy", "Assoc\t50.0\t100.0"]


def scored_with(confs):
    return [(AttachmentDecision(Attachment.VERB, 2.0, 1.0, c), g) for c, g in confs]


class TestCurve:
    def test_endpoints(self):
        scored = scored_with([(3.0, "V"), (0.5, "N"), (0.0, "V")])
        pts = coverage_accuracy_curve(scored, [math.inf, 1.0, 0.0])
        assert pts[0].coverage == 0 and pts[0].accuracy is None
        assert pts[1].coverage == pytest.approx(1 / 3) and pts[1].accuracy == 1.0
        assert pts[2].coverage == 1.0 and pts[2].accuracy == pytest.approx(2 / 3)
        assert format_curve(pts).splitlines()[1] == "inf\t0.000000\tNA"

    def test_ascending_rejected(self):
        with pytest.raises(ValueError):
            coverage_accuracy_curve([], [0.0, 1.0])

    def test_undecided_ties_never_counted(self):
        scored = [(AttachmentDecision(Attachment.UNDECIDED, 1.0, 1.0, 0.0), "V")]
        assert coverage_accuracy_curve(scored, [0.0])[0].coverage == 0.0

    def test_break_even(self):
        from assocmdl.disambiguation import CurvePoint

        curve = [CurvePoint(2, 0.2, 1.0), CurvePoint(1, 0.6, 0.9), CurvePoint(0, 1.0, 0.7)]
        # a - c goes 0.3 -> -0.3 between the last two points
        assert break_even(curve) == pytest.approx(0.8)
        assert break_even([CurvePoint(0, 0.5, 1.0)]) is None

    def test_high_confidence_more_accurate(self):
        thresholds = [math.inf, 16, 8, 4, 2, 1, 0.5, 0.25, 0]
        ok = 0
        for seed in range(20):
            su = attachment_suite(seed, n_per_head=150, concentration=1.0, n_quads=400)
            f = fit_models(su.taxonomy, su.sample)
            pts = coverage_accuracy_curve(decide_all(su.taxonomy, su.quads, f, su.sample)["Assoc"], thresholds)
            covs = [p.coverage for p in pts]
            assert covs == sorted(covs)
            accs = [p.accuracy for p in pts if p.accuracy is not None and p.coverage >= 0.1]
            # allow one sampling wobble of two points
            ok += all(b <= a + 0.02 for a, b in zip(accs, accs[1:])) and accs[0] >= accs[-1]
        assert ok >= 18


class TestScaleInvariance:
    @pytest.mark.parametrize("c", [0.1, 3, 100])
    def test_scaled_models(self, c):
        su = attachment_suite(3, n_per_head=300, concentration=1.0, n_quads=100)
        f = fit_models(su.taxonomy, su.sample)
        for q in su.quads:
            kv, kn = HeadKey(q.verb, q.prep), HeadKey(q.noun1, q.prep)
            a = decide_attachment(q, f.pairs[kv], f.pairs[kn])
            b = decide_attachment(q, f.pairs[kv].assoc.scaled(c), f.pairs[kn].assoc.scaled(c))
            assert a.choice is b.choice
