"""scikit-learn style estimators over the tree cut models.

>>> tax = "(ANIMAL (BIRD swallow crow robin) (INSECT bee bug))"
>>> est = TreeCutDensity(taxonomy=tax).fit({"swallow": 42, "crow": 66, "robin": 9})
>>> est.cut_
['swallow', 'crow', 'robin', 'INSECT']
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_quadruples, check_taxonomy, check_triples, check_word_counts
from .atcm import EstimationError
from .corpus import HeadKey
from .disambiguation import Attachment, EvaluationReport, coverage_accuracy_curve, evaluate
from .pipeline import decide_all, fit_models
from .tcm import find_mdl, tcm_description_length


class TreeCutDensity(BaseEstimator):
    """Word distribution as a tree cut model chosen by MDL.

    Parameters
    ----------
    taxonomy : Taxonomy, str or dict
        The thesaurus tree, or its s-expression / JSON text.

    Attributes
    ----------
    model_ : TreeCutModel
    cut_ : list of str
        Labels of the selected cut.
    description_length_ : float
        Total code length in bits of the selected model.
    """

    def __init__(self, taxonomy=None):
        self.taxonomy = taxonomy

    def fit(self, X, y=None):
        t = check_taxonomy(self.taxonomy)
        counts = check_word_counts(X)
        counts = {w: c for w, c in counts.items() if w in t.leaf_of}
        if not sum(counts.values()):
            raise ValueError("no word of X is a leaf of the taxonomy")
        self.taxonomy_ = t
        self.model_ = find_mdl(t, counts)
        self.cut_ = self.model_.cut.labels(t)
        self.description_length_ = tcm_description_length(t, self.model_.cut, counts)
        return self

    def predict_proba(self, X):
        """Probability of each word; 0 for words outside the taxonomy."""
        check_is_fitted(self, "model_")
        return np.array(
            [self.model_.probability(w) if w in self.taxonomy_.leaf_of else 0.0 for w in X]
        )

    def score(self, X, y=None):
        """Mean log2 probability per token."""
        p = self.predict_proba(list(X))
        with np.errstate(divide="ignore"):
            return float(np.mean(np.log2(p))) if len(p) else 0.0


class AssociationMDL(TransformerMixin, BaseEstimator):
    """Association norms ``A(word, head)`` per slot, by two-step MDL.

    ``fit`` takes ``(head, slot, value[, count])`` rows (or a
    :class:`PairSample`); ``transform`` maps ``(head, slot, word)`` rows to
    association values, NaN where no model applies.

    Parameters
    ----------
    taxonomy : Taxonomy, str or dict
    epsilon : float or None
        Floor on marginal class probabilities; off by default.
    n_jobs : int or None
        Worker threads used to fit heads.
    """

    def __init__(self, taxonomy=None, epsilon: Optional[float] = None, n_jobs: Optional[int] = None):
        self.taxonomy = taxonomy
        self.epsilon = epsilon
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        t = check_taxonomy(self.taxonomy)
        self.taxonomy_ = t
        self.sample_ = check_triples(X)
        fitted = fit_models(t, self.sample_, epsilon=self.epsilon, n_jobs=self.n_jobs)
        self.fitted_ = fitted
        self.marginals_ = fitted.marginals
        self.models_ = fitted.pairs
        return self

    def association(self, head: str, slot: str, word: str) -> float:
        check_is_fitted(self, "models_")
        m = self.models_.get(HeadKey(head, slot))
        if m is None or word not in self.taxonomy_.leaf_of:
            return math.nan
        return m.assoc.value(word)

    def transform(self, X):
        return np.array([self.association(*map(str, row)) for row in X], dtype=float)


class PPAttachmentClassifier(ClassifierMixin, BaseEstimator):
    """PP-attachment from association norms or one of the baselines.

    ``fit`` takes training triples; ``predict`` takes
    ``(verb, noun1, prep, noun2)`` rows and returns ``"V"``, ``"N"`` or
    ``"-"`` (undecided).

    Parameters
    ----------
    taxonomy : Taxonomy, str or dict
    method : {"Assoc", "MDL", "SA", "Default"}
    threshold : float or None
        Minimum confidence for a decision.
    epsilon : float or None
    """

    def __init__(self, taxonomy=None, method: str = "Assoc", threshold: Optional[float] = None,
                 epsilon: Optional[float] = None):
        self.taxonomy = taxonomy
        self.method = method
        self.threshold = threshold
        self.epsilon = epsilon

    def fit(self, X, y=None):
        if self.method not in ("Assoc", "MDL", "SA", "Default"):
            raise ValueError(f"unknown method {self.method!r}")
        t = check_taxonomy(self.taxonomy)
        self.taxonomy_ = t
        self.sample_ = check_triples(X)
        self.fitted_ = fit_models(t, self.sample_, epsilon=self.epsilon)
        self.classes_ = np.array(["N", "V"])
        return self

    def decide(self, X):
        """:class:`AttachmentDecision` for every row."""
        check_is_fitted(self, "fitted_")
        quads = check_quadruples(X)
        scored = decide_all(self.taxonomy_, quads, self.fitted_, self.sample_, self.threshold)
        return [d for d, _ in scored[self.method]]

    def predict(self, X):
        return np.array([d.choice.value for d in self.decide(X)])

    def score(self, X, y=None, sample_weight=None):
        """Accuracy on the decided rows (the coverage is in :meth:`evaluate`)."""
        rep = self.evaluate(X, y)
        if rep.accuracy is None:
            raise EstimationError("no row was decided")
        return rep.accuracy / 100.0

    def evaluate(self, X, y=None, thresholds=None) -> EvaluationReport:
        quads = check_quadruples(X, y)
        decisions = self.decide(quads)
        pairs = list(zip(decisions, (q.gold for q in quads)))
        rep = evaluate(pairs)
        if thresholds is not None:
            rep = EvaluationReport(rep.coverage, rep.accuracy, rep.n_test,
                                   coverage_accuracy_curve(pairs, thresholds))
        return rep


__all__ = ["TreeCutDensity", "AssociationMDL", "PPAttachmentClassifier", "Attachment"]
