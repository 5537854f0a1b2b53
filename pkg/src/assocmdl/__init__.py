"""Learning association norms over a thesaurus with tree cut models and MDL."""

from .atcm import (
    AssociationTreeCutModel,
    EstimationError,
    TreeCutPairModel,
    assoc_description_length,
    assoc_mdl,
    extend_p_hat,
    find_assoc_mdl,
    mle_pair,
    pair_conditional,
)
from .corpus import (
    HeadKey,
    HeadSlice,
    PairSample,
    TestQuadruple,
    class_count,
    ingest_triples,
    preprocess_word,
    project_values,
    read_quadruples,
    slice_by_head,
)
from .disambiguation import (
    Attachment,
    AttachmentDecision,
    EvaluationReport,
    confidence_score,
    coverage_accuracy_curve,
    decide_attachment,
    default_baseline,
    evaluate,
    mdl_conditional_decide,
    sa_decide,
    selectional_association,
)
from .estimators import AssociationMDL, PPAttachmentClassifier, TreeCutDensity
from .taxonomy import Taxonomy, TreeCut, leaves_under, meet, parse_taxonomy, validate_cut
from .tcm import TreeCutModel, find_mdl, mle_tcm, tcm_description_length, tcm_probability

__version__ = "0.1.0"

__all__ = [
    "AssociationTreeCutModel",
    "EstimationError",
    "TreeCutPairModel",
    "assoc_description_length",
    "assoc_mdl",
    "extend_p_hat",
    "find_assoc_mdl",
    "mle_pair",
    "pair_conditional",
    "HeadKey",
    "HeadSlice",
    "PairSample",
    "TestQuadruple",
    "class_count",
    "ingest_triples",
    "preprocess_word",
    "project_values",
    "read_quadruples",
    "slice_by_head",
    "Attachment",
    "AttachmentDecision",
    "EvaluationReport",
    "confidence_score",
    "coverage_accuracy_curve",
    "decide_attachment",
    "default_baseline",
    "evaluate",
    "mdl_conditional_decide",
    "sa_decide",
    "selectional_association",
    "AssociationMDL",
    "PPAttachmentClassifier",
    "TreeCutDensity",
    "Taxonomy",
    "TreeCut",
    "leaves_under",
    "meet",
    "parse_taxonomy",
    "validate_cut",
    "TreeCutModel",
    "find_mdl",
    "mle_tcm",
    "tcm_description_length",
    "tcm_probability",
]
