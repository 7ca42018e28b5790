from .capability import entropy_weights, walk_panel, walk_scores
from .corpus_text import (
    Document,
    default_lexicon,
    load_lexicon,
    read_corpus_dir,
    scan_document,
    score_documents,
    tfidf_scores,
)
from .datagen import (
    SyntheticBundle,
    TruthConfig,
    gen_firms,
    gen_households,
    gen_iv_sample,
    generate,
    oracle_report,
    read_truth,
    structural_self_test,
    write_bundle,
)
from .exceptions import (
    AIWashingError,
    BootstrapCollapse,
    CalibrationFailure,
    DegenerateOutcome,
    EmptyCorpus,
    EmptyLexicon,
    GroupTooSmall,
    InsufficientData,
    InsufficientFirms,
    InvalidSpec,
    NoIdentification,
    NotAModerationFit,
    PerfectSeparation,
    SchemaMismatch,
    SeriesMisaligned,
    SingularDesign,
    SingularHessian,
    ValidationFailed,
)
from .glm import (
    DesignMatrix,
    average_marginal_effect,
    fit_logit,
    fit_model,
    fit_ologit,
    fit_ols,
    predict_prob,
    probability_moves,
    regression_table,
)
from .iv import IVSpec, fit_2sls, hansen_j
from .mediation import MediationSpec, bootstrap_mediation, fit_mediation
from .models import (
    CapabilityRecord,
    EntropyWeights,
    FirmYearSeries,
    FitResult,
    Lexicon,
    ModelKind,
    OutcomeLink,
    SplitKind,
    StageStatus,
    Standardization,
)
from .moderation import (
    ModelSpec,
    ModerationSpec,
    SplitRule,
    chow_z,
    fit_interaction,
    heterogeneity_battery,
    simple_slopes,
    split_fit,
)
from .parallel import get_default_threads, set_default_threads
from .policy import (
    SCENARIOS,
    ScenarioSpec,
    SimModel,
    apply_scenario,
    cost_benefit,
    fit_sim_model,
    sensitivity,
    simulate,
)
from .washing_index import attach_index, build_index, trend_report, washing, zscore

__all__ = [
    "AIWashingError",
    "BootstrapCollapse",
    "CalibrationFailure",
    "CapabilityRecord",
    "DegenerateOutcome",
    "DesignMatrix",
    "Document",
    "EmptyCorpus",
    "EmptyLexicon",
    "EntropyWeights",
    "FirmYearSeries",
    "FitResult",
    "GroupTooSmall",
    "IVSpec",
    "InsufficientData",
    "InsufficientFirms",
    "InvalidSpec",
    "Lexicon",
    "MediationSpec",
    "ModelKind",
    "ModelSpec",
    "ModerationSpec",
    "NoIdentification",
    "NotAModerationFit",
    "OutcomeLink",
    "PerfectSeparation",
    "SCENARIOS",
    "ScenarioSpec",
    "SchemaMismatch",
    "SeriesMisaligned",
    "SimModel",
    "SingularDesign",
    "SingularHessian",
    "SplitKind",
    "SplitRule",
    "StageStatus",
    "Standardization",
    "SyntheticBundle",
    "TruthConfig",
    "ValidationFailed",
    "apply_scenario",
    "attach_index",
    "average_marginal_effect",
    "bootstrap_mediation",
    "build_index",
    "chow_z",
    "cost_benefit",
    "default_lexicon",
    "entropy_weights",
    "fit_2sls",
    "fit_interaction",
    "fit_logit",
    "fit_mediation",
    "fit_model",
    "fit_ologit",
    "fit_ols",
    "fit_sim_model",
    "gen_firms",
    "gen_households",
    "gen_iv_sample",
    "generate",
    "get_default_threads",
    "hansen_j",
    "heterogeneity_battery",
    "load_lexicon",
    "oracle_report",
    "predict_prob",
    "probability_moves",
    "read_corpus_dir",
    "read_truth",
    "regression_table",
    "scan_document",
    "score_documents",
    "sensitivity",
    "set_default_threads",
    "simple_slopes",
    "simulate",
    "split_fit",
    "structural_self_test",
    "tfidf_scores",
    "trend_report",
    "walk_panel",
    "walk_scores",
    "washing",
    "write_bundle",
    "zscore",
]
