"""Survival modelling toolkit for 10-year type 2 diabetes risk.

Submodules: cohort (records, encoding, splits), synthetic (cohort
generation), cox (proportional-hazards fitting), neural (feedforward Cox
network), metrics (c-index, bootstrap, calibration), selection (backward
elimination), engine (fixed 19-covariate scorer), service (HTTP API),
cli (pipeline commands).
"""

from .cohort import (
    EncodedCohort,
    Ethnicity,
    IngestResult,
    Outcome,
    SubjectRecord,
    decode,
    encode,
    ingest_csv,
    stratified_split,
    write_cohort_csv,
)
from .cox import (
    CoxModel,
    FitDiagnostics,
    FitOptions,
    breslow_baseline,
    fit,
    load_model,
    neg_log_partial_likelihood,
    predict_risk,
    save_model,
)
from .engine import (
    ReferenceModel,
    RiskBreakdown,
    build_reference_model,
    bundled_model,
    calibrate_baseline,
    load_artifact,
    save_artifact,
    score,
    whatif,
)
from .errors import (
    CohortError,
    ConfigError,
    ConvergenceError,
    EvaluationError,
    NumericError,
    SeparationError,
    T2DRiskError,
)
from .metrics import (
    EvaluationReport,
    bootstrap_ci,
    calibration,
    concordance_index,
    evaluate_risk_scores,
    km_complement,
)
from .neural import (
    NetConfig,
    NeuralCoxModel,
    SearchSpace,
    hyperparameter_search,
    load_trial_ledger,
    load_weights,
    save_trial_ledger,
    save_weights,
    train,
    tuned_config,
)
from .selection import EliminationLedger, backward_eliminate, clinical_review_filter
from .synthetic import (
    GeneratorConfig,
    generate,
    reference_preset,
    sample_features,
    sample_outcomes,
    simulate_survival,
    solve_baseline_rate,
)

__version__ = "0.1.0"
