"""Fixed 19-covariate risk engine with contribution breakdowns and what-ifs.

The bundled coefficients are log hazard ratios; continuous covariates enter
as z-scores under a declared convention (centers at the reference-cohort
medians, scales from log-normal IQR matching; zero-inflated for pack-years).
That interpretation, and the 10-year baseline survival calibrated against
the reference mean predicted risk, are stamped into the model artifact —
see docs/model-artifact.md.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from importlib import resources
from typing import Mapping

import numpy as np

from . import reference_data as ref
from .cohort import ENCODED_COLUMNS, Ethnicity, SubjectRecord, design_row
from .errors import CohortError, ConfigError, NumericError
from .synthetic import lognormal_sd_from_quartiles, reference_preset, sample_features

ARTIFACT_FORMAT = "t2drisk-risk-engine"
ARTIFACT_VERSION = 1


@dataclass(frozen=True)
class Covariate:
    name: str
    coefficient: float
    ci_low: float
    ci_high: float
    center: float = 0.0
    scale: float = 1.0
    continuous: bool = False
    modifiable: bool = False


@dataclass(frozen=True)
class ReferenceModel:
    """Immutable scorer: 19 (coefficient, CI) pairs plus calibrated S0(10)."""

    version: str
    covariates: tuple[Covariate, ...]
    baseline_survival: float          # S0 at the horizon
    horizon: float
    calibration: Mapping[str, object]
    disclaimer: str = ref.DISCLAIMER

    def __post_init__(self) -> None:
        if not 0.0 < self.baseline_survival < 1.0:
            raise ConfigError(
                f"baseline survival must be in (0, 1), got {self.baseline_survival}"
            )

    def covariate(self, name: str) -> Covariate:
        for c in self.covariates:
            if c.name == name:
                return c
        raise CohortError(f"unknown feature {name!r}")


@dataclass(frozen=True)
class Contribution:
    feature: str
    value: float        # raw input (years, kg/m^2, 0/1 ...)
    encoded: float      # standardized / indicator value entering the model
    contribution: float  # coefficient * encoded
    modifiable: bool


@dataclass(frozen=True)
class RiskBreakdown:
    total_risk: float
    linear_predictor: float
    horizon: float
    contributions: tuple[Contribution, ...]


def _engine_scales() -> dict[str, tuple[float, float]]:
    """(center, scale) per continuous covariate under the declared convention."""
    from .synthetic import ZeroInflatedLognormal

    scales = {}
    for name, (q1, median, q3) in ref.CONTINUOUS_QUARTILES.items():
        scales[name] = (median, lognormal_sd_from_quartiles(q1, median, q3))
    pack = ZeroInflatedLognormal(
        ref.PACK_YEARS_ZERO_FRACTION, ref.PACK_YEARS_Q3, ref.PACK_YEARS_LOG_SIGMA
    )
    scales["pack_years"] = (0.0, pack.sd())
    return scales


def _reference_covariates() -> tuple[Covariate, ...]:
    scales = _engine_scales()
    covariates = []
    for name in ENCODED_COLUMNS:
        coef, lo, hi, _ = ref.COEFFICIENTS[name]
        center, scale = scales.get(name, (0.0, 1.0))
        covariates.append(
            Covariate(
                name=name,
                coefficient=coef,
                ci_low=lo,
                ci_high=hi,
                center=center,
                scale=scale,
                continuous=name in scales,
                modifiable=name in ref.MODIFIABLE_FEATURES,
            )
        )
    return tuple(covariates)


# --- scoring -----------------------------------------------------------------


def _record_values(record: SubjectRecord | Mapping[str, object]) -> dict[str, float]:
    if isinstance(record, SubjectRecord):
        return dict(zip(ENCODED_COLUMNS, design_row(record)))
    values = dict(record)
    if "ethnicity" in values:  # raw field form: expand the indicator pair
        eth = values.pop("ethnicity")
        eth = Ethnicity(eth) if not isinstance(eth, Ethnicity) else eth
        values["ethnicity_asian"] = 1.0 if eth is Ethnicity.ASIAN else 0.0
        values["ethnicity_black"] = 1.0 if eth is Ethnicity.BLACK else 0.0
    values.pop("previous_smoker", None)  # not a model term
    missing = [n for n in ENCODED_COLUMNS if n not in values]
    if missing:
        raise CohortError(f"missing field(s): {missing}")
    unknown = [n for n in values if n not in ENCODED_COLUMNS]
    if unknown:
        raise CohortError(f"unknown field(s): {unknown}")
    return {n: float(values[n]) for n in ENCODED_COLUMNS}


def score(model: ReferenceModel, record: SubjectRecord | Mapping[str, object]) -> RiskBreakdown:
    """Deterministic risk breakdown; contributions sum to the linear predictor."""
    values = _record_values(record)
    contributions = []
    lp = 0.0
    for cov in model.covariates:
        raw = values[cov.name]
        encoded = (raw - cov.center) / cov.scale if cov.continuous else raw
        part = cov.coefficient * encoded
        lp += part
        contributions.append(
            Contribution(cov.name, raw, encoded, part, cov.modifiable)
        )
    total = 1.0 - model.baseline_survival ** np.exp(lp)
    return RiskBreakdown(float(total), float(lp), model.horizon, tuple(contributions))


@dataclass(frozen=True)
class WhatIfResult:
    before: RiskBreakdown
    after: RiskBreakdown
    delta: float


def whatif(
    model: ReferenceModel,
    record: SubjectRecord,
    modifications: Mapping[str, object],
    *,
    allow_non_modifiable: bool = False,
) -> WhatIfResult:
    """Score a record before and after applying modifications.

    Only modifiable features may change unless ``allow_non_modifiable`` is
    set.  The modified record re-runs all record invariants, so e.g. setting
    ``currently_smoking`` to false with positive pack-years also requires
    ``previous_smoker`` to be true.
    """
    modifiable = {c.name for c in model.covariates if c.modifiable}
    record_fields = {f.name for f in dataclasses.fields(SubjectRecord)}
    unknown = [k for k in modifications if k not in record_fields]
    if unknown:
        raise CohortError(f"unknown field(s): {unknown}")
    blocked = [k for k in modifications if k not in modifiable and k != "previous_smoker"]
    if blocked and not allow_non_modifiable:
        raise ConfigError(
            f"non-modifiable field(s) {sorted(blocked)}; pass allow_non_modifiable to override"
        )
    before = score(model, record)
    after = score(model, dataclasses.replace(record, **modifications))
    return WhatIfResult(before, after, after.total_risk - before.total_risk)


# --- baseline calibration -------------------------------------------------------


def calibrate_baseline(
    linear_predictors: np.ndarray,
    target_mean_risk: float,
    *,
    tol: float = 1e-13,
) -> float:
    """Bisect S0 so the mean of 1 - S0^exp(lp) over the cohort hits the target.

    The objective is strictly decreasing in S0, so the root is unique when
    the target is attainable inside (1e-9, 1 - 1e-9).
    """
    lp = np.asarray(linear_predictors, dtype=np.float64)
    rel = np.exp(lp)

    def mean_risk(s0: float) -> float:
        return float(np.mean(1.0 - s0**rel))

    lo, hi = 1e-9, 1.0 - 1e-9
    if not (mean_risk(hi) <= target_mean_risk <= mean_risk(lo)):
        raise NumericError(
            f"target mean risk {target_mean_risk} not bracketed by S0 in ({lo}, {hi})"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mean_risk(mid) > target_mean_risk:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


_REFERENCE_COHORT_N = 200_000
_REFERENCE_COHORT_SEED = 727


def _reference_linear_predictors(model_covariates: tuple[Covariate, ...]) -> np.ndarray:
    records = sample_features(reference_preset(_REFERENCE_COHORT_N, _REFERENCE_COHORT_SEED))
    by_name = {c.name: c for c in model_covariates}
    lp = np.zeros(len(records))
    raw = np.stack([design_row(r) for r in records])
    for j, name in enumerate(ENCODED_COLUMNS):
        cov = by_name[name]
        col = raw[:, j]
        if cov.continuous:
            col = (col - cov.center) / cov.scale
        lp += cov.coefficient * col
    return lp


def build_reference_model(
    target_mean_risk: float = ref.MEAN_PREDICTED_10Y,
    *,
    version: str = "1.0.0",
) -> ReferenceModel:
    """Assemble the bundled model, calibrating S0 on a fixed synthetic cohort."""
    covariates = _reference_covariates()
    lp = _reference_linear_predictors(covariates)
    s0 = calibrate_baseline(lp, target_mean_risk)
    achieved = float(np.mean(1.0 - s0 ** np.exp(lp)))
    calibration = {
        "method": "bisection",
        "target_mean_risk": target_mean_risk,
        "achieved_mean_risk": achieved,
        "reference_cohort": {
            "generator": "reference_preset",
            "n": _REFERENCE_COHORT_N,
            "seed": _REFERENCE_COHORT_SEED,
        },
    }
    return ReferenceModel(
        version=version,
        covariates=covariates,
        baseline_survival=s0,
        horizon=ref.PREDICTION_HORIZON_YEARS,
        calibration=calibration,
    )


# --- artifact IO -----------------------------------------------------------------


def model_to_document(model: ReferenceModel) -> dict:
    return {
        "format": ARTIFACT_FORMAT,
        "version": ARTIFACT_VERSION,
        "model_version": model.version,
        "horizon": model.horizon,
        "baseline_survival": model.baseline_survival,
        "calibration": dict(model.calibration),
        "disclaimer": model.disclaimer,
        "covariates": [dataclasses.asdict(c) for c in model.covariates],
    }


def model_from_document(doc: Mapping) -> ReferenceModel:
    if doc.get("format") != ARTIFACT_FORMAT or doc.get("version") != ARTIFACT_VERSION:
        raise ConfigError(
            f"not a risk-engine artifact (format={doc.get('format')!r}, "
            f"version={doc.get('version')!r})"
        )
    return ReferenceModel(
        version=doc["model_version"],
        covariates=tuple(Covariate(**c) for c in doc["covariates"]),
        baseline_survival=float(doc["baseline_survival"]),
        horizon=float(doc["horizon"]),
        calibration=doc["calibration"],
        disclaimer=doc.get("disclaimer", ref.DISCLAIMER),
    )


def save_artifact(model: ReferenceModel, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_document(model), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_artifact(path: str) -> ReferenceModel:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: malformed artifact ({exc})") from None
    return model_from_document(doc)


_BUNDLED: ReferenceModel | None = None


def bundled_model() -> ReferenceModel:
    """The packaged artifact (committed output of build_reference_model)."""
    global _BUNDLED
    if _BUNDLED is None:
        text = resources.files("t2drisk").joinpath("data/reference_model.json").read_text()
        _BUNDLED = model_from_document(json.loads(text))
    return _BUNDLED
