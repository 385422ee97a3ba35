"""Cox proportional-hazards fitting by Newton-Raphson on the partial likelihood.

Ties are handled with the Breslow convention throughout (shared risk-set
denominator at tied event times; the baseline estimator uses the same
denominators).  Risk-set sums are computed in one sweep over times sorted
descending, so a likelihood/gradient/Hessian evaluation is O(n log n + n p^2)
with no quadratic inner loop:

    value   = -sum_events [eta_i - log S0(t_i)]
    grad    = -[sum_events x_i - sum_j w_j A_j x_j]
    hessian =  X' diag(w A) X - U' diag(d) U

where w_j = exp(eta_j), S0/S1 are running risk-set sums, A_j is the running
sum of d/S0 over event times <= t_j, and U stacks S1/S0 per event group.
The linear predictor is max-shifted before exponentiation; the shift cancels
exactly in all three quantities.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.stats import norm

from .cohort import EncodedCohort, SubjectRecord, design_row, encoded_columns
from .errors import CohortError, NumericError, SeparationError

SEPARATION_BOUND = 50.0


@dataclass
class CoxModel:
    """Fitted model: coefficients, scaling, and Breslow baseline hazard table."""

    feature_names: tuple[str, ...]
    coefficients: np.ndarray
    standardization: dict[str, tuple[float, float]]
    baseline_times: np.ndarray    # ascending event times
    baseline_cumhaz: np.ndarray   # H0 at those times (right-continuous steps)
    max_time: float               # baseline table coverage
    horizon: float = 10.0

    def __post_init__(self) -> None:
        if np.any(np.diff(self.baseline_cumhaz) < 0) or (
            self.baseline_cumhaz.size and self.baseline_cumhaz[0] < 0
        ):
            raise NumericError("baseline cumulative hazard must be nondecreasing and >= 0")
        if not np.all(np.isfinite(self.coefficients)):
            raise NumericError("non-finite coefficients")

    def linear_predictor(self, matrix: np.ndarray) -> np.ndarray:
        """Linear predictor for rows already standardized like the fitting set."""
        matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
        if matrix.shape[1] != len(self.feature_names):
            raise CohortError(
                f"expected {len(self.feature_names)} columns, got {matrix.shape[1]}"
            )
        return matrix @ self.coefficients

    def cumulative_hazard(self, t: float) -> float:
        """Step-function lookup H0(t) (last value at or before t)."""
        if t < 0:
            raise CohortError(f"time must be >= 0, got {t}")
        i = int(np.searchsorted(self.baseline_times, t, side="right")) - 1
        return 0.0 if i < 0 else float(self.baseline_cumhaz[i])

    def _check_horizon(self, horizon: float | None) -> float:
        h = self.horizon if horizon is None else horizon
        if h > self.max_time:
            raise CohortError(
                f"horizon {h} exceeds baseline table coverage (max time {self.max_time})"
            )
        return h

    def risk_from_matrix(self, matrix: np.ndarray, horizon: float | None = None) -> np.ndarray:
        h = self._check_horizon(horizon)
        return 1.0 - np.exp(-self.cumulative_hazard(h) * np.exp(self.linear_predictor(matrix)))

    def standardize_row(self, values: Mapping[str, float]) -> np.ndarray:
        """Standardized design row from raw named values."""
        unknown = [k for k in values if k not in self.feature_names]
        if unknown:
            raise CohortError(f"unknown feature name(s) {unknown}")
        missing = [k for k in self.feature_names if k not in values]
        if missing:
            raise CohortError(f"missing feature value(s) {missing}")
        row = np.array([float(values[k]) for k in self.feature_names])
        for name, (center, scale) in self.standardization.items():
            j = self.feature_names.index(name)
            row[j] = (row[j] - center) / scale
        return row


def predict_risk(
    model: CoxModel,
    record: SubjectRecord | Mapping[str, float],
    horizon: float | None = None,
) -> float:
    """Event probability by ``horizon``: 1 - exp(-H0(h) * exp(x beta)).

    ``record`` is either a SubjectRecord or a mapping of raw (unstandardized)
    values keyed by the model's feature names; standardization uses the
    model's own parameters.
    """
    if isinstance(record, SubjectRecord):
        prev = "previous_smoker" in model.feature_names
        raw = design_row(record, include_previous_smoker=prev)
        names = encoded_columns(include_previous_smoker=prev)
        if tuple(model.feature_names) != names:
            raise CohortError(
                "model features do not match the standard record encoding; "
                "pass a mapping of named values instead"
            )
        values = dict(zip(names, raw))
    else:
        values = dict(record)
    row = model.standardize_row(values)
    h = model._check_horizon(horizon)
    lp = float(row @ model.coefficients)
    return float(1.0 - np.exp(-model.cumulative_hazard(h) * np.exp(lp)))


@dataclass
class FitDiagnostics:
    converged: bool
    iterations: int
    final_loglik: float
    standard_errors: np.ndarray
    ci95_low: np.ndarray
    ci95_high: np.ndarray
    neg_log2_p: np.ndarray


# --- partial likelihood --------------------------------------------------------


def _prepare(X: np.ndarray, times: np.ndarray, events: np.ndarray):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    times = np.asarray(times, dtype=np.float64)
    events = np.asarray(events, dtype=bool)
    if not (X.shape[0] == times.shape[0] == events.shape[0]):
        raise CohortError("X, times, events must have equal length")
    if X.shape[0] == 0:
        raise CohortError("empty dataset")
    if not events.any():
        raise CohortError("no events in dataset; partial likelihood undefined")
    return X, times, events


def neg_log_partial_likelihood(
    beta: np.ndarray,
    X: np.ndarray | EncodedCohort,
    times: np.ndarray | None = None,
    events: np.ndarray | None = None,
    *,
    ridge: float = 0.0,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Breslow negative log partial likelihood with exact gradient and Hessian.

    Accepts either an EncodedCohort or explicit (X, times, events) arrays.
    """
    if isinstance(X, EncodedCohort):
        X, times, events = X.matrix, X.times, X.events
    X, times, events = _prepare(X, times, events)
    beta = np.asarray(beta, dtype=np.float64).reshape(-1)
    n, p = X.shape
    if beta.shape[0] != p:
        raise CohortError(f"beta has {beta.shape[0]} entries for {p} columns")

    eta = X @ beta
    if not np.all(np.isfinite(eta)):
        raise NumericError(
            "non-finite linear predictor; standardize covariates before fitting"
        )
    order = np.argsort(-times, kind="stable")
    ts, es, Xs = times[order], events[order], X[order]
    shift = eta.max() if n else 0.0
    ws = np.exp(eta[order] - shift)

    cum_w = np.cumsum(ws)
    cum_wx = np.cumsum(ws[:, None] * Xs, axis=0)

    # last row index of each tied-time block (risk set = prefix through it)
    neg_t = -ts
    block_last = np.searchsorted(neg_t, neg_t, side="right") - 1
    ev_pos = np.flatnonzero(es)
    group_last, d = np.unique(block_last[ev_pos], return_counts=True)
    d = d.astype(np.float64)

    S0 = cum_w[group_last]
    if np.any(S0 <= 0) or not np.all(np.isfinite(S0)):
        raise NumericError(
            "risk-set sum overflowed or vanished; standardize covariates"
        )
    U = cum_wx[group_last] / S0[:, None]              # (G, p)
    group_times = ts[group_last]                      # descending

    value = -(float((eta[order][ev_pos] - shift).sum()) - float(d @ np.log(S0)))

    # A_i = sum of d/S0 over event groups with time <= t_i (suffix in desc order)
    r = d / S0
    r_suffix = np.concatenate([np.cumsum(r[::-1])[::-1], [0.0]])
    gmin = np.searchsorted(-group_times, neg_t, side="left")
    A = r_suffix[gmin]

    wA = ws * A
    grad = -(Xs[ev_pos].sum(axis=0) - Xs.T @ wA)
    hess = (Xs * wA[:, None]).T @ Xs - (U * d[:, None]).T @ U
    hess = (hess + hess.T) / 2.0

    if ridge:
        value += 0.5 * ridge * float(beta @ beta)
        grad = grad + ridge * beta
        hess = hess + ridge * np.eye(p)
    return value, grad, hess


def breslow_baseline(
    X: np.ndarray | EncodedCohort,
    times: np.ndarray | None = None,
    events: np.ndarray | None = None,
    beta: np.ndarray = (),
) -> tuple[np.ndarray, np.ndarray]:
    """Breslow baseline cumulative hazard H0 as (event times asc, H0 values).

    Accepts either (cohort, beta) or explicit (X, times, events, beta).
    """
    if isinstance(X, EncodedCohort):
        if times is not None:  # (cohort, beta) calling form
            beta = times
        X, times, events = X.matrix, X.times, X.events
    X, times, events = _prepare(X, times, events)
    beta = np.asarray(beta, dtype=np.float64).reshape(-1)
    eta = X @ beta if beta.size else np.zeros(X.shape[0])
    order = np.argsort(-times, kind="stable")
    ts, es = times[order], events[order]
    shift = eta.max()
    ws = np.exp(eta[order] - shift)
    cum_w = np.cumsum(ws)
    neg_t = -ts
    block_last = np.searchsorted(neg_t, neg_t, side="right") - 1
    ev_pos = np.flatnonzero(es)
    group_last, d = np.unique(block_last[ev_pos], return_counts=True)
    S0_true = cum_w[group_last] * np.exp(shift)
    increments = d / S0_true                    # at descending event times
    event_times = ts[group_last][::-1]          # ascending
    cumhaz = np.cumsum(increments[::-1])
    return event_times, cumhaz


@dataclass
class FitOptions:
    tol: float = 1e-8
    max_iter: int = 100
    ridge: float = 0.0
    rel_loglik_tol: float = 1e-10
    horizon: float = 10.0


def fit(
    cohort: EncodedCohort, options: FitOptions | None = None
) -> tuple[CoxModel, FitDiagnostics]:
    """Newton iterations from beta = 0 with step-halving on non-decrease."""
    opts = options or FitOptions()
    X, times, events = cohort.matrix, cohort.times, cohort.events
    n, p = X.shape
    if n <= p:
        raise CohortError(f"need n > p, got n={n}, p={p}")

    beta = np.zeros(p)
    value, grad, hess = neg_log_partial_likelihood(
        beta, X, times, events, ridge=opts.ridge
    )
    converged = False
    iterations = 0
    for iterations in range(1, opts.max_iter + 1):
        try:
            direction = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            raise NumericError(
                "singular Hessian; consider the ridge option or removing collinear columns"
            ) from None
        step = 1.0
        for _ in range(40):
            candidate = beta - step * direction
            new_value, new_grad, new_hess = neg_log_partial_likelihood(
                candidate, X, times, events, ridge=opts.ridge
            )
            if new_value <= value + 1e-14:
                break
            step /= 2.0
        if np.max(np.abs(candidate)) > SEPARATION_BOUND:
            raise SeparationError(
                "coefficients diverging (monotone likelihood / separation); "
                "refit with ridge > 0"
            )
        delta = np.max(np.abs(candidate - beta)) if p else 0.0
        rel_change = abs(new_value - value) / (abs(new_value) + 1.0)
        beta, value, grad, hess = candidate, new_value, new_grad, new_hess
        if delta < opts.tol and rel_change < opts.rel_loglik_tol:
            converged = True
            break

    covariance = np.linalg.inv(hess)
    se = np.sqrt(np.maximum(np.diag(covariance), 0.0))
    z = np.divide(np.abs(beta), se, out=np.zeros_like(beta), where=se > 0)
    # p = 2 * Phi(-|z|) computed in log space so huge z does not underflow
    neg_log2_p = -(np.log(2.0) + norm.logsf(z)) / np.log(2.0)
    diagnostics = FitDiagnostics(
        converged=converged,
        iterations=iterations,
        final_loglik=-value,
        standard_errors=se,
        ci95_low=beta - 1.96 * se,
        ci95_high=beta + 1.96 * se,
        neg_log2_p=neg_log2_p,
    )
    bt, bh = breslow_baseline(X, times, events, beta)
    model = CoxModel(
        feature_names=cohort.feature_names,
        coefficients=beta,
        standardization=dict(cohort.standardization),
        baseline_times=bt,
        baseline_cumhaz=bh,
        max_time=float(times.max()),
        horizon=opts.horizon,
    )
    return model, diagnostics


# --- serialization --------------------------------------------------------------

MODEL_FORMAT = "t2drisk-cox-model"
MODEL_VERSION = 1


def model_to_document(model: CoxModel, diagnostics: FitDiagnostics | None = None) -> dict:
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "horizon": model.horizon,
        "max_time": model.max_time,
        "features": [
            {
                "name": name,
                "coefficient": float(model.coefficients[i]),
                "center": model.standardization.get(name, (0.0, 1.0))[0],
                "scale": model.standardization.get(name, (0.0, 1.0))[1],
                "standardized": name in model.standardization,
            }
            for i, name in enumerate(model.feature_names)
        ],
        "baseline_cumhaz": {
            "times": model.baseline_times.tolist(),
            "values": model.baseline_cumhaz.tolist(),
        },
    }
    if diagnostics is not None:
        doc["diagnostics"] = {
            "converged": diagnostics.converged,
            "iterations": diagnostics.iterations,
            "final_loglik": diagnostics.final_loglik,
            "standard_errors": diagnostics.standard_errors.tolist(),
            "ci95_low": diagnostics.ci95_low.tolist(),
            "ci95_high": diagnostics.ci95_high.tolist(),
            "neg_log2_p": diagnostics.neg_log2_p.tolist(),
        }
    return doc


def model_from_document(doc: Mapping) -> CoxModel:
    if doc.get("format") != MODEL_FORMAT:
        raise CohortError(f"not a Cox model document: format={doc.get('format')!r}")
    if doc.get("version") != MODEL_VERSION:
        raise CohortError(f"unsupported model version {doc.get('version')!r}")
    features = doc["features"]
    return CoxModel(
        feature_names=tuple(f["name"] for f in features),
        coefficients=np.array([f["coefficient"] for f in features], dtype=np.float64),
        standardization={
            f["name"]: (f["center"], f["scale"]) for f in features if f["standardized"]
        },
        baseline_times=np.array(doc["baseline_cumhaz"]["times"], dtype=np.float64),
        baseline_cumhaz=np.array(doc["baseline_cumhaz"]["values"], dtype=np.float64),
        max_time=float(doc["max_time"]),
        horizon=float(doc["horizon"]),
    )


def save_model(model: CoxModel, path: str, diagnostics: FitDiagnostics | None = None) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_document(model, diagnostics), fh, indent=1)
        fh.write("\n")


def load_model(path: str) -> CoxModel:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CohortError(f"{path}: malformed model document ({exc})") from None
    return model_from_document(doc)
