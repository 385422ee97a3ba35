"""HTTP JSON API over the risk engine: /v1/score, /v1/whatif, /v1/model.

Responses are rendered by the same canonical serializers the library
exposes, so service bodies are byte-identical to direct library calls.
Validation is fail-closed: unknown or missing fields and type errors give
400 with per-field messages; structurally valid but out-of-range values
give 422; touching non-modifiable fields in a what-if gives 409.  Request
bodies are never persisted; the optional access log records only method,
path, and status.
"""

from __future__ import annotations

import hashlib
import json
import logging
from typing import Mapping

from fastapi import FastAPI, Request, Response

from .cohort import BOOL_FIELDS, Ethnicity, SubjectRecord
from .engine import (
    ReferenceModel,
    RiskBreakdown,
    WhatIfResult,
    bundled_model,
    score,
    whatif,
)
from .errors import CohortError, ConfigError
from .reference_data import LABELS

log = logging.getLogger(__name__)

_JSON = {"separators": (",", ":"), "sort_keys": False}


def _dumps(obj) -> bytes:
    return json.dumps(obj, **_JSON).encode("utf-8")


# --- canonical response documents (shared with direct library use) -----------


def breakdown_document(model: ReferenceModel, breakdown: RiskBreakdown) -> dict:
    return {
        "model_version": model.version,
        "horizon_years": breakdown.horizon,
        "total_risk": breakdown.total_risk,
        "linear_predictor": breakdown.linear_predictor,
        "contributions": [
            {
                "feature": c.feature,
                "label": LABELS.get(c.feature, c.feature),
                "value": c.value,
                "encoded": c.encoded,
                "contribution": c.contribution,
                "modifiable": c.modifiable,
            }
            for c in breakdown.contributions
        ],
        "disclaimer": model.disclaimer,
    }


def whatif_document(model: ReferenceModel, result: WhatIfResult) -> dict:
    return {
        "model_version": model.version,
        "before": breakdown_document(model, result.before),
        "after": breakdown_document(model, result.after),
        "delta": result.delta,
        "disclaimer": model.disclaimer,
    }


def model_document(model: ReferenceModel) -> dict:
    return {
        "model_version": model.version,
        "horizon_years": model.horizon,
        "baseline_survival": model.baseline_survival,
        "calibration": dict(model.calibration),
        "covariates": [
            {
                "name": c.name,
                "label": LABELS.get(c.name, c.name),
                "coefficient": c.coefficient,
                "ci_low": c.ci_low,
                "ci_high": c.ci_high,
                "center": c.center,
                "scale": c.scale,
                "continuous": c.continuous,
                "modifiable": c.modifiable,
            }
            for c in model.covariates
        ],
        "disclaimer": model.disclaimer,
    }


def render_score(model: ReferenceModel, record: SubjectRecord) -> bytes:
    return _dumps(breakdown_document(model, score(model, record)))


def render_whatif(
    model: ReferenceModel,
    record: SubjectRecord,
    modifications: Mapping[str, object],
    *,
    allow_non_modifiable: bool = False,
) -> bytes:
    result = whatif(
        model, record, modifications, allow_non_modifiable=allow_non_modifiable
    )
    return _dumps(whatif_document(model, result))


def render_model(model: ReferenceModel) -> bytes:
    return _dumps(model_document(model))


# --- request validation --------------------------------------------------------


class _FieldErrors(Exception):
    def __init__(self, status: int, errors: list[dict]):
        self.status = status
        self.errors = errors


_RECORD_FIELDS = {
    "age": "integer",
    "waist_hip_ratio": "number",
    "bmi": "number",
    "pack_years": "number",
    "ethnicity": "ethnicity",
    **{name: "boolean" for name in BOOL_FIELDS},
}

_RANGE_RULES = {
    "age": (lambda v: v >= 18, "must be >= 18"),
    "waist_hip_ratio": (lambda v: v > 0, "must be > 0"),
    "bmi": (lambda v: v > 0, "must be > 0"),
    "pack_years": (lambda v: v >= 0, "must be >= 0"),
}


def _structural_errors(body: Mapping) -> list[dict]:
    errors = []
    for field in sorted(set(body) - set(_RECORD_FIELDS)):
        errors.append({"field": field, "message": "unknown field"})
    for field, kind in _RECORD_FIELDS.items():
        if field not in body:
            errors.append({"field": field, "message": "missing field"})
            continue
        value = body[field]
        ok = {
            "integer": lambda v: isinstance(v, int) and not isinstance(v, bool),
            "number": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
            "boolean": lambda v: isinstance(v, bool),
            "ethnicity": lambda v: isinstance(v, str),
        }[kind](value)
        if not ok:
            errors.append({"field": field, "message": f"expected {kind}"})
    return errors


def validate_record(body: object) -> SubjectRecord:
    """Two-phase validation: structure first (400), then ranges (422)."""
    if not isinstance(body, Mapping):
        raise _FieldErrors(400, [{"field": "", "message": "body must be a JSON object"}])
    structural = _structural_errors(body)
    if structural:
        raise _FieldErrors(400, structural)
    range_errors = []
    for field, (check, message) in _RANGE_RULES.items():
        if not check(body[field]):
            range_errors.append({"field": field, "message": message})
    try:
        ethnicity = Ethnicity(body["ethnicity"])
    except ValueError:
        range_errors.append(
            {
                "field": "ethnicity",
                "message": f"must be one of {[e.value for e in Ethnicity]}",
            }
        )
        ethnicity = None
    if not (body["currently_smoking"] or body["previous_smoker"]) and body["pack_years"] != 0:
        range_errors.append(
            {"field": "pack_years", "message": "must be 0 for never-smokers"}
        )
    if range_errors:
        raise _FieldErrors(422, range_errors)
    kwargs = {name: body[name] for name in _RECORD_FIELDS if name != "ethnicity"}
    kwargs["age"] = int(body["age"])
    kwargs["waist_hip_ratio"] = float(body["waist_hip_ratio"])
    kwargs["bmi"] = float(body["bmi"])
    kwargs["pack_years"] = float(body["pack_years"])
    return SubjectRecord(ethnicity=ethnicity, **kwargs)


# --- app ------------------------------------------------------------------------


def _error_response(status: int, errors: list[dict]) -> Response:
    return Response(
        content=_dumps({"errors": errors}),
        status_code=status,
        media_type="application/json",
    )


async def _read_json(request: Request):
    if request.headers.get("content-type", "").split(";")[0] != "application/json":
        raise _FieldErrors(
            415, [{"field": "", "message": "content-type must be application/json"}]
        )
    try:
        return json.loads(await request.body())
    except json.JSONDecodeError as exc:
        raise _FieldErrors(400, [{"field": "", "message": f"invalid JSON: {exc}"}])


def create_app(
    model: ReferenceModel | None = None,
    *,
    cors_origins: tuple[str, ...] = (),
    access_log: bool = False,
) -> FastAPI:
    """Build the scoring app around an immutable model (default: bundled)."""
    engine_model = model or bundled_model()
    app = FastAPI(title="t2drisk scoring service", docs_url=None, redoc_url=None)

    if cors_origins:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(cors_origins),
            allow_methods=["GET", "POST"],
            allow_headers=["content-type"],
        )

    model_bytes = render_model(engine_model)
    model_etag = '"' + hashlib.sha256(model_bytes).hexdigest()[:32] + '"'

    @app.middleware("http")
    async def _log_requests(request: Request, call_next):
        response = await call_next(request)
        if access_log:  # never log bodies: no feature values in logs
            log.info("%s %s -> %s", request.method, request.url.path, response.status_code)
        return response

    @app.get("/v1/health")
    async def health() -> Response:
        return Response(
            content=_dumps({"status": "ok", "model_version": engine_model.version}),
            media_type="application/json",
        )

    @app.get("/v1/model")
    async def model_metadata() -> Response:
        return Response(
            content=model_bytes,
            media_type="application/json",
            headers={"ETag": model_etag},
        )

    @app.post("/v1/score")
    async def score_endpoint(request: Request) -> Response:
        try:
            record = validate_record(await _read_json(request))
        except _FieldErrors as exc:
            return _error_response(exc.status, exc.errors)
        return Response(
            content=render_score(engine_model, record), media_type="application/json"
        )

    @app.post("/v1/whatif")
    async def whatif_endpoint(request: Request) -> Response:
        try:
            body = await _read_json(request)
            if not isinstance(body, Mapping) or "base" not in body:
                raise _FieldErrors(
                    400, [{"field": "base", "message": "missing base record"}]
                )
            record = validate_record(body["base"])
            modifications = body.get("modifications", {})
            if not isinstance(modifications, Mapping):
                raise _FieldErrors(
                    400, [{"field": "modifications", "message": "must be an object"}]
                )
        except _FieldErrors as exc:
            return _error_response(exc.status, exc.errors)
        try:
            content = render_whatif(engine_model, record, modifications)
        except ConfigError as exc:  # non-modifiable field touched
            return _error_response(409, [{"field": "modifications", "message": str(exc)}])
        except CohortError as exc:
            return _error_response(422, [{"field": "modifications", "message": str(exc)}])
        return Response(content=content, media_type="application/json")

    return app
