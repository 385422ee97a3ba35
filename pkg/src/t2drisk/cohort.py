"""Subject records, one-hot/standardization encoding, CSV ingestion, splitting.

The raw schema has one row per subject.  Continuous covariates are z-scored
on the fitting set (sample SD, ddof=1); binary covariates stay 0/1; ethnicity
expands to two indicator columns with white/other as the reference category.
All transforms are pure value functions with no shared mutable state.
"""

from __future__ import annotations

import csv
import datetime as dt
import enum
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import CohortError

STUDY_END = dt.date(2020, 9, 30)
DAYS_PER_YEAR = 365.25


class Ethnicity(str, enum.Enum):
    WHITE_OR_OTHER = "white_or_other"  # reference category, no indicator column
    ASIAN = "asian"
    BLACK = "black"


BOOL_FIELDS = (
    "degree",
    "cvd_diagnosis",
    "cholesterol_meds",
    "other_meds",
    "stomach_pain",
    "daytime_dozing",
    "breathless_level_ground",
    "diabetes_father",
    "diabetes_mother",
    "diabetes_siblings",
    "alcohol_monthly_plus",
    "currently_smoking",
    "previous_smoker",
    "good_health",
)

#: raw CSV columns, in canonical order (outcome columns excluded)
RAW_FIELDS = (
    "age",
    "waist_hip_ratio",
    "bmi",
    "ethnicity",
    "degree",
    "cvd_diagnosis",
    "cholesterol_meds",
    "other_meds",
    "stomach_pain",
    "daytime_dozing",
    "breathless_level_ground",
    "diabetes_father",
    "diabetes_mother",
    "diabetes_siblings",
    "alcohol_monthly_plus",
    "currently_smoking",
    "previous_smoker",
    "pack_years",
    "good_health",
)

CONTINUOUS_COLUMNS = ("age", "waist_hip_ratio", "bmi", "pack_years")

#: encoded design-matrix columns of the reduced 19-term model
ENCODED_COLUMNS = (
    "age",
    "waist_hip_ratio",
    "bmi",
    "ethnicity_asian",
    "ethnicity_black",
    "degree",
    "cvd_diagnosis",
    "cholesterol_meds",
    "other_meds",
    "stomach_pain",
    "daytime_dozing",
    "breathless_level_ground",
    "diabetes_father",
    "diabetes_mother",
    "diabetes_siblings",
    "alcohol_monthly_plus",
    "currently_smoking",
    "pack_years",
    "good_health",
)


@dataclass(frozen=True)
class SubjectRecord:
    """Raw answers for one subject (19 reduced-model features + previous_smoker)."""

    age: int
    waist_hip_ratio: float
    bmi: float
    ethnicity: Ethnicity
    degree: bool
    cvd_diagnosis: bool
    cholesterol_meds: bool
    other_meds: bool
    stomach_pain: bool
    daytime_dozing: bool
    breathless_level_ground: bool
    diabetes_father: bool
    diabetes_mother: bool
    diabetes_siblings: bool
    alcohol_monthly_plus: bool
    currently_smoking: bool
    previous_smoker: bool
    pack_years: float
    good_health: bool

    def __post_init__(self) -> None:
        if int(self.age) != self.age or self.age < 18:
            raise CohortError(f"age must be an integer >= 18, got {self.age!r}")
        if not self.waist_hip_ratio > 0:
            raise CohortError(f"waist_hip_ratio must be > 0, got {self.waist_hip_ratio!r}")
        if not self.bmi > 0:
            raise CohortError(f"bmi must be > 0, got {self.bmi!r}")
        if self.pack_years < 0:
            raise CohortError(f"pack_years must be >= 0, got {self.pack_years!r}")
        if not isinstance(self.ethnicity, Ethnicity):
            raise CohortError(f"unknown ethnicity {self.ethnicity!r}")
        never_smoked = not (self.currently_smoking or self.previous_smoker)
        if never_smoked and self.pack_years != 0:
            raise CohortError(
                f"pack_years must be 0 for never-smokers, got {self.pack_years!r}"
            )


@dataclass(frozen=True)
class Outcome:
    """Observed follow-up time in years and incident-T2D indicator."""

    time: float
    event: bool

    def __post_init__(self) -> None:
        if not self.time > 0:
            raise CohortError(f"follow-up time must be > 0, got {self.time!r}")


@dataclass
class EncodedCohort:
    """Numeric design matrix with survival outcome.

    ``matrix`` holds standardized continuous columns and 0/1 indicators.
    ``standardization`` maps continuous column name -> (center, scale) used
    on this cohort's fitting set.  ``column_groups`` maps each column to its
    one-hot group so grouped elimination can treat indicator sets as a unit.
    """

    feature_names: tuple[str, ...]
    matrix: np.ndarray
    times: np.ndarray
    events: np.ndarray
    standardization: dict[str, tuple[float, float]]
    column_groups: dict[str, str]

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def p(self) -> int:
        return self.matrix.shape[1]

    def column(self, name: str) -> np.ndarray:
        return self.matrix[:, self.feature_names.index(name)]

    def raw_matrix(self) -> np.ndarray:
        """Undo standardization, recovering the raw design matrix."""
        raw = self.matrix.copy()
        for name, (center, scale) in self.standardization.items():
            j = self.feature_names.index(name)
            raw[:, j] = raw[:, j] * scale + center
        return raw

    @classmethod
    def from_arrays(
        cls,
        feature_names: Sequence[str],
        matrix: np.ndarray,
        times: np.ndarray,
        events: np.ndarray,
        *,
        continuous: Sequence[str] = (),
        column_groups: Mapping[str, str] | None = None,
    ) -> "EncodedCohort":
        """Build a cohort from raw arrays, standardizing ``continuous`` columns."""
        names = tuple(feature_names)
        X = np.asarray(matrix, dtype=np.float64).copy()
        if X.ndim != 2 or X.shape[1] != len(names):
            raise CohortError("matrix shape does not match feature names")
        times = np.asarray(times, dtype=np.float64)
        events = np.asarray(events, dtype=bool)
        if not (X.shape[0] == times.shape[0] == events.shape[0]):
            raise CohortError("matrix, times, and events must have equal length")
        standardization: dict[str, tuple[float, float]] = {}
        for name in continuous:
            j = names.index(name)
            center, scale = _column_stats(X[:, j], name)
            X[:, j] = (X[:, j] - center) / scale
            standardization[name] = (center, scale)
        groups = dict(column_groups) if column_groups else {n: n for n in names}
        return cls(names, X, times, events, standardization, groups)

    def select_features(self, names: Sequence[str]) -> "EncodedCohort":
        """Return a cohort restricted to ``names`` (order preserved as given)."""
        idx = [self.feature_names.index(n) for n in names]
        return EncodedCohort(
            tuple(names),
            self.matrix[:, idx].copy(),
            self.times,
            self.events,
            {n: self.standardization[n] for n in names if n in self.standardization},
            {n: self.column_groups.get(n, n) for n in names},
        )

    def take_rows(self, idx: np.ndarray) -> "EncodedCohort":
        """Row subset without re-standardizing (keeps current parameters)."""
        return EncodedCohort(
            self.feature_names,
            self.matrix[idx].copy(),
            self.times[idx].copy(),
            self.events[idx].copy(),
            dict(self.standardization),
            dict(self.column_groups),
        )


def _column_stats(values: np.ndarray, name: str) -> tuple[float, float]:
    center = float(np.mean(values))
    scale = float(np.std(values, ddof=1)) if values.shape[0] > 1 else 0.0
    if scale == 0.0 or not np.isfinite(scale):
        raise CohortError(f"cannot standardize zero-variance column '{name}'")
    return center, scale


def design_row(record: SubjectRecord, *, include_previous_smoker: bool = False) -> np.ndarray:
    """Raw (unstandardized) design-matrix row for one record."""
    values = [
        float(record.age),
        record.waist_hip_ratio,
        record.bmi,
        1.0 if record.ethnicity is Ethnicity.ASIAN else 0.0,
        1.0 if record.ethnicity is Ethnicity.BLACK else 0.0,
        float(record.degree),
        float(record.cvd_diagnosis),
        float(record.cholesterol_meds),
        float(record.other_meds),
        float(record.stomach_pain),
        float(record.daytime_dozing),
        float(record.breathless_level_ground),
        float(record.diabetes_father),
        float(record.diabetes_mother),
        float(record.diabetes_siblings),
        float(record.alcohol_monthly_plus),
        float(record.currently_smoking),
        record.pack_years,
        float(record.good_health),
    ]
    if include_previous_smoker:
        values.insert(17, float(record.previous_smoker))
    return np.array(values, dtype=np.float64)


def encoded_columns(*, include_previous_smoker: bool = False) -> tuple[str, ...]:
    cols = list(ENCODED_COLUMNS)
    if include_previous_smoker:
        cols.insert(17, "previous_smoker")
    return tuple(cols)


def encode(
    records: Sequence[SubjectRecord],
    outcomes: Sequence[Outcome] | None = None,
    *,
    include_previous_smoker: bool = False,
) -> EncodedCohort:
    """One-hot encode and standardize a record list into a design matrix.

    ``outcomes`` may be omitted for feature-only encoding (times/events are
    then filled with placeholders and must not be used for fitting).
    """
    if len(records) == 0:
        raise CohortError("cannot encode an empty record list")
    if outcomes is not None and len(outcomes) != len(records):
        raise CohortError("records and outcomes must have equal length")
    X = np.stack(
        [design_row(r, include_previous_smoker=include_previous_smoker) for r in records]
    )
    if outcomes is None:
        times = np.full(len(records), np.nan)
        events = np.zeros(len(records), dtype=bool)
    else:
        times = np.array([o.time for o in outcomes], dtype=np.float64)
        events = np.array([o.event for o in outcomes], dtype=bool)
    names = encoded_columns(include_previous_smoker=include_previous_smoker)
    groups = {n: n for n in names}
    groups["ethnicity_asian"] = "ethnicity"
    groups["ethnicity_black"] = "ethnicity"
    return EncodedCohort.from_arrays(
        names, X, times, events, continuous=CONTINUOUS_COLUMNS, column_groups=groups
    )


def decode(cohort: EncodedCohort) -> list[SubjectRecord]:
    """Reconstruct records from an encoded cohort (inverse of :func:`encode`)."""
    raw = cohort.raw_matrix()
    names = cohort.feature_names
    col = {n: i for i, n in enumerate(names)}
    records = []
    for row in raw:
        if row[col["ethnicity_asian"]] > 0.5:
            eth = Ethnicity.ASIAN
        elif row[col["ethnicity_black"]] > 0.5:
            eth = Ethnicity.BLACK
        else:
            eth = Ethnicity.WHITE_OR_OTHER
        kwargs = {
            "age": int(round(row[col["age"]])),
            "waist_hip_ratio": float(row[col["waist_hip_ratio"]]),
            "bmi": float(row[col["bmi"]]),
            "ethnicity": eth,
            "pack_years": float(max(row[col["pack_years"]], 0.0)),
        }
        for field in BOOL_FIELDS:
            if field == "previous_smoker":
                continue
            kwargs[field] = bool(row[col[field]] > 0.5)
        if "previous_smoker" in col:
            kwargs["previous_smoker"] = bool(row[col["previous_smoker"]] > 0.5)
        else:
            # not a model column: infer the weakest flag consistent with the
            # never-smoked invariant
            kwargs["previous_smoker"] = (
                kwargs["pack_years"] > 0 and not kwargs["currently_smoking"]
            )
        records.append(SubjectRecord(**kwargs))
    return records


def _restandardize(
    cohort: EncodedCohort, train_idx: np.ndarray, test_idx: np.ndarray
) -> tuple[EncodedCohort, EncodedCohort]:
    """Split rows and re-standardize both parts with train-only statistics."""
    raw = cohort.raw_matrix()
    standardization: dict[str, tuple[float, float]] = {}
    out = {}
    for part, idx in (("train", train_idx), ("test", test_idx)):
        X = raw[idx].copy()
        for name in cohort.standardization:
            j = cohort.feature_names.index(name)
            if part == "train":
                standardization[name] = _column_stats(X[:, j], name)
            center, scale = standardization[name]
            X[:, j] = (X[:, j] - center) / scale
        out[part] = EncodedCohort(
            cohort.feature_names,
            X,
            cohort.times[idx].copy(),
            cohort.events[idx].copy(),
            dict(standardization),
            dict(cohort.column_groups),
        )
    return out["train"], out["test"]


def stratified_split(
    cohort: EncodedCohort, test_fraction: float, seed: int
) -> tuple[EncodedCohort, EncodedCohort]:
    """Outcome-stratified train/test split, re-standardized on the train part.

    The test count per stratum is round(test_fraction * stratum size); the
    split is a partition of the input rows and deterministic given the seed.
    """
    if not 0 < test_fraction < 1:
        raise CohortError(f"test_fraction must be in (0, 1), got {test_fraction}")
    rng = np.random.default_rng(seed)
    test_mask = np.zeros(cohort.n, dtype=bool)
    for stratum in (True, False):
        members = np.flatnonzero(cohort.events == stratum)
        if members.shape[0] < 2:
            raise CohortError(
                f"stratum event={stratum} has {members.shape[0]} rows; need at least 2"
            )
        k = int(round(test_fraction * members.shape[0]))
        chosen = rng.permutation(members)[:k]
        test_mask[chosen] = True
    train_idx = np.flatnonzero(~test_mask)
    test_idx = np.flatnonzero(test_mask)
    return _restandardize(cohort, train_idx, test_idx)


# --- CSV ingestion -----------------------------------------------------------

_BOOL_TOKENS = {"0": False, "1": True, "false": False, "true": True}


@dataclass
class IngestResult:
    records: list[SubjectRecord]
    outcomes: list[Outcome]
    n_read: int
    n_excluded: int
    exclusions: dict[str, int]  # column or reason -> dropped-row count


def _parse_bool(token: str) -> bool:
    try:
        return _BOOL_TOKENS[token.strip().lower()]
    except KeyError:
        raise ValueError(f"expected 0/1/true/false, got {token!r}")


def _parse_ethnicity(token: str) -> Ethnicity:
    try:
        return Ethnicity(token.strip().lower())
    except ValueError:
        raise CohortError(
            f"unknown ethnicity token {token!r}; expected one of "
            f"{[e.value for e in Ethnicity]}"
        )


def _parse_date(token: str) -> dt.date:
    return dt.date.fromisoformat(token.strip())


def ingest_csv(path: str) -> IngestResult:
    """Read a cohort CSV into records and outcomes.

    Two outcome layouts are accepted (see docs/cohort-format.md): pre-computed
    ``time``/``event`` columns, or ISO dates ``enrolled``/``diagnosed``/
    ``followup_until`` from which time and event are derived with censoring at
    the study end (2020-09-30).  Rows with any missing required value are
    dropped and counted; malformed values raise an error naming the row and
    column.
    """
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames
        if header is None:
            raise CohortError(f"{path}: empty file")
        missing_cols = [c for c in RAW_FIELDS if c not in header]
        if missing_cols:
            raise CohortError(f"{path}: header is missing columns {missing_cols}")
        if "time" in header and "event" in header:
            date_mode = False
        elif "enrolled" in header:
            date_mode = True
        else:
            raise CohortError(
                f"{path}: need either time/event columns or enrolled/diagnosed dates"
            )

        records: list[SubjectRecord] = []
        outcomes: list[Outcome] = []
        exclusions: dict[str, int] = {}
        n_read = 0

        for rownum, row in enumerate(reader, start=2):  # header is line 1
            n_read += 1
            required = list(RAW_FIELDS) + (["enrolled"] if date_mode else ["time", "event"])
            missing = [c for c in required if row.get(c, "") in ("", None)]
            if missing:
                exclusions[missing[0]] = exclusions.get(missing[0], 0) + 1
                continue
            try:
                record = _row_to_record(row, rownum)
                outcome = _row_to_outcome(row, rownum, date_mode)
            except _RowExcluded as exc:
                exclusions[exc.reason] = exclusions.get(exc.reason, 0) + 1
                continue
            records.append(record)
            outcomes.append(outcome)

    n_excluded = n_read - len(records)
    return IngestResult(records, outcomes, n_read, n_excluded, exclusions)


class _RowExcluded(Exception):
    def __init__(self, reason: str):
        self.reason = reason


def _row_to_record(row: Mapping[str, str], rownum: int) -> SubjectRecord:
    kwargs = {}
    for name in RAW_FIELDS:
        token = row[name]
        try:
            if name == "age":
                kwargs[name] = int(token)
            elif name in ("waist_hip_ratio", "bmi", "pack_years"):
                kwargs[name] = float(token)
            elif name == "ethnicity":
                kwargs[name] = _parse_ethnicity(token)
            else:
                kwargs[name] = _parse_bool(token)
        except CohortError:
            raise
        except ValueError as exc:
            raise CohortError(f"row {rownum}, column '{name}': {exc}") from None
    try:
        return SubjectRecord(**kwargs)
    except CohortError as exc:
        raise CohortError(f"row {rownum}: {exc}") from None


def _row_to_outcome(row: Mapping[str, str], rownum: int, date_mode: bool) -> Outcome:
    if not date_mode:
        try:
            time = float(row["time"])
            event = _parse_bool(row["event"])
        except ValueError as exc:
            raise CohortError(f"row {rownum}, column 'time'/'event': {exc}") from None
        if time <= 0:
            raise _RowExcluded("nonpositive_time")
        return Outcome(time, event)

    try:
        enrolled = _parse_date(row["enrolled"])
        diagnosed = _parse_date(row["diagnosed"]) if row.get("diagnosed") else None
        followup = _parse_date(row["followup_until"]) if row.get("followup_until") else None
    except ValueError as exc:
        raise CohortError(f"row {rownum}, date column: {exc}") from None

    censor_date = min(followup or STUDY_END, STUDY_END)
    if diagnosed is not None and diagnosed <= censor_date:
        end, event = diagnosed, True
    else:
        end, event = censor_date, False  # diagnoses past study end censor at study end
    time = (end - enrolled).days / DAYS_PER_YEAR
    if time <= 0:
        raise _RowExcluded("nonpositive_time")
    return Outcome(time, event)


def write_cohort_csv(
    path: str, records: Sequence[SubjectRecord], outcomes: Sequence[Outcome]
) -> None:
    """Write records and outcomes in the canonical time/event CSV layout."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(RAW_FIELDS) + ["time", "event"])
        for rec, out in zip(records, outcomes):
            row = []
            for name in RAW_FIELDS:
                value = getattr(rec, name)
                if name == "ethnicity":
                    row.append(value.value)
                elif isinstance(value, bool):
                    row.append(int(value))
                else:
                    row.append(repr(value) if isinstance(value, float) else value)
            row.append(repr(float(out.time)))
            row.append(int(out.event))
            writer.writerow(row)
