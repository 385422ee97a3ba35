"""Stepwise backward elimination driven by cross-validated c-index degradation.

Each pass scores the current feature set by k-fold CV c-index (mean, sd over
folds), then refits once per candidate feature with that feature's one-hot
group removed.  The least-degrading candidate is removed when its degradation
does not exceed one standard deviation; otherwise the procedure stops.  Folds
are stratified on the event flag and fixed per run, so ledgers replay
deterministically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .cohort import EncodedCohort, _restandardize
from .cox import FitOptions, fit
from .errors import CohortError, ConfigError, NumericError
from .metrics import concordance_index


@dataclass
class EliminationStep:
    pass_index: int
    feature: str                      # group name (all its columns together)
    baseline_folds: list[float]
    baseline_mean: float
    baseline_sd: float
    without_folds: list[float]
    without_mean: float
    without_sd: float
    degradation: float                # baseline_mean - without_mean
    decision: str                     # "kept" | "removed" | "skipped" | "override"
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "pass": self.pass_index,
            "feature": self.feature,
            "baseline_folds": self.baseline_folds,
            "baseline_mean": self.baseline_mean,
            "baseline_sd": self.baseline_sd,
            "without_folds": self.without_folds,
            "without_mean": self.without_mean,
            "without_sd": self.without_sd,
            "degradation": self.degradation,
            "decision": self.decision,
            "note": self.note,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "EliminationStep":
        return cls(
            pass_index=d["pass"],
            feature=d["feature"],
            baseline_folds=list(d["baseline_folds"]),
            baseline_mean=d["baseline_mean"],
            baseline_sd=d["baseline_sd"],
            without_folds=list(d["without_folds"]),
            without_mean=d["without_mean"],
            without_sd=d["without_sd"],
            degradation=d["degradation"],
            decision=d["decision"],
            note=d.get("note", ""),
        )


@dataclass
class EliminationLedger:
    steps: list[EliminationStep] = field(default_factory=list)

    def to_jsonl(self) -> str:
        return "".join(json.dumps(s.to_dict()) + "\n" for s in self.steps)

    @classmethod
    def from_jsonl(cls, text: str) -> "EliminationLedger":
        steps = [
            EliminationStep.from_dict(json.loads(line))
            for line in text.splitlines()
            if line.strip()
        ]
        return cls(steps)

    def save(self, path: str) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_jsonl())

    @classmethod
    def load(cls, path: str) -> "EliminationLedger":
        with open(path) as fh:
            return cls.from_jsonl(fh.read())


def _fold_assignment(events: np.ndarray, folds: int, seed: int) -> np.ndarray:
    """Event-stratified fold labels, deterministic given the seed."""
    rng = np.random.default_rng(seed)
    labels = np.empty(events.shape[0], dtype=np.int64)
    for stratum in (True, False):
        members = rng.permutation(np.flatnonzero(events == stratum))
        labels[members] = np.arange(members.shape[0]) % folds
    return labels


def _cv_c_index(
    cohort: EncodedCohort,
    feature_names: Sequence[str],
    fold_labels: np.ndarray,
    folds: int,
    fit_options: FitOptions,
) -> list[float]:
    sub = cohort.select_features(feature_names)
    out = []
    for f in range(folds):
        val_idx = np.flatnonzero(fold_labels == f)
        train_idx = np.flatnonzero(fold_labels != f)
        train, val = _restandardize(sub, train_idx, val_idx)
        model, _ = fit(train, fit_options)
        scores = model.linear_predictor(val.matrix)
        out.append(concordance_index(val.times, val.events, scores))
    return out


def backward_eliminate(
    cohort: EncodedCohort,
    folds: int = 2,
    seed: int = 0,
    *,
    sd_rule: str = "baseline",
    fit_options: FitOptions | None = None,
) -> tuple[list[str], EliminationLedger]:
    """Iteratively drop the least-degrading feature group within one fold-sd.

    ``sd_rule`` selects whose fold sd bounds an allowed degradation: the
    current baseline model's ("baseline", default) or the candidate model's
    ("candidate").  Returns the kept column names plus the full ledger.
    """
    if folds < 2:
        raise ConfigError(f"need at least 2 folds, got {folds}")
    if sd_rule not in ("baseline", "candidate"):
        raise ConfigError(f"unknown sd_rule {sd_rule!r}")
    opts = fit_options or FitOptions()
    fold_labels = _fold_assignment(cohort.events, folds, seed)
    for f in range(folds):
        if not cohort.events[fold_labels == f].any():
            raise CohortError(f"fold {f} has no events; reduce folds or enlarge cohort")

    current = list(cohort.feature_names)
    ledger = EliminationLedger()
    for pass_index in range(1, len(cohort.feature_names) + 1):
        groups: dict[str, list[str]] = {}
        for name in current:
            groups.setdefault(cohort.column_groups.get(name, name), []).append(name)
        if len(groups) <= 1:
            break
        base_folds = _cv_c_index(cohort, current, fold_labels, folds, opts)
        base_mean = float(np.mean(base_folds))
        base_sd = float(np.std(base_folds, ddof=1))

        candidates: list[EliminationStep] = []
        for group_name, columns in groups.items():
            remaining = [c for c in current if c not in columns]
            if not remaining:
                continue
            try:
                cand_folds = _cv_c_index(cohort, remaining, fold_labels, folds, opts)
            except NumericError as exc:
                ledger.steps.append(
                    EliminationStep(
                        pass_index, group_name, base_folds, base_mean, base_sd,
                        [], float("nan"), float("nan"), float("nan"),
                        "skipped", note=f"fit failed: {exc}",
                    )
                )
                continue
            cand_mean = float(np.mean(cand_folds))
            cand_sd = float(np.std(cand_folds, ddof=1))
            candidates.append(
                EliminationStep(
                    pass_index, group_name, base_folds, base_mean, base_sd,
                    cand_folds, cand_mean, cand_sd, base_mean - cand_mean, "kept",
                )
            )

        if not candidates:
            break
        best = min(candidates, key=lambda s: s.degradation)
        allowed_sd = base_sd if sd_rule == "baseline" else best.without_sd
        removed = best.degradation <= allowed_sd
        if removed:
            best.decision = "removed"
            current = [c for c in current if cohort.column_groups.get(c, c) != best.feature]
        ledger.steps.extend(candidates)
        if not removed:
            break
    return current, ledger


def clinical_review_filter(
    kept: Sequence[str],
    universe: Sequence[str],
    *,
    allowlist: Mapping[str, str] | Sequence[str] = (),
    blocklist: Mapping[str, str] | Sequence[str] = (),
    ledger: EliminationLedger | None = None,
) -> list[str]:
    """Apply human overrides on top of the data-driven kept set.

    ``allowlist`` forces features back in, ``blocklist`` forces them out;
    either may map feature -> reason.  Every override is recorded in the
    ledger with its reason.  Unknown feature names raise.
    """
    def as_map(x) -> dict[str, str]:
        return dict(x) if isinstance(x, Mapping) else {k: "" for k in x}

    allow, block = as_map(allowlist), as_map(blocklist)
    overlap = set(allow) & set(block)
    if overlap:
        raise ConfigError(f"features in both allowlist and blocklist: {sorted(overlap)}")
    unknown = [f for f in list(allow) + list(block) if f not in universe]
    if unknown:
        raise ConfigError(f"unknown feature(s) in review lists: {unknown}")

    final = list(kept)
    for name, reason in block.items():
        if name in final:
            final.remove(name)
        if ledger is not None:
            ledger.steps.append(
                EliminationStep(0, name, [], float("nan"), float("nan"), [],
                                float("nan"), float("nan"), float("nan"),
                                "override", note=f"blocklist: {reason}")
            )
    for name, reason in allow.items():
        if name not in final:
            final.append(name)
        if ledger is not None:
            ledger.steps.append(
                EliminationStep(0, name, [], float("nan"), float("nan"), [],
                                float("nan"), float("nan"), float("nan"),
                                "override", note=f"allowlist: {reason}")
            )
    return final
