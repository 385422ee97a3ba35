#!/usr/bin/env python3
"""Backward elimination with the 2-fold one-sd rule on a signal/noise mix.

Half the features carry real effects, half are pure noise; the procedure
should discard the noise and keep the signal, and its ledger records every
candidate evaluation for replay.
"""

import numpy as np

from t2drisk import synthetic
from t2drisk.cohort import EncodedCohort
from t2drisk.selection import backward_eliminate, clinical_review_filter

rng = np.random.default_rng(5)
n = 12_000
names, columns, betas = [], [], []
for i in range(4):
    names.append(f"signal_{i}")
    columns.append(rng.standard_normal(n))
    betas.append(0.45 if i % 2 == 0 else -0.45)
for i in range(4):
    names.append(f"noise_{i}")
    columns.append(rng.standard_normal(n))
    betas.append(0.0)
X = np.column_stack(columns)
times, events = synthetic.simulate_survival(
    X @ np.array(betas), 0.02, rng.uniform(5, 15, n), rng
)
cohort = EncodedCohort.from_arrays(names, X, times, events, continuous=names)
print(f"cohort: {n} rows, {events.mean():.1%} events, features {names}")

kept, ledger = backward_eliminate(cohort, folds=2, seed=5)
print(f"\nkept after elimination: {kept}")
removed = [s for s in ledger.steps if s.decision == "removed"]
for step in removed:
    print(f"  pass {step.pass_index}: removed {step.feature!r} "
          f"(degradation {step.degradation:+.4f} <= sd {step.baseline_sd:.4f})")

final = clinical_review_filter(
    kept, names, allowlist={"noise_0": "kept for comparability with older scores"},
    ledger=ledger,
)
print(f"\nafter clinical review overrides: {final}")
print(f"ledger holds {len(ledger.steps)} steps; JSONL replayable via EliminationLedger")
