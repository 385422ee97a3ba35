#!/usr/bin/env python3
"""Generate the scripted-profile fixtures consumed by the frontend tests.

Each fixture pairs a request payload with the exact service response bytes
(parsed back to JSON), produced through the same canonical renderers the
HTTP service uses.  The frontend consistency suite replays these to check
that displayed numbers equal service numbers to display precision.
"""

import json
import pathlib
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "tests"))

from conftest import REFERENCE_FIELDS  # noqa: E402
from t2drisk.cohort import Ethnicity  # noqa: E402
from t2drisk.engine import bundled_model  # noqa: E402
from t2drisk.service import (  # noqa: E402
    render_model,
    render_score,
    render_whatif,
    validate_record,
)

OUT = pathlib.Path(__file__).resolve().parents[1] / "frontend" / "tests" / "fixtures"

MODIFIABLE_TWEAKS = [
    {"bmi": -2.5},
    {"waist_hip_ratio": -0.05},
    {"alcohol_monthly_plus": None},  # toggle
    {"daytime_dozing": None},
    {"pack_years": +5.0},
]


def random_payload(rng) -> dict:
    current = bool(rng.random() < 0.25)
    previous = bool(rng.random() < 0.25) and not current
    payload = dict(REFERENCE_FIELDS)
    payload.update(
        age=int(rng.integers(18, 85)),
        waist_hip_ratio=round(float(rng.uniform(0.7, 1.1)), 3),
        bmi=round(float(rng.uniform(18, 42)), 2),
        ethnicity=[e.value for e in Ethnicity][rng.integers(3)],
        degree=bool(rng.random() < 0.33),
        cvd_diagnosis=bool(rng.random() < 0.28),
        cholesterol_meds=bool(rng.random() < 0.14),
        other_meds=bool(rng.random() < 0.45),
        stomach_pain=bool(rng.random() < 0.09),
        daytime_dozing=bool(rng.random() < 0.24),
        breathless_level_ground=bool(rng.random() < 0.04),
        diabetes_father=bool(rng.random() < 0.08),
        diabetes_mother=bool(rng.random() < 0.09),
        diabetes_siblings=bool(rng.random() < 0.06),
        alcohol_monthly_plus=bool(rng.random() < 0.81),
        currently_smoking=current,
        previous_smoker=previous,
        pack_years=round(float(rng.exponential(12)), 1) if (current or previous) else 0.0,
        good_health=bool(rng.random() < 0.76),
    )
    return payload


def pick_modification(payload, rng) -> dict:
    tweak = MODIFIABLE_TWEAKS[rng.integers(len(MODIFIABLE_TWEAKS))]
    mods = {}
    for field, change in tweak.items():
        if field == "pack_years" and not (
            payload["currently_smoking"] or payload["previous_smoker"]
        ):
            return {"bmi": round(max(payload["bmi"] - 2.0, 16.0), 2)}
        if change is None:
            mods[field] = not payload[field]
        elif field == "waist_hip_ratio":
            mods[field] = round(max(payload[field] + change, 0.55), 3)
        elif field == "bmi":
            mods[field] = round(max(payload[field] + change, 16.0), 2)
        else:
            mods[field] = round(payload[field] + change, 1)
    return mods


def main() -> None:
    model = bundled_model()
    rng = np.random.default_rng(50_50)
    profiles = []
    for i in range(50):
        payload = random_payload(rng)
        record = validate_record(payload)
        mods = pick_modification(payload, rng)
        profiles.append(
            {
                "name": f"profile-{i:02d}",
                "request": payload,
                "score_response": json.loads(render_score(model, record)),
                "whatif": {
                    "modifications": mods,
                    "response": json.loads(render_whatif(model, record, mods)),
                },
            }
        )
    OUT.mkdir(parents=True, exist_ok=True)
    target = OUT / "profiles.json"
    target.write_text(json.dumps(profiles, indent=1) + "\n")
    print(f"wrote {target} ({len(profiles)} profiles)")
    model_target = OUT / "model.json"
    model_target.write_text(
        json.dumps(json.loads(render_model(model)), indent=1) + "\n"
    )
    print(f"wrote {model_target}")


if __name__ == "__main__":
    main()
