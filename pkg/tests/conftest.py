import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite",
    deadline=None,
    derandomize=True,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

from t2drisk.cohort import Ethnicity, Outcome, SubjectRecord

REFERENCE_FIELDS = dict(
    age=58,
    waist_hip_ratio=0.87,
    bmi=26.57,
    ethnicity=Ethnicity.WHITE_OR_OTHER,
    degree=False,
    cvd_diagnosis=False,
    cholesterol_meds=False,
    other_meds=False,
    stomach_pain=False,
    daytime_dozing=False,
    breathless_level_ground=False,
    diabetes_father=False,
    diabetes_mother=False,
    diabetes_siblings=False,
    alcohol_monthly_plus=False,
    currently_smoking=False,
    previous_smoker=False,
    pack_years=0.0,
    good_health=False,
)


def make_record(**overrides) -> SubjectRecord:
    return SubjectRecord(**{**REFERENCE_FIELDS, **overrides})


@pytest.fixture
def reference_record() -> SubjectRecord:
    return make_record()


def random_records(n: int, seed: int) -> tuple[list[SubjectRecord], list[Outcome]]:
    """Valid random records plus outcomes, for encode/split tests."""
    rng = np.random.default_rng(seed)
    records, outcomes = [], []
    ethnicities = [Ethnicity.WHITE_OR_OTHER, Ethnicity.ASIAN, Ethnicity.BLACK]
    for _ in range(n):
        current = bool(rng.random() < 0.2)
        previous = bool(rng.random() < 0.2) and not current
        pack = float(rng.exponential(10)) if (current or previous) else 0.0
        records.append(
            make_record(
                age=int(rng.integers(18, 90)),
                waist_hip_ratio=float(rng.uniform(0.6, 1.2)),
                bmi=float(rng.uniform(16, 45)),
                ethnicity=ethnicities[rng.integers(3)],
                degree=bool(rng.random() < 0.3),
                cvd_diagnosis=bool(rng.random() < 0.3),
                cholesterol_meds=bool(rng.random() < 0.15),
                other_meds=bool(rng.random() < 0.45),
                stomach_pain=bool(rng.random() < 0.1),
                daytime_dozing=bool(rng.random() < 0.25),
                breathless_level_ground=bool(rng.random() < 0.05),
                diabetes_father=bool(rng.random() < 0.1),
                diabetes_mother=bool(rng.random() < 0.1),
                diabetes_siblings=bool(rng.random() < 0.07),
                alcohol_monthly_plus=bool(rng.random() < 0.8),
                currently_smoking=current,
                previous_smoker=previous,
                pack_years=pack,
                good_health=bool(rng.random() < 0.75),
            )
        )
        outcomes.append(
            Outcome(float(rng.uniform(0.1, 14.0)), bool(rng.random() < 0.3))
        )
    return records, outcomes
