#!/usr/bin/env python3
"""Score a person with the bundled 19-covariate model and explore what-ifs.

The engine is a fixed artifact: published log hazard ratios, a documented
z-scoring convention for the continuous inputs, and a 10-year baseline
survival calibrated so the reference-cohort mean predicted risk is 3.59%.
"""

from t2drisk.cohort import Ethnicity, SubjectRecord
from t2drisk.engine import bundled_model, score, whatif
from t2drisk.reference_data import LABELS

model = bundled_model()
print(f"model {model.version}: S0(10y) = {model.baseline_survival:.4f}, "
      f"reference-subject risk = {1 - model.baseline_survival:.2%}\n")

person = SubjectRecord(
    age=61, waist_hip_ratio=0.96, bmi=31.2, ethnicity=Ethnicity.WHITE_OR_OTHER,
    degree=False, cvd_diagnosis=True, cholesterol_meds=True, other_meds=True,
    stomach_pain=False, daytime_dozing=True, breathless_level_ground=False,
    diabetes_father=False, diabetes_mother=True, diabetes_siblings=False,
    alcohol_monthly_plus=False, currently_smoking=True, previous_smoker=False,
    pack_years=22.0, good_health=False,
)
breakdown = score(model, person)
print(f"10-year T2D risk: {breakdown.total_risk:.1%} "
      f"(linear predictor {breakdown.linear_predictor:+.3f})")
print(f"{'driver':55s} {'contribution':>12s}")
for c in sorted(breakdown.contributions, key=lambda c: -abs(c.contribution))[:8]:
    print(f"{LABELS[c.feature]:55s} {c.contribution:+12.3f}")

result = whatif(model, person, {
    "currently_smoking": False, "previous_smoker": True,
    "bmi": 27.0, "daytime_dozing": False,
})
print(f"\nwhat if they quit smoking, reach BMI 27, and stop dozing off?")
print(f"  {result.before.total_risk:.1%} -> {result.after.total_risk:.1%} "
      f"({result.delta:+.1%})")
print(f"\n{model.disclaimer}")
