"""Fixed reference numbers behind the bundled 19-covariate risk model.

Coefficients are log hazard ratios from a reduced Cox model estimated on a
large UK adult cohort (n = 472,830, 4.03% incident T2D over a median 11.2
years of follow-up).  Demographic summaries from the same cohort drive the
synthetic generator preset and the continuous-covariate scaling convention
(see docs/model-artifact.md: coefficients are interpreted per SD under
z-scoring, centers at the cohort medians).
"""

from __future__ import annotations

#: encoded column -> (log HR, 95% CI low, 95% CI high, -log2 p)
COEFFICIENTS: dict[str, tuple[float, float, float, float]] = {
    "ethnicity_asian": (0.844, 0.764, 0.925, 308.259),
    "ethnicity_black": (0.532, 0.436, 0.628, 88.794),
    "diabetes_mother": (0.489, 0.443, 0.535, 313.265),
    "waist_hip_ratio": (0.440, 0.423, 0.458, 500.0),
    "diabetes_siblings": (0.422, 0.372, 0.471, 207.302),
    "bmi": (0.399, 0.386, 0.413, 500.0),
    "diabetes_father": (0.385, 0.334, 0.436, 161.204),
    "cvd_diagnosis": (0.368, 0.330, 0.405, 265.184),
    "cholesterol_meds": (0.285, 0.244, 0.325, 142.329),
    "currently_smoking": (0.278, 0.229, 0.328, 90.997),
    "other_meds": (0.250, 0.212, 0.287, 128.297),
    "age": (0.242, 0.222, 0.262, 409.902),
    "stomach_pain": (0.177, 0.125, 0.228, 35.703),
    "daytime_dozing": (0.176, 0.141, 0.211, 72.542),
    "pack_years": (0.086, 0.074, 0.098, 145.292),
    "breathless_level_ground": (0.031, -0.031, 0.093, 1.634),
    "degree": (-0.217, -0.258, -0.175, 78.980),
    "good_health": (-0.323, -0.360, -0.286, 212.648),
    "alcohol_monthly_plus": (-0.375, -0.413, -0.337, 276.673),
}

#: human-readable survey wording per encoded column (UI / report labels)
LABELS: dict[str, str] = {
    "age": "Age (years)",
    "waist_hip_ratio": "Waist/hip ratio",
    "bmi": "BMI (kg/m²)",
    "ethnicity_asian": "Ethnicity - Asian",
    "ethnicity_black": "Ethnicity - Black",
    "degree": "College/university degree",
    "cvd_diagnosis": "Ever diagnosed heart attack / angina / stroke / high blood pressure",
    "cholesterol_meds": "Medications for cholesterol",
    "other_meds": "Other prescription medications",
    "stomach_pain": "Stomach or abdominal pain in last month",
    "daytime_dozing": "Dozing during the day",
    "breathless_level_ground": "Shortness of breath walking on level ground",
    "diabetes_father": "Diabetes in father",
    "diabetes_mother": "Diabetes in mother",
    "diabetes_siblings": "Diabetes in siblings",
    "alcohol_monthly_plus": "Drinks alcohol once a month or more",
    "currently_smoking": "Currently smoking",
    "pack_years": "Smoking pack-years",
    "good_health": "Good or excellent health (self-reported)",
}

#: continuous covariates: (Q1, median, Q3) in the reference cohort
CONTINUOUS_QUARTILES: dict[str, tuple[float, float, float]] = {
    "age": (50.00, 58.00, 63.00),
    "waist_hip_ratio": (0.80, 0.87, 0.93),
    "bmi": (24.03, 26.57, 29.64),
}

#: pack-years is zero-inflated: median 0, Q3 = 6.5.  Zero fraction and the
#: log-sigma of the positive part are modelling choices (only Q3 is pinned);
#: the positive-part median is solved from Q3 given those.
PACK_YEARS_ZERO_FRACTION = 0.70
PACK_YEARS_Q3 = 6.5
PACK_YEARS_LOG_SIGMA = 1.0

#: binary covariates: prevalence in the reference cohort
BINARY_PREVALENCE: dict[str, float] = {
    "degree": 0.3255,
    "cvd_diagnosis": 0.2780,
    "cholesterol_meds": 0.1413,
    "other_meds": 0.4513,
    "stomach_pain": 0.0864,
    "daytime_dozing": 0.2372,
    "breathless_level_ground": 0.0350,
    "diabetes_father": 0.0843,
    "diabetes_mother": 0.0867,
    "diabetes_siblings": 0.0644,
    "alcohol_monthly_plus": 0.8108,
    "previous_smoker": 0.1049,
    "good_health": 0.7587,
}

ETHNICITY_PREVALENCE: dict[str, float] = {"asian": 0.0200, "black": 0.0149}

#: follow-up (censoring) time quartiles in years
FOLLOWUP_QUARTILES = (10.8, 11.2, 12.3)

COHORT_SIZE = 472_830
OBSERVED_INCIDENCE = 0.0403       # events over full follow-up
MEAN_PREDICTED_10Y = 0.0359       # reference model, mean predicted 10-year risk
MEAN_OBSERVED_10Y = 0.0329        # Kaplan-Meier complement at 10 years
PREDICTION_HORIZON_YEARS = 10.0

#: features a person can plausibly steer through lifestyle change;
#: self-reported health stays non-modifiable by default.
MODIFIABLE_FEATURES = frozenset(
    {
        "bmi",
        "waist_hip_ratio",
        "currently_smoking",
        "pack_years",
        "alcohol_monthly_plus",
        "daytime_dozing",
    }
)

DISCLAIMER = (
    "Statistical risk estimate for screening and education only; "
    "not a diagnosis and not a substitute for clinical advice."
)
