import dataclasses
import json
import math

import numpy as np
import pytest

from conftest import make_record
from t2drisk import engine
from t2drisk.cohort import ENCODED_COLUMNS, Ethnicity
from t2drisk.errors import CohortError, ConfigError, NumericError
from t2drisk.reference_data import COEFFICIENTS

PUBLISHED_SPOT_CHECKS = {
    "ethnicity_asian": 0.844,
    "diabetes_mother": 0.489,
    "alcohol_monthly_plus": -0.375,
    "bmi": 0.399,
    "currently_smoking": 0.278,
}


@pytest.fixture(scope="module")
def model():
    return engine.bundled_model()


class TestArtifact:
    def test_all_19_coefficients_to_three_decimals(self, model):
        assert len(model.covariates) == 19
        for covariate in model.covariates:
            expected = COEFFICIENTS[covariate.name][0]
            assert round(covariate.coefficient, 3) == round(expected, 3)

    def test_spot_checks(self, model):
        for name, value in PUBLISHED_SPOT_CHECKS.items():
            assert model.covariate(name).coefficient == value

    def test_confidence_intervals_bracket(self, model):
        for covariate in model.covariates:
            assert covariate.ci_low <= covariate.coefficient <= covariate.ci_high

    def test_baseline_survival_in_unit_interval(self, model):
        assert 0.0 < model.baseline_survival < 1.0

    def test_regeneration_reproduces_bundled_artifact(self, model):
        rebuilt = engine.build_reference_model()
        assert engine.model_to_document(rebuilt) == engine.model_to_document(model)

    def test_artifact_round_trip(self, model, tmp_path):
        path = tmp_path / "artifact.json"
        engine.save_artifact(model, str(path))
        loaded = engine.load_artifact(str(path))
        assert engine.model_to_document(loaded) == engine.model_to_document(model)

    def test_malformed_artifact_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{oops")
        with pytest.raises(ConfigError, match="malformed"):
            engine.load_artifact(str(path))
        path.write_text(json.dumps({"format": "other"}))
        with pytest.raises(ConfigError):
            engine.load_artifact(str(path))


class TestScore:
    def test_reference_subject(self, model, reference_record):
        breakdown = engine.score(model, reference_record)
        assert breakdown.linear_predictor == pytest.approx(0.0, abs=1e-12)
        assert breakdown.total_risk == pytest.approx(
            1.0 - model.baseline_survival, rel=1e-12
        )

    def test_diabetes_mother_hazard_ratio(self, model, reference_record):
        base = engine.score(model, reference_record)
        toggled = engine.score(
            model, dataclasses.replace(reference_record, diabetes_mother=True)
        )
        ratio = math.log(1 - toggled.total_risk) / math.log(1 - base.total_risk)
        assert ratio == pytest.approx(math.exp(0.489), rel=1e-12)

    def test_contributions_sum_to_linear_predictor(self, model):
        rng = np.random.default_rng(3)
        for _ in range(50):
            record = _random_record(rng)
            breakdown = engine.score(model, record)
            total = sum(c.contribution for c in breakdown.contributions)
            assert abs(total - breakdown.linear_predictor) < 1e-12

    def test_score_is_pure(self, model):
        record = _random_record(np.random.default_rng(4))
        assert engine.score(model, record) == engine.score(model, record)

    def test_mean_predicted_risk_near_target(self, model):
        from t2drisk import synthetic

        records = synthetic.sample_features(synthetic.reference_preset(n=30_000, seed=99))
        risks = np.array([engine.score(model, r).total_risk for r in records])
        assert risks.mean() == pytest.approx(0.0359, abs=0.003)

    def test_missing_field_listed(self, model):
        values = {name: 0.0 for name in ENCODED_COLUMNS if name != "bmi"}
        with pytest.raises(CohortError, match="bmi"):
            engine.score(model, values)

    def test_ranking_invariance(self, model):
        rng = np.random.default_rng(5)
        records = [_random_record(rng) for _ in range(100)]
        breakdowns = [engine.score(model, r) for r in records]
        lps = np.array([b.linear_predictor for b in breakdowns])
        risks = np.array([b.total_risk for b in breakdowns])
        order = np.argsort(lps)
        assert np.all(np.diff(risks[order]) >= 0)


class TestMonotonicity:
    def test_positive_coefficient_features_never_decrease_risk(self, model):
        rng = np.random.default_rng(6)
        for _ in range(200):
            record = _random_record(rng)
            base = engine.score(model, record).total_risk
            bumped = engine.score(
                model, dataclasses.replace(record, bmi=record.bmi + rng.uniform(0.5, 5))
            ).total_risk
            assert bumped >= base  # bmi coefficient is positive
            healthier = engine.score(
                model, dataclasses.replace(record, good_health=True)
            ).total_risk
            if not record.good_health:
                assert healthier <= base  # good_health coefficient is negative


class TestWhatIf:
    def test_empty_modifications_zero_delta(self, model, reference_record):
        result = engine.whatif(model, reference_record, {})
        assert result.delta == 0.0

    def test_alcohol_toggle_changes_lp_by_published_value(self, model, reference_record):
        record = dataclasses.replace(reference_record, alcohol_monthly_plus=True)
        result = engine.whatif(model, record, {"alcohol_monthly_plus": False})
        assert (
            result.after.linear_predictor - result.before.linear_predictor
            == pytest.approx(0.375, abs=1e-12)
        )

    def test_bmi_one_sd_changes_lp_by_coefficient(self, model, reference_record):
        scale = model.covariate("bmi").scale
        result = engine.whatif(
            model, reference_record, {"bmi": reference_record.bmi - scale}
        )
        assert (
            result.after.linear_predictor - result.before.linear_predictor
            == pytest.approx(-0.399, abs=1e-12)
        )

    def test_combined_modifications_add_in_lp(self, model, reference_record):
        record = dataclasses.replace(
            reference_record, currently_smoking=True, pack_years=20.0
        )
        both = engine.whatif(model, record, {"bmi": 30.0, "currently_smoking": False,
                                             "previous_smoker": True})
        bmi_only = engine.whatif(model, record, {"bmi": 30.0})
        smoke_only = engine.whatif(
            model, record, {"currently_smoking": False, "previous_smoker": True}
        )
        combined = both.after.linear_predictor - both.before.linear_predictor
        parts = (
            bmi_only.after.linear_predictor - bmi_only.before.linear_predictor
        ) + (smoke_only.after.linear_predictor - smoke_only.before.linear_predictor)
        assert combined == pytest.approx(parts, abs=1e-12)

    def test_non_modifiable_rejected_without_override(self, model, reference_record):
        with pytest.raises(ConfigError, match="non-modifiable"):
            engine.whatif(model, reference_record, {"diabetes_mother": True})
        result = engine.whatif(
            model, reference_record, {"diabetes_mother": True}, allow_non_modifiable=True
        )
        assert result.delta > 0

    def test_unknown_field_rejected(self, model, reference_record):
        with pytest.raises(CohortError, match="unknown"):
            engine.whatif(model, reference_record, {"zzz": 1})

    def test_monotonicity_over_random_probes(self, model):
        rng = np.random.default_rng(8)
        signs = {c.name: np.sign(c.coefficient) for c in model.covariates}
        for _ in range(500):
            record = _random_record(rng)
            base = engine.score(model, record).total_risk
            name = ("bmi", "waist_hip_ratio", "pack_years", "daytime_dozing",
                    "alcohol_monthly_plus")[rng.integers(5)]
            if name in ("bmi", "waist_hip_ratio"):
                mods = {name: getattr(record, name) + 1.0}
                direction = signs[name]
            elif name == "pack_years":
                if not (record.currently_smoking or record.previous_smoker):
                    continue
                mods = {name: record.pack_years + 5.0}
                direction = signs[name]
            else:
                current = getattr(record, name)
                mods = {name: not current}
                direction = signs[name] * (1 if not current else -1)
            result = engine.whatif(model, record, mods)
            assert np.sign(result.delta) in (0.0, direction)


class TestCalibration:
    def test_fixed_point(self, model):
        lp = np.random.default_rng(9).standard_normal(5_000) * 0.7
        s0 = engine.calibrate_baseline(lp, 0.04)
        achieved = float(np.mean(1.0 - s0 ** np.exp(lp)))
        assert achieved == pytest.approx(0.04, abs=1e-10)
        again = engine.calibrate_baseline(lp, achieved)
        assert again == pytest.approx(s0, abs=1e-10)

    def test_unattainable_target_rejected(self):
        lp = np.zeros(100)
        with pytest.raises(NumericError, match="bracketed"):
            engine.calibrate_baseline(lp, 1.0 - 1e-12)


def _random_record(rng):
    current = bool(rng.random() < 0.2)
    previous = bool(rng.random() < 0.2) and not current
    return make_record(
        age=int(rng.integers(18, 90)),
        waist_hip_ratio=float(rng.uniform(0.65, 1.15)),
        bmi=float(rng.uniform(17, 44)),
        ethnicity=[Ethnicity.WHITE_OR_OTHER, Ethnicity.ASIAN, Ethnicity.BLACK][rng.integers(3)],
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
        pack_years=float(rng.exponential(12)) if (current or previous) else 0.0,
        good_health=bool(rng.random() < 0.75),
    )
