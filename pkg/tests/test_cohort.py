import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_record, random_records
from t2drisk.cohort import (
    ENCODED_COLUMNS,
    EncodedCohort,
    Ethnicity,
    Outcome,
    SubjectRecord,
    decode,
    encode,
    ingest_csv,
    stratified_split,
    write_cohort_csv,
)
from t2drisk.errors import CohortError

# frozen from an independent spreadsheet-style oracle (statistics.mean/stdev)
BMI_ORACLE_MEAN = 26.5459
BMI_ORACLE_SD = 3.764458214200902


CSV_HEADER = (
    "age,waist_hip_ratio,bmi,ethnicity,degree,cvd_diagnosis,cholesterol_meds,"
    "other_meds,stomach_pain,daytime_dozing,breathless_level_ground,"
    "diabetes_father,diabetes_mother,diabetes_siblings,alcohol_monthly_plus,"
    "currently_smoking,previous_smoker,pack_years,good_health"
)

ROW = "58,0.87,26.57,white_or_other,0,0,0,0,0,0,0,0,0,0,1,0,0,0,1"


def write_lines(path, lines):
    path.write_text("\n".join(lines) + "\n")


class TestRecordInvariants:
    def test_valid_record(self):
        make_record()

    @pytest.mark.parametrize(
        "overrides",
        [
            {"age": 17},
            {"bmi": 0.0},
            {"waist_hip_ratio": -1.0},
            {"pack_years": -0.5},
            {"pack_years": 3.0},  # never smoked
        ],
    )
    def test_invalid_records(self, overrides):
        with pytest.raises(CohortError):
            make_record(**overrides)

    def test_pack_years_allowed_for_smokers(self):
        make_record(currently_smoking=True, pack_years=12.0)
        make_record(previous_smoker=True, pack_years=4.0)

    def test_outcome_time_positive(self):
        with pytest.raises(CohortError):
            Outcome(0.0, True)


class TestIngest:
    def test_well_formed_three_rows(self, tmp_path):
        path = tmp_path / "c.csv"
        write_lines(path, [CSV_HEADER + ",time,event", ROW + ",5.0,1"] * 1 + [ROW + ",8.0,0", ROW + ",2.5,1"])
        result = ingest_csv(str(path))
        assert len(result.records) == 3
        assert result.n_excluded == 0

    def test_missing_bmi_drops_row(self, tmp_path):
        path = tmp_path / "c.csv"
        bad = ROW.replace("0.87,26.57", "0.87,")
        write_lines(path, [CSV_HEADER + ",time,event", ROW + ",5.0,1", bad + ",8.0,0", ROW + ",2.5,1"])
        result = ingest_csv(str(path))
        assert len(result.records) == 2
        assert result.n_excluded == 1
        assert result.exclusions == {"bmi": 1}

    def test_event_after_study_end_censors_at_study_end(self, tmp_path):
        path = tmp_path / "c.csv"
        write_lines(
            path,
            [
                CSV_HEADER + ",enrolled,diagnosed,followup_until",
                ROW + ",2010-09-30,2021-06-01,",
                ROW + ",2010-09-30,2015-09-29,",
            ],
        )
        result = ingest_csv(str(path))
        assert len(result.records) == 2
        late, early = result.outcomes
        assert not late.event
        assert late.time == pytest.approx(10.0, abs=0.01)  # censored 2020-09-30
        assert early.event and early.time == pytest.approx(5.0, abs=0.01)

    def test_malformed_value_names_row_and_column(self, tmp_path):
        path = tmp_path / "c.csv"
        write_lines(path, [CSV_HEADER + ",time,event", ROW.replace("26.57", "abc") + ",5.0,1"])
        with pytest.raises(CohortError, match="row 2.*'bmi'"):
            ingest_csv(str(path))

    def test_unknown_ethnicity_token(self, tmp_path):
        path = tmp_path / "c.csv"
        write_lines(path, [CSV_HEADER + ",time,event", ROW.replace("white_or_other", "martian") + ",5.0,1"])
        with pytest.raises(CohortError, match="ethnicity"):
            ingest_csv(str(path))

    def test_round_trip_write_then_ingest(self, tmp_path):
        records, outcomes = random_records(25, seed=4)
        path = tmp_path / "c.csv"
        write_cohort_csv(str(path), records, outcomes)
        result = ingest_csv(str(path))
        assert result.records == records
        assert [o.time for o in result.outcomes] == [o.time for o in outcomes]


class TestEncode:
    def test_ethnicity_indicators(self):
        records = [
            make_record(ethnicity=Ethnicity.ASIAN),
            make_record(bmi=30.0, age=44, waist_hip_ratio=0.8,
                        currently_smoking=True, pack_years=5.0),
        ]
        cohort = encode(records, [Outcome(1.0, True), Outcome(2.0, False)])
        assert cohort.column("ethnicity_asian")[0] == 1.0
        assert cohort.column("ethnicity_black")[0] == 0.0
        assert cohort.column("ethnicity_asian")[1] == 0.0
        assert cohort.column("ethnicity_black")[1] == 0.0

    def test_column_count_is_19(self):
        records, outcomes = random_records(10, seed=1)
        cohort = encode(records, outcomes)
        assert cohort.feature_names == ENCODED_COLUMNS
        assert cohort.p == 19

    def test_bmi_standardization_matches_oracle(self, tmp_path):
        import json, pathlib

        values = json.loads(
            (pathlib.Path(__file__).parent / "data" / "bmi_values.json").read_text()
        )
        records = [
            make_record(
                bmi=v,
                age=20 + i % 50,
                waist_hip_ratio=0.7 + 0.003 * i,
                currently_smoking=i % 3 == 0,
                pack_years=float(i % 7) if i % 3 == 0 else 0.0,
            )
            for i, v in enumerate(values)
        ]
        outcomes = [Outcome(1.0, i == 0) for i in range(len(values))]
        cohort = encode(records, outcomes)
        center, scale = cohort.standardization["bmi"]
        assert center == pytest.approx(BMI_ORACLE_MEAN, abs=1e-9)
        assert scale == pytest.approx(BMI_ORACLE_SD, abs=1e-9)
        col = cohort.column("bmi")
        assert abs(col.mean()) < 1e-9
        assert np.std(col, ddof=1) == pytest.approx(1.0, abs=1e-12)

    def test_zero_variance_column_rejected(self):
        records = [make_record(), make_record()]  # identical ages etc.
        with pytest.raises(CohortError, match="zero-variance"):
            encode(records, [Outcome(1.0, True), Outcome(2.0, False)])

    def test_empty_record_list_rejected(self):
        with pytest.raises(CohortError):
            encode([])

    def test_decode_recovers_indicator_columns(self):
        records, outcomes = random_records(40, seed=7)
        cohort = encode(records, outcomes)
        again = encode(decode(cohort), outcomes)
        binary = [n for n in cohort.feature_names if n not in cohort.standardization]
        for name in binary:
            np.testing.assert_array_equal(again.column(name), cohort.column(name))
        for r1, r2 in zip(records, decode(cohort)):
            assert r1.ethnicity == r2.ethnicity
            assert r1.age == r2.age


class TestStratifiedSplit:
    def make_cohort(self, n, events, seed=0):
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((n, 3))
        e = np.zeros(n, dtype=bool)
        e[:events] = True
        t = rng.uniform(0.5, 12.0, n)
        return EncodedCohort.from_arrays(
            ["a", "b", "c"], X, t, e, continuous=["a"]
        )

    def test_exact_stratum_arithmetic(self):
        cohort = self.make_cohort(1000, 40)
        train, test = stratified_split(cohort, 0.25, seed=3)
        assert int(test.events.sum()) == 10
        assert int((~test.events).sum()) == 240
        assert train.n + test.n == 1000

    def test_deterministic(self):
        cohort = self.make_cohort(300, 30)
        a = stratified_split(cohort, 0.25, seed=5)
        b = stratified_split(cohort, 0.25, seed=5)
        np.testing.assert_array_equal(a[1].times, b[1].times)
        np.testing.assert_array_equal(a[0].matrix, b[0].matrix)

    @given(seed=st.integers(0, 10_000), fraction=st.floats(0.1, 0.9))
    def test_partition_property(self, seed, fraction):
        cohort = self.make_cohort(97, 13, seed=1)
        train, test = stratified_split(cohort, fraction, seed=seed)
        assert train.n + test.n == cohort.n
        all_times = np.sort(np.concatenate([train.times, test.times]))
        np.testing.assert_array_equal(all_times, np.sort(cohort.times))

    def test_prevalence_gap_small_at_10k(self):
        cohort = self.make_cohort(10_000, 400)
        train, test = stratified_split(cohort, 0.25, seed=11)
        gap = abs(train.events.mean() - test.events.mean())
        assert gap < 0.001  # < 0.1 percentage points

    def test_small_stratum_rejected(self):
        cohort = self.make_cohort(50, 1)
        with pytest.raises(CohortError, match="stratum"):
            stratified_split(cohort, 0.25, seed=0)

    def test_train_restandardized(self):
        cohort = self.make_cohort(400, 60)
        train, test = stratified_split(cohort, 0.25, seed=2)
        assert abs(train.column("a").mean()) < 1e-9
        assert train.standardization == test.standardization
