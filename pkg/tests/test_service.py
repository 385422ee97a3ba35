import json
import math

import pytest
from fastapi.testclient import TestClient

from conftest import REFERENCE_FIELDS
from t2drisk import engine, service


@pytest.fixture(scope="module")
def model():
    return engine.bundled_model()


@pytest.fixture(scope="module")
def client(model):
    return TestClient(service.create_app(model))


def reference_payload(**overrides) -> dict:
    payload = {k: v for k, v in REFERENCE_FIELDS.items()}
    payload["ethnicity"] = payload["ethnicity"].value
    payload.update(overrides)
    return payload


class TestScoreEndpoint:
    def test_reference_subject_risk(self, client, model):
        response = client.post("/v1/score", json=reference_payload())
        assert response.status_code == 200
        body = response.json()
        assert body["total_risk"] == pytest.approx(1 - model.baseline_survival, rel=1e-12)
        assert body["model_version"] == model.version
        assert "disclaimer" in body and body["disclaimer"]

    def test_mother_toggle_hazard_ratio(self, client):
        base = client.post("/v1/score", json=reference_payload()).json()
        toggled = client.post(
            "/v1/score", json=reference_payload(diabetes_mother=True)
        ).json()
        ratio = math.log(1 - toggled["total_risk"]) / math.log(1 - base["total_risk"])
        assert ratio == pytest.approx(math.exp(0.489), rel=1e-12)

    def test_duplicate_request_identical_body(self, client):
        payload = reference_payload(bmi=31.4, daytime_dozing=True)
        first = client.post("/v1/score", json=payload)
        second = client.post("/v1/score", json=payload)
        assert first.content == second.content

    def test_byte_identical_to_library_render(self, client, model):
        from t2drisk.service import render_score, validate_record

        payload = reference_payload(age=63, cvd_diagnosis=True)
        response = client.post("/v1/score", json=payload)
        assert response.content == render_score(model, validate_record(payload))

    def test_unknown_field_rejected_400(self, client):
        response = client.post("/v1/score", json=reference_payload(sex="female"))
        assert response.status_code == 400
        assert any(e["field"] == "sex" for e in response.json()["errors"])

    def test_missing_field_rejected_400_with_name(self, client):
        payload = reference_payload()
        del payload["bmi"]
        response = client.post("/v1/score", json=payload)
        assert response.status_code == 400
        assert any(e["field"] == "bmi" for e in response.json()["errors"])

    def test_type_error_rejected_400(self, client):
        response = client.post("/v1/score", json=reference_payload(degree="yes"))
        assert response.status_code == 400

    def test_out_of_range_rejected_422(self, client):
        response = client.post("/v1/score", json=reference_payload(bmi=-2.0))
        assert response.status_code == 422
        assert any(e["field"] == "bmi" for e in response.json()["errors"])

    def test_never_smoker_pack_years_rejected_422(self, client):
        response = client.post("/v1/score", json=reference_payload(pack_years=9.0))
        assert response.status_code == 422

    def test_invalid_json_rejected_400(self, client):
        response = client.post(
            "/v1/score", content=b"{broken", headers={"content-type": "application/json"}
        )
        assert response.status_code == 400

    def test_wrong_content_type_rejected(self, client):
        response = client.post(
            "/v1/score", content=b"a,b", headers={"content-type": "text/csv"}
        )
        assert response.status_code == 415


class TestWhatIfEndpoint:
    def test_empty_modifications_zero_delta(self, client):
        response = client.post(
            "/v1/whatif", json={"base": reference_payload(), "modifications": {}}
        )
        assert response.status_code == 200
        assert response.json()["delta"] == 0.0

    def test_alcohol_toggle_published_shift(self, client):
        base = reference_payload(alcohol_monthly_plus=True)
        response = client.post(
            "/v1/whatif",
            json={"base": base, "modifications": {"alcohol_monthly_plus": False}},
        )
        body = response.json()
        shift = body["after"]["linear_predictor"] - body["before"]["linear_predictor"]
        assert shift == pytest.approx(0.375, abs=1e-12)

    def test_combined_deltas_add_in_lp(self, client):
        base = reference_payload(currently_smoking=True, pack_years=15.0)

        def lp_shift(mods):
            body = client.post(
                "/v1/whatif", json={"base": base, "modifications": mods}
            ).json()
            return body["after"]["linear_predictor"] - body["before"]["linear_predictor"]

        combined = lp_shift(
            {"bmi": 30.0, "currently_smoking": False, "previous_smoker": True}
        )
        parts = lp_shift({"bmi": 30.0}) + lp_shift(
            {"currently_smoking": False, "previous_smoker": True}
        )
        assert combined == pytest.approx(parts, abs=1e-12)

    def test_non_modifiable_rejected_409(self, client):
        response = client.post(
            "/v1/whatif",
            json={"base": reference_payload(), "modifications": {"age": 70}},
        )
        assert response.status_code == 409

    def test_byte_identical_to_library_render(self, client, model):
        from t2drisk.service import render_whatif, validate_record

        base = reference_payload(bmi=33.0)
        mods = {"bmi": 28.0}
        response = client.post("/v1/whatif", json={"base": base, "modifications": mods})
        assert response.content == render_whatif(model, validate_record(base), mods)


class TestModelEndpoint:
    def test_covariates_served_verbatim(self, client):
        body = client.get("/v1/model").json()
        assert len(body["covariates"]) == 19
        by_name = {c["name"]: c for c in body["covariates"]}
        assert by_name["ethnicity_asian"]["coefficient"] == 0.844
        assert by_name["alcohol_monthly_plus"]["coefficient"] == -0.375
        assert all("ci_low" in c and "ci_high" in c for c in body["covariates"])

    def test_etag_stable_across_app_instances(self, model):
        first = TestClient(service.create_app(model)).get("/v1/model")
        second = TestClient(service.create_app(model)).get("/v1/model")
        assert first.headers["etag"] == second.headers["etag"]
        assert first.content == second.content

    def test_health_reports_model_version(self, client, model):
        body = client.get("/v1/health").json()
        assert body == {"status": "ok", "model_version": model.version}
