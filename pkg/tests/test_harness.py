import json

import numpy as np
import pytest

from polytv.errors import InputError, NotApplicableError
from polytv.harness import campaigns, report
from polytv.harness.instances import InstanceSpec, generate_instance
from polytv.quadpoly import l2_distance, symmetric_eigen


def test_instance_examples():
    f, g = generate_instance(InstanceSpec(5, 3, perturbation_eps=0.0, seed=1))
    assert f is g
    a = generate_instance(InstanceSpec(5, 3, perturbation_eps=0.01, seed=9))
    b = generate_instance(InstanceSpec(5, 3, perturbation_eps=0.01, seed=9))
    np.testing.assert_array_equal(a[0].quad, b[0].quad)
    np.testing.assert_array_equal(a[1].lin, b[1].lin)


@pytest.mark.parametrize("law", ["uniform", "loguniform"])
def test_instance_distance_and_rank(law):
    for seed in range(20):
        spec = InstanceSpec(6, 4, law, 0.037, seed)
        f, g = generate_instance(spec)
        assert l2_distance(f, g) == pytest.approx(0.037, abs=1e-9)
        spec_g = symmetric_eigen(g.quad)
        assert spec_g.rank == 4
        assert np.sort(np.abs(spec_g.eigenvalues))[-4] >= 1e-3 * (1 - 1e-9)


def test_instance_validation():
    with pytest.raises(InputError):
        InstanceSpec(3, 4)
    with pytest.raises(InputError):
        InstanceSpec(3, 3, "cauchy")
    with pytest.raises(InputError):
        InstanceSpec(3, 3, perturbation_eps=-1.0)


def test_verification_small_campaign():
    rows = campaigns.run_verification(campaigns.VerifyConfig(count=5, seed=3))
    assert len(rows) == 5
    for r in rows:
        assert r["pass"]
        assert r["tv_lower"] <= r["bound80"] <= r["bound160"]
        assert 3 <= r["rank"] <= 6 and r["dim"] <= 8
        assert 1e-3 <= r["eps"] <= 1e-1


def test_verification_parallel_matches_serial():
    cfg = campaigns.VerifyConfig(count=4, seed=11)
    assert campaigns.run_verification(cfg, workers=2) == campaigns.run_verification(cfg)


def test_verification_edge_cases():
    assert campaigns.run_verification(campaigns.VerifyConfig(count=0)) == []
    with pytest.raises(NotApplicableError, match="fewer than required same-sign eigenvalues"):
        campaigns.VerifyConfig(rank=(2, 2))
    with pytest.raises(InputError):
        campaigns.VerifyConfig(rank=(3, 6), dim=(3, 4))


def test_optimality_demo():
    res = campaigns.run_optimality_demo([1e-1, 1e-2, 1e-3])
    assert res.increasing
    assert res.growth >= 1.5
    assert res.contrast_ok and res.passed
    assert len(res.rows) == 6
    single = campaigns.run_optimality_demo([0.05])
    assert single.increasing is None and single.passed
    with pytest.raises(InputError):
        campaigns.run_optimality_demo([0.01, 0.1])


def test_norm_comparison_identity_row():
    eye = np.eye(3)
    row = campaigns.compare_norm_pair(eye, np.zeros(3), eye, np.zeros(3))
    assert row["norm_bound"] == 0.0 and row["gnsu_bound"] == 0.0
    assert row["tv_lower"] == 0.0 and row["kolmogorov"] == 0.0


def test_norm_comparison_small_shift_decay():
    eye = np.eye(3)
    for t in [0.1, 0.01]:
        row = campaigns.compare_norm_pair(eye, np.array([t, 0, 0]), eye, np.zeros(3))
        assert row["root_a"] == pytest.approx(t)
        assert row["a_sq"] == pytest.approx(t * t)
        assert row["root_a"] > row["a_sq"]
        assert row["gnsu_shift"] == "a" and row["pass"]


def test_norm_comparison_traceless_difference():
    sx = np.diag([1.0 + 1e-3, 1.0 - 1e-3, 1.0])
    row = campaigns.compare_norm_pair(sx, np.zeros(3), np.eye(3), np.zeros(3))
    assert row["trace"] == pytest.approx(0.0, abs=1e-15)
    assert row["hs"] < row["nuclear_diff"]


def test_parse_covariance_pairs():
    text = json.dumps([{"sigma_x": [[1, 0], [0, 1]], "sigma_y": [1, 0, 0, 2],
                        "a": [0, 0], "b": [0.1, 0]}], indent=1)
    pairs = campaigns.parse_covariance_pairs(text)
    np.testing.assert_array_equal(pairs[0]["sigma_y"], [[1, 0], [0, 2]])
    bad = '[\n {"sigma_x": [[1, 0], [0, 1]], "sigma_y": [[1, 0], [0, 1]], "a": [0], "b": [0, 0]}\n]'
    with pytest.raises(InputError, match="line 2"):
        campaigns.parse_covariance_pairs(bad)
    ragged = '[\n\n  {"sigma_x": [[1, 0], [0]], "sigma_y": [[1]], "a": [0], "b": [0]}]'
    with pytest.raises(InputError, match="line 3"):
        campaigns.parse_covariance_pairs(ragged)
    with pytest.raises(InputError, match="line 2"):
        campaigns.parse_covariance_pairs('[\n {"sigma_x": [1,, 2]}]')


def test_random_covariance_pairs_shapes():
    pairs = campaigns.random_covariance_pairs(6, 1)
    for i, p in enumerate(pairs):
        assert np.linalg.matrix_rank(p["sigma_x"], tol=1e-8) >= 3
        if i % 3 == 0:
            assert not p["b"].any()


def test_moments_report():
    from polytv.quadpoly import QuadPoly
    row = campaigns.moments_report(QuadPoly.from_quad(np.eye(3)), 200_000, 4)
    assert row["mean"] == 3.0 and row["second_moment"] == 15.0 and row["pass"]


def test_report_formats_agree():
    rows = [{"a": 0.1, "b": None, "c": True, "d": float("inf"), "e": 3}]
    cols = ["a", "b", "c", "d", "e"]
    csv_rows = report.parse_csv(report.render(rows, cols, "csv"))
    payload = json.loads(report.render(rows, cols, "json"))
    assert payload["spec_version"] == 1
    j = payload["rows"][0]
    c = csv_rows[0]
    assert float(c["a"]) == j["a"] == 0.1
    assert c["b"] == "" and j["b"] is None
    assert c["c"] == "true" and j["c"] is True
    assert float(c["d"]) == float(j["d"]) == float("inf")
    with pytest.raises(ValueError):
        report.render(rows, cols, "xml")
