import math

import numpy as np
import pytest

spikelab = pytest.importorskip("spikelab")


def test_hermite_eval():
    assert spikelab.hermite_eval(0, 3.7) == 1.0
    assert spikelab.hermite_eval(2, 2.0) == pytest.approx(3.0)
    assert spikelab.hermite_eval(3, 1.0) == pytest.approx(-2.0)


def test_xi_rows():
    assert spikelab.monomial_to_hermite(2) == pytest.approx([1.0, 0.0, 1.0])
    assert spikelab.monomial_to_hermite(3) == pytest.approx([0.0, 3.0, 0.0, 1.0])


def test_activation_coeffs():
    c = spikelab.activation_coeffs("relu_shifted", 4)
    assert c[0] == pytest.approx(0.0, abs=1e-12)
    assert c[1] == pytest.approx(0.5)
    assert c[2] == pytest.approx(1.0 / (2.0 * math.sqrt(2.0 * math.pi)))


def test_fixed_point_and_theory():
    fp = spikelab.solve_fixed_point(0.3, 0.6, 0.01, 0.5, 0.3014)
    assert fp["m1"] > 0 and fp["m2"] > 0
    assert max(abs(r) for r in fp["residual"]) < 1e-10
    assert fp["m1_prime"] <= 0 and fp["m2_prime"] <= 0

    tp = spikelab.theory_point(
        {
            "n": 1000,
            "d": 300,
            "N": 500,
            "alpha": 0.29,
            "lambda": 0.01,
            "sigma_eps": math.sqrt(0.5),
            "teacher": "hermite_combo:0,1,1",
        }
    )
    assert tp["alignment"] == pytest.approx(0.69843, abs=1e-4)
    assert tp["delta"][2] >= tp["delta"][1] >= 0.0
    assert tp["lambda_gap"][2] >= tp["lambda_gap"][1] >= 0.0


def test_predicted_ell():
    assert spikelab.predicted_ell(0.29) == 2
    assert spikelab.predicted_ell(0.2) == 1
    with pytest.raises(Exception):
        spikelab.predicted_ell(0.25)


def test_principal_angle_distance():
    u = np.zeros((5, 1))
    u[0, 0] = 1.0
    v = np.zeros((5, 1))
    v[2, 0] = 1.0
    assert spikelab.principal_angle_distance(u, u) == pytest.approx(0.0, abs=1e-12)
    assert spikelab.principal_angle_distance(u, v) == pytest.approx(math.sqrt(2.0))


def test_singular_values_and_operator_norm():
    rng = np.random.default_rng(0)
    m = rng.standard_normal((12, 7))
    sv = spikelab.singular_values(m, False)
    ref = np.linalg.svd(m, compute_uv=False)
    assert np.allclose(np.asarray(sv).ravel(), ref, atol=1e-10)
    assert spikelab.operator_norm(m) == pytest.approx(ref[0], rel=1e-6)


def test_run_single_smoke():
    cfg = {
        "n": 120,
        "d": 30,
        "N": 60,
        "alpha": 0.2,
        "lambda": 0.05,
        "sigma_eps": 0.5,
        "teacher": "hermite_combo:0,1",
        "seed": 3,
    }
    rec = spikelab.run_single(cfg, n_test=2000)
    assert rec["ok"]
    measured = rec["measured"]
    assert measured["train_loss_f0"]["value"] > 0
    assert "estimator" in measured["train_gap"]
    rec2 = spikelab.run_single(cfg, n_test=2000)
    assert rec2["measured"]["train_gap"]["value"] == measured["train_gap"]["value"]
