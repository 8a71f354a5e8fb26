import math

import numpy as np
import pytest

import resilience


def test_pv_perpetuity():
    assert resilience.pv(0.05, 1.0, 0.0, [5.0, 5.0, 5.0]) == pytest.approx(100.0, abs=1e-10)


def test_implied_dr_round_trip():
    status, r = resilience.implied_dr(100.0, 1.0, 0.0, [5.0, 5.0, 5.0])
    assert status == "Solved"
    assert r == pytest.approx(0.05, abs=1e-10)
    status, r = resilience.implied_dr(10.0, 0.5, 0.02, [-1.0, -1.0, -1.0])
    assert status == "NoRoot"
    assert math.isnan(r)


def test_welch_matches_hand_value():
    t, dof, p = resilience.welch_test([1, 2, 3], [4, 5, 6])
    assert t == pytest.approx(-3.6742346141747673, abs=1e-12)
    assert dof == pytest.approx(4.0, abs=1e-12)
    assert p == pytest.approx(0.021311641128756727, abs=1e-12)


def test_pca_against_oracle():
    rng = np.random.default_rng(7)
    x = rng.normal(size=(200, 4)) @ rng.normal(size=(4, 4))
    res = resilience.pca(x)
    values, _ = resilience.oracle_eigen(np.corrcoef(x, rowvar=False))
    np.testing.assert_allclose(res["eigenvalues"], values, atol=1e-10)
    assert res["explained"].sum() == pytest.approx(1.0, abs=1e-12)


def test_categorization_rules():
    groups = resilience.categorize_kp({"a": 30.0, "b": 72.0, "c": 40.0})
    assert groups == {"a": "High", "b": "Low", "c": "Medium"}
    labels = resilience.categorize_cf([float(v) for v in range(1, 101)])
    assert labels[0] == "High" and labels[-1] == "Low"


def test_mfpca_identities():
    rng = np.random.default_rng(3)
    kp = rng.normal(size=(30, 12))
    fb = rng.normal(size=(30, 12)) + kp
    res = resilience.mfpca(kp, fb, 1)
    assert np.linalg.norm(res["zeta"]) == pytest.approx(1.0, abs=1e-12)
    assert np.var(res["rho"], ddof=1) == pytest.approx(res["nu"][0], rel=1e-10)


def test_errors_are_raised():
    with pytest.raises(resilience.ResilienceError):
        resilience.welch_test([1.0], [2.0, 3.0])
