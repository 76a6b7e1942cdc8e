import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sysshock.archimedean import ArchimedeanGenerator as AG
from sysshock.archimedean import Family
from sysshock.calibration import (
    BETA_MAX,
    CalibrationOptions,
    Reparam,
    TauMatrix,
    calibrate,
    objective,
    riskiness_report,
)
from sysshock.dependence import tau_marshall_olkin
from sysshock.montecarlo import SimulationConfig, empirical_tau_matrix, sample_model
from sysshock.shock_model import ModelParams

from .strategies import model_params


def test_tau_matrix_validation():
    with pytest.raises(ValueError):
        TauMatrix([[1.0]])
    with pytest.raises(ValueError):
        TauMatrix([[1, np.nan], [np.nan, 1]])
    with pytest.raises(ValueError):
        TauMatrix(np.eye(3)[:2])
    m = TauMatrix([[1, 0.2, 0.3], [9, 1, 0.4], [9, 9, 1]])
    np.testing.assert_array_equal(m.values, m.values.T)
    np.testing.assert_array_equal(m.upper(), [0.2, 0.3, 0.4])
    assert m.labels == ("E1", "E2", "E3")


@given(model_params())
def test_objective_self_consistency(p):
    assert objective(p, TauMatrix.from_params(p)) == pytest.approx(0.0, abs=1e-12)


def test_objective_single_term():
    p = ModelParams([0.5, 0.5], [1, 0, 0], [AG.independence()] * 2)
    t = tau_marshall_olkin(0.5, 0.5) + 0.1
    assert objective(p, TauMatrix([[1, t], [t, 1]])) == pytest.approx(0.01, abs=1e-15)
    with pytest.raises(ValueError):
        objective(p, TauMatrix(np.eye(3)))


@given(st.sampled_from([Family.CLAYTON, Family.GUMBEL]), st.integers(2, 4), st.data())
def test_reparam_round_trip(family, d, data):
    rep = Reparam(d, family)
    x = np.array([data.draw(st.floats(-6, 6)) for _ in range(rep.size)])
    back = rep.to_unconstrained(*rep.to_constrained(x))
    np.testing.assert_allclose(back, x, atol=1e-10)


@given(st.sampled_from([Family.CLAYTON, Family.GUMBEL]), st.data())
def test_reparam_feasible(family, data):
    rep = Reparam(3, family)
    x = np.array([data.draw(st.floats(-30, 30)) for _ in range(rep.size)])
    alpha, theta, beta = rep.to_constrained(x)
    assert np.all((alpha > 0) & (alpha < 1))
    assert np.all(theta >= 0) and theta.sum() == pytest.approx(1.0)
    lo = 0.0 if family is Family.CLAYTON else 1.0
    assert np.all((beta > lo) & (beta <= BETA_MAX))


def test_round_trip_clayton():
    truth = ModelParams.from_family("clayton", [0.6, 0.4, 0.75], [0.25, 0.3, 0.25, 0.2], [1.5, 4, 2.5])
    target = TauMatrix.from_params(truth)
    res = calibrate(target, "clayton", CalibrationOptions(restarts=6, seed=1))
    assert res.converged
    assert res.objective <= 1e-8
    assert np.max(np.abs(res.fitted_taus.upper() - target.upper())) <= 1e-3
    assert res.objective == pytest.approx(objective(res.params, target), abs=1e-12)
    assert np.all(res.fitted_taus.upper() < 1)


def test_round_trip_gumbel():
    truth = ModelParams.from_family("gumbel", [0.6, 0.4, 0.75], [0.25, 0.3, 0.25, 0.2], [1.5, 4, 2.5])
    target = TauMatrix.from_params(truth)
    res = calibrate(target, "gumbel", CalibrationOptions(restarts=3, seed=1))
    assert res.objective <= 1e-8


def test_deterministic():
    target = TauMatrix([[1, 0.3, 0.4], [0.3, 1, 0.35], [0.4, 0.35, 1]])
    opts = CalibrationOptions(restarts=3, seed=7)
    a, b = calibrate(target, "clayton", opts), calibrate(target, "clayton", opts)
    assert a.objective == b.objective
    np.testing.assert_array_equal(a.params.alpha, b.params.alpha)
    c = calibrate(target, "clayton", CalibrationOptions(restarts=3, seed=7, workers=2))
    np.testing.assert_array_equal(a.params.alpha, c.params.alpha)


def test_independence_target():
    res = calibrate(TauMatrix(np.eye(2)), "clayton", CalibrationOptions(restarts=3))
    assert res.objective <= 1e-8
    assert abs(res.fitted_taus.values[0, 1]) < 1e-4
    assert res.boundary


def test_extreme_target_reported():
    res = calibrate(TauMatrix([[1, 0.999], [0.999, 1]]), "clayton", CalibrationOptions(restarts=3))
    assert (not res.converged) or res.boundary


def test_negative_target_not_fitted():
    res = calibrate(TauMatrix([[1, -0.5], [-0.5, 1]]), "clayton", CalibrationOptions(restarts=2))
    assert res.objective > 0.2
    assert res.fitted_taus.values[0, 1] >= 0


def test_independence_family_rejected():
    with pytest.raises(ValueError):
        calibrate(TauMatrix(np.eye(2)), "independence")


def test_monte_carlo_target_objective():
    truth = ModelParams.from_family("clayton", [0.5, 0.3, 0.7], [0.2, 0.3, 0.4, 0.1], [2, 3, 1.5])
    b = sample_model(truth, SimulationConfig(200_000, seed=31))
    target = TauMatrix(empirical_tau_matrix(b.T))
    assert objective(truth, target) <= 3 * 0.01**2


def test_riskiness_report():
    p = ModelParams.from_family("clayton", [0.5, 0.999999], [0.0, 0.5, 0.5], [2, 2])
    rep = riskiness_report(p)
    assert rep[0]["tau_X0_Xj"] == pytest.approx(0.25)
    assert rep[0]["tau_X0_Tj"] == pytest.approx(0.5 + 0.5 * 0.5 / 3)
    assert rep[1]["tau_X0_Tj"] == pytest.approx(1.0, abs=1e-5)
    q = ModelParams.from_family("clayton", [0.5, 0.5], [0.5, 0.0, 0.5], [2, 2])
    assert riskiness_report(q)[0]["tau_X0_Xj"] == 0.0
    for r in rep:
        assert 0 <= r["tau_X0_Xj"] <= 1 and 0 <= r["tau_X0_Tj"] <= 1
