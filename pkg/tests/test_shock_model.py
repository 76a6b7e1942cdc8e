import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sysshock.archimedean import ArchimedeanGenerator as AG
from sysshock.archimedean import PairCopula
from sysshock.shock_model import (
    ModelParams,
    ValidationError,
    from_intensities,
    joint_survival_T,
    marginal_survival_X,
    pair_survival_copula,
    simultaneous_default_prob,
    survival_copula_T,
    survival_copula_T_clayton,
    systemic_pair_copula,
)

from .strategies import frozen_params, model_params

C1 = AG.clayton(1.0)
IND = AG.independence()


def test_from_intensities_examples():
    p = from_intensities([1, 0, 0], [1, 1], [IND, IND])
    assert p.lambda0 == 1
    np.testing.assert_allclose(p.alpha, [0.5, 0.5])
    np.testing.assert_allclose(p.theta, [1, 0, 0])
    p = from_intensities([0, 1, 1], [2, 2], [IND, IND])
    assert p.lambda0 == 2
    np.testing.assert_allclose(p.theta, [0, 0.5, 0.5])
    np.testing.assert_allclose(p.alpha, [2 / 3, 2 / 3])
    with pytest.raises(ValidationError):
        from_intensities([0, 1, 0.5], [0.5, 1], [IND, IND])
    with pytest.raises(ValidationError):
        from_intensities([0, 0, 0], [1, 1], [IND, IND])


@given(model_params(), st.floats(0.1, 5))
def test_intensity_round_trip(p, scale):
    p = p.with_lambda0(scale)
    q = from_intensities(p.gamma, p.eta, p.gens)
    np.testing.assert_allclose(q.alpha, p.alpha, rtol=1e-12)
    np.testing.assert_allclose(q.theta, p.theta, atol=1e-12)
    assert q.lambda0 == pytest.approx(scale, rel=1e-12)


def test_param_validation():
    with pytest.raises(ValidationError):
        ModelParams([0.5, 0.5], [0.5, 0.5, 0.5], [IND, IND])
    with pytest.raises(ValidationError):
        ModelParams([0.0, 0.5], [1, 0, 0], [IND, IND])
    with pytest.raises(ValidationError):
        ModelParams([0.5, 1.1], [1, 0, 0], [IND, IND])
    with pytest.raises(ValidationError):
        ModelParams([0.5], [1, 0, 0], [IND])
    ModelParams([1.0, 0.5], [1, 0, 0], [IND, IND])  # alpha = 1 is allowed


def test_derived_intensities():
    p = ModelParams([0.5, 0.25], [0.2, 0.3, 0.5], [IND, IND], lambda0=2.0)
    np.testing.assert_allclose(p.lam, [2.0, 6.0])
    np.testing.assert_allclose(p.gamma, [0.4, 0.6, 1.0])
    np.testing.assert_allclose(p.eta, [2.6, 7.0])
    assert p.lam_hat == pytest.approx(10.0)


def test_marginal_x_examples(frozen):
    p = from_intensities([0, 1, 1], [2, 2], [IND, IND])
    assert marginal_survival_X(p, 0, 1.0) == pytest.approx(np.exp(-1))
    assert marginal_survival_X(p, 0, 0.0) == 1.0
    p = from_intensities([0, 1, 1], [2, 2], [C1, C1])
    # The stated approximation 0.2178 does not match its own formula; the
    # formula (1 + e^2 - e)^-1 = 0.17634 is the oracle.
    assert marginal_survival_X(p, 0, 1.0) == pytest.approx(frozen["clayton_margin_x"], rel=1e-12)
    assert frozen["clayton_margin_x"] == pytest.approx(0.176343, abs=1e-6)


@given(model_params(), st.floats(0.0, 4.0))
def test_marginal_x_defining_identity(p, x):
    for j in range(p.d):
        fx = marginal_survival_X(p, j, x)
        lhs = PairCopula(p.gens[j]).cop(p.survival_Y(j + 1, x), fx)
        assert lhs == pytest.approx(p.survival_Z(j, x), rel=1e-10, abs=1e-300)


@given(model_params(), st.floats(0.0, 3.0), st.floats(0.01, 2.0))
def test_marginal_x_decreasing(p, x, dx):
    for j in range(p.d):
        assert marginal_survival_X(p, j, x + dx) <= marginal_survival_X(p, j, x)


def test_joint_survival_examples():
    p = from_intensities([1, 0, 0], [1, 1], [IND, IND])
    assert joint_survival_T(p, [0, 0]) == 1.0
    want = np.exp(-2) * np.exp(-1) * np.exp(-2)
    assert joint_survival_T(p, [1, 2]) == pytest.approx(want, rel=1e-12)
    p = from_intensities([0, 1, 1], [2, 2], [C1, C1])
    assert joint_survival_T(p, [1, 1]) == pytest.approx(np.exp(-4), rel=1e-12)


@given(model_params(), st.floats(0.0, 3.0))
def test_diagonal_identity(p, t):
    assert joint_survival_T(p, np.full(p.d, t)) == pytest.approx(np.exp(-p.lam_hat * t), rel=1e-10)


@given(model_params(), st.data())
def test_sklar_consistency(p, data):
    t = np.array([data.draw(st.floats(0.0, 3.0)) for _ in range(p.d)])
    u = np.array([p.survival_T(j, t[j]) for j in range(p.d)])
    assert survival_copula_T(p, u) == pytest.approx(joint_survival_T(p, t), rel=1e-10, abs=1e-14)


@given(model_params(), st.data())
def test_joint_survival_decreasing(p, data):
    t = np.array([data.draw(st.floats(0.0, 2.0)) for _ in range(p.d)])
    j = data.draw(st.integers(0, p.d - 1))
    t2 = t.copy()
    t2[j] += data.draw(st.floats(0.01, 1.0))
    assert joint_survival_T(p, t2) <= joint_survival_T(p, t) + 1e-15


def test_survival_copula_boundaries():
    p = ModelParams.from_family("gumbel", [0.5, 0.3, 0.7], [0.2, 0.3, 0.4, 0.1], [2, 3, 1.5])
    assert survival_copula_T(p, [1, 1, 1]) == 1.0
    assert survival_copula_T(p, [0.3, 0.0, 0.9]) == 0.0
    assert survival_copula_T(p, [1, 0.4, 1]) == pytest.approx(0.4, rel=1e-12)


def test_survival_copula_marshall_olkin_reduction():
    p = ModelParams([0.5, 0.5], [1, 0, 0], [IND, IND])
    assert survival_copula_T(p, [0.5, 0.5]) == pytest.approx(0.5**1.5, rel=1e-12)


@given(model_params(family="clayton"), st.data())
def test_clayton_explicit_form(p, data):
    u = np.array([data.draw(st.floats(0.01, 1.0)) for _ in range(p.d)])
    assert survival_copula_T(p, u) == pytest.approx(survival_copula_T_clayton(p, u), rel=1e-10)


def test_pair_copula():
    p = ModelParams.from_family("clayton", [0.5, 0.5], [0, 0.5, 0.5], [2, 2])
    assert pair_survival_copula(p, 0, 1, 0.6, 0.7) == pytest.approx(survival_copula_T(p, [0.6, 0.7]), abs=1e-12)
    assert pair_survival_copula(p, 0, 1, 1.0, 0.7) == pytest.approx(0.7, rel=1e-12)
    with pytest.raises(ValueError):
        pair_survival_copula(p, 1, 1, 0.5, 0.5)


@given(model_params(d=2, family="independence"), st.floats(0.01, 1), st.floats(0.01, 1))
def test_pair_copula_independence_is_marshall_olkin(p, u, v):
    a, b = p.alpha
    mo = min(u**a, v**b) * u ** (1 - a) * v ** (1 - b)
    assert pair_survival_copula(p, 0, 1, u, v) == pytest.approx(mo, rel=1e-12)


@given(model_params(), st.floats(0.01, 1), st.floats(0.01, 1))
def test_pair_copula_marginalises_the_full_copula(p, u, v):
    w = np.ones(p.d)
    w[0], w[1] = u, v
    assert pair_survival_copula(p, 0, 1, u, v) == pytest.approx(survival_copula_T(p, w), rel=1e-10)


def test_systemic_pair_copula_alpha_one():
    # alpha_i = 1 form against the full copula: X_0 behaves like an entity with no own shock.
    p = ModelParams.from_family("gumbel", [0.4, 0.7], [0.3, 0.5, 0.2], [2.0, 1.5])
    u0, uk = 0.55, 0.35
    q = ModelParams([1.0, 0.7], [0.8, 0.0, 0.2], [AG.independence(), AG.gumbel(1.5)])
    assert systemic_pair_copula(p, 1, u0, uk) == pytest.approx(pair_survival_copula(q, 0, 1, u0, uk), rel=1e-12)


def test_simultaneous_examples():
    p = ModelParams([0.5, 0.5], [1, 0, 0], [IND, IND])
    assert simultaneous_default_prob(p, 0.0) == pytest.approx(1 / 3, rel=1e-12)
    p = from_intensities([0, 0.5, 0.5], [1.5, 1.5], [C1, C1])
    assert simultaneous_default_prob(p, 0.0) == pytest.approx(0.25, rel=1e-12)
    assert simultaneous_default_prob(p, 0.0, method="quadrature") == pytest.approx(0.25, abs=1e-9)


@pytest.mark.parametrize("family", ["clayton", "gumbel", "independence"])
def test_theta0_one_gives_lambda_ratio(family):
    p = ModelParams.from_family(family, [0.4, 0.7, 0.6], [1, 0, 0, 0], [2, 2, 2])
    assert simultaneous_default_prob(p, 0.0) == pytest.approx(1 / p.lam_hat, rel=1e-12)


def test_simultaneous_d1():
    p = ModelParams([0.4], [0.5, 0.5], [C1])
    assert simultaneous_default_prob(p, 0.7) == pytest.approx(np.exp(-0.7 * p.lam_hat))


def test_gumbel_zero_gamma_term():
    p = ModelParams.from_family("gumbel", [0.5, 0.5], [0.5, 0.5, 0.0], [3, 3])
    assert np.isfinite(simultaneous_default_prob(p, 0.0))
    assert simultaneous_default_prob(p, 0.0) == pytest.approx(simultaneous_default_prob(p, 0.0, "quadrature"), abs=1e-8)


@given(model_params(), st.floats(0.0, 2.0))
def test_quadrature_matches_closed_forms(p, t):
    fam = p.uniform_family()
    if fam is None:
        return
    closed = simultaneous_default_prob(p, t, "closed")
    assert simultaneous_default_prob(p, t, "quadrature") == pytest.approx(closed, abs=1e-8)


@given(model_params(), st.floats(0.0, 2.0), st.floats(0.01, 1.0))
def test_simultaneous_nonincreasing_and_bounded(p, t, dt):
    a, b = simultaneous_default_prob(p, t), simultaneous_default_prob(p, t + dt)
    assert b <= a + 1e-12
    assert 0 < simultaneous_default_prob(p, 0.0) <= 1


@pytest.mark.parametrize("name", ["clayton_a", "gumbel_a", "gumbel_b", "mixed"])
@pytest.mark.parametrize("t", [0.0, 0.5])
def test_simultaneous_against_oracle(frozen, name, t):
    p = frozen_params(frozen, name)
    assert simultaneous_default_prob(p, t) == pytest.approx(frozen["simultaneous"][f"{name}:{t}"], abs=1e-9)
