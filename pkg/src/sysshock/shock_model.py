"""Lifetimes driven by idiosyncratic shocks and one systemic shock.

Entity j dies at T_j = min(X_j, X_0) where X_0 = min(Y_0, ..., Y_d).  The
Y's are independent, the X's are independent, and each pair (Y_j, X_j) has
survival copula C_j.  Margins follow the exponential family with baseline
G(x) = exp(-x):

    P(Y_j > x) = G(x)^gamma_j,   P(min(Y_j, X_j) > x) = G(x)^eta_j.

With lambda_j = eta_j - gamma_j and lambda_0 = sum(gamma), the model is
described by

    alpha_j = lambda_0 / (lambda_0 + lambda_j),   theta_j = gamma_j / lambda_0,

plus one generator per entity.  Entities are indexed 0..d-1; ``theta`` has
d+1 entries with ``theta[0]`` the share of the fully exogenous shock Y_0.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _genfuncs as gf
from .archimedean import ArchimedeanGenerator, Family, PairCopula
from .quadrature import adaptive_simpson

__all__ = [
    "ValidationError",
    "ModelParams",
    "from_intensities",
    "marginal_survival_X",
    "joint_survival_T",
    "survival_copula_T",
    "survival_copula_T_clayton",
    "pair_survival_copula",
    "systemic_pair_copula",
    "simultaneous_default_prob",
]

THETA_SUM_TOL = 1e-9


class ValidationError(ValueError):
    """Parameters violate the model's constraints."""


def G(x):
    """Baseline survival function, exp(-x)."""
    return np.exp(-np.asarray(x, dtype=float))


@dataclass(frozen=True, eq=False)
class ModelParams:
    alpha: np.ndarray
    theta: np.ndarray
    gens: tuple
    lambda0: float = 1.0

    def __post_init__(self):
        alpha = np.array(self.alpha, dtype=float).ravel()
        theta = np.array(self.theta, dtype=float).ravel()
        gens = tuple(self.gens)
        d = alpha.size
        if d < 1:
            raise ValidationError("need at least one entity")
        if theta.size != d + 1:
            raise ValidationError(f"theta needs d+1 = {d + 1} entries, got {theta.size}")
        if len(gens) != d:
            raise ValidationError(f"need {d} generators, got {len(gens)}")
        if not all(isinstance(g, ArchimedeanGenerator) for g in gens):
            raise ValidationError("gens must be ArchimedeanGenerator instances")
        if not np.all(np.isfinite(alpha)) or np.any((alpha <= 0) | (alpha > 1)):
            raise ValidationError(f"alpha must lie in (0, 1], got {alpha.tolist()}")
        if not np.all(np.isfinite(theta)) or np.any(theta < 0):
            raise ValidationError(f"theta must be nonnegative, got {theta.tolist()}")
        if abs(theta.sum() - 1.0) > THETA_SUM_TOL:
            raise ValidationError(f"theta must sum to 1, got {theta.sum():.12g}")
        if not (np.isfinite(self.lambda0) and self.lambda0 > 0):
            raise ValidationError(f"lambda0 must be positive, got {self.lambda0}")
        alpha.flags.writeable = False
        theta.flags.writeable = False
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "gens", gens)
        object.__setattr__(self, "lambda0", float(self.lambda0))

    @classmethod
    def from_family(cls, family, alpha, theta, beta=None, lambda0=1.0):
        """Same generator family for every entity."""
        family = Family.parse(family)
        d = len(alpha)
        if family is Family.INDEPENDENCE:
            gens = [ArchimedeanGenerator.independence()] * d
        else:
            if beta is None or len(beta) != d:
                raise ValidationError(f"need {d} beta values for the {family.name.lower()} family")
            gens = [ArchimedeanGenerator(family, b) for b in beta]
        return cls(alpha, theta, gens, lambda0)

    @property
    def d(self) -> int:
        return self.alpha.size

    @property
    def lam(self) -> np.ndarray:
        """Idiosyncratic intensities lambda_1..lambda_d."""
        return self.lambda0 * (1.0 - self.alpha) / self.alpha

    @property
    def gamma(self) -> np.ndarray:
        """Systemic-component intensities gamma_0..gamma_d."""
        return self.theta * self.lambda0

    @property
    def eta(self) -> np.ndarray:
        return self.gamma[1:] + self.lam

    @property
    def lam_hat(self) -> float:
        return self.lambda0 + float(self.lam.sum())

    @property
    def beta(self) -> np.ndarray:
        return np.array([g.beta for g in self.gens])

    @property
    def families(self) -> tuple:
        return tuple(g.family for g in self.gens)

    def uniform_family(self):
        """The common family of all generators, or None when mixed."""
        fams = set(self.families)
        return fams.pop() if len(fams) == 1 else None

    def copula(self, j) -> PairCopula:
        return PairCopula(self.gens[j])

    def kernel_arrays(self):
        """(family codes, beta, gamma, eta) in the layout the sampler expects."""
        return (
            np.array([g.code for g in self.gens], dtype=np.int64),
            self.beta,
            self.gamma.copy(),
            self.eta.copy(),
        )

    # margins under G(x) = exp(-x)
    def survival_X0(self, x):
        return G(x) ** self.lambda0

    def survival_Y(self, j, x):
        """P(Y_j > x) for j = 0..d (0 is the exogenous shock)."""
        return G(x) ** self.gamma[j]

    def survival_Z(self, j, x):
        return G(x) ** self.eta[j]

    def survival_T(self, j, x):
        return G(x) ** (self.lambda0 + self.lam[j])

    def with_lambda0(self, lambda0):
        return ModelParams(self.alpha, self.theta, self.gens, lambda0)

    def __repr__(self):
        gens = ", ".join(f"{g.family.name.lower()}({g.beta:g})" for g in self.gens)
        return (
            f"ModelParams(alpha={self.alpha.tolist()}, theta={self.theta.tolist()}, "
            f"gens=[{gens}], lambda0={self.lambda0:g})"
        )


def from_intensities(gamma, eta, gens) -> ModelParams:
    """Build parameters from the intensities (gamma_0..gamma_d, eta_1..eta_d)."""
    gamma = np.asarray(gamma, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if gamma.size != eta.size + 1:
        raise ValidationError("gamma needs one more entry than eta")
    if np.any(gamma < 0):
        raise ValidationError("gamma must be nonnegative")
    if np.any(eta <= 0):
        raise ValidationError("eta must be positive")
    bad = np.flatnonzero(eta < gamma[1:])
    if bad.size:
        raise ValidationError(f"eta_j < gamma_j for entities {bad.tolist()}")
    lambda0 = float(gamma.sum())
    if lambda0 <= 0:
        raise ValidationError("at least one gamma must be positive (no systemic shock otherwise)")
    lam = eta - gamma[1:]
    return ModelParams(lambda0 / (lambda0 + lam), gamma / lambda0, gens, lambda0)


def marginal_survival_X(params: ModelParams, j: int, x):
    """P(X_j > x), the survival function solving C_j(G^gamma, F_X) = G^eta."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("x must be nonnegative")
    g = params.gens[j]
    gamma, eta = params.gamma[j + 1], params.eta[j]
    if gamma == 0:
        return (G(x) ** eta)[()]
    return np.exp(gf.log_surv_x(g.code, g.beta, gamma, eta, x))[()]


def joint_survival_T(params: ModelParams, t):
    """P(T_1 > t_1, ..., T_d > t_d); ``t`` may carry leading batch axes."""
    t = np.asarray(t, dtype=float)
    if t.shape[-1] != params.d:
        raise ValueError(f"expected {params.d} times, got shape {t.shape}")
    if np.any(t < 0):
        raise ValueError("times must be nonnegative")
    m = t.max(axis=-1)
    out = params.survival_Y(0, m)
    for j in range(params.d):
        fx = marginal_survival_X(params, j, t[..., j])
        out = out * params.copula(j).cop(params.survival_Y(j + 1, m), fx)
    return out[()]


def survival_copula_T(params: ModelParams, u):
    """Survival copula of (T_1, ..., T_d) at ``u`` (batch axes allowed)."""
    u = np.asarray(u, dtype=float)
    if u.shape[-1] != params.d:
        raise ValueError(f"expected {params.d} coordinates, got shape {u.shape}")
    if np.any((u < 0) | (u > 1)):
        raise ValueError("copula arguments must lie in [0, 1]")
    alpha, theta = params.alpha, params.theta
    zero = np.any(u == 0, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        lnu = np.log(np.where(u == 0, 0.5, u))
        m = (alpha * lnu).min(axis=-1)
        log_c = theta[0] * m
        for j, g in enumerate(params.gens):
            a_hi = 1.0 - alpha[j] * (1.0 - theta[j + 1])
            a_lo = alpha[j] * theta[j + 1]
            arg = (
                gf.phi_inv_log(g.code, g.beta, theta[j + 1] * m)
                + gf.phi_inv_log(g.code, g.beta, a_hi * lnu[..., j])
                - gf.phi_inv_log(g.code, g.beta, a_lo * lnu[..., j])
            )
            log_c = log_c + gf.log_phi(g.code, g.beta, np.maximum(arg, 0.0))
    return np.where(zero, 0.0, np.exp(log_c))[()]


def survival_copula_T_clayton(params: ModelParams, u):
    """Explicit form of the survival copula when every generator is Clayton."""
    if params.uniform_family() is not Family.CLAYTON:
        raise ValueError("all generators must be Clayton")
    u = np.asarray(u, dtype=float)
    alpha, theta, beta = params.alpha, params.theta, params.beta
    if np.any(u == 0):
        return 0.0
    out = np.min(u ** (alpha * theta[0]))
    big = np.max(u ** (-alpha))
    for j in range(params.d):
        th, b = theta[j + 1], beta[j]
        term = big ** (th * b) + u[j] ** (-(1 - alpha[j] * (1 - th)) * b) - u[j] ** (-b * alpha[j] * th)
        out *= term ** (-1.0 / b)
    return float(out)


def _pair_copula(alpha_i, alpha_k, theta_i, theta_k, gen_i, gen_k, u_i, u_k):
    u_i, u_k = np.broadcast_arrays(np.asarray(u_i, dtype=float), np.asarray(u_k, dtype=float))
    zero = (u_i == 0) | (u_k == 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        lnu_i = np.log(np.where(zero, 0.5, u_i))
        lnu_k = np.log(np.where(zero, 0.5, u_k))
        m = np.minimum(alpha_i * lnu_i, alpha_k * lnu_k)
        log_c = (1.0 - theta_i - theta_k) * m
        for a, th, g, lnu in ((alpha_i, theta_i, gen_i, lnu_i), (alpha_k, theta_k, gen_k, lnu_k)):
            arg = (
                gf.phi_inv_log(g.code, g.beta, th * m)
                + gf.phi_inv_log(g.code, g.beta, (1.0 - a * (1.0 - th)) * lnu)
                - gf.phi_inv_log(g.code, g.beta, a * th * lnu)
            )
            log_c = log_c + gf.log_phi(g.code, g.beta, np.maximum(arg, 0.0))
    return np.where(zero, 0.0, np.exp(log_c))[()]


def pair_survival_copula(params: ModelParams, i: int, k: int, u_i, u_k):
    """Bivariate survival copula of (T_i, T_k)."""
    if i == k:
        raise ValueError("pair copula needs two distinct entities")
    a, th, gens = params.alpha, params.theta, params.gens
    return _pair_copula(a[i], a[k], th[i + 1], th[k + 1], gens[i], gens[k], u_i, u_k)


def systemic_pair_copula(params: ModelParams, k: int, u_0, u_k):
    """Survival copula of (X_0, T_k): the pair copula with alpha_i = 1."""
    indep = ArchimedeanGenerator.independence()
    return _pair_copula(1.0, params.alpha[k], 0.0, params.theta[k + 1], indep, params.gens[k], u_0, u_k)


def _singular_closed(params, family, t):
    lam_hat = params.lam_hat
    gamma, lam, beta = params.gamma, params.lam, params.beta
    gt = G(t)
    out = gamma[0] / lam_hat * gt**lam_hat
    for j in range(params.d):
        g = gamma[j + 1]
        if g == 0:
            continue
        if family is Family.CLAYTON:
            rate = lam_hat + lam[j] * beta[j]
            out = out + g / rate * gt**rate
        elif family is Family.GUMBEL:
            out = out + g * (1.0 + lam[j] / g) ** (1.0 - beta[j]) / lam_hat * gt**lam_hat
        else:
            out = out + g / lam_hat * gt**lam_hat
    return out


def _singular_quadrature(params, t, tol):
    lam_hat = params.lam_hat
    gamma, lam, eta = params.gamma, params.lam, params.eta
    out = gamma[0] / lam_hat * float(G(t)) ** lam_hat
    for j, g in enumerate(params.gens):
        gj = gamma[j + 1]
        if gj == 0:
            continue
        p = lam_hat - lam[j]
        # y = s^(1/p) absorbs the y^(p-1) factor, which may be singular at 0.
        def integrand(s, g=g, p=p, gj=gj, ej=eta[j]):
            # Kept strictly below 0: the Gumbel ratio is 0/0 at y = 1 exactly.
            lny = min(np.log(max(s, 1e-300)) / p, -1e-300 / gj)
            return float(np.exp(gf.log_neg_h(g.code, g.beta, ej * lny) - gf.log_neg_h(g.code, g.beta, gj * lny)))

        upper = float(G(t)) ** p
        out += gj / p * adaptive_simpson(integrand, 0.0, upper, tol=tol * p / gj)
    return out


def simultaneous_default_prob(params: ModelParams, t=0.0, method="auto", tol=1e-9):
    """P(T_1 = ... = T_d > t).

    ``method`` is "closed" (needs one family for all entities), "quadrature"
    (adaptive Simpson on the singular-part integral) or "auto".
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("t must be nonnegative")
    if params.d == 1:
        # A single lifetime trivially coincides with itself.
        return (G(t_arr) ** params.lam_hat)[()]
    family = params.uniform_family()
    if method == "auto":
        method = "closed" if family is not None else "quadrature"
    if method == "closed":
        if family is None:
            raise ValueError("closed form needs a single generator family")
        return np.asarray(_singular_closed(params, family, t_arr))[()]
    if method == "quadrature":
        if t_arr.ndim:
            return np.array([_singular_quadrature(params, float(tt), tol) for tt in t_arr.ravel()]).reshape(t_arr.shape)
        return _singular_quadrature(params, float(t_arr), tol)
    raise ValueError(f"unknown method {method!r}")
