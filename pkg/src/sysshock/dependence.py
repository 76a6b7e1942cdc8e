"""Kendall functions and Kendall's tau.

Two kinds of pair are covered.  The first is a copula of the form

    C~(u, v) = C(g(u), v) u / g(u),

with the special case g(u) = u^theta over an Archimedean C (the
Khoudraji-type copula that links the systemic shock X_0 to X_k).  The second
is a pair of lifetimes (T_i, T_k) of the shock model.

The lifetime Kendall function splits into a Marshall-Olkin part plus one
term per entity of the pair:

    K_ik(t) = t - (1 - tau_MO) t ln t + S_k(t) + S_i(t),

where S_k carries the dependence between Y_k and X_k.  Each S is known in
closed form for Clayton and Gumbel (zero for independence), so closed forms
also cover pairs whose two generators differ.  The generic path integrates
the Archimedean representation numerically and is kept as a cross-check.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, optimize

from . import _genfuncs as gf
from .archimedean import ArchimedeanGenerator, DomainError, Family, PairCopula
from .shock_model import ModelParams

__all__ = [
    "KhoudrajiSpec",
    "M2Copula",
    "KendallReport",
    "improper_tail_integral",
    "kendall_fn_khoudraji",
    "tau_khoudraji",
    "kendall_fn_generic_pair",
    "kendall_fn_lifetimes",
    "pair_tau",
    "tau_lifetimes",
    "tau_matrix",
    "clayton_kendall_decomposition",
    "tau_systemic",
    "tau_marshall_olkin",
    "tau_from_kendall_fn",
    "default_grid",
]

GRID_POINTS = 1000
# Absolute/relative targets for scipy's adaptive Gauss-Kronrod routine.
_EPSABS = 1e-12
_EPSREL = 1e-10
_LIMIT = 200


def _quad(f, a, b, **kw):
    val, _ = integrate.quad(f, a, b, epsabs=kw.pop("epsabs", _EPSABS), epsrel=kw.pop("epsrel", _EPSREL),
                            limit=_LIMIT, **kw)
    return val


def default_grid(n=GRID_POINTS):
    """n uniformly spaced interior points of (0, 1)."""
    return np.linspace(0.0, 1.0, n + 2)[1:-1]


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any((t <= 0) | (t >= 1)) or np.any(np.isnan(t)):
        raise DomainError("Kendall functions are evaluated on (0, 1)")
    return t


def tau_from_kendall_fn(kfn: Callable[[float], float]) -> float:
    """3 - 4 * integral of K over (0, 1)."""
    return 3.0 - 4.0 * _quad(lambda t: float(kfn(t)), 0.0, 1.0)


# ---------------------------------------------------------------------------
# tail integral


def _scaled_tail(a, lo, beta):
    """a^beta * I(a, a/lo, beta) = a * int_lo^1 w^(beta-1) / (a + w) dw.

    ``a`` may be +inf, in which case the integrand is w^(beta-1).
    """
    if lo >= 1.0:
        return 0.0
    if np.isinf(a):
        return (1.0 - lo**beta) / beta
    return a * _quad(lambda w: w ** (beta - 1.0) / (a + w), lo, 1.0, epsabs=1e-14, epsrel=1e-12)


def improper_tail_integral(a, beta, b=np.inf):
    """I(a, b, beta) = int_a^b z^(-beta) / (z + 1) dz, with b = inf allowed.

    The substitution z = a / w maps the range onto (a/b, 1], where the
    integrand a^(1-beta) w^(beta-1) / (a + w) is bounded for beta >= 1.
    """
    if not a > 0:
        raise DomainError(f"tail integral needs a > 0, got {a}")
    if b < a:
        raise DomainError(f"upper bound {b} below lower bound {a}")
    return _scaled_tail(a, a / b, beta) / a**beta


# ---------------------------------------------------------------------------
# copulas C(g(u), v) u / g(u)


@dataclass(frozen=True)
class KhoudrajiSpec:
    """Archimedean C with g(u) = u^theta."""

    generator: ArchimedeanGenerator
    theta: float

    def __post_init__(self):
        if not 0.0 < self.theta <= 1.0:
            raise ValueError(f"theta must lie in (0, 1], got {self.theta}")


@dataclass(frozen=True)
class M2Copula:
    """C~(u, v) = C(g(u), v) u / g(u) for a base copula C and increasing g.

    ``base`` needs ``cop(u, v)`` and ``dcop_du(u, v)``.
    """

    base: object
    g: Callable
    dg: Callable

    @classmethod
    def khoudraji(cls, spec: KhoudrajiSpec):
        th = spec.theta
        return cls(PairCopula(spec.generator), lambda u: u**th, lambda u: th * u ** (th - 1.0))

    def cop(self, u, v):
        gu = self.g(u)
        return self.base.cop(gu, v) * u / gu


def _khoudraji_generic_K(gen, theta, t):
    code, b = gen.code, gen.beta
    lnt = np.log(t)

    def f(u):
        lnu = np.log(u)
        return np.exp(gf.log_neg_h(code, b, (theta - 1.0) * lnu + lnt) - gf.log_neg_h(code, b, theta * lnu))

    return t - t * lnt + theta * t * lnt + theta * _quad(f, t, 1.0)


def kendall_fn_khoudraji(spec: KhoudrajiSpec, t, method="auto"):
    """Kendall function of the Khoudraji-type copula; ``t`` may be an array.

    ``method`` is "closed" (Clayton, Gumbel, independence), "generic" (the
    one-dimensional integral representation) or "auto".
    """
    t = _check_t(t)
    gen, th = spec.generator, spec.theta
    fam, b = gen.family, gen.beta
    if method == "generic":
        return np.vectorize(lambda x: _khoudraji_generic_K(gen, th, x), otypes=[float])(t)[()]
    if method not in ("auto", "closed"):
        raise ValueError(f"unknown method {method!r}")
    lnt = np.log(t)
    if fam is Family.CLAYTON:
        out = t * (1 + th / b) - (1 - th) * t * lnt - th / b * t ** (1 + b)
    elif fam is Family.GUMBEL:
        out = t - t * lnt * (1.0 - _khoudraji_gumbel_tau(b, th))
    else:
        out = t - t * lnt
    return np.asarray(out)[()]


def _khoudraji_gumbel_tau(beta, theta):
    if theta >= 1.0:
        return 1.0 - 1.0 / beta
    if theta <= 0.0:
        return 0.0
    a = theta / (1.0 - theta)
    return (beta - 1.0) * _scaled_tail(a, 0.0, beta)


def tau_khoudraji(spec: KhoudrajiSpec, method="auto") -> float:
    gen, th = spec.generator, spec.theta
    if method == "generic":
        return tau_from_kendall_fn(lambda x: _khoudraji_generic_K(gen, th, x))
    if method not in ("auto", "closed"):
        raise ValueError(f"unknown method {method!r}")
    if gen.family is Family.CLAYTON:
        return th * gen.beta / (gen.beta + 2.0)
    if gen.family is Family.GUMBEL:
        return _khoudraji_gumbel_tau(gen.beta, th)
    return 0.0


def kendall_fn_generic_pair(cop: M2Copula, t, xtol=1e-10):
    """Kendall function of C~ by direct numerical evaluation.

    For each u in (t, 1) the level curve l solves C(g(u), l) = g(u) t / u,
    and K(t) = t - t ln t + t ln g(t) + int_t^1 dC/du(g(u), l) g'(u) u / g(u) du.
    """
    t = float(_check_t(t))
    base, g, dg = cop.base, cop.g, cop.dg

    def level(u):
        gu = g(u)
        target = gu * t / u
        if target >= gu:
            return 1.0
        f = lambda v: float(base.cop(gu, v)) - target
        try:
            return optimize.brentq(f, 0.0, 1.0, xtol=xtol * 1e-4, rtol=4 * np.finfo(float).eps)
        except ValueError as exc:
            raise ArithmeticError(f"level curve bracket failed at u={u}") from exc

    def integrand(u):
        gu = g(u)
        return float(base.dcop_du(gu, level(u))) * dg(u) * u / gu

    return t - t * np.log(t) + t * np.log(g(t)) + _quad(integrand, t, 1.0)


# ---------------------------------------------------------------------------
# pairs of lifetimes


def tau_marshall_olkin(alpha_i, alpha_k):
    return alpha_i * alpha_k / (alpha_i + alpha_k - alpha_i * alpha_k)


@dataclass(frozen=True)
class _Side:
    """Dependence of (Y_k, X_k) as seen by the pair (T_i, T_k)."""

    gen: ArchimedeanGenerator
    alpha_i: float
    alpha_k: float
    theta_k: float

    @property
    def tau_mo(self):
        return tau_marshall_olkin(self.alpha_i, self.alpha_k)

    @property
    def rho(self):
        return (1.0 - self.alpha_k) / self.alpha_k * self.tau_mo

    @property
    def inert(self):
        return self.theta_k == 0.0 or self.gen.family is Family.INDEPENDENCE or self.alpha_k == 1.0

    def gumbel_tau(self):
        ai, ak, th, b = self.alpha_i, self.alpha_k, self.theta_k, self.gen.beta
        tmo = self.tau_mo
        r = th * ak / (1.0 - ak * (1.0 - th))
        denom = 1.0 - ai * th
        a = ai * th / denom if denom > 0 else np.inf
        lo = ai * th / (ai / tmo - 1.0 + ai * th)
        return -tmo * th * (1.0 - r ** (b - 1.0)) + (b - 1.0) * _scaled_tail(a, lo, b)

    def tau(self):
        if self.inert:
            return 0.0
        if self.gen.family is Family.CLAYTON:
            p = self.rho * self.gen.beta
            return self.alpha_i * self.rho * self.theta_k * p / (p + 2.0)
        return self.gumbel_tau()

    def K(self, t):
        if self.inert:
            return np.zeros_like(t)
        lnt = np.log(t)
        if self.gen.family is Family.CLAYTON:
            c = self.theta_k * self.alpha_i
            b = self.gen.beta
            return c * self.rho * t * lnt + c / b * (t - t ** (1.0 + self.rho * b))
        return self.gumbel_tau() * t * lnt

    def K_generic(self, t):
        """The same term from the Archimedean integral, for a single t."""
        if self.theta_k == 0.0 or self.alpha_k == 1.0:
            return 0.0
        ai, th = self.alpha_i, self.theta_k
        code, b = self.gen.code, self.gen.beta
        tmo = self.tau_mo
        c = (1.0 - th * ai) / ai
        lnt = np.log(t)

        # y = t^s turns the range (t^alpha_i, t^tau_MO) into (tau_MO, alpha_i).
        def f(s):
            ln_arg = lnt * (1.0 - c * s)
            return np.exp(s * lnt / ai + gf.log_neg_h(code, b, ln_arg) - gf.log_neg_h(code, b, th * s * lnt))

        return th * ai * self.rho * t * lnt - th * lnt * _quad(f, tmo, ai)

    def tau_generic(self):
        if self.theta_k == 0.0 or self.alpha_k == 1.0:
            return 0.0
        return -4.0 * _quad(lambda t: self.K_generic(t), 0.0, 1.0)


def _sides(params: ModelParams, i: int, k: int):
    if i == k:
        raise ValueError("a pair needs two distinct entities")
    a, th, gens = params.alpha, params.theta, params.gens
    return (
        _Side(gens[k], a[i], a[k], th[k + 1]),
        _Side(gens[i], a[k], a[i], th[i + 1]),
    )


def _check_method(method):
    if method not in ("auto", "closed", "generic"):
        raise ValueError(f"unknown method {method!r}")
    return method


def kendall_fn_lifetimes(params: ModelParams, i: int, k: int, t, method="auto"):
    """Kendall function of (T_i, T_k) at ``t`` (scalar or array)."""
    _check_method(method)
    side_k, side_i = _sides(params, i, k)
    t = _check_t(t)
    tmo = side_k.tau_mo
    base = t - (1.0 - tmo) * t * np.log(t)
    if method == "generic":
        gen = np.vectorize(lambda x: side_k.K_generic(x) + side_i.K_generic(x), otypes=[float])
        return (base + gen(t))[()]
    return (base + side_k.K(t) + side_i.K(t))[()]


def clayton_kendall_decomposition(params: ModelParams, i: int, k: int, t):
    """The four Kendall functions whose combination K0 + Ki + Kk - 2 KI
    gives the all-Clayton lifetime Kendall function.

    K0 is the Marshall-Olkin part, Ki and Kk are Khoudraji-Clayton Kendall
    functions with rescaled (theta, beta), KI = t - t ln t.
    """
    side_k, side_i = _sides(params, i, k)
    if any(s.gen.family is not Family.CLAYTON for s in (side_k, side_i)):
        raise ValueError("decomposition needs Clayton generators for both entities")
    t = _check_t(t)
    lnt = np.log(t)

    def khoudraji_like(side):
        th = side.theta_k * side.alpha_i * side.rho
        b = side.gen.beta * side.rho
        if b == 0.0:
            return t - t * lnt
        return t * (1 + th / b) - (1 - th) * t * lnt - th / b * t ** (1 + b)

    return {
        "K0": t - (1.0 - side_k.tau_mo) * t * lnt,
        "Ki": khoudraji_like(side_k),
        "Kk": khoudraji_like(side_i),
        "KI": t - t * lnt,
    }


def pair_tau(params: ModelParams, i: int, k: int, method="auto") -> float:
    """Kendall's tau of (T_i, T_k)."""
    _check_method(method)
    side_k, side_i = _sides(params, i, k)
    if method == "generic":
        return side_k.tau_mo + side_k.tau_generic() + side_i.tau_generic()
    return side_k.tau_mo + side_k.tau() + side_i.tau()


def tau_matrix(params: ModelParams, method="auto") -> np.ndarray:
    d = params.d
    out = np.eye(d)
    for i in range(d):
        for k in range(i + 1, d):
            out[i, k] = out[k, i] = pair_tau(params, i, k, method)
    return out


@dataclass
class KendallReport:
    pair: str
    tau: float
    grid: np.ndarray = field(repr=False)
    kendall_fn: np.ndarray = field(repr=False)
    decomposition: dict | None = None


def tau_lifetimes(params: ModelParams, i: int, k: int, method="auto", grid=None) -> KendallReport:
    """Kendall's tau of (T_i, T_k) with its Kendall function on a grid.

    For closed forms the decomposition holds tau_MO and the two entity terms:
    ``tau_bar_i`` comes from the (Y_k, X_k) dependence weighted by alpha_i,
    ``tau_bar_k`` the mirror image.
    """
    _check_method(method)
    side_k, side_i = _sides(params, i, k)
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    kvals = kendall_fn_lifetimes(params, i, k, grid, method) if grid.size else np.empty(0)
    if method == "generic":
        tau, decomp = pair_tau(params, i, k, "generic"), None
    else:
        parts = {"tau_MO": float(side_k.tau_mo), "tau_bar_i": float(side_k.tau()), "tau_bar_k": float(side_i.tau())}
        tau, decomp = parts["tau_MO"] + parts["tau_bar_i"] + parts["tau_bar_k"], parts
    return KendallReport(f"T{i},T{k}", tau, grid, np.atleast_1d(kvals), decomp)


def tau_systemic(params: ModelParams, k: int, mode="vs_idiosyncratic", method="auto") -> float:
    """Kendall's tau between the systemic shock X_0 and entity k.

    ``vs_idiosyncratic`` gives tau(X_0, X_k), the systemic riskiness of k;
    ``vs_lifetime`` gives tau(X_0, T_k).
    """
    _check_method(method)
    gen, th, ak = params.gens[k], params.theta[k + 1], params.alpha[k]
    if mode == "vs_idiosyncratic":
        if th == 0.0:
            return 0.0
        return tau_khoudraji(KhoudrajiSpec(gen, th), method)
    if mode == "vs_lifetime":
        # (X_0, T_k) is the lifetime pair with alpha_i = 1 and theta_i = 0.
        side = _Side(gen, 1.0, ak, th)
        if method == "generic":
            return side.tau_mo + side.tau_generic()
        return side.tau_mo + side.tau()
    raise ValueError(f"unknown mode {mode!r}")
