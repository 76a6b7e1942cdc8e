"""Moment fit of model parameters to pairwise Kendall's taus.

The estimator minimises the sum over pairs i < k of (tau_hat_ik - tau_ik)^2,
where tau_ik is the closed-form lifetime tau.  lambda_0 is fixed at 1: the
copula of the lifetimes does not depend on the scale.

Constraints are removed by reparameterisation:

    alpha_j = eps + (1 - 2 eps) * sigmoid(a_j)
    theta   = softmax(0, t_1, ..., t_d)          (theta_0 carries logit 0)
    beta_j  = lo + (B - lo) * sigmoid(b_j)       lo = eps (Clayton), 1 + eps (Gumbel)

and the unconstrained problem is handed to Nelder-Mead from several seeded
starting points.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy.special import expit, logit, softmax

from .archimedean import ArchimedeanGenerator, Family
from .dependence import pair_tau, tau_systemic
from .shock_model import ModelParams

__all__ = [
    "TauMatrix",
    "CalibrationOptions",
    "CalibrationResult",
    "Reparam",
    "objective",
    "calibrate",
    "riskiness_report",
]

log = logging.getLogger(__name__)

EPS = 1e-6
BETA_MAX = 50.0
PENALTY = 1e6


@dataclass(frozen=True, eq=False)
class TauMatrix:
    """Symmetric matrix of pairwise taus; only the strict upper triangle is used."""

    values: np.ndarray
    labels: tuple = ()

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"tau matrix must be square, got shape {v.shape}")
        d = v.shape[0]
        if d < 2:
            raise ValueError("tau matrix needs d >= 2")
        iu = np.triu_indices(d, 1)
        upper = v[iu]
        if not np.all(np.isfinite(upper)):
            raise ValueError("tau matrix entries must be finite")
        if np.any(np.abs(upper) > 1):
            raise ValueError("tau entries must lie in [-1, 1]")
        full = np.eye(d)
        full[iu] = upper
        full[(iu[1], iu[0])] = upper
        full.flags.writeable = False
        labels = tuple(self.labels) if self.labels else tuple(f"E{j + 1}" for j in range(d))
        if len(labels) != d:
            raise ValueError(f"need {d} labels, got {len(labels)}")
        object.__setattr__(self, "values", full)
        object.__setattr__(self, "labels", labels)

    @property
    def d(self):
        return self.values.shape[0]

    def upper(self):
        return self.values[np.triu_indices(self.d, 1)]

    @classmethod
    def from_params(cls, params: ModelParams, labels=()):
        d = params.d
        v = np.eye(d)
        for i in range(d):
            for k in range(i + 1, d):
                v[i, k] = pair_tau(params, i, k)
        return cls(v, labels)


@dataclass(frozen=True)
class CalibrationOptions:
    restarts: int = 20
    max_iters: int = 5000
    seed: int = 0
    tolerance: float = 1e-12
    workers: int = 1

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class CalibrationResult:
    params: ModelParams
    objective: float
    fitted_taus: TauMatrix
    n_restarts_used: int
    converged: bool
    target: TauMatrix
    boundary: list = field(default_factory=list)
    restart_objectives: list = field(default_factory=list)

    @property
    def residual_rms(self):
        r = self.fitted_taus.upper() - self.target.upper()
        return float(np.sqrt(np.mean(r**2)))


@dataclass(frozen=True)
class Reparam:
    """Map between the 3d unconstrained coordinates and (alpha, theta, beta)."""

    d: int
    family: Family

    @property
    def beta_lo(self):
        return EPS if self.family is Family.CLAYTON else 1.0 + EPS

    @property
    def size(self):
        return 3 * self.d

    def to_constrained(self, x):
        d = self.d
        x = np.asarray(x, dtype=float)
        alpha = EPS + (1.0 - 2.0 * EPS) * expit(x[:d])
        theta = softmax(np.concatenate(([0.0], x[d : 2 * d])))
        lo = self.beta_lo
        beta = lo + (BETA_MAX - lo) * expit(x[2 * d :])
        return alpha, theta, beta

    def to_unconstrained(self, alpha, theta, beta):
        alpha, theta, beta = (np.asarray(v, dtype=float) for v in (alpha, theta, beta))
        if theta[0] <= 0:
            raise ValueError("theta_0 must be positive to be represented")
        lo = self.beta_lo
        return np.concatenate(
            (
                logit((alpha - EPS) / (1.0 - 2.0 * EPS)),
                np.log(theta[1:]) - np.log(theta[0]),
                logit((beta - lo) / (BETA_MAX - lo)),
            )
        )

    def params(self, x):
        alpha, theta, beta = self.to_constrained(x)
        theta = theta / theta.sum()
        gens = [ArchimedeanGenerator(self.family, b) for b in beta]
        return ModelParams(alpha, theta, gens, 1.0)


def objective(params: ModelParams, target: TauMatrix) -> float:
    """Sum of squared differences between model and target taus."""
    if params.d != target.d:
        raise ValueError(f"dimension mismatch: params d={params.d}, target d={target.d}")
    d = params.d
    total = 0.0
    for i in range(d):
        for k in range(i + 1, d):
            total += (target.values[i, k] - pair_tau(params, i, k)) ** 2
    return float(total)


def _unconstrained_objective(x, rep, target):
    try:
        val = objective(rep.params(x), target)
    except (ValueError, ArithmeticError):
        return PENALTY
    return val if np.isfinite(val) else PENALTY


def _diameter(simplex):
    return float(np.max(np.linalg.norm(simplex - simplex[0], axis=1)))


def _nelder_mead(x0, rep, target, opts):
    res = optimize.minimize(
        _unconstrained_objective,
        x0,
        args=(rep, target),
        method="Nelder-Mead",
        options={"maxiter": opts.max_iters, "maxfev": 4 * opts.max_iters, "xatol": 1e-10,
                 "fatol": opts.tolerance * 1e-4, "adaptive": True},
    )
    return res.x, float(res.fun), _diameter(res.final_simplex[0])


def _run_restart(args):
    """One restart: Nelder-Mead from x0, then re-polished from its own best
    point while that keeps helping (a fresh simplex undoes collapse)."""
    x0, rep, target, opts = args
    x, f, diam = _nelder_mead(x0, rep, target, opts)
    for _ in range(3):
        if f < opts.tolerance:
            break
        x2, f2, diam2 = _nelder_mead(x, rep, target, opts)
        improved = f2 < f * (1 - 1e-9)
        if f2 <= f:
            x, f, diam = x2, f2, diam2
        if not improved:
            break
    return x, f, diam


def _starting_points(rep, opts):
    rng = np.random.default_rng(opts.seed)
    d = rep.d
    # First start sits at alpha = 1/2, equal thetas, moderate beta.
    mid_beta = 2.0 if rep.family is Family.CLAYTON else 1.5
    first = rep.to_unconstrained(np.full(d, 0.5), np.full(d + 1, 1.0 / (d + 1)), np.full(d, mid_beta))
    points = [first]
    for _ in range(opts.restarts - 1):
        points.append(np.concatenate((rng.normal(0, 1.5, d), rng.normal(0, 1.0, d), rng.normal(-2.0, 1.5, d))))
    return points


def _boundary_flags(params, family):
    flags = []
    for j, a in enumerate(params.alpha):
        if a < 1e-4 or a > 1 - 1e-4:
            flags.append(f"alpha[{j}]")
    for j, t in enumerate(params.theta):
        if t < 1e-6:
            flags.append(f"theta[{j}]")
    lo = EPS if family is Family.CLAYTON else 1.0 + EPS
    for j, b in enumerate(params.beta):
        if b < lo + 1e-4 or b > BETA_MAX - 1e-3:
            flags.append(f"beta[{j}]")
    return flags


def calibrate(target: TauMatrix, family="clayton", opts: CalibrationOptions | None = None) -> CalibrationResult:
    """Fit (alpha, theta, beta) with lambda_0 = 1 to the target taus.

    Restarts may run in worker processes; the reduction keeps the lowest
    objective and breaks ties by restart index, so the answer does not depend
    on the worker count.
    """
    opts = opts or CalibrationOptions()
    family = Family.parse(family)
    if family is Family.INDEPENDENCE:
        raise ValueError("calibration needs the clayton or gumbel family")
    rep = Reparam(target.d, family)
    starts = _starting_points(rep, opts)
    jobs = [(x0, rep, target, opts) for x0 in starts]
    if opts.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=opts.workers) as pool:
            outcomes = list(pool.map(_run_restart, jobs))
    else:
        outcomes = [_run_restart(j) for j in jobs]
    start_values = [_unconstrained_objective(x0, rep, target) for x0 in starts]
    best = min(range(len(outcomes)), key=lambda r: (outcomes[r][1], r))
    x, _, diam = outcomes[best]
    params = rep.params(x)
    obj = objective(params, target)
    improved = any(o[1] < s for o, s in zip(outcomes, start_values)) or obj < opts.tolerance
    converged = bool(improved and obj < PENALTY and (obj < opts.tolerance or diam < 1e-8))
    fitted = TauMatrix.from_params(params, target.labels)
    log.info("calibration: objective %.3g after %d restarts (best #%d)", obj, len(outcomes), best)
    return CalibrationResult(
        params=params,
        objective=obj,
        fitted_taus=fitted,
        n_restarts_used=len(outcomes),
        converged=converged,
        target=target,
        boundary=_boundary_flags(params, family),
        restart_objectives=[o[1] for o in outcomes],
    )


def riskiness_report(result: CalibrationResult | ModelParams, labels=None):
    """Per-entity systemic measures tau(X_0, X_j) and tau(X_0, T_j)."""
    params = result.params if isinstance(result, CalibrationResult) else result
    if labels is None:
        labels = result.target.labels if isinstance(result, CalibrationResult) else [f"E{j + 1}" for j in range(params.d)]
    return [
        {
            "entity": labels[j],
            "tau_X0_Xj": float(tau_systemic(params, j, "vs_idiosyncratic")),
            "tau_X0_Tj": float(tau_systemic(params, j, "vs_lifetime")),
        }
        for j in range(params.d)
    ]
