"""Hot loops of the Monte Carlo oracle, in a numba and a numpy flavour.

Both flavours solve the same bracketed equations: the numpy one by a fixed
number of vectorised bisection steps, the numba one by scalar safeguarded
Newton iterations that stop at tolerance.  Latent times agree to about
1e-9 relative; event orderings, and hence every statistic built on them,
agree exactly in practice.  ``BACKEND`` (from
``SYSSHOCK_DISABLE_NUMBA``) picks the default; every public function also
accepts ``backend=`` explicitly, which the tests and the benchmark use.
"""
import numpy as np

from ._accel import BACKEND, HAVE_NUMBA, jitable, njit
from ._genfuncs import CLAYTON, INDEPENDENCE, log_neg_h, log_phi, log_surv_x, phi_inv_log

# Gumbel conditional inversion brackets y = -ln c in [-ln u, max(q, 1)]; the
# idiosyncratic margin brackets ln x in [ln(-ln v / eta), ln(-ln v / lambda)].
# The numpy path bisects a fixed number of times; the numba path stops once
# the relative tolerance is met.
N_COND = 64
COND_TOL = 1e-14
N_MARG = 56
MARG_TOL = 1e-12

__all__ = [
    "BACKEND",
    "cond_inverse",
    "sample_latent",
    "count_inversions",
    "available_backends",
]


def available_backends():
    return ("numba", "numpy") if HAVE_NUMBA else ("numpy",)


def _resolve(backend):
    backend = BACKEND if backend is None else backend
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is unavailable or disabled")
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    return backend


# ---------------------------------------------------------------------------
# scalar pieces shared by the numba kernels


@jitable
def _dlog_surv_x(fam, b, gamma, eta, x, lnf):
    """d ln F_X / dx, from the chain rule through phi and phi^-1."""
    ge = eta * np.exp(-eta * x - log_neg_h(fam, b, -eta * x))
    gg = gamma * np.exp(-gamma * x - log_neg_h(fam, b, -gamma * x))
    return -np.exp(log_neg_h(fam, b, lnf) - lnf) * (ge - gg)


@jitable
def _gumbel_q(y, bm1):
    return y + bm1 * np.log(y)


@jitable
def _cond_inverse_scalar(fam, b, u, w):
    """ln v solving dC(u, v)/du = w.

    Solved for c = C(u, v) through h(c) = w h(u), then v = phi(phi^-1(c) -
    phi^-1(u)).  Clayton is explicit; Gumbel needs y = -ln c from
    y + (b-1) ln y = q, found by safeguarded Newton on [-ln u, max(q, 1)].
    """
    if fam == INDEPENDENCE:
        return np.log(w)
    lnu = np.log(u)
    if fam == CLAYTON:
        lnc = lnu + np.log(w) / (1.0 + b)
    else:
        bm1 = b - 1.0
        q = _gumbel_q(-lnu, bm1) - np.log(w)
        lo = -lnu
        hi = max(q, 1.0)
        y = 0.5 * (lo + hi)
        for _ in range(100):
            f = _gumbel_q(y, bm1) - q
            if f < 0.0:
                lo = y
            else:
                hi = y
            step = f / (1.0 + bm1 / y)
            y_new = y - step
            if not (lo < y_new < hi):
                y_new = 0.5 * (lo + hi)
            if abs(y_new - y) <= COND_TOL * y_new or hi - lo <= COND_TOL * hi:
                y = y_new
                break
            y = y_new
        lnc = -y
    return log_phi(fam, b, phi_inv_log(fam, b, lnc) - phi_inv_log(fam, b, lnu))


@jitable
def _inv_surv_x_scalar(fam, b, gamma, eta, lnv):
    """x solving ln F_X(x) = ln v, by safeguarded Newton.

    ln F_X is close to linear in x (exactly so for Gumbel), so Newton
    usually lands within tolerance in two or three steps.
    """
    lam = eta - gamma
    if lam <= 0.0:
        return np.inf
    if gamma == 0.0 or fam == INDEPENDENCE:
        return -lnv / lam
    lo = -lnv / eta
    hi = -lnv / lam
    x = lo
    for _ in range(100):
        lnf = log_surv_x(fam, b, gamma, eta, x)
        f = lnf - lnv
        if f > 0.0:
            lo = x
        else:
            hi = x
        slope = _dlog_surv_x(fam, b, gamma, eta, x, lnf)
        x_new = x - f / slope if slope < 0.0 else 0.5 * (lo + hi)
        if not (lo <= x_new <= hi):
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= MARG_TOL * x_new or hi - lo <= MARG_TOL * hi:
            return x_new
        x = x_new
    return x


# ---------------------------------------------------------------------------
# numba kernels


@njit(cache=True, nogil=True)
def _cond_inverse_nb(fam, b, u, w, out):
    for r in range(u.shape[0]):
        out[r] = _cond_inverse_scalar(fam, b, u[r], w[r])


@njit(cache=True, nogil=True)
def _sample_latent_nb(unif, fam, beta, gamma, eta, Y, X):
    n = unif.shape[0]
    d = fam.shape[0]
    for r in range(n):
        if gamma[0] > 0.0:
            Y[r, 0] = -np.log(unif[r, 0]) / gamma[0]
        else:
            Y[r, 0] = np.inf
        for j in range(d):
            u = unif[r, 1 + 2 * j]
            w = unif[r, 2 + 2 * j]
            lnv = _cond_inverse_scalar(fam[j], beta[j], u, w)
            g = gamma[j + 1]
            if g > 0.0:
                Y[r, j + 1] = -np.log(u) / g
            else:
                Y[r, j + 1] = np.inf
            X[r, j] = _inv_surv_x_scalar(fam[j], beta[j], g, eta[j], lnv)


@njit(cache=True, nogil=True)
def _count_inversions_nb(a):
    n = a.shape[0]
    src = a.copy()
    dst = np.empty_like(src)
    inv = 0
    width = 1
    while width < n:
        for lo in range(0, n, 2 * width):
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            i = lo
            j = mid
            k = lo
            while i < mid and j < hi:
                if src[i] <= src[j]:
                    dst[k] = src[i]
                    i += 1
                else:
                    dst[k] = src[j]
                    inv += mid - i
                    j += 1
                k += 1
            while i < mid:
                dst[k] = src[i]
                i += 1
                k += 1
            while j < hi:
                dst[k] = src[j]
                j += 1
                k += 1
        src, dst = dst, src
        width *= 2
    return inv


# ---------------------------------------------------------------------------
# numpy kernels


def _cond_inverse_np(fam, b, u, w):
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    if fam == INDEPENDENCE:
        return np.log(w)
    lnu = np.log(u)
    if fam == CLAYTON:
        lnc = lnu + np.log(w) / (1.0 + b)
    else:
        bm1 = b - 1.0
        q = _gumbel_q(-lnu, bm1) - np.log(w)
        lo = -lnu
        hi = np.maximum(q, 1.0)
        for _ in range(N_COND):
            mid = 0.5 * (lo + hi)
            below = _gumbel_q(mid, bm1) < q
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        lnc = -0.5 * (lo + hi)
    return log_phi(fam, b, phi_inv_log(fam, b, lnc) - phi_inv_log(fam, b, lnu))


def _inv_surv_x_np(fam, b, gamma, eta, lnv):
    lam = eta - gamma
    if lam <= 0.0:
        return np.full(lnv.shape, np.inf)
    if gamma == 0.0 or fam == INDEPENDENCE:
        return -lnv / lam
    llo = np.log(-lnv / eta)
    lhi = np.log(-lnv / lam)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(N_MARG):
            mid = 0.5 * (llo + lhi)
            above = log_surv_x(fam, b, gamma, eta, np.exp(mid)) > lnv
            llo = np.where(above, mid, llo)
            lhi = np.where(above, lhi, mid)
    return np.exp(0.5 * (llo + lhi))


def _sample_latent_np(unif, fam, beta, gamma, eta, Y, X):
    d = fam.shape[0]
    with np.errstate(divide="ignore"):
        Y[:, 0] = -np.log(unif[:, 0]) / gamma[0] if gamma[0] > 0 else np.inf
        for j in range(d):
            u = unif[:, 1 + 2 * j]
            w = unif[:, 2 + 2 * j]
            lnv = _cond_inverse_np(int(fam[j]), beta[j], u, w)
            g = gamma[j + 1]
            Y[:, j + 1] = -np.log(u) / g if g > 0 else np.inf
            X[:, j] = _inv_surv_x_np(int(fam[j]), beta[j], g, eta[j], lnv)


def _count_inversions_np(a):
    """Bottom-up merge count with one searchsorted per level."""
    _, a = np.unique(a, return_inverse=True)
    a = a.astype(np.int64)
    n = a.size
    pos = np.arange(n)
    total = 0
    width = 1
    while width < n:
        run = pos // width
        pair = run // 2
        left = run % 2 == 0
        key = pair * (n + 1) + a
        right_pair = pair[~left]
        # Left keys are globally sorted: pairs ascend and each run is sorted.
        at = np.searchsorted(key[left], key[~left], side="right")
        total += int(np.sum(width - (at - right_pair * width)))
        a = np.sort(key) - pair * (n + 1)
        width *= 2
    return total


# ---------------------------------------------------------------------------
# dispatch


def cond_inverse(fam, b, u, w, backend=None):
    """Conditional inversion of an Archimedean copula; returns ln v."""
    u = np.ascontiguousarray(u, dtype=float)
    w = np.ascontiguousarray(w, dtype=float)
    if _resolve(backend) == "numba":
        out = np.empty_like(u)
        _cond_inverse_nb(int(fam), float(b), u, w, out)
        return out
    return _cond_inverse_np(int(fam), float(b), u, w)


def sample_latent(unif, fam, beta, gamma, eta, backend=None):
    """Map a block of uniforms (n, 2d+1) to latent shock times.

    Column 0 drives Y_0; columns 2j+1, 2j+2 drive the pair (Y_j, X_j).
    Returns ``(Y, X)`` with shapes (n, d+1) and (n, d).
    """
    unif = np.ascontiguousarray(unif, dtype=float)
    fam = np.ascontiguousarray(fam, dtype=np.int64)
    beta = np.ascontiguousarray(beta, dtype=float)
    gamma = np.ascontiguousarray(gamma, dtype=float)
    eta = np.ascontiguousarray(eta, dtype=float)
    n, d = unif.shape[0], fam.shape[0]
    if unif.shape[1] != 2 * d + 1:
        raise ValueError(f"expected {2 * d + 1} uniform columns, got {unif.shape[1]}")
    Y = np.empty((n, d + 1))
    X = np.empty((n, d))
    if _resolve(backend) == "numba":
        _sample_latent_nb(unif, fam, beta, gamma, eta, Y, X)
    else:
        _sample_latent_np(unif, fam, beta, gamma, eta, Y, X)
    return Y, X


def count_inversions(a, backend=None):
    """Number of pairs i < j with a[i] > a[j]."""
    a = np.asarray(a)
    if a.size < 2:
        return 0
    if _resolve(backend) == "numba":
        return int(_count_inversions_nb(np.ascontiguousarray(a, dtype=np.float64)))
    return _count_inversions_np(a)
