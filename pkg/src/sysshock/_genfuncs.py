"""Generator arithmetic in the log domain.

Every function takes an integer family code and a parameter ``b`` and works
on scalars (inside numba kernels) as well as on numpy arrays (numpy path).
Logs are used throughout so that survival values like ``exp(-700)`` keep
their precision.
"""
import numpy as np

from ._accel import jitable

CLAYTON = 0
GUMBEL = 1
INDEPENDENCE = 2


@jitable
def phi(fam, b, x):
    if fam == CLAYTON:
        return (1.0 + x) ** (-1.0 / b)
    if fam == GUMBEL:
        return np.exp(-(x ** (1.0 / b)))
    return np.exp(-x)


@jitable
def log_phi(fam, b, x):
    """ln phi(x) for x >= 0."""
    if fam == CLAYTON:
        return -np.log1p(x) / b
    if fam == GUMBEL:
        return -(x ** (1.0 / b))
    return -x


@jitable
def phi_inv_log(fam, b, lnu):
    """phi^{-1}(exp(lnu)) for lnu <= 0."""
    if fam == CLAYTON:
        return np.expm1(-b * lnu)
    if fam == GUMBEL:
        return (-lnu) ** b
    return -lnu


@jitable
def log_neg_h(fam, b, lnx):
    """ln(-h(x)) with h = phi' o phi^{-1}, given lnx = ln x < 0."""
    if fam == CLAYTON:
        return (1.0 + b) * lnx - np.log(b)
    if fam == GUMBEL:
        return lnx + (1.0 - b) * np.log(-lnx) - np.log(b)
    return lnx


@jitable
def log_cop(fam, b, lnu, lnv):
    """ln C(u, v) for the Archimedean copula with this generator."""
    return log_phi(fam, b, phi_inv_log(fam, b, lnu) + phi_inv_log(fam, b, lnv))


@jitable
def dcop_du_log(fam, b, lnu, lnv):
    """dC/du = h(C(u, v)) / h(u), from logs of u and v."""
    return np.exp(log_neg_h(fam, b, log_cop(fam, b, lnu, lnv)) - log_neg_h(fam, b, lnu))


@jitable
def log_surv_x(fam, b, gamma, eta, x):
    """ln of the idiosyncratic survival F_X(x) under G(x) = exp(-x)."""
    return log_phi(fam, b, phi_inv_log(fam, b, -eta * x) - phi_inv_log(fam, b, -gamma * x))
