"""Strict Archimedean generators and the bivariate copulas built from them."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import _genfuncs as gf
from . import kernels

__all__ = ["Family", "ArchimedeanGenerator", "PairCopula", "DomainError"]


class DomainError(ValueError):
    """Argument outside the domain of a generator or copula function."""


class Family(enum.IntEnum):
    CLAYTON = gf.CLAYTON
    GUMBEL = gf.GUMBEL
    INDEPENDENCE = gf.INDEPENDENCE

    @classmethod
    def parse(cls, name: "str | Family") -> "Family":
        if isinstance(name, Family):
            return name
        try:
            return cls[str(name).strip().upper()]
        except KeyError:
            raise ValueError(f"unknown copula family {name!r}") from None


@dataclass(frozen=True)
class ArchimedeanGenerator:
    """A strict generator phi with phi(0) = 1 and phi(inf) = 0.

    Clayton: phi(x) = (1 + x)^(-1/beta), beta > 0.
    Gumbel: phi(x) = exp(-x^(1/beta)), beta >= 1.
    Independence: phi(x) = exp(-x).

    Clayton with beta < 1e-9 and Gumbel with |beta - 1| < 1e-12 are stored
    as Independence, which keeps h free of 0/0.
    """

    family: Family
    beta: float = 1.0

    def __post_init__(self):
        fam = Family.parse(self.family)
        beta = float(self.beta)
        if not np.isfinite(beta):
            raise ValueError(f"beta must be finite, got {beta}")
        if fam is Family.CLAYTON:
            if beta < 0:
                raise ValueError(f"Clayton beta must be positive, got {beta}")
            if beta < 1e-9:
                fam, beta = Family.INDEPENDENCE, 1.0
        elif fam is Family.GUMBEL:
            if beta < 1 - 1e-12:
                raise ValueError(f"Gumbel beta must be >= 1, got {beta}")
            if abs(beta - 1) < 1e-12:
                fam, beta = Family.INDEPENDENCE, 1.0
        else:
            beta = 1.0
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "beta", beta)

    @classmethod
    def clayton(cls, beta):
        return cls(Family.CLAYTON, beta)

    @classmethod
    def gumbel(cls, beta):
        return cls(Family.GUMBEL, beta)

    @classmethod
    def independence(cls):
        return cls(Family.INDEPENDENCE)

    @property
    def code(self) -> int:
        return int(self.family)

    def phi(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < 0):
            raise DomainError("phi is defined on [0, inf)")
        return gf.phi(self.code, self.beta, x)[()]

    def phi_inv(self, u):
        u = np.asarray(u, dtype=float)
        if np.any((u <= 0) | (u > 1)):
            raise DomainError("phi_inv is defined on (0, 1]")
        return gf.phi_inv_log(self.code, self.beta, np.log(u))[()]

    def h(self, x):
        """phi'(phi^{-1}(x)), negative on (0, 1)."""
        x = np.asarray(x, dtype=float)
        if np.any((x <= 0) | (x >= 1)):
            raise DomainError("h is defined on (0, 1)")
        return -np.exp(gf.log_neg_h(self.code, self.beta, np.log(x)))[()]

    def kendall_tau(self) -> float:
        """Kendall's tau of the plain Archimedean copula."""
        if self.family is Family.CLAYTON:
            return self.beta / (self.beta + 2)
        if self.family is Family.GUMBEL:
            return 1 - 1 / self.beta
        return 0.0


@dataclass(frozen=True)
class PairCopula:
    """C(u, v) = phi(phi^{-1}(u) + phi^{-1}(v))."""

    generator: ArchimedeanGenerator

    def cop(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
        if np.any((u < 0) | (u > 1) | (v < 0) | (v > 1)):
            raise DomainError("copula arguments must lie in [0, 1]")
        g = self.generator
        out = np.zeros(u.shape)
        # Boundary cases are exact; keep them away from phi^{-1}(0) = inf.
        one_u, one_v = u == 1, v == 1
        out[one_u] = v[one_u]
        out[one_v] = u[one_v]
        inner = (u > 0) & (v > 0) & ~one_u & ~one_v
        out[inner] = np.exp(gf.log_cop(g.code, g.beta, np.log(u[inner]), np.log(v[inner])))
        return out[()]

    def dcop_du(self, u, v):
        """dC/du = h(C(u, v)) / h(u); requires u in (0, 1), v in [0, 1]."""
        u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
        if np.any((u <= 0) | (u >= 1)):
            raise DomainError("dcop_du needs u in (0, 1)")
        if np.any((v < 0) | (v > 1)):
            raise DomainError("dcop_du needs v in [0, 1]")
        g = self.generator
        out = np.where(v == 1, 1.0, 0.0)
        inner = (v > 0) & (v < 1)
        out[inner] = gf.dcop_du_log(g.code, g.beta, np.log(u[inner]), np.log(v[inner]))
        return np.clip(out, 0.0, 1.0)[()]

    def cond_inverse(self, u, w, backend=None):
        """v with dC(u, v)/du = w (conditional inversion)."""
        g = self.generator
        return np.exp(kernels.cond_inverse(g.code, g.beta, np.atleast_1d(u), np.atleast_1d(w), backend))

    def sample(self, n: int, rng: np.random.Generator, backend=None) -> tuple[np.ndarray, np.ndarray]:
        """Draw n pairs by conditional inversion: U, W uniform, V = C_U^{-1}(W)."""
        u = _open_uniform(rng, n)
        w = _open_uniform(rng, n)
        return u, self.cond_inverse(u, w, backend)

    def kendall_tau(self) -> float:
        return self.generator.kendall_tau()


def _open_uniform(rng, size):
    """Uniforms on the open interval (0, 1)."""
    return rng.random(size) + 2.0**-54
