"""Brute-force simulation of the shock model.

Used as an independent oracle for the closed forms: sample every latent
shock, take minima, and count.  Rows are generated in fixed-size blocks; the
random stream of block b is Philox keyed by (seed, b), so the output depends
on the seed alone and never on how blocks are spread over workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .shock_model import ModelParams

__all__ = [
    "SimulationConfig",
    "SampleBatch",
    "sample_model",
    "empirical_tau",
    "empirical_tau_reference",
    "empirical_tau_matrix",
    "empirical_simultaneous",
    "tau_standard_error",
    "BLOCK_SIZE",
]

BLOCK_SIZE = 1 << 16
REFERENCE_MAX_N = 2000


@dataclass(frozen=True)
class SimulationConfig:
    n_samples: int
    seed: int = 0
    n_workers: int = 1
    keep_latent: bool = False
    backend: str | None = None

    def __post_init__(self):
        if int(self.n_samples) < 1:
            raise ValueError(f"n_samples must be >= 1, got {self.n_samples}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if int(self.n_workers) < 1:
            raise ValueError(f"n_workers must be >= 1, got {self.n_workers}")


@dataclass
class SampleBatch:
    """Lifetimes T (n, d), the systemic time X_0 (n,) and a flag per row
    telling whether X_0 fired first for every entity.  Latent Y (n, d+1)
    and X (n, d) are kept on request."""

    T: np.ndarray
    X0: np.ndarray
    simultaneous: np.ndarray
    Y: np.ndarray | None = None
    X: np.ndarray | None = None

    @property
    def n(self):
        return self.T.shape[0]

    @property
    def d(self):
        return self.T.shape[1]


def _block_rng(seed, block):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def _run_block(params_arrays, seed, block, rows, d, keep, backend):
    fam, beta, gamma, eta = params_arrays
    # Shift [0, 1) to (0, 1) so logarithms stay finite.
    unif = _block_rng(seed, block).random((rows, 2 * d + 1)) + 2.0**-54
    Y, X = kernels.sample_latent(unif, fam, beta, gamma, eta, backend)
    X0 = Y.min(axis=1)
    T = np.minimum(X, X0[:, None])
    simultaneous = np.all(X0[:, None] < X, axis=1)
    return T, X0, simultaneous, (Y if keep else None), (X if keep else None)


def sample_model(params: ModelParams, cfg: SimulationConfig) -> SampleBatch:
    """Draw cfg.n_samples rows of the full shock vector."""
    n, d = int(cfg.n_samples), params.d
    arrays = params.kernel_arrays()
    n_blocks = math.ceil(n / BLOCK_SIZE)
    sizes = [min(BLOCK_SIZE, n - b * BLOCK_SIZE) for b in range(n_blocks)]
    job = lambda b: _run_block(arrays, int(cfg.seed), b, sizes[b], d, cfg.keep_latent, cfg.backend)
    if cfg.n_workers > 1 and n_blocks > 1:
        # The kernels release the GIL, so threads run blocks concurrently.
        with ThreadPoolExecutor(max_workers=int(cfg.n_workers)) as pool:
            parts = list(pool.map(job, range(n_blocks)))
    else:
        parts = [job(b) for b in range(n_blocks)]
    cat = lambda i: np.concatenate([p[i] for p in parts]) if parts[0][i] is not None else None
    return SampleBatch(cat(0), cat(1), cat(2), cat(3), cat(4))


def _tied_pairs(*cols):
    """Pairs of rows equal in every given column (cols already sorted jointly)."""
    n = cols[0].size
    new = np.zeros(n, dtype=bool)
    new[0] = True
    for c in cols:
        new[1:] |= c[1:] != c[:-1]
    runs = np.diff(np.append(np.flatnonzero(new), n))
    return int(np.sum(runs * (runs - 1) // 2))


def empirical_tau(x, y, backend=None) -> float:
    """Kendall's tau (C - D) / (n choose 2); tied pairs count as neither.

    Sorting by (x, y) leaves the discordant pairs as the strict inversions
    of y, counted by merge sort in O(n log n).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d arrays of equal length")
    n = x.size
    if n < 2:
        raise ValueError("need at least two observations")
    order = np.lexsort((y, x))
    xs, ys = x[order], y[order]
    n0 = n * (n - 1) // 2
    n1 = _tied_pairs(xs)
    n3 = _tied_pairs(xs, ys)
    n2 = _tied_pairs(np.sort(y))
    discordant = kernels.count_inversions(ys, backend)
    concordant = n0 - n1 - n2 + n3 - discordant
    return (concordant - discordant) / n0


def empirical_tau_reference(x, y) -> float:
    """Same statistic by checking all pairs; O(n^2), meant for n <= 2000."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    if n < 2:
        raise ValueError("need at least two observations")
    if n > REFERENCE_MAX_N:
        raise ValueError(f"reference estimator is limited to n <= {REFERENCE_MAX_N}")
    iu = np.triu_indices(n, 1)
    s = np.sign(x[iu[0]] - x[iu[1]]) * np.sign(y[iu[0]] - y[iu[1]])
    return float(s.sum()) / (n * (n - 1) / 2)


def empirical_tau_matrix(T, backend=None) -> np.ndarray:
    T = np.asarray(T, dtype=float)
    d = T.shape[1]
    out = np.eye(d)
    for i in range(d):
        for k in range(i + 1, d):
            out[i, k] = out[k, i] = empirical_tau(T[:, i], T[:, k], backend)
    return out


def empirical_simultaneous(batch: SampleBatch, t=0.0) -> float:
    """Fraction of rows where all lifetimes coincide and exceed t.

    Coincidence is read off the provenance flag (X_0 fired before every X_j),
    never from floating-point equality.
    """
    if batch.n == 0:
        raise ValueError("empty batch")
    if batch.d == 1:
        return float(np.mean(batch.T[:, 0] > t))
    return float(np.mean(batch.simultaneous & (batch.X0 > t)))


def tau_standard_error(n) -> float:
    """Standard deviation of the tau estimator under independence."""
    return math.sqrt(2.0 * (2 * n + 5) / (9.0 * n * (n - 1)))
