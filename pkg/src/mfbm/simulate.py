"""Exact Gaussian sampling of mfBm on an equispaced grid.

Random numbers come from numpy's PCG64 bit generator seeded through
``SeedSequence``; replication ``r`` under base seed ``b`` uses the entropy
pool ``[b, r]``, so any subset of replications can be regenerated alone.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import linalg

from .errors import NumericalError, ParameterDomainError
from .kernel import ModelParams, increment_cov_matrix, validate_existence

JITTER_LADDER = (0.0, 1e-12, 1e-10, 1e-8)


@dataclass(frozen=True)
class SamplePath:
    """Levels ``B_{j delta}``, ``j = 0..n``, as an (n+1, d) array; row 0 is zero."""

    values: np.ndarray
    delta: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape[0] < 2:
            raise ParameterDomainError("a path needs at least one increment")
        if not np.all(np.isfinite(v)):
            raise ParameterDomainError("path values must be finite")
        if self.delta <= 0:
            raise ParameterDomainError("delta must be positive")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0] - 1

    @property
    def d(self) -> int:
        return self.values.shape[1]

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n + 1) * self.delta

    def increments(self) -> "IncrementSeries":
        return IncrementSeries(np.diff(self.values, axis=0), self.delta)

    def component(self, j: int) -> np.ndarray:
        return self.values[:, j]


@dataclass(frozen=True)
class IncrementSeries:
    diffs: np.ndarray
    delta: float

    def to_path(self) -> SamplePath:
        d = self.diffs.shape[1]
        return SamplePath(np.vstack([np.zeros((1, d)), np.cumsum(self.diffs, axis=0)]), self.delta)


def build_increment_cov(p: ModelParams, n: int, delta: float) -> np.ndarray:
    """Stacked (n*d, n*d) increment covariance; see :func:`kernel.increment_cov_matrix`."""
    return increment_cov_matrix(p, n, delta)


def cholesky_with_jitter(M: np.ndarray, what: str = "covariance") -> np.ndarray:
    """Lower Cholesky factor, retrying with diagonal jitter ``eps * trace / dim``."""
    scale = np.trace(M) / M.shape[0]
    for eps in JITTER_LADDER:
        A = M if eps == 0.0 else M + eps * scale * np.eye(M.shape[0])
        try:
            return linalg.cholesky(A, lower=True, check_finite=False)
        except linalg.LinAlgError:
            continue
    raise NumericalError(f"{what} numerically indefinite")


def replication_rng(seed: int, rep: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(rep)])))


class PathSampler:
    """Factorises the increment covariance once; draws any number of paths.

    >>> s = PathSampler(ModelParams.bivariate(0.1, 0.4, rho=0.4), n=100, delta=1/250)
    >>> s.sample(seed=1).values.shape
    (101, 2)
    """

    def __init__(self, p: ModelParams, n: int, delta: float, check: bool = True):
        if n < 1:
            raise ParameterDomainError("n must be >= 1")
        if check:
            validate_existence(p).raise_if_invalid()
        self.params = p
        self.n = int(n)
        self.delta = float(delta)
        self.chol = cholesky_with_jitter(build_increment_cov(p, self.n, self.delta),
                                         "increment covariance")

    def _levels(self, z: np.ndarray) -> np.ndarray:
        # z: (n*d, R) standard normals -> (R, n+1, d) levels
        d, n = self.params.d, self.n
        x = (self.chol @ z).T.reshape(-1, n, d)
        out = np.zeros((x.shape[0], n + 1, d))
        np.cumsum(x, axis=1, out=out[:, 1:, :])
        return out

    def normals(self, seed: int, rep: int = 0) -> np.ndarray:
        return replication_rng(seed, rep).standard_normal(self.n * self.params.d)

    def sample(self, seed: int, rep: int = 0) -> SamplePath:
        z = self.normals(seed, rep)[:, None]
        return SamplePath(self._levels(z)[0], self.delta)

    def sample_many(self, seed: int, reps, out_dtype=float) -> np.ndarray:
        """Levels for replications ``reps`` as an (R, n+1, d) array."""
        reps = list(reps)
        z = np.empty((self.n * self.params.d, len(reps)))
        for c, r in enumerate(reps):
            z[:, c] = self.normals(seed, r)
        return self._levels(z).astype(out_dtype, copy=False)


@lru_cache(maxsize=8)
def _cached_sampler(key):
    hurst, sigma2, rho, eta, n, delta = key
    d = len(hurst)
    p = ModelParams(np.array(hurst), np.array(sigma2),
                    np.array(rho).reshape(d, d), np.array(eta).reshape(d, d))
    return PathSampler(p, n, delta)


def sampler_for(p: ModelParams, n: int, delta: float) -> PathSampler:
    key = (tuple(p.hurst), tuple(p.sigma2), tuple(p.rho.ravel()), tuple(p.eta.ravel()),
           int(n), float(delta))
    return _cached_sampler(key)


def sample_path(p: ModelParams, n: int, delta: float, seed: int, rep: int = 0) -> SamplePath:
    """Exact draw of ``B_0, ..., B_{n delta}``; deterministic in ``(p, n, delta, seed, rep)``."""
    return sampler_for(p, n, delta).sample(seed, rep)
