"""Covariance model of multivariate fractional Brownian motion.

Components are indexed from 0. All kernel functions broadcast over numpy
arrays of times/lags.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import binom, gamma as gamma_fn

from .errors import ExistenceError, ParameterDomainError

LOG_CASE_TOL = 1e-9
PSD_REL_TOL = 1e-8
N_CHECK = 64


def _check_hurst(H):
    H = np.asarray(H, dtype=float)
    if np.any(~np.isfinite(H)) or np.any(H <= 0.0) or np.any(H >= 1.0):
        raise ParameterDomainError(f"Hurst exponent must lie in (0, 1), got {H}")
    return H


@dataclass(frozen=True)
class ModelParams:
    """Parameters of a d-dimensional mfBm.

    Parameters
    ----------
    hurst : (d,) array
        Component Hurst exponents in (0, 1).
    sigma2 : (d,) array
        Scale variances, ``Var(B^{(i)}_1)``.
    rho : (d, d) array
        Correlation matrix; symmetric with unit diagonal.
    eta : (d, d) array
        Antisymmetric asymmetry matrix. All zeros for the time-reversible
        model. When ``H_i + H_j = 1`` the pair's entries are read as the
        log-form parameters (rho tilde, eta tilde).
    """

    hurst: np.ndarray
    sigma2: np.ndarray
    rho: np.ndarray
    eta: np.ndarray = field(default=None)

    def __post_init__(self):
        hurst = np.atleast_1d(np.asarray(self.hurst, dtype=float))
        d = hurst.size
        sigma2 = np.broadcast_to(np.asarray(self.sigma2, dtype=float), (d,)).copy()
        rho = np.asarray(self.rho, dtype=float)
        if rho.ndim == 0:
            rho = np.full((d, d), float(rho))
            np.fill_diagonal(rho, 1.0)
        eta = np.zeros((d, d)) if self.eta is None else np.asarray(self.eta, dtype=float)
        if eta.ndim == 0:
            e = float(eta)
            eta = np.triu(np.full((d, d), e), 1) - np.tril(np.full((d, d), e), -1)
        object.__setattr__(self, "hurst", hurst)
        object.__setattr__(self, "sigma2", sigma2)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "eta", eta)
        self._validate_structure()
        for a in (hurst, sigma2, rho, eta):
            a.setflags(write=False)

    def _validate_structure(self):
        d = self.d
        if d < 1:
            raise ParameterDomainError("dimension must be >= 1")
        _check_hurst(self.hurst)
        if np.any(~np.isfinite(self.sigma2)) or np.any(self.sigma2 <= 0):
            raise ParameterDomainError(f"sigma2 must be positive, got {self.sigma2}")
        if self.rho.shape != (d, d) or self.eta.shape != (d, d):
            raise ParameterDomainError("rho and eta must be d x d matrices")
        if not np.all(np.isfinite(self.rho)) or not np.all(np.isfinite(self.eta)):
            raise ParameterDomainError("rho and eta must be finite")
        if not np.allclose(self.rho, self.rho.T, atol=1e-12, rtol=0):
            raise ParameterDomainError("rho must be symmetric")
        if not np.allclose(np.diag(self.rho), 1.0, atol=1e-12, rtol=0):
            raise ParameterDomainError("rho must have unit diagonal")
        if np.any(np.abs(self.rho) > 1.0 + 1e-12):
            raise ParameterDomainError("correlations must lie in [-1, 1]")
        if not np.allclose(self.eta, -self.eta.T, atol=1e-12, rtol=0):
            raise ParameterDomainError("eta must be antisymmetric with zero diagonal")

    @property
    def d(self) -> int:
        return self.hurst.size

    @property
    def sigma(self) -> np.ndarray:
        return np.sqrt(self.sigma2)

    def time_reversible(self) -> bool:
        return bool(np.all(self.eta == 0.0))

    def cov_at_one(self) -> np.ndarray:
        """Covariance matrix of ``B_1``: ``rho_ij sigma_i sigma_j``."""
        s = self.sigma
        return self.rho * np.outer(s, s)

    def subset(self, idx) -> "ModelParams":
        idx = list(idx)
        ix = np.ix_(idx, idx)
        return ModelParams(self.hurst[idx], self.sigma2[idx], self.rho[ix], self.eta[ix])

    @classmethod
    def bivariate(cls, H1, H2, sigma2=(1.0, 1.0), rho=0.0, eta=0.0) -> "ModelParams":
        return cls(np.array([H1, H2]), np.asarray(sigma2, float),
                   np.array([[1.0, rho], [rho, 1.0]]),
                   np.array([[0.0, eta], [-eta, 0.0]]))

    @classmethod
    def from_covariance(cls, hurst, cov) -> "ModelParams":
        """Time-reversible params from the covariance matrix of ``B_1``."""
        cov = np.asarray(cov, dtype=float)
        s = np.sqrt(np.diag(cov))
        return cls(np.asarray(hurst, float), s**2, cov / np.outer(s, s))


def _apow(x, e):
    return np.abs(x) ** e


def w_kernel(t, h, H):
    """Univariate fBm covariance ``Cov(B_{t+h}, B_t)`` for unit scale."""
    _check_hurst(H)
    e = 2.0 * np.asarray(H, dtype=float)
    return 0.5 * (_apow(np.add(t, h), e) + _apow(t, e) - _apow(h, e))


def _sign(x):
    return np.sign(x)


def _xlogx(x):
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    out = np.zeros_like(ax)
    nz = ax > 0
    out[nz] = x[nz] * np.log(ax[nz])
    return out


def is_log_case(Hsum) -> bool:
    return abs(float(Hsum) - 1.0) < LOG_CASE_TOL


def cross_cov(s, t, i: int, j: int, p: ModelParams):
    """``Cov(B^{(i)}_s, B^{(j)}_t)``, broadcasting over ``s`` and ``t``."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if i == j:
        return p.sigma2[i] * w_kernel(t, s - t, p.hurst[i])
    ss = np.sqrt(p.sigma2[i] * p.sigma2[j])
    rho, eta = p.rho[i, j], p.eta[i, j]
    Hs = p.hurst[i] + p.hurst[j]
    if is_log_case(Hs):
        return 0.5 * ss * (rho * (np.abs(s) + np.abs(t) - np.abs(s - t))
                           + eta * (_xlogx(t) - _xlogx(s) - _xlogx(t - s)))
    if eta == 0.0:
        return 0.5 * ss * rho * (_apow(s, Hs) + _apow(t, Hs) - _apow(t - s, Hs))
    return 0.5 * ss * ((rho + eta * _sign(s)) * _apow(s, Hs)
                       + (rho - eta * _sign(t)) * _apow(t, Hs)
                       - (rho - eta * _sign(t - s)) * _apow(t - s, Hs))


_SERIES_LAG = 8
_SERIES_TERMS = 12


def gamma_lag(l, Hsum):
    """Normalised increment autocorrelation at integer lag ``l``.

    For ``|l| >= 8`` the second difference is summed as the even binomial
    series ``|l|^s sum_k binom(s, 2k) |l|^{-2k}``, which avoids the
    cancellation of the direct formula at large lags.
    """
    l = np.asarray(l, dtype=float)
    s = float(Hsum)
    out = 0.5 * (_apow(l + 1, s) + _apow(l - 1, s) - 2.0 * _apow(l, s))
    far = np.abs(l) >= _SERIES_LAG
    if np.any(far):
        a = np.abs(l[far]) if l.ndim else np.abs(l)
        x2 = a**-2.0
        acc = np.zeros_like(a)
        for k in range(_SERIES_TERMS, 0, -1):   # Horner in x^2
            acc = (acc + binom(s, 2 * k)) * x2
        if l.ndim:
            out[far] = a**s * acc
        else:
            out = a**s * acc
    return out if out.ndim else float(out)


def increment_cov(lag, i: int, j: int, p: ModelParams, delta: float):
    """``Cov(Delta_k B^{(i)}, Delta_{k-lag} B^{(j)})`` on a grid of step ``delta``.

    Uses ``sign(0) = 0``; the H_i + H_j = 1 pair case is obtained by
    differencing :func:`cross_cov`.
    """
    lag = np.asarray(lag)
    Hs = p.hurst[i] + p.hurst[j]
    if i != j and is_log_case(Hs):
        k = lag.astype(float)
        d = float(delta)
        c = lambda a, b: cross_cov(a * d, b * d, i, j, p)
        return c(k, 0.0) - c(k, -1.0) - c(k - 1.0, 0.0) + c(k - 1.0, -1.0)
    if i == j:
        coef = p.sigma2[i]
    else:
        coef = (p.rho[i, j] + p.eta[i, j] * _sign(lag)) * np.sqrt(p.sigma2[i] * p.sigma2[j])
    return coef * delta**Hs * gamma_lag(lag, Hs)


def increment_cov_matrix(p: ModelParams, n: int, delta: float) -> np.ndarray:
    """Covariance of the stacked increments, time-major with components fastest.

    Row ``k*d + i`` corresponds to ``Delta_{k+1} B^{(i)}``.
    """
    d = p.d
    # block-Toeplitz: evaluate each lag once, then gather
    idx = np.subtract.outer(np.arange(n), np.arange(n)) + (n - 1)
    all_lags = np.arange(-(n - 1), n)
    M = np.empty((n * d, n * d))
    for i in range(d):
        for j in range(i, d):
            block = np.asarray(increment_cov(all_lags, i, j, p, delta))[idx]
            M[i::d, j::d] = block
            M[j::d, i::d] = block.T
    return M


def level_cov_matrix(p: ModelParams, times) -> np.ndarray:
    """Covariance of the stacked levels ``(B_{t_1}, ..., B_{t_m})``, components fastest."""
    times = np.asarray(times, dtype=float)
    d, m = p.d, times.size
    S, T = np.meshgrid(times, times, indexing="ij")
    M = np.empty((m * d, m * d))
    for i in range(d):
        for j in range(i, d):
            block = cross_cov(S, T, i, j, p)
            M[i::d, j::d] = block
            M[j::d, i::d] = block.T
    return M


def rho_max(H1: float, H2: float) -> float:
    """Largest admissible |rho| of a bivariate time-reversible fBm."""
    _check_hurst([H1, H2])
    H = 0.5 * (H1 + H2)
    num = np.sin(np.pi * H1) * np.sin(np.pi * H2) * gamma_fn(2 * H1 + 1) * gamma_fn(2 * H2 + 1)
    return float(np.sqrt(num) / (np.sin(np.pi * H) * gamma_fn(2 * H + 1)))


@dataclass(frozen=True)
class ExistenceVerdict:
    valid: bool
    min_eigenvalue: float
    tolerance: float
    reason: str = ""

    def __bool__(self):
        return self.valid

    def raise_if_invalid(self):
        if not self.valid:
            raise ExistenceError(f"parameters outside existence region: {self.reason}",
                                 self.min_eigenvalue)
        return self


def validate_existence(p: ModelParams, n_check: int = N_CHECK) -> ExistenceVerdict:
    """Check that ``p`` yields a positive semi-definite increment covariance.

    The stacked increment covariance of ``n_check`` steps must have no
    eigenvalue below ``-1e-8 * lambda_max``. For time-reversible pairs the
    closed-form correlation bound is checked too; it binds before the
    finite-grid check does.
    """
    if p.d == 1:
        return ExistenceVerdict(True, 1.0, 0.0)
    M = increment_cov_matrix(p, n_check, 1.0)
    eig = np.linalg.eigvalsh(M)
    tol = PSD_REL_TOL * eig[-1]
    lam = float(eig[0])
    if lam < -tol:
        return ExistenceVerdict(False, lam, tol,
                                f"increment covariance has eigenvalue {lam:.3e}")
    for i in range(p.d):
        for j in range(i + 1, p.d):
            if p.eta[i, j] != 0.0 or is_log_case(p.hurst[i] + p.hurst[j]):
                continue
            bound = rho_max(p.hurst[i], p.hurst[j])
            if abs(p.rho[i, j]) > bound + 1e-12:
                return ExistenceVerdict(
                    False, lam, tol,
                    f"|rho[{i},{j}]| = {abs(p.rho[i, j]):.6g} exceeds rho_max = {bound:.6g}")
    return ExistenceVerdict(True, lam, tol)
