"""Optimal linear (conditional-mean) forecasts for time-reversible mfBm.

The generic path conditions on the full stacked history; closed forms for
one observation are provided as well and double as cross-checks.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import NumericalError, ParameterDomainError
from .kernel import ModelParams, cross_cov, level_cov_matrix, validate_existence, w_kernel
from .simulate import cholesky_with_jitter


@dataclass(frozen=True)
class ForecastResult:
    component: int
    h: int
    forecast: float
    weights: np.ndarray
    msfe: float
    anchor: float = 0.0
    anchored: bool = False

    @property
    def rmsfe(self) -> float:
        return float(np.sqrt(self.msfe))


def _require_reversible(p: ModelParams):
    if not p.time_reversible():
        raise ParameterDomainError("forecasting is implemented for time-reversible models (eta = 0)")


class ConditionalForecaster:
    """Conditional mean of ``B^{(j)}_{(t+h) delta}`` given ``B_{delta}, ..., B_{t delta}``.

    The level covariance of the ``t*d`` stacked observations is factorised
    once; weights for any ``(j, h)`` then cost one triangular solve pair.
    Observations are stacked time-major with components fastest, matching
    ``path.values[1:].ravel()``.
    """

    def __init__(self, p: ModelParams, t: int, delta: float):
        _require_reversible(p)
        if t < 1:
            raise ParameterDomainError("need at least one observation")
        self.p, self.t, self.delta = p, int(t), float(delta)
        self.times = np.arange(1, self.t + 1) * self.delta
        S = level_cov_matrix(p, self.times)
        self._chol = cholesky_with_jitter(S, "observation covariance")
        self._cache = {}

    def gamma(self, j: int, h: int) -> np.ndarray:
        target = (self.t + h) * self.delta
        d = self.p.d
        g = np.empty(self.t * d)
        for i in range(d):
            g[i::d] = cross_cov(self.times, target, i, j, self.p)
        return g

    def weights(self, j: int, h: int):
        """(weights, msfe) for component ``j`` at horizon ``h`` steps."""
        key = (j, h)
        if key not in self._cache:
            if h < 0:
                raise ParameterDomainError("horizon must be >= 0")
            g = self.gamma(j, h)
            w = linalg.cho_solve((self._chol, True), g, check_finite=False)
            var = self.p.sigma2[j] * ((self.t + h) * self.delta) ** (2 * self.p.hurst[j])
            msfe = float(var - g @ w)
            if msfe < -1e-9 * var:
                raise NumericalError("negative conditional variance; covariance ill-conditioned")
            self._cache[key] = (w, max(msfe, 0.0))
        return self._cache[key]

    def prefetch(self, pairs):
        """Solve for several ``(j, h)`` pairs with one multi-column solve."""
        todo = [(j, h) for j, h in pairs if (j, h) not in self._cache]
        if not todo:
            return
        if any(h < 0 for _, h in todo):
            raise ParameterDomainError("horizon must be >= 0")
        G = np.column_stack([self.gamma(j, h) for j, h in todo])
        Wm = linalg.cho_solve((self._chol, True), G, check_finite=False)
        for k, (j, h) in enumerate(todo):
            var = self.p.sigma2[j] * ((self.t + h) * self.delta) ** (2 * self.p.hurst[j])
            msfe = float(var - G[:, k] @ Wm[:, k])
            if msfe < -1e-9 * var:
                raise NumericalError("negative conditional variance; covariance ill-conditioned")
            self._cache[(j, h)] = (Wm[:, k].copy(), max(msfe, 0.0))

    def predict(self, obs, j: int, h: int):
        """``obs`` is (t, d) or a batch (R, t, d); returns the point forecast(s)."""
        w, _ = self.weights(j, h)
        obs = np.asarray(obs, dtype=float)
        if obs.shape[-2:] != (self.t, self.p.d):
            raise ParameterDomainError(f"expected observations of shape (..., {self.t}, {self.p.d})")
        return obs.reshape(obs.shape[:-2] + (-1,)) @ w

    def result(self, obs, j: int, h: int, anchor: float = 0.0, anchored: bool = False) -> ForecastResult:
        w, msfe = self.weights(j, h)
        return ForecastResult(j, h, float(self.predict(obs, j, h)) + anchor, w, msfe, anchor, anchored)


def forecast_conditional_mean(p: ModelParams, path, j: int, h: int) -> ForecastResult:
    """Forecast from every grid point of a pinned path (``B_0 = 0`` is not used)."""
    fc = ConditionalForecaster(p, path.n, path.delta)
    return fc.result(path.values[1:], j, h)


def forecast_window(p: ModelParams, window, j: int, h: int, delta: float,
                    anchor: bool = True) -> ForecastResult:
    """Forecast from a raw data window of shape (t, d).

    With ``anchor`` the first row is subtracted, the remaining ``t-1`` rows
    are treated as ``B_delta, ..., B_{(t-1) delta}`` and the offset is added
    back. Without it the rows are taken as ``B_delta, ..., B_{t delta}``.
    """
    window = np.asarray(window, dtype=float)
    if window.ndim == 1:
        window = window[:, None]
    if anchor:
        off = window[0]
        obs = window[1:] - off
        if obs.shape[0] < 1:
            raise ParameterDomainError("anchored forecasting needs at least two rows")
        fc = ConditionalForecaster(p, obs.shape[0], delta)
        return fc.result(obs, j, h, float(off[j]), True)
    fc = ConditionalForecaster(p, window.shape[0], delta)
    return fc.result(window, j, h)


def forecast_one_obs_bivariate(p: ModelParams, B_t, t: float, h: float) -> ForecastResult:
    """Closed-form forecast of component 0 from a single bivariate observation."""
    _require_reversible(p)
    if p.d != 2:
        raise ParameterDomainError("bivariate model required")
    rho = p.rho[0, 1]
    if abs(rho) >= 1.0:
        raise NumericalError("|rho| = 1: singular covariance")
    H1, H2 = p.hurst
    H = 0.5 * (H1 + H2)
    s1, s2 = p.sigma
    w1, wH = w_kernel(t, h, H1), w_kernel(t, h, H)
    k = 1.0 / (1.0 - rho**2)
    w11 = k * (w1 / t ** (2 * H1) - rho**2 * wH / t ** (2 * H))
    w12 = k * rho * s1 / s2 * (wH / t ** (2 * H2) - w1 / t ** (2 * H))
    msfe = (s1**2 * (t + h) ** (2 * H1) - s1**2 * k * w1**2 / t ** (2 * H1)
            + s1**2 * rho**2 * k * (2 * w1 * wH / t ** (2 * H) - wH**2 / t ** (2 * H2)))
    B_t = np.asarray(B_t, dtype=float)
    weights = np.array([w11, w12])
    return ForecastResult(0, h, float(weights @ B_t), weights, float(msfe))


def forecast_weights_general(p: ModelParams, t: float, h: float, j: int = 0) -> np.ndarray:
    """Weights on ``B_t^{(1..d)}`` for forecasting component ``j`` from one observation.

    ``w^{jk} = sum_l S_{jl} (S^{-1})_{lk} w(t, h, (H_j + H_l)/2) / t^{H_k + H_l}``
    with ``S`` the covariance of ``B_1``.
    """
    _require_reversible(p)
    S = p.cov_at_one()
    try:
        Sinv = linalg.inv(S)
    except linalg.LinAlgError as exc:
        raise NumericalError("singular covariance of B_1") from exc
    if not np.all(np.isfinite(Sinv)) or np.linalg.cond(S) > 1e14:
        raise NumericalError("singular covariance of B_1")
    H = p.hurst
    wl = w_kernel(t, h, 0.5 * (H[j] + H))           # indexed by l
    tl = t ** np.add.outer(H, H)                     # t^{H_l + H_k}, [l, k]
    return np.einsum("l,lk,l,lk->k", S[j], Sinv, wl, 1.0 / tl)


def msfe_exchangeable(d: int, rho: float, H1: float, H: float, t: float, h: float) -> float:
    """MSFE for component 1 given one observation of a d-dimensional exchangeable mfBm.

    Unit scales, common correlation ``rho`` and ``H_j = H`` for ``j >= 2``.
    Cross terms use the cross exponent ``(H1 + H)/2``.
    """
    if d < 1:
        raise ParameterDomainError("d must be >= 1")
    if d == 1:
        return float((t + h) ** (2 * H1) - w_kernel(t, h, H1) ** 2 / t ** (2 * H1))
    if not (-1.0 / (d - 1) < rho < 1.0):
        raise ParameterDomainError(f"rho must lie in (-1/(d-1), 1) for d = {d}")
    Hc = 0.5 * (H1 + H)
    w1, wc = w_kernel(t, h, H1), w_kernel(t, h, Hc)
    a = 1 + (d - 2) * rho
    den = a - (d - 1) * rho**2
    red = (a * w1**2 / t ** (2 * H1) - 2 * (d - 1) * rho**2 * w1 * wc / t ** (H1 + H)
           + (d - 1) * rho**2 * wc**2 / t ** (2 * H)) / den
    return float((t + h) ** (2 * H1) - red)


def exchangeable_params(d: int, rho: float, H1: float, H: float) -> ModelParams:
    hurst = np.full(d, H)
    hurst[0] = H1
    return ModelParams(hurst, np.ones(d), rho)


# ----------------------------------------------------------- figure data

def weight_curves(H1=0.4, rho=0.5, t=1.0, h=1.0, grid=None):
    """Relative weights and own-weight ratio against ``H2`` (one observation)."""
    grid = np.linspace(0.01, 0.99, 99) if grid is None else np.asarray(grid)
    rows = []
    for H2 in grid:
        p = ModelParams.bivariate(H1, H2, rho=rho)
        w = forecast_one_obs_bivariate(p, [0.0, 0.0], t, h).weights
        tot = np.abs(w).sum()
        rows.append((H2, w[0] / tot, w[1] / tot, w[0] * t ** (2 * H1) / w_kernel(t, h, H1),
                     bool(validate_existence(p))))
    return np.array(rows, dtype=float)


def relative_msfe_curve(H1=0.4, rho=0.5, t=1.0, h=1.0, grid=None):
    """Bivariate over univariate MSFE against ``H2``."""
    grid = np.linspace(0.01, 0.99, 99) if grid is None else np.asarray(grid)
    uni = msfe_exchangeable(1, 0.0, H1, H1, t, h)
    out = []
    for H2 in grid:
        p = ModelParams.bivariate(H1, H2, rho=rho)
        out.append((H2, forecast_one_obs_bivariate(p, [0, 0], t, h).msfe / uni))
    return np.array(out)


def relative_msfe_dimension(rho=0.8, H1=0.4, H=0.1, t=1.0, h=1.0, dims=None):
    """Exchangeable MSFE relative to the univariate one, against the dimension."""
    dims = np.arange(1, 1001) if dims is None else np.asarray(dims)
    uni = msfe_exchangeable(1, rho, H1, H, t, h)
    return np.array([(d, msfe_exchangeable(int(d), rho, H1, H, t, h) / uni) for d in dims])
