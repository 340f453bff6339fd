"""HAR and vector-HAR benchmarks fitted by direct h-step least squares."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, ParameterDomainError

WEEK, MONTH = 5, 22


@dataclass(frozen=True)
class HarFit:
    coef: np.ndarray
    forecast: float
    rank_deficient: bool
    nobs: int


def _rolling_means(x, k):
    c = np.concatenate([[0.0], np.cumsum(x)])
    return (c[k:] - c[:-k]) / k    # mean of x[s-k+1..s] for s = k-1..len-1


def har_regressors(rv) -> np.ndarray:
    """(daily, weekly, monthly) regressors for every ``t >= 21`` (0-based)."""
    rv = np.asarray(rv, dtype=float)
    if rv.ndim != 1:
        raise ParameterDomainError("expected a 1-D series")
    if rv.size < MONTH:
        raise InsufficientDataError(f"need at least {MONTH} observations")
    daily = rv[MONTH - 1:]
    weekly = _rolling_means(rv, WEEK)[MONTH - WEEK:]
    monthly = _rolling_means(rv, MONTH)
    return np.column_stack([daily, weekly, monthly])


def har_design(rv, h: int):
    """Design ``(1, RV_t, weekly_t, monthly_t)`` and response ``RV_{t+h}``.

    Rows run over ``t = 21, ..., len - 1 - h`` so there are ``len - 22 - h + 1``.
    """
    rv = np.asarray(rv, dtype=float)
    if h < 1:
        raise ParameterDomainError("h must be >= 1")
    if rv.size <= MONTH + h:
        raise InsufficientDataError(f"series length must exceed {MONTH + h}")
    R = har_regressors(rv)
    X = np.column_stack([np.ones(R.shape[0] - h), R[:-h]])
    y = rv[MONTH - 1 + h:]
    return X, y


def _ols(X, y):
    coef, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    return coef, bool(rank < X.shape[1])


def har_fit_forecast(rv, h: int, log: bool = False) -> HarFit:
    """Fit HAR for horizon ``h`` and forecast ``RV_{T+h}`` from the last row.

    ``log=True`` fits on ``log RV`` and returns ``exp`` of the fitted value.
    """
    rv = np.asarray(rv, dtype=float)
    x = np.log(rv) if log else rv
    X, y = har_design(x, h)
    coef, deficient = _ols(X, y)
    last = np.concatenate([[1.0], har_regressors(x)[-1]])
    f = float(last @ coef)
    return HarFit(coef, float(np.exp(f)) if log else f, deficient, X.shape[0])


def vhar_design(panel, target: int, h: int):
    """Row-wise VHAR design with ``1 + 3J`` columns: daily, weekly, monthly blocks."""
    panel = np.asarray(panel, dtype=float)
    if panel.ndim != 2:
        raise ParameterDomainError("panel must be (T, J)")
    T, J = panel.shape
    if not 0 <= target < J:
        raise ParameterDomainError("target index out of range")
    if h < 1:
        raise ParameterDomainError("h must be >= 1")
    if T <= MONTH + h:
        raise InsufficientDataError(f"series length must exceed {MONTH + h}")
    regs = [har_regressors(panel[:, k]) for k in range(J)]
    blocks = [np.column_stack([r[:, c] for r in regs]) for c in range(3)]
    full = np.column_stack(blocks)
    X = np.column_stack([np.ones(full.shape[0] - h), full[:-h]])
    y = panel[MONTH - 1 + h:, target]
    return X, y, np.concatenate([[1.0], full[-1]])


def vhar_fit_forecast(panel, target: int, h: int, log: bool = False) -> HarFit:
    """VHAR forecast of series ``target``; equation-by-equation OLS (diagonal errors)."""
    panel = np.asarray(panel, dtype=float)
    x = np.log(panel) if log else panel
    X, y, last = vhar_design(x, target, h)
    coef, deficient = _ols(X, y)
    f = float(last @ coef)
    return HarFit(coef, float(np.exp(f)) if log else f, deficient, X.shape[0])
