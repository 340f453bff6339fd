"""Closed-form moment estimators for mfBm and their asymptotic theory.

All estimators take level series with time along the last axis, so a
batch of replications can be passed as an ``(R, n+1)`` array.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, asdict
from functools import lru_cache

import numpy as np
from scipy import special, stats

from .errors import (DegeneratePathError, InsufficientDataError, ParameterDomainError,
                     UnidentifiedError)
from .kernel import gamma_lag, is_log_case

LOG2 = math.log(2.0)
THEORY_HMAX = 0.75
SERIES_HEAD = 2000


# ---------------------------------------------------------------- sums

def _incr(x):
    return np.diff(np.asarray(x, dtype=float), axis=-1)


def _lag2(x):
    x = np.asarray(x, dtype=float)
    return x[..., 2:] - x[..., :-2]


def _qv(x):
    """(sum of squared increments, sum of squared lag-2 increments)."""
    return np.sum(_incr(x) ** 2, axis=-1), np.sum(_lag2(x) ** 2, axis=-1)


def _check_length(x, minimum):
    n = np.shape(x)[-1] - 1
    if n < minimum:
        raise InsufficientDataError(f"need at least {minimum} increments, got {n}")
    return n


def estimate_hurst(x):
    """Hurst exponent from the ratio of lag-2 to lag-1 quadratic variation.

    ``H = log(sum (B_{k+1} - B_{k-1})^2 / sum (B_k - B_{k-1})^2) / (2 log 2)``.
    The raw value is returned even when it leaves (0, 1); use
    :func:`hurst_in_range` to flag it.
    """
    _check_length(x, 3)
    s1, s2 = _qv(x)
    if np.any(s1 <= 0) or np.any(s2 <= 0):
        raise DegeneratePathError("quadratic variation is zero")
    return np.log(s2 / s1) / (2.0 * LOG2)


def hurst_in_range(H) -> np.ndarray:
    H = np.asarray(H)
    return (H > 0.0) & (H < 1.0)


def estimate_sigma2(x, H_hat, delta: float):
    """Scale estimate ``sum (Delta_k B)^2 / (n delta^{2 H_hat})``."""
    n = _check_length(x, 1)
    s1 = np.sum(_incr(x) ** 2, axis=-1)
    return s1 / (n * delta ** (2.0 * np.asarray(H_hat)))


def estimate_rho(x, y):
    """Correlation of increments (scale factors cancel)."""
    _check_length(x, 2)
    dx, dy = _incr(x), _incr(y)
    if dx.shape != dy.shape:
        raise ParameterDomainError("series must have equal length")
    den = np.sqrt(np.sum(dx**2, axis=-1) * np.sum(dy**2, axis=-1))
    if np.any(den <= 0):
        raise DegeneratePathError("zero increment variance")
    return np.clip(np.sum(dx * dy, axis=-1) / den, -1.0, 1.0)


def estimate_eta(x, y):
    """Asymmetry estimate from lead-lag products of increments.

    Antisymmetric in its arguments. The denominator carries the factor
    ``2^{H1+H2} - 2`` and vanishes when ``H1 + H2 = 1``.
    """
    _check_length(x, 3)
    dx, dy = _incr(x), _incr(y)
    if dx.shape != dy.shape:
        raise ParameterDomainError("series must have equal length")
    num = np.sum(dy[..., 1:] * dx[..., :-1] - dx[..., 1:] * dy[..., :-1], axis=-1)
    sx1, sx2 = _qv(x)
    sy1, sy2 = _qv(y)
    den = np.sqrt(sx2 * sy2) - 2.0 * np.sqrt(sx1 * sy1)
    scale = np.sqrt(sx1 * sy1)
    if np.any(scale <= 0):
        raise DegeneratePathError("zero increment variance")
    if np.any(np.abs(den) < 1e-12 * scale):
        raise UnidentifiedError("H1 + H2 ~ 1: asymmetry parameter unidentified")
    return num / den


# ------------------------------------------------------- series helpers

def _pattern(shifts, coefs):
    shifts = np.asarray(shifts, float)
    coefs = np.asarray(coefs, float)
    return shifts, coefs


_A = _pattern([1, -1, 0], [1, 1, -2])       # |r+1| + |r-1| - 2|r|
_A2 = _pattern([2, -2, 0], [1, 1, -2])      # |r+2| + |r-2| - 2|r|
_C = _pattern([1, -2, 0, -1], [1, 1, -1, -1])
_P = _pattern([2, 0, 1], [1, 1, -2])        # |r+2| + |r| - 2|r+1|
_Q = _pattern([0, -2, -1], [1, 1, -2])      # |r| + |r-2| - 2|r-1|

_EXPANSION_START = 50.0
_EXPANSION_TERMS = 14


def _combo(e, pat, x):
    """``sum_i c_i |x + s_i|^e`` evaluated without cancellation for large x."""
    shifts, coefs = pat
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x < _EXPANSION_START
    if np.any(small):
        xs = x[small]
        out[small] = sum(c * np.abs(xs + s) ** e for s, c in zip(shifts, coefs))
    if np.any(~small):
        xl = x[~small]
        acc = np.zeros_like(xl)
        for k in range(_EXPANSION_TERMS):
            m_k = float(np.sum(coefs * shifts**k))
            if m_k != 0.0:
                acc += special.binom(e, k) * m_k * xl ** (-k)
        out[~small] = xl**e * acc
    return out


def _expansion(e, pat):
    """Coefficients ``b_k`` with ``combo(x) = x^e sum_k b_k x^{-k}`` for large x."""
    shifts, coefs = pat
    return np.array([special.binom(e, k) * float(np.sum(coefs * shifts**k))
                     for k in range(_EXPANSION_TERMS)])


def _series(products, head: int = SERIES_HEAD):
    """``sum_{r>=1} sum_m w_m combo(e1_m, P1_m, r) combo(e2_m, P2_m, r)``.

    The first ``head`` terms are summed exactly. The remainder is the
    integral from ``head + 1/2`` (midpoint rule, plus the first
    Euler-Maclaurin correction), integrated term by term from the large-x
    expansion of each product.
    """
    r = np.arange(1, head + 1, dtype=float)
    a = head + 0.5
    total = 0.0
    for w, e1, p1, e2, p2 in products:
        total += w * float(np.sum(_combo(e1, p1, r) * _combo(e2, p2, r)))
        c = np.convolve(_expansion(e1, p1), _expansion(e2, p2))[:_EXPANSION_TERMS]
        p = e1 + e2
        k = np.arange(c.size)
        nz = c != 0.0
        if np.any(k[nz] - p - 1 <= 0):
            raise ParameterDomainError("series diverges for these exponents")
        kk, cc = k[nz], c[nz]
        integral = np.sum(cc * a ** (p - kk + 1) / (kk - p - 1))
        deriv = np.sum(cc * (p - kk) * a ** (p - kk - 1))
        total += w * float(integral + deriv / 24.0)
    return total


def _check_theory_range(*H):
    for h in H:
        if not (0.0 < h < THEORY_HMAX):
            raise ParameterDomainError(
                f"asymptotic theory requires 0 < H < 0.75, got {h}")


def _key(*v):
    return tuple(round(float(a), 10) for a in v)


@lru_cache(maxsize=4096)
def _avar_hurst(H, head):
    e = 2.0 * H
    s1 = _series([(1.0, e, _A, e, _A)], head)
    s2 = _series([(1.0, e, _A2, e, _A2)], head)
    s3 = _series([(1.0, e, _C, e, _C)], head)
    return (4.0 + s1 + 2.0 ** (-4 * H) * s2 - 2.0 ** (1 - 2 * H) * s3) / (4.0 * LOG2**2)


def avar_hurst(H: float, head: int = SERIES_HEAD) -> float:
    """Asymptotic variance of ``sqrt(n) (H_hat - H)``."""
    _check_theory_range(H)
    return _avar_hurst(*_key(H), head)


def avar_sigma2(H: float, sigma2: float, head: int = SERIES_HEAD) -> float:
    """Asymptotic variance of ``sqrt(n)/log(1/delta) * (sigma2_hat - sigma2)``."""
    return 4.0 * sigma2**2 * avar_hurst(H, head)


def se_sigma2(H: float, sigma2: float, n: int, delta: float) -> float:
    """Standard error of the scale estimate; the rate carries ``log(1/delta)``."""
    return math.log(1.0 / delta) * math.sqrt(avar_sigma2(H, sigma2) / n)


@lru_cache(maxsize=4096)
def _upsilon(kind, H1, H2, head):
    if kind == 1:
        s = H1 + H2
        return 0.5 * _series([(1.0, s, _A, s, _A)], head)
    if kind == 2:
        return 0.5 * _series([(1.0, 2 * H1, _A, 2 * H2, _A)], head)
    return _series([(1.0, 2 * H1, _A, H1 + H2, _A)], head)


def upsilon1(H1, H2, head=SERIES_HEAD):
    return _upsilon(1, *_key(H1, H2), head)


def upsilon2(H1, H2, head=SERIES_HEAD):
    return _upsilon(2, *_key(H1, H2), head)


def upsilon3(H1, H2, head=SERIES_HEAD):
    return _upsilon(3, *_key(H1, H2), head)


def avar_rho(H1: float, H2: float, rho: float, head: int = SERIES_HEAD) -> float:
    """Asymptotic variance of ``sqrt(n) (rho_hat - rho)`` for the time-reversible model."""
    _check_theory_range(H1, H2)
    if abs(rho) >= 1.0:
        raise ParameterDomainError("|rho| must be < 1")
    r2 = rho * rho
    inner = ((1 + r2) * upsilon1(H1, H2, head) + upsilon1(H1, H1, head) / 2
             + upsilon1(H2, H2, head) / 2 - upsilon3(H1, H2, head) - upsilon3(H2, H1, head))
    return (1 - r2) ** 2 + r2 * inner + upsilon2(H1, H2, head)


@lru_cache(maxsize=4096)
def _eta_parts(H1, H2, head):
    s = H1 + H2
    e1, e2 = 2 * H1, 2 * H2
    g1, g2, g12 = gamma_lag(1, e1), gamma_lag(1, e2), gamma_lag(1, s)
    sA = _series([(1.0, s, _A, s, _A), (-1.0, s, _P, s, _Q)], head)
    sB = _series([(2.0, e1, _A, e2, _A), (-1.0, e1, _P, e2, _Q), (-1.0, e2, _P, e1, _Q)], head)
    pre = (2.0**s - 2.0) ** -2
    base = pre * (2 * (1 - g1 * g2) + 0.5 * sB)
    slope = pre * (2 * (g12**2 - 1) - sA)
    return base, slope


def avar_eta(H1: float, H2: float, rho: float, head: int = SERIES_HEAD) -> float:
    """Asymptotic variance of ``sqrt(n) eta_hat`` under ``eta = 0``."""
    _check_theory_range(H1, H2)
    if is_log_case(H1 + H2):
        raise UnidentifiedError("H1 + H2 ~ 1: asymmetry estimator unidentified")
    if abs(rho) >= 1.0:
        raise ParameterDomainError("|rho| must be < 1")
    base, slope = _eta_parts(*_key(H1, H2), head)
    return base + rho * rho * slope


# ------------------------------------------------------------- testing

@dataclass(frozen=True)
class ReversibilityTest:
    statistic: float
    p_value: float
    reject: bool
    alpha: float
    out_of_theory: bool = False


def _clip_theory(H):
    return float(np.clip(H, 1e-3, THEORY_HMAX - 1e-3))


def reversibility_statistic(n, eta_hat, H1_hat, H2_hat, rho_hat):
    H1c, H2c = _clip_theory(H1_hat), _clip_theory(H2_hat)
    rc = float(np.clip(rho_hat, -1 + 1e-9, 1 - 1e-9))
    return math.sqrt(n) * abs(eta_hat) / math.sqrt(avar_eta(H1c, H2c, rc))


def test_time_reversibility(x, y, alpha: float = 0.05) -> ReversibilityTest:
    """Wald-type test of ``eta = 0`` using plug-in asymptotic variance.

    When an estimated Hurst exponent falls outside (0, 0.75) the variance is
    evaluated at the clipped value and ``out_of_theory`` is set.
    """
    if not 0 < alpha < 1:
        raise ParameterDomainError("alpha must lie in (0, 1)")
    n = _check_length(x, 3)
    H1, H2 = float(estimate_hurst(x)), float(estimate_hurst(y))
    rho = float(estimate_rho(x, y))
    eta = float(estimate_eta(x, y))
    stat = reversibility_statistic(n, eta, H1, H2, rho)
    p = 2.0 * stats.norm.sf(stat)
    crit = stats.norm.ppf(1 - alpha / 2)
    flag = not (0 < H1 < THEORY_HMAX and 0 < H2 < THEORY_HMAX)
    return ReversibilityTest(stat, float(p), bool(stat > crit), alpha, flag)


test_time_reversibility.__test__ = False  # not a pytest test


# --------------------------------------------------------------- report

@dataclass
class ComponentEstimate:
    index: int
    name: str
    H_hat: float
    se_H: float
    sigma2_hat: float
    se_sigma2: float
    boundary_flag: bool = False


@dataclass
class PairEstimate:
    i: int
    j: int
    rho_hat: float
    se_rho: float
    eta_hat: float
    se_eta: float
    statistic: float
    p_value: float
    reject: bool
    flags: str = ""


@dataclass
class EstimateReport:
    n: int
    delta: float
    alpha: float
    components: list = field(default_factory=list)
    pairs: list = field(default_factory=list)
    method: str = "BYZ"

    @property
    def hurst(self) -> np.ndarray:
        return np.array([c.H_hat for c in self.components])

    @property
    def sigma2(self) -> np.ndarray:
        return np.array([c.sigma2_hat for c in self.components])

    def rho_matrix(self) -> np.ndarray:
        d = len(self.components)
        R = np.eye(d)
        for p in self.pairs:
            R[p.i, p.j] = R[p.j, p.i] = p.rho_hat
        return R

    def eta_matrix(self) -> np.ndarray:
        d = len(self.components)
        E = np.zeros((d, d))
        for p in self.pairs:
            E[p.i, p.j], E[p.j, p.i] = p.eta_hat, -p.eta_hat
        return E

    def confidence_intervals(self, level: float = 0.95) -> dict:
        """Wald intervals ``estimate -/+ z * se`` keyed by ``(param, i)`` or ``(param, i, j)``.

        Eta intervals use the null variance; pairs flagged ``se-under-null``
        therefore carry only indicative intervals.
        """
        if not 0 < level < 1:
            raise ParameterDomainError("level must lie in (0, 1)")
        z = stats.norm.ppf(0.5 + level / 2)
        out = {}
        for c in self.components:
            out[("H", c.index)] = (c.H_hat - z * c.se_H, c.H_hat + z * c.se_H)
            out[("sigma2", c.index)] = (c.sigma2_hat - z * c.se_sigma2, c.sigma2_hat + z * c.se_sigma2)
        for p in self.pairs:
            out[("rho", p.i, p.j)] = (max(-1.0, p.rho_hat - z * p.se_rho), min(1.0, p.rho_hat + z * p.se_rho))
            out[("eta", p.i, p.j)] = (p.eta_hat - z * p.se_eta, p.eta_hat + z * p.se_eta)
        return out

    def to_csv(self, header_comment: str | None = None) -> str:
        """Flat CSV: one row per component, then one row per pair."""
        buf = io.StringIO()
        if header_comment:
            buf.write(f"# {header_comment}\n")
        cols = ["method", "kind", "i", "j", "name", "H_hat", "se_H", "sigma2_hat", "se_sigma2",
                "rho_hat", "se_rho", "eta_hat", "se_eta", "statistic", "p_value", "reject", "flags",
                "n", "delta"]
        w = csv.DictWriter(buf, cols, lineterminator="\n")
        w.writeheader()
        for c in self.components:
            w.writerow({"method": self.method, "kind": "component", "i": c.index, "j": "",
                        "name": c.name, "H_hat": _fmt(c.H_hat), "se_H": _fmt(c.se_H),
                        "sigma2_hat": _fmt(c.sigma2_hat), "se_sigma2": _fmt(c.se_sigma2),
                        "flags": "boundary" if c.boundary_flag else "",
                        "n": self.n, "delta": _fmt(self.delta)})
        for p in self.pairs:
            w.writerow({"method": self.method, "kind": "pair", "i": p.i, "j": p.j,
                        "name": f"{self.components[p.i].name}-{self.components[p.j].name}",
                        "rho_hat": _fmt(p.rho_hat), "se_rho": _fmt(p.se_rho),
                        "eta_hat": _fmt(p.eta_hat), "se_eta": _fmt(p.se_eta),
                        "statistic": _fmt(p.statistic), "p_value": _fmt(p.p_value),
                        "reject": int(p.reject) if p.reject is not None else "",
                        "flags": p.flags, "n": self.n, "delta": _fmt(self.delta)})
        return buf.getvalue()

    def render_text(self) -> str:
        """Hurst column plus lower-triangular correlations, then eta with test outcomes."""
        names = [c.name for c in self.components]
        R = self.rho_matrix()
        width = max(6, max(len(s) for s in names) + 1)
        lines = [f"{'Ticker':<{width}} {'H_hat':>6}   Correlation estimates"]
        for a, c in enumerate(self.components):
            row = " ".join(f"{R[a, b]:5.2f}" for b in range(a + 1))
            lines.append(f"{c.name:<{width}} {c.H_hat:6.2f}   {row}")
        if self.pairs:
            lines.append("")
            lines.append(f"Asymmetry estimates and test at {100 * self.alpha:g}% level")
            for p in self.pairs:
                outcome = "Reject" if p.reject else "Not reject"
                lines.append(f"{names[p.j]:>{width}} / {names[p.i]:<{width}} "
                             f"{p.eta_hat:6.2f}  {outcome}")
        return "\n".join(lines)


def _fmt(v) -> str:
    if v is None:
        return ""
    v = float(v)
    return repr(v) if math.isfinite(v) else "nan"


def estimate_all(path, alpha: float = 0.05, names=None) -> EstimateReport:
    """Run every component-wise and pairwise estimator on a sample path."""
    X = path.values
    n, d, delta = path.n, path.d, path.delta
    names = list(names) if names is not None else [f"comp{i + 1}" for i in range(d)]
    report = EstimateReport(n=n, delta=delta, alpha=alpha)
    for i in range(d):
        x = X[:, i]
        H = float(estimate_hurst(x))
        s2 = float(estimate_sigma2(x, H, delta))
        ok = 0 < H < THEORY_HMAX
        se_H = math.sqrt(avar_hurst(H) / n) if ok else math.nan
        se_s2 = se_sigma2(H, s2, n, delta) if ok else math.nan
        report.components.append(ComponentEstimate(i, names[i], H, se_H, s2, se_s2,
                                                   not bool(hurst_in_range(H))))
    crit = stats.norm.ppf(1 - alpha / 2)
    for i in range(d):
        for j in range(i + 1, d):
            x, y = X[:, i], X[:, j]
            H1, H2 = report.components[i].H_hat, report.components[j].H_hat
            flags = []
            rho = float(estimate_rho(x, y))
            try:
                se_rho = math.sqrt(avar_rho(H1, H2, rho) / n)
            except ParameterDomainError:
                se_rho = math.nan
                flags.append("out-of-theory")
            try:
                eta = float(estimate_eta(x, y))
                se_eta = math.sqrt(avar_eta(_clip_theory(H1), _clip_theory(H2),
                                            float(np.clip(rho, -1 + 1e-9, 1 - 1e-9))) / n)
                stat = abs(eta) / se_eta
                p_val = float(2.0 * stats.norm.sf(stat))
                reject = bool(stat > crit)
                if reject:
                    flags.append("se-under-null")
            except UnidentifiedError:
                eta = se_eta = stat = p_val = math.nan
                reject = None
                flags.append("unidentified")
            if not (0 < H1 < THEORY_HMAX and 0 < H2 < THEORY_HMAX) and "out-of-theory" not in flags:
                flags.append("out-of-theory")
            report.pairs.append(PairEstimate(i, j, rho, se_rho, eta, se_eta, stat, p_val,
                                             reject, ";".join(flags)))
    return report
