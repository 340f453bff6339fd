"""Monte Carlo and rolling-window experiment harness.

Every replication ``r`` draws from its own stream ``(seed, r)`` and work is
split into fixed-size chunks, so reports are bit-identical regardless of
the number of worker processes.
"""
from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats

from . import estimate as est
from .ac_baseline import ac_fit
from .benchmarks import har_fit_forecast, vhar_fit_forecast
from .errors import MfbmError, ParameterDomainError
from .forecast import ConditionalForecaster
from .kernel import ModelParams
from .simulate import PathSampler, sampler_for

CHUNK = 100
KINDS = ("estimator-mc", "estimator-comparison", "size-power", "forecast-mc", "rolling-empirical")


@dataclass
class ExperimentSpec:
    kind: str
    params: ModelParams | None = None
    n: tuple = (1000,)
    delta: tuple = (1 / 250,)
    reps: int = 1000
    seed: int = 42
    horizons: tuple = (1, 2, 3, 4, 5)
    window: int = 500
    alphas: tuple = (0.01, 0.05)
    eta_grid: tuple = ()
    configs: tuple = ()          # labelled parameter sets for multi-block tables
    variants: tuple = ()         # (label, component indices) for forecast-mc
    targets: tuple = (0,)
    log_scale: bool = True
    anchor: bool = True
    har_log: bool = False
    breakpoints: tuple = ()
    workers: int = 1
    label: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterDomainError(f"unknown experiment kind {self.kind!r}")
        if int(self.reps) < 1:
            raise ParameterDomainError("replications must be >= 1")
        self.n = tuple(int(v) for v in np.atleast_1d(self.n))
        self.delta = tuple(float(v) for v in np.atleast_1d(self.delta))
        self.horizons = tuple(int(h) for h in self.horizons)
        if any(h < 1 for h in self.horizons):
            raise ParameterDomainError("horizons must be >= 1")

    def blocks(self):
        """(label, ModelParams) pairs the experiment iterates over."""
        if self.configs:
            return list(self.configs)
        return [(self.label or "base", self.params)]

    def echo(self) -> str:
        parts = [f"kind={self.kind}", f"reps={self.reps}", f"seed={self.seed}",
                 f"n={','.join(map(str, self.n))}",
                 f"delta={','.join(repr(d) for d in self.delta)}"]
        if self.kind in ("forecast-mc", "rolling-empirical"):
            parts.append(f"horizons={','.join(map(str, self.horizons))}")
        if self.kind == "rolling-empirical":
            parts += [f"window={self.window}", f"anchor={int(self.anchor)}",
                      f"log_scale={int(self.log_scale)}"]
        if self.label:
            parts.append(f"preset={self.label}")
        return " ".join(parts)


@dataclass
class ExperimentReport:
    spec_echo: str
    tables: dict = field(default_factory=dict)
    runtime: float = 0.0
    failures: int = 0
    series: dict = field(default_factory=dict)

    def table(self, name: str = None) -> list:
        return self.tables[name or next(iter(self.tables))]

    def to_csv(self, name: str = None) -> str:
        rows = self.table(name)
        buf = io.StringIO()
        buf.write(f"# config: {self.spec_echo}\n")
        if rows:
            w = csv.DictWriter(buf, list(rows[0].keys()), lineterminator="\n")
            w.writeheader()
            for r in rows:
                w.writerow({k: _cell(v) for k, v in r.items()})
        return buf.getvalue()

    def render_text(self) -> str:
        out = [f"# config: {self.spec_echo}", f"# runtime: {self.runtime:.1f}s  failures: {self.failures}"]
        for name, rows in self.tables.items():
            out.append(f"\n[{name}]")
            if not rows:
                continue
            cols = list(rows[0].keys())
            cells = [[_short(r[c]) for c in cols] for r in rows]
            widths = [max(len(c), *(len(row[k]) for row in cells)) for k, c in enumerate(cols)]
            out.append("  ".join(c.rjust(w) for c, w in zip(cols, widths)))
            out += ["  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in cells]
        return "\n".join(out)


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v)) if math.isfinite(v) else "nan"
    return v


def _short(v):
    if isinstance(v, (float, np.floating)):
        return f"{v:.4f}" if math.isfinite(v) else "nan"
    return str(v)


def _chunks(reps):
    return [range(s, min(s + CHUNK, reps)) for s in range(0, reps, CHUNK)]


def _map(fn, jobs, workers):
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, *zip(*jobs)))
    return [fn(*j) for j in jobs]


# -------------------------------------------------------- estimator MC

def _estimates_batch(X, delta):
    """BYZ estimates for a batch (R, n+1, d). Rows that fail come back NaN."""
    R, _, d = X.shape
    out = {}
    with np.errstate(all="ignore"):
        for i in range(d):
            x = X[:, :, i]
            s1 = np.sum(np.diff(x, axis=1) ** 2, axis=1)
            s2 = np.sum((x[:, 2:] - x[:, :-2]) ** 2, axis=1)
            H = np.log(s2 / s1) / (2 * math.log(2))
            out[f"H{i + 1}"] = H
            out[f"sigma2_{i + 1}"] = est.estimate_sigma2(x, H, delta)
        for i in range(d):
            for j in range(i + 1, d):
                sfx = "" if d == 2 else f"_{i + 1}{j + 1}"
                out["rho" + sfx] = est.estimate_rho(X[:, :, i], X[:, :, j])
                try:
                    out["eta" + sfx] = est.estimate_eta(X[:, :, i], X[:, :, j])
                except est.UnidentifiedError:
                    out["eta" + sfx] = np.full(R, np.nan)
    return out


def _estimator_chunk(p, n, delta, seed, reps):
    X = sampler_for(p, n, delta).sample_many(seed, reps)
    return _estimates_batch(X, delta)


def _truth(p: ModelParams):
    t = {}
    d = p.d
    for i in range(d):
        t[f"H{i + 1}"] = p.hurst[i]
        t[f"sigma2_{i + 1}"] = p.sigma2[i]
    for i in range(d):
        for j in range(i + 1, d):
            sfx = "" if d == 2 else f"_{i + 1}{j + 1}"
            t["rho" + sfx] = p.rho[i, j]
            t["eta" + sfx] = p.eta[i, j]
    return t


def _asy_se(p: ModelParams, name: str, n: int, delta: float) -> float:
    try:
        if name.startswith("H"):
            return math.sqrt(est.avar_hurst(p.hurst[int(name[1:]) - 1]) / n)
        if name.startswith("sigma2_"):
            i = int(name.split("_")[1]) - 1
            return est.se_sigma2(p.hurst[i], p.sigma2[i], n, delta)
        if p.d != 2:
            return math.nan
        H1, H2 = p.hurst
        if p.eta[0, 1] != 0.0:
            return math.nan        # the AVARs are for the time-reversible model
        if name == "rho":
            return math.sqrt(est.avar_rho(H1, H2, p.rho[0, 1]) / n)
        if name == "eta":
            return math.sqrt(est.avar_eta(H1, H2, p.rho[0, 1]) / n)
    except MfbmError:
        pass
    return math.nan


def summarize(values, truth):
    """Bias, std, RMSE and their Monte Carlo standard errors over finite draws."""
    v = np.asarray(values, float)
    v = v[np.isfinite(v)]
    R = v.size
    if R < 2:
        return dict(bias=math.nan, std=math.nan, rmse=math.nan, se_bias=math.nan,
                    se_std=math.nan, se_rmse=math.nan, ok=R)
    e = v - truth
    std = float(np.std(v, ddof=1))
    rmse = float(np.sqrt(np.mean(e**2)))
    se_rmse = float(np.std(e**2, ddof=1) / math.sqrt(R) / (2 * rmse)) if rmse > 0 else math.nan
    return dict(bias=float(np.mean(e)), std=std, rmse=rmse, se_bias=std / math.sqrt(R),
                se_std=std / math.sqrt(2 * (R - 1)), se_rmse=se_rmse, ok=R)


def run_estimator_mc(spec: ExperimentSpec) -> ExperimentReport:
    """Simulate-then-estimate loop over every (block, n, delta) cell."""
    t0 = time.perf_counter()
    rows, fails = [], 0
    for label, p in spec.blocks():
        for n in spec.n:
            for delta in spec.delta:
                jobs = [(p, n, delta, spec.seed, r) for r in _chunks(spec.reps)]
                parts = _map(_estimator_chunk, jobs, spec.workers)
                for name, truth in _truth(p).items():
                    vals = np.concatenate([c[name] for c in parts])
                    s = summarize(vals, truth)
                    fails = max(fails, spec.reps - s["ok"])
                    rows.append(dict(block=label, n=n, delta=delta, param=name, true=float(truth),
                                     bias=s["bias"], std=s["std"], asy_se=_asy_se(p, name, n, delta),
                                     rmse=s["rmse"], mc_se_bias=s["se_bias"], mc_se_std=s["se_std"],
                                     reps_ok=s["ok"]))
    return ExperimentReport(spec.echo(), {"estimates": rows}, time.perf_counter() - t0, fails)


# ------------------------------------------------ BYZ vs AC comparison

def _comparison_chunk(p, n, delta, seed, reps):
    s = sampler_for(p, n, delta)
    out = {k: [] for k in ("byz_rho", "byz_eta", "ac_rho", "ac_eta", "ac_conv")}
    for r in reps:
        path = s.sample(seed, r)
        x, y = path.values[:, 0], path.values[:, 1]
        out["byz_rho"].append(float(est.estimate_rho(x, y)))
        try:
            out["byz_eta"].append(float(est.estimate_eta(x, y)))
        except est.UnidentifiedError:
            out["byz_eta"].append(math.nan)
        try:
            a = ac_fit(path, seed=r)
            out["ac_rho"].append(a.rho[0, 1])
            out["ac_eta"].append(a.eta[0, 1])
            out["ac_conv"].append(a.converged)
        except MfbmError:
            out["ac_rho"].append(math.nan)
            out["ac_eta"].append(math.nan)
            out["ac_conv"].append(False)
    return {k: np.array(v, float) for k, v in out.items()}


def run_estimator_comparison(spec: ExperimentSpec) -> ExperimentReport:
    """BYZ and AC estimates of (rho, eta) on the same simulated paths."""
    t0 = time.perf_counter()
    rows, fails = [], 0
    for label, p in spec.blocks():
        if p.d != 2:
            raise ParameterDomainError("the comparison is bivariate")
        for n in spec.n:
            for delta in spec.delta:
                jobs = [(p, n, delta, spec.seed, r) for r in _chunks(spec.reps)]
                parts = _map(_comparison_chunk, jobs, spec.workers)
                res = {k: np.concatenate([c[k] for c in parts]) for k in parts[0]}
                fails += int(np.sum(~np.isfinite(res["ac_rho"])))
                for method in ("byz", "ac"):
                    for par, truth in (("rho", p.rho[0, 1]), ("eta", p.eta[0, 1])):
                        s = summarize(res[f"{method}_{par}"], truth)
                        rows.append(dict(block=label, n=n, delta=delta, method=method.upper(),
                                         param=par, true=float(truth), bias=s["bias"], std=s["std"],
                                         rmse=s["rmse"], mc_se_rmse=s["se_rmse"], reps_ok=s["ok"]))
    return ExperimentReport(spec.echo(), {"comparison": rows}, time.perf_counter() - t0, fails)


# ------------------------------------------------------- size / power

def _sizepower_chunk(p, n, delta, seed, reps):
    X = sampler_for(p, n, delta).sample_many(seed, reps)
    x, y = X[:, :, 0], X[:, :, 1]
    H1, H2 = est.estimate_hurst(x), est.estimate_hurst(y)
    rho = est.estimate_rho(x, y)
    eta = est.estimate_eta(x, y)
    stat = np.array([est.reversibility_statistic(n, e, a, b, r)
                     for e, a, b, r in zip(eta, H1, H2, rho)])
    return stat


def run_size_power(spec: ExperimentSpec) -> ExperimentReport:
    """Rejection frequencies of the reversibility test over a grid of true eta."""
    t0 = time.perf_counter()
    rows = []
    base = spec.params
    grid = spec.eta_grid or (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.65)
    for n in spec.n:
        for delta in spec.delta:
            for eta in grid:
                p = ModelParams(base.hurst, base.sigma2, base.rho,
                                np.array([[0.0, eta], [-eta, 0.0]]))
                jobs = [(p, n, delta, spec.seed, r) for r in _chunks(spec.reps)]
                stat = np.concatenate(_map(_sizepower_chunk, jobs, spec.workers))
                for a in spec.alphas:
                    rate = float(np.mean(stat > stats.norm.ppf(1 - a / 2)))
                    rows.append(dict(n=n, delta=delta, alpha=a, eta=float(eta), rejection=rate,
                                     mc_se=math.sqrt(rate * (1 - rate) / stat.size), reps=stat.size))
    return ExperimentReport(spec.echo(), {"size_power": rows}, time.perf_counter() - t0)


# -------------------------------------------------------- forecast MC

def _forecast_chunk(p, t, delta, hmax, seed, reps, variants, targets):
    X = sampler_for(p, t + hmax, delta).sample_many(seed, reps)
    obs = X[:, 1:t + 1, :]
    errs = {}
    for label, idx in variants:
        idx = list(idx)
        for j in targets:
            if j not in idx:
                continue
            sub = p.subset(idx)
            fc = _forecaster(sub, t, delta)
            jj = idx.index(j)
            for h in range(1, hmax + 1):
                pred = fc.predict(obs[:, :, idx], jj, h)
                errs[(label, j, h)] = pred - X[:, t + h, j]
    return errs


_FC_CACHE = {}


def _forecaster(p, t, delta):
    key = (p.hurst.tobytes(), p.sigma2.tobytes(), p.rho.tobytes(), t, delta)
    if key not in _FC_CACHE:
        if len(_FC_CACHE) > 16:
            _FC_CACHE.clear()
        _FC_CACHE[key] = ConditionalForecaster(p, t, delta)
    return _FC_CACHE[key]


def run_forecast_mc(spec: ExperimentSpec) -> ExperimentReport:
    """Known-parameter forecasts from ``t = n`` observations; empirical vs theoretical RMSFE."""
    t0 = time.perf_counter()
    rows = []
    hmax = max(spec.horizons)
    for label, p in spec.blocks():
        variants = spec.variants or (("fBm", None), (f"mfBm{p.d}", tuple(range(p.d))))
        for t in spec.n:
            for delta in spec.delta:
                var = []
                for name, idx in variants:
                    if idx is None:     # own component only
                        var += [(name, (j,)) for j in spec.targets]
                    else:
                        var.append((name, tuple(idx)))
                jobs = [(p, t, delta, hmax, spec.seed, r, tuple(var), spec.targets)
                        for r in _chunks(spec.reps)]
                parts = _map(_forecast_chunk, jobs, spec.workers)
                for key in parts[0]:
                    name, j, h = key
                    if h not in spec.horizons:
                        continue
                    e = np.concatenate([c[key] for c in parts])
                    idx = next(ix for nm, ix in var if nm == name and j in ix)
                    sub = p.subset(list(idx))
                    _, msfe = _forecaster(sub, t, delta).weights(list(idx).index(j), h)
                    s = summarize(e, 0.0)
                    rows.append(dict(block=label, t=t, delta=delta, model=name, component=j + 1,
                                     h=h, rmsfe=s["rmse"], rmsfe_theory=math.sqrt(msfe),
                                     mc_se=s["se_rmse"], reps=s["ok"]))
    return ExperimentReport(spec.echo(), {"forecast": rows}, time.perf_counter() - t0)


# --------------------------------------------------- rolling empirical

def _panel_params(window, delta):
    """Time-reversible parameters estimated on a (t, d) window of levels."""
    d = window.shape[1]
    H = np.array([float(est.estimate_hurst(window[:, i])) for i in range(d)])
    if np.any(~est.hurst_in_range(H)):
        raise ParameterDomainError("estimated Hurst exponent outside (0, 1)")
    s2 = np.array([float(est.estimate_sigma2(window[:, i], H[i], delta)) for i in range(d)])
    R = np.eye(d)
    for i in range(d):
        for j in range(i + 1, d):
            R[i, j] = R[j, i] = float(est.estimate_rho(window[:, i], window[:, j]))
    return ModelParams(H, s2, R)


def _model_sets(d, j):
    """Component sets per model for target j: own series, then j plus the first k-1 others."""
    others = [k for k in range(d) if k != j]
    sets = [("fBm", [j])]
    for k in range(2, d + 1):
        sets.append((("bfBm" if k == 2 else f"mfBm{k}"), [j] + others[:k - 1]))
    return sets


def newey_west_se(x, lags: int) -> float:
    """HAC standard error of the mean of ``x`` (Bartlett kernel)."""
    x = np.asarray(x, float)
    x = x - x.mean()
    T = x.size
    v = np.dot(x, x) / T
    for L in range(1, min(lags, T - 1) + 1):
        v += 2 * (1 - L / (lags + 1)) * np.dot(x[L:], x[:-L]) / T
    return math.sqrt(max(v, 0.0) / T)


def run_rolling_empirical(spec: ExperimentSpec, data) -> ExperimentReport:
    """Rolling-window estimate-then-forecast comparison on a panel.

    ``data`` is a :class:`mfbm.io.PanelData`. Each origin uses the previous
    ``spec.window`` observations; models are fBm, bfBm, ..., mfBm{d}, HAR and
    (for d >= 2) VHAR{d}. Errors are recorded on the RV scale and on the
    modelled log scale.
    """
    t0 = time.perf_counter()
    rv = np.asarray(data.rv, dtype=float)
    T, d = rv.shape
    W = spec.window
    hmax = max(spec.horizons)
    if W < 100:
        raise ParameterDomainError("window must be >= 100")
    if T < W + hmax:
        raise ParameterDomainError("panel shorter than window + max horizon")
    if np.any(rv <= 0):
        raise ParameterDomainError("RV must be positive for log modelling")
    y = np.log(rv) if spec.log_scale else rv
    delta = spec.delta[0]
    origins = range(W - 1, T - hmax)
    names = [m for m, _ in _model_sets(d, 0)] + ["HAR"] + ([f"VHAR{d}"] if d >= 2 else [])
    err = {(m, j, h): [] for m in names for j in range(d) for h in spec.horizons}
    lerr = {k: [] for k in err}
    used_dates, hurst_path, fails = [], [], 0
    for o in origins:
        win = y[o - W + 1: o + 1]
        try:
            p = _panel_params(win, delta)   # estimators are shift invariant
            preds = {}
            factored = {}    # one factorisation per distinct component set
            for j in range(d):
                for name, idx in _model_sets(d, j):
                    key = tuple(sorted(idx))
                    if key not in factored:
                        t_obs = W - 1 if spec.anchor else W
                        factored[key] = ConditionalForecaster(p.subset(list(key)), t_obs, delta)
                        factored[key].prefetch([(i, h) for i in range(len(key)) for h in spec.horizons])
                    fc = factored[key]
                    w = win[:, list(key)]
                    off = w[0] if spec.anchor else np.zeros(len(key))
                    obs = w[1:] - off if spec.anchor else w
                    jj = key.index(j)
                    for h in spec.horizons:
                        preds[(name, j, h)] = float(fc.predict(obs, jj, h)) + off[jj]
        except MfbmError:
            fails += 1
            continue
        rvwin = rv[o - W + 1: o + 1]
        for j in range(d):
            for h in spec.horizons:
                preds[("HAR", j, h)] = har_fit_forecast(rvwin[:, j], h, log=spec.har_log).forecast
                if d >= 2:
                    preds[(f"VHAR{d}", j, h)] = vhar_fit_forecast(rvwin, j, h, log=spec.har_log).forecast
        for key, f in preds.items():
            name, j, h = key
            actual = rv[o + h, j]
            if name.startswith(("HAR", "VHAR")):
                err[key].append(f - actual)
                lerr[key].append(math.log(max(f, 1e-300)) - math.log(actual) if f > 0 else math.nan)
            else:
                fr = math.exp(f) if spec.log_scale else f
                err[key].append(fr - actual)
                lerr[key].append((f if spec.log_scale else math.log(max(f, 1e-300))) - math.log(actual))
        used_dates.append(data.dates[o])
        hurst_path.append(p.hurst.copy())
    used_dates = np.array(used_dates)
    breaks = [None, *spec.breakpoints, None]
    rows, diffs = [], []
    nw_lag = lambda h: int(math.floor(4 * (len(used_dates) / 100) ** (2 / 9))) + h
    for a, b in zip(breaks[:-1], breaks[1:]):
        mask = np.ones(len(used_dates), bool)
        if a is not None:
            mask &= used_dates > a
        if b is not None:
            mask &= used_dates <= b
        period = f"{a or 'start'}..{b or 'end'}"
        for name in names:
            for h in spec.horizons:
                e = np.array([err[(name, j, h)] for j in range(d)])[:, mask]
                le = np.array([lerr[(name, j, h)] for j in range(d)])[:, mask]
                if e.shape[1] == 0:
                    continue
                rows.append(dict(period=period, model=name, h=h,
                                 rmsfe=float(np.mean(np.sqrt(np.mean(e**2, axis=1)))),
                                 rmsfe_log=float(np.mean(np.sqrt(np.nanmean(le**2, axis=1)))),
                                 origins=int(e.shape[1])))
        # paired comparison of the full model against fBm, averaged over targets
        full = f"mfBm{d}" if d > 2 else ("bfBm" if d == 2 else None)
        if full:
            for h in spec.horizons:
                e1 = np.array([err[(full, j, h)] for j in range(d)])[:, mask]
                e0 = np.array([err[("fBm", j, h)] for j in range(d)])[:, mask]
                if e1.shape[1] < 3:
                    continue
                r1 = np.sqrt(np.mean(e1**2, axis=1))
                r0 = np.sqrt(np.mean(e0**2, axis=1))
                # delta method per target on the loss-difference mean, then averaged
                se_j = []
                for j in range(d):
                    dl = e1[j] ** 2 - e0[j] ** 2
                    se_j.append(newey_west_se(dl, nw_lag(h)) / (r1[j] + r0[j]))
                se = math.sqrt(np.sum(np.square(se_j))) / d
                diffs.append(dict(period=period, model=full, h=h, rmsfe_model=float(r1.mean()),
                                  rmsfe_fbm=float(r0.mean()), diff=float(r1.mean() - r0.mean()),
                                  se_diff=se))
    series = {"dates": used_dates, "hurst": np.array(hurst_path)}
    tables = {"rmsfe": rows, "versus_fbm": diffs}
    return ExperimentReport(spec.echo(), tables, time.perf_counter() - t0, fails, series)


def rolling_hurst_rows(report: ExperimentReport, tickers) -> list:
    dates, H = report.series["dates"], report.series["hurst"]
    return [dict(date=str(dt), **{t: float(h) for t, h in zip(tickers, row)})
            for dt, row in zip(dates, H)]


# ------------------------------------------------------------- presets

def _biv(H1=0.1, H2=0.4, rho=0.0, eta=0.0):
    return ModelParams.bivariate(H1, H2, rho=rho, eta=eta)


SIGMA_1 = np.array([[1, .4, .4], [.4, 1, 0], [.4, 0, 1]], float)
SIGMA_2 = np.block([[np.ones((1, 1)), np.full((1, 3), .4)], [np.full((3, 1), .4), np.eye(3)]])


def preset(name: str, reps: int | None = None, seed: int = 42, workers: int = 1) -> ExperimentSpec:
    """Experiment specs mirroring the simulation tables."""
    name = name.lower()
    mk = lambda **kw: ExperimentSpec(seed=seed, workers=workers, label=name, **kw)
    both_n = (500, 1000)
    two_deltas = (1 / 52, 1 / 250)
    if name == "table1":
        spec = mk(kind="estimator-mc", params=_biv(rho=0.0), n=both_n, delta=two_deltas, reps=1000)
    elif name == "table2":
        spec = mk(kind="estimator-mc", params=_biv(rho=0.4), n=both_n, delta=two_deltas, reps=1000)
    elif name == "table3":
        cfg = tuple((f"rho={r},eta={e}", _biv(rho=r, eta=e)) for r in (0.0, 0.4) for e in (0.0, 0.5))
        spec = mk(kind="estimator-comparison", configs=cfg, n=both_n, reps=1000)
    elif name == "sizepower":
        spec = mk(kind="size-power", params=_biv(rho=0.4), n=both_n, reps=2000,
                  eta_grid=(0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.65))
    elif name == "table4":
        cfg = tuple((f"rho={r}", _biv(rho=r)) for r in (0.0, 0.4, 0.8))
        spec = mk(kind="forecast-mc", configs=cfg, n=(500,), reps=2000, targets=(0, 1),
                  variants=(("fBm", None), ("bfBm", (0, 1))))
    elif name == "table5":
        cfg = tuple((f"H=({a},{b})", _biv(a, b, rho=0.4)) for a, b in ((.1, .1), (.1, .2), (.1, .4)))
        spec = mk(kind="forecast-mc", configs=cfg, n=(500,), reps=2000, targets=(0, 1),
                  variants=(("fBm", None), ("bfBm", (0, 1))))
    elif name == "table6":
        p1 = ModelParams(np.array([.1, .4, .4]), np.ones(3), SIGMA_1)
        p2 = ModelParams(np.array([.1, .4, .4, .4]), np.ones(4), SIGMA_2)
        spec = mk(kind="forecast-mc", configs=(("Sigma1", p1), ("Sigma2", p2)), n=(500,), reps=2000,
                  targets=(0,), variants=(("fBm", (0,)), ("bfBm", (0, 1)), ("mfBm3", (0, 1, 2)),
                                          ("mfBm4", (0, 1, 2, 3))))
    else:
        raise ParameterDomainError(f"unknown preset {name!r}")
    return replace(spec, reps=reps) if reps else spec


def run(spec: ExperimentSpec, data=None) -> ExperimentReport:
    if spec.kind == "estimator-mc":
        return run_estimator_mc(spec)
    if spec.kind == "estimator-comparison":
        return run_estimator_comparison(spec)
    if spec.kind == "size-power":
        return run_size_power(spec)
    if spec.kind == "forecast-mc":
        return run_forecast_mc(spec)
    if data is None:
        raise ParameterDomainError("rolling-empirical needs a panel")
    return run_rolling_empirical(spec, data)


# ---------------------------------------------------- synthetic panels

def synthetic_panel(hurst, rho=0.4, T=800, delta=1 / 252, seed=7, level=-4.0, tickers=None,
                    start="2010-01-04"):
    """Panel of RV = exp(level + B) with B an equicorrelated mfBm path.

    Business-day dates start at ``start``. Returns :class:`mfbm.io.PanelData`.
    """
    from .io import PanelData
    hurst = np.asarray(hurst, float)
    d = hurst.size
    p = ModelParams(hurst, np.ones(d), rho)
    path = PathSampler(p, T - 1, delta).sample(seed, 0)
    dates = np.arange(np.datetime64(start, "D"), np.datetime64(start, "D") + 3 * T)
    dates = dates[np.is_busday(dates)][:T]
    tickers = tickers or [f"S{i + 1}" for i in range(d)]
    return PanelData([str(x) for x in dates], list(tickers), np.exp(level + path.values), "rv", delta)
