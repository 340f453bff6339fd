"""Acceptance gate: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
The Monte Carlo criteria take a few minutes on one core.
"""
import math
import time

import numpy as np
import pytest

from mfbm import (ConditionalForecaster, ModelParams, avar_eta, avar_hurst, avar_rho,
                  forecast_one_obs_bivariate, forecast_weights_general, rho_max, validate_existence)
from mfbm import estimate as est
from mfbm import experiments as ex
from mfbm.forecast import msfe_exchangeable, relative_msfe_dimension
from mfbm.kernel import gamma_lag

SEED = 42
TABLE2 = ModelParams.bivariate(0.1, 0.4, rho=0.4)


def _line(k, ok, detail):
    return f"criterion {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}"


# ------------------------------------------------------------ criteria

def crit1():
    a, b = rho_max(0.2, 0.8), rho_max(0.1, 0.9)
    t0 = time.perf_counter()
    for _ in range(100):
        rho_max(0.2, 0.8)
    per_call = (time.perf_counter() - t0) / 100
    ok = abs(a - 0.662) <= 1e-3 and abs(b - 0.383) <= 1e-3 and per_call < 1e-3
    return ok, f"rho_max(.2,.8)={a:.4f} rho_max(.1,.9)={b:.4f} time={per_call * 1e6:.1f}us"


def crit2():
    for f in (est._avar_hurst, est._upsilon, est._eta_parts):
        f.cache_clear()
    t0 = time.perf_counter()
    sh = math.sqrt(avar_hurst(0.1) / 500)
    sr = math.sqrt(avar_rho(0.1, 0.4, 0.4) / 500)
    se = math.sqrt(avar_eta(0.1, 0.4, 0.0) / 500)
    dt = time.perf_counter() - t0
    ok = abs(sh - 0.0431) <= 2e-4 and abs(sr - 0.0394) <= 2e-4 and abs(se - 0.1137) <= 5e-4 and dt < 1
    return ok, f"H={sh:.4f} rho={sr:.4f} eta={se:.4f} time={dt:.3f}s"


def crit3():
    spec = ex.ExperimentSpec(kind="estimator-mc", params=TABLE2, n=(1000,), delta=(1 / 250,),
                             reps=1000, seed=SEED)
    rep = ex.run(spec)
    rows = {r["param"]: r for r in rep.table()}
    parts, ok = [], True
    for name, target in (("H1", 0.0306), ("rho", 0.0280), ("eta", 0.0744)):
        r = rows[name]
        good = abs(r["std"] / target - 1) <= 0.2 and abs(r["bias"]) <= 2 * r["mc_se_bias"]
        ok &= good
        parts.append(f"{name}: std={r['std']:.4f} bias={r['bias']:+.4f} (2SE={2 * r['mc_se_bias']:.4f})")
    ok &= rep.runtime < 600
    return ok, "; ".join(parts) + f"; {rep.runtime:.1f}s"


def crit4():
    spec = ex.ExperimentSpec(kind="size-power", params=TABLE2, n=(1000,), delta=(1 / 250,), reps=2000,
                             seed=SEED, eta_grid=(0.0, 0.3), alphas=(0.01,))
    rows = {r["eta"]: r["rejection"] for r in ex.run(spec).table()}
    size, power = rows[0.0], rows[0.3]
    ok = 0.006 <= size <= 0.022 and power >= 0.88
    return ok, f"size(1%)={size:.4f} power(eta=.3)={power:.4f}"


def crit5():
    p = ModelParams.bivariate(0.1, 0.4, rho=0.8)
    biv = math.sqrt(ConditionalForecaster(p, 500, 1 / 250).weights(0, 1)[1])
    uni = math.sqrt(ConditionalForecaster(p.subset([0]), 500, 1 / 250).weights(0, 1)[1])
    ok = abs(uni - 0.4802) <= 5e-4 and abs(biv - 0.4246) <= 5e-4
    return ok, f"univariate={uni:.4f} bivariate={biv:.4f}"


def crit6():
    spec = ex.preset("table4", seed=SEED)
    spec.configs = tuple(c for c in spec.configs if c[0] == "rho=0.8")
    rows = ex.run(spec).table()
    z = [abs(r["rmsfe"] - r["rmsfe_theory"]) / r["mc_se"] for r in rows]
    worst = rows[int(np.argmax(z))]
    ok = len(rows) == 20 and max(z) <= 3
    return ok, (f"{len(rows)} cells, max |z|={max(z):.2f} "
                f"({worst['model']} comp{worst['component']} h={worst['h']})")


def _random_valid(rng, d, common_h=None):
    while True:
        H = np.full(d, common_h) if common_h else rng.uniform(0.05, 0.95, d)
        A = rng.normal(size=(d, d + 2))
        C = A @ A.T
        s = np.sqrt(np.diag(C))
        p = ModelParams(H, rng.uniform(0.3, 3.0, d), C / np.outer(s, s))
        if validate_existence(p):
            return p


def crit7():
    rng = np.random.default_rng(SEED)
    fails = []
    # telescoping identity
    tel = 0.0
    for H in np.linspace(0.05, 0.95, 10):
        for L in (1, 10, 1000):
            lhs = 1.0 + 2 * math.fsum(gamma_lag(np.arange(1, L + 1), 2 * H))
            rhs = L ** (2 * H) * math.expm1(2 * H * math.log1p(1 / L))    # (L+1)^{2H} - L^{2H}
            tel = max(tel, abs(lhs - rhs))
    if tel > 1e-12:
        fails.append("telescoping")
    # unifractional no-gain
    uni = 0.0
    for d in (2, 3, 4):
        for H in (0.1, 0.3, 0.7):
            p = _random_valid(rng, d, common_h=H)
            for t in (1, 7, 20):
                w, m = ConditionalForecaster(p, t, 1 / 250).weights(0, 2)
                wu, mu = ConditionalForecaster(p.subset([0]), t, 1 / 250).weights(0, 2)
                W = w.reshape(t, d)
                uni = max(uni, np.abs(W[:, 1:]).max(), np.abs(W[:, 0] - wu).max(), abs(m - mu))
    if uni > 1e-8:
        fails.append("unifractional")
    # closed forms vs generic solver
    cf = 0.0
    for k in range(200):
        d = 2 if k % 2 == 0 else int(rng.integers(3, 5))
        p = _random_valid(rng, d)
        t = float(rng.choice([0.5, 1.0, 2.0]))
        steps = int(rng.integers(1, 4))
        w, m = ConditionalForecaster(p, 1, t).weights(0, steps)
        cf = max(cf, np.abs(forecast_weights_general(p, t, t * steps) - w).max())
        if d == 2:
            r = forecast_one_obs_bivariate(p, [0, 0], t, t * steps)
            cf = max(cf, np.abs(r.weights - w).max(), abs(r.msfe - m))
    if cf > 1e-10:
        fails.append("closed-forms")
    # sigma2 independence
    vals = {forecast_one_obs_bivariate(ModelParams.bivariate(0.1, 0.4, sigma2=(1.0, s), rho=0.6),
                                       [0, 0], 1.0, 1.0).msfe for s in (0.5, 1.0, 2.0)}
    if len(vals) != 1:
        fails.append("sigma2")
    # gain non-negativity
    gain = 0.0
    for H1 in np.linspace(0.05, 0.95, 7):
        u = msfe_exchangeable(1, 0.0, H1, H1, 1.0, 1.0)
        for H2 in np.linspace(0.05, 0.95, 7):
            for rho in np.linspace(-0.9, 0.9, 7):
                p = ModelParams.bivariate(H1, H2, rho=rho)
                if validate_existence(p):
                    gain = max(gain, forecast_one_obs_bivariate(p, [0, 0], 1.0, 1.0).msfe - u)
    if gain > 1e-12:
        fails.append("gain")
    detail = (f"telescoping={tel:.1e} unifractional={uni:.1e} closed-forms={cf:.1e} "
              f"sigma2-bitexact={len(vals) == 1} max(gain excess)={gain:.1e}")
    return not fails, detail + (f" failed: {','.join(fails)}" if fails else "")


def crit8():
    out, ok = [], True
    for t, want in ((1.0, 0.89), (10.0, 0.774)):
        c = relative_msfe_dimension(0.8, 0.4, 0.1, t, 1.0, dims=[1, 10, 100, 500, 1000])
        v = c[-1, 1]
        flat = abs(c[-1, 1] - c[-2, 1]) < abs(c[2, 1] - c[1, 1])
        ok &= abs(v - want) <= 5e-3 and bool(np.all(np.diff(c[:, 1]) <= 0)) and flat
        out.append(f"t={t:g}: d=1000 ratio={v:.4f} (target {want})")
    return ok, "; ".join(out)


def crit9():
    spec = ex.ExperimentSpec(kind="estimator-comparison", configs=(("rho=0.4,eta=0", TABLE2),),
                             n=(1000,), delta=(1 / 250,), reps=1000, seed=SEED)
    rep = ex.run(spec)
    r = {(x["method"], x["param"]): x["rmse"] for x in rep.table()}
    eta_ratio = r[("AC", "eta")] / r[("BYZ", "eta")]
    rho_ratio = r[("AC", "rho")] / r[("BYZ", "rho")]
    ok = eta_ratio >= 2 and 0.8 <= rho_ratio <= 1.3
    return ok, (f"AC/BYZ eta RMSE={eta_ratio:.2f} ({r[('AC', 'eta')]:.4f}/{r[('BYZ', 'eta')]:.4f}), "
                f"rho RMSE ratio={rho_ratio:.2f}, failed fits={rep.failures}")


def crit10():
    spec = ex.ExperimentSpec(kind="rolling-empirical", window=250, delta=(1 / 252,), reps=1)
    het = ex.run(spec, ex.synthetic_panel((0.1, 0.2, 0.3, 0.4, 0.45), rho=0.4, T=505, seed=11))
    uni = ex.run(spec, ex.synthetic_panel((0.3,) * 5, rho=0.4, T=505, seed=11))
    d_het = het.table("versus_fbm")
    d_uni = uni.table("versus_fbm")
    ok_het = all(r["rmsfe_model"] <= r["rmsfe_fbm"] for r in d_het) and len(d_het) == 5
    ok_uni = all(abs(r["diff"]) <= 2 * r["se_diff"] for r in d_uni) and len(d_uni) == 5
    worst = max(abs(r["diff"]) / r["se_diff"] for r in d_uni)
    return ok_het and ok_uni, (
        "heterogeneous diff(h=1..5)=" + ",".join(f"{r['diff']:+.2e}" for r in d_het)
        + f"; unifractional max |diff|/se={worst:.2f}")


CRITERIA = [crit1, crit2, crit3, crit4, crit5, crit6, crit7, crit8, crit9, crit10]


@pytest.mark.slow
@pytest.mark.parametrize("k", range(1, 11))
def test_acceptance(k, capsys):
    ok, detail = CRITERIA[k - 1]()
    with capsys.disabled():
        print("\n" + _line(k, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    results = []
    for k, fn in enumerate(CRITERIA, start=1):
        ok, detail = fn()
        print(_line(k, ok, detail), flush=True)
        results.append(ok)
    print(f"{sum(results)}/{len(results)} criteria passed")
