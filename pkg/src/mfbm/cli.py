"""Command-line front end: ``python3 -m mfbm <command> ...``.

Exit codes: 0 success, 2 validation or usage error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import shlex
import sys

import numpy as np

from . import estimate as est
from . import experiments as exps
from . import forecast as fc
from .ac_baseline import ac_fit
from .benchmarks import har_fit_forecast, vhar_fit_forecast
from .errors import NumericalError, ValidationError
from .io import (DEFAULT_DELTA, PanelData, format_float, load_config, load_panel,
                 params_from_config, path_to_csv, read_path_csv)
from .kernel import validate_existence
from .simulate import sample_path


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(2)


def _floats(s):
    return [float(eval_fraction(v)) for v in s.split(",") if v.strip()]


def _ints(s):
    return [int(v) for v in s.split(",") if v.strip()]


def eval_fraction(v: str) -> float:
    v = v.strip()
    if "/" in v:
        a, b = v.split("/", 1)
        return float(a) / float(b)
    return float(v)


def _emit(text: str, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _echo(argv) -> str:
    return "# config: " + " ".join(shlex.quote(a) for a in argv) + "\n"


def _model_params(args):
    if args.config:
        cfg = load_config(args.config)
        return params_from_config(cfg), cfg
    if args.hurst is None:
        raise ValidationError("give --config or --hurst")
    cfg = {"hurst": args.hurst, "sigma2": args.sigma2 or 1.0, "rho": args.rho, "eta": args.eta}
    return params_from_config(cfg), cfg


def _load_data(path, log=False, delta=None):
    """A panel (``date,...`` header) or a path file (``t,...`` header)."""
    with open(path) as fh:
        first = next((ln for ln in fh if ln.strip() and not ln.startswith("#")), "")
    if first.lower().startswith("date"):
        return load_panel(path, log=log, delta=delta or DEFAULT_DELTA)
    p = read_path_csv(path, delta)
    names = [f"B{i + 1}" for i in range(p.d)]
    return PanelData([str(k) for k in range(p.n + 1)], names, p.values, "rv", p.delta)


def _add_model_flags(sp):
    sp.add_argument("--config", help="key = value file with hurst, sigma2, rho, eta")
    sp.add_argument("--hurst", type=_floats)
    sp.add_argument("--sigma2", type=_floats)
    sp.add_argument("--rho", type=float, default=0.0, help="bivariate correlation")
    sp.add_argument("--eta", type=float, default=0.0, help="bivariate asymmetry")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="mfbm", description="Multivariate fractional Brownian motion toolkit.")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("simulate", help="exact path simulation")
    _add_model_flags(s)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--delta", type=eval_fraction, default=DEFAULT_DELTA)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--rep", type=int, default=0)
    s.add_argument("--out")

    e = sub.add_parser("estimate", help="closed-form estimates with standard errors")
    e.add_argument("--input", required=True)
    e.add_argument("--log", action="store_true", help="take logs of panel values first")
    e.add_argument("--delta", type=eval_fraction)
    e.add_argument("--alpha", type=float, default=0.05)
    e.add_argument("--method", choices=("BYZ", "AC"), default="BYZ")
    e.add_argument("--format", choices=("csv", "text"), default="csv")
    e.add_argument("--out")

    t = sub.add_parser("test-reversibility", help="test eta = 0 for one pair")
    t.add_argument("--input", required=True)
    t.add_argument("--log", action="store_true")
    t.add_argument("--delta", type=eval_fraction)
    t.add_argument("--pair", type=_ints, default=[1, 2], help="1-based column pair, e.g. 1,2")
    t.add_argument("--alpha", type=float, default=0.05)
    t.add_argument("--out")

    f = sub.add_parser("forecast", help="conditional-mean forecasts")
    f.add_argument("--input", required=True)
    f.add_argument("--log", action="store_true", help="model log of the panel values")
    f.add_argument("--delta", type=eval_fraction)
    _add_model_flags(f)
    f.add_argument("--h", type=_ints, default=[1])
    f.add_argument("--window", type=int, help="observations per forecast (default: all)")
    f.add_argument("--origins", type=int, default=0,
                   help="backtest over this many final origins (0: forecast beyond the data)")
    f.add_argument("--components", type=_ints, help="1-based columns to use (default: all)")
    f.add_argument("--no-anchor", action="store_true")
    f.add_argument("--lognormal-correction", action="store_true")
    f.add_argument("--out")

    m = sub.add_parser("mc", help="Monte Carlo tables")
    m.add_argument("--preset", choices=("table1", "table2", "table3", "table4", "table5", "table6",
                                        "sizepower"))
    m.add_argument("--config", help="custom experiment spec file")
    m.add_argument("--reps", type=int)
    m.add_argument("--seed", type=int, default=42)
    m.add_argument("--workers", type=int, default=1)
    m.add_argument("--format", choices=("csv", "text"), default="csv")
    m.add_argument("--out")

    r = sub.add_parser("empirical", help="rolling-window forecast comparison on a panel")
    r.add_argument("--input", required=True)
    r.add_argument("--window", type=int, default=500)
    r.add_argument("--h", type=_ints, default=[1, 2, 3, 4, 5])
    r.add_argument("--delta", type=eval_fraction, default=DEFAULT_DELTA)
    r.add_argument("--breakpoints", type=lambda s: [v.strip() for v in s.split(",") if v.strip()],
                   default=[])
    r.add_argument("--no-anchor", action="store_true")
    r.add_argument("--har-log", action="store_true")
    r.add_argument("--format", choices=("csv", "text"), default="csv")
    r.add_argument("--hurst-out", help="write the rolling Hurst estimates here")
    r.add_argument("--out")

    h = sub.add_parser("har", help="HAR / VHAR forecasts from the end of a panel")
    h.add_argument("--input", required=True)
    h.add_argument("--h", type=_ints, default=[1])
    h.add_argument("--window", type=int)
    h.add_argument("--vhar", action="store_true")
    h.add_argument("--log-har", action="store_true")
    h.add_argument("--out")

    c = sub.add_parser("curves", help="data behind the forecast-weight and MSFE figures")
    c.add_argument("--figure", choices=("weights", "msfe", "dimension"), required=True)
    c.add_argument("--H1", type=float, default=0.4)
    c.add_argument("--H", type=float, default=0.1, help="other exponent (dimension curve)")
    c.add_argument("--rho", type=float, default=0.5)
    c.add_argument("--t", type=float, default=1.0)
    c.add_argument("--h", type=float, default=1.0)
    c.add_argument("--dmax", type=int, default=1000)
    c.add_argument("--out")
    return ap


# ------------------------------------------------------------- commands

def _cmd_simulate(a, argv):
    p, _ = _model_params(a)
    path = sample_path(p, a.n, a.delta, a.seed, a.rep)
    _emit(_echo(argv) + path_to_csv(path), a.out)


def _cmd_estimate(a, argv):
    data = _load_data(a.input, a.log, a.delta)
    path = data.to_path()
    if a.method == "AC":
        rep = ac_fit(path).to_report(path.n, path.delta, data.tickers)
    else:
        rep = est.estimate_all(path, alpha=a.alpha, names=data.tickers)
    body = rep.render_text() + "\n" if a.format == "text" else rep.to_csv()
    _emit(_echo(argv) + body, a.out)


def _cmd_test(a, argv):
    data = _load_data(a.input, a.log, a.delta)
    if len(a.pair) != 2:
        raise ValidationError("--pair takes two 1-based indices")
    i, j = (k - 1 for k in a.pair)
    if not (0 <= i < len(data.tickers) and 0 <= j < len(data.tickers)) or i == j:
        raise ValidationError("pair indices out of range")
    X = data.values
    res = est.test_time_reversibility(X[:, i], X[:, j], a.alpha)
    eta = float(est.estimate_eta(X[:, i], X[:, j]))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["i", "j", "eta_hat", "statistic", "p_value", "alpha", "reject", "out_of_theory"])
    w.writerow([data.tickers[i], data.tickers[j], format_float(eta), format_float(res.statistic),
                format_float(res.p_value), a.alpha, int(res.reject), int(res.out_of_theory)])
    _emit(_echo(argv) + buf.getvalue(), a.out)


def _cmd_forecast(a, argv):
    data = _load_data(a.input, a.log, a.delta)
    cols = [k - 1 for k in a.components] if a.components else list(range(len(data.tickers)))
    if any(not 0 <= k < len(data.tickers) for k in cols):
        raise ValidationError("component index out of range")
    Y = data.values[:, cols]
    T = Y.shape[0]
    W = a.window or (T - (max(a.h) if a.origins else 0))
    if W < 2 or W > T:
        raise ValidationError("window must lie in [2, number of rows]")
    fixed = None
    if a.config or a.hurst is not None:
        fixed, _ = _model_params(a)
        validate_existence(fixed).raise_if_invalid()
        if fixed.d != len(cols):
            raise ValidationError("model dimension does not match the selected components")
    ends = [T - 1] if not a.origins else list(range(T - max(a.h) - a.origins, T - max(a.h)))
    if ends[0] < W - 1:
        raise ValidationError("not enough data for the requested origins and window")
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["date", "component", "h", "forecast", "actual", "anchor", "msfe_theoretical", "model"])
    model = f"mfBm{len(cols)}" if len(cols) > 1 else "fBm"
    for o in ends:
        win = Y[o - W + 1: o + 1]
        p = fixed or exps._panel_params(win, data.delta)
        for jj, j in enumerate(cols):
            for h in a.h:
                r = fc.forecast_window(p, win, jj, h, data.delta, anchor=not a.no_anchor)
                val = r.forecast
                if a.lognormal_correction:
                    val += 0.5 * r.msfe
                actual = data.values[o + h, j] if o + h < T else ""
                wr.writerow([data.dates[o], data.tickers[j], h, format_float(val),
                             format_float(actual) if actual != "" else "",
                             format_float(r.anchor), format_float(r.msfe), model])
    _emit(_echo(argv) + buf.getvalue(), a.out)


def _spec_from_config(cfg, a):
    kind = cfg.get("kind")
    if kind is None:
        raise ValidationError("experiment config needs 'kind'")
    kw = {k: cfg[k] for k in ("reps", "window", "label") if k in cfg}
    for k in ("n", "delta", "horizons", "alphas", "eta_grid", "targets"):
        if k in cfg:
            kw[k] = tuple(np.atleast_1d(cfg[k]).tolist())
    if "hurst" in cfg:
        kw["params"] = params_from_config(cfg)
    spec = exps.ExperimentSpec(kind=kind, seed=a.seed, workers=a.workers, **kw)
    if a.reps:
        spec.reps = a.reps
    return spec


def _cmd_mc(a, argv):
    if bool(a.preset) == bool(a.config):
        raise ValidationError("give exactly one of --preset or --config")
    spec = exps.preset(a.preset, a.reps, a.seed, a.workers) if a.preset else \
        _spec_from_config(load_config(a.config), a)
    rep = exps.run(spec)
    body = rep.render_text() + "\n" if a.format == "text" else rep.to_csv()
    _emit(_echo(argv) + body, a.out)


def _cmd_empirical(a, argv):
    data = load_panel(a.input, log=False, delta=a.delta)
    spec = exps.ExperimentSpec(kind="rolling-empirical", window=a.window, horizons=tuple(a.h),
                               delta=(a.delta,), breakpoints=tuple(a.breakpoints),
                               anchor=not a.no_anchor, har_log=a.har_log, reps=1)
    rep = exps.run_rolling_empirical(spec, data)
    if a.format == "text":
        body = rep.render_text() + "\n"
    else:
        body = rep.to_csv("rmsfe") + rep.to_csv("versus_fbm")
    _emit(_echo(argv) + body, a.out)
    if a.hurst_out:
        rows = exps.rolling_hurst_rows(rep, data.tickers)
        buf = io.StringIO()
        w = csv.DictWriter(buf, ["date", *data.tickers], lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (format_float(v) if k != "date" else v) for k, v in r.items()})
        _emit(_echo(argv) + buf.getvalue(), a.hurst_out)


def _cmd_har(a, argv):
    data = load_panel(a.input)
    X = data.rv if not a.window else data.rv[-a.window:]
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["date", "component", "h", "forecast", "actual", "anchor", "msfe_theoretical", "model",
                 "rank_deficient"])
    J = X.shape[1]
    for j in range(J):
        for h in a.h:
            if a.vhar:
                fit, model = vhar_fit_forecast(X, j, h, log=a.log_har), f"VHAR{J}"
            else:
                fit, model = har_fit_forecast(X[:, j], h, log=a.log_har), "HAR"
            wr.writerow([data.dates[-1], data.tickers[j], h, format_float(fit.forecast), "", "0.0", "",
                         model, int(fit.rank_deficient)])
    _emit(_echo(argv) + buf.getvalue(), a.out)


def _cmd_curves(a, argv):
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    if a.figure == "weights":
        wr.writerow(["H2", "rel_w11", "rel_w12", "w11_ratio", "valid"])
        for row in fc.weight_curves(a.H1, a.rho, a.t, a.h):
            wr.writerow([format_float(v) for v in row[:4]] + [int(row[4])])
    elif a.figure == "msfe":
        wr.writerow(["H2", "relative_msfe"])
        for row in fc.relative_msfe_curve(a.H1, a.rho, a.t, a.h):
            wr.writerow([format_float(v) for v in row])
    else:
        wr.writerow(["d", "relative_msfe"])
        for d, v in fc.relative_msfe_dimension(a.rho, a.H1, a.H, a.t, a.h, np.arange(1, a.dmax + 1)):
            wr.writerow([int(d), format_float(v)])
    _emit(_echo(argv) + buf.getvalue(), a.out)


_COMMANDS = {"simulate": _cmd_simulate, "estimate": _cmd_estimate, "test-reversibility": _cmd_test,
             "forecast": _cmd_forecast, "mc": _cmd_mc, "empirical": _cmd_empirical, "har": _cmd_har,
             "curves": _cmd_curves}


def cli_dispatch(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        _COMMANDS[args.command](args, argv)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def main():
    sys.exit(cli_dispatch())
