import io as _io
import subprocess
import sys

import numpy as np
import pytest

from mfbm import ModelParams, estimate_all, sample_path
from mfbm.cli import cli_dispatch, eval_fraction
from mfbm.errors import PanelError, ValidationError
from mfbm.experiments import synthetic_panel
from mfbm.io import (load_panel, params_from_config, parse_config, path_to_csv, read_path_csv,
                     write_panel)


def write(tmp_path, text, name="p.csv"):
    f = tmp_path / name
    f.write_text(text)
    return f


# ------------------------------------------------------------------ panel

def test_load_well_formed(tmp_path):
    f = write(tmp_path, "date,AAA,BBB\n2020-01-02,1.0,2.0\n2020-01-03,1.5,2.5\n2020-01-06,1.2,2.2\n")
    p = load_panel(f)
    assert p.n == 3 and p.tickers == ["AAA", "BBB"] and p.scale == "rv"
    lp = load_panel(f, log=True)
    np.testing.assert_allclose(lp.values, np.log(p.values))
    np.testing.assert_allclose(lp.rv, p.values)
    np.testing.assert_array_equal(lp.to_path().values[0], [0.0, 0.0])


@pytest.mark.parametrize("text,code,log", [
    ("date,A\n2020-01-02,1\n2020-01-02,2\n", "non-monotone dates", False),
    ("date,A\n2020-01-03,1\n2020-01-02,2\n", "non-monotone dates", False),
    ("date,A\n2020-01-02,0\n", "non-positive RV", True),
    ("date,A\n2020-01-02,-1\n", "non-positive RV", False),
    ("date,A\n2020-01-02,abc\n", "non-numeric cell", False),
    ("date,A,B\n2020-01-02,1,\n", "missing cell", False),
    ("date,A,B\n2020-01-02,1\n", "missing cell", False),
    ("day,A\n2020-01-02,1\n", "bad-header", False),
    ("date,A,A\n2020-01-02,1,2\n", "bad-header", False),
    ("date,A\n02/01/2020,1\n", "bad-date", False),
    ("date,A\n", "empty panel", False),
    ("", "empty panel", False),
])
def test_load_errors(tmp_path, text, code, log):
    with pytest.raises(PanelError) as ei:
        load_panel(write(tmp_path, text), log=log)
    assert ei.value.code == code


def test_write_panel_round_trip(tmp_path):
    panel = synthetic_panel((0.2, 0.3), T=40)
    write_panel(panel, tmp_path / "x.csv", comment="config: test")
    back = load_panel(tmp_path / "x.csv")
    np.testing.assert_array_equal(back.values, panel.values)
    assert back.dates == panel.dates


def test_path_csv_round_trip(tmp_path):
    path = sample_path(ModelParams.bivariate(0.1, 0.4, rho=0.4), 50, 1 / 250, seed=1)
    f = write(tmp_path, path_to_csv(path, "config: x"))
    back = read_path_csv(f)
    np.testing.assert_array_equal(back.values, path.values)
    assert back.delta == pytest.approx(path.delta, rel=1e-12)
    assert path_to_csv(path).splitlines()[0] == "t,B1,B2"


# ----------------------------------------------------------------- config

def test_parse_config():
    cfg = parse_config("""
    # comment
    hurst = 0.1, 0.4
    sigma2 = 1, 2
    delta = 1/250
    flag = yes
    rho = [
      1 0.4
      0.4 1
    ]
    name = run1   # trailing comment
    """)
    assert cfg["hurst"] == [0.1, 0.4] and cfg["delta"] == pytest.approx(0.004)
    assert cfg["flag"] is True and cfg["name"] == "run1"
    p = params_from_config(cfg)
    assert p.rho[0, 1] == 0.4 and p.sigma2.tolist() == [1.0, 2.0]
    assert params_from_config({"hurst": [0.2, 0.3], "rho": 0.5, "eta": 0.1}).eta[1, 0] == -0.1
    with pytest.raises(ValidationError):
        parse_config("rho = [\n1 2\n")
    with pytest.raises(ValidationError):
        parse_config("just words")
    with pytest.raises(ValidationError):
        params_from_config({})


def test_eval_fraction():
    assert eval_fraction("1/252") == pytest.approx(1 / 252)
    assert eval_fraction("0.25") == 0.25


# -------------------------------------------------------------------- CLI

def run_cli(args, capsys):
    code = cli_dispatch(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_no_args_and_unknown_flag(capsys):
    assert run_cli([], capsys)[0] == 2
    assert run_cli(["simulate", "--bogus"], capsys)[0] == 2
    assert run_cli(["nonsense"], capsys)[0] == 2


def test_validation_and_numerical_exit_codes(capsys, tmp_path):
    code, _, err = run_cli(["simulate", "--hurst", "0.2,0.8", "--rho", "0.9", "--n", "10"], capsys)
    assert code == 2 and "existence" in err
    bad = write(tmp_path, "date,A\n2020-01-02,1\n2020-01-01,2\n")
    assert run_cli(["estimate", "--input", str(bad)], capsys)[0] == 2
    assert run_cli(["estimate", "--input", str(tmp_path / "missing.csv")], capsys)[0] == 2
    # H1 + H2 = 1 exactly: eta unidentified is a numerical failure
    x = 10 + np.r_[0.0, np.cumsum(np.tile([1.0, 1.0, -1.0, -1.0], 25))]
    rows = "".join(f"{d},{a},{10 + 2 * (a - 10)}\n" for d, a in
                   zip(np.arange(np.datetime64("2020-01-01"), np.datetime64("2020-01-01") + x.size), x))
    two = write(tmp_path, "date,A,B\n" + rows, "two.csv")
    code, _, err = run_cli(["test-reversibility", "--input", str(two)], capsys)
    assert code == 3 and "unidentified" in err
    code, _, err = run_cli(["forecast", "--input", str(two), "--hurst", "0.2,0.8", "--rho", "0.9"], capsys)
    assert code == 2 and "existence" in err


def test_simulate_estimate_round_trip(tmp_path, capsys):
    out = tmp_path / "path.csv"
    code, _, _ = run_cli(["simulate", "--hurst", "0.1,0.4", "--rho", "0.4", "--n", "300",
                          "--delta", "1/250", "--seed", "5", "--out", str(out)], capsys)
    assert code == 0
    text = out.read_text()
    assert text.startswith("# config:")
    mem = sample_path(ModelParams.bivariate(0.1, 0.4, rho=0.4), 300, 1 / 250, seed=5)
    back = read_path_csv(out)
    np.testing.assert_array_equal(back.values, mem.values)
    assert estimate_all(back).to_csv() == estimate_all(mem).to_csv()


def test_estimate_and_test_commands(tmp_path, capsys):
    panel = synthetic_panel((0.1, 0.3, 0.4), T=300, seed=1, tickers=["AA", "BB", "CC"])
    f = tmp_path / "panel.csv"
    write_panel(panel, f)
    code, out, _ = run_cli(["estimate", "--input", str(f), "--log", "--alpha", "0.01"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# config:") and lines[1].startswith("method,kind,i,j,name")
    assert len(lines) == 2 + 3 + 3
    code, out, _ = run_cli(["estimate", "--input", str(f), "--log", "--format", "text"], capsys)
    assert "Ticker" in out and "CC" in out
    code, out, _ = run_cli(["estimate", "--input", str(f), "--log", "--method", "AC"], capsys)
    assert code == 0 and "\nAC,component" in out
    code, out, _ = run_cli(["test-reversibility", "--input", str(f), "--log", "--pair", "1,3"], capsys)
    assert code == 0 and out.splitlines()[2].startswith("AA,CC,")
    assert run_cli(["test-reversibility", "--input", str(f), "--pair", "1,1"], capsys)[0] == 2


def test_forecast_command(tmp_path, capsys):
    panel = synthetic_panel((0.1, 0.4), T=220, seed=3)
    f = tmp_path / "panel.csv"
    write_panel(panel, f)
    code, out, _ = run_cli(["forecast", "--input", str(f), "--log", "--h", "1,2"], capsys)
    assert code == 0
    rows = out.splitlines()
    assert rows[1] == "date,component,h,forecast,actual,anchor,msfe_theoretical,model"
    assert len(rows) == 2 + 4
    code, out, _ = run_cli(["forecast", "--input", str(f), "--log", "--h", "1", "--window", "150",
                            "--origins", "3", "--no-anchor"], capsys)
    body = out.splitlines()[2:]
    assert code == 0 and len(body) == 3 * 2
    assert all(r.split(",")[4] != "" for r in body)        # actuals available in backtest
    assert all(r.split(",")[5] == "0.0" for r in body)     # no anchor


def test_mc_har_curves_empirical(tmp_path, capsys):
    code, out, _ = run_cli(["mc", "--preset", "table1", "--reps", "20", "--seed", "42"], capsys)
    assert code == 0 and out.count("\n") > 10 and "param" in out.splitlines()[2]
    cfg = write(tmp_path, "kind = size-power\nhurst = 0.1, 0.4\nrho = 0.4\nn = 300\neta_grid = 0, 0.5\n",
                "exp.cfg")
    code, out, _ = run_cli(["mc", "--config", str(cfg), "--reps", "20"], capsys)
    assert code == 0 and "rejection" in out
    assert run_cli(["mc"], capsys)[0] == 2
    panel = synthetic_panel((0.1, 0.4), T=160, seed=3)
    f = tmp_path / "panel.csv"
    write_panel(panel, f)
    code, out, _ = run_cli(["har", "--input", str(f), "--h", "1,5", "--vhar"], capsys)
    assert code == 0 and out.count("VHAR2") == 4
    code, out, _ = run_cli(["curves", "--figure", "dimension", "--rho", "0.8", "--dmax", "5"], capsys)
    assert code == 0 and out.splitlines()[-1].startswith("5,")
    hurst = tmp_path / "h.csv"
    code, out, _ = run_cli(["empirical", "--input", str(f), "--window", "120", "--h", "1,2",
                            "--hurst-out", str(hurst)], capsys)
    assert code == 0 and "versus_fbm" not in out and "diff,se_diff" in out
    assert hurst.read_text().splitlines()[1] == "date,S1,S2"


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "mfbm", "curves", "--figure", "msfe"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("# config:")
    r = subprocess.run([sys.executable, "-m", "mfbm"], capture_output=True, text=True)
    assert r.returncode == 2 and "usage" in r.stderr
