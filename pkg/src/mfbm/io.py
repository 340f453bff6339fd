"""CSV ingestion, config files and path serialisation."""
from __future__ import annotations

import csv
import datetime as _dt
import math
from dataclasses import dataclass

import numpy as np

from .errors import PanelError, ParameterDomainError, ValidationError
from .kernel import ModelParams
from .simulate import SamplePath

DEFAULT_DELTA = 1 / 252

# error codes for malformed panels
BAD_HEADER = "bad-header"
BAD_DATE = "bad-date"
NON_MONOTONE = "non-monotone dates"
NON_NUMERIC = "non-numeric cell"
MISSING = "missing cell"
NON_POSITIVE = "non-positive RV"
EMPTY = "empty panel"


@dataclass
class PanelData:
    dates: list
    tickers: list
    values: np.ndarray
    scale: str = "rv"           # "rv" or "log-rv"
    delta: float = DEFAULT_DELTA

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim == 1:
            self.values = self.values[:, None]
        if self.values.shape != (len(self.dates), len(self.tickers)):
            raise PanelError(BAD_HEADER, "value matrix does not match dates x tickers")
        if self.scale not in ("rv", "log-rv"):
            raise ParameterDomainError("scale must be 'rv' or 'log-rv'")

    @property
    def n(self) -> int:
        return len(self.dates)

    @property
    def rv(self) -> np.ndarray:
        return np.exp(self.values) if self.scale == "log-rv" else self.values

    def to_path(self) -> SamplePath:
        """Levels as a path with the first row as origin."""
        return SamplePath(self.values - self.values[0], self.delta)


def _parse_date(s, line):
    try:
        return _dt.date.fromisoformat(s.strip())
    except ValueError:
        raise PanelError(BAD_DATE, f"line {line}: cannot parse date {s!r}") from None


def load_panel(path, log: bool = False, delta: float = DEFAULT_DELTA) -> PanelData:
    """Read ``date,TICK1,TICK2,...``; optionally take logs of the RVs."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    if not rows:
        raise PanelError(EMPTY, "no rows")
    header = [c.strip() for c in rows[0]]
    if len(header) < 2 or header[0].lower() != "date" or any(not c for c in header[1:]):
        raise PanelError(BAD_HEADER, "header must be date,TICK1,TICK2,...")
    if len(set(header[1:])) != len(header) - 1:
        raise PanelError(BAD_HEADER, "duplicate ticker names")
    body = rows[1:]
    if not body:
        raise PanelError(EMPTY, "header only")
    dates, vals = [], []
    prev = None
    for k, r in enumerate(body, start=2):
        if len(r) != len(header) or any(c.strip() == "" for c in r):
            raise PanelError(MISSING, f"line {k}: expected {len(header)} non-empty cells")
        d = _parse_date(r[0], k)
        if prev is not None and d <= prev:
            raise PanelError(NON_MONOTONE, f"line {k}: {d} does not follow {prev}")
        prev = d
        try:
            row = [float(c) for c in r[1:]]
        except ValueError:
            raise PanelError(NON_NUMERIC, f"line {k}: non-numeric value") from None
        if not all(math.isfinite(v) for v in row):
            raise PanelError(NON_NUMERIC, f"line {k}: non-finite value")
        dates.append(d.isoformat())
        vals.append(row)
    X = np.array(vals)
    if log:
        if np.any(X <= 0):
            k = int(np.argwhere(X <= 0)[0, 0]) + 2
            raise PanelError(NON_POSITIVE, f"line {k}: RV must be positive before taking logs")
        X = np.log(X)
    elif np.any(X < 0):
        raise PanelError(NON_POSITIVE, "realized volatility must be non-negative")
    return PanelData(dates, header[1:], X, "log-rv" if log else "rv", delta)


def write_panel(panel: PanelData, path, comment: str | None = None):
    with open(path, "w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", *panel.tickers])
        for d, row in zip(panel.dates, panel.rv):
            w.writerow([d, *(repr(float(v)) for v in row)])


# ---------------------------------------------------------------- paths

def path_to_csv(path: SamplePath, comment: str | None = None) -> str:
    """``t,B1,...,Bd`` with full round-trip precision."""
    lines = [f"# {comment}"] if comment else []
    lines.append(",".join(["t"] + [f"B{i + 1}" for i in range(path.d)]))
    for t, row in zip(path.times, path.values):
        lines.append(",".join(repr(float(v)) for v in (t, *row)))
    return "\n".join(lines) + "\n"


def read_path_csv(path, delta: float | None = None) -> SamplePath:
    """Inverse of :func:`path_to_csv`; ``delta`` defaults to the time spacing."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    head, body = rows[0], rows[1:]
    try:
        A = np.array([[float(c) for c in r] for r in body])
    except ValueError:
        raise PanelError(NON_NUMERIC, "non-numeric value in path file") from None
    if head[0] == "t":
        t, X = A[:, 0], A[:, 1:]
        if delta is None:
            if t.size < 2:
                raise ValidationError("cannot infer delta from a single row")
            delta = float(t[1] - t[0])
    else:
        X = A
        if delta is None:
            raise ValidationError("delta required for files without a time column")
    return SamplePath(X, delta)


# --------------------------------------------------------------- config

def parse_config(text: str) -> dict:
    """Flat ``key = value`` lines; ``key = [`` opens a matrix block closed by ``]``.

    Scalars become int/float/bool/str, comma lists become lists, matrix
    blocks become 2-D arrays. ``#`` starts a comment.
    """
    cfg, block, key = {}, None, None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if block is not None:
            if line == "]":
                cfg[key] = np.array(block, dtype=float)
                block = None
                continue
            try:
                block.append([float(v) for v in line.replace(",", " ").split()])
            except ValueError:
                raise ValidationError(f"config line {lineno}: bad matrix row") from None
            continue
        if "=" not in line:
            raise ValidationError(f"config line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if val == "[":
            block = []
            continue
        cfg[key] = _scalar_or_list(val)
    if block is not None:
        raise ValidationError("config: unterminated matrix block")
    return cfg


def _scalar(v: str):
    low = v.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    for conv in (int, float):
        try:
            return conv(v)
        except ValueError:
            pass
    if "/" in v:
        a, b = v.split("/", 1)
        try:
            return float(a) / float(b)
        except ValueError:
            pass
    return v


def _scalar_or_list(v: str):
    if "," in v:
        return [_scalar(x.strip()) for x in v.split(",") if x.strip()]
    return _scalar(v)


def load_config(path) -> dict:
    with open(path) as fh:
        return parse_config(fh.read())


def params_from_config(cfg: dict) -> ModelParams:
    """Build ModelParams from keys ``hurst``, ``sigma2``, ``rho``, ``eta``."""
    if "hurst" not in cfg:
        raise ValidationError("config needs 'hurst'")
    hurst = np.atleast_1d(np.asarray(cfg["hurst"], dtype=float))
    d = hurst.size
    sigma2 = cfg.get("sigma2", 1.0)
    rho = cfg.get("rho", 0.0)
    eta = cfg.get("eta", 0.0)
    if d == 2:
        if np.ndim(rho) == 0:
            rho = np.array([[1.0, rho], [rho, 1.0]])
        if np.ndim(eta) == 0:
            eta = np.array([[0.0, eta], [-eta, 0.0]])
    return ModelParams(hurst, np.asarray(sigma2, float), np.asarray(rho, float), np.asarray(eta, float))


def format_float(v) -> str:
    v = float(v)
    return repr(v) if math.isfinite(v) else "nan"
