"""A rolling-window backtest on a synthetic volatility panel.

Log realized volatility of four assets is simulated with heterogeneous
roughness. At each origin the parameters are re-estimated on the last 250
days and forecasts from the univariate and multivariate models are compared
with HAR benchmarks. Takes around a minute.
"""
from mfbm import experiments as ex

panel = ex.synthetic_panel((0.1, 0.2, 0.35, 0.45), rho=0.4, T=400, seed=3)
spec = ex.ExperimentSpec(kind="rolling-empirical", window=250, horizons=(1, 5), delta=(1 / 252,), reps=1)
report = ex.run(spec, panel)
print(report.render_text())
