"""How much does a second, differently rough series help forecasting?

With known parameters, the optimal forecast is a conditional mean. When all
Hurst exponents coincide, other series carry no extra information; when they
differ, the correlation can be exploited.
"""
import math

from mfbm import ConditionalForecaster, ModelParams
from mfbm.forecast import relative_msfe_dimension

t, delta = 500, 1 / 250
for H2 in (0.1, 0.4):
    p = ModelParams.bivariate(0.1, H2, rho=0.8)
    biv = ConditionalForecaster(p, t, delta).weights(0, 1)[1]
    uni = ConditionalForecaster(p.subset([0]), t, delta).weights(0, 1)[1]
    print(f"H = (0.1, {H2}): one-step RMSFE univariate {math.sqrt(uni):.4f}, "
          f"bivariate {math.sqrt(biv):.4f}  ({100 * (1 - biv / uni):.1f}% lower MSFE)")

print("\nadding more exchangeable companions (rho = 0.8, H1 = 0.4, others 0.1):")
for d, r in relative_msfe_dimension(0.8, 0.4, 0.1, 1.0, 1.0, dims=[1, 2, 5, 20, 100, 1000]):
    print(f"  d = {int(d):4d}: relative MSFE {r:.4f}")
