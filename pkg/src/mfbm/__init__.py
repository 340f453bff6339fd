"""Multivariate fractional Brownian motion: model, simulation, estimation, forecasting."""
from .errors import (DegeneratePathError, ExistenceError, InsufficientDataError, MfbmError,
                     NumericalError, PanelError, ParameterDomainError, UnidentifiedError,
                     ValidationError)
from .kernel import (ModelParams, cross_cov, increment_cov, increment_cov_matrix, level_cov_matrix,
                     rho_max, validate_existence, w_kernel)
from .simulate import PathSampler, SamplePath, sample_path
from .estimate import (EstimateReport, avar_eta, avar_hurst, avar_rho, avar_sigma2, estimate_all,
                       estimate_eta, estimate_hurst, estimate_rho, estimate_sigma2,
                       test_time_reversibility)
from .ac_baseline import FilterSpec, ac_fit
from .forecast import (ConditionalForecaster, ForecastResult, forecast_conditional_mean,
                       forecast_one_obs_bivariate, forecast_weights_general, forecast_window,
                       msfe_exchangeable)
from .benchmarks import har_design, har_fit_forecast, vhar_fit_forecast

__version__ = "0.1.0"
