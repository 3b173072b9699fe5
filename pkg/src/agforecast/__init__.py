"""Hybrid ARIMA-GARCH / LSTM one-step forecasting toolkit."""

from .arima import ArimaModel, ArimaOrder, ArmaParams, auto_order, fit_arima, forecast_one
from .errors import (
    AgForecastError,
    ConvergenceError,
    DivergenceError,
    SelectionError,
    ZeroVarianceError,
)
from .evaluate import (
    ArmaGarchForecaster,
    ComparisonReport,
    DecompositionForecaster,
    Forecaster,
    LstmForecaster,
    MetricsReport,
    RandomWalkForecaster,
    RollingTrace,
    StatFeatureForecaster,
    compare,
    improvement_percent,
    metrics,
    rolling_one_step,
)
from .garch import (
    ArmaGarchModel,
    GarchOrder,
    GarchParams,
    conditional_variance,
    fit_arma_garch,
    fit_garch,
    forecast_variance_one,
    garch_order_select,
    refit_arma_garch,
    simulate_arma,
    simulate_garch,
)
from .hybrid import (
    DecompositionModel,
    StatFeatureModel,
    fit_decomposition,
    fit_stat_feature,
    predict_one_decomposition,
    predict_one_stat_feature,
)
from .lstm import LstmConfig, LstmParams, Normalizer, make_windows, predict_one, train
from .series import (
    DifferencedSeries,
    TimeSeries,
    difference,
    integrate,
    prefix_subsets,
    train_test_split,
)
from .stattests import (
    NullHypothesis,
    TestResult,
    acf,
    adf_test,
    arch_lm_test,
    chi_square_cdf,
    kpss_test,
    ljung_box_test,
    pacf,
)

__version__ = "0.1.0"
