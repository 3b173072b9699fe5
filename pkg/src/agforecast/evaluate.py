"""Error metrics and the rolling one-step evaluation harness.

The rolling protocol mirrors how these models are used on live data: fit
the structure once on the training window, then for every test point
predict one step ahead, reveal the true value, and re-estimate coefficients
(never the structure) before the next step. Each trace also records the
naive lag-one copy so the ubiquitous "follows yesterday" behaviour of
one-step forecasts stays quantified next to every model.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .arima import ArimaOrder, forecast_one
from .errors import ConvergenceError
from .garch import (
    ArmaGarchModel,
    GarchOrder,
    fit_arma_garch,
    refit_arma_garch,
)
from .hybrid import (
    DecompositionModel,
    StatFeatureModel,
    fit_decomposition,
    fit_stat_feature,
    predict_one_decomposition,
    predict_one_stat_feature,
)
from .lstm import LstmConfig, make_windows, predict_one, train
from .series import TimeSeries, prefix_subsets

__all__ = [
    "MetricsReport",
    "metrics",
    "improvement_percent",
    "Forecaster",
    "RandomWalkForecaster",
    "ArmaGarchForecaster",
    "LstmForecaster",
    "DecompositionForecaster",
    "StatFeatureForecaster",
    "TraceStep",
    "RollingTrace",
    "rolling_one_step",
    "ComparisonReport",
    "compare",
]

_REFIT_MAX_ITER = 500


@dataclass(frozen=True)
class MetricsReport:
    """MSE, RMSE, MAE, and MAPE (in percent) over n one-step predictions.
    ``mape_percent`` is None when any actual value is zero."""

    mse: float
    rmse: float
    mae: float
    mape_percent: float | None
    n: int


def metrics(actual, predicted) -> MetricsReport:
    """The four standard error metrics of predictions against actuals."""
    a = np.asarray(actual, dtype=np.float64).reshape(-1)
    p = np.asarray(predicted, dtype=np.float64).reshape(-1)
    if len(a) == 0 or len(a) != len(p):
        raise ValueError(f"need equal nonzero lengths, got {len(a)} and {len(p)}")
    err = p - a
    mse = float(np.mean(err * err))
    rmse = math.sqrt(mse)
    mae = float(np.mean(np.abs(err)))
    if np.any(a == 0.0):
        mape = None
    else:
        mape = float(100.0 * np.mean(np.abs(err / a)))
    return MetricsReport(mse=mse, rmse=rmse, mae=mae, mape_percent=mape, n=len(a))


def improvement_percent(baseline: MetricsReport, candidate: MetricsReport):
    """Per-metric improvement of candidate over baseline,
    100 * (baseline - candidate) / baseline. Entries with a zero or
    undefined baseline come back as None."""
    out = []
    pairs = [
        (baseline.mse, candidate.mse),
        (baseline.rmse, candidate.rmse),
        (baseline.mae, candidate.mae),
        (baseline.mape_percent, candidate.mape_percent),
    ]
    for base, cand in pairs:
        if base is None or cand is None or base == 0.0:
            out.append(None)
        else:
            out.append(100.0 * (base - cand) / base)
    return tuple(out)


class Forecaster(ABC):
    """Contract the rolling harness drives: ``fit`` establishes structure
    and coefficients on the training window; ``refit`` re-estimates
    coefficients only (structure frozen, warm-started); ``predict_one``
    is a pure function of the observed history."""

    name: str = "forecaster"

    @abstractmethod
    def fit(self, train_series: TimeSeries) -> None: ...

    @abstractmethod
    def refit(self, history: TimeSeries) -> None: ...

    @abstractmethod
    def predict_one(self, history: TimeSeries) -> float: ...

    @abstractmethod
    def structure(self) -> str: ...


class RandomWalkForecaster(Forecaster):
    """Driftless random walk: the forecast is the last observed value."""

    def __init__(self, name: str = "random-walk"):
        self.name = name

    def fit(self, train_series: TimeSeries) -> None:
        pass

    def refit(self, history: TimeSeries) -> None:
        pass

    def predict_one(self, history: TimeSeries) -> float:
        return float(history.values[-1])

    def structure(self) -> str:
        return "(0,1,0) mu=0"


class ArmaGarchForecaster(Forecaster):
    """Pure ARIMA-GARCH one-step conditional-mean forecaster."""

    def __init__(self, arima_order: ArimaOrder, garch_order: GarchOrder | None,
                 name: str = "ag"):
        self.name = name
        self.arima_order = arima_order
        self.garch_order = garch_order
        self.model: ArmaGarchModel | None = None

    def fit(self, train_series: TimeSeries) -> None:
        self.model = fit_arma_garch(train_series, self.arima_order, self.garch_order)

    def refit(self, history: TimeSeries) -> None:
        self.model = refit_arma_garch(self.model, history, max_iter=_REFIT_MAX_ITER)

    def predict_one(self, history: TimeSeries) -> float:
        return forecast_one(self.model.arima, history)

    def structure(self) -> str:
        garch = f"-garch{self.garch_order}" if self.garch_order else ""
        return f"arima{self.arima_order}{garch}"


class LstmForecaster(Forecaster):
    """Plain LSTM over raw observations. Frozen after training: the rolling
    refit step is a no-op by design."""

    def __init__(self, config: LstmConfig, name: str = "lstm"):
        if config.input_dim != 1:
            raise ValueError("the plain LSTM forecaster takes one input feature")
        self.name = name
        self.config = config
        self.params = None
        self.normalizer = None

    def fit(self, train_series: TimeSeries) -> None:
        windows = make_windows(train_series.values, self.config.lookback_k)
        result = train(self.config, windows)
        self.params, self.normalizer = result.params, result.normalizer

    def refit(self, history: TimeSeries) -> None:
        pass

    def predict_one(self, history: TimeSeries) -> float:
        k = self.config.lookback_k
        window = history.values[-k:][:, None]
        return predict_one(self.params, self.normalizer, window)

    def structure(self) -> str:
        return f"lstm(k={self.config.lookback_k},hidden={self.config.hidden_size})"


class DecompositionForecaster(Forecaster):
    """Decomposition hybrid: statistical stage refits each step, the
    residual network stays frozen."""

    def __init__(self, arima_order: ArimaOrder, garch_order: GarchOrder | None,
                 lstm_config: LstmConfig, name: str = "ag-lstm"):
        self.name = name
        self.arima_order = arima_order
        self.garch_order = garch_order
        self.lstm_config = lstm_config
        self.model: DecompositionModel | None = None

    def fit(self, train_series: TimeSeries) -> None:
        self.model = fit_decomposition(train_series, self.arima_order,
                                       self.garch_order, self.lstm_config)

    def refit(self, history: TimeSeries) -> None:
        ag = refit_arma_garch(self.model.ag, history, max_iter=_REFIT_MAX_ITER)
        self.model = DecompositionModel(
            ag=ag, lstm_params=self.model.lstm_params,
            normalizer=self.model.normalizer, lookback_k=self.model.lookback_k,
        )

    def predict_one(self, history: TimeSeries) -> float:
        return predict_one_decomposition(self.model, history)

    def structure(self) -> str:
        garch = f"-garch{self.garch_order}" if self.garch_order else ""
        return (f"arima{self.arima_order}{garch}"
                f"+lstm(k={self.lstm_config.lookback_k})")


class StatFeatureForecaster(Forecaster):
    """Feature-extraction hybrid: h_t feeds the network as a second channel."""

    def __init__(self, arima_order: ArimaOrder, garch_order: GarchOrder,
                 lstm_config: LstmConfig, name: str = "lstm-garch"):
        self.name = name
        self.arima_order = arima_order
        self.garch_order = garch_order
        self.lstm_config = lstm_config
        self.model: StatFeatureModel | None = None

    def fit(self, train_series: TimeSeries) -> None:
        self.model = fit_stat_feature(train_series, self.arima_order,
                                      self.garch_order, self.lstm_config)

    def refit(self, history: TimeSeries) -> None:
        ag = refit_arma_garch(self.model.ag, history, max_iter=_REFIT_MAX_ITER)
        self.model = StatFeatureModel(
            ag=ag, lstm_params=self.model.lstm_params,
            normalizer=self.model.normalizer, lookback_k=self.model.lookback_k,
        )

    def predict_one(self, history: TimeSeries) -> float:
        return predict_one_stat_feature(self.model, history)

    def structure(self) -> str:
        return (f"lstm(k={self.lstm_config.lookback_k})"
                f"+h[arima{self.arima_order}-garch{self.garch_order}]")


@dataclass(frozen=True)
class TraceStep:
    index: int
    date: object | None
    actual: float
    predicted: float
    lag_one: float
    refit_failed: bool
    structure: str


@dataclass(frozen=True)
class RollingTrace:
    model_name: str
    steps: tuple[TraceStep, ...]

    @property
    def actuals(self) -> np.ndarray:
        return np.array([s.actual for s in self.steps])

    @property
    def predictions(self) -> np.ndarray:
        return np.array([s.predicted for s in self.steps])

    @property
    def lag_one(self) -> np.ndarray:
        return np.array([s.lag_one for s in self.steps])


def rolling_one_step(forecaster: Forecaster, train_series: TimeSeries,
                     test_series: TimeSeries) -> RollingTrace:
    """Fit on train, then walk the test set one step at a time.

    After each revealed value the forecaster's coefficients are refit on the
    extended history (warm-started, structure frozen). A refit that fails to
    converge is never silent: the previous coefficients carry forward and
    the step that used them is flagged in the trace.
    """
    forecaster.fit(train_series)
    history = TimeSeries(train_series.values)
    steps = []
    pending_flag = False
    n_test = len(test_series)
    for t in range(n_test):
        actual = float(test_series.values[t])
        date = test_series.dates[t] if test_series.dates is not None else None
        lag_one = float(history.values[-1])
        predicted = forecaster.predict_one(history)
        steps.append(TraceStep(
            index=t, date=date, actual=actual, predicted=float(predicted),
            lag_one=lag_one, refit_failed=pending_flag,
            structure=forecaster.structure(),
        ))
        history = history.appended(actual)
        pending_flag = False
        if t < n_test - 1:
            try:
                forecaster.refit(history)
            except ConvergenceError:
                pending_flag = True
    return RollingTrace(model_name=forecaster.name, steps=tuple(steps))


@dataclass(frozen=True)
class ComparisonReport:
    """Per-model, per-prefix-subset metrics plus the full traces and the
    lag-one baseline, all computed from one rolling pass per model."""

    subset_lengths: tuple[int, ...]
    traces: dict[str, RollingTrace]
    model_metrics: dict[str, dict[int, MetricsReport]]
    lag_one_metrics: dict[int, MetricsReport]


def compare(models: list[Forecaster], train_series: TimeSeries,
            test_series: TimeSeries, subset_lengths) -> ComparisonReport:
    """Evaluate every forecaster over the full test set and score each
    prefix subset from the same trace."""
    if len(models) == 0:
        raise ValueError("at least one model is required")
    names = [m.name for m in models]
    if len(set(names)) != len(names):
        raise ValueError(f"model names must be unique, got {names}")
    # Validates lengths (strictly increasing, within the test set).
    prefix_subsets(test_series, subset_lengths)

    traces: dict[str, RollingTrace] = {}
    model_metrics: dict[str, dict[int, MetricsReport]] = {}
    lag_one_metrics: dict[int, MetricsReport] = {}
    for model in models:
        trace = rolling_one_step(model, train_series, test_series)
        traces[model.name] = trace
        per_subset = {}
        for length in subset_lengths:
            per_subset[length] = metrics(trace.actuals[:length],
                                         trace.predictions[:length])
        model_metrics[model.name] = per_subset
    reference = traces[names[0]]
    for trace in traces.values():
        if not np.array_equal(trace.actuals, reference.actuals):
            raise AssertionError("traces disagree on the actual test values")
    for length in subset_lengths:
        lag_one_metrics[length] = metrics(reference.actuals[:length],
                                          reference.lag_one[:length])
    return ComparisonReport(
        subset_lengths=tuple(subset_lengths),
        traces=traces,
        model_metrics=model_metrics,
        lag_one_metrics=lag_one_metrics,
    )
