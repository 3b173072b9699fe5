"""The two statistical/neural integration strategies.

Decomposition: an ARIMA-GARCH stage models the stable component; an LSTM is
trained on that stage's residual series, and one-step predictions add the
two parts. Passing ``garch_order=None`` degenerates to a pure ARIMA plus
residual-LSTM pipeline; an order of (0, d, 0) with a GARCH order degenerates
to the variance-only counterpart.

Feature extraction: the fitted conditional-variance series h_t is fed to a
two-input LSTM alongside the observations themselves, so the network sees a
volatility summary it could not compute from the raw window alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .arima import ArimaOrder, forecast_one, residuals
from .errors import ZeroVarianceError
from .garch import ArmaGarchModel, GarchOrder, conditional_variance, fit_arma_garch
from .lstm import (
    LstmConfig,
    LstmParams,
    Normalizer,
    make_windows,
    predict_one,
    train,
)
from .series import TimeSeries, asarray_1d

__all__ = [
    "DecompositionModel",
    "StatFeatureModel",
    "fit_decomposition",
    "predict_one_decomposition",
    "fit_stat_feature",
    "predict_one_stat_feature",
    "to_checkpoint",
    "from_checkpoint",
]


@dataclass(frozen=True)
class DecompositionModel:
    """ARIMA-GARCH stage plus an LSTM trained on its in-sample residuals."""

    ag: ArmaGarchModel
    lstm_params: LstmParams
    normalizer: Normalizer
    lookback_k: int


@dataclass(frozen=True)
class StatFeatureModel:
    """ARIMA-GARCH stage used as an h_t feature extractor for a two-input LSTM."""

    ag: ArmaGarchModel
    lstm_params: LstmParams
    normalizer: Normalizer
    lookback_k: int


def fit_decomposition(train_series: TimeSeries, arima_order: ArimaOrder,
                      garch_order: GarchOrder | None,
                      lstm_config: LstmConfig) -> DecompositionModel:
    """Fit the decomposition hybrid on a training series.

    ``garch_order=None`` skips the variance stage (ARIMA + residual LSTM).
    """
    if lstm_config.input_dim != 1:
        raise ValueError("the residual network takes exactly one input feature")
    ag = fit_arma_garch(train_series, arima_order, garch_order)
    r = ag.arima.residuals.values
    k = lstm_config.lookback_k
    if len(r) < k + 1:
        raise ValueError(
            f"residual series of length {len(r)} cannot supply lookback {k} windows"
        )
    windows = make_windows(r, k)
    result = train(lstm_config, windows)
    return DecompositionModel(ag=ag, lstm_params=result.params,
                              normalizer=result.normalizer, lookback_k=k)


def predict_one_decomposition(model: DecompositionModel, history: TimeSeries) -> float:
    """One-step forecast: ARIMA-GARCH conditional mean plus the LSTM's
    residual forecast over the last k residuals (recomputed under the
    model's current coefficients, so rolling refits stay consistent)."""
    values = asarray_1d(history)
    k = model.lookback_k
    e = residuals(model.ag.arima, values).values
    if len(e) < k:
        raise ValueError(f"history leaves {len(e)} residuals, need at least {k}")
    base = forecast_one(model.ag.arima, values)
    r_hat = predict_one(model.lstm_params, model.normalizer, e[-k:][:, None])
    return float(base + r_hat)


def _feature_normalizer(y_aligned: np.ndarray, h: np.ndarray) -> Normalizer:
    """Min-max per feature; a flat h channel falls back to unit scale so a
    near-homoscedastic fit still trains (the channel then carries no signal)."""
    y_lo, y_hi = float(y_aligned.min()), float(y_aligned.max())
    if y_hi - y_lo <= 0.0:
        raise ZeroVarianceError("observation series is constant; cannot normalize")
    h_lo, h_hi = float(h.min()), float(h.max())
    h_scale = h_hi - h_lo if h_hi - h_lo > 0.0 else 1.0
    return Normalizer(shift=np.array([y_lo, h_lo]), scale=np.array([y_hi - y_lo, h_scale]))


def fit_stat_feature(train_series: TimeSeries, arima_order: ArimaOrder,
                     garch_order: GarchOrder, lstm_config: LstmConfig) -> StatFeatureModel:
    """Fit the feature-extraction hybrid: ARIMA-GARCH supplies the in-sample
    h_t series, and a two-input LSTM is trained on aligned (y, h) windows
    targeting the next observation.

    With d > 0 the variance series lives on the differenced scale, so the
    first d observations are dropped to align the two channels by index.
    """
    if lstm_config.input_dim != 2:
        raise ValueError("the feature-extraction network takes exactly two input features")
    if garch_order is None:
        raise ValueError("a GARCH order is required to extract the variance feature")
    ag = fit_arma_garch(train_series, arima_order, garch_order)
    d = arima_order.d
    y_aligned = asarray_1d(train_series)[d:]
    h = np.asarray(ag.h_series)
    k = lstm_config.lookback_k
    if len(y_aligned) < k + 1:
        raise ValueError(
            f"aligned series of length {len(y_aligned)} cannot supply lookback {k} windows"
        )
    normalizer = _feature_normalizer(y_aligned, h)
    windows = make_windows([y_aligned, h], k)
    result = train(lstm_config, windows, normalizer=normalizer)
    return StatFeatureModel(ag=ag, lstm_params=result.params,
                            normalizer=result.normalizer, lookback_k=k)


def predict_one_stat_feature(model: StatFeatureModel, history: TimeSeries) -> float:
    """One-step forecast from the last k (y, h) pairs, where h is extended
    over the observed history via the fitted variance recursion on the
    current coefficients' residuals."""
    values = asarray_1d(history)
    k = model.lookback_k
    e = residuals(model.ag.arima, values).values
    if len(e) < k or len(values) < k:
        raise ValueError(f"history too short for lookback {k}")
    h = conditional_variance(model.ag.garch_params, e)
    window = np.column_stack((values[-k:], h[-k:]))
    return float(predict_one(model.lstm_params, model.normalizer, window))


# ---------------------------------------------------------------------------
# Checkpointing
# ---------------------------------------------------------------------------
# A composite checkpoint stores coefficients only; fitted state (residuals,
# variance path) is a deterministic function of the training data and is
# rebuilt on load.

def to_checkpoint(model: DecompositionModel | StatFeatureModel) -> dict:
    """JSON-ready dict: statistical coefficients, network weights,
    normalizer, and lookback."""
    ag = model.ag
    doc = {
        "kind": "decomposition" if isinstance(model, DecompositionModel)
                else "stat-feature",
        "arima": {
            "order": [ag.arima.order.p, ag.arima.order.d, ag.arima.order.q],
            "mu": ag.arima.params.mu,
            "alphas": ag.arima.params.alphas.tolist(),
            "thetas": ag.arima.params.thetas.tolist(),
            "noise_variance": ag.arima.params.noise_variance,
        },
        "garch": None,
        "lstm": {name: arr.tolist()
                 for name, arr in model.lstm_params.as_dict().items()},
        "normalizer": {"shift": model.normalizer.shift.tolist(),
                       "scale": model.normalizer.scale.tolist()},
        "lookback_k": model.lookback_k,
    }
    if ag.has_garch:
        doc["garch"] = {
            "order": [ag.garch_order.P, ag.garch_order.Q],
            "w": ag.garch_params.w,
            "lambdas": ag.garch_params.lambdas.tolist(),
            "betas": ag.garch_params.betas.tolist(),
        }
    return doc


def from_checkpoint(doc: dict, train_series: TimeSeries):
    """Rebuild a hybrid model from a checkpoint plus its training series.

    The stored coefficients are replayed over the training data to restore
    residuals and the variance path exactly (no re-optimization).
    """
    from .arima import ArimaModel, ArmaParams
    from .garch import GarchParams

    a = doc["arima"]
    order = ArimaOrder(*a["order"])
    params = ArmaParams(mu=a["mu"], alphas=np.array(a["alphas"]),
                        thetas=np.array(a["thetas"]),
                        noise_variance=a["noise_variance"])
    values = asarray_1d(train_series)
    shell = ArimaModel(order=order, params=params, anchors=values[:order.d],
                       loglik=0.0, aic=0.0, residuals=TimeSeries([0.0]))
    resid = residuals(shell, train_series)
    arima_model = ArimaModel(order=order, params=params, anchors=values[:order.d],
                             loglik=0.0, aic=0.0, residuals=resid)

    if doc["garch"] is not None:
        g = doc["garch"]
        garch_params = GarchParams(w=g["w"], lambdas=np.array(g["lambdas"]),
                                   betas=np.array(g["betas"]))
        ag = ArmaGarchModel(arima=arima_model, garch_order=GarchOrder(*g["order"]),
                            garch_params=garch_params,
                            h_series=conditional_variance(garch_params, resid),
                            garch_loglik=None, garch_aic=None, aic_total=0.0)
    else:
        ag = ArmaGarchModel(arima=arima_model, garch_order=None,
                            garch_params=None, h_series=None,
                            garch_loglik=None, garch_aic=None, aic_total=0.0)

    lstm_params = LstmParams.from_dict(doc["lstm"])
    normalizer = Normalizer(shift=np.array(doc["normalizer"]["shift"]),
                            scale=np.array(doc["normalizer"]["scale"]))
    cls = DecompositionModel if doc["kind"] == "decomposition" else StatFeatureModel
    return cls(ag=ag, lstm_params=lstm_params, normalizer=normalizer,
               lookback_k=int(doc["lookback_k"]))
