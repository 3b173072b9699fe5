"""Tests for the two hybrid integration strategies."""

import numpy as np
import pytest

from agforecast.arima import ArimaOrder, ArmaParams, fit_arima, forecast_one, residuals
from agforecast.errors import ZeroVarianceError
from agforecast.garch import (
    ArmaGarchModel,
    GarchOrder,
    GarchParams,
    conditional_variance,
    fit_arma_garch,
    simulate_garch,
)
from agforecast.hybrid import (
    DecompositionModel,
    StatFeatureModel,
    fit_decomposition,
    fit_stat_feature,
    predict_one_decomposition,
    predict_one_stat_feature,
)
from agforecast.lstm import (
    LstmConfig,
    LstmParams,
    Normalizer,
    _backward_batch,
    _clip_by_global_norm,
    _forward_batch,
    init,
    make_windows,
    predict_one,
)
from agforecast.series import TimeSeries


def _zero_lstm(hidden=4, input_dim=1):
    z = lambda *s: np.zeros(s)
    return LstmParams(
        W_xi=z(hidden, input_dim), W_hi=z(hidden, hidden), b_i=z(hidden),
        W_xf=z(hidden, input_dim), W_hf=z(hidden, hidden), b_f=z(hidden),
        W_xo=z(hidden, input_dim), W_ho=z(hidden, hidden), b_o=z(hidden),
        W_xc=z(hidden, input_dim), W_hc=z(hidden, hidden), b_c=z(hidden),
        w_out=z(hidden), b_out=0.0,
    )


def _identity_normalizer(features=1):
    return Normalizer(shift=np.zeros(features), scale=np.ones(features))


def _benchmark_series(seed, n=300):
    arma = ArmaParams(mu=0.0, alphas=[0.97], thetas=[0.3], noise_variance=1.0)
    garch = GarchParams(w=0.003, lambdas=[0.12], betas=[0.82])
    base = simulate_garch(arma, garch, n, seed=seed)
    return TimeSeries(base.values + 0.5 * np.sin(0.2 * np.arange(n)))


class TestFitDecomposition:
    def test_residual_network_sees_stage_one_residuals(self):
        y = _benchmark_series(3)
        cfg = LstmConfig(1, 8, 5, epochs=10, learning_rate=0.05, seed=3)
        model = fit_decomposition(y, ArimaOrder(1, 0, 0), GarchOrder(1, 1), cfg)
        assert model.ag.has_garch
        assert model.lookback_k == 5

    def test_garch_skip_flag(self):
        y = _benchmark_series(4)
        cfg = LstmConfig(1, 8, 5, epochs=5, learning_rate=0.05, seed=4)
        model = fit_decomposition(y, ArimaOrder(1, 0, 0), None, cfg)
        assert not model.ag.has_garch

    def test_lookback_too_long(self):
        y = TimeSeries(np.sin(0.5 * np.arange(10)))
        cfg = LstmConfig(1, 4, 10, epochs=1, learning_rate=0.05, seed=0)
        with pytest.raises(ValueError):
            fit_decomposition(y, ArimaOrder(0, 1, 0), None, cfg)

    def test_wrong_input_dim(self):
        cfg = LstmConfig(2, 4, 3, epochs=1, learning_rate=0.05, seed=0)
        with pytest.raises(ValueError):
            fit_decomposition(_benchmark_series(5), ArimaOrder(1, 0, 0), None, cfg)

    def test_additive_identity_on_training_data(self):
        # Observation = one-step fitted value + residual, exactly, in
        # original units (d = 1 exercises the re-integration path).
        y = _benchmark_series(6)
        model = fit_arma_garch(y, ArimaOrder(1, 1, 1), GarchOrder(1, 1))
        e = model.arima.residuals.values
        values = y.values
        d = 1
        w = np.diff(values)
        presample = float(np.mean(w))
        p, q = 1, 1
        al, th = model.arima.params.alphas, model.arima.params.thetas
        mu = model.arima.params.mu
        for t in range(len(w)):
            fitted_w = mu
            for i in range(1, p + 1):
                fitted_w += al[i - 1] * (w[t - i] if t - i >= 0 else presample)
            for j in range(1, q + 1):
                fitted_w += th[j - 1] * (e[t - j] if t - j >= 0 else 0.0)
            reconstructed = values[t] + fitted_w + e[t]
            assert abs(reconstructed - values[t + 1]) <= 1e-10


class TestPredictOneDecomposition:
    def test_zero_network_reduces_to_ag_forecast(self):
        y = _benchmark_series(7)
        ag = fit_arma_garch(y, ArimaOrder(1, 0, 1), GarchOrder(1, 1))
        model = DecompositionModel(ag=ag, lstm_params=_zero_lstm(),
                                   normalizer=_identity_normalizer(), lookback_k=4)
        assert predict_one_decomposition(model, y) == pytest.approx(
            forecast_one(ag.arima, y), abs=1e-12)

    def test_random_walk_with_zero_network(self):
        y = TimeSeries(np.cumsum(np.random.default_rng(12).standard_normal(50)))
        arima_model = fit_arima(y, ArimaOrder(0, 1, 0))
        # Force the pure random-walk reading: zero drift.
        from dataclasses import replace
        params = replace(arima_model.params, mu=0.0)
        arima_model = replace(arima_model, params=params)
        ag = ArmaGarchModel(arima=arima_model, garch_order=None, garch_params=None,
                            h_series=None, garch_loglik=None, garch_aic=None,
                            aic_total=arima_model.aic)
        model = DecompositionModel(ag=ag, lstm_params=_zero_lstm(),
                                   normalizer=_identity_normalizer(), lookback_k=3)
        assert predict_one_decomposition(model, y) == pytest.approx(float(y.values[-1]))

    def test_prediction_is_sum_of_parts(self):
        y = _benchmark_series(8)
        cfg = LstmConfig(1, 8, 5, epochs=30, learning_rate=0.05, seed=8)
        model = fit_decomposition(y, ArimaOrder(1, 0, 0), GarchOrder(1, 1), cfg)
        base = forecast_one(model.ag.arima, y)
        e = residuals(model.ag.arima, y).values
        r_hat = predict_one(model.lstm_params, model.normalizer, e[-5:][:, None])
        assert predict_one_decomposition(model, y) == pytest.approx(base + r_hat,
                                                                    abs=1e-10)

    def test_history_too_short(self):
        y = _benchmark_series(9)
        cfg = LstmConfig(1, 8, 5, epochs=2, learning_rate=0.05, seed=9)
        model = fit_decomposition(y, ArimaOrder(1, 0, 0), None, cfg)
        with pytest.raises(ValueError):
            predict_one_decomposition(model, TimeSeries(y.values[:4]))


class TestDegenerateFormConsistency:
    def test_garch_skip_equals_manual_arima_lstm(self):
        """The decomposition with the variance stage skipped must predict
        identically to a hand-assembled ARIMA + residual-LSTM pipeline."""
        y = _benchmark_series(10)
        cfg = LstmConfig(1, 6, 4, epochs=40, learning_rate=0.05, seed=10)
        hybrid_model = fit_decomposition(y, ArimaOrder(1, 0, 0), None, cfg)

        from agforecast.lstm import train as lstm_train
        arima_model = fit_arima(y, ArimaOrder(1, 0, 0))
        windows = make_windows(arima_model.residuals.values, 4)
        trained = lstm_train(cfg, windows)
        manual = (forecast_one(arima_model, y)
                  + predict_one(trained.params, trained.normalizer,
                                residuals(arima_model, y).values[-4:][:, None]))
        assert predict_one_decomposition(hybrid_model, y) == pytest.approx(manual,
                                                                           abs=1e-12)


class TestFitStatFeature:
    def test_requires_two_inputs(self):
        cfg = LstmConfig(1, 4, 3, epochs=1, learning_rate=0.05, seed=0)
        with pytest.raises(ValueError):
            fit_stat_feature(_benchmark_series(11), ArimaOrder(1, 0, 0),
                             GarchOrder(1, 1), cfg)

    def test_requires_garch(self):
        cfg = LstmConfig(2, 4, 3, epochs=1, learning_rate=0.05, seed=0)
        with pytest.raises(ValueError):
            fit_stat_feature(_benchmark_series(11), ArimaOrder(1, 0, 0), None, cfg)

    def test_feature_alignment_with_differencing(self):
        y = _benchmark_series(12)
        cfg = LstmConfig(2, 6, 4, epochs=3, learning_rate=0.05, seed=12)
        model = fit_stat_feature(y, ArimaOrder(1, 1, 0), GarchOrder(1, 1), cfg)
        # d=1: the h series has n-1 entries, aligned against y[1:].
        assert len(model.ag.h_series) == len(y) - 1

    def test_constant_variance_channel_falls_back_to_unit_scale(self):
        from agforecast.hybrid import _feature_normalizer
        y = np.linspace(0.0, 10.0, 50)
        h = np.full(50, 2.0)
        norm = _feature_normalizer(y, h)
        assert norm.scale[1] == 1.0
        assert norm.scale[0] == pytest.approx(10.0)

    def test_constant_observations_rejected(self):
        from agforecast.hybrid import _feature_normalizer
        with pytest.raises(ZeroVarianceError):
            _feature_normalizer(np.full(50, 1.0), np.linspace(1, 2, 50))


class TestPredictOneStatFeature:
    def test_zero_network_gives_denormalized_bias(self):
        y = _benchmark_series(13)
        ag = fit_arma_garch(y, ArimaOrder(1, 0, 0), GarchOrder(1, 1))
        norm = Normalizer(shift=np.array([5.0, 0.0]), scale=np.array([2.0, 1.0]))
        model = StatFeatureModel(ag=ag, lstm_params=_zero_lstm(input_dim=2),
                                 normalizer=norm, lookback_k=3)
        # Zero parameters give normalized prediction 0 -> shift of feature 0.
        assert predict_one_stat_feature(model, y) == pytest.approx(5.0)

    def test_window_content(self):
        y = _benchmark_series(14)
        cfg = LstmConfig(2, 6, 4, epochs=5, learning_rate=0.05, seed=14)
        model = fit_stat_feature(y, ArimaOrder(1, 0, 0), GarchOrder(1, 1), cfg)
        e = residuals(model.ag.arima, y).values
        h = conditional_variance(model.ag.garch_params, e)
        window = np.column_stack((y.values[-4:], h[-4:]))
        expected = predict_one(model.lstm_params, model.normalizer, window)
        assert predict_one_stat_feature(model, y) == pytest.approx(expected,
                                                                   abs=1e-12)

    def test_determinism(self):
        y = _benchmark_series(15)
        cfg = LstmConfig(2, 6, 4, epochs=10, learning_rate=0.05, seed=15)
        model = fit_stat_feature(y, ArimaOrder(1, 0, 0), GarchOrder(1, 1), cfg)
        a = predict_one_stat_feature(model, y)
        b = predict_one_stat_feature(model, y)
        assert a == b

    def test_scalar_golden_case(self):
        """k=1 scalar network: the prediction must match gate arithmetic
        done by hand on the (y, h) input pair."""
        y = _benchmark_series(16)
        ag = fit_arma_garch(y, ArimaOrder(1, 0, 0), GarchOrder(1, 1))
        one = lambda a, b: np.array([[float(a), float(b)]])
        vec = lambda v: np.array([float(v)])
        sq = lambda v: np.array([[float(v)]])
        params = LstmParams(
            W_xi=one(0.4, -0.2), W_hi=sq(0.1), b_i=vec(0.0),
            W_xf=one(-0.3, 0.1), W_hf=sq(0.2), b_f=vec(1.0),
            W_xo=one(0.5, 0.3), W_ho=sq(-0.1), b_o=vec(-0.1),
            W_xc=one(0.7, -0.4), W_hc=sq(0.3), b_c=vec(0.2),
            w_out=vec(1.2), b_out=0.1,
        )
        norm = Normalizer(shift=np.array([0.0, 0.0]), scale=np.array([1.0, 1.0]))
        model = StatFeatureModel(ag=ag, lstm_params=params, normalizer=norm,
                                 lookback_k=1)
        e = residuals(ag.arima, y).values
        h = conditional_variance(ag.garch_params, e)
        y_in, h_in = float(y.values[-1]), float(h[-1])

        sig = lambda z: 1.0 / (1.0 + np.exp(-z))
        i = sig(0.4 * y_in - 0.2 * h_in)
        o = sig(0.5 * y_in + 0.3 * h_in - 0.1)
        g = np.tanh(0.7 * y_in - 0.4 * h_in + 0.2)
        c = i * g
        expected = 1.2 * (o * np.tanh(c)) + 0.1
        assert predict_one_stat_feature(model, y) == pytest.approx(expected,
                                                                   abs=1e-12)


class TestCheckpointRoundTrip:
    def test_decomposition_checkpoint(self):
        import json

        from agforecast.hybrid import from_checkpoint, to_checkpoint
        y = _benchmark_series(20)
        cfg = LstmConfig(1, 6, 5, epochs=30, learning_rate=0.05, seed=20)
        model = fit_decomposition(y, ArimaOrder(1, 0, 0), GarchOrder(1, 1), cfg)
        doc = json.loads(json.dumps(to_checkpoint(model)))
        restored = from_checkpoint(doc, y)
        assert predict_one_decomposition(restored, y) == pytest.approx(
            predict_one_decomposition(model, y), abs=1e-12)

    def test_stat_feature_checkpoint(self):
        import json

        from agforecast.hybrid import from_checkpoint, to_checkpoint
        y = _benchmark_series(21)
        cfg = LstmConfig(2, 6, 5, epochs=30, learning_rate=0.05, seed=21)
        model = fit_stat_feature(y, ArimaOrder(1, 0, 0), GarchOrder(1, 1), cfg)
        doc = json.loads(json.dumps(to_checkpoint(model)))
        restored = from_checkpoint(doc, y)
        assert predict_one_stat_feature(restored, y) == pytest.approx(
            predict_one_stat_feature(model, y), abs=1e-12)


class TestBenchmarkOrdering:
    def test_decomposition_beats_both_baselines_single_seed(self):
        import synthetic
        mse = synthetic.run_benchmark_seed(0)
        assert mse["ag-lstm"] < mse["ag"]
        assert mse["ag-lstm"] < mse["lstm"]

    def test_pure_arma_decomposition_close_to_ag(self):
        # Null case: no nonlinearity and a correctly specified stage leave
        # the residual network nothing to learn.
        arma = ArmaParams(mu=0.0, alphas=[0.6], thetas=[0.3], noise_variance=1.0)
        garch = GarchParams(w=0.02, lambdas=[0.1], betas=[0.8])
        y = simulate_garch(arma, garch, 400, seed=24)
        from agforecast.series import train_test_split
        from agforecast.evaluate import (ArmaGarchForecaster,
                                         DecompositionForecaster, compare)
        train_s, test_s = train_test_split(y, 0.92)
        cfg = LstmConfig(1, 8, 10, epochs=150, learning_rate=0.05, seed=24)
        report = compare(
            [ArmaGarchForecaster(ArimaOrder(1, 0, 1), GarchOrder(1, 1), name="ag"),
             DecompositionForecaster(ArimaOrder(1, 0, 1), GarchOrder(1, 1), cfg,
                                     name="ag-lstm")],
            train_s, test_s, [len(test_s)])
        n = len(test_s)
        ag = report.model_metrics["ag"][n].mse
        hybrid = report.model_metrics["ag-lstm"][n].mse
        assert abs(hybrid - ag) <= 0.10 * ag


class TestFrozenChannelAblation:
    def test_zeroed_h_channel_matches_y_only_network(self):
        """Train a two-input network with the h-channel weights pinned at
        zero; it must equal a one-input network whose weights were copied
        from the y columns of the same initialization."""
        y = _benchmark_series(17, n=120)
        ag = fit_arma_garch(y, ArimaOrder(1, 0, 0), GarchOrder(1, 1))
        h = np.asarray(ag.h_series)
        k, hidden, epochs, lr = 4, 6, 60, 0.05

        cfg2 = LstmConfig(2, hidden, k, epochs, lr, seed=17)
        params2 = init(cfg2)
        d2 = params2.as_dict()
        for gate in ("i", "f", "o", "c"):
            d2[f"W_x{gate}"][:, 1] = 0.0
        params2 = LstmParams.from_dict(d2)

        d1 = {}
        for gate in ("i", "f", "o", "c"):
            d1[f"W_x{gate}"] = d2[f"W_x{gate}"][:, :1].copy()
            d1[f"W_h{gate}"] = d2[f"W_h{gate}"].copy()
            d1[f"b_{gate}"] = d2[f"b_{gate}"].copy()
        d1["w_out"] = d2["w_out"].copy()
        d1["b_out"] = d2["b_out"].copy()
        params1 = LstmParams.from_dict(d1)

        data2 = make_windows([y.values, h], k)
        data1 = make_windows(y.values, k)
        norm2 = Normalizer(shift=np.array([y.values.min(), h.min()]),
                           scale=np.array([np.ptp(y.values), np.ptp(h)]))
        norm1 = Normalizer(shift=np.array([y.values.min()]),
                           scale=np.array([np.ptp(y.values)]))
        X2, t2 = norm2.transform(data2.inputs), norm2.transform_target(data2.targets)
        X1, t1 = norm1.transform(data1.inputs), norm1.transform_target(data1.targets)

        for _ in range(epochs):
            p2, c2 = _forward_batch(params2, X2)
            g2 = _clip_by_global_norm(_backward_batch(params2, c2, p2, t2), 5.0)
            for gate in ("i", "f", "o", "c"):
                g2[f"W_x{gate}"][:, 1] = 0.0  # freeze the h channel
            upd2 = params2.as_dict()
            for name, g in g2.items():
                upd2[name] = upd2[name] - lr * g
            params2 = LstmParams.from_dict(upd2)

            p1, c1 = _forward_batch(params1, X1)
            g1 = _clip_by_global_norm(_backward_batch(params1, c1, p1, t1), 5.0)
            upd1 = params1.as_dict()
            for name, g in g1.items():
                upd1[name] = upd1[name] - lr * g
            params1 = LstmParams.from_dict(upd1)

        window2 = np.column_stack((y.values[-k:], h[-k:]))
        pred2 = predict_one(params2, norm2, window2)
        pred1 = predict_one(params1, norm1, y.values[-k:][:, None])
        assert pred2 == pytest.approx(pred1, abs=1e-9)
