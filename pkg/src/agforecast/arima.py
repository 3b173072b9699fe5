"""ARMA/ARIMA estimation by conditional sum of squares, one-step forecasting,
and AIC-based automatic order selection.

Estimation conditions on zero pre-sample errors and sample-mean pre-sample
observations, then minimizes the sum of squared one-step errors with a
multi-start simplex search. This is the classic CSS objective: simpler than
exact state-space likelihood and exactly aligned with how the fitted model
is used here (one-step-ahead prediction).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._optimize import nelder_mead
from .errors import ConvergenceError, SelectionError, ZeroVarianceError
from .series import TimeSeries, asarray_1d
from .stattests import acf, adf_test

__all__ = [
    "ArimaOrder",
    "ArmaParams",
    "ArimaModel",
    "fit_arima",
    "forecast_one",
    "residuals",
    "auto_order",
]

MAX_ORDER = 10
_COEF_BOUND = 2.0
_ROOT_MARGIN = 1.001


@dataclass(frozen=True)
class ArimaOrder:
    """(p, d, q): AR lags, difference count, MA lags."""

    p: int
    d: int
    q: int

    def __post_init__(self):
        for name, v in (("p", self.p), ("d", self.d), ("q", self.q)):
            if not isinstance(v, int) or v < 0:
                raise ValueError(f"order component {name} must be a non-negative integer")
            if v > MAX_ORDER:
                raise ValueError(f"order component {name}={v} exceeds cap {MAX_ORDER}")

    def __str__(self):
        return f"({self.p},{self.d},{self.q})"


@dataclass(frozen=True)
class ArmaParams:
    """Fitted mean, AR and MA coefficients, and innovation variance."""

    mu: float
    alphas: np.ndarray
    thetas: np.ndarray
    noise_variance: float

    def __post_init__(self):
        alphas = np.asarray(self.alphas, dtype=np.float64).reshape(-1)
        thetas = np.asarray(self.thetas, dtype=np.float64).reshape(-1)
        if not (np.all(np.isfinite(alphas)) and np.all(np.isfinite(thetas))):
            raise ValueError("ARMA coefficients must be finite")
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "thetas", thetas)
        # Zero variance is tolerated so degenerate simulation configs can be
        # expressed; fitted models always carry a strictly positive value.
        if self.noise_variance < 0.0:
            raise ValueError(f"noise_variance must be >= 0, got {self.noise_variance}")

    @property
    def p(self) -> int:
        return len(self.alphas)

    @property
    def q(self) -> int:
        return len(self.thetas)

    @property
    def is_stationary(self) -> bool:
        """True when all AR characteristic roots lie outside the unit circle."""
        return self._min_root_modulus(-self.alphas) > 1.0

    @property
    def is_invertible(self) -> bool:
        """True when all MA characteristic roots lie outside the unit circle."""
        return self._min_root_modulus(self.thetas) > 1.0

    def min_root_distance(self) -> float:
        """Smallest characteristic-root modulus over both lag polynomials."""
        return min(self._min_root_modulus(-self.alphas),
                   self._min_root_modulus(self.thetas))

    @staticmethod
    def _min_root_modulus(tail_coefs: np.ndarray) -> float:
        if len(tail_coefs) == 0 or not np.any(tail_coefs):
            return np.inf
        roots = np.roots(np.concatenate(([1.0], tail_coefs))[::-1])
        return float(np.min(np.abs(roots)))


@dataclass(frozen=True)
class ArimaModel:
    order: ArimaOrder
    params: ArmaParams
    anchors: np.ndarray
    loglik: float
    aic: float
    residuals: TimeSeries


def _css_errors(mu, alphas, thetas, w, presample):
    """One-step errors of the ARMA recursion over the working series ``w``.

    Pre-sample observations are replaced by ``presample`` (the sample mean)
    and pre-sample errors by zero. Returns a float64 array of len(w).
    """
    n = len(w)
    p = len(alphas)
    q = len(thetas)
    rhs = w - mu
    if p:
        wpad = np.concatenate((np.full(p, presample), w))
        for i in range(1, p + 1):
            rhs = rhs - alphas[i - 1] * wpad[p - i:p - i + n]
    if q == 0:
        return np.asarray(rhs, dtype=np.float64)
    # The MA part is a genuine recursion; run it over plain floats for speed.
    rhs_list = rhs.tolist()
    th = [float(t) for t in thetas]
    e = [0.0] * q
    out = [0.0] * n
    for t in range(n):
        acc = rhs_list[t]
        for j in range(q):
            acc -= th[j] * e[q - 1 - j]
        out[t] = acc
        e.append(acc)
        e.pop(0)
    return np.asarray(out, dtype=np.float64)


def _split_params(x, p, q):
    return float(x[0]), np.asarray(x[1:1 + p]), np.asarray(x[1 + p:1 + p + q])


def _loglik_from_ssr(ssr: float, n: int) -> float:
    sigma2 = ssr / n
    return -0.5 * n * (math.log(2.0 * math.pi) + math.log(sigma2) + 1.0)


def _moment_start(w, p, q):
    """Deterministic Yule-Walker / residual-autocorrelation starting point."""
    mean = float(np.mean(w))
    alphas = np.zeros(p)
    if p > 0:
        try:
            rho = acf(w, p)
            toeplitz = np.array([[rho[abs(i - j)] for j in range(p)] for i in range(p)])
            alphas = np.linalg.solve(toeplitz, rho[1:p + 1])
        except (np.linalg.LinAlgError, ZeroVarianceError):
            alphas = np.zeros(p)
        alphas = np.clip(alphas, -0.95, 0.95)
    thetas = np.zeros(q)
    if q > 0:
        mu0 = mean * (1.0 - float(np.sum(alphas)))
        ar_resid = _css_errors(mu0, alphas, np.zeros(0), w, mean)
        try:
            thetas = np.clip(acf(ar_resid, q)[1:], -0.9, 0.9)
        except ZeroVarianceError:
            thetas = np.zeros(q)
    mu = mean * (1.0 - float(np.sum(alphas)))
    return np.concatenate(([mu], alphas, thetas))


def fit_arima(series: TimeSeries, order: ArimaOrder, *, start=None,
              max_iter: int = 2000) -> ArimaModel:
    """Fit ARIMA(p, d, q) to ``series`` by conditional sum of squares.

    ``start`` warm-starts the optimizer from a single parameter vector
    [mu, alphas..., thetas...] (used by rolling re-estimation); otherwise
    three deterministic starting points are tried and the best kept.
    """
    values = asarray_1d(series)
    p, d, q = order.p, order.d, order.q
    n = len(values)
    if n <= p + q + d + 2:
        raise ValueError(
            f"series length {n} too short for ARIMA{order} (need > {p + q + d + 2})"
        )
    w = np.diff(values, n=d) if d > 0 else values.copy()
    m = len(w)
    presample = float(np.mean(w))

    def objective(x):
        mu, alphas, thetas = _split_params(x, p, q)
        if p and np.max(np.abs(alphas)) > _COEF_BOUND:
            return np.inf
        if q and np.max(np.abs(thetas)) > _COEF_BOUND:
            return np.inf
        e = _css_errors(mu, alphas, thetas, w, presample)
        return float(e @ e)

    if start is not None:
        starts = [np.asarray(start, dtype=np.float64)]
        if len(starts[0]) != 1 + p + q:
            raise ValueError("start vector length does not match the order")
    else:
        moment = _moment_start(w, p, q)
        half = moment.copy()
        half[1:] *= 0.5
        half[0] = presample * (1.0 - float(np.sum(half[1:1 + p])))
        starts = [np.concatenate(([presample], np.zeros(p + q))), moment, half]

    best = None
    any_converged = False
    for x0 in starts:
        res = nelder_mead(objective, x0, max_iter=max_iter, xtol=1e-8)
        any_converged = any_converged or res.converged
        if best is None or res.fun < best.fun:
            best = res
    if not np.isfinite(best.fun):
        raise ConvergenceError(
            f"CSS optimization failed for ARIMA{order}",
            best_params=best.x, best_objective=best.fun,
        )
    if not any_converged:
        raise ConvergenceError(
            f"CSS optimizer hit the {max_iter}-iteration cap for ARIMA{order}",
            best_params=best.x, best_objective=best.fun,
        )

    mu, alphas, thetas = _split_params(best.x, p, q)
    e = _css_errors(mu, alphas, thetas, w, presample)
    ssr = float(e @ e)
    if ssr <= 0.0:
        raise ZeroVarianceError("CSS fit left zero residual variance")
    sigma2 = ssr / m
    loglik = _loglik_from_ssr(ssr, m)
    k = p + q + 2
    aic = 2.0 * k - 2.0 * loglik
    dates = None
    if isinstance(series, TimeSeries) and series.dates is not None:
        dates = series.dates[d:]
    return ArimaModel(
        order=order,
        params=ArmaParams(mu=mu, alphas=alphas, thetas=thetas, noise_variance=sigma2),
        anchors=values[:d],
        loglik=loglik,
        aic=aic,
        residuals=TimeSeries(e, dates=dates),
    )


def residuals(model: ArimaModel, series: TimeSeries) -> TimeSeries:
    """One-step errors of ``model`` replayed over ``series`` (any compatible
    history, not just the training data)."""
    values = asarray_1d(series)
    d = model.order.d
    if len(values) <= d:
        raise ValueError(f"series length {len(values)} incompatible with d={d}")
    w = np.diff(values, n=d) if d > 0 else values
    presample = float(np.mean(w))
    e = _css_errors(model.params.mu, model.params.alphas, model.params.thetas,
                    w, presample)
    dates = None
    if isinstance(series, TimeSeries) and series.dates is not None:
        dates = series.dates[d:]
    return TimeSeries(e, dates=dates)


def forecast_one(model: ArimaModel, history: TimeSeries) -> float:
    """One-step-ahead conditional mean in original (undifferenced) units."""
    values = asarray_1d(history)
    p, d, q = model.order.p, model.order.d, model.order.q
    if len(values) < max(p + d + q, d + 1):
        raise ValueError(
            f"history length {len(values)} too short for ARIMA{model.order}"
        )
    w = np.diff(values, n=d) if d > 0 else values
    m = len(w)
    presample = float(np.mean(w)) if m > 0 else 0.0
    e = _css_errors(model.params.mu, model.params.alphas, model.params.thetas,
                    w, presample)
    forecast = model.params.mu
    for i in range(1, p + 1):
        forecast += model.params.alphas[i - 1] * (w[m - i] if m - i >= 0 else presample)
    for j in range(1, q + 1):
        forecast += model.params.thetas[j - 1] * (e[m - j] if m - j >= 0 else 0.0)
    # Undo the differencing: add back the last value of each difference level.
    level = values
    for _ in range(d):
        forecast += level[-1]
        level = np.diff(level)
    return float(forecast)


def auto_order(series: TimeSeries, p_max: int = 5, q_max: int = 5,
               d_max: int = 2) -> ArimaOrder:
    """Select (p, d, q) as in the standard auto-fit workflow.

    d is the smallest difference count whose ADF test rejects a unit root at
    5% (falling back to ``d_max`` if none does); (p, q) then minimize AIC
    over the full grid, ties going to smaller p+q and then smaller p.
    """
    if p_max < 0 or q_max < 0 or d_max < 0:
        raise ValueError("order caps must be non-negative")
    values = asarray_1d(series)

    d = d_max
    for candidate_d in range(d_max + 1):
        w = np.diff(values, n=candidate_d) if candidate_d > 0 else values
        if adf_test(w).reject_at_5pct:
            d = candidate_d
            break

    results = []
    failures = []
    for p in range(p_max + 1):
        for q in range(q_max + 1):
            order = ArimaOrder(p, d, q)
            try:
                model = fit_arima(series, order)
            except Exception as exc:  # noqa: BLE001 - recorded, not swallowed
                failures.append((order, exc))
                continue
            # CSS can fake large SSR drops with near-canceling lag
            # polynomials whose roots crowd the unit circle; such fits are
            # flagged by the fitter but excluded from selection.
            if model.params.min_root_distance() < _ROOT_MARGIN:
                failures.append((order, ValueError(
                    f"characteristic root within {_ROOT_MARGIN} of the unit circle")))
                continue
            results.append((model.aic, p + q, p, order))
    if not results:
        raise SelectionError(
            f"no ARIMA candidate converged (d={d}, caps p<={p_max}, q<={q_max})",
            failures=failures,
        )
    results.sort(key=lambda r: (r[0], r[1], r[2]))
    return results[0][3]
