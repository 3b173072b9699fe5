"""GARCH estimation on residual series, the conditional-variance recursion,
ARMA-GARCH composition, order selection, and seeded simulators.

The variance recursion is the standard linear-in-variance form
h_t = w + sum_j lambda_j * u_{t-j}^2 + sum_i beta_i * h_{t-i}, estimated by
Gaussian quasi-maximum likelihood under positivity and persistence < 1
constraints (imposed through a smooth reparameterization, so the simplex
search itself is unconstrained).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._optimize import nelder_mead
from .arima import ArimaModel, ArimaOrder, ArmaParams, fit_arima
from .errors import ConvergenceError, SelectionError, ZeroVarianceError
from .series import TimeSeries, asarray_1d
from .stattests import acf

__all__ = [
    "GarchOrder",
    "GarchParams",
    "GarchFit",
    "ArmaGarchModel",
    "fit_garch",
    "conditional_variance",
    "forecast_variance_one",
    "fit_arma_garch",
    "refit_arma_garch",
    "garch_order_select",
    "simulate_arma",
    "simulate_garch",
]

_PERSISTENCE_CAP = 0.999


@dataclass(frozen=True)
class GarchOrder:
    """(P, Q): squared-error lags and variance lags. P >= 1 always; a
    variance lag without any squared-error lag is not identifiable."""

    P: int
    Q: int

    def __post_init__(self):
        if not isinstance(self.P, int) or not isinstance(self.Q, int):
            raise ValueError("GARCH order components must be integers")
        if self.Q < 0:
            raise ValueError(f"Q must be non-negative, got {self.Q}")
        if self.P < 1:
            raise ValueError(
                f"GARCH({self.P},{self.Q}) rejected: at least one squared-error lag is required"
            )

    def __str__(self):
        return f"({self.P},{self.Q})"


@dataclass(frozen=True)
class GarchParams:
    """Variance intercept and lag weights, constrained to a stationary region."""

    w: float
    lambdas: np.ndarray
    betas: np.ndarray

    def __post_init__(self):
        lambdas = np.asarray(self.lambdas, dtype=np.float64).reshape(-1)
        betas = np.asarray(self.betas, dtype=np.float64).reshape(-1)
        object.__setattr__(self, "lambdas", lambdas)
        object.__setattr__(self, "betas", betas)
        if len(lambdas) < 1:
            raise ValueError("at least one squared-error weight is required")
        if self.w <= 0.0:
            raise ValueError(f"variance intercept w must be positive, got {self.w}")
        if np.any(lambdas < 0.0) or np.any(betas < 0.0):
            raise ValueError("variance lag weights must be non-negative")
        if float(lambdas.sum() + betas.sum()) >= 1.0:
            raise ValueError("sum of lag weights must be < 1 for a finite variance")

    @property
    def order(self) -> GarchOrder:
        return GarchOrder(len(self.lambdas), len(self.betas))

    @property
    def persistence(self) -> float:
        return float(self.lambdas.sum() + self.betas.sum())

    @property
    def long_run_variance(self) -> float:
        return self.w / (1.0 - self.persistence)


class GarchFit(NamedTuple):
    params: GarchParams
    h_series: np.ndarray
    loglik: float
    aic: float


@dataclass(frozen=True)
class ArmaGarchModel:
    """Two-stage composite: an ARIMA mean model plus an optional GARCH
    variance model fitted to its residuals. ``aic_total`` is the sum of
    the stage AICs (the toolkit's comparison convention)."""

    arima: ArimaModel
    garch_order: GarchOrder | None
    garch_params: GarchParams | None
    h_series: np.ndarray | None
    garch_loglik: float | None
    garch_aic: float | None
    aic_total: float

    def __post_init__(self):
        if self.garch_params is not None:
            if self.h_series is None or len(self.h_series) != len(self.arima.residuals):
                raise ValueError("h series must align with the residual series")
            if np.any(np.asarray(self.h_series) <= 0.0):
                raise ValueError("every conditional variance must be positive")

    @property
    def has_garch(self) -> bool:
        return self.garch_params is not None


def _variance_recursion(w, lambdas, betas, u, u2_seed, h_seed):
    """Run h_t = w + sum lambda_j u_{t-j}^2 + sum beta_i h_{t-i} over ``u``.

    Pre-sample squared errors take ``u2_seed`` and pre-sample variances
    ``h_seed``. Vectorized in the squared-error part; the variance part is
    a short recursion over plain floats.
    """
    n = len(u)
    P = len(lambdas)
    Q = len(betas)
    u2 = u * u
    u2pad = np.concatenate((np.full(P, u2_seed), u2))
    arch = np.full(n, w)
    for j in range(1, P + 1):
        arch += lambdas[j - 1] * u2pad[P - j:P - j + n]
    if Q == 0:
        return arch
    arch_list = arch.tolist()
    b = [float(x) for x in betas]
    hist = [float(h_seed)] * Q
    out = [0.0] * n
    for t in range(n):
        acc = arch_list[t]
        for i in range(Q):
            acc += b[i] * hist[Q - 1 - i]
        out[t] = acc
        hist.append(acc)
        hist.pop(0)
    return np.asarray(out, dtype=np.float64)


def conditional_variance(params: GarchParams, residuals) -> np.ndarray:
    """Fitted conditional-variance series for a residual sequence, seeded
    with the sample variance of the residuals."""
    u = asarray_1d(residuals)
    seed = float(np.var(u))
    return _variance_recursion(params.w, params.lambdas, params.betas, u, seed, seed)


def forecast_variance_one(params: GarchParams, recent_u, recent_h) -> float:
    """Next-step conditional variance from the most recent errors/variances.

    ``recent_u`` and ``recent_h`` are ordered oldest to newest; only the
    last P and Q entries are used.
    """
    u = asarray_1d(recent_u)
    h = np.asarray(recent_h, dtype=np.float64).reshape(-1)
    P, Q = len(params.lambdas), len(params.betas)
    if len(u) < P:
        raise ValueError(f"need at least {P} recent errors, got {len(u)}")
    if len(h) < Q:
        raise ValueError(f"need at least {Q} recent variances, got {len(h)}")
    out = params.w
    for j in range(1, P + 1):
        out += params.lambdas[j - 1] * u[-j] ** 2
    for i in range(1, Q + 1):
        out += params.betas[i - 1] * h[-i]
    return float(out)


def _gaussian_qml(u, h):
    return -0.5 * float(np.sum(np.log(2.0 * math.pi) + np.log(h) + (u * u) / h))


def _to_natural(x, P, Q):
    a = min(max(float(x[0]), -50.0), 50.0)
    w = math.exp(a)
    g = np.clip(np.asarray(x[1:1 + P + Q], dtype=np.float64), -40.0, 40.0)
    s = np.exp(g)
    coefs = _PERSISTENCE_CAP * s / (1.0 + s.sum())
    return w, coefs[:P], coefs[P:]


def _from_natural(w, lambdas, betas):
    coefs = np.concatenate((lambdas, betas))
    c = np.clip(coefs / _PERSISTENCE_CAP, 1e-8, None)
    total = float(c.sum())
    if total >= 1.0:
        c *= 0.98 / total
        total = 0.98
    g = np.log(c / (1.0 - total))
    return np.concatenate(([math.log(max(w, 1e-300))], g))


def _garch_starts(u, var_u, P, Q):
    """Two deterministic starting points: the classic low-arch/high-memory
    guess and a moment guess from the autocorrelation of squared errors."""
    if Q > 0:
        classic_l = np.full(P, 0.05 / P)
        classic_b = np.full(Q, 0.90 / Q)
    else:
        classic_l = np.full(P, 0.40 / P)
        classic_b = np.zeros(0)

    try:
        rho = acf(u * u, P)[1:]
    except ZeroVarianceError:
        rho = np.zeros(P)
    moment_l = np.clip(rho, 0.01, 0.5)
    if moment_l.sum() > 0.5:
        moment_l *= 0.5 / moment_l.sum()
    if Q > 0:
        total_b = max(0.90 - float(moment_l.sum()), 0.05)
        moment_b = np.full(Q, total_b / Q)
    else:
        moment_b = np.zeros(0)

    starts = []
    for lam, bet in [(classic_l, classic_b), (moment_l, moment_b)]:
        w0 = max(var_u * (1.0 - float(lam.sum() + bet.sum())), 1e-10)
        starts.append(_from_natural(w0, lam, bet))
    return starts


def fit_garch(residuals, order: GarchOrder, *, start: GarchParams | None = None,
              max_iter: int = 2000) -> GarchFit:
    """Fit GARCH(P, Q) to a residual series by Gaussian quasi-maximum
    likelihood. Returns the parameters, the fitted variance series, the
    log-likelihood, and AIC with k = 1 + P + Q."""
    u = asarray_1d(residuals)
    n = len(u)
    P, Q = order.P, order.Q
    if n <= P + Q + 5:
        raise ValueError(f"series length {n} too short for GARCH{order}")
    var_u = float(np.var(u))
    if var_u <= 0.0:
        raise ZeroVarianceError("GARCH fit undefined for constant residuals")

    def objective(x):
        w, lambdas, betas = _to_natural(x, P, Q)
        h = _variance_recursion(w, lambdas, betas, u, var_u, var_u)
        ll = _gaussian_qml(u, h)
        return -ll if np.isfinite(ll) else np.inf

    if start is not None:
        if len(start.lambdas) != P or len(start.betas) != Q:
            raise ValueError("warm-start parameters do not match the order")
        starts = [_from_natural(start.w, start.lambdas, start.betas)]
    else:
        starts = _garch_starts(u, var_u, P, Q)

    best = None
    any_converged = False
    for x0 in starts:
        res = nelder_mead(objective, x0, max_iter=max_iter, xtol=1e-8)
        any_converged = any_converged or res.converged
        if best is None or res.fun < best.fun:
            best = res
    if not np.isfinite(best.fun):
        raise ConvergenceError(f"QML optimization failed for GARCH{order}",
                               best_params=best.x, best_objective=best.fun)
    if not any_converged:
        raise ConvergenceError(
            f"QML optimizer hit the {max_iter}-iteration cap for GARCH{order}",
            best_params=best.x, best_objective=best.fun,
        )

    w, lambdas, betas = _to_natural(best.x, P, Q)
    params = GarchParams(w=w, lambdas=lambdas, betas=betas)
    h = _variance_recursion(w, lambdas, betas, u, var_u, var_u)
    loglik = _gaussian_qml(u, h)
    k = 1 + P + Q
    aic = 2.0 * k - 2.0 * loglik
    return GarchFit(params=params, h_series=h, loglik=loglik, aic=aic)


def fit_arma_garch(series: TimeSeries, arima_order: ArimaOrder,
                   garch_order: GarchOrder | None) -> ArmaGarchModel:
    """Two-stage composite fit: ARIMA first, then GARCH on its residuals.

    ``garch_order=None`` skips the variance stage entirely (pure ARIMA
    composite), which the hybrid layer uses for its degenerate forms.
    """
    arima_model = fit_arima(series, arima_order)
    if garch_order is None:
        return ArmaGarchModel(
            arima=arima_model, garch_order=None, garch_params=None,
            h_series=None, garch_loglik=None, garch_aic=None,
            aic_total=arima_model.aic,
        )
    garch_fit = fit_garch(arima_model.residuals, garch_order)
    return ArmaGarchModel(
        arima=arima_model,
        garch_order=garch_order,
        garch_params=garch_fit.params,
        h_series=garch_fit.h_series,
        garch_loglik=garch_fit.loglik,
        garch_aic=garch_fit.aic,
        aic_total=arima_model.aic + garch_fit.aic,
    )


def refit_arma_garch(model: ArmaGarchModel, series: TimeSeries,
                     max_iter: int = 500) -> ArmaGarchModel:
    """Re-estimate coefficients on new data with the structure frozen,
    warm-starting both stages from the current coefficients."""
    start = np.concatenate((
        [model.arima.params.mu], model.arima.params.alphas, model.arima.params.thetas,
    ))
    arima_model = fit_arima(series, model.arima.order, start=start, max_iter=max_iter)
    if not model.has_garch:
        return ArmaGarchModel(
            arima=arima_model, garch_order=None, garch_params=None,
            h_series=None, garch_loglik=None, garch_aic=None,
            aic_total=arima_model.aic,
        )
    garch_fit = fit_garch(arima_model.residuals, model.garch_order,
                          start=model.garch_params, max_iter=max_iter)
    return ArmaGarchModel(
        arima=arima_model,
        garch_order=model.garch_order,
        garch_params=garch_fit.params,
        h_series=garch_fit.h_series,
        garch_loglik=garch_fit.loglik,
        garch_aic=garch_fit.aic,
        aic_total=arima_model.aic + garch_fit.aic,
    )


def garch_order_select(residuals, P_max: int = 2, Q_max: int = 2) -> GarchOrder:
    """Minimum-AIC order over P in [1, P_max], Q in [0, Q_max]; ties go to
    smaller P+Q, then smaller Q."""
    if P_max < 1 or Q_max < 1:
        raise ValueError("order caps must be at least 1")
    results = []
    failures = []
    for P in range(1, P_max + 1):
        for Q in range(0, Q_max + 1):
            order = GarchOrder(P, Q)
            try:
                fit = fit_garch(residuals, order)
            except Exception as exc:  # noqa: BLE001 - recorded, not swallowed
                failures.append((order, exc))
                continue
            results.append((fit.aic, P + Q, Q, order))
    if not results:
        raise SelectionError("no GARCH candidate converged", failures=failures)
    results.sort(key=lambda r: (r[0], r[1], r[2]))
    return results[0][3]


_BURN_IN = 500


def simulate_arma(params: ArmaParams, n: int, seed: int) -> TimeSeries:
    """Seeded Gaussian ARMA simulation with a 500-sample burn-in."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if not params.is_stationary:
        raise ValueError("cannot simulate an explosive AR process")
    sigma = math.sqrt(params.noise_variance)
    rng = np.random.default_rng(seed)
    e = sigma * rng.standard_normal(n + _BURN_IN)
    return _arma_path(params, e, n)


def simulate_garch(arma: ArmaParams, garch: GarchParams, n: int, seed: int) -> TimeSeries:
    """Seeded ARMA simulation whose innovations are GARCH: e_t = z_t sqrt(h_t)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if not arma.is_stationary:
        raise ValueError("cannot simulate an explosive AR process")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(n + _BURN_IN)
    total = n + _BURN_IN
    P, Q = len(garch.lambdas), len(garch.betas)
    lam = garch.lambdas.tolist()
    bet = garch.betas.tolist()
    v = garch.long_run_variance
    e2_hist = [v] * P
    h_hist = [v] * Q
    e = np.empty(total)
    for t in range(total):
        h = garch.w
        for j in range(P):
            h += lam[j] * e2_hist[P - 1 - j]
        for i in range(Q):
            h += bet[i] * h_hist[Q - 1 - i]
        et = z[t] * math.sqrt(h)
        e[t] = et
        e2_hist.append(et * et)
        e2_hist.pop(0)
        if Q:
            h_hist.append(h)
            h_hist.pop(0)
    return _arma_path(arma, e, n)


def _arma_path(params: ArmaParams, e: np.ndarray, n: int) -> TimeSeries:
    p, q = params.p, params.q
    al = params.alphas.tolist()
    th = params.thetas.tolist()
    mean = params.mu / (1.0 - float(params.alphas.sum())) if p else params.mu
    y_hist = [mean] * p
    e_hist = [0.0] * q
    total = len(e)
    y = np.empty(total)
    for t in range(total):
        acc = params.mu + e[t]
        for i in range(p):
            acc += al[i] * y_hist[p - 1 - i]
        for j in range(q):
            acc += th[j] * e_hist[q - 1 - j]
        y[t] = acc
        if p:
            y_hist.append(acc)
            y_hist.pop(0)
        if q:
            e_hist.append(e[t])
            e_hist.pop(0)
    return TimeSeries(y[total - n:])
