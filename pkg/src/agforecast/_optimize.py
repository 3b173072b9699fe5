"""Derivative-free simplex minimizer used by the ARMA and GARCH fitters.

Deterministic for identical inputs: no randomness anywhere in the update
rules, and ties are resolved by stable sorting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["OptimResult", "nelder_mead"]

_ALPHA = 1.0   # reflection
_GAMMA = 2.0   # expansion
_RHO = 0.5     # contraction
_SIGMA = 0.5   # shrink


@dataclass(frozen=True)
class OptimResult:
    x: np.ndarray
    fun: float
    converged: bool
    iterations: int
    evaluations: int


def nelder_mead(fun, x0, *, max_iter: int = 2000, xtol: float = 1e-8,
                ftol: float = 1e-12, initial_step: float = 0.1) -> OptimResult:
    """Minimize ``fun`` from ``x0``. The objective may return +inf to mark
    infeasible points; the simplex will move away from them.

    Converged when the vertex spread is below ``xtol`` in every coordinate or
    the objective spread is below ``ftol`` (relative to the best value).
    """
    x0 = np.asarray(x0, dtype=np.float64)
    if x0.ndim != 1 or x0.size < 1:
        raise ValueError("x0 must be a non-empty 1-D array")
    n = x0.size

    evals = 0

    def f(x):
        nonlocal evals
        evals += 1
        v = fun(x)
        return float(v) if np.isfinite(v) else np.inf

    # Initial simplex: x0 plus one perturbed vertex per coordinate.
    simplex = [x0.copy()]
    for i in range(n):
        v = x0.copy()
        step = 0.05 * abs(v[i]) if abs(v[i]) > 1e-8 else initial_step
        v[i] += step
        simplex.append(v)
    values = [f(v) for v in simplex]

    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        order = np.argsort(values, kind="stable")
        simplex = [simplex[i] for i in order]
        values = [values[i] for i in order]

        x_spread = max(np.max(np.abs(v - simplex[0])) for v in simplex[1:])
        finite = [v for v in values if np.isfinite(v)]
        f_spread = (max(finite) - min(finite)) if len(finite) == len(values) else np.inf
        if x_spread <= xtol or f_spread <= ftol * (1.0 + abs(values[0])):
            converged = True
            break

        centroid = np.mean(simplex[:-1], axis=0)
        worst = simplex[-1]

        reflected = centroid + _ALPHA * (centroid - worst)
        f_reflected = f(reflected)
        if values[0] <= f_reflected < values[-2]:
            simplex[-1], values[-1] = reflected, f_reflected
            continue

        if f_reflected < values[0]:
            expanded = centroid + _GAMMA * (centroid - worst)
            f_expanded = f(expanded)
            if f_expanded < f_reflected:
                simplex[-1], values[-1] = expanded, f_expanded
            else:
                simplex[-1], values[-1] = reflected, f_reflected
            continue

        # Contract toward the better of the worst vertex and its reflection.
        if f_reflected < values[-1]:
            contracted = centroid + _RHO * (reflected - centroid)
        else:
            contracted = centroid + _RHO * (worst - centroid)
        f_contracted = f(contracted)
        if f_contracted < min(values[-1], f_reflected):
            simplex[-1], values[-1] = contracted, f_contracted
            continue

        # Shrink everything toward the best vertex.
        best = simplex[0]
        simplex = [best] + [best + _SIGMA * (v - best) for v in simplex[1:]]
        values = [values[0]] + [f(v) for v in simplex[1:]]

    order = np.argsort(values, kind="stable")
    best_x = simplex[order[0]]
    best_f = values[order[0]]
    return OptimResult(x=best_x, fun=best_f, converged=converged,
                       iterations=iterations, evaluations=evals)
