"""Derivative-free maximizers used by the estimation and hedging layers.

Both routines are deterministic: identical inputs (including the restart
seed) always return identical results.
"""
from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

__all__ = ["maximize", "golden_section_max"]

# Standard simplex coefficients: reflection, expansion, contraction, shrink.
_REFLECT = 1.0
_EXPAND = 2.0
_CONTRACT = 0.5
_SHRINK = 0.5

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def _simplex_run(objective, x0, tolerance, max_iter):
    """Single Nelder-Mead ascent from ``x0``.

    Returns (best_x, best_value, converged). Non-finite objective values
    encountered during the search are treated as -inf so the simplex moves
    away from them.
    """
    dim = x0.size

    def f(x):
        v = objective(x)
        return v if math.isfinite(v) else -math.inf

    verts = np.empty((dim + 1, dim))
    vals = np.empty(dim + 1)
    verts[0] = x0
    vals[0] = f(x0)
    for i in range(dim):
        x = x0.copy()
        x[i] += 0.05 * abs(x[i]) + 0.05
        verts[i + 1] = x
        vals[i + 1] = f(x)

    for _ in range(max_iter):
        order = np.argsort(-vals)
        verts = verts[order]
        vals = vals[order]

        # Diameter bound: twice the largest sup-norm distance to the best vertex.
        spread = 2.0 * np.max(np.abs(verts[1:] - verts[0]))
        if spread < tolerance:
            return verts[0], vals[0], True

        centroid = verts[:-1].mean(axis=0)
        worst = verts[-1]

        reflected = centroid + _REFLECT * (centroid - worst)
        f_r = f(reflected)
        if f_r > vals[0]:
            expanded = centroid + _EXPAND * (centroid - worst)
            f_e = f(expanded)
            if f_e > f_r:
                verts[-1], vals[-1] = expanded, f_e
            else:
                verts[-1], vals[-1] = reflected, f_r
            continue
        if f_r > vals[-2]:
            verts[-1], vals[-1] = reflected, f_r
            continue

        contracted = centroid + _CONTRACT * (worst - centroid)
        f_c = f(contracted)
        if f_c > vals[-1]:
            verts[-1], vals[-1] = contracted, f_c
            continue

        for i in range(1, dim + 1):
            verts[i] = verts[0] + _SHRINK * (verts[i] - verts[0])
            vals[i] = f(verts[i])

    order = np.argsort(-vals)
    return verts[order[0]], vals[order[0]], False


def maximize(
    objective: Callable[[np.ndarray], float],
    start: Sequence[float] | np.ndarray,
    tolerance: float = 1e-8,
    max_iter: int = 10_000,
    restarts: int = 3,
    seed: int = 0,
) -> tuple[np.ndarray, float]:
    """Maximize ``objective`` by Nelder-Mead simplex search with restarts.

    One ascent starts from ``start``; ``restarts`` further ascents start from
    seeded random perturbations of it. The best point among the converged
    runs is returned. A run converges when the simplex diameter falls below
    ``tolerance``.

    Parameters
    ----------
    objective : callable
        Real-valued function of a 1-d parameter vector. Must be finite at
        ``start``; elsewhere non-finite values are treated as -inf.
    start : array_like
        Initial parameter vector.
    tolerance : float
        Simplex diameter below which a run is declared converged.
    max_iter : int
        Iteration cap per run.
    restarts : int
        Number of additional runs from perturbed starting points.
    seed : int
        Seed for the restart perturbations; part of the reproducibility
        contract.

    Returns
    -------
    (argmax, value) : tuple of ndarray and float

    Raises
    ------
    ValueError
        If the objective is non-finite at ``start``.
    RuntimeError
        If no run converges within ``max_iter`` iterations.
    """
    x0 = np.asarray(start, dtype=float).ravel()
    v0 = objective(x0)
    if not math.isfinite(v0):
        raise ValueError("objective is non-finite at the starting point")

    rng = np.random.default_rng(seed)
    best_x, best_v, any_converged = None, -math.inf, False
    for k in range(restarts + 1):
        if k == 0:
            x_init = x0
        else:
            x_init = x0 + rng.normal(size=x0.size) * (0.25 * (np.abs(x0) + 0.1))
        x, v, converged = _simplex_run(objective, x_init, tolerance, max_iter)
        if converged and v > best_v:
            best_x, best_v, any_converged = x, v, True
    if not any_converged:
        raise RuntimeError(
            f"no simplex run converged within the {max_iter}-iteration cap"
        )
    return best_x, best_v


def golden_section_max(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-6,
) -> float:
    """Locate the maximizer of a unimodal ``f`` on [lo, hi].

    Plain golden-section search; returns the bracket midpoint once the
    bracket is narrower than ``tol``.
    """
    a, b = (lo, hi) if lo <= hi else (hi, lo)
    h = b - a
    if h <= tol:
        return 0.5 * (a + b)
    c = b - _INV_PHI * h
    d = a + _INV_PHI * h
    fc, fd = f(c), f(d)
    while h > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            h = b - a
            c = b - _INV_PHI * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + _INV_PHI * h
            fd = f(d)
    return 0.5 * (a + b)
