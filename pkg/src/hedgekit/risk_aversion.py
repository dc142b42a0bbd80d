"""Time-varying risk aversion from rolling in-mean GARCH fits.

The coefficient path is dated at each window's final observation so that a
hedge formed at time t only ever sees estimates built from data through t.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .estimation import fit_garch_m
from .market_data import Frequency, ReturnSeries

__all__ = ["CrraPath", "Ar1Params", "rolling_crra", "fit_ar1", "ar1_forecast", "welch_t"]


@dataclass(frozen=True)
class CrraPath:
    """Dated risk-aversion coefficients from rolling window fits."""

    frequency: Frequency
    dates: np.ndarray   # datetime64[D], strictly increasing
    values: np.ndarray  # float64

    def __post_init__(self):
        dates = np.asarray(self.dates, dtype="datetime64[D]")
        values = np.asarray(self.values, dtype=float)
        if dates.shape != values.shape or dates.ndim != 1:
            raise ValueError("dates and values must be 1-d arrays of equal length")
        if dates.size > 1 and not np.all(np.diff(dates).astype(int) > 0):
            raise ValueError("non-increasing date in risk-aversion path")
        if not np.all(np.isfinite(values)):
            raise ValueError("risk-aversion values must be finite")
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.dates.size


@dataclass(frozen=True)
class Ar1Params:
    """First-order autoregression x_t = intercept + slope * x_{t-1} + e_t.

    ``abs(slope) < 1`` is required for stationary long-horizon forecasting
    but is not enforced here: near-unit-root fits are legitimate outputs and
    one-step forecasts remain well defined.
    """

    intercept: float
    slope: float
    innovation_std: float

    def __post_init__(self):
        for name in ("intercept", "slope", "innovation_std"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.innovation_std < 0:
            raise ValueError("innovation_std must be non-negative")


def rolling_crra(
    index_returns: ReturnSeries,
    window_length: int,
    step: int = 1,
    *,
    min_obs: int | None = None,
    refit_every: int = 1,
    tolerance: float = 1e-5,
    seed: int = 0,
    restarts: int = 3,
) -> CrraPath:
    """Risk-aversion path from in-mean GARCH fits over rolling windows.

    A window of ``window_length`` observations advances by ``step`` per
    emitted point; each point is dated at its window's final observation.
    ``refit_every`` > 1 refits only every k-th position and carries the last
    coefficient forward in between (a cheap-run switch; the default refits
    at every position). ``min_obs`` loosens the fit's minimum window for
    low-frequency runs and defaults to ``window_length``.

    Window fits are independent of each other, so the assembled path is the
    same regardless of evaluation order.
    """
    n = len(index_returns)
    if window_length > n:
        raise ValueError(f"window of {window_length} exceeds the {n} available observations")
    if window_length < 1 or step < 1 or refit_every < 1:
        raise ValueError("window_length, step and refit_every must be positive")
    if min_obs is None:
        min_obs = window_length

    positions = range(0, n - window_length + 1, step)
    dates = []
    values = []
    current = None
    for k, start in enumerate(positions):
        window = ReturnSeries(
            index_returns.frequency,
            index_returns.dates[start : start + window_length],
            index_returns.values[start : start + window_length],
        )
        if current is None or k % refit_every == 0:
            current = fit_garch_m(
                window, min_obs=min_obs, tolerance=tolerance, seed=seed, restarts=restarts
            ).crra
        dates.append(index_returns.dates[start + window_length - 1])
        values.append(current)
    return CrraPath(index_returns.frequency, np.array(dates, dtype="datetime64[D]"), np.array(values))


def fit_ar1(series) -> Ar1Params:
    """Least-squares AR(1) fit of an ordered real sequence."""
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or x.size < 10:
        raise ValueError("need at least 10 observations for an AR(1) fit")
    if not np.all(np.isfinite(x)):
        raise ValueError("series must be finite")
    lagged = x[:-1]
    y = x[1:]
    var = lagged.var()
    if var <= 0.0:
        raise ValueError("degenerate regression: constant series")
    slope = float(np.mean((lagged - lagged.mean()) * (y - y.mean())) / var)
    intercept = float(y.mean() - slope * lagged.mean())
    resid = y - intercept - slope * lagged
    dof = max(y.size - 2, 1)
    return Ar1Params(intercept, slope, float(np.sqrt(np.sum(resid**2) / dof)))


def ar1_forecast(params: Ar1Params, last_value: float) -> float:
    """One-step-ahead conditional mean: intercept + slope * last_value."""
    return params.intercept + params.slope * last_value


def welch_t(sample_a, sample_b) -> float:
    """Welch's unequal-variance two-sample t statistic.

    ``(mean_a - mean_b) / sqrt(var_a/n_a + var_b/n_b)`` with 1/(n-1)
    variances. Antisymmetric in its arguments.
    """
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise ValueError("each sample needs at least 2 observations")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("samples must be finite")
    va, vb = a.var(ddof=1), b.var(ddof=1)
    diff = a.mean() - b.mean()
    denom = math.sqrt(va / a.size + vb / b.size)
    if denom == 0.0:
        if diff == 0.0:
            raise ValueError("degenerate samples: zero variances and equal means")
        return math.copysign(math.inf, diff)
    return float(diff / denom)
