"""Optimal futures hedge ratios under quadratic, log and exponential utility.

A hedge ratio is the futures weight beta in the hedged portfolio

    short hedger:  R_p =  r_s - beta * r_f
    long hedger:   R_p = -r_s + beta * r_f

Quadratic and log hedgers admit closed forms built from a speculative term
(driven by the expected futures return and risk aversion) plus the pure
covariance-ratio hedging term; the exponential hedger's objective involves
portfolio skewness and kurtosis and is maximized numerically.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .estimation import CovarianceState
from .market_data import ReturnSeries
from .optimize import golden_section_max

__all__ = [
    "Utility",
    "Side",
    "HedgeSpec",
    "PortfolioMoments",
    "hedged_return",
    "quadratic_ohr",
    "mvhr",
    "log_ohr",
    "portfolio_moments",
    "exp_objective",
    "exponential_ohr",
    "BETA_BRACKET",
]

logger = logging.getLogger(__name__)

# Search bracket for the numerical hedge; wide enough to contain every ratio
# the closed forms produce on realistic inputs, with margin.
BETA_BRACKET = (-2.0, 3.5)
_COARSE_POINTS = 56
_GSS_TOL = 1e-6
_VARIANCE_FLOOR = 1e-12


class Utility(Enum):
    QUADRATIC = "quadratic"
    LOG = "log"
    EXPONENTIAL = "exponential"
    MIN_VARIANCE = "mvhr"

    @classmethod
    def from_label(cls, label: str) -> "Utility":
        for member in cls:
            if member.value == label:
                return member
        raise ValueError(f"unknown utility {label!r}")


class Side(Enum):
    SHORT = "short"
    LONG = "long"

    @classmethod
    def from_label(cls, label: str) -> "Side":
        for member in cls:
            if member.value == label:
                return member
        raise ValueError(f"unknown side {label!r}")


@dataclass(frozen=True)
class HedgeSpec:
    """One hedging strategy: utility function, hedger side, risk aversion.

    ``crra`` is ignored for log utility (fixed at 1) and for the minimum
    variance hedge; in rolling backtests it is supplied per period from the
    estimated path and may be left None here.
    """

    utility: Utility
    side: Side
    crra: float | None = None

    def __post_init__(self):
        if self.crra is not None:
            if not math.isfinite(self.crra):
                raise ValueError("crra must be finite")
            if self.utility in (Utility.QUADRATIC, Utility.EXPONENTIAL) and self.crra <= 0:
                raise ValueError("crra must be positive for quadratic or exponential utility")


@dataclass(frozen=True)
class PortfolioMoments:
    """Moments of a hedged portfolio at a candidate hedge ratio.

    Mean and variance come from the conditional covariance state; skewness
    and kurtosis (raw, normal = 3) are empirical moments of the window's
    hedged returns. The deviation powers are precomputed from the floored
    variance.
    """

    mean: float
    variance: float
    std_cubed: float
    std_fourth: float
    skewness: float
    kurtosis: float

    def __post_init__(self):
        if self.variance < 0:
            raise ValueError("variance must be non-negative")
        if abs(self.std_cubed - self.variance**1.5) > 1e-10 * max(1.0, self.std_cubed):
            raise ValueError("std_cubed is inconsistent with variance")
        if abs(self.std_fourth - self.variance**2) > 1e-10 * max(1.0, self.std_fourth):
            raise ValueError("std_fourth is inconsistent with variance")
        if self.kurtosis < 1.0:
            raise ValueError("kurtosis below the attainable bound of 1")


def hedged_return(beta: float, side: Side, r_s: float, r_f: float) -> float:
    """Realized hedged-portfolio return at hedge ratio ``beta``."""
    if side is Side.SHORT:
        return r_s - beta * r_f
    return -r_s + beta * r_f


def quadratic_ohr(
    expected_futures_return: float,
    crra: float,
    state: CovarianceState,
    side: Side,
) -> float:
    """Closed-form hedge ratio for a quadratic-utility hedger.

    Short side: ``-E(r_f) / (2 crra var_f) + cov_sf / var_f``; the long side
    flips the sign of the speculative first term. The two sides therefore
    straddle the minimum variance ratio symmetrically.
    """
    if crra <= 0:
        raise ValueError("crra must be positive")
    if state.var_f <= 0:
        raise ValueError("futures variance must be positive")
    speculative = expected_futures_return / (2.0 * crra * state.var_f)
    hedge = state.cov_sf / state.var_f
    return hedge - speculative if side is Side.SHORT else hedge + speculative


def mvhr(state: CovarianceState) -> float:
    """Minimum variance hedge ratio cov_sf / var_f; side-independent."""
    if state.var_f <= 0:
        raise ValueError("futures variance must be positive")
    return state.cov_sf / state.var_f


def log_ohr(expected_futures_return: float, state: CovarianceState, side: Side) -> float:
    """Hedge ratio for a log-utility hedger: the quadratic form at unit risk aversion."""
    return quadratic_ohr(expected_futures_return, 1.0, state, side)


def _window_values(x) -> np.ndarray:
    if isinstance(x, ReturnSeries):
        return x.values
    return np.asarray(x, dtype=float)


def portfolio_moments(
    beta: float,
    side: Side,
    window_spot,
    window_futures,
    state: CovarianceState,
    mu_s: float,
    mu_f: float,
) -> PortfolioMoments:
    """Hedged-portfolio moments at ``beta``.

    Mean is the side-signed ``mu_s - beta * mu_f`` and variance is
    ``var_s + beta^2 var_f - 2 beta cov_sf`` from the conditional state,
    floored at 1e-12 before the deviation powers. Skewness and raw kurtosis
    are empirical moments of the window's hedged returns at this ``beta``;
    a numerically constant hedged window falls back to the normal values.
    """
    rs = _window_values(window_spot)
    rf = _window_values(window_futures)
    if rs.size != rf.size:
        raise ValueError("spot and futures windows must be aligned")
    if rs.size < 30:
        raise ValueError("window too short: need at least 30 observations")
    if state.var_f <= 0:
        raise ValueError("futures variance must be positive")

    mean = mu_s - beta * mu_f
    if side is Side.LONG:
        mean = -mean
    variance = state.var_s + beta * beta * state.var_f - 2.0 * beta * state.cov_sf
    variance = max(variance, _VARIANCE_FLOOR)

    hedged = rs - beta * rf
    if side is Side.LONG:
        hedged = -hedged
    d = hedged - hedged.mean()
    m2 = float(np.mean(d * d))
    if m2 > 1e-300:
        m3 = float(np.mean(d * d * d))
        m4 = float(np.mean(d * d * d * d))
        skew = m3 / m2**1.5
        kurt = m4 / (m2 * m2)
    else:
        skew, kurt = 0.0, 3.0
    return PortfolioMoments(
        mean=mean,
        variance=variance,
        std_cubed=variance**1.5,
        std_fourth=variance**2,
        skewness=skew,
        kurtosis=kurt,
    )


def exp_objective(moments: PortfolioMoments, crra: float) -> float:
    """Exponential-utility objective over portfolio moments.

    ``mean - crra/2 var + skew/6 crra^2 std^3 - (kurt-3)/24 crra^3 std^4``.
    Under normal returns (zero skew, kurtosis 3) this collapses to the
    mean-variance tradeoff.
    """
    if crra <= 0:
        raise ValueError("crra must be positive")
    lam2 = crra * crra
    return (
        moments.mean
        - 0.5 * crra * moments.variance
        + (moments.skewness / 6.0) * lam2 * moments.std_cubed
        - ((moments.kurtosis - 3.0) / 24.0) * lam2 * crra * moments.std_fourth
    )


def exponential_ohr(
    crra: float,
    side: Side,
    window_spot,
    window_futures,
    state: CovarianceState,
    mu_s: float,
    mu_f: float,
) -> float:
    """Numerically maximized hedge ratio for an exponential-utility hedger.

    The objective may be non-concave in beta, so a 56-point scan over the
    fixed bracket selects the best coarse cell and a golden-section search
    refines it to 1e-6. Deterministic for identical inputs.
    """
    lo, hi = BETA_BRACKET

    def value(beta: float) -> float:
        m = portfolio_moments(beta, side, window_spot, window_futures, state, mu_s, mu_f)
        return exp_objective(m, crra)

    grid = np.linspace(lo, hi, _COARSE_POINTS)
    vals = np.array([value(b) for b in grid])
    if not np.any(np.isfinite(vals)):
        raise ValueError("objective is non-finite across the whole search bracket")
    k = int(np.nanargmax(np.where(np.isfinite(vals), vals, -np.inf)))
    left = grid[max(k - 1, 0)]
    right = grid[min(k + 1, grid.size - 1)]
    beta = golden_section_max(value, left, right, tol=_GSS_TOL)
    if beta - lo < 0.05 or hi - beta < 0.05:
        logger.warning("exponential hedge ratio %.4f sits at the search bracket edge", beta)
    return beta
