"""Seeded simulators for GARCH-family processes and the bundled demo data.

Used by the test suite for estimator-recovery checks and to build the
calibrated spot/futures/index fixtures shipped with the package.
"""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .estimation import DvechParams
from .market_data import PriceSeries

__all__ = [
    "simulate_garch11",
    "simulate_garch_m",
    "simulate_dvech",
    "skewed_innovations",
    "write_price_csv",
    "generate_demo_files",
    "DEMO_SEED",
]

DEMO_SEED = 20_210_914


def simulate_garch11(
    n: int, mu: float, omega: float, alpha: float, beta: float, seed: int
) -> np.ndarray:
    """Simulate n returns from a constant-mean GARCH(1,1), Gaussian shocks."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(n)
    h = omega / (1.0 - alpha - beta)
    out = np.empty(n)
    for t in range(n):
        e = math.sqrt(h) * z[t]
        out[t] = mu + e
        h = omega + alpha * e * e + beta * h
    return out


def simulate_garch_m(
    n: int, crra: float, omega: float, alpha: float, beta: float, seed: int
) -> np.ndarray:
    """Simulate n returns whose mean is crra times the conditional variance."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(n)
    h = omega / (1.0 - alpha - beta)
    out = np.empty(n)
    for t in range(n):
        e = math.sqrt(h) * z[t]
        out[t] = crra * h + e
        h = omega + alpha * e * e + beta * h
    return out


def simulate_dvech(
    n: int,
    params: DvechParams,
    seed: int,
    innovations: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Simulate an aligned (spot, futures) return pair from a diagonal GARCH.

    ``innovations``, when given, must be an (n, 2) array of standardized
    uncorrelated shocks; correlation is injected through the per-period
    covariance. The state starts at its unconditional value and the
    covariance is clamped inside +-0.999 implied correlation before each
    Cholesky factorization.
    """
    if innovations is None:
        rng = np.random.default_rng(seed)
        innovations = rng.standard_normal((n, 2))
    elif innovations.shape != (n, 2):
        raise ValueError("innovations must have shape (n, 2)")

    hs = params.omega1 / (1.0 - params.alpha_s - params.beta_s)
    hf = params.omega2 / (1.0 - params.alpha_f - params.beta_f)
    denom = 1.0 - params.alpha_sf - params.beta_sf
    hc = params.omega3 / denom if abs(denom) > 1e-8 else 0.0

    rs = np.empty(n)
    rf = np.empty(n)
    for t in range(n):
        lim = 0.999 * math.sqrt(hs * hf)
        c = min(max(hc, -lim), lim)
        a = math.sqrt(hs)
        b = c / a
        d = math.sqrt(max(hf - b * b, 1e-300))
        es = a * innovations[t, 0]
        ef = b * innovations[t, 0] + d * innovations[t, 1]
        rs[t] = params.mu_s + es
        rf[t] = params.mu_f + ef
        hs = params.omega1 + params.alpha_s * es * es + params.beta_s * hs
        hf = params.omega2 + params.alpha_f * ef * ef + params.beta_f * hf
        hc = params.omega3 + params.alpha_sf * es * ef + params.beta_sf * hc
    return rs, rf


def skewed_innovations(n: int, seed: int, jump_prob: float = 0.03,
                       jump_mean: float = 2.5, jump_std: float = 2.0) -> np.ndarray:
    """Standardized (n, 2) shocks from a normal/jump mixture.

    Each margin is N(0,1) with probability 1-jump_prob and
    N(jump_mean, jump_std^2) otherwise, then standardized analytically, so
    the result has mean 0 and unit variance with skew of the sign of
    ``jump_mean`` and excess kurtosis.
    """
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, 2))
    jump = rng.random((n, 2)) < jump_prob
    x = np.where(jump, jump_mean + jump_std * z, z)
    m = jump_prob * jump_mean
    v = jump_prob * (jump_std**2 + jump_mean**2) + (1.0 - jump_prob) - m * m
    return (x - m) / math.sqrt(v)


def write_price_csv(path: Path, dates: np.ndarray, prices: np.ndarray) -> None:
    """Write a two-column (date, price) CSV with LF endings."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("date,price\n")
        for d, p in zip(dates, prices):
            fh.write(f"{d},{p!r}\n")


def _to_prices(returns: np.ndarray, start: float = 100.0) -> np.ndarray:
    levels = np.empty(returns.size + 1)
    levels[0] = start
    levels[1:] = start * np.exp(np.cumsum(returns))
    return levels


# Demo calibration: daily parameters whose 5-day aggregates land near the
# documented weekly deviations (gas 0.104/0.082, oil 0.054/0.049), with
# positive skew and fat tails for gas, mild negative skew for oil.
_GAS_PARAMS = DvechParams(
    mu_s=3e-4, mu_f=3e-4,
    omega1=6.49e-5, omega2=4.03e-5, omega3=4.09e-5,
    alpha_s=0.07, alpha_f=0.07, alpha_sf=0.07,
    beta_s=0.90, beta_f=0.90, beta_sf=0.90,
)
_OIL_PARAMS = DvechParams(
    mu_s=3e-4, mu_f=3e-4,
    omega1=1.75e-5, omega2=1.44e-5, omega3=1.45e-5,
    alpha_s=0.06, alpha_f=0.06, alpha_sf=0.06,
    beta_s=0.91, beta_f=0.91, beta_sf=0.91,
)
_DEMO_DAYS = 3035
_DEMO_START = np.datetime64("1995-01-02")  # a Monday


def demo_calendar(n_days: int = _DEMO_DAYS) -> np.ndarray:
    """Business-day calendar used by the bundled fixtures."""
    return np.busday_offset(_DEMO_START, np.arange(n_days + 1), roll="forward")


def generate_demo_files(directory: str | Path, seed: int = DEMO_SEED) -> list[Path]:
    """Regenerate the bundled synthetic daily price fixtures.

    Emits gas and oil spot/futures pairs plus an energy-sector index whose
    returns carry a variance-proportional risk premium, all on one shared
    business-day calendar.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    dates = demo_calendar()
    n = _DEMO_DAYS

    gas_s, gas_f = simulate_dvech(
        n, _GAS_PARAMS, seed, innovations=skewed_innovations(n, seed + 1)
    )
    oil_s, oil_f = simulate_dvech(
        n, _OIL_PARAMS, seed + 2,
        innovations=skewed_innovations(n, seed + 3, jump_prob=0.02,
                                       jump_mean=-2.0, jump_std=1.5),
    )
    index = simulate_garch_m(n, crra=2.8, omega=3.63e-6, alpha=0.06, beta=0.91,
                             seed=seed + 4)

    written = []
    for name, returns in [
        ("gas_spot_daily.csv", gas_s),
        ("gas_futures_daily.csv", gas_f),
        ("oil_spot_daily.csv", oil_s),
        ("oil_futures_daily.csv", oil_f),
        ("energy_index_daily.csv", index),
    ]:
        path = directory / name
        write_price_csv(path, dates, _to_prices(returns))
        written.append(path)
    return written


def load_demo_prices(name: str) -> PriceSeries:
    """Load one of the bundled daily fixtures by file name."""
    from importlib import resources

    from .market_data import load_prices

    ref = resources.files("hedgekit").joinpath("data", name)
    with ref.open("rb") as fh:
        return load_prices(fh)
