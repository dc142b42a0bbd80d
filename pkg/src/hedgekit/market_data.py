"""Price ingestion, log-return construction and distribution diagnostics.

All operations are pure functions of their inputs and safe to call
concurrently.
"""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import BinaryIO, Union

import numpy as np

__all__ = [
    "Frequency",
    "PriceSeries",
    "ReturnSeries",
    "DescriptiveStats",
    "load_prices",
    "align_prices",
    "to_returns",
    "describe",
    "sample_skewness",
    "sample_excess_kurtosis",
    "bera_jarque",
    "arch_lm_test",
    "adf_test",
]

logger = logging.getLogger(__name__)


class Frequency(Enum):
    """Return sampling frequency: 5 trading observations or 20."""

    FIVE_DAY = "weekly"
    TWENTY_DAY = "monthly"

    @property
    def stride(self) -> int:
        return 5 if self is Frequency.FIVE_DAY else 20

    @classmethod
    def from_label(cls, label: str) -> "Frequency":
        for member in cls:
            if member.value == label:
                return member
        raise ValueError(f"unknown frequency {label!r}; expected 'weekly' or 'monthly'")


@dataclass(frozen=True)
class PriceSeries:
    """Date-indexed closing prices.

    Dates must be strictly increasing and prices strictly positive and
    finite.
    """

    dates: np.ndarray   # datetime64[D]
    prices: np.ndarray  # float64

    def __post_init__(self):
        dates = np.asarray(self.dates, dtype="datetime64[D]")
        prices = np.asarray(self.prices, dtype=float)
        if dates.shape != prices.shape or dates.ndim != 1:
            raise ValueError("dates and prices must be 1-d arrays of equal length")
        if dates.size == 0:
            raise ValueError("empty price series")
        if dates.size > 1 and not np.all(np.diff(dates).astype(int) > 0):
            raise ValueError("non-increasing date in price series")
        if not np.all(np.isfinite(prices)) or not np.all(prices > 0):
            raise ValueError("prices must be strictly positive and finite")
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "prices", prices)

    def __len__(self) -> int:
        return self.dates.size


@dataclass(frozen=True)
class ReturnSeries:
    """Date-indexed log returns at a declared frequency."""

    frequency: Frequency
    dates: np.ndarray   # datetime64[D]
    values: np.ndarray  # float64

    def __post_init__(self):
        dates = np.asarray(self.dates, dtype="datetime64[D]")
        values = np.asarray(self.values, dtype=float)
        if dates.shape != values.shape or dates.ndim != 1:
            raise ValueError("dates and values must be 1-d arrays of equal length")
        if dates.size > 1 and not np.all(np.diff(dates).astype(int) > 0):
            raise ValueError("non-increasing date in return series")
        if not np.all(np.isfinite(values)):
            raise ValueError("returns must be finite")
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.dates.size


@dataclass(frozen=True)
class DescriptiveStats:
    """Summary row for one return series: moments plus diagnostics."""

    n: int
    mean: float
    min: float
    max: float
    std_dev: float
    skewness: float
    excess_kurtosis: float
    bera_jarque: float
    arch_lm: float
    adf: float


def load_prices(
    source: Union[str, Path, BinaryIO],
    date_column: str = "date",
    price_column: str = "price",
    date_format: str = "%Y-%m-%d",
) -> PriceSeries:
    """Parse a UTF-8 CSV with a header row into a :class:`PriceSeries`.

    Rows are read in file order. Row numbers in error messages are 1-based
    data rows (the header is row 0).
    """
    import datetime as _dt

    if isinstance(source, (str, Path)):
        fh = open(source, "rb")
        close = True
    else:
        fh = source
        close = False
    try:
        text = io.TextIOWrapper(fh, encoding="utf-8", newline="")
        reader = csv.DictReader(text)
        if reader.fieldnames is None:
            raise ValueError("CSV has no header row")
        missing = [c for c in (date_column, price_column) if c not in reader.fieldnames]
        if missing:
            raise ValueError(f"CSV is missing required columns: {missing}")

        dates, prices = [], []
        prev = None
        for i, row in enumerate(reader, start=1):
            raw_date = row.get(date_column)
            raw_price = row.get(price_column)
            if raw_date is None or raw_price is None:
                raise ValueError(f"row {i}: malformed row")
            try:
                d = _dt.datetime.strptime(raw_date.strip(), date_format).date()
            except ValueError as exc:
                raise ValueError(f"row {i}: unparseable date {raw_date!r}") from exc
            try:
                p = float(raw_price)
            except ValueError as exc:
                raise ValueError(f"row {i}: unparseable price {raw_price!r}") from exc
            if not math.isfinite(p) or p <= 0:
                raise ValueError(f"row {i}: non-positive price {raw_price!r}")
            if prev is not None and d <= prev:
                raise ValueError(f"row {i}: non-increasing date {raw_date!r}")
            prev = d
            dates.append(np.datetime64(d, "D"))
            prices.append(p)
        if not dates:
            raise ValueError("CSV contains no data rows")
        return PriceSeries(np.array(dates, dtype="datetime64[D]"), np.array(prices))
    finally:
        if close:
            fh.close()


def align_prices(*series: PriceSeries) -> list[PriceSeries]:
    """Inner-join price series on their dates.

    Dates absent from any input are dropped; the total number of dropped
    rows is logged.
    """
    if len(series) < 2:
        return list(series)
    common = series[0].dates
    for s in series[1:]:
        common = np.intersect1d(common, s.dates)
    if common.size == 0:
        raise ValueError("price series share no dates")
    dropped = sum(len(s) - common.size for s in series)
    if dropped:
        logger.info("date alignment dropped %d unmatched rows", dropped)
    out = []
    for s in series:
        mask = np.isin(s.dates, common)
        out.append(PriceSeries(s.dates[mask], s.prices[mask]))
    return out


def to_returns(prices: PriceSeries, frequency: Frequency) -> ReturnSeries:
    """Non-overlapping log returns at the frequency's stride.

    Interval boundaries are anchored at the first observation: return ``k``
    is ``ln(p[k*stride] / p[(k-1)*stride])`` and is dated at the interval
    end. The output has ``floor((n - 1) / stride)`` observations.
    """
    stride = frequency.stride
    n = len(prices)
    count = (n - 1) // stride
    if count < 1:
        raise ValueError(
            f"series of length {n} is too short for one full {stride}-observation stride"
        )
    idx = np.arange(count + 1) * stride
    logp = np.log(prices.prices[idx])
    return ReturnSeries(frequency, prices.dates[idx[1:]], np.diff(logp))


def _series_values(x) -> np.ndarray:
    if isinstance(x, ReturnSeries):
        return x.values
    return np.asarray(x, dtype=float)


def _central_moments(x: np.ndarray):
    m = x.mean()
    d = x - m
    m2 = np.mean(d**2)
    if m2 <= 0.0:
        raise ValueError("zero variance: skewness and kurtosis are undefined")
    return m2, np.mean(d**3), np.mean(d**4)


def sample_skewness(x) -> float:
    """Third standardized central moment with 1/n normalization."""
    x = _series_values(x)
    m2, m3, _ = _central_moments(x)
    return float(m3 / m2**1.5)


def sample_excess_kurtosis(x) -> float:
    """Fourth standardized central moment minus 3, 1/n normalization."""
    x = _series_values(x)
    m2, _, m4 = _central_moments(x)
    return float(m4 / m2**2 - 3.0)


def bera_jarque(x) -> float:
    """Normality statistic ``n * (S^2/6 + EK^2/24)``, chi-square(2) under the null."""
    x = _series_values(x)
    n = x.size
    s = sample_skewness(x)
    ek = sample_excess_kurtosis(x)
    return float(n * (s * s / 6.0 + ek * ek / 24.0))


def _ols(y: np.ndarray, X: np.ndarray):
    """Least squares with rank check; returns (coef, residuals)."""
    coef, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    if rank < X.shape[1]:
        raise ValueError("singular regressor matrix")
    return coef, y - X @ coef


def arch_lm_test(returns, lags: int = 4) -> float:
    """Engle's LM statistic for autoregressive conditional heteroskedasticity.

    The series is demeaned, its squares are regressed on a constant and
    ``lags`` own lags, and ``n_effective * R^2`` is returned. Chi-square
    with ``lags`` degrees of freedom under the null of no ARCH.
    """
    x = _series_values(returns)
    n = x.size
    if n < lags + 8:
        raise ValueError(f"need at least {lags + 8} observations for the {lags}-lag LM test")
    e2 = (x - x.mean()) ** 2
    if e2.max() <= 0.0:
        raise ValueError("zero variance input")
    y = e2[lags:]
    n_eff = y.size
    X = np.empty((n_eff, lags + 1))
    X[:, 0] = 1.0
    for j in range(1, lags + 1):
        X[:, j] = e2[lags - j : n - j]
    _, resid = _ols(y, X)
    sst = np.sum((y - y.mean()) ** 2)
    if sst <= 0.0:
        raise ValueError("degenerate regression: squared residuals are constant")
    r2 = 1.0 - np.sum(resid**2) / sst
    return float(n_eff * r2)


def adf_test(returns, lags: int = 4) -> float:
    """Augmented Dickey-Fuller t-statistic, constant included, no trend.

    Regression: ``dx_t = c + rho * x_{t-1} + sum_j gamma_j dx_{t-j} + e_t``.
    Returns the t-statistic on ``rho``; large negative values reject a unit
    root.
    """
    x = _series_values(returns)
    n = x.size
    if n < lags + 10:
        raise ValueError(f"need at least {lags + 10} observations for the {lags}-lag ADF test")
    dx = np.diff(x)
    y = dx[lags:]
    n_eff = y.size
    k = lags + 2
    X = np.empty((n_eff, k))
    X[:, 0] = 1.0
    X[:, 1] = x[lags:-1]
    for j in range(1, lags + 1):
        X[:, 1 + j] = dx[lags - j : dx.size - j]
    coef, resid = _ols(y, X)
    dof = n_eff - k
    if dof <= 0:
        raise ValueError("degenerate regression: not enough observations")
    s2 = np.sum(resid**2) / dof
    xtx_inv = np.linalg.inv(X.T @ X)
    se = math.sqrt(s2 * xtx_inv[1, 1])
    if se == 0.0:
        raise ValueError("degenerate regression: zero standard error")
    return float(coef[1] / se)


def describe(returns: ReturnSeries, lags: int = 4) -> DescriptiveStats:
    """Summary statistics and diagnostics for one return series.

    Skewness and excess kurtosis use 1/n central moments (the same
    normalization as the Bera-Jarque statistic); the standard deviation is
    the sample one (ddof=1). The LM and ADF tests run with ``lags`` lags and
    impose their own minimum lengths.
    """
    x = returns.values
    n = x.size
    if n < 8:
        raise ValueError("need at least 8 observations to describe a series")
    s = sample_skewness(x)
    ek = sample_excess_kurtosis(x)
    return DescriptiveStats(
        n=n,
        mean=float(x.mean()),
        min=float(x.min()),
        max=float(x.max()),
        std_dev=float(x.std(ddof=1)),
        skewness=s,
        excess_kurtosis=ek,
        bera_jarque=float(n * (s * s / 6.0 + ek * ek / 24.0)),
        arch_lm=arch_lm_test(x, lags),
        adf=adf_test(x, lags),
    )
