"""Quasi-maximum-likelihood fitting and filtering of GARCH-family models.

Three specifications are supported: univariate GARCH(1,1) with a constant
mean, GARCH-in-mean where the conditional variance itself drives the mean
(no intercept), and the nine-parameter diagonal bivariate GARCH(1,1) used
to track the spot/futures covariance.

Conventions shared by every filter:

* the pre-sample state is the sample variance (and covariance) of the
  window, with a zero pre-sample residual, so the state at the first
  observation is ``omega + beta * sample_moment``;
* likelihoods are Gaussian quasi-likelihoods;
* fits run over transformed unconstrained parameters (log variance
  intercepts, logistic persistence mapping capped at 0.9999) on returns
  standardized by their sample deviation, then map back.

Fitting is deterministic given (data, seed): the simplex optimizer's
restart perturbations are the only randomness and are seeded.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict

import numpy as np
from numba import njit

from .market_data import ReturnSeries
from .optimize import maximize

__all__ = [
    "Garch11Params",
    "GarchMParams",
    "DvechParams",
    "CovarianceState",
    "fit_garch11",
    "fit_garch_m",
    "fit_dvech",
    "garch11_loglik",
    "garch_m_loglik",
    "dvech_loglik",
    "garch11_variance_path",
    "garch_m_variance_path",
    "dvech_filter",
    "dvech_forecast",
    "maximize",
]

PERSISTENCE_CAP = 0.9999
CORR_CLAMP = 0.999

_LOG_2PI = math.log(2.0 * math.pi)


# ---------------------------------------------------------------------------
# Parameter containers


@dataclass(frozen=True)
class Garch11Params:
    """Constant-mean GARCH(1,1): r_t = mu + e_t, h_t = omega + alpha e_{t-1}^2 + beta h_{t-1}."""

    mu: float
    omega: float
    alpha: float
    beta: float

    def __post_init__(self):
        _check_garch_block(self.omega, self.alpha, self.beta)
        if not math.isfinite(self.mu):
            raise ValueError("mu must be finite")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Garch11Params":
        return cls(**json.loads(text))


@dataclass(frozen=True)
class GarchMParams:
    """Risk-premium GARCH: r_t = crra * h_t + e_t with the GARCH(1,1) recursion.

    The mean equation carries no intercept; ``crra`` is the risk-aversion
    coefficient multiplying the conditional variance.
    """

    crra: float
    omega: float
    alpha: float
    beta: float

    def __post_init__(self):
        _check_garch_block(self.omega, self.alpha, self.beta)
        if not math.isfinite(self.crra):
            raise ValueError("crra must be finite")

    def to_json(self) -> str:
        d = asdict(self)
        d["lambda"] = d.pop("crra")
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "GarchMParams":
        d = json.loads(text)
        d["crra"] = d.pop("lambda")
        return cls(**d)


@dataclass(frozen=True)
class DvechParams:
    """Diagonal bivariate GARCH(1,1): each (co)variance depends only on its own lag.

    Nine variance-structure parameters plus the two mean constants. The two
    variance recursions are constrained stationary; the covariance recursion
    coefficients are unconstrained.
    """

    mu_s: float
    mu_f: float
    omega1: float
    omega2: float
    omega3: float
    alpha_s: float
    alpha_f: float
    alpha_sf: float
    beta_s: float
    beta_f: float
    beta_sf: float

    def __post_init__(self):
        _check_garch_block(self.omega1, self.alpha_s, self.beta_s)
        _check_garch_block(self.omega2, self.alpha_f, self.beta_f)
        for name in ("mu_s", "mu_f", "omega3", "alpha_sf", "beta_sf"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "DvechParams":
        return cls(**json.loads(text))


def _check_garch_block(omega, alpha, beta):
    if not (math.isfinite(omega) and omega > 0):
        raise ValueError("variance intercept must be strictly positive")
    if alpha < 0 or beta < 0:
        raise ValueError("ARCH and GARCH coefficients must be non-negative")
    if alpha + beta > PERSISTENCE_CAP:
        raise ValueError(f"alpha + beta must not exceed {PERSISTENCE_CAP}")


@dataclass(frozen=True)
class CovarianceState:
    """One period's conditional (var_s, var_f, cov_sf) triple.

    ``repaired`` flags states whose covariance was clamped to keep the
    implied correlation inside +-0.999.
    """

    var_s: float
    var_f: float
    cov_sf: float
    repaired: bool = False

    def __post_init__(self):
        if self.var_s < 0 or self.var_f < 0:
            raise ValueError("variances must be non-negative")
        if self.var_s * self.var_f - self.cov_sf**2 < -1e-15:
            raise ValueError("covariance state is not positive semidefinite")

    @property
    def correlation(self) -> float:
        denom = math.sqrt(self.var_s * self.var_f)
        return self.cov_sf / denom if denom > 0 else 0.0


# ---------------------------------------------------------------------------
# Numba kernels (hot paths; scalar recursions do not vectorize)

_NB_LOG_2PI = _LOG_2PI


@njit(cache=True)
def _garch11_nll(r, mu, omega, alpha, beta, pre_var):
    n = r.shape[0]
    h = omega + beta * pre_var
    ll = 0.0
    for t in range(n):
        if not (h > 1e-300) or not np.isfinite(h):
            return -1e300
        e = r[t] - mu
        ll += -0.5 * (_NB_LOG_2PI + np.log(h) + e * e / h)
        h = omega + alpha * e * e + beta * h
    return ll


@njit(cache=True)
def _garchm_nll(r, crra, omega, alpha, beta, pre_var):
    n = r.shape[0]
    h = omega + beta * pre_var
    ll = 0.0
    for t in range(n):
        if not (h > 1e-300) or not np.isfinite(h):
            return -1e300
        e = r[t] - crra * h
        ll += -0.5 * (_NB_LOG_2PI + np.log(h) + e * e / h)
        h = omega + alpha * e * e + beta * h
    return ll


@njit(cache=True)
def _garch11_path(r, mu, omega, alpha, beta, pre_var):
    n = r.shape[0]
    out = np.empty(n)
    h = omega + beta * pre_var
    for t in range(n):
        out[t] = h
        e = r[t] - mu
        h = omega + alpha * e * e + beta * h
    return out


@njit(cache=True)
def _garchm_path(r, crra, omega, alpha, beta, pre_var):
    n = r.shape[0]
    out = np.empty(n)
    h = omega + beta * pre_var
    for t in range(n):
        out[t] = h
        e = r[t] - crra * h
        h = omega + alpha * e * e + beta * h
    return out


@njit(cache=True)
def _dvech_nll(rs, rf, mu_s, mu_f, w1, w2, w3, a_s, a_f, a_sf, b_s, b_f, b_sf,
               pre_vs, pre_vf, pre_cv):
    n = rs.shape[0]
    hs = w1 + b_s * pre_vs
    hf = w2 + b_f * pre_vf
    hc = w3 + b_sf * pre_cv
    ll = 0.0
    for t in range(n):
        if not (hs > 1e-300) or not (hf > 1e-300):
            return -1e300
        if not np.isfinite(hs) or not np.isfinite(hf) or not np.isfinite(hc):
            return -1e300
        lim = CORR_CLAMP * np.sqrt(hs * hf)
        if hc > lim:
            hc = lim
        elif hc < -lim:
            hc = -lim
        det = hs * hf - hc * hc
        if not (det > 1e-300):
            return -1e300
        es = rs[t] - mu_s
        ef = rf[t] - mu_f
        q = (hf * es * es - 2.0 * hc * es * ef + hs * ef * ef) / det
        ll += -0.5 * (2.0 * _NB_LOG_2PI + np.log(det) + q)
        hs_n = w1 + a_s * es * es + b_s * hs
        hf_n = w2 + a_f * ef * ef + b_f * hf
        hc_n = w3 + a_sf * es * ef + b_sf * hc
        hs, hf, hc = hs_n, hf_n, hc_n
    return ll


@njit(cache=True)
def _dvech_path(rs, rf, mu_s, mu_f, w1, w2, w3, a_s, a_f, a_sf, b_s, b_f, b_sf,
                pre_vs, pre_vf, pre_cv):
    n = rs.shape[0]
    out_vs = np.empty(n)
    out_vf = np.empty(n)
    out_cv = np.empty(n)
    out_rep = np.zeros(n, dtype=np.bool_)
    hs = w1 + b_s * pre_vs
    hf = w2 + b_f * pre_vf
    hc = w3 + b_sf * pre_cv
    for t in range(n):
        if hc * hc > hs * hf:
            lim = CORR_CLAMP * np.sqrt(hs * hf)
            hc = lim if hc > 0.0 else -lim
            out_rep[t] = True
        out_vs[t] = hs
        out_vf[t] = hf
        out_cv[t] = hc
        es = rs[t] - mu_s
        ef = rf[t] - mu_f
        hs_n = w1 + a_s * es * es + b_s * hs
        hf_n = w2 + a_f * ef * ef + b_f * hf
        hc_n = w3 + a_sf * es * ef + b_sf * hc
        hs, hf, hc = hs_n, hf_n, hc_n
    return out_vs, out_vf, out_cv, out_rep


# ---------------------------------------------------------------------------
# Parameter transforms (unconstrained optimizer space <-> model space)


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


def _logit(p: float) -> float:
    return math.log(p / (1.0 - p))


def _garch_block_from_raw(u_omega, u_pers, u_share):
    omega = math.exp(u_omega)
    pers = PERSISTENCE_CAP * _sigmoid(u_pers)
    share = _sigmoid(u_share)
    alpha = pers * share
    beta = pers * (1.0 - share)
    return omega, alpha, beta


def _garch_block_to_raw(omega, alpha, beta):
    pers = alpha + beta
    return math.log(omega), _logit(pers / PERSISTENCE_CAP), _logit(alpha / pers)


def _validate_series(returns, min_obs, what):
    if not isinstance(returns, ReturnSeries):
        raise TypeError(f"{what} must be a ReturnSeries")
    if len(returns) < min_obs:
        raise ValueError(
            f"insufficient data: {what} has {len(returns)} observations, need {min_obs}"
        )


# ---------------------------------------------------------------------------
# Univariate fits


def fit_garch11(
    returns: ReturnSeries,
    min_obs: int = 250,
    tolerance: float = 1e-5,
    seed: int = 0,
    restarts: int = 3,
) -> Garch11Params:
    """Fit a constant-mean GARCH(1,1) by Gaussian quasi-likelihood.

    Returns are standardized internally; starting values are alpha=0.05,
    beta=0.85 with the intercept set by variance targeting. ``min_obs``
    defaults to 250 observations; rolling monthly windows may lower it.
    """
    _validate_series(returns, min_obs, "returns")
    x = returns.values
    scale = float(x.std())
    if scale <= 0.0:
        raise ValueError("zero-variance return series")
    z = x / scale

    def objective(u):
        omega, alpha, beta = _garch_block_from_raw(u[1], u[2], u[3])
        return _garch11_nll(z, u[0], omega, alpha, beta, 1.0)

    start = np.array([z.mean(), math.log(0.10), _logit(0.90 / PERSISTENCE_CAP), _logit(0.05 / 0.90)])
    try:
        u, _ = maximize(objective, start, tolerance=tolerance, seed=seed, restarts=restarts)
    except RuntimeError as exc:
        raise RuntimeError(f"optimizer failure while fitting GARCH(1,1): {exc}") from exc
    omega, alpha, beta = _garch_block_from_raw(u[1], u[2], u[3])
    return Garch11Params(mu=u[0] * scale, omega=omega * scale**2, alpha=alpha, beta=beta)


def fit_garch_m(
    returns: ReturnSeries,
    min_obs: int = 250,
    tolerance: float = 1e-5,
    seed: int = 0,
    restarts: int = 3,
) -> GarchMParams:
    """Fit the variance-in-mean GARCH by Gaussian quasi-likelihood.

    The mean equation is ``r_t = crra * h_t`` with no intercept and no
    risk-free adjustment. Starting risk aversion is 2.
    """
    _validate_series(returns, min_obs, "returns")
    x = returns.values
    scale = float(x.std())
    if scale <= 0.0:
        raise ValueError("zero-variance return series")
    z = x / scale

    def objective(u):
        omega, alpha, beta = _garch_block_from_raw(u[1], u[2], u[3])
        return _garchm_nll(z, u[0], omega, alpha, beta, 1.0)

    # crra scales with the data: r/s = (crra*s) * (h/s^2) + e/s.
    start = np.array([2.0 * scale, math.log(0.10), _logit(0.90 / PERSISTENCE_CAP), _logit(0.05 / 0.90)])
    try:
        u, _ = maximize(objective, start, tolerance=tolerance, seed=seed, restarts=restarts)
    except RuntimeError as exc:
        raise RuntimeError(f"optimizer failure while fitting the in-mean GARCH: {exc}") from exc
    omega, alpha, beta = _garch_block_from_raw(u[1], u[2], u[3])
    return GarchMParams(crra=u[0] / scale, omega=omega * scale**2, alpha=alpha, beta=beta)


# ---------------------------------------------------------------------------
# Bivariate fit and filter


def _check_aligned(spot: ReturnSeries, futures: ReturnSeries):
    if not isinstance(spot, ReturnSeries) or not isinstance(futures, ReturnSeries):
        raise TypeError("spot and futures must be ReturnSeries")
    if len(spot) != len(futures) or not np.array_equal(spot.dates, futures.dates):
        raise ValueError("spot and futures series are not aligned on the same dates")


def fit_dvech(
    spot: ReturnSeries,
    futures: ReturnSeries,
    min_obs: int = 250,
    tolerance: float = 1e-5,
    seed: int = 0,
    restarts: int = 3,
) -> DvechParams:
    """Fit the diagonal bivariate GARCH(1,1) by Gaussian quasi-likelihood.

    Both series are standardized internally; each variance equation starts
    from (alpha, beta) = (0.05, 0.85) with variance-targeted intercepts, and
    the covariance equation starts from the same loadings scaled to the
    sample correlation.
    """
    _check_aligned(spot, futures)
    if len(spot) < min_obs:
        raise ValueError(
            f"insufficient data: {len(spot)} observations, need {min_obs}"
        )
    xs, xf = spot.values, futures.values
    ss, sf = float(xs.std()), float(xf.std())
    if ss <= 0.0 or sf <= 0.0:
        raise ValueError("zero-variance input series")
    corr = float(np.corrcoef(xs, xf)[0, 1])
    if abs(corr) > 0.9999:
        raise ValueError("degenerate likelihood: spot and futures returns are collinear")
    zs, zf = xs / ss, xf / sf

    def objective(u):
        w1, a_s, b_s = _garch_block_from_raw(u[2], u[5], u[6])
        w2, a_f, b_f = _garch_block_from_raw(u[3], u[7], u[8])
        return _dvech_nll(
            zs, zf, u[0], u[1], w1, w2, u[4], a_s, a_f, u[9], b_s, b_f, u[10],
            1.0, 1.0, corr,
        )

    u_pers = _logit(0.90 / PERSISTENCE_CAP)
    u_share = _logit(0.05 / 0.90)
    start = np.array([
        zs.mean(), zf.mean(),
        math.log(0.10), math.log(0.10), corr * 0.10,
        u_pers, u_share, u_pers, u_share,
        0.05, 0.85,
    ])
    try:
        u, _ = maximize(objective, start, tolerance=tolerance, seed=seed, restarts=restarts)
    except RuntimeError as exc:
        raise RuntimeError(f"optimizer failure while fitting the bivariate GARCH: {exc}") from exc
    w1, a_s, b_s = _garch_block_from_raw(u[2], u[5], u[6])
    w2, a_f, b_f = _garch_block_from_raw(u[3], u[7], u[8])
    return DvechParams(
        mu_s=u[0] * ss,
        mu_f=u[1] * sf,
        omega1=w1 * ss**2,
        omega2=w2 * sf**2,
        omega3=u[4] * ss * sf,
        alpha_s=a_s,
        alpha_f=a_f,
        alpha_sf=u[9],
        beta_s=b_s,
        beta_f=b_f,
        beta_sf=u[10],
    )


def dvech_filter(
    params: DvechParams, spot: ReturnSeries, futures: ReturnSeries
) -> list[CovarianceState]:
    """Run the three covariance recursions over an aligned return pair.

    The pre-sample state is the sample variance/covariance of the inputs
    with a zero pre-sample residual. Whenever a state's implied correlation
    leaves [-1, 1] its covariance is clamped to +-0.999 correlation, the
    state is flagged ``repaired``, and the clamped value feeds the next
    recursion step. Output length equals input length.
    """
    _check_aligned(spot, futures)
    xs, xf = spot.values, futures.values
    pre_vs = float(xs.var())
    pre_vf = float(xf.var())
    pre_cv = float(np.mean((xs - xs.mean()) * (xf - xf.mean())))
    vs, vf, cv, rep = _dvech_path(
        xs, xf, params.mu_s, params.mu_f,
        params.omega1, params.omega2, params.omega3,
        params.alpha_s, params.alpha_f, params.alpha_sf,
        params.beta_s, params.beta_f, params.beta_sf,
        pre_vs, pre_vf, pre_cv,
    )
    return [
        CovarianceState(float(vs[t]), float(vf[t]), float(cv[t]), bool(rep[t]))
        for t in range(len(spot))
    ]


def dvech_forecast(
    params: DvechParams,
    last_state: CovarianceState,
    last_residuals: tuple[float, float],
) -> CovarianceState:
    """One-step-ahead covariance forecast: a single recursion application.

    ``last_residuals`` are the time-t mean residuals (spot, futures). The
    same correlation-clamping repair as the filter applies.
    """
    es, ef = last_residuals
    if not (math.isfinite(es) and math.isfinite(ef)):
        raise ValueError("residuals must be finite")
    vs = params.omega1 + params.alpha_s * es * es + params.beta_s * last_state.var_s
    vf = params.omega2 + params.alpha_f * ef * ef + params.beta_f * last_state.var_f
    cv = params.omega3 + params.alpha_sf * es * ef + params.beta_sf * last_state.cov_sf
    repaired = False
    if cv * cv > vs * vf:
        cv = math.copysign(CORR_CLAMP * math.sqrt(vs * vf), cv)
        repaired = True
    return CovarianceState(vs, vf, cv, repaired)


# ---------------------------------------------------------------------------
# Likelihood and variance-path evaluators (public, raw scale)


def garch11_loglik(params: Garch11Params, returns: ReturnSeries) -> float:
    """Gaussian log-likelihood of a GARCH(1,1) parameterization."""
    x = returns.values
    return float(_garch11_nll(x, params.mu, params.omega, params.alpha, params.beta, float(x.var())))


def garch_m_loglik(params: GarchMParams, returns: ReturnSeries) -> float:
    """Gaussian log-likelihood of an in-mean GARCH parameterization."""
    x = returns.values
    return float(_garchm_nll(x, params.crra, params.omega, params.alpha, params.beta, float(x.var())))


def dvech_loglik(params: DvechParams, spot: ReturnSeries, futures: ReturnSeries) -> float:
    """Bivariate Gaussian log-likelihood of a diagonal-GARCH parameterization."""
    _check_aligned(spot, futures)
    xs, xf = spot.values, futures.values
    return float(_dvech_nll(
        xs, xf, params.mu_s, params.mu_f,
        params.omega1, params.omega2, params.omega3,
        params.alpha_s, params.alpha_f, params.alpha_sf,
        params.beta_s, params.beta_f, params.beta_sf,
        float(xs.var()), float(xf.var()),
        float(np.mean((xs - xs.mean()) * (xf - xf.mean()))),
    ))


def garch11_variance_path(params: Garch11Params, returns: ReturnSeries) -> np.ndarray:
    """Conditional variance at each observation under a GARCH(1,1) fit."""
    x = returns.values
    return _garch11_path(x, params.mu, params.omega, params.alpha, params.beta, float(x.var()))


def garch_m_variance_path(params: GarchMParams, returns: ReturnSeries) -> np.ndarray:
    """Conditional variance at each observation under an in-mean GARCH fit."""
    x = returns.values
    return _garchm_path(x, params.crra, params.omega, params.alpha, params.beta, float(x.var()))
