"""Generalized asymmetric Laplace (GAL) distribution and its quantile-fixed form.

A GAL variate has the hierarchical representation

    Y = mu + sigma * (A W + alpha S + sqrt(B W) U),

with W ~ Exp(1), S ~ N+(0, 1), U ~ N(0, 1), A = (1 - 2p) / (p (1 - p)) and
B = 2 / (p (1 - p)).  Conditional on S the error is asymmetric Laplace, so the
density and distribution function are half-normal mixtures of the AL kernel
over two intervals of S.  Every such piece has the closed form

    int_a^b 2 phi(s) exp(c s) ds = 2 exp(c^2 / 2) [Phi(b - c) - Phi(a - c)],

which is evaluated here in log space.

The quantile-fixed parameterisation replaces (p, alpha) by a shape ``gamma``
and a fixed quantile ``p0``; ``mixture_constants`` maps one to the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy import optimize
from scipy.special import erf, erfc, log_ndtr

__all__ = [
    "DomainError",
    "GalParams",
    "QuantileGalParams",
    "MixtureConstants",
    "Moments",
    "g_function",
    "log_g",
    "gamma_bounds",
    "mixture_constants",
    "pdf",
    "logpdf",
    "cdf",
    "sf",
    "mgf",
    "moments",
    "sample",
    "quantile_skewness",
]

LOG2 = math.log(2.0)
SQRT2 = math.sqrt(2.0)
SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
MGF_MARGIN = 1e-9


class DomainError(ValueError):
    """Raised when a parameter lies outside its admissible region."""


def log_g(t):
    """log g(t) with g(t) = 2 Phi(-|t|) exp(t^2 / 2)."""
    t = np.abs(np.asarray(t, dtype=float))
    return LOG2 + log_ndtr(-t) + 0.5 * t * t


def g_function(t):
    return np.exp(log_g(t))


@lru_cache(maxsize=256)
def gamma_bounds(p0: float) -> tuple[float, float]:
    """Admissible open interval (L, U) for the shape parameter at quantile p0.

    U is the positive root of g(t) = p0 and -L the positive root of
    g(t) = 1 - p0.  g is strictly decreasing on t >= 0 with g(0) = 1.
    """
    p0 = float(p0)
    if not 0.0 < p0 < 1.0:
        raise DomainError(f"quantile p0 must lie in (0, 1), got {p0}")

    def root(target: float) -> float:
        log_target = math.log(target)
        # g(t) ~ sqrt(2/pi) / t for large t, so [0, 40] only covers targets above ~0.02
        hi = max(40.0, 2.0 / target)
        return optimize.brentq(
            lambda t: float(log_g(t)) - log_target, 0.0, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500
        )

    return -root(1.0 - p0), root(p0)


def _check_gamma(p0: float, gamma: float) -> None:
    lower, upper = gamma_bounds(p0)
    if not gamma > lower:
        raise DomainError(f"gamma={gamma} violates lower bound L={lower:.12g} for p0={p0}")
    if not gamma < upper:
        raise DomainError(f"gamma={gamma} violates upper bound U={upper:.12g} for p0={p0}")


@dataclass(frozen=True)
class GalParams:
    """GAL(mu, sigma, p, alpha) in the general parameterisation."""

    mu: float
    sigma: float
    p: float
    alpha: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")
        if not 0.0 < self.p < 1.0:
            raise DomainError(f"p must lie in (0, 1), got {self.p}")


@dataclass(frozen=True)
class QuantileGalParams:
    """Quantile-fixed GAL: the p0-quantile sits at mu for every admissible gamma."""

    mu: float
    sigma: float
    gamma: float
    p0: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")
        if not 0.0 < self.p0 < 1.0:
            raise DomainError(f"p0 must lie in (0, 1), got {self.p0}")
        _check_gamma(self.p0, self.gamma)

    @property
    def constants(self) -> "MixtureConstants":
        return mixture_constants(self.p0, self.gamma)

    def to_general(self) -> GalParams:
        mc = self.constants
        return GalParams(self.mu, self.sigma, mc.p, mc.alpha)


@dataclass(frozen=True)
class MixtureConstants:
    p: float
    A: float
    B: float
    C: float
    alpha: float

    @property
    def p_plus(self) -> float:
        # sign(alpha) == sign(gamma)
        return self.p - float(self.alpha > 0)

    @property
    def p_minus(self) -> float:
        return self.p - float(self.alpha < 0)


def mixture_constants(p0: float, gamma: float) -> MixtureConstants:
    """Constants (p, A, B, C, alpha) of the quantile-fixed mixture at (p0, gamma)."""
    p0 = float(p0)
    gamma = float(gamma)
    if not 0.0 < p0 < 1.0:
        raise DomainError(f"quantile p0 must lie in (0, 1), got {p0}")
    _check_gamma(p0, gamma)
    return _constants_unchecked(p0, gamma)


def _constants_unchecked(p0: float, gamma: float) -> MixtureConstants:
    neg = 1.0 if gamma < 0 else 0.0
    pos = 1.0 if gamma > 0 else 0.0
    if gamma == 0.0:
        p = p0
    else:
        p = neg + (p0 - neg) * math.exp(-float(log_g(gamma)))
    pq = p * (1.0 - p)
    C = 1.0 / (pos - p)
    return MixtureConstants(p=p, A=(1.0 - 2.0 * p) / pq, B=2.0 / pq, C=C, alpha=C * abs(gamma))


def _as_general(params) -> GalParams:
    if isinstance(params, QuantileGalParams):
        return params.to_general()
    if isinstance(params, GalParams):
        return params
    raise TypeError(f"expected GalParams or QuantileGalParams, got {type(params).__name__}")


# ---------------------------------------------------------------------------
# log-space building blocks


def _log1mexp(d):
    """log(1 - exp(d)) for d <= 0."""
    d = np.asarray(d, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(d > -LOG2, np.log(-np.expm1(d)), np.log1p(-np.exp(d)))


def log_ndtr_diff(lo, hi):
    """log(Phi(hi) - Phi(lo)) for lo <= hi, accurate in both tails."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    # reflect intervals in the upper tail so the difference is always taken
    # between two small lower-tail probabilities
    flip = lo > 0
    a = np.where(flip, -hi, lo)
    b = np.where(flip, -lo, hi)
    with np.errstate(invalid="ignore"):
        la = log_ndtr(a)
        lb = log_ndtr(b)
        out = lb + _log1mexp(la - lb)
    return np.where(hi > lo, out, -np.inf)


def _upper_piece(c: float, t):
    """log of int_t^inf 2 phi(s) exp(c s) ds."""
    return LOG2 + 0.5 * c * c + log_ndtr(c - t)


def _lower_piece(c: float, t):
    """log of int_0^t 2 phi(s) exp(c s) ds."""
    return LOG2 + 0.5 * c * c + log_ndtr_diff(np.full_like(t, -c), t - c)


def _std_pieces(x, p: float, alpha: float):
    """Terms shared by the standardised pdf, cdf and survival function (alpha != 0).

    S is split at t >= 0 into the parts where x - alpha*S is <= 0 (left) and
    > 0 (right); one part is always (0, t) and the other (t, inf).  Returns
    (log_left, log_right, mass_left, mass_right) where
    log_left  = log[ exp((1-p) x) * int_left 2 phi(s) exp(c_L s) ds ],
    log_right = log[ exp(-p x) * int_right 2 phi(s) exp(c_R s) ds ],
    mass_* = P(S in that part), with c_L = -(1-p) alpha and c_R = p alpha.
    """
    x = np.asarray(x, dtype=float)
    cL = -(1.0 - p) * alpha
    cR = p * alpha
    if alpha > 0:
        t = np.where(x > 0, x / alpha, 0.0)
        piece_left, piece_right = _upper_piece(cL, t), _lower_piece(cR, t)
        mass_left, mass_right = erfc(t / SQRT2), erf(t / SQRT2)
    else:
        t = np.where(x < 0, x / alpha, 0.0)
        piece_left, piece_right = _lower_piece(cL, t), _upper_piece(cR, t)
        mass_left, mass_right = erf(t / SQRT2), erfc(t / SQRT2)
    log_left = np.where(np.isneginf(piece_left), -np.inf, (1.0 - p) * x + piece_left)
    log_right = np.where(np.isneginf(piece_right), -np.inf, -p * x + piece_right)
    return log_left, log_right, mass_left, mass_right


def std_logpdf(x, p: float, alpha: float):
    """Log density of (Y - mu) / sigma for GAL(0, 1, p, alpha)."""
    x = np.asarray(x, dtype=float)
    base = math.log(p * (1.0 - p))
    if alpha == 0.0:
        with np.errstate(invalid="ignore"):
            out = base - x * (p - (x <= 0))
        return np.where(np.isinf(x), -np.inf, out)
    finite = np.isfinite(x)
    xf = np.where(finite, x, 0.0)
    log_left, log_right, _, _ = _std_pieces(xf, p, alpha)
    out = base + np.logaddexp(log_left, log_right)
    return np.where(finite, out, -np.inf)


def std_cdf_sf(x, p: float, alpha: float):
    """(F, 1 - F) of GAL(0, 1, p, alpha), each computed without cancellation near 1."""
    x = np.asarray(x, dtype=float)
    if alpha == 0.0:
        with np.errstate(over="ignore"):
            lower = p * np.exp((1.0 - p) * np.minimum(x, 0.0))
            upper = (1.0 - p) * np.exp(-p * np.maximum(x, 0.0))
        F = np.where(x <= 0, lower, 1.0 - upper)
        S = np.where(x <= 0, 1.0 - lower, upper)
        return F, S
    finite = np.isfinite(x)
    xf = np.where(finite, x, 0.0)
    log_left, log_right, mass_left, mass_right = _std_pieces(xf, p, alpha)
    t_left = p * np.exp(log_left)
    t_right = (1.0 - p) * np.exp(log_right)
    F = mass_right + t_left - t_right
    S = mass_left - t_left + t_right
    F = np.clip(F, 0.0, 1.0)
    S = np.clip(S, 0.0, 1.0)
    F = np.where(finite, F, np.where(x > 0, 1.0, 0.0))
    S = np.where(finite, S, np.where(x > 0, 0.0, 1.0))
    return F, S


def _scalar_or_array(value, like):
    return float(value) if np.ndim(like) == 0 else value


def logpdf(y, params):
    """Log density at y for GalParams or QuantileGalParams."""
    gp = _as_general(params)
    x = (np.asarray(y, dtype=float) - gp.mu) / gp.sigma
    return _scalar_or_array(std_logpdf(x, gp.p, gp.alpha) - math.log(gp.sigma), y)


def pdf(y, params):
    return _scalar_or_array(np.exp(logpdf(y, params)), y)


def cdf(y, params):
    gp = _as_general(params)
    x = (np.asarray(y, dtype=float) - gp.mu) / gp.sigma
    return _scalar_or_array(std_cdf_sf(x, gp.p, gp.alpha)[0], y)


def sf(y, params):
    gp = _as_general(params)
    x = (np.asarray(y, dtype=float) - gp.mu) / gp.sigma
    return _scalar_or_array(std_cdf_sf(x, gp.p, gp.alpha)[1], y)


def mgf(t, params) -> float:
    """Moment generating function E[exp(tY)].

    Exists only for (p - 1)/sigma < t < p/sigma; endpoints are excluded with a
    relative margin of 1e-9.
    """
    gp = _as_general(params)
    t = float(t)
    lo = (gp.p - 1.0) / gp.sigma
    hi = gp.p / gp.sigma
    if not (lo + MGF_MARGIN * abs(lo) < t < hi - MGF_MARGIN * abs(hi)):
        raise DomainError(f"mgf undefined at t={t}: outside the existence window ({lo:.12g}, {hi:.12g})")
    st = gp.sigma * t
    log_m = (
        LOG2
        + math.log(gp.p * (1.0 - gp.p))
        - math.log(gp.p - st)
        - math.log(1.0 - gp.p + st)
        + gp.mu * t
        + 0.5 * (gp.alpha * st) ** 2
        + float(log_ndtr(gp.alpha * st))
    )
    return math.exp(log_m)


class Moments(NamedTuple):
    mean: float
    variance: float
    skewness: float


def moments(params) -> Moments:
    """Mean, variance and skewness in closed form (signed alpha throughout)."""
    gp = _as_general(params)
    p, a, s = gp.p, gp.alpha, gp.sigma
    pq = p * (1.0 - p)
    A = (1.0 - 2.0 * p) / pq
    B = 2.0 / pq
    mean = gp.mu + s * (A + a * SQRT_2_OVER_PI)
    var_std = A * A + B + a * a * (1.0 - 2.0 / math.pi)
    k3_std = 2.0 * A**3 + 3.0 * A * B + a**3 * SQRT_2_OVER_PI * (4.0 / math.pi - 1.0)
    return Moments(mean, s * s * var_std, k3_std / var_std**1.5)


def sample(params, size, rng: np.random.Generator) -> np.ndarray:
    """Exact draws through the exponential / half-normal / normal mixture."""
    gp = _as_general(params)
    p = gp.p
    pq = p * (1.0 - p)
    A = (1.0 - 2.0 * p) / pq
    B = 2.0 / pq
    w = rng.standard_exponential(size)
    s = np.abs(rng.standard_normal(size))
    u = rng.standard_normal(size)
    return gp.mu + gp.sigma * (A * w + gp.alpha * s + np.sqrt(B * w) * u)


def quantile_skewness(p0: float, gamma: float) -> float:
    """Skewness of the quantile-fixed law at (p0, gamma)."""
    mc = mixture_constants(p0, gamma)
    return moments(GalParams(0.0, 1.0, mc.p, mc.alpha)).skewness
