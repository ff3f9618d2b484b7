"""Random variate generators and densities used by the samplers.

Everything takes an explicit ``numpy.random.Generator``; nothing touches global
state.  Generators are vectorised over their parameters where the samplers
need it (truncated normal, GIG).
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass

import numpy as np
from scipy.special import betaln, log_ndtr, ndtr, ndtri, ndtri_exp

__all__ = [
    "Rectangle2D",
    "make_rng",
    "sample_truncated_normal",
    "truncated_normal_mean",
    "sample_half_normal",
    "sample_gig_half",
    "sample_scaled_beta",
    "scaled_beta_logpdf",
    "bvn_upper",
    "bvn_rectangle_prob",
    "sample_btn",
    "btn_log_density",
    "VanishingRegionError",
]

TAIL_SWITCH = 5.0


class VanishingRegionError(RuntimeError):
    """The truncation region has (numerically) zero probability."""


def make_rng(seed: int, stream: str | int | None = None) -> np.random.Generator:
    """Generator for ``seed`` and an optional named sub-stream.

    Named streams are derived through ``SeedSequence`` spawn keys, so
    ``make_rng(7, "chain")`` and ``make_rng(7, "data")`` are independent and
    each is reproducible bit for bit.
    """
    if stream is None:
        ss = np.random.SeedSequence(seed)
    else:
        key = stream if isinstance(stream, int) else zlib.crc32(str(stream).encode())
        ss = np.random.SeedSequence(seed, spawn_key=(key,))
    return np.random.Generator(np.random.PCG64(ss))


# ---------------------------------------------------------------------------
# truncated normal


def _log1mexp(d):
    with np.errstate(divide="ignore"):
        return np.where(d > -math.log(2.0), np.log(-np.expm1(d)), np.log1p(-np.exp(d)))


def _tn_upper_inverse(a, b, u):
    """Inverse-cdf draw on [a, b] with 0 <= a, worked through the upper tail."""
    lq_a = log_ndtr(-a)
    lq_b = log_ndtr(-b)
    # q = Q(a) - u (Q(a) - Q(b))
    log_q = lq_a + np.log1p(-u * -np.expm1(lq_b - lq_a))
    return -ndtri_exp(log_q)


def _tn_body_inverse(a, b, u):
    pa = ndtr(a)
    return ndtri(pa + u * (ndtr(b) - pa))


def _tn_tail_rejection(a, b, rng):
    """Exponential-proposal rejection on [a, b] with a > 0 (Robert's rate).

    The proposal is the exponential truncated to [a, b]; the acceptance ratio
    exp(-(x - lam)^2 / 2) is unchanged by the truncation.
    """
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    out = np.empty_like(a)
    todo = np.arange(a.size)
    lam = 0.5 * (a + np.sqrt(a * a + 4.0))
    width = b - a
    for _ in range(10_000):
        if todo.size == 0:
            return out
        la, lw = lam[todo], width[todo]
        u = rng.random(todo.size)
        # truncated exponential by inversion
        x = a[todo] - np.log1p(-u * -np.expm1(-la * lw)) / la
        ok = rng.random(todo.size) <= np.exp(-0.5 * (x - la) ** 2)
        out[todo[ok]] = x[ok]
        todo = todo[~ok]
    raise RuntimeError("tail rejection sampler failed to terminate")


def _standard_tn(a, b, rng):
    """Standard normal truncated to (a, b), elementwise."""
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    a = a.ravel()
    b = b.ravel()
    if np.any(~(a < b)):
        raise ValueError("truncation interval must satisfy lo < hi")
    out = np.empty_like(a)
    # mirror so that the interval leans right: work on (a, b) or (-b, -a)
    with np.errstate(invalid="ignore"):
        flip = (a + b) < 0  # (-inf, inf) compares False
    lo = np.where(flip, -b, a)
    hi = np.where(flip, -a, b)

    tail = lo > TAIL_SWITCH
    upper = (~tail) & (lo >= 0)
    body = ~(tail | upper)

    if np.any(tail):
        out[tail] = _tn_tail_rejection(lo[tail], hi[tail], rng)
    if np.any(upper):
        out[upper] = _tn_upper_inverse(lo[upper], hi[upper], rng.random(int(upper.sum())))
    if np.any(body):
        out[body] = _tn_body_inverse(lo[body], hi[body], rng.random(int(body.sum())))

    out = np.clip(out, np.nextafter(lo, np.inf), np.nextafter(hi, -np.inf))
    return np.where(flip, -out, out)


def sample_truncated_normal(mean, variance, lo, hi, rng: np.random.Generator):
    """Draws from N(mean, variance) restricted to (lo, hi); broadcasts over arguments."""
    mean, variance, lo, hi = np.broadcast_arrays(
        np.asarray(mean, dtype=float),
        np.asarray(variance, dtype=float),
        np.asarray(lo, dtype=float),
        np.asarray(hi, dtype=float),
    )
    if np.any(~(variance > 0)):
        raise ValueError("variance must be positive")
    sd = np.sqrt(variance)
    with np.errstate(invalid="ignore"):
        a = (lo - mean) / sd
        b = (hi - mean) / sd
    x = mean + sd * _standard_tn(a, b, rng).reshape(mean.shape)
    # guard the interval after rescaling
    x = np.clip(x, np.nextafter(lo, np.inf), np.nextafter(hi, -np.inf))
    return float(x) if x.ndim == 0 else x


def truncated_normal_mean(mean, variance, lo, hi):
    """Analytic mean of N(mean, variance) truncated to (lo, hi)."""
    sd = math.sqrt(variance)
    a = (lo - mean) / sd
    b = (hi - mean) / sd
    if a + b < 0:
        return -truncated_normal_mean(-mean, variance, -hi, -lo)
    # log phi(a) - log Z with Z computed in the upper tail
    lz = float(log_ndtr(-a)) + float(_log1mexp(log_ndtr(-b) - log_ndtr(-a)))
    phi_a = math.exp(-0.5 * a * a - 0.5 * math.log(2 * math.pi) - lz) if math.isfinite(a) else 0.0
    phi_b = math.exp(-0.5 * b * b - 0.5 * math.log(2 * math.pi) - lz) if math.isfinite(b) else 0.0
    return mean + sd * (phi_a - phi_b)


def sample_half_normal(scale_sq, rng: np.random.Generator, size=None):
    """|N(0, scale_sq)| by folding."""
    return np.abs(rng.normal(0.0, math.sqrt(scale_sq), size))


# ---------------------------------------------------------------------------
# GIG(1/2, a, b): density proportional to x^{-1/2} exp{-(a/x + b x)/2}


def sample_gig_half(a, b, rng: np.random.Generator):
    """GIG(1/2, a, b) draws as reciprocals of inverse-Gaussian variates.

    If X ~ GIG(1/2, a, b) then 1/X ~ GIG(-1/2, b, a), the inverse Gaussian with
    mean mu = sqrt(b/a) and shape lam = b.  The Michael-Schucany-Haas
    transformation is applied directly to 1/X and rationalised, so a -> 0
    (mu -> inf) neither overflows nor cancels.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a < 0) or np.any(~(b > 0)):
        raise ValueError("GIG(1/2, a, b) requires a >= 0 and b > 0")
    a, b = np.broadcast_arrays(np.maximum(a, 1e-300), b)
    inv_mu = np.sqrt(a / b)  # 1 / mu
    lam = b
    y = rng.standard_normal(a.shape) ** 2
    # r = mu y / (2 lam); nu1 = 1/x1 = (1 + r + sqrt(r^2 + 2r)) / mu
    r = y / (2.0 * lam * inv_mu)
    with np.errstate(over="ignore", invalid="ignore"):
        root = np.where(r > 1e150, r + 1.0, r * np.sqrt(1.0 + 2.0 / r))
        root = np.where(r > 0, root, 0.0)
    nu1 = inv_mu * (1.0 + r + root)
    # keep x1 with probability mu / (mu + x1) = 1 / (1 + inv_mu / nu1)
    keep = rng.random(a.shape) * (1.0 + inv_mu / nu1) <= 1.0
    out = np.where(keep, nu1, inv_mu * inv_mu / nu1)
    return float(out) if out.ndim == 0 else out


def gig_half_mean(a: float, b: float) -> float:
    """E[X] for GIG(1/2, a, b): sqrt(a/b) (1 + 1/sqrt(ab))."""
    return math.sqrt(a / b) * (1.0 + 1.0 / math.sqrt(a * b))


# ---------------------------------------------------------------------------
# scaled Beta on (L, U)


def sample_scaled_beta(L: float, U: float, a: float, b: float, rng: np.random.Generator, size=None):
    if not L < U:
        raise ValueError("scaled Beta needs L < U")
    return L + (U - L) * rng.beta(a, b, size)


def scaled_beta_logpdf(x, L: float, U: float, a: float, b: float):
    x = np.asarray(x, dtype=float)
    u = (x - L) / (U - L)
    inside = (u > 0) & (u < 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (a - 1.0) * np.log(u) + (b - 1.0) * np.log1p(-u) - betaln(a, b) - math.log(U - L)
    out = np.where(inside, out, -np.inf)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# bivariate normal rectangle probabilities


@dataclass(frozen=True)
class Rectangle2D:
    lo1: float = -math.inf
    hi1: float = math.inf
    lo2: float = -math.inf
    hi2: float = math.inf

    def __post_init__(self):
        if not (self.lo1 < self.hi1 and self.lo2 < self.hi2):
            raise ValueError(f"degenerate rectangle {self}")

    def contains(self, x) -> bool:
        return bool(self.lo1 < x[0] < self.hi1 and self.lo2 < x[1] < self.hi2)


# Gauss-Legendre nodes/weights on (-1, 1), positive half, orders 6/12/20.
_GL = {n: np.polynomial.legendre.leggauss(n) for n in (6, 12, 20)}


def _norm_sf(x: float) -> float:
    return float(ndtr(-x))


def bvn_upper(h: float, k: float, r: float) -> float:
    """P(X > h, Y > k) for a standard bivariate normal with correlation r.

    Drezner-Wesolowsky / Genz Gauss-Legendre scheme, accurate to about 1e-15.
    """
    if math.isinf(h) or math.isinf(k):
        if h == math.inf or k == math.inf:
            return 0.0
        if h == -math.inf and k == -math.inf:
            return 1.0
        return _norm_sf(k) if h == -math.inf else _norm_sf(h)
    r = min(max(r, -1.0), 1.0)
    if r == 0.0:
        return _norm_sf(h) * _norm_sf(k)
    ar = abs(r)
    n = 6 if ar < 0.3 else (12 if ar < 0.75 else 20)
    x, w = _GL[n]
    tp = 2.0 * math.pi
    hk = h * k
    if ar < 0.925:
        hs = 0.5 * (h * h + k * k)
        asr = math.asin(r)
        # integrate over theta in (0, asr) with nodes mapped from (-1, 1)
        sn = np.sin(asr * (x + 1.0) / 2.0)
        bvn = float(np.dot(w, np.exp((sn * hk - hs) / (1.0 - sn * sn))))
        return bvn * asr / (2.0 * tp) + _norm_sf(h) * _norm_sf(k)

    if r < 0:
        k = -k
        hk = -hk
    bvn = 0.0
    if ar < 1.0:
        as_ = (1.0 - r) * (1.0 + r)
        a = math.sqrt(as_)
        bs = (h - k) ** 2
        c = (4.0 - hk) / 8.0
        d = (12.0 - hk) / 16.0
        asr = -(bs / as_ + hk) / 2.0
        if asr > -100.0:
            bvn = a * math.exp(asr) * (1.0 - c * (bs - as_) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as_ * as_ / 5.0)
        if hk > -100.0:
            b = math.sqrt(bs)
            sp = math.sqrt(tp) * float(ndtr(-b / a))
            bvn -= math.exp(-hk / 2.0) * sp * b * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0)
        a = a / 2.0
        xs = (a * (x + 1.0)) ** 2
        rs = np.sqrt(1.0 - xs)
        asr_v = -(bs / xs + hk) / 2.0
        mask = asr_v > -100.0
        terms = np.zeros_like(xs)
        sp = 1.0 + c * xs * (1.0 + d * xs)
        ep = np.exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs
        terms[mask] = (np.exp(asr_v[mask]) * (sp[mask] - ep[mask]))
        bvn = (a * float(np.dot(w, terms)) - bvn) / tp
    if r > 0:
        bvn += float(ndtr(-max(h, k)))
    elif h >= k:
        bvn = -bvn
    else:
        if h < 0:
            lower = float(ndtr(k) - ndtr(h))
        else:
            lower = float(ndtr(-h) - ndtr(-k))
        bvn = lower - bvn
    return max(0.0, min(1.0, bvn))


def _standardise(mean, cov):
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    if cov.shape != (2, 2) or abs(cov[0, 1] - cov[1, 0]) > 1e-12 * abs(cov[0, 1]):
        raise ValueError("covariance must be a symmetric 2x2 matrix")
    if not (cov[0, 0] > 0 and cov[0, 0] * cov[1, 1] - cov[0, 1] * cov[1, 0] > 0):
        raise ValueError("covariance must be positive definite")
    s1 = math.sqrt(cov[0, 0])
    s2 = math.sqrt(cov[1, 1])
    return mean, s1, s2, float(cov[0, 1] / (s1 * s2))


def bvn_rectangle_prob(mean, cov, rect: Rectangle2D) -> float:
    """P(rect) under N(mean, cov) by inclusion-exclusion of upper orthants."""
    mean, s1, s2, r = _standardise(mean, cov)
    a1 = (rect.lo1 - mean[0]) / s1
    b1 = (rect.hi1 - mean[0]) / s1
    a2 = (rect.lo2 - mean[1]) / s2
    b2 = (rect.hi2 - mean[1]) / s2
    p = bvn_upper(a1, a2, r) - bvn_upper(b1, a2, r) - bvn_upper(a1, b2, r) + bvn_upper(b1, b2, r)
    return max(0.0, min(1.0, p))


def btn_log_density(x, mean, cov, rect: Rectangle2D, log_prob: float | None = None) -> float:
    """Log density of the bivariate normal truncated to ``rect`` at ``x``.

    The normalising rectangle probability depends on ``mean`` and is included;
    pass ``log_prob`` to reuse an already computed value.
    """
    x = np.asarray(x, dtype=float)
    if not rect.contains(x):
        return -math.inf
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    if log_prob is None:
        prob = bvn_rectangle_prob(mean, cov, rect)
        if prob <= 1e-300:
            raise VanishingRegionError("truncation rectangle has vanishing probability; shrink the tuning factor")
        log_prob = math.log(prob)
    d = x - mean
    det = cov[0, 0] * cov[1, 1] - cov[0, 1] ** 2
    quad = (cov[1, 1] * d[0] ** 2 - 2.0 * cov[0, 1] * d[0] * d[1] + cov[0, 0] * d[1] ** 2) / det
    return -math.log(2.0 * math.pi) - 0.5 * math.log(det) - 0.5 * quad - log_prob


def sample_btn(
    mean, cov, rect: Rectangle2D, rng: np.random.Generator, max_tries: int = 1_000_000, prob: float | None = None
) -> np.ndarray:
    """One draw from N(mean, cov) truncated to ``rect``.

    The first coordinate is proposed from its own truncated marginal and kept
    with probability P(second coordinate in range | first); the second is then
    drawn from its truncated conditional.  The result is exact and the expected
    number of proposals is P(first in range) / P(rect).  ``prob`` may carry an
    already computed P(rect).
    """
    mean, s1, s2, r = _standardise(mean, cov)
    if prob is None:
        prob = bvn_rectangle_prob(mean, cov, rect)
    if prob <= 1e-300:
        raise VanishingRegionError("truncation rectangle has vanishing probability; shrink the tuning factor")
    cond_sd = s2 * math.sqrt(1.0 - r * r)
    for _ in range(max_tries):
        x1 = sample_truncated_normal(mean[0], s1 * s1, rect.lo1, rect.hi1, rng)
        cond_mean = mean[1] + r * s2 * (x1 - mean[0]) / s1
        lo = (rect.lo2 - cond_mean) / cond_sd
        hi = (rect.hi2 - cond_mean) / cond_sd
        accept_p = float(ndtr(hi) - ndtr(lo)) if lo <= 0 else float(ndtr(-lo) - ndtr(-hi))
        if rng.random() < accept_p:
            x2 = sample_truncated_normal(cond_mean, cond_sd * cond_sd, rect.lo2, rect.hi2, rng)
            return np.array([x1, x2])
    raise VanishingRegionError("truncated bivariate normal sampler exceeded its proposal budget")
