"""Ordinal quantile regression with quantile-fixed GAL errors.

Latent z_i = x_i' beta + eps_i with eps_i ~ GAL_p0(0, sigma, gamma), observed
y_i = j iff xi_{j-1} < z_i <= xi_j.  The first two finite cut-points are fixed
(0 and c); the remaining ones are parameterised by log-spacings delta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from . import gal
from .random_kit import scaled_beta_logpdf

__all__ = [
    "OrdinalDataset",
    "CutpointSpec",
    "PriorConfig",
    "delta_to_xi",
    "xi_to_delta",
    "interval_log_probs",
    "log_likelihood",
    "category_probabilities",
    "log_prior",
]


@dataclass
class OrdinalDataset:
    """Covariates ``X`` (n x k), outcomes ``y`` in 1..J."""

    X: np.ndarray
    y: np.ndarray
    J: int
    names: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        self.y = np.asarray(self.y).astype(int).ravel()
        if self.X.shape[0] != self.y.shape[0]:
            raise ValueError(f"X has {self.X.shape[0]} rows but y has {self.y.shape[0]} entries")
        if self.J < 3:
            raise ValueError("ordinal models here need J >= 3 categories")
        if self.y.size and (self.y.min() < 1 or self.y.max() > self.J):
            raise ValueError(f"outcomes must lie in 1..{self.J}")
        if not self.names:
            self.names = [f"x{j + 1}" for j in range(self.k)]
        if len(self.names) != self.k:
            raise ValueError("one name per covariate column is required")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def k(self) -> int:
        return self.X.shape[1]

    def counts(self) -> np.ndarray:
        return np.bincount(self.y, minlength=self.J + 1)[1:]

    def validate_categories(self) -> None:
        missing = [j + 1 for j, c in enumerate(self.counts()) if c == 0]
        if missing:
            raise ValueError(f"categories {missing} have no observations")


@dataclass
class CutpointSpec:
    """xi_1 = 0 and xi_2 = c are fixed; ``delta`` holds log-spacings of the rest."""

    c: float
    delta: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("the fixed second cut-point must be positive")
        self.delta = np.atleast_1d(np.asarray(self.delta, dtype=float))


def delta_to_xi(spec: CutpointSpec, J: int) -> np.ndarray:
    """Full cut-point vector (-inf, 0, c, ..., +inf) of length J + 1."""
    if spec.delta.size != J - 3:
        raise ValueError(f"J={J} needs {J - 3} free log-spacings, got {spec.delta.size}")
    xi = np.empty(J + 1)
    xi[0] = -np.inf
    xi[1] = 0.0
    xi[2] = spec.c
    xi[3:J] = spec.c + np.cumsum(np.exp(spec.delta))
    xi[J] = np.inf
    return xi


def xi_to_delta(xi) -> CutpointSpec:
    """Inverse of :func:`delta_to_xi` for a full cut-point vector."""
    xi = np.asarray(xi, dtype=float)
    return CutpointSpec(c=float(xi[2]), delta=np.log(np.diff(xi[2:-1])))


def interval_log_probs(lower, upper, p: float, alpha: float) -> np.ndarray:
    """log P(lower < e <= upper) for standard GAL(0, 1, p, alpha) errors, elementwise.

    The difference is taken on whichever side (cdf or survival) keeps the
    numbers away from 1.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    pts = np.concatenate([lower, upper])
    F, S = gal.std_cdf_sf(pts, p, alpha)
    n = lower.size
    F_lo, F_hi = F[:n], F[n:]
    S_lo, S_hi = S[:n], S[n:]
    prob = np.where(F_hi < 0.5, F_hi - F_lo, S_lo - S_hi)
    with np.errstate(divide="ignore"):
        return np.log(np.maximum(prob, 0.0))


def _gal_constants(gamma: float, p0: float) -> gal.MixtureConstants:
    return gal.mixture_constants(p0, gamma)


def _log_probs(eta, y, xi, sigma, gamma, p0) -> np.ndarray:
    mc = _gal_constants(gamma, p0)
    lower = (xi[y - 1] - eta) / sigma
    upper = (xi[y] - eta) / sigma
    return interval_log_probs(lower, upper, mc.p, mc.alpha)


def log_likelihood(beta, sigma: float, gamma: float, spec: CutpointSpec, data: OrdinalDataset, p0: float) -> float:
    """Full (latent-free) ordinal log-likelihood; -inf if any observation is impossible."""
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (data.k,):
        raise ValueError(f"beta must have shape ({data.k},), got {beta.shape}")
    if data.n == 0:
        return 0.0
    xi = delta_to_xi(spec, data.J)
    return float(np.sum(_log_probs(data.X @ beta, data.y, xi, sigma, gamma, p0)))


def category_probabilities(x, beta, sigma: float, gamma: float, spec: CutpointSpec, p0: float) -> np.ndarray:
    """P(y = j | x) for j = 1..J, with J implied by ``spec``.

    ``x`` may be a single row or an (m, k) matrix.
    """
    x = np.asarray(x, dtype=float)
    eta = np.atleast_1d(x @ np.asarray(beta, dtype=float))
    J = spec.delta.size + 3
    xi = delta_to_xi(spec, J)
    mc = _gal_constants(gamma, p0)
    F, _ = gal.std_cdf_sf((xi[None, 1:J] - eta[:, None]) / sigma, mc.p, mc.alpha)
    cum = np.concatenate([np.zeros((eta.size, 1)), F, np.ones((eta.size, 1))], axis=1)
    probs = np.diff(cum, axis=1)
    return probs[0] if x.ndim == 1 else probs


@dataclass
class PriorConfig:
    """beta ~ N(beta0, B0), sigma ~ IG(n0/2, d0/2), gamma ~ SB(L, U, sb_a, sb_b), delta ~ N(delta0, D0)."""

    beta0: np.ndarray
    B0: np.ndarray
    n0: float = 5.0
    d0: float = 8.0
    sb_a: float = 4.0
    sb_b: float = 4.0
    delta0: np.ndarray = field(default_factory=lambda: np.zeros(0))
    D0: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))

    def __post_init__(self):
        self.beta0 = np.atleast_1d(np.asarray(self.beta0, dtype=float))
        self.B0 = np.atleast_2d(np.asarray(self.B0, dtype=float))
        self.delta0 = np.atleast_1d(np.asarray(self.delta0, dtype=float))
        self.D0 = np.asarray(self.D0, dtype=float).reshape(self.delta0.size, self.delta0.size)
        self._B0_inv = np.linalg.inv(self.B0)
        self._B0_logdet = np.linalg.slogdet(self.B0)[1]
        if self.delta0.size:
            self._D0_inv = np.linalg.inv(self.D0)
            self._D0_logdet = np.linalg.slogdet(self.D0)[1]

    @classmethod
    def default(cls, k: int, J: int) -> "PriorConfig":
        """Moderately diffuse defaults: N(0, 10 I), IG(5/2, 8/2), SB(4, 4), N(0, I)."""
        return cls(
            beta0=np.zeros(k),
            B0=10.0 * np.eye(k),
            delta0=np.zeros(J - 3),
            D0=np.eye(J - 3),
        )

    @property
    def B0_inv(self) -> np.ndarray:
        return self._B0_inv

    def log_beta(self, beta) -> float:
        d = np.asarray(beta, dtype=float) - self.beta0
        k = d.size
        return float(-0.5 * (k * math.log(2 * math.pi) + self._B0_logdet + d @ self._B0_inv @ d))

    def log_sigma(self, sigma: float) -> float:
        if not sigma > 0:
            return -math.inf
        shape, scale = self.n0 / 2.0, self.d0 / 2.0
        return shape * math.log(scale) - gammaln(shape) - (shape + 1.0) * math.log(sigma) - scale / sigma

    def log_gamma(self, gamma: float, p0: float) -> float:
        L, U = gal.gamma_bounds(p0)
        return float(scaled_beta_logpdf(gamma, L, U, self.sb_a, self.sb_b))

    def log_delta(self, delta) -> float:
        d = np.asarray(delta, dtype=float) - self.delta0
        if d.size == 0:
            return 0.0
        return float(-0.5 * (d.size * math.log(2 * math.pi) + self._D0_logdet + d @ self._D0_inv @ d))


def log_prior(beta, sigma: float, gamma: float, spec: CutpointSpec, priors: PriorConfig, p0: float) -> float:
    """Sum of the four independent prior log densities; -inf outside the support."""
    lp_sigma = priors.log_sigma(sigma)
    lp_gamma = priors.log_gamma(gamma, p0)
    if not (math.isfinite(lp_sigma) and math.isfinite(lp_gamma)):
        return -math.inf
    return priors.log_beta(beta) + lp_sigma + lp_gamma + priors.log_delta(spec.delta)
