"""Gibbs/MH samplers for ordinal quantile regression with GAL or AL errors.

With nu_i = sigma W_i and h_i = sigma S_i the latent response is conditionally
normal,

    z_i | beta, nu_i, h_i ~ N(x_i' beta + A nu_i + C|gamma| h_i, sigma B nu_i),

with nu_i ~ Exp(mean sigma) and h_i ~ N+(0, sigma^2).  beta, nu, h and z have
closed-form conditionals; (sigma, gamma) and delta are updated by random-walk
MH marginally of the latent variables, using the ordinal likelihood directly.
"""

from __future__ import annotations

import logging
import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, optimize
from scipy.special import log_ndtr, ndtr

from . import gal
from .model import CutpointSpec, OrdinalDataset, PriorConfig, _log_probs, delta_to_xi
from .random_kit import (
    Rectangle2D,
    VanishingRegionError,
    bvn_rectangle_prob,
    make_rng,
    sample_btn,
    sample_gig_half,
    sample_truncated_normal,
)

__all__ = [
    "McmcError",
    "McmcState",
    "TuningConfig",
    "ModelConfig",
    "ChainOutput",
    "Posterior",
    "ProposalCovariances",
    "TUNING_PRESETS",
    "preset_tuning",
    "draw_beta",
    "draw_sigma_gamma",
    "draw_sigma",
    "draw_nu",
    "draw_h",
    "draw_delta",
    "draw_z",
    "draw_latents_joint",
    "numerical_hessian",
    "estimate_proposal_covariances",
    "initial_state",
    "run_chain",
    "run_bqror",
    "inefficiency_factor",
]

log = logging.getLogger(__name__)

# squared tuning factors (iota1^2, iota2^2) per quantile
TUNING_PRESETS: dict[str, dict[float, tuple[float, float | None]]] = {
    "study1": {0.25: (1.7, 4.0), 0.50: (2.25, 3.2), 0.75: (2.0, 2.5)},
    "study2": {0.25: (0.3, 3.25), 0.50: (0.7, 3.1), 0.75: (1.45, 2.75)},
    "application": {0.25: (3.0, None), 0.50: (2.4, None), 0.75: (4.4, None)},
}


def preset_tuning(name: str, p0: float) -> tuple[float, float]:
    """(iota1, iota2) for a named preset; quantiles without an entry fall back to 1."""
    try:
        table = TUNING_PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown tuning preset {name!r}; choose from {sorted(TUNING_PRESETS)}") from None
    for q, (s1, s2) in table.items():
        if math.isclose(q, p0):
            return math.sqrt(s1), math.sqrt(s2) if s2 is not None else 1.0
    return 1.0, 1.0


class McmcError(RuntimeError):
    """Raised when the sampler hits a non-finite state."""


@dataclass
class TuningConfig:
    iota1: float = 1.0
    iota2: float = 1.0
    draws: int = 15000
    burnin: int = 5000
    seed: int = 0

    def __post_init__(self):
        if not (self.iota1 > 0 and self.iota2 > 0):
            raise ValueError("tuning factors must be positive")
        if self.draws <= 0 or self.burnin < 0:
            raise ValueError("need draws > 0 and burnin >= 0")


@dataclass
class ModelConfig:
    """Everything a chain needs besides the data.

    ``latent_update`` chooses how (nu, h, z) are refreshed after the two
    collapsed MH blocks: ``"joint"`` draws them from their joint conditional
    (exact), ``"sequential"`` runs nu, h, z conditionals in turn.
    """

    p0: float
    c: float = 2.0
    model: str = "fbqror"
    priors: PriorConfig | None = None
    tuning: TuningConfig = field(default_factory=TuningConfig)
    lock_gamma: bool = False
    latent_update: str = "joint"
    record_loglik: bool = True

    def __post_init__(self):
        if not 0.0 < self.p0 < 1.0:
            raise ValueError(f"quantile must lie in (0, 1), got {self.p0}")
        if not self.c > 0:
            raise ValueError("the fixed cut-point c must be positive")
        if self.model not in ("fbqror", "bqror"):
            raise ValueError(f"model must be 'fbqror' or 'bqror', got {self.model!r}")
        if self.latent_update not in ("joint", "sequential"):
            raise ValueError("latent_update must be 'joint' or 'sequential'")

    def priors_for(self, data: OrdinalDataset) -> PriorConfig:
        return self.priors if self.priors is not None else PriorConfig.default(data.k, data.J)


@dataclass
class McmcState:
    beta: np.ndarray
    sigma: float
    gamma: float
    delta: np.ndarray
    z: np.ndarray
    nu: np.ndarray
    h: np.ndarray

    def copy(self) -> "McmcState":
        return McmcState(
            self.beta.copy(), self.sigma, self.gamma, self.delta.copy(), self.z.copy(), self.nu.copy(), self.h.copy()
        )


@dataclass
class Posterior:
    """Data, priors and fixed settings shared by every sampling step."""

    data: OrdinalDataset
    priors: PriorConfig
    p0: float
    c: float

    def __post_init__(self):
        self.bounds = gal.gamma_bounds(self.p0)

    def xi(self, delta) -> np.ndarray:
        return delta_to_xi(CutpointSpec(self.c, delta), self.data.J)

    def constants(self, gamma: float) -> gal.MixtureConstants:
        return gal.mixture_constants(self.p0, gamma)

    def loglik(self, beta, sigma: float, gamma: float, delta) -> float:
        if self.data.n == 0:
            return 0.0
        lp = _log_probs(self.data.X @ beta, self.data.y, self.xi(delta), sigma, gamma, self.p0)
        return float(np.sum(lp))

    def interval(self, delta) -> tuple[np.ndarray, np.ndarray]:
        xi = self.xi(delta)
        return xi[self.data.y - 1], xi[self.data.y]


@dataclass
class StepResult:
    value: object
    accepted: bool
    loglik: float


# ---------------------------------------------------------------------------
# Gibbs steps


def draw_beta(state: McmcState, post: Posterior, rng: np.random.Generator) -> np.ndarray:
    """beta | z, nu, h, sigma, gamma ~ N(beta_tilde, B_tilde)."""
    X = post.data.X
    mc = post.constants(state.gamma)
    w = 1.0 / (state.sigma * mc.B * state.nu)
    resid = state.z - mc.A * state.nu - mc.C * abs(state.gamma) * state.h
    prec = post.priors.B0_inv + (X * w[:, None]).T @ X
    rhs = X.T @ (w * resid) + post.priors.B0_inv @ post.priors.beta0
    try:
        chol = linalg.cholesky(prec, lower=True)
    except linalg.LinAlgError as exc:
        raise McmcError("posterior precision of beta is not positive definite") from exc
    mean = linalg.cho_solve((chol, True), rhs)
    return mean + linalg.solve_triangular(chol.T, rng.standard_normal(mean.size), lower=False)


def draw_nu(state: McmcState, post: Posterior, rng: np.random.Generator) -> np.ndarray:
    """nu_i | rest ~ GIG(1/2, a_i, b)."""
    mc = post.constants(state.gamma)
    r = state.z - post.data.X @ state.beta - mc.C * abs(state.gamma) * state.h
    a = r * r / (state.sigma * mc.B)
    b = mc.A**2 / (state.sigma * mc.B) + 2.0 / state.sigma
    return np.atleast_1d(sample_gig_half(a, np.full_like(a, b), rng))


def h_conditional(state: McmcState, post: Posterior) -> tuple[np.ndarray, np.ndarray]:
    """Mean and variance of the normal that h_i | rest truncates to [0, inf)."""
    mc = post.constants(state.gamma)
    cg = mc.C * abs(state.gamma)
    r = state.z - post.data.X @ state.beta - mc.A * state.nu
    prec = cg * cg / (state.sigma * mc.B * state.nu) + 1.0 / state.sigma**2
    mean = (cg * r / (state.sigma * mc.B * state.nu)) / prec
    return mean, 1.0 / prec


def draw_h(state: McmcState, post: Posterior, rng: np.random.Generator) -> np.ndarray:
    """h_i | rest ~ N+(mu_h, s2_h)."""
    mean, var = h_conditional(state, post)
    return np.atleast_1d(sample_truncated_normal(mean, var, 0.0, np.inf, rng))


def draw_z(state: McmcState, post: Posterior, rng: np.random.Generator) -> np.ndarray:
    """z_i | rest ~ TN on its category interval."""
    mc = post.constants(state.gamma)
    mean = post.data.X @ state.beta + mc.A * state.nu + mc.C * abs(state.gamma) * state.h
    lo, hi = post.interval(state.delta)
    return np.atleast_1d(sample_truncated_normal(mean, state.sigma * mc.B * state.nu, lo, hi, rng))


def draw_latents_joint(
    state: McmcState,
    post: Posterior,
    rng: np.random.Generator,
    max_rounds: int = 60,
    first_batch: int = 4,
    growth: int = 4,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(nu, h, z) from their joint conditional given y, beta, sigma, gamma, delta.

    (nu_i, h_i) are proposed from their priors and kept with probability
    P(z_i in its interval | nu_i, h_i); z_i then comes from its truncated
    normal.  Expected proposals per observation are 1 / P(y_i | parameters).
    Each round proposes a batch per unfinished observation, doubling the
    batch size every round, and keeps the first accepted candidate.
    """
    n = post.data.n
    mc = post.constants(state.gamma)
    cg = mc.C * abs(state.gamma)
    eta = post.data.X @ state.beta
    lo, hi = post.interval(state.delta)
    nu = np.empty(n)
    h = np.empty(n)
    todo = np.arange(n)
    batch = first_batch
    for _ in range(max_rounds):
        if todo.size == 0:
            break
        shape = (todo.size, batch)
        nu_p = rng.exponential(state.sigma, shape)
        h_p = np.abs(rng.normal(0.0, state.sigma, shape))
        m = eta[todo, None] + mc.A * nu_p + cg * h_p
        sd = np.sqrt(state.sigma * mc.B * nu_p)
        with np.errstate(divide="ignore", invalid="ignore"):
            a = (lo[todo, None] - m) / sd
            b = (hi[todo, None] - m) / sd
        prob = np.where(a > 0, ndtr(-a) - ndtr(-b), ndtr(b) - ndtr(a))
        keep = rng.random(shape) < prob
        hit = keep.any(axis=1)
        first = keep.argmax(axis=1)[hit]
        rows = np.flatnonzero(hit)
        nu[todo[hit]] = nu_p[rows, first]
        h[todo[hit]] = h_p[rows, first]
        todo = todo[~hit]
        batch = min(growth * batch, 4096)
    else:
        if todo.size:
            raise McmcError(f"joint latent draw did not finish for observations {todo[:10].tolist()}")
    mean = eta + mc.A * nu + cg * h
    z = np.atleast_1d(sample_truncated_normal(mean, state.sigma * mc.B * nu, lo, hi, rng))
    return nu, h, z


# ---------------------------------------------------------------------------
# MH steps


def _log_target_sg(post: Posterior, beta, sigma, gamma, delta) -> tuple[float, float]:
    """(log-likelihood, log-likelihood + sigma and gamma prior terms)."""
    lp = post.priors.log_sigma(sigma) + post.priors.log_gamma(gamma, post.p0)
    if not math.isfinite(lp):
        return -math.inf, -math.inf
    ll = post.loglik(beta, sigma, gamma, delta)
    return ll, ll + lp


def draw_sigma_gamma(
    state: McmcState,
    post: Posterior,
    proposal_cov: np.ndarray,
    rng: np.random.Generator,
    loglik: float | None = None,
) -> StepResult:
    """Joint random-walk MH for (sigma, gamma) with a truncated bivariate normal proposal.

    The proposal lives on (0, inf) x (L, U); its normalising rectangle
    probability depends on the current point, so the acceptance ratio carries
    P(rect | current) / P(rect | proposed).  ``proposal_cov`` is the already
    scaled proposal covariance.
    """
    L, U = post.bounds
    rect = Rectangle2D(0.0, math.inf, L, U)
    cur = np.array([state.sigma, state.gamma])
    if loglik is None:
        loglik = post.loglik(state.beta, state.sigma, state.gamma, state.delta)
    cur_target = loglik + post.priors.log_sigma(state.sigma) + post.priors.log_gamma(state.gamma, post.p0)
    p_cur = bvn_rectangle_prob(cur, proposal_cov, rect)
    if p_cur <= 1e-300:
        raise VanishingRegionError("proposal rectangle has vanishing probability; shrink iota1")
    prop = sample_btn(cur, proposal_cov, rect, rng, prob=p_cur)
    p_prop = bvn_rectangle_prob(prop, proposal_cov, rect)
    if p_prop <= 1e-300:
        warnings.warn("reverse proposal probability underflowed; rejecting", RuntimeWarning, stacklevel=2)
        return StepResult((state.sigma, state.gamma), False, loglik)
    ll_prop, prop_target = _log_target_sg(post, state.beta, prop[0], prop[1], state.delta)
    log_ratio = prop_target - cur_target + math.log(p_cur) - math.log(p_prop)
    if math.log(rng.random()) < log_ratio:
        return StepResult((float(prop[0]), float(prop[1])), True, ll_prop)
    return StepResult((state.sigma, state.gamma), False, loglik)


def draw_sigma(
    state: McmcState,
    post: Posterior,
    proposal_var: float,
    rng: np.random.Generator,
    loglik: float | None = None,
) -> StepResult:
    """Random-walk MH for sigma alone (gamma held fixed), truncated normal proposal on (0, inf)."""
    sd = math.sqrt(proposal_var)
    if loglik is None:
        loglik = post.loglik(state.beta, state.sigma, state.gamma, state.delta)
    cur_target = loglik + post.priors.log_sigma(state.sigma)
    prop = sample_truncated_normal(state.sigma, proposal_var, 0.0, math.inf, rng)
    ll_prop = post.loglik(state.beta, prop, state.gamma, state.delta)
    prop_target = ll_prop + post.priors.log_sigma(prop)
    log_ratio = prop_target - cur_target + float(log_ndtr(state.sigma / sd)) - float(log_ndtr(prop / sd))
    if math.log(rng.random()) < log_ratio:
        return StepResult(float(prop), True, ll_prop)
    return StepResult(state.sigma, False, loglik)


def draw_delta(
    state: McmcState,
    post: Posterior,
    proposal_cov: np.ndarray,
    rng: np.random.Generator,
    loglik: float | None = None,
) -> StepResult:
    """Random-walk MH for the cut-point log-spacings; a no-op when J = 3."""
    if state.delta.size == 0:
        if loglik is None:
            loglik = post.loglik(state.beta, state.sigma, state.gamma, state.delta)
        return StepResult(state.delta, True, loglik)
    if loglik is None:
        loglik = post.loglik(state.beta, state.sigma, state.gamma, state.delta)
    chol = np.linalg.cholesky(np.atleast_2d(proposal_cov))
    prop = state.delta + chol @ rng.standard_normal(state.delta.size)
    ll_prop = post.loglik(state.beta, state.sigma, state.gamma, prop)
    log_ratio = ll_prop + post.priors.log_delta(prop) - loglik - post.priors.log_delta(state.delta)
    if math.log(rng.random()) < log_ratio:
        return StepResult(prop, True, ll_prop)
    return StepResult(state.delta, False, loglik)


# ---------------------------------------------------------------------------
# proposal covariances


def numerical_hessian(f, x, steps) -> np.ndarray:
    """Central finite-difference Hessian of a scalar function."""
    x = np.asarray(x, dtype=float)
    steps = np.broadcast_to(np.asarray(steps, dtype=float), x.shape)
    d = x.size
    H = np.empty((d, d))
    f0 = f(x)
    for i in range(d):
        ei = np.zeros(d)
        ei[i] = steps[i]
        H[i, i] = (f(x + ei) - 2.0 * f0 + f(x - ei)) / steps[i] ** 2
        for j in range(i):
            ej = np.zeros(d)
            ej[j] = steps[j]
            H[i, j] = H[j, i] = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (
                4.0 * steps[i] * steps[j]
            )
    return H


def _spd_floor(M: np.ndarray, floor: float = 1e-8) -> np.ndarray:
    M = 0.5 * (M + M.T)
    w, V = np.linalg.eigh(M)
    return (V * np.maximum(w, floor)) @ V.T


@dataclass
class ProposalCovariances:
    D1: np.ndarray  # (sigma, gamma) block, or 1x1 sigma block when gamma is not sampled
    D2: np.ndarray  # delta block (0x0 when J = 3)
    beta: np.ndarray
    optimum: np.ndarray
    converged: bool


def ols_beta(data: OrdinalDataset) -> np.ndarray:
    return np.linalg.lstsq(data.X, data.y.astype(float), rcond=None)[0]


def _ml_beta_al(data: OrdinalDataset, p0: float, c: float, beta_start: np.ndarray) -> np.ndarray:
    """beta maximising the AL (gamma = 0) likelihood jointly with sigma and delta."""
    k, m = data.k, data.J - 3
    post = Posterior(data, PriorConfig.default(k, data.J), p0, c)

    def nll(theta):
        beta, sigma, delta = theta[:k], math.exp(theta[k]), theta[k + 1 :]
        v = -post.loglik(beta, sigma, 0.0, delta)
        return v if math.isfinite(v) else 1e300

    x0 = np.concatenate([beta_start, [0.0], np.zeros(m)])
    res = optimize.minimize(nll, x0, method="L-BFGS-B")
    return res.x[:k] if np.all(np.isfinite(res.x)) else beta_start


def estimate_proposal_covariances(
    data: OrdinalDataset,
    p0: float,
    c: float,
    beta_init: np.ndarray | None = None,
    sample_gamma: bool = True,
) -> ProposalCovariances:
    """Negative inverse Hessians of the log-likelihood at its maximum over (sigma, gamma, delta).

    beta is held fixed (at ``beta_init`` or, by default, at the AL maximum
    likelihood estimate started from OLS).  D1 is the inverse of the
    (sigma, gamma) block and D2 of the delta block, each conditional on the
    other block, matching how the MH steps use them.  With
    ``sample_gamma=False`` gamma is fixed at 0 and D1 is 1x1.
    """
    if beta_init is None:
        beta_init = _ml_beta_al(data, p0, c, ols_beta(data))
    beta_init = np.asarray(beta_init, dtype=float)
    m = data.J - 3
    post = Posterior(data, PriorConfig.default(data.k, data.J), p0, c)
    L, U = post.bounds
    n1 = 2 if sample_gamma else 1
    margin = 1e-3 * (U - L)

    def unpack(theta):
        sigma = theta[0]
        gamma = theta[1] if sample_gamma else 0.0
        return sigma, gamma, theta[n1:]

    def loglik(theta):
        sigma, gamma, delta = unpack(theta)
        if sigma <= 0 or not (L < gamma < U):
            return -math.inf
        return post.loglik(beta_init, sigma, gamma, delta)

    def nll(theta):
        v = -loglik(theta)
        return v if math.isfinite(v) else 1e300

    x0 = np.concatenate([[1.0], [0.0] if sample_gamma else [], np.zeros(m)])
    bounds = [(1e-4, None)] + ([(L + margin, U - margin)] if sample_gamma else []) + [(None, None)] * m
    fallback = ProposalCovariances(0.1 * np.eye(n1), 0.1 * np.eye(m), beta_init, x0, False)
    try:
        res = optimize.minimize(nll, x0, method="L-BFGS-B", bounds=bounds, options={"maxfun": 20000})
    except (ValueError, FloatingPointError) as exc:
        warnings.warn(f"proposal optimisation failed ({exc}); using 0.1 I", RuntimeWarning, stacklevel=2)
        return fallback
    if not (res.success and np.all(np.isfinite(res.x))):
        warnings.warn(f"proposal optimisation did not converge ({res.message}); using 0.1 I", RuntimeWarning, stacklevel=2)
        return fallback
    theta = res.x
    steps = 1e-4 * np.maximum(1.0, np.abs(theta))
    # keep the stencil inside the admissible region
    steps[0] = min(steps[0], 0.5 * theta[0])
    if sample_gamma:
        steps[1] = min(steps[1], 0.5 * (theta[1] - L), 0.5 * (U - theta[1]))
    H = numerical_hessian(loglik, theta, steps)
    if not np.all(np.isfinite(H)):
        warnings.warn("non-finite Hessian; using 0.1 I", RuntimeWarning, stacklevel=2)
        return fallback
    out = []
    for block in (slice(0, n1), slice(n1, n1 + m)):
        Hb = H[block, block]
        if Hb.size == 0:
            out.append(np.zeros((0, 0)))
            continue
        try:
            out.append(_spd_floor(-np.linalg.inv(Hb)))
        except np.linalg.LinAlgError:
            warnings.warn("singular Hessian block; using 0.1 I", RuntimeWarning, stacklevel=2)
            out.append(0.1 * np.eye(Hb.shape[0]))
    return ProposalCovariances(out[0], out[1], beta_init, theta, True)


# ---------------------------------------------------------------------------
# chains


@dataclass
class ChainOutput:
    """Post-burn-in draws and diagnostics of one chain."""

    beta: np.ndarray
    sigma: np.ndarray
    gamma: np.ndarray
    delta: np.ndarray
    loglik: np.ndarray
    accept_sigma_gamma: float
    accept_delta: float
    seconds: float
    p0: float
    model: str
    c: float
    J: int
    names: list[str] = field(default_factory=list)
    inefficiency: dict[str, float] = field(default_factory=dict)

    @property
    def n_draws(self) -> int:
        return self.sigma.size

    def parameter_names(self) -> list[str]:
        k = self.beta.shape[1]
        m = self.delta.shape[1]
        return [f"beta_{j + 1}" for j in range(k)] + ["sigma", "gamma"] + [f"delta_{j + 1}" for j in range(m)]

    def matrix(self) -> np.ndarray:
        """Draws as an (N, k + 2 + J - 3) array in ``parameter_names`` order."""
        return np.column_stack([self.beta, self.sigma, self.gamma, self.delta])

    def posterior_mean(self) -> dict[str, float]:
        return dict(zip(self.parameter_names(), self.matrix().mean(axis=0)))

    def posterior_sd(self) -> dict[str, float]:
        return dict(zip(self.parameter_names(), self.matrix().std(axis=0, ddof=1)))

    def compute_inefficiency(self) -> dict[str, float]:
        out = {}
        for name, col in zip(self.parameter_names(), self.matrix().T):
            if name == "gamma" and self.model == "bqror":
                continue
            out[name] = inefficiency_factor(col) if col.size >= 100 else math.nan
        self.inefficiency = out
        return out


def inefficiency_factor(draws) -> float:
    """Batch-means inefficiency factor with batches of floor(sqrt(N)) draws."""
    x = np.asarray(draws, dtype=float).ravel()
    N = x.size
    if N < 100:
        raise ValueError("inefficiency factor needs at least 100 draws")
    var = x.var(ddof=1)
    if var == 0.0:
        warnings.warn("constant sequence; inefficiency factor is infinite", RuntimeWarning, stacklevel=2)
        return math.inf
    b = math.isqrt(N)
    nb = N // b
    means = x[: nb * b].reshape(nb, b).mean(axis=1)
    return float(b * means.var(ddof=1) / var)


def initial_state(post: Posterior, rng: np.random.Generator, beta: np.ndarray | None = None) -> McmcState:
    """beta from OLS, sigma = 1, gamma = 0, delta = 0, nu = 1, h = 0, z drawn given these."""
    data = post.data
    beta = ols_beta(data) if beta is None else np.asarray(beta, dtype=float).copy()
    state = McmcState(
        beta=beta,
        sigma=1.0,
        gamma=0.0,
        delta=np.zeros(data.J - 3),
        z=np.zeros(data.n),
        nu=np.ones(data.n),
        h=np.zeros(data.n),
    )
    if data.n:
        state.z = draw_z(state, post, rng)
    return state


def _check(state: McmcState, it: int, block: str) -> None:
    ok = (
        np.all(np.isfinite(state.beta))
        and math.isfinite(state.sigma)
        and math.isfinite(state.gamma)
        and np.all(np.isfinite(state.delta))
        and np.all(np.isfinite(state.z))
        and np.all(np.isfinite(state.nu))
        and np.all(np.isfinite(state.h))
    )
    if not ok:
        raise McmcError(f"non-finite state at iteration {it} after the {block} step")


def _run(
    data: OrdinalDataset,
    config: ModelConfig,
    rng: np.random.Generator | None,
    proposal: ProposalCovariances | None,
    sample_gamma: bool,
    draw_h_step: bool,
    model: str,
    init: McmcState | None = None,
) -> ChainOutput:
    tuning = config.tuning
    if rng is None:
        rng = make_rng(tuning.seed, "chain")
    post = Posterior(data, config.priors_for(data), config.p0, config.c)
    if proposal is None:
        proposal = estimate_proposal_covariances(data, config.p0, config.c, sample_gamma=sample_gamma)
    m = data.J - 3
    D1 = tuning.iota1**2 * np.atleast_2d(proposal.D1)
    if sample_gamma:
        if D1.shape != (2, 2):
            raise ValueError("sampling gamma needs a 2x2 (sigma, gamma) proposal covariance")
    else:
        if D1.shape == (2, 2):
            # sigma step conditional on gamma under the joint proposal
            D1 = np.array([[D1[0, 0] - D1[0, 1] ** 2 / D1[1, 1]]])
    D2 = tuning.iota2**2 * np.atleast_2d(proposal.D2) if m else np.zeros((0, 0))

    state = initial_state(post, rng) if init is None else init.copy()
    total = tuning.burnin + tuning.draws
    k = data.k
    beta_out = np.empty((tuning.draws, k))
    sigma_out = np.empty(tuning.draws)
    gamma_out = np.empty(tuning.draws)
    delta_out = np.empty((tuning.draws, m))
    ll_out = np.full(tuning.draws, np.nan)
    acc1 = acc2 = 0
    joint = config.latent_update == "joint"
    start = time.perf_counter()
    for it in range(total):
        state.beta = draw_beta(state, post, rng)
        _check(state, it, "beta")
        if sample_gamma:
            res = draw_sigma_gamma(state, post, D1, rng)
            state.sigma, state.gamma = res.value
        else:
            res = draw_sigma(state, post, float(D1[0, 0]), rng)
            state.sigma = res.value
        _check(state, it, "sigma")
        ll = res.loglik
        ok1 = res.accepted
        if not joint:
            state.nu = draw_nu(state, post, rng)
            _check(state, it, "nu")
            if draw_h_step:
                state.h = draw_h(state, post, rng)
                _check(state, it, "h")
        res = draw_delta(state, post, D2, rng, loglik=ll)
        state.delta = res.value
        ll = res.loglik
        ok2 = res.accepted
        _check(state, it, "delta")
        if joint:
            state.nu, h, state.z = draw_latents_joint(state, post, rng)
            state.h = h if draw_h_step else np.zeros_like(h)
        else:
            state.z = draw_z(state, post, rng)
        _check(state, it, "latent")
        if it >= tuning.burnin:
            i = it - tuning.burnin
            acc1 += ok1
            acc2 += ok2
            beta_out[i] = state.beta
            sigma_out[i] = state.sigma
            gamma_out[i] = state.gamma
            delta_out[i] = state.delta
            if config.record_loglik:
                ll_out[i] = ll
    seconds = time.perf_counter() - start
    out = ChainOutput(
        beta=beta_out,
        sigma=sigma_out,
        gamma=gamma_out,
        delta=delta_out,
        loglik=ll_out,
        accept_sigma_gamma=acc1 / tuning.draws,
        accept_delta=(acc2 / tuning.draws) if m else math.nan,
        seconds=seconds,
        p0=config.p0,
        model=model,
        c=config.c,
        J=data.J,
        names=list(data.names),
    )
    if tuning.draws >= 100:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            out.compute_inefficiency()
    log.info("%s chain p0=%.2f: %d iterations in %.1fs", model, config.p0, total, seconds)
    return out


def run_chain(
    data: OrdinalDataset,
    config: ModelConfig,
    rng: np.random.Generator | None = None,
    proposal: ProposalCovariances | None = None,
) -> ChainOutput:
    """FBQROR chain: beta; (sigma, gamma); nu, h; delta; z.

    With ``config.lock_gamma`` gamma stays at 0 and sigma is updated alone.
    ``config.model == "bqror"`` hands over to :func:`run_bqror`.
    """
    if config.model == "bqror":
        return run_bqror(data, config, rng, proposal)
    sample_gamma = not config.lock_gamma
    return _run(data, config, rng, proposal, sample_gamma=sample_gamma, draw_h_step=True, model="fbqror")


def run_bqror(
    data: OrdinalDataset,
    config: ModelConfig,
    rng: np.random.Generator | None = None,
    proposal: ProposalCovariances | None = None,
) -> ChainOutput:
    """AL-error chain: beta; sigma (MH); nu; delta; z.  gamma is identically 0."""
    if proposal is None:
        proposal = estimate_proposal_covariances(data, config.p0, config.c, sample_gamma=False)
    return _run(data, config, rng, proposal, sample_gamma=False, draw_h_step=False, model="bqror")
