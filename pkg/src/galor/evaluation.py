"""Post-chain summaries: plug-in log-likelihood, AIC/BIC, comparison tables, covariate effects."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import gal
from .mcmc import ChainOutput
from .model import CutpointSpec, OrdinalDataset, category_probabilities, log_likelihood

__all__ = [
    "FitSummary",
    "CovariateEffect",
    "ComparisonReport",
    "aic",
    "bic",
    "count_parameters",
    "fit_summary",
    "compare_models",
    "covariate_effect",
]


def aic(loglik: float, k: int) -> float:
    return -2.0 * loglik + 2.0 * k


def bic(loglik: float, k: int, n: int) -> float:
    return -2.0 * loglik + k * math.log(n)


def count_parameters(model: str, k: int, J: int) -> int:
    """beta, sigma, free log-spacings and, for the GAL model, gamma."""
    return k + (2 if model == "fbqror" else 1) + (J - 3)


@dataclass
class FitSummary:
    model: str
    p0: float
    n: int
    k_params: int
    loglik: float
    mean: dict[str, float]
    sd: dict[str, float]
    skewness: float = math.nan
    accept_sigma_gamma: float = math.nan
    accept_delta: float = math.nan
    inefficiency: dict[str, float] = field(default_factory=dict)

    @property
    def aic(self) -> float:
        return aic(self.loglik, self.k_params)

    @property
    def bic(self) -> float:
        return bic(self.loglik, self.k_params, self.n)

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "p0": self.p0,
            "n": self.n,
            "k_params": self.k_params,
            "loglik": self.loglik,
            "aic": self.aic,
            "bic": self.bic,
            "skewness": self.skewness,
            "accept_sigma_gamma": self.accept_sigma_gamma,
            "accept_delta": self.accept_delta,
            "mean": self.mean,
            "sd": self.sd,
            "inefficiency": self.inefficiency,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FitSummary":
        keep = {k: d[k] for k in ("model", "p0", "n", "k_params", "loglik", "mean", "sd")}
        extra = {k: d[k] for k in ("skewness", "accept_sigma_gamma", "accept_delta", "inefficiency") if k in d}
        return cls(**keep, **extra)


def fit_summary(chain: ChainOutput, data: OrdinalDataset) -> FitSummary:
    """Posterior means and SDs plus the log-likelihood evaluated at the posterior means."""
    if chain.n_draws == 0:
        raise ValueError("empty chain")
    mean = chain.posterior_mean()
    sd = chain.posterior_sd() if chain.n_draws > 1 else {k: math.nan for k in mean}
    beta = chain.beta.mean(axis=0)
    sigma = float(chain.sigma.mean())
    gamma = float(chain.gamma.mean()) if chain.model == "fbqror" else 0.0
    delta = chain.delta.mean(axis=0)
    ll = log_likelihood(beta, sigma, gamma, CutpointSpec(chain.c, delta), data, chain.p0)
    return FitSummary(
        model=chain.model,
        p0=chain.p0,
        n=data.n,
        k_params=count_parameters(chain.model, data.k, data.J),
        loglik=ll,
        mean=mean,
        sd=sd,
        skewness=gal.quantile_skewness(chain.p0, gamma),
        accept_sigma_gamma=chain.accept_sigma_gamma,
        accept_delta=chain.accept_delta,
        inefficiency=dict(chain.inefficiency),
    )


@dataclass
class ComparisonReport:
    summaries: list[FitSummary]
    preferred_aic: FitSummary | None
    preferred_bic: FitSummary | None

    def rows(self) -> list[dict]:
        out = []
        for s in self.summaries:
            out.append(
                {
                    "model": s.model,
                    "p0": s.p0,
                    "loglik": s.loglik,
                    "aic": s.aic,
                    "bic": s.bic,
                    "k_params": s.k_params,
                    "preferred_aic": s is self.preferred_aic,
                    "preferred_bic": s is self.preferred_bic,
                }
            )
        return out

    def text(self) -> str:
        lines = [f"{'model':<8} {'p0':>5} {'lnL':>10} {'AIC':>10} {'BIC':>10} {'k':>3}  best"]
        for s in sorted(self.summaries, key=lambda s: s.aic):
            tags = [t for t, hit in (("AIC", s is self.preferred_aic), ("BIC", s is self.preferred_bic)) if hit]
            lines.append(
                f"{s.model:<8} {s.p0:>5.2f} {s.loglik:>10.2f} {s.aic:>10.2f} {s.bic:>10.2f} {s.k_params:>3}  {','.join(tags)}"
            )
        if self.preferred_aic is None:
            lines.append("AIC: tie, no preference")
        if self.preferred_bic is None:
            lines.append("BIC: tie, no preference")
        return "\n".join(lines)

    def csv(self) -> str:
        buf = io.StringIO()
        rows = self.rows()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]))
        writer.writeheader()
        for r in rows:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
        return buf.getvalue()


def _best(summaries, key, tol):
    values = [key(s) for s in summaries]
    lo = min(values)
    winners = [s for s, v in zip(summaries, values) if v - lo <= tol]
    return winners[0] if len(winners) == 1 else None


def compare_models(summaries: list[FitSummary], tol: float = 1e-9) -> ComparisonReport:
    """Rank fits on the same data and quantile; lower AIC/BIC is better, ties give no preference."""
    if len(summaries) < 2:
        raise ValueError("need at least two fits to compare")
    if len({s.n for s in summaries}) != 1:
        raise ValueError("fits were computed on different sample sizes")
    if len({round(s.p0, 12) for s in summaries}) != 1:
        raise ValueError("fits were computed at different quantiles")
    return ComparisonReport(
        list(summaries),
        _best(summaries, lambda s: s.aic, tol),
        _best(summaries, lambda s: s.bic, tol),
    )


@dataclass
class CovariateEffect:
    covariate: str
    values: tuple[float, float]
    delta_p: np.ndarray

    def text(self) -> str:
        cells = " ".join(f"{v:+.4f}" for v in self.delta_p)
        return f"{self.covariate} {self.values[0]:g} -> {self.values[1]:g}: {cells}"


def covariate_effect(
    chain: ChainOutput,
    data: OrdinalDataset,
    covariate: str,
    values: tuple[float, float] = (0.0, 1.0),
    overrides: dict[str, float] | None = None,
) -> CovariateEffect:
    """Average change in category probabilities when ``covariate`` moves from values[0] to values[1].

    The average runs over all post-burn-in draws and all rows of X; ``overrides``
    pins other covariates to fixed values first.
    """
    if covariate not in data.names:
        raise ValueError(f"unknown covariate {covariate!r}; available: {data.names}")
    X = data.X.copy()
    for name, v in (overrides or {}).items():
        if name not in data.names:
            raise ValueError(f"unknown covariate {name!r} in overrides")
        X[:, data.names.index(name)] = v
    j = data.names.index(covariate)
    X0, X1 = X.copy(), X.copy()
    X0[:, j] = values[0]
    X1[:, j] = values[1]
    total = np.zeros(data.J)
    gammas = chain.gamma if chain.model == "fbqror" else np.zeros(chain.n_draws)
    for d in range(chain.n_draws):
        spec = CutpointSpec(chain.c, chain.delta[d])
        args = (chain.beta[d], float(chain.sigma[d]), float(gammas[d]), spec, chain.p0)
        P1 = category_probabilities(X1, *args)
        P0 = category_probabilities(X0, *args)
        total += (P1 - P0).mean(axis=0)
    return CovariateEffect(covariate, (float(values[0]), float(values[1])), total / chain.n_draws)
