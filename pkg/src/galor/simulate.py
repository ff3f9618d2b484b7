"""Seeded generators for the two ordinal simulation designs."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .model import OrdinalDataset
from .random_kit import make_rng

__all__ = ["StudyDesign", "STUDY1", "STUDY2", "discretize", "generate", "generate_study1", "generate_study2"]


@dataclass(frozen=True)
class StudyDesign:
    """z = X beta + eps with U[0,1] covariates; y from fixed cut-points.

    With ``intercept`` the first column of X is 1 and the remaining
    len(beta) - 1 columns are uniform; otherwise every column is uniform.
    """

    name: str
    beta: tuple[float, ...]
    cutpoints: tuple[float, ...]
    error: str  # "logistic" or "chisq4"
    c: float
    intercept: bool = True

    def draw_errors(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.error == "logistic":
            # location 0, unit scale: variance pi^2 / 3
            return rng.logistic(0.0, 1.0, n)
        if self.error == "chisq4":
            return rng.chisquare(4.0, n) - 4.0
        raise ValueError(f"unknown error law {self.error!r}")


STUDY1 = StudyDesign("study1", beta=(2.0, -3.0, 4.0), cutpoints=(0.0, 2.0, 4.0), error="logistic", c=2.0)
STUDY2 = StudyDesign("study2", beta=(3.0, -7.0, 5.0), cutpoints=(0.0, 3.0, 6.0), error="chisq4", c=3.0)


def discretize(z, xi) -> np.ndarray:
    """y_i = j iff xi_{j-1} < z_i <= xi_j, for xi = (-inf, ..., +inf)."""
    xi = np.asarray(xi, dtype=float)
    if not np.all(np.diff(xi) > 0):
        raise ValueError("cut-points must be strictly increasing")
    # searchsorted with side='left' puts z == xi_j in category j
    return np.searchsorted(xi[1:-1], np.asarray(z, dtype=float), side="left") + 1


def generate(design: StudyDesign, n: int, rng: np.random.Generator, max_attempts: int = 100):
    """Draw one dataset; returns (OrdinalDataset, latent z).

    A draw with an empty category is discarded and redrawn with a warning.
    """
    if n < 50:
        raise ValueError("simulation designs need n >= 50")
    k = len(design.beta)
    xi = np.concatenate([[-np.inf], design.cutpoints, [np.inf]])
    J = len(design.cutpoints) + 1
    for attempt in range(max_attempts):
        if design.intercept:
            X = np.column_stack([np.ones(n), rng.uniform(size=(n, k - 1))])
        else:
            X = rng.uniform(size=(n, k))
        z = X @ np.asarray(design.beta) + design.draw_errors(n, rng)
        y = discretize(z, xi)
        counts = np.bincount(y, minlength=J + 1)[1:]
        if np.all(counts > 0):
            names = ["intercept"] + [f"x{j}" for j in range(1, k)] if design.intercept else [f"x{j + 1}" for j in range(k)]
            return OrdinalDataset(X, y, J, names), z
        warnings.warn(f"{design.name}: empty category in attempt {attempt + 1}; redrawing", RuntimeWarning, stacklevel=2)
    raise RuntimeError(f"{design.name}: could not fill every category in {max_attempts} attempts")


def generate_study1(n: int = 300, rng: np.random.Generator | int = 0):
    """Logistic errors, beta = (2, -3, 4), cut-points (0, 2, 4)."""
    return generate(STUDY1, n, _as_rng(rng))


def generate_study2(n: int = 300, rng: np.random.Generator | int = 0):
    """Demeaned chi-square(4) errors, beta = (3, -7, 5), cut-points (0, 3, 6)."""
    return generate(STUDY2, n, _as_rng(rng))


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return make_rng(int(rng), "data")
