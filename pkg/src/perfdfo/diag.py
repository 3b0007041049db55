"""Independent oracles and statistical diagnostics for the gradient estimators.

These routines sample directly from stationary laws (bypassing the Markov
kernel) to measure estimator moments, check the smoothed-risk identities, and
fit empirical convergence rates. Tolerances downstream are standard-error
based: 3 SE for equality-type checks and 5 SE for bias detection.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import sample_unit_sphere_batch
from .envs import Environment
from .errors import OracleUnavailableError

__all__ = [
    "MomentReport",
    "ESTIMATOR_TAGS",
    "estimator_moments",
    "finite_diff_grad",
    "slope_fit",
    "smoothed_risk",
]

ESTIMATOR_TAGS = ("one_point", "two_point_I", "two_point_II")


@dataclass(frozen=True)
class MomentReport:
    """Monte-Carlo mean, standard errors and covariance trace of an estimator."""

    mean_vector: np.ndarray
    se_vector: np.ndarray
    cov_trace: float
    sample_count: int


def smoothed_risk(
    env: Environment,
    theta: np.ndarray,
    delta: float,
    n: int,
    rng: np.random.Generator,
) -> float:
    """Monte-Carlo ball average of the exact risk at radius delta.

    Ball points are sphere directions scaled by U^(1/d), which is exact for
    the uniform law on the ball.
    """
    if not env.has_exact_risk:
        raise OracleUnavailableError(f"{type(env).__name__} has no exact risk oracle")
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    if delta <= 0.0:
        raise ValueError(f"radius must be > 0, got {delta}")
    theta = np.asarray(theta, dtype=float)
    w = _ball_points(n, env.dim, rng)
    return float(np.mean(env.exact_risk_batch(theta + delta * w)))


def _ball_points(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    u = sample_unit_sphere_batch(n, d, rng)
    radii = rng.random(n) ** (1.0 / d)
    return radii[:, None] * u


def estimator_moments(
    env: Environment,
    theta: np.ndarray,
    delta: float,
    n: int,
    estimator_tag: str,
    rng: np.random.Generator,
) -> MomentReport:
    """Moments of a zeroth-order estimator under exact stationary sampling.

    Draws n independent (direction, stationary sample) pairs with the
    perturbed model deployed (plus an independent unperturbed-model sample
    for the decoupled two-point variant) and reports componentwise mean and
    standard error along with the empirical covariance trace.
    """
    if estimator_tag not in ESTIMATOR_TAGS:
        known = ", ".join(ESTIMATOR_TAGS)
        raise ValueError(f"unknown estimator tag {estimator_tag!r} (known: {known})")
    if not env.has_stationary:
        raise OracleUnavailableError(f"{type(env).__name__} has no stationary sampler")
    if n < 2:
        raise ValueError(f"sample count must be >= 2, got {n}")
    if delta <= 0.0:
        raise ValueError(f"radius must be > 0, got {delta}")
    theta = np.asarray(theta, dtype=float)
    d = env.dim

    u = sample_unit_sphere_batch(n, d, rng)
    perturbed = theta + delta * u
    z_perturbed = env.stationary_sample_batch(perturbed, rng)
    values = env.loss_batch(perturbed, z_perturbed)
    if estimator_tag == "two_point_I":
        base = np.broadcast_to(theta, (n, d))
        values = values - env.loss_batch(base, z_perturbed)
    elif estimator_tag == "two_point_II":
        base = np.broadcast_to(theta, (n, d))
        z_base = env.stationary_sample_batch(base, rng)
        values = values - env.loss_batch(base, z_base)
    g = (d / delta) * values[:, None] * u

    mean = g.mean(axis=0)
    var = g.var(axis=0, ddof=1)
    return MomentReport(
        mean_vector=mean,
        se_vector=np.sqrt(var / n),
        cov_trace=float(var.sum()),
        sample_count=n,
    )


def finite_diff_grad(
    f: Callable[[np.ndarray], float],
    theta: np.ndarray,
    h: float,
) -> np.ndarray:
    """Central-difference gradient of a scalar function, componentwise."""
    if h <= 0.0:
        raise ValueError(f"step must be > 0, got {h}")
    theta = np.asarray(theta, dtype=float)
    grad = np.empty_like(theta)
    for i in range(theta.size):
        bump = np.zeros_like(theta)
        bump[i] = h
        grad[i] = (f(theta + bump) - f(theta - bump)) / (2.0 * h)
    return grad


def slope_fit(xs: np.ndarray, ys: np.ndarray) -> float:
    """Log-log OLS slope over the trailing half of the points.

    The leading half is dropped as transient; inputs must be positive and
    provide at least 8 points.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError("xs and ys must be 1-d arrays of equal length")
    if xs.size < 8:
        raise ValueError(f"need at least 8 points, got {xs.size}")
    if np.any(xs <= 0.0) or np.any(ys <= 0.0):
        raise ValueError("slope_fit needs strictly positive xs and ys")
    half = xs.size // 2
    lx = np.log(xs[half:])
    ly = np.log(ys[half:])
    slope, _ = np.polyfit(lx, ly, 1)
    return float(slope)
