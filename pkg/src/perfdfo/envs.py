"""Decision-controlled Markov-chain benchmark environments.

Each environment couples a one-step Markov kernel (controlled by the deployed
decision vector) with a loss oracle, and, where closed forms exist, exact
risk / risk-gradient / stationary-sampling oracles used only for metrics and
diagnostics. Environments are immutable after construction; the chain state
is owned by the caller.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, OracleUnavailableError

__all__ = [
    "Environment",
    "ArScalarQuartic",
    "ArPricing",
    "ArRegression",
    "make_environment",
    "ENVIRONMENT_TAGS",
]


class Environment(abc.ABC):
    """Markov kernel + loss oracle, with optional exact oracles for metrics."""

    dim: int
    sample_dim: int

    has_loss_grad = False
    has_stationary = False
    has_exact_risk = False
    has_exact_risk_grad = False

    @abc.abstractmethod
    def kernel_step(self, z: np.ndarray, theta: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """One transition of the kernel at the deployed model theta."""

    @abc.abstractmethod
    def loss(self, theta: np.ndarray, z: np.ndarray) -> float:
        """Pointwise loss of decision theta on sample z."""

    def loss_grad_theta(self, theta: np.ndarray, z: np.ndarray) -> np.ndarray:
        raise OracleUnavailableError(f"{type(self).__name__} has no loss gradient oracle")

    def stationary_sample(self, theta: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        raise OracleUnavailableError(f"{type(self).__name__} has no stationary sampler")

    def exact_risk(self, theta: np.ndarray) -> float:
        raise OracleUnavailableError(f"{type(self).__name__} has no exact risk oracle")

    def exact_risk_grad(self, theta: np.ndarray) -> np.ndarray:
        raise OracleUnavailableError(f"{type(self).__name__} has no exact risk gradient")

    def initial_sample(self, theta: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Initial chain state: stationary at the initial model when available."""
        if self.has_stationary:
            return self.stationary_sample(theta, rng)
        return np.zeros(self.sample_dim)

    @property
    def mixing_rho(self) -> float:
        """Geometric mixing-rate estimate used by the default epoch length."""
        return 0.0

    # Batch counterparts used by metric evaluation and Monte-Carlo
    # diagnostics. The generic fallbacks loop; AR subclasses vectorize.

    def loss_batch(self, thetas: np.ndarray, zs: np.ndarray) -> np.ndarray:
        return np.array([self.loss(t, z) for t, z in zip(thetas, zs)])

    def exact_risk_batch(self, thetas: np.ndarray) -> np.ndarray:
        return np.array([self.exact_risk(t) for t in thetas])

    def exact_risk_grad_batch(self, thetas: np.ndarray) -> np.ndarray:
        return np.stack([self.exact_risk_grad(t) for t in thetas])

    def stationary_sample_batch(self, thetas: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return np.stack([self.stationary_sample(t, rng) for t in thetas])

    def _check_dims(self, z: np.ndarray, theta: np.ndarray) -> None:
        if z.shape != (self.sample_dim,):
            raise ValueError(f"sample state has shape {z.shape}, expected ({self.sample_dim},)")
        if theta.shape != (self.dim,):
            raise ValueError(f"decision vector has shape {theta.shape}, expected ({self.dim},)")


def _validate_gamma_sigma(gamma: float, sigma: float) -> None:
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must be in (0, 1), got {gamma}")
    if sigma <= 0.0:
        raise ValueError(f"sigma must be > 0, got {sigma}")


@dataclass(frozen=True, eq=False)
class ArScalarQuartic(Environment):
    """Scalar polynomial loss with an AR(1) sample process.

    The kernel is z' = (1-gamma) z + gamma zbar with zbar ~ N(theta,
    ((2-gamma)/gamma) sigma^2), whose stationary law at a fixed theta is
    N(theta, sigma^2). The induced risk is the quartic
    theta^2 (3 theta^2 - 8 theta - 48) / 12 with stationary set {-2, 0, 4}.
    """

    gamma: float = 0.5
    sigma: float = 1.0

    dim = 1
    sample_dim = 1
    has_loss_grad = True
    has_stationary = True
    has_exact_risk = True
    has_exact_risk_grad = True

    def __post_init__(self) -> None:
        _validate_gamma_sigma(self.gamma, self.sigma)
        object.__setattr__(
            self, "_innovation_sd", self.sigma * float(np.sqrt((2.0 - self.gamma) / self.gamma))
        )

    @property
    def mixing_rho(self) -> float:
        return 1.0 - self.gamma

    def kernel_step(self, z, theta, rng):
        self._check_dims(z, theta)
        zbar = theta[0] + self._innovation_sd * rng.standard_normal()
        return np.array([(1.0 - self.gamma) * z[0] + self.gamma * zbar])

    def loss(self, theta, z):
        t = theta[0]
        return z[0] * t * (3.0 * t * t - 8.0 * t - 48.0) / 12.0

    def loss_grad_theta(self, theta, z):
        t = theta[0]
        return np.array([z[0] * (9.0 * t * t - 16.0 * t - 48.0) / 12.0])

    def stationary_sample(self, theta, rng):
        return np.array([theta[0] + self.sigma * rng.standard_normal()])

    def exact_risk(self, theta):
        t = theta[0]
        return t * t * (3.0 * t * t - 8.0 * t - 48.0) / 12.0

    def exact_risk_grad(self, theta):
        t = theta[0]
        return np.array([t * t * t - 2.0 * t * t - 8.0 * t])

    def optimal_decision(self) -> np.ndarray:
        # stationary set is {-2, 0, 4}; the global minimizer is 4
        return np.array([4.0])

    def loss_batch(self, thetas, zs):
        t = thetas[:, 0]
        return zs[:, 0] * t * (3.0 * t * t - 8.0 * t - 48.0) / 12.0

    def exact_risk_batch(self, thetas):
        t = np.asarray(thetas)[:, 0]
        return t * t * (3.0 * t * t - 8.0 * t - 48.0) / 12.0

    def exact_risk_grad_batch(self, thetas):
        t = np.asarray(thetas)[:, 0]
        return (t * t * t - 2.0 * t * t - 8.0 * t)[:, None]

    def stationary_sample_batch(self, thetas, rng):
        n = thetas.shape[0]
        return thetas[:, :1] + self.sigma * rng.standard_normal((n, 1))


@dataclass(frozen=True, eq=False)
class ArPricing(Environment):
    """Multi-good pricing with linearly drifting demand.

    Loss is the negative revenue -<theta, z>; the AR(1) kernel has stationary
    law N(mu0 - kappa theta, sigma^2 I), so the risk kappa ||theta||^2 -
    <theta, mu0> is quadratic with optimum mu0 / (2 kappa).
    """

    gamma: float = 0.1
    sigma: float = 1.0
    kappa: float = 0.5
    mu0: np.ndarray = field(default_factory=lambda: np.array([5.0, -5.0, -5.0, 5.0, -5.0]))

    has_loss_grad = True
    has_stationary = True
    has_exact_risk = True
    has_exact_risk_grad = True

    def __post_init__(self) -> None:
        _validate_gamma_sigma(self.gamma, self.sigma)
        if self.kappa <= 0.0:
            raise ValueError(f"kappa must be > 0, got {self.kappa}")
        mu0 = np.asarray(self.mu0, dtype=float)
        if mu0.ndim != 1 or mu0.size < 1:
            raise ValueError("mu0 must be a non-empty vector")
        object.__setattr__(self, "mu0", mu0)
        object.__setattr__(self, "dim", mu0.size)
        object.__setattr__(self, "sample_dim", mu0.size)
        object.__setattr__(
            self, "_innovation_sd", self.sigma * float(np.sqrt((2.0 - self.gamma) / self.gamma))
        )

    @property
    def mixing_rho(self) -> float:
        return 1.0 - self.gamma

    def kernel_step(self, z, theta, rng):
        self._check_dims(z, theta)
        zbar = self.mu0 - self.kappa * theta + self._innovation_sd * rng.standard_normal(self.dim)
        return (1.0 - self.gamma) * z + self.gamma * zbar

    def loss(self, theta, z):
        return -float(theta @ z)

    def loss_grad_theta(self, theta, z):
        return -z

    def stationary_sample(self, theta, rng):
        return self.mu0 - self.kappa * theta + self.sigma * rng.standard_normal(self.dim)

    def exact_risk(self, theta):
        return self.kappa * float(theta @ theta) - float(theta @ self.mu0)

    def exact_risk_grad(self, theta):
        return 2.0 * self.kappa * theta - self.mu0

    def optimal_decision(self) -> np.ndarray:
        return self.mu0 / (2.0 * self.kappa)

    def loss_batch(self, thetas, zs):
        return -np.einsum("ij,ij->i", thetas, zs)

    def exact_risk_batch(self, thetas):
        thetas = np.asarray(thetas)
        return self.kappa * np.einsum("ij,ij->i", thetas, thetas) - thetas @ self.mu0

    def exact_risk_grad_batch(self, thetas):
        return 2.0 * self.kappa * np.asarray(thetas) - self.mu0

    def stationary_sample_batch(self, thetas, rng):
        n = thetas.shape[0]
        means = self.mu0 - self.kappa * thetas
        return means + self.sigma * rng.standard_normal((n, self.dim))


@dataclass(frozen=True, eq=False)
class ArRegression(Environment):
    """Linear regression whose targets shift with the deployed model.

    Sample state is the pair z = (x, y). At a fixed deployed theta the
    stationary law draws X ~ N(0, sigma1^2 I) and Y | X ~ N(<x + kappa theta,
    theta_star>, sigma2^2); the AR(1) pair process below has exactly that law
    as its stationary distribution. The risk sigma1^2 ||theta - theta_star||^2
    + kappa^2 <theta, theta_star>^2 + sigma2^2 is quadratic.
    """

    gamma: float = 0.25
    sigma1: float = 1.0
    sigma2: float = 1.0
    theta_star: np.ndarray = field(default_factory=lambda: np.array([5.0, -5.0, 5.0, -5.0, 5.0]))
    kappa: float | None = None  # default 1 / ||theta_star||

    has_loss_grad = True
    has_stationary = True
    has_exact_risk = True
    has_exact_risk_grad = True

    def __post_init__(self) -> None:
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must be in (0, 1), got {self.gamma}")
        if self.sigma1 <= 0.0 or self.sigma2 <= 0.0:
            raise ValueError("sigma1 and sigma2 must be > 0")
        ts = np.asarray(self.theta_star, dtype=float)
        if ts.ndim != 1 or ts.size < 1:
            raise ValueError("theta_star must be a non-empty vector")
        object.__setattr__(self, "theta_star", ts)
        kappa = self.kappa if self.kappa is not None else 1.0 / float(np.linalg.norm(ts))
        if kappa <= 0.0:
            raise ValueError(f"kappa must be > 0, got {kappa}")
        object.__setattr__(self, "kappa", float(kappa))
        object.__setattr__(self, "dim", ts.size)
        object.__setattr__(self, "sample_dim", ts.size + 1)
        scale = float(np.sqrt((2.0 - self.gamma) / self.gamma))
        object.__setattr__(self, "_x_innov_sd", scale * self.sigma1)
        object.__setattr__(self, "_y_innov_sd", scale * self.sigma2)

    @property
    def mixing_rho(self) -> float:
        return 1.0 - self.gamma

    def _innovation(self, theta: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        out = np.empty(self.sample_dim)
        x = self._x_innov_sd * rng.standard_normal(self.dim)
        out[: self.dim] = x
        out[self.dim] = (
            float((x + self.kappa * theta) @ self.theta_star)
            + self._y_innov_sd * rng.standard_normal()
        )
        return out

    def kernel_step(self, z, theta, rng):
        self._check_dims(z, theta)
        return (1.0 - self.gamma) * z + self.gamma * self._innovation(theta, rng)

    def loss(self, theta, z):
        r = float(z[: self.dim] @ theta) - z[self.dim]
        return r * r

    def loss_grad_theta(self, theta, z):
        x = z[: self.dim]
        return 2.0 * (float(x @ theta) - z[self.dim]) * x

    def stationary_sample(self, theta, rng):
        x = self.sigma1 * rng.standard_normal(self.dim)
        y = float((x + self.kappa * theta) @ self.theta_star)
        y += self.sigma2 * rng.standard_normal()
        return np.concatenate([x, [y]])

    def exact_risk(self, theta):
        diff = theta - self.theta_star
        cross = float(theta @ self.theta_star)
        return (
            self.sigma1**2 * float(diff @ diff)
            + self.kappa**2 * cross * cross
            + self.sigma2**2
        )

    def exact_risk_grad(self, theta):
        cross = float(theta @ self.theta_star)
        return 2.0 * self.sigma1**2 * (theta - self.theta_star) + (
            2.0 * self.kappa**2 * cross
        ) * self.theta_star

    def optimal_decision(self) -> np.ndarray:
        """Minimizer of the quadratic risk, a scalar multiple of theta_star."""
        s1sq = self.sigma1**2
        shrink = s1sq / (s1sq + self.kappa**2 * float(self.theta_star @ self.theta_star))
        return shrink * self.theta_star

    def loss_batch(self, thetas, zs):
        r = np.einsum("ij,ij->i", zs[:, : self.dim], thetas) - zs[:, self.dim]
        return r * r

    def exact_risk_batch(self, thetas):
        thetas = np.asarray(thetas)
        diff = thetas - self.theta_star
        cross = thetas @ self.theta_star
        return (
            self.sigma1**2 * np.einsum("ij,ij->i", diff, diff)
            + self.kappa**2 * cross * cross
            + self.sigma2**2
        )

    def exact_risk_grad_batch(self, thetas):
        thetas = np.asarray(thetas)
        cross = thetas @ self.theta_star
        return 2.0 * self.sigma1**2 * (thetas - self.theta_star) + (
            2.0 * self.kappa**2
        ) * np.outer(cross, self.theta_star)

    def stationary_sample_batch(self, thetas, rng):
        n = thetas.shape[0]
        x = self.sigma1 * rng.standard_normal((n, self.dim))
        y = (x + self.kappa * thetas) @ self.theta_star
        y = y + self.sigma2 * rng.standard_normal(n)
        return np.concatenate([x, y[:, None]], axis=1)


ENVIRONMENT_TAGS = {
    "quartic": ArScalarQuartic,
    "pricing": ArPricing,
    "regression": ArRegression,
}

_ARRAY_PARAMS = {"mu0", "theta_star"}


def make_environment(tag: str, params: dict | None = None) -> Environment:
    """Build an environment from its config tag and parameter dict."""
    if tag not in ENVIRONMENT_TAGS:
        known = ", ".join(sorted(ENVIRONMENT_TAGS))
        raise ConfigError(f"unknown environment tag {tag!r} (known: {known})")
    kwargs = dict(params or {})
    for key in list(kwargs):
        if key in _ARRAY_PARAMS:
            kwargs[key] = np.asarray(kwargs[key], dtype=float)
    try:
        return ENVIRONMENT_TAGS[tag](**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad parameters for environment {tag!r}: {exc}") from exc
