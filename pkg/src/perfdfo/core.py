"""Numeric primitives shared by all optimizers.

Sphere sampling, the one-point gradient estimator, power-law step-size /
query-radius / epoch-length schedules, and the geometric forgetting weights
used inside an epoch. Everything here is pure given the inputs; randomness
always flows through an explicitly passed ``numpy.random.Generator``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Schedule",
    "default_tau0",
    "forgetting_weight",
    "make_rng",
    "one_point_gradient",
    "sample_unit_sphere",
    "schedule_at",
    "smooth_schedule",
    "nonsmooth_schedule",
]

# Guards ceil() against products like (2/ln 2) * ln 8 = 6 + 1 ulp landing on 7.
_CEIL_EPS = 1e-9


def make_rng(seed: int) -> np.random.Generator:
    """Return a deterministic generator; identical seed, identical stream."""
    return np.random.Generator(np.random.PCG64(seed))


def default_tau0(rho: float, lam: float) -> float:
    """Epoch-length constant 2 / ln(1 / max(rho, lam)); 0 when both are 0."""
    r = max(rho, lam)
    if r <= 0.0:
        return 0.0
    return 2.0 / math.log(1.0 / r)


@dataclass(frozen=True)
class Schedule:
    """Power-law laws for step size eta_k, query radius delta_k and epoch length tau_k.

    eta_k = eta0 / (1+k)^alpha, delta_k = delta0 / (1+k)^beta and
    tau_k = max(1, ceil(tau0 * ln(1+k))). ``tau0=None`` derives the default
    epoch-length constant from max(rho, lam); pass a number to override it.
    ``lam`` is the forgetting factor, ``rho`` the environment's mixing-rate
    estimate (both only shape tau_k; lam additionally weights inner updates).
    """

    alpha: float
    beta: float
    eta0: float
    delta0: float
    lam: float = 0.0
    rho: float = 0.0
    tau0: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if not 0.0 <= self.beta < 0.5:
            raise ValueError(f"beta must be in [0, 1/2), got {self.beta}")
        if self.eta0 <= 0.0:
            raise ValueError(f"eta0 must be > 0, got {self.eta0}")
        if self.delta0 <= 0.0:
            raise ValueError(f"delta0 must be > 0, got {self.delta0}")
        if not 0.0 <= self.lam < 1.0:
            raise ValueError(f"lam must be in [0, 1), got {self.lam}")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError(f"rho must be in [0, 1), got {self.rho}")
        if self.tau0 is not None and self.tau0 < 0.0:
            raise ValueError(f"tau0 must be >= 0, got {self.tau0}")
        derived = self.tau0 if self.tau0 is not None else default_tau0(self.rho, self.lam)
        object.__setattr__(self, "_tau0_effective", derived)

    @property
    def tau0_effective(self) -> float:
        return self._tau0_effective


def smooth_schedule(
    d: int,
    lam: float = 0.0,
    rho: float = 0.0,
    eta0: float | None = None,
    delta0: float | None = None,
    tau0: float | None = None,
) -> Schedule:
    """Smooth-case preset: alpha=2/3, beta=1/6, eta0=d^(-2/3), delta0=d^(1/3)."""
    s = Schedule(
        alpha=2.0 / 3.0,
        beta=1.0 / 6.0,
        eta0=float(d) ** (-2.0 / 3.0) if eta0 is None else eta0,
        delta0=float(d) ** (1.0 / 3.0) if delta0 is None else delta0,
        lam=lam,
        rho=rho,
        tau0=tau0,
    )
    _check_exponent_window(2.0 * s.alpha - 4.0 * s.beta, "2*alpha - 4*beta")
    return s


def nonsmooth_schedule(
    d: int,
    lam: float = 0.0,
    rho: float = 0.0,
    eta0: float | None = None,
    delta0: float | None = None,
    tau0: float | None = None,
) -> Schedule:
    """Non-smooth preset: alpha=3/4, beta=1/6 (satisfies 0 < 3*beta < alpha < 1)."""
    s = Schedule(
        alpha=0.75,
        beta=1.0 / 6.0,
        eta0=float(d) ** (-2.0 / 3.0) if eta0 is None else eta0,
        delta0=float(d) if delta0 is None else delta0,
        lam=lam,
        rho=rho,
        tau0=tau0,
    )
    if not 0.0 < 3.0 * s.beta < s.alpha:
        raise ValueError("non-smooth preset needs 0 < 3*beta < alpha < 1")
    return s


def _check_exponent_window(value: float, label: str) -> None:
    if not 0.0 < value < 1.0:
        raise ValueError(f"{label} must lie in (0, 1), got {value}")


def schedule_at(k: int, s: Schedule) -> tuple[float, float, int]:
    """Evaluate (eta_k, delta_k, tau_k) at epoch index k >= 0."""
    if k < 0:
        raise ValueError(f"epoch index must be >= 0, got {k}")
    decay = 1.0 + k
    eta = s.eta0 / decay**s.alpha
    delta = s.delta0 / decay**s.beta
    tau0 = s.tau0_effective
    if tau0 <= 0.0:
        return eta, delta, 1
    tau = max(1, math.ceil(tau0 * math.log(decay) - _CEIL_EPS))
    return eta, delta, tau


def sample_unit_sphere(d: int, rng: np.random.Generator) -> np.ndarray:
    """Draw uniformly from the unit sphere in R^d by normalizing a Gaussian."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    while True:
        v = rng.standard_normal(d)
        norm = math.sqrt(float(v @ v))
        if norm > 1e-300:
            return v / norm


def sample_unit_sphere_batch(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n independent uniform sphere directions as an (n, d) array."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    v = rng.standard_normal((n, d))
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    # Resample the (measure-zero) degenerate rows rather than dividing by ~0.
    bad = norms[:, 0] <= 1e-300
    while np.any(bad):
        v[bad] = rng.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(v, axis=1, keepdims=True)
        bad = norms[:, 0] <= 1e-300
    return v / norms


def one_point_gradient(d: int, delta: float, loss_value: float, u: np.ndarray) -> np.ndarray:
    """One-point estimate (d/delta) * loss * u; u must be a unit direction."""
    if delta <= 0.0:
        raise ValueError(f"query radius must be > 0, got {delta}")
    return (d / delta) * loss_value * u


def forgetting_weight(lam: float, tau: int, m: int) -> float:
    """Weight lam^(tau - m) of inner step m in an epoch of length tau.

    The convention 0**0 = 1 makes the final inner step (m = tau) carry weight
    one even at lam = 0, which reduces the accumulation scheme to plain
    burn-in.
    """
    if not 1 <= m <= tau:
        raise IndexError(f"inner step m={m} outside [1, tau={tau}]")
    if m == tau:
        return 1.0
    return lam ** (tau - m)


def forgetting_weights(lam: float, tau: int) -> np.ndarray:
    """Vector of lam^(tau-m) for m = 1..tau (ends with weight 1)."""
    return lam ** np.arange(tau - 1, -1, -1, dtype=float)
