"""Optimizers: the forgetting-factor DFO algorithm and its baselines.

Every optimizer consumes an Environment through ``kernel_step`` / ``loss``
(plus ``loss_grad_theta`` for the first-order baseline), runs strictly
sequentially along one Markov-chain trajectory, and returns a RunTrace with
per-epoch iterates and exact-oracle metrics. Metrics never consume
environment samples: they are evaluated after the run, at epoch boundaries,
so cumulative sample counts reflect kernel transitions only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    Schedule,
    forgetting_weights,
    one_point_gradient,
    sample_unit_sphere,
    schedule_at,
)
from .envs import Environment
from .errors import UnsupportedAlgorithmError

__all__ = ["AlgoConfig", "RunTrace", "ALGORITHM_TAGS", "run_algorithm"]

# Trial aborts (recorded as diverged, not raised) once the iterate leaves
# this ball; linear-loss baselines can drift by design.
DIVERGENCE_LIMIT = 1e8


@dataclass
class AlgoConfig:
    algorithm: str
    schedule: Schedule
    epochs: int
    theta0: np.ndarray
    burn_in_tau: int | None = None  # two-point baselines; None -> tau_k from schedule

    def __post_init__(self) -> None:
        if self.algorithm not in ALGORITHM_TAGS:
            known = ", ".join(ALGORITHM_TAGS)
            raise ValueError(f"unknown algorithm {self.algorithm!r} (known: {known})")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        theta0 = np.asarray(self.theta0, dtype=float)
        if theta0.ndim != 1 or not np.all(np.isfinite(theta0)):
            raise ValueError("theta0 must be a finite 1-d vector")
        self.theta0 = theta0
        if self.burn_in_tau is not None and self.burn_in_tau < 1:
            raise ValueError(f"burn_in_tau must be >= 1, got {self.burn_in_tau}")


@dataclass
class RunTrace:
    """Per-epoch record of one trial plus the uniformly drawn output iterate.

    Arrays share one leading axis over recorded epochs 0..T (truncated early
    if the trial diverged, with ``diverged_epoch`` holding the first bad
    epoch index). ``samples_cum[k]`` counts kernel transitions observed
    before epoch k's iterate; metric arrays are None when the environment
    lacks the corresponding oracle.
    """

    epochs: np.ndarray
    samples_cum: np.ndarray
    thetas: np.ndarray
    output_theta: np.ndarray
    output_index: int
    risk: np.ndarray | None = None
    grad_norm_sq: np.ndarray | None = None
    run_avg_grad_norm_sq: np.ndarray | None = None
    diverged_epoch: int | None = None

    @property
    def diverged(self) -> bool:
        return self.diverged_epoch is not None

    @property
    def samples_total(self) -> int:
        return int(self.samples_cum[-1])


class _TraceBuilder:
    """Collects per-epoch iterates and finalizes them into a RunTrace."""

    def __init__(self, env: Environment, epochs: int, dim: int):
        self.env = env
        self.thetas = np.empty((epochs + 1, dim))
        self.samples = np.empty(epochs + 1, dtype=np.int64)
        self.count = 0
        self.diverged_epoch: int | None = None

    def record(self, theta: np.ndarray, samples_cum: int) -> bool:
        """Record epoch ``count``; returns False when theta has diverged."""
        # The comparison is False for NaN, so this also catches non-finite iterates.
        norm_sq = float(theta @ theta)
        if not norm_sq <= DIVERGENCE_LIMIT**2:
            self.diverged_epoch = self.count
            return False
        self.thetas[self.count] = theta
        self.samples[self.count] = samples_cum
        self.count += 1
        return True

    def finish(self, rng: np.random.Generator) -> RunTrace:
        n = self.count
        if n == 0:
            raise ValueError("initial decision vector already violates the divergence guard")
        thetas = self.thetas[:n].copy()
        samples = self.samples[:n].copy()
        output_index = int(rng.integers(0, n))
        risk = grad_sq = run_avg = None
        if self.env.has_exact_risk:
            risk = self.env.exact_risk_batch(thetas)
        if self.env.has_exact_risk_grad:
            grads = self.env.exact_risk_grad_batch(thetas)
            grad_sq = np.einsum("ij,ij->i", grads, grads)
            run_avg = np.cumsum(grad_sq) / np.arange(1, n + 1)
        return RunTrace(
            epochs=np.arange(n, dtype=np.int64),
            samples_cum=samples,
            thetas=thetas,
            output_theta=thetas[output_index].copy(),
            output_index=output_index,
            risk=risk,
            grad_norm_sq=grad_sq,
            run_avg_grad_norm_sq=run_avg,
            diverged_epoch=self.diverged_epoch,
        )


def dfo_lambda(env: Environment, cfg: AlgoConfig, rng: np.random.Generator) -> RunTrace:
    """Two-timescale one-point DFO with geometric sample accumulation.

    Per epoch k one direction u_k is drawn; the inner loop greedily deploys
    theta + delta_k u_k, advances the kernel once per step, and applies the
    one-point update scaled by lam^(tau_k - m) so late (better mixed) samples
    dominate. Chain state and iterate carry across epochs.
    """
    d = env.dim
    sched = cfg.schedule
    theta = cfg.theta0.copy()
    z = env.initial_sample(theta, rng)
    trace = _TraceBuilder(env, cfg.epochs, d)
    samples = 0
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(cfg.epochs):
            if not trace.record(theta, samples):
                break
            eta, delta, tau = schedule_at(k, sched)
            u = sample_unit_sphere(d, rng)
            du = delta * u
            step = eta * forgetting_weights(sched.lam, tau)
            for m in range(tau):
                theta_dep = theta + du
                z = env.kernel_step(z, theta_dep, rng)
                g = one_point_gradient(d, delta, env.loss(theta_dep, z), u)
                theta = theta - step[m] * g
            samples += tau
        else:
            trace.record(theta, samples)
    return trace.finish(rng)


def dfo_gd(env: Environment, cfg: AlgoConfig, rng: np.random.Generator) -> RunTrace:
    """One-point DFO with greedy deployment and no burn-in: one sample per epoch."""
    d = env.dim
    sched = cfg.schedule
    theta = cfg.theta0.copy()
    z = env.initial_sample(theta, rng)
    trace = _TraceBuilder(env, cfg.epochs, d)
    samples = 0
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(cfg.epochs):
            if not trace.record(theta, samples):
                break
            eta, delta, _ = schedule_at(k, sched)
            u = sample_unit_sphere(d, rng)
            theta_dep = theta + delta * u
            z = env.kernel_step(z, theta_dep, rng)
            g = one_point_gradient(d, delta, env.loss(theta_dep, z), u)
            theta = theta - eta * g
            samples += 1
        else:
            trace.record(theta, samples)
    return trace.finish(rng)


def sgd_gd(env: Environment, cfg: AlgoConfig, rng: np.random.Generator) -> RunTrace:
    """Stochastic gradient on the loss with greedy (unperturbed) deployment."""
    if not env.has_loss_grad:
        raise UnsupportedAlgorithmError(
            f"sgd_gd needs loss_grad_theta, which {type(env).__name__} does not provide"
        )
    sched = cfg.schedule
    theta = cfg.theta0.copy()
    z = env.initial_sample(theta, rng)
    trace = _TraceBuilder(env, cfg.epochs, env.dim)
    samples = 0
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(cfg.epochs):
            if not trace.record(theta, samples):
                break
            eta, _, _ = schedule_at(k, sched)
            z = env.kernel_step(z, theta, rng)
            theta = theta - eta * env.loss_grad_theta(theta, z)
            samples += 1
        else:
            trace.record(theta, samples)
    return trace.finish(rng)


def _two_point(env, cfg, rng, decoupled: bool) -> RunTrace:
    """Shared loop for both two-point estimators (burn-in per query point)."""
    d = env.dim
    sched = cfg.schedule
    theta = cfg.theta0.copy()
    z = env.initial_sample(theta, rng)
    trace = _TraceBuilder(env, cfg.epochs, d)
    samples = 0
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(cfg.epochs):
            if not trace.record(theta, samples):
                break
            eta, delta, tau = schedule_at(k, sched)
            burn = cfg.burn_in_tau if cfg.burn_in_tau is not None else tau
            u = sample_unit_sphere(d, rng)
            theta_dep = theta + delta * u
            for _ in range(burn):
                z = env.kernel_step(z, theta_dep, rng)
            samples += burn
            loss_perturbed = env.loss(theta_dep, z)
            if decoupled:
                # Second burn-in at the unperturbed model for the second sample.
                for _ in range(burn):
                    z = env.kernel_step(z, theta, rng)
                samples += burn
            diff = loss_perturbed - env.loss(theta, z)
            theta = theta - eta * one_point_gradient(d, delta, diff, u)
        else:
            trace.record(theta, samples)
    return trace.finish(rng)


def two_point_i(env: Environment, cfg: AlgoConfig, rng: np.random.Generator) -> RunTrace:
    """Finite-difference estimator reusing one sample for both query points (biased)."""
    return _two_point(env, cfg, rng, decoupled=False)


def two_point_ii(env: Environment, cfg: AlgoConfig, rng: np.random.Generator) -> RunTrace:
    """Finite-difference estimator with one burned-in sample per query point."""
    return _two_point(env, cfg, rng, decoupled=True)


ALGORITHM_TAGS = {
    "dfo_lambda": dfo_lambda,
    "dfo_gd": dfo_gd,
    "sgd_gd": sgd_gd,
    "two_point_I": two_point_i,
    "two_point_II": two_point_ii,
}


def run_algorithm(env: Environment, cfg: AlgoConfig, rng: np.random.Generator) -> RunTrace:
    """Dispatch on cfg.algorithm and run one trial."""
    return ALGORITHM_TAGS[cfg.algorithm](env, cfg, rng)
