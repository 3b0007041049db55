"""Environment oracles checked against Monte-Carlo and finite-difference references."""

from __future__ import annotations

import math

import numpy as np
import pytest

from perfdfo import make_environment, make_rng
from perfdfo.diag import finite_diff_grad
from perfdfo.envs import ArPricing, ArRegression, ArScalarQuartic
from perfdfo.errors import ConfigError

MU0 = np.array([5.0, -5.0, -5.0, 5.0, -5.0])
THETA_STAR = np.array([5.0, -5.0, 5.0, -5.0, 5.0])


class TestQuarticKernel:
    def test_one_step_conditional_moments(self):
        env = ArScalarQuartic(gamma=0.5, sigma=1.0)
        rng = make_rng(5)
        n = 200_000
        z = np.zeros(1)
        theta = np.array([1.0])
        draws = np.array([env.kernel_step(z, theta, rng)[0] for _ in range(n)])
        # E[z'|z=0, theta=1] = gamma * theta = 0.5
        sd = 0.5 * math.sqrt((2 - 0.5) / 0.5)  # gamma * innovation sd
        assert abs(draws.mean() - 0.5) <= 3 * sd / math.sqrt(n)
        # Var[z'|z] = gamma^2 (2-gamma)/gamma sigma^2 = 0.75
        var = draws.var(ddof=1)
        assert abs(var - 0.75) <= 3 * 0.75 * math.sqrt(2.0 / n)

    def test_iterated_chain_reaches_stationary_variance(self):
        # AR fixed point: v = (1-g)^2 v + g(2-g) sigma^2  =>  v = sigma^2
        env = ArScalarQuartic(gamma=0.5, sigma=1.0)
        rng = make_rng(17)
        theta = np.array([2.0])
        z = np.zeros(1)
        path = np.empty(10_000)
        for i in range(path.size):
            z = env.kernel_step(z, theta, rng)
            path[i] = z[0]
        tail = path[5_000:]
        assert abs(tail.var(ddof=1) - 1.0) <= 0.1

    def test_dimension_mismatch(self):
        env = ArScalarQuartic()
        with pytest.raises(ValueError):
            env.kernel_step(np.zeros(2), np.array([1.0]), make_rng(0))
        with pytest.raises(ValueError):
            env.kernel_step(np.zeros(1), np.array([1.0, 2.0]), make_rng(0))


class TestQuarticOracles:
    def test_risk_value_against_monte_carlo(self):
        env = ArScalarQuartic()
        assert abs(env.exact_risk(np.array([4.0])) - (-512.0 / 12.0)) <= 1e-12
        # MC oracle: loss is linear in z, z ~ N(4, 1)
        rng = make_rng(23)
        n = 10_000_000
        zs = 4.0 + rng.standard_normal(n)
        mc = np.mean(env.loss_batch(np.full((n, 1), 4.0), zs[:, None]))
        se = np.std(env.loss_batch(np.full((1000, 1), 4.0), zs[:1000, None])) / math.sqrt(n)
        assert abs(mc - env.exact_risk(np.array([4.0]))) <= 3 * se + 1e-6

    def test_stationary_points(self):
        env = ArScalarQuartic()
        for point in (-2.0, 0.0, 4.0):
            assert env.exact_risk_grad(np.array([point]))[0] == pytest.approx(0.0, abs=1e-12)

    def test_gradient_against_finite_difference(self):
        env = ArScalarQuartic()
        g = env.exact_risk_grad(np.array([6.0]))[0]
        assert g == pytest.approx(96.0, abs=1e-12)
        fd = finite_diff_grad(lambda t: env.exact_risk(t), np.array([6.0]), 1e-5)[0]
        assert abs(fd - 96.0) <= 1e-5

    def test_loss_grad_examples(self):
        env = ArScalarQuartic()
        assert env.loss_grad_theta(np.array([0.0]), np.array([1.0]))[0] == pytest.approx(-4.0)
        # numeric cross-check at a generic point
        theta, z = np.array([1.7]), np.array([-0.4])
        fd = finite_diff_grad(lambda t: env.loss(t, z), theta, 1e-6)
        assert np.allclose(env.loss_grad_theta(theta, z), fd, atol=1e-6)

    def test_stationary_sample_mean(self):
        env = ArScalarQuartic()
        n = 1_000_000
        zs = env.stationary_sample_batch(np.full((n, 1), 2.0), make_rng(3))
        assert abs(zs.mean() - 2.0) <= 3.0 / math.sqrt(n)


class TestPricing:
    def test_defaults_match_benchmark(self):
        env = ArPricing()
        assert env.dim == 5
        assert np.array_equal(env.mu0, MU0)
        assert env.kappa == 0.5 and env.gamma == 0.1

    def test_optimal_revenue(self):
        env = ArPricing()
        theta_po = env.optimal_decision()
        assert np.allclose(theta_po, MU0 / (2 * 0.5))
        assert -env.exact_risk(theta_po) == pytest.approx(62.5, abs=1e-12)

    def test_grad_is_zero_at_optimum(self):
        env = ArPricing()
        assert np.allclose(env.exact_risk_grad(env.optimal_decision()), 0.0, atol=1e-12)

    def test_grad_matches_finite_difference(self):
        env = ArPricing()
        theta = np.array([1.0, -2.0, 0.5, 3.0, -1.0])
        fd = finite_diff_grad(lambda t: env.exact_risk(t), theta, 1e-5)
        g = env.exact_risk_grad(theta)
        assert np.all(np.abs(fd - g) <= 1e-6 * np.maximum(1.0, np.abs(g)))

    def test_loss_grad_example(self):
        env = ArPricing()
        z = np.array([1.0, 0.0, 0.0, 0.0, 0.0])
        theta = np.zeros(5)
        assert np.array_equal(env.loss_grad_theta(theta, z), -z)

    def test_stationary_mean_at_zero_price(self):
        env = ArPricing()
        n = 200_000
        zs = env.stationary_sample_batch(np.zeros((n, 5)), make_rng(9))
        assert np.all(np.abs(zs.mean(axis=0) - MU0) <= 3.0 / math.sqrt(n))

    def test_decoupled_risk(self):
        # loss(theta, Z), Z ~ stationary(theta') averages to -<theta, mu0 - kappa theta'>
        env = ArPricing()
        rng = make_rng(31)
        theta = np.array([2.0, 1.0, -1.0, 0.5, 0.0])
        theta_prime = np.array([-1.0, 4.0, 2.0, 0.0, 1.0])
        n = 1_000_000
        zs = env.stationary_sample_batch(np.broadcast_to(theta_prime, (n, 5)).copy(), rng)
        losses = env.loss_batch(np.broadcast_to(theta, (n, 5)).copy(), zs)
        expected = -float(theta @ (MU0 - 0.5 * theta_prime))
        se = losses.std(ddof=1) / math.sqrt(n)
        assert abs(losses.mean() - expected) <= 3 * se

    def test_kernel_conditional_mean(self):
        env = ArPricing()
        rng = make_rng(2)
        z = np.ones(5)
        theta = np.array([2.0, 0.0, 0.0, 0.0, 0.0])
        n = 100_000
        draws = np.stack([env.kernel_step(z, theta, rng) for _ in range(n)])
        expected = 0.9 * z + 0.1 * (MU0 - 0.5 * theta)
        sd = 0.1 * math.sqrt((2 - 0.1) / 0.1)
        assert np.all(np.abs(draws.mean(axis=0) - expected) <= 3 * sd / math.sqrt(n))


class TestRegression:
    def test_default_kappa_normalizes_theta_star(self):
        env = ArRegression()
        assert env.kappa == pytest.approx(1.0 / np.linalg.norm(THETA_STAR))
        assert env.sample_dim == 6

    def test_optimum_is_half_theta_star(self):
        # with kappa = 1/||theta_star|| and sigma1 = 1 the shrink factor is 1/2
        env = ArRegression()
        assert np.allclose(env.optimal_decision(), THETA_STAR / 2.0, atol=1e-12)
        assert np.allclose(env.exact_risk_grad(env.optimal_decision()), 0.0, atol=1e-12)

    def test_risk_at_optimum_against_monte_carlo(self):
        env = ArRegression()
        theta_opt = env.optimal_decision()
        closed = env.exact_risk(theta_opt)
        # sigma1^2 ||theta*||^2 / 4 + kappa^2 ||theta*||^4 / 4 + sigma2^2 = 63.5
        assert closed == pytest.approx(63.5, abs=1e-12)
        n = 10_000_000
        zs = env.stationary_sample_batch(np.broadcast_to(theta_opt, (n, 5)).copy(), make_rng(41))
        losses = env.loss_batch(np.broadcast_to(theta_opt, (n, 5)).copy(), zs)
        se = losses.std(ddof=1) / math.sqrt(n)
        assert abs(losses.mean() - closed) <= 3 * se

    def test_grad_matches_finite_difference(self):
        env = ArRegression()
        theta = np.array([1.0, 2.0, -3.0, 0.5, 1.5])
        fd = finite_diff_grad(lambda t: env.exact_risk(t), theta, 1e-5)
        g = env.exact_risk_grad(theta)
        assert np.all(np.abs(fd - g) <= 1e-6 * np.maximum(1.0, np.abs(g)))

    def test_loss_grad_example(self):
        env = ArRegression()
        theta = np.zeros(5)
        z = np.array([1.0, 0.0, 0.0, 0.0, 0.0, 1.0])  # x = e1, y = 1
        expected = np.array([-2.0, 0.0, 0.0, 0.0, 0.0])
        assert np.allclose(env.loss_grad_theta(theta, z), expected, atol=1e-12)
        fd = finite_diff_grad(lambda t: env.loss(t, z), theta, 1e-6)
        assert np.allclose(fd, expected, atol=1e-6)

    def test_stationary_cross_moment(self):
        # E[Y X] = sigma1^2 theta_star under the stationary law at any theta
        env = ArRegression()
        n = 1_000_000
        theta = np.array([0.3, -1.0, 2.0, 0.0, 1.0])
        zs = env.stationary_sample_batch(np.broadcast_to(theta, (n, 5)).copy(), make_rng(8))
        x, y = zs[:, :5], zs[:, 5]
        cross = (x * y[:, None]).mean(axis=0)
        se = (x * y[:, None]).std(axis=0, ddof=1) / math.sqrt(n)
        assert np.all(np.abs(cross - THETA_STAR) <= 3 * se)

    def test_chain_matches_stationary_moments(self):
        env = ArRegression()
        rng = make_rng(12)
        theta = np.array([1.0, 0.0, -1.0, 0.5, 0.25])
        z = env.initial_sample(theta, rng)
        n = 20_000
        path = np.empty((n, 6))
        for i in range(n):
            z = env.kernel_step(z, theta, rng)
            path[i] = z
        tail = path[10_000:]
        y_mean_expected = env.kappa * float(theta @ THETA_STAR)
        y_var_expected = float(THETA_STAR @ THETA_STAR) + 1.0
        assert np.all(np.abs(tail[:, :5].mean(axis=0)) <= 0.1)
        assert abs(tail[:, 5].mean() - y_mean_expected) <= 3 * math.sqrt(y_var_expected / 1000)
        assert abs(tail[:, 5].var(ddof=1) - y_var_expected) <= 0.1 * y_var_expected


class TestBatchConsistency:
    @pytest.mark.parametrize("tag", ["quartic", "pricing", "regression"])
    def test_batch_oracles_match_scalar(self, tag):
        env = make_environment(tag)
        rng = make_rng(77)
        thetas = rng.normal(size=(8, env.dim))
        zs = np.stack([env.stationary_sample(t, rng) for t in thetas])
        assert np.allclose(
            env.loss_batch(thetas, zs), [env.loss(t, z) for t, z in zip(thetas, zs)]
        )
        assert np.allclose(env.exact_risk_batch(thetas), [env.exact_risk(t) for t in thetas])
        assert np.allclose(
            env.exact_risk_grad_batch(thetas),
            np.stack([env.exact_risk_grad(t) for t in thetas]),
        )

    def test_stationary_batch_moments(self):
        env = make_environment("pricing")
        theta = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
        n = 200_000
        zs = env.stationary_sample_batch(np.broadcast_to(theta, (n, 5)).copy(), make_rng(4))
        assert np.all(np.abs(zs.mean(axis=0) - (MU0 - 0.5 * theta)) <= 3.0 / math.sqrt(n))


class TestMonteCarloRiskConsistency:
    @pytest.mark.parametrize("tag", ["quartic", "pricing", "regression"])
    def test_stationary_average_matches_exact_risk_on_grid(self, tag):
        env = make_environment(tag)
        rng = make_rng(101)
        grid = np.linspace(-2.0, 4.0, 5)
        n = 1_000_000
        for i, scale in enumerate(grid):
            theta = np.full(env.dim, scale) if env.dim > 1 else np.array([scale])
            thetas = np.broadcast_to(theta, (n, env.dim)).copy()
            losses = env.loss_batch(thetas, env.stationary_sample_batch(thetas, rng))
            se = losses.std(ddof=1) / math.sqrt(n)
            assert abs(losses.mean() - env.exact_risk(theta)) <= 3 * se, (
                f"{tag} grid point {i}"
            )


class TestFactory:
    def test_unknown_tag(self):
        with pytest.raises(ConfigError):
            make_environment("bandit")

    def test_bad_params(self):
        with pytest.raises(ConfigError):
            make_environment("quartic", {"gamma": 1.5})
        with pytest.raises(ConfigError):
            make_environment("pricing", {"unknown_knob": 1.0})

    def test_mixing_rho(self):
        assert make_environment("quartic").mixing_rho == 0.5
        assert make_environment("pricing").mixing_rho == pytest.approx(0.9)
        assert make_environment("regression").mixing_rho == 0.75
