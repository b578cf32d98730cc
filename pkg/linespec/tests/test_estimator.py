from __future__ import annotations

import math
import time

import numpy as np
from django.test import SimpleTestCase, override_settings, tag
from scipy import optimize

from linespec.estimator import (
    MapEstimator,
    PriorWeights,
    SolverConfig,
    estimate,
    log_map_cost,
    log_per_frequency_cost,
    map_cost,
    phi,
)
from linespec.exceptions import DomainError
from linespec.harness import FrequencySpec, Scenario, SweepPoint, draw_signal, match_frequencies, trial_rng
from linespec.priors import VonMisesPrior
from linespec.projections import complement_projector, grid_residuals
from linespec.signal_model import steering_matrix, vandermonde

UNIFORM = VonMisesPrior(0.0, 0.0)


def noise_free(omegas, s, m):
    return vandermonde(omegas, m) @ np.asarray(s, dtype=complex)


class SolverConfigTests(SimpleTestCase):
    def test_defaults(self):
        cfg = SolverConfig()
        self.assertEqual((cfg.grid_points, cfg.levels, cfg.max_sweeps_per_level), (500, 10, 50))
        self.assertAlmostEqual(cfg.spacing(1), 2 * math.pi / 500, places=15)
        self.assertAlmostEqual(cfg.spacing(3), 2 * math.pi / 2000, places=15)
        self.assertAlmostEqual(cfg.resolution, math.pi / (2 ** 9 * 500), places=18)

    def test_validation(self):
        for kwargs in ({"grid_points": 4}, {"levels": 0}, {"eps_grid_points": 0.0}, {"max_sweeps_per_level": 0}):
            with self.subTest(**kwargs), self.assertRaises(DomainError):
                SolverConfig(**kwargs)

    @override_settings(LINESPEC={"GRID_POINTS": 64, "REFINEMENT_LEVELS": 3, "EPS_GRID_POINTS": 1.5, "MAX_SWEEPS_PER_LEVEL": 7})
    def test_from_settings_and_overrides(self):
        cfg = SolverConfig.from_settings(levels=None, max_sweeps_per_level=9)
        self.assertEqual(cfg, SolverConfig(grid_points=64, levels=3, eps_grid_points=1.5, max_sweeps_per_level=9))
        self.assertEqual(cfg.as_dict(), {"g": 64, "L": 3, "eps_grid_points": 1.5, "max_sweeps": 9})


class CostTests(SimpleTestCase):
    def setUp(self):
        rng = np.random.default_rng(21)
        self.m = 12
        self.omegas = np.array([0.4, -1.3, 2.2])
        self.y = noise_free(self.omegas, [1, 0.7j, -0.5], self.m) + 0.1 * (
            rng.standard_normal(self.m) + 1j * rng.standard_normal(self.m)
        )
        self.priors = [VonMisesPrior(0.5, 30.0), VonMisesPrior(-1.0, 5.0), UNIFORM]

    def test_weights(self):
        weights = PriorWeights.from_priors(self.priors, self.m)
        np.testing.assert_allclose(weights.beta[0], -30.0 * np.exp(-0.5j) / 13)
        self.assertEqual(weights.beta[2], 0)
        np.testing.assert_allclose(weights.pi_for(self.m), [30 * np.exp(-0.5j), 5 * np.exp(1j), 0])

    def test_phi_matches_definition(self):
        beta = PriorWeights.from_priors(self.priors, self.m).beta
        expected = sum(np.real(b * np.exp(1j * w)) for b, w in zip(beta, self.omegas))
        self.assertAlmostEqual(phi(self.omegas, beta), expected, places=14)
        with self.assertRaises(DomainError):
            phi(self.omegas[:2], beta)

    def test_log_cost_matches_direct_product(self):
        r = complement_projector(steering_matrix(self.omegas, self.m)).apply(self.y)
        residual = float(np.real(np.vdot(r, r)))
        direct = residual * math.exp(phi(self.omegas, PriorWeights.from_priors(self.priors, self.m)))
        self.assertAlmostEqual(map_cost(self.y, self.omegas, self.priors) / direct, 1.0, places=10)
        self.assertAlmostEqual(log_map_cost(self.y, self.omegas, self.priors), math.log(direct), places=10)

    def test_huge_concentration_stays_finite_in_log_domain(self):
        priors = [VonMisesPrior(0.4, 1e9), UNIFORM, UNIFORM]
        self.assertTrue(math.isfinite(log_map_cost(self.y, self.omegas, priors)))
        self.assertEqual(map_cost(self.y, [self.omegas[0] + math.pi, *self.omegas[1:]], priors), math.inf)

    def test_per_frequency_cost_differs_from_full_cost_by_a_constant(self):
        grid = np.linspace(-math.pi, math.pi, 40, endpoint=False) + 0.05
        others = self.omegas[1:]
        local = log_per_frequency_cost(self.y, grid, others, self.priors[0])
        full = np.array([log_map_cost(self.y, [w, *others], self.priors) for w in grid])
        offsets = full - local
        self.assertLess(np.ptp(offsets), 1e-8)

    def test_noise_free_truth_has_minus_infinite_log_cost(self):
        y = noise_free([0.5], [1.0], 6)
        self.assertEqual(log_map_cost(y, [0.5], [UNIFORM]), -math.inf)
        self.assertEqual(map_cost(y, [0.5], [UNIFORM]), 0.0)


class MapEstimatorTests(SimpleTestCase):
    def test_constant_signal(self):
        result = estimate(np.ones(4, dtype=complex), [UNIFORM])
        self.assertAlmostEqual(result.omegas[0], 0.0, delta=1e-9)
        self.assertAlmostEqual(abs(result.s_hat[0] - 1.0), 0.0, delta=1e-9)
        self.assertLess(result.sigma2_hat, 1e-20)
        self.assertTrue(result.converged)

    def test_prior_dominates_with_extreme_concentration(self):
        prior = VonMisesPrior.from_multiple_of_pi(0.1, 1e8)
        result = estimate(np.ones(4, dtype=complex), [prior])
        self.assertAlmostEqual(result.omegas[0], 0.1 * math.pi, delta=SolverConfig().spacing(SolverConfig().levels))

    def test_recovers_noise_free_lines_to_grid_resolution(self):
        truth = np.array([0.45, 0.60, 0.75]) * math.pi
        s = np.array([1.0, np.exp(0.4j), np.exp(-2.0j)])
        y = noise_free(truth, s, 32)
        cfg = SolverConfig()
        result = estimate(y, [UNIFORM] * 3, cfg)
        perm = match_frequencies(truth, result.omegas, keyed=False)
        errors = np.abs(result.omegas[perm] - truth)
        self.assertTrue(np.all(errors <= cfg.resolution + 1e-12), errors)
        np.testing.assert_allclose(result.s_hat[perm], s, rtol=1e-6)
        self.assertLessEqual(result.sigma2_hat, 1e-10)
        self.assertTrue(result.converged)

    def test_keeps_each_frequency_with_its_prior(self):
        truth = np.array([0.45, 0.60, 0.75]) * math.pi
        rng = np.random.default_rng(8)
        y = noise_free(truth, [1, 1, 1], 32) + 0.1 * (rng.standard_normal(32) + 1j * rng.standard_normal(32))
        priors = [
            VonMisesPrior.from_multiple_of_pi(0.60, 2000),
            VonMisesPrior.from_multiple_of_pi(0.75, 200),
            VonMisesPrior.from_multiple_of_pi(0.45, 2000),
        ]
        result = estimate(y, priors, SolverConfig(grid_points=128, levels=6))
        np.testing.assert_allclose(result.omegas, truth[[1, 2, 0]], atol=0.01)

    def test_cost_never_increases_along_the_trace(self):
        truth = np.array([0.45, 0.60, 0.75]) * math.pi
        priors = [
            VonMisesPrior.from_multiple_of_pi(0.45, 2000),
            VonMisesPrior.from_multiple_of_pi(0.60, 200),
            VonMisesPrior.from_multiple_of_pi(0.75, 0),
        ]
        cfg = SolverConfig(grid_points=128, levels=6)
        sigma = math.sqrt(0.1 / 2)
        for seed in range(10):
            rng = np.random.default_rng(seed)
            y = noise_free(truth, np.exp(2j * math.pi * rng.random(3)), 32) + sigma * (
                rng.standard_normal(32) + 1j * rng.standard_normal(32)
            )
            costs = [log_map_cost(y, w, priors) for w in estimate(y, priors, cfg).trace]
            with self.subTest(seed=seed):
                self.assertTrue(all(b <= a + 1e-8 for a, b in zip(costs, costs[1:])), costs)

    def test_uninformed_estimate_ignores_complex_scaling(self):
        rng = np.random.default_rng(6)
        truth = np.array([0.45, 0.60, 0.75]) * math.pi
        y = noise_free(truth, [1, 1, 1], 32) + 0.3 * (rng.standard_normal(32) + 1j * rng.standard_normal(32))
        cfg = SolverConfig(grid_points=128, levels=6)
        base = estimate(y, [UNIFORM] * 3, cfg)
        scaled = estimate((3 - 2j) * y, [UNIFORM] * 3, cfg)
        np.testing.assert_allclose(scaled.omegas, base.omegas, rtol=0, atol=1e-9)

    def test_initialization_order(self):
        priors = [UNIFORM, VonMisesPrior(0.1, 20.0), VonMisesPrior(0.2, 200.0), VonMisesPrior(0.3, 20.0)]
        self.assertEqual(MapEstimator(priors).initialization_order(16), [2, 1, 3, 0])

    def test_diagnostics(self):
        cfg = SolverConfig(grid_points=64, levels=4, max_sweeps_per_level=5)
        y = noise_free([1.0, -0.5], [1, 1], 10)
        result = estimate(y, [UNIFORM, UNIFORM], cfg)
        self.assertEqual(len(result.levels), 4)
        self.assertEqual(len(result.sweeps_used), 4)
        self.assertEqual(len(result.trace), 1 + result.iterations)
        self.assertTrue(all(1 <= n <= 5 for n in result.sweeps_used))
        payload = result.as_dict()
        self.assertEqual(set(payload), {"omegas_rad", "omegas_over_pi", "s_hat", "sigma2_hat", "converged", "sweeps_used", "iterations"})

    def test_rejects_too_few_samples(self):
        with self.assertRaises(DomainError):
            estimate(np.ones(2, dtype=complex), [UNIFORM, UNIFORM])
        with self.assertRaises(DomainError):
            MapEstimator([])

    def test_deterministic(self):
        rng = np.random.default_rng(2)
        y = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        cfg = SolverConfig(grid_points=100, levels=5)
        first = estimate(y, [UNIFORM, VonMisesPrior(1.0, 50.0)], cfg)
        second = estimate(y, [UNIFORM, VonMisesPrior(1.0, 50.0)], cfg)
        np.testing.assert_array_equal(first.omegas, second.omegas)

    @tag("slow")
    def test_single_estimate_runtime(self):
        truth = np.array([0.45, 0.60, 0.75]) * math.pi
        rng = np.random.default_rng(0)
        y = noise_free(truth, [1, 1, 1], 32) + rng.standard_normal(32) + 1j * rng.standard_normal(32)
        priors = [VonMisesPrior.from_multiple_of_pi(0.45, 2000), VonMisesPrior.from_multiple_of_pi(0.60, 200), UNIFORM]
        started = time.perf_counter()
        estimate(y, priors)
        self.assertLess(time.perf_counter() - started, 2.0)


def exhaustive_two_line_minimum(y: np.ndarray, points: int = 256) -> float:
    """Global minimum of the two-frequency residual: dense grid, then local polishing."""
    m = len(y)
    grid = -math.pi + 2 * math.pi * np.arange(points) / points
    candidates = steering_matrix(grid, m)
    table = np.vstack([grid_residuals(steering_matrix([w], m), candidates, y).brackets() for w in grid])
    starts = np.argsort(table, axis=None)[:8]

    def residual(w):
        return map_cost(y, w, [UNIFORM, UNIFORM])

    best = float(np.min(table))
    for flat in starts:
        i, k = np.unravel_index(flat, table.shape)
        polished = optimize.minimize(
            residual, [grid[i], grid[k]], method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 2000}
        )
        best = min(best, float(polished.fun))
    return best


@tag("slow")
class OracleEquivalenceTests(SimpleTestCase):
    def test_alternating_projections_reach_the_global_minimum(self):
        scenario = Scenario(
            frequencies=(FrequencySpec(UNIFORM), FrequencySpec(UNIFORM)),
            m_values=(8,),
            snr_db_values=(10.0,),
            trials=100,
            seed=2024,
            estimators=("map",),
        )
        point = SweepPoint(0, 8, 10.0)
        hits = 0
        for trial in range(scenario.trials):
            signal = draw_signal(scenario, point, trial_rng(scenario.seed, 0, trial))
            result = estimate(signal.y, scenario.priors)
            achieved = map_cost(signal.y, result.omegas, scenario.priors)
            if achieved <= 1.001 * exhaustive_two_line_minimum(signal.y):
                hits += 1
        self.assertGreaterEqual(hits, 95)
