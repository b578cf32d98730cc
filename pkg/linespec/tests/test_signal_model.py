from __future__ import annotations

import math

import numpy as np
from django.test import SimpleTestCase

from linespec.exceptions import DomainError
from linespec.signal_model import (
    SignalDraw,
    complex_noise,
    draw_phases,
    near_duplicate_frequencies,
    snr_db_to_sigma2,
    steering_vector,
    synthesize,
    vandermonde,
)


class SteeringTests(SimpleTestCase):
    def test_steering_vector(self):
        a = steering_vector(math.pi / 2, 4)
        np.testing.assert_allclose(a, [1, 1j, -1, -1j], atol=1e-15)

    def test_vandermonde_columns(self):
        omegas = [0.3, -1.2, 2.0]
        A = vandermonde(omegas, 8)
        self.assertEqual(A.shape, (8, 3))
        for i, w in enumerate(omegas):
            np.testing.assert_allclose(A[:, i], steering_vector(w, 8))

    def test_needs_more_samples_than_frequencies(self):
        with self.assertRaises(DomainError):
            vandermonde([0.1, 0.2], 2)

    def test_near_duplicates_are_logged_not_rejected(self):
        self.assertTrue(near_duplicate_frequencies([1.0, 1.0 + 1e-14]))
        self.assertTrue(near_duplicate_frequencies([-math.pi, math.pi - 1e-13]))
        self.assertFalse(near_duplicate_frequencies([0.1, 0.2]))
        with self.assertLogs("linespec.signal_model", level="WARNING"):
            A = vandermonde([1.0, 1.0], 4)
        self.assertEqual(A.shape, (4, 2))


class SynthesisTests(SimpleTestCase):
    def test_snr_definition(self):
        self.assertEqual(snr_db_to_sigma2(0), 1.0)
        self.assertAlmostEqual(snr_db_to_sigma2(-10), 10.0, places=12)
        self.assertAlmostEqual(snr_db_to_sigma2(20), 0.01, places=15)
        self.assertEqual(snr_db_to_sigma2(math.inf), 0.0)

    def test_noise_free_signal_is_exact(self):
        draw = SignalDraw(np.array([0.5, -2.0]), np.array([1.0, 0.5]), np.array([0.0, math.pi / 2]), 0.0, 16)
        signal = synthesize(draw, np.random.default_rng(0))
        np.testing.assert_allclose(signal.y, vandermonde(draw.omegas, 16) @ draw.s)
        self.assertEqual((signal.m, signal.d), (16, 2))
        np.testing.assert_allclose(signal.true_s, [1.0, 0.5j], atol=1e-15)

    def test_noise_power(self):
        noise = complex_noise(np.random.default_rng(5), 2.0, 200_000)
        self.assertAlmostEqual(float(np.mean(np.abs(noise) ** 2)), 2.0, delta=0.03)
        self.assertAlmostEqual(float(np.mean(noise.real ** 2)), 1.0, delta=0.02)

    def test_same_seed_same_signal(self):
        draw = SignalDraw(np.array([1.0]), np.array([1.0]), np.array([0.0]), 0.5, 8)
        first = synthesize(draw, np.random.default_rng(9)).y
        second = synthesize(draw, np.random.default_rng(9)).y
        np.testing.assert_array_equal(first, second)

    def test_phases_on_zero_to_two_pi(self):
        phases = draw_phases(np.random.default_rng(4), 1000)
        self.assertTrue(np.all(phases >= 0) and np.all(phases < 2 * math.pi))

    def test_rejects_negative_noise(self):
        draw = SignalDraw(np.array([1.0]), np.array([1.0]), np.array([0.0]), -1.0, 8)
        with self.assertRaises(DomainError):
            synthesize(draw, np.random.default_rng(0))
