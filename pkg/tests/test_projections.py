#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Pruebas unitarias de las proyecciones, los dominios y los flujos de muestras.
"""

import unittest
import os
import sys
import logging
import numpy as np

# Añadir directorio raíz al path para importar los módulos
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.utils import BallDomain, BoxDomain, SampleStream, project_ball, project_box, project_nonneg

# Desactivar logging durante las pruebas
logging.disable(logging.CRITICAL)


class TestProjections(unittest.TestCase):
    """
    Pruebas de las proyecciones elementales.
    """

    def test_project_nonneg(self):
        """Proyección sobre el ortante no negativo."""
        np.testing.assert_array_equal(project_nonneg([0.6, -0.3]), [0.6, 0.0])
        np.testing.assert_array_equal(project_nonneg([0.0, 0.0]), [0.0, 0.0])
        np.testing.assert_array_equal(project_nonneg([-1, -2, 3]), [0.0, 0.0, 3.0])
        self.assertEqual(project_nonneg(np.zeros(0)).shape, (0,))

    def test_project_nonneg_is_nonexpansive(self):
        """La proyección sobre el ortante no expande distancias."""
        rng = np.random.default_rng(7)
        for _ in range(1000):
            u, v = rng.normal(size=4), rng.normal(size=4)
            lhs = np.linalg.norm(project_nonneg(u) - project_nonneg(v))
            self.assertLessEqual(lhs, np.linalg.norm(u - v) + 1e-15)

    def test_project_box(self):
        """Proyección sobre una caja."""
        np.testing.assert_array_equal(project_box([2, -3], [-1, -1], [1, 1]), [1, -1])
        np.testing.assert_array_equal(project_box([0.5], [0], [1]), [0.5])
        np.testing.assert_array_equal(project_box([-0.2, 0.7, 5], [0, 0, 0], [1, 1, 1]), [0, 0.7, 1])

    def test_project_box_rejects_empty_box(self):
        """Una caja vacía se rechaza."""
        with self.assertRaises(ValueError):
            project_box([0.0], [1.0], [0.0])

    def test_project_ball(self):
        """Proyección sobre una bola."""
        np.testing.assert_allclose(project_ball([3, 4], [0, 0], 1), [0.6, 0.8])
        np.testing.assert_allclose(project_ball([0.1, 0], [0, 0], 1), [0.1, 0])
        np.testing.assert_allclose(project_ball([2, 0], [1, 0], 0.5), [1.5, 0])
        with self.assertRaises(ValueError):
            project_ball([1.0], [0.0], 0.0)

    def test_projections_are_idempotent(self):
        """Las proyecciones son idempotentes."""
        rng = np.random.default_rng(3)
        box = BoxDomain(-np.ones(3), 2 * np.ones(3))
        ball = BallDomain(np.array([1.0, 0.0, -1.0]), 1.5)
        for _ in range(100):
            y = 5 * rng.normal(size=3)
            for domain in (box, ball):
                once = domain.project(y)
                np.testing.assert_allclose(domain.project(once), once, atol=1e-14)
            np.testing.assert_array_equal(project_nonneg(project_nonneg(y)), project_nonneg(y))


class TestDomains(unittest.TestCase):
    """
    Pruebas de los dominios X₀.
    """

    def test_box_sampling_and_diameter(self):
        """Muestreo y diámetro de una caja."""
        box = BoxDomain(np.array([-1.0, 0.0]), np.array([1.0, 3.0]))
        rng = np.random.default_rng(0)
        self.assertTrue(all(box.contains(box.sample_uniform(rng)) for _ in range(200)))
        self.assertAlmostEqual(box.diameter(), np.sqrt(13.0))
        self.assertEqual(box.dim, 2)

    def test_ball_sampling_and_diameter(self):
        """Muestreo y diámetro de una bola."""
        ball = BallDomain(np.zeros(3), 2.0)
        rng = np.random.default_rng(0)
        self.assertTrue(all(ball.contains(ball.sample_uniform(rng), tol=1e-12) for _ in range(200)))
        self.assertEqual(ball.diameter(), 4.0)

    def test_projected_points_within_diameter(self):
        """Las proyecciones quedan dentro del diámetro."""
        box = BoxDomain(-np.ones(2), np.ones(2))
        rng = np.random.default_rng(1)
        for _ in range(100):
            a = box.project(10 * rng.normal(size=2))
            b = box.project(10 * rng.normal(size=2))
            self.assertLessEqual(np.linalg.norm(a - b), box.diameter() + 1e-12)

    def test_invalid_domains(self):
        """Dominios inválidos se rechazan."""
        with self.assertRaises(ValueError):
            BoxDomain(np.array([1.0]), np.array([0.0]))
        with self.assertRaises(ValueError):
            BallDomain(np.zeros(2), -1.0)


class TestSampleStream(unittest.TestCase):
    """
    Pruebas del flujo de muestras por iteración.
    """

    def test_same_identity_same_draws(self):
        """La misma identidad produce las mismas muestras."""
        a = SampleStream(42, run_id=3).generator(17).uniform(size=5)
        b = SampleStream(42, run_id=3).generator(17).uniform(size=5)
        np.testing.assert_array_equal(a, b)

    def test_draws_do_not_depend_on_consumption(self):
        """Las muestras no dependen del orden de consumo."""
        stream = SampleStream(5, run_id=1)
        stream.generator(3).uniform(size=1000)
        late = stream.generator(8).uniform(size=3)
        fresh = SampleStream(5, run_id=1).generator(8).uniform(size=3)
        np.testing.assert_array_equal(late, fresh)

    def test_distinct_identities_differ(self):
        """Identidades distintas producen muestras distintas."""
        base = SampleStream(1, run_id=0).generator(0).uniform(size=4)
        self.assertFalse(np.array_equal(base, SampleStream(1, run_id=0).generator(1).uniform(size=4)))
        self.assertFalse(np.array_equal(base, SampleStream(1, run_id=1).generator(0).uniform(size=4)))
        self.assertFalse(np.array_equal(base, SampleStream(2, run_id=0).generator(0).uniform(size=4)))

    def test_negative_iteration_rejected(self):
        """Iteraciones negativas se rechazan."""
        with self.assertRaises(ValueError):
            SampleStream(0).generator(-1)


if __name__ == '__main__':
    unittest.main()
