#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Pruebas de las instancias sintéticas.
"""

import unittest
import os
import sys
import logging
import numpy as np
from scipy import stats

# Añadir directorio raíz al path para importar los módulos
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.core import AlgoConfig, build_instance, check_drift, exact_solution, make_affine_qp, make_scalar_toy
from src.core import run_pmmsopt, validate_constants
from src.core.instances import dykstra_projection, grid_search_solution, make_affine_qp_from_parameters
from src.utils import SampleStream

# Desactivar logging durante las pruebas
logging.disable(logging.CRITICAL)

ACCEPTANCE = os.environ.get("PMMSOPT_ACCEPTANCE") == "1"


class TestScalarToy(unittest.TestCase):
    """
    Pruebas de la instancia escalar.
    """

    def test_solution_and_constants(self):
        """Solución y constantes de scalar_toy."""
        program, descriptor = make_scalar_toy(0.2)
        x_star, f_star = exact_solution(descriptor)
        np.testing.assert_array_equal(x_star, [0.0])
        self.assertEqual(f_star, 0.0)
        self.assertAlmostEqual(program.constants.nu_g, 1.2)
        self.assertEqual(program.constants.eps0, 1.0)
        self.assertEqual((program.n, program.p), (1, 1))
        self.assertAlmostEqual(program.true_g(np.array([0.3]))[0], -0.3)
        self.assertEqual(program.eval_F(np.array([0.3]), program.sample(np.random.default_rng(0))), 0.3)

    def test_feasible_set(self):
        """Proyección sobre Φ = [0, 1]."""
        _, descriptor = make_scalar_toy(0.0)
        np.testing.assert_array_equal(descriptor.project_feasible(np.array([-0.4])), [0.0])
        np.testing.assert_array_equal(descriptor.project_feasible(np.array([0.3])), [0.3])
        self.assertTrue(descriptor.is_feasible([0.5]))
        self.assertFalse(descriptor.is_feasible([-0.5]))

    def test_noise_limits(self):
        """La amplitud de ruido fuera de [0, 0.5] se rechaza."""
        with self.assertRaises(ValueError):
            make_scalar_toy(0.6)
        with self.assertRaises(ValueError):
            make_scalar_toy(-0.1)

    def test_noise_is_unbiased(self):
        """El ruido de scalar_toy es insesgado."""
        program, _ = make_scalar_toy(0.5)
        stream = SampleStream(3)
        values = np.array([program.eval_G(np.array([0.25]), program.sample(stream.generator(t)))[0]
                           for t in range(20000)])
        self.assertLess(abs(values.mean() - program.true_g(np.array([0.25]))[0]), 0.02)
        self.assertTrue(np.all(np.abs(values) <= program.constants.nu_g))


class TestAffineQP(unittest.TestCase):
    """
    Pruebas de la instancia cuadrática con restricciones afines.
    """

    def test_explicit_example(self):
        """Ejemplo explícito con x* = (1, 0)."""
        program, descriptor = make_affine_qp_from_parameters([2.0, 0.0], [[1.0, 0.0]], [1.0])
        np.testing.assert_allclose(descriptor.x_star, [1.0, 0.0])
        self.assertAlmostEqual(descriptor.f_star, 0.5)
        np.testing.assert_allclose(program.constants.slater_point, [0.0, 0.0])
        self.assertAlmostEqual(program.constants.eps0, 1.0)
        self.assertAlmostEqual(program.constants.kappa_g, 1.0)

    def test_shifted_constraint(self):
        """Desplazar b desplaza x*."""
        _, descriptor = make_affine_qp_from_parameters([2.0, 0.0], [[1.0, 0.0]], [1.1])
        np.testing.assert_allclose(descriptor.x_star, [1.1, 0.0])

    def test_grid_search_agrees(self):
        """La búsqueda en rejilla encuentra x* en affine_qp."""
        program, descriptor = make_affine_qp_from_parameters([2.0, 0.0], [[1.0, 0.0]], [1.0], box_radius=2.0)
        x_grid, f_grid = grid_search_solution(program, resolution=1e-3)
        self.assertLessEqual(np.linalg.norm(x_grid - descriptor.x_star), 1e-3)
        self.assertLessEqual(abs(f_grid - descriptor.f_star), 1e-3)

    def test_grid_search_scalar(self):
        """La búsqueda en rejilla encuentra x* en scalar_toy."""
        program, descriptor = make_scalar_toy(0.0)
        x_grid, f_grid = grid_search_solution(program, resolution=1e-3)
        self.assertLessEqual(abs(x_grid[0] - descriptor.x_star[0]), 1e-3)
        self.assertLessEqual(abs(f_grid), 1e-3)

    def test_invalid_geometry(self):
        """Geometrías sin una única restricción activa se rechazan."""
        with self.assertRaises(ValueError):
            make_affine_qp_from_parameters([0.0, 0.0], [[1.0, 0.0]], [1.0])
        with self.assertRaises(ValueError):
            make_affine_qp_from_parameters([2.0, 0.0], [[1.0, 0.0], [1.0, 1.0]], [1.0, 0.5],
                                           slater_point=[0.0, -1.0])
        with self.assertRaises(ValueError):
            make_affine_qp_from_parameters([2.0, 0.0], [[1.0, 0.0], [0.0, 1.0]], [1.0, 1.0])

    def test_generated_instances(self):
        """Las instancias generadas tienen x* activo solo en la restricción 1."""
        for seed in range(10):
            for n, p in ((2, 1), (5, 3), (10, 5)):
                program, descriptor = make_affine_qp(n, p, seed, noise_amp=0.1)
                g_star = descriptor.true_g(descriptor.x_star)
                self.assertAlmostEqual(g_star[0], 0.0, places=10)
                self.assertTrue(np.all(g_star[1:] <= -0.05 + 1e-12))
                self.assertLessEqual(np.max(descriptor.true_g(program.constants.slater_point)),
                                     -program.constants.eps0 + 1e-12)
                self.assertTrue(program.domain.contains(descriptor.x_star))

    def test_generated_instance_is_reproducible(self):
        """La misma semilla genera la misma instancia."""
        _, first = make_affine_qp(4, 2, 11)
        _, second = make_affine_qp(4, 2, 11)
        np.testing.assert_array_equal(first.x_star, second.x_star)
        self.assertEqual(first.parameters, {"n": 4, "p": 2, "seed": 11, "noise_amp": 0.0})

    def test_generated_constants_validate(self):
        """Una instancia generada pasa la validación."""
        program, _ = make_affine_qp(3, 2, 1, noise_amp=0.2)
        report = validate_constants(program, 2000, seed=5)
        self.assertTrue(report.passed, report.flags)

    def test_noise_is_unbiased(self):
        """El ruido de affine_qp es insesgado."""
        program, _ = make_affine_qp_from_parameters([2.0, 0.0], [[1.0, 0.0]], [1.0], noise_amp=0.3)
        stream = SampleStream(8)
        x = np.array([0.5, -0.5])
        samples = [program.sample(stream.generator(t)) for t in range(20000)]
        f_mean = np.mean([program.eval_F(x, xi) for xi in samples])
        g_mean = np.mean([program.eval_G(x, xi)[0] for xi in samples])
        self.assertLess(abs(f_mean - program.true_f(x)), 0.02)
        self.assertLess(abs(g_mean - program.true_g(x)[0]), 0.01)


class TestDykstraProjection(unittest.TestCase):
    """
    Pruebas de la proyección sobre caja ∩ semiespacios.
    """

    def test_single_halfspace(self):
        """Proyección sobre un semiespacio."""
        A, b = np.array([[1.0, 0.0]]), np.array([1.0])
        lo, hi = -3 * np.ones(2), 3 * np.ones(2)
        np.testing.assert_allclose(dykstra_projection([2.0, 0.5], lo, hi, A, b), [1.0, 0.5], atol=1e-10)
        np.testing.assert_allclose(dykstra_projection([0.2, 0.5], lo, hi, A, b), [0.2, 0.5])

    def test_two_halfspaces(self):
        """Proyección sobre dos semiespacios."""
        A, b = np.array([[1.0, 0.0], [0.0, 1.0]]), np.array([1.0, 1.0])
        lo, hi = -3 * np.ones(2), 3 * np.ones(2)
        np.testing.assert_allclose(dykstra_projection([2.0, 2.0], lo, hi, A, b), [1.0, 1.0], atol=1e-10)

    def test_oblique_halfspace_with_box(self):
        """Proyección sobre un semiespacio oblicuo dentro de la caja."""
        A, b = np.array([[1.0, 1.0]]), np.array([1.0])
        lo, hi = np.zeros(2), 2 * np.ones(2)
        x = dykstra_projection([2.0, -1.0], lo, hi, A, b)
        np.testing.assert_allclose(x, [1.0, 0.0], atol=1e-8)


class TestRegistry(unittest.TestCase):
    """
    Pruebas del registro de instancias.
    """

    def test_build_by_name(self):
        """Construcción de instancias por nombre."""
        program, descriptor = build_instance("scalar_toy", {"noise_amp": 0.1})
        self.assertEqual(program.name, "scalar_toy")
        self.assertEqual(descriptor.parameters, {"noise_amp": 0.1})

        program, descriptor = build_instance("affine_qp", {"n": 3, "p": 2, "seed": 4})
        self.assertEqual((program.n, program.p), (3, 2))

        program, descriptor = build_instance("affine_qp", {"mu": [2.0, 0.0], "A": [[1.0, 0.0]], "b": [1.0]})
        np.testing.assert_allclose(descriptor.x_star, [1.0, 0.0])

    def test_rebuild_from_descriptor(self):
        """El descriptor basta para reconstruir la instancia."""
        _, descriptor = build_instance("affine_qp", {"n": 2, "p": 1, "seed": 9, "noise_amp": 0.05})
        _, again = build_instance(descriptor.name, descriptor.parameters)
        np.testing.assert_array_equal(descriptor.x_star, again.x_star)

    def test_unknown_instance(self):
        """Un nombre desconocido se rechaza."""
        with self.assertRaises(ValueError):
            build_instance("unknown")

@unittest.skipUnless(ACCEPTANCE, "pruebas de aceptación desactivadas (PMMSOPT_ACCEPTANCE=1)")
class TestInstanceInvariantsAtScale(unittest.TestCase):
    """
    Invariantes de las instancias con 10⁵ muestras.
    """

    N_SAMPLES = 100000

    def assert_unbiased(self, program, x, seed):
        """Las medias muestrales de F y G están a menos de 4 errores estándar de f y g."""
        rng = np.random.default_rng(seed)
        samples = [program.sample(rng) for _ in range(self.N_SAMPLES)]
        f_values = np.array([program.eval_F(x, xi) for xi in samples])
        g_values = np.array([program.eval_G(x, xi) for xi in samples])
        self.assertLessEqual(abs(f_values.mean() - program.true_f(x)), 4 * stats.sem(f_values) + 1e-12)
        g_error = np.abs(g_values.mean(axis=0) - program.true_g(x))
        self.assertTrue(np.all(g_error <= 4 * stats.sem(g_values, axis=0) + 1e-12), g_error)

    def test_generated_instances_validate(self):
        """Las instancias generadas pasan validate_constants sin avisos."""
        for seed in range(5):
            for n, p in ((2, 1), (5, 3), (10, 5)):
                program, _ = make_affine_qp(n, p, seed, noise_amp=0.2)
                report = validate_constants(program, self.N_SAMPLES, seed=seed)
                self.assertEqual(report.flags, [], f"n={n}, p={p}, semilla={seed}")

    def test_scalar_toy_is_unbiased(self):
        """Los oráculos muestrales de scalar_toy son insesgados."""
        program, _ = make_scalar_toy(0.5)
        for x in (-0.75, 0.25, 1.0):
            self.assert_unbiased(program, np.array([x]), seed=11)

    def test_affine_qp_is_unbiased(self):
        """Los oráculos muestrales de affine_qp son insesgados."""
        program, descriptor = make_affine_qp(5, 3, 2, noise_amp=0.3)
        for x in (descriptor.x_star, program.constants.slater_point, np.full(5, 0.5)):
            self.assert_unbiased(program, x, seed=12)

    def test_drift_windows_on_scalar_toy(self):
        """La deriva por ventanas de ‖λ‖ en scalar_toy con T=10⁴ queda dentro de ±sσν_g."""
        program, _ = make_scalar_toy(0.5)
        trace = run_pmmsopt(program, AlgoConfig(T=10000, sigma_rule="inv_sqrt_T", alpha_rule="sqrt_T"))
        report = check_drift(trace, trace.sigma, program.constants, s=100)
        limit = 100 * trace.sigma * program.constants.nu_g

        self.assertEqual(report.violations, [])
        self.assertEqual(report.window, 100)
        self.assertEqual(report.windows_above + report.windows_below, 10000 + 1 - 100)
        for mean_drift, count in ((report.mean_drift_below, report.windows_below),
                                  (report.mean_drift_above, report.windows_above)):
            if count:
                self.assertGreaterEqual(mean_drift, -limit)
                self.assertLessEqual(mean_drift, limit)



if __name__ == '__main__':
    unittest.main()
