#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Verificación en línea de las desigualdades por iteración de PMMSopt.

InequalityChecker se registra como observador de PMMSoptSolver.run y
comprueba en cada paso las cotas del multiplicador, la cota del
desplazamiento primal y la desigualdad de descenso del subproblema sobre
puntos de prueba. Al final de la corrida (`finalize`) comprueba las cotas
acumuladas de violación y el certificado de objetivo contra el comparador.

Las violaciones se cuentan e informan; nunca se lanza una excepción.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ..utils.projections import project_nonneg
from .bounds import objective_certificate, violation_sum_bound
from .pmmsopt import step_bound

# Tolerancia de redondeo para desigualdades que se cumplen exactamente
_ROUNDING = 1e-12


@dataclass
class InequalityReport:
    """Recuento de comprobaciones y violaciones por desigualdad."""

    checks: dict = field(default_factory=dict)
    violations: dict = field(default_factory=dict)
    worst_excess: dict = field(default_factory=dict)

    def record(self, name, lhs, rhs):
        self.checks[name] = self.checks.get(name, 0) + 1
        excess = lhs - rhs
        if excess > 0:
            self.violations[name] = self.violations.get(name, 0) + 1
        self.worst_excess[name] = max(self.worst_excess.get(name, -math.inf), excess)

    def count(self, name):
        return self.violations.get(name, 0)

    @property
    def total_violations(self):
        return sum(self.violations.values())

    @property
    def passed(self):
        return self.total_violations == 0

    def to_dict(self):
        return {
            "checks": dict(sorted(self.checks.items())),
            "violations": dict(sorted(self.violations.items())),
            "worst_excess": {k: float(v) for k, v in sorted(self.worst_excess.items())},
        }


class InequalityChecker:
    """
    Observador que verifica las desigualdades de PMMSopt durante la corrida.

    Nombres de las comprobaciones:
        'multiplier_drift'   | ‖λ^{t+1}‖ − ‖λᵗ‖ | ≤ σ‖G(x^{t+1},ξ_t)‖ ≤ σν_g
        'multiplier_square'  ‖λ^{t+1}‖² ≤ ‖λᵗ‖² + 2σ⟨λᵗ, G(x^{t+1},ξ_t)⟩ + σ²ν_g²
        'step_bound'         ‖x^{t+1} − xᵗ‖ ≤ step_bound(‖λᵗ‖)·slack + 10·inner_tol
        'descent_probe'      desigualdad de descenso del subproblema en puntos de X₀
        'violation_sum'      Σ G_i(xᵗ,ξ_t) ≤ λ_i^T/σ + κ_g Σ‖x^{t+1}−xᵗ‖
        'violation_sum_bound' Σ G_i(xᵗ,ξ_t) ≤ cota con Σ‖λᵗ‖
        'objective_certificate' Σ F(xᵗ,ξ_t) ≤ Σ F(x,ξ_t) + términos aditivos

    Args:
        program (StochasticProgram): Programa de la corrida.
        sigma (float): σ resuelto.
        alpha (float): α resuelto.
        inner_tol (float): Tolerancia del resolvedor interno.
        n_probes (int): Número de puntos de prueba sobre X₀.
        probe_iterations (int): Iteraciones iniciales en las que se prueban.
        step_slack (float): Holgura multiplicativa de la cota del paso.
        comparator (numpy.ndarray, opcional): Punto del certificado de objetivo.
        seed (int): Semilla de los puntos de prueba.
    """

    def __init__(self, program, sigma, alpha, inner_tol, n_probes=100, probe_iterations=50,
                 step_slack=1.01, comparator=None, seed=0):
        self.logger = logging.getLogger('PMMSopt.Inequalities')
        self.program = program
        self.sigma = float(sigma)
        self.alpha = float(alpha)
        self.inner_tol = float(inner_tol)
        self.probe_iterations = int(probe_iterations)
        self.step_slack = float(step_slack)
        self.comparator = None if comparator is None else np.asarray(comparator, dtype=float)

        rng = np.random.default_rng([int(seed), 2])
        self.probes = [program.domain.sample_uniform(rng) for _ in range(int(n_probes))]
        constants = program.constants
        self.probe_slack = 1e-6 + self.alpha * self.inner_tol * constants.D0

        self.report = InequalityReport()
        self._comparator_multiplier_sum = 0.0

    def __call__(self, event):
        program = self.program
        constants = program.constants
        sigma, alpha = self.sigma, self.alpha
        x, lam = event.state.x, event.state.lam
        x_next, lam_next = event.next_state.x, event.next_state.lam
        g_next = event.g_next
        xi = event.xi

        lam_norm = float(np.linalg.norm(lam))
        lam_next_norm = float(np.linalg.norm(lam_next))

        if program.p > 0:
            drift = abs(lam_next_norm - lam_norm)
            drift_bound = min(sigma * float(np.linalg.norm(g_next)), sigma * constants.nu_g)
            self.report.record("multiplier_drift", drift, drift_bound * (1 + _ROUNDING) + _ROUNDING)

            lhs = lam_next_norm ** 2
            rhs = lam_norm ** 2 + 2.0 * sigma * float(lam @ g_next) + (sigma * constants.nu_g) ** 2
            self.report.record("multiplier_square", lhs, rhs + _ROUNDING * (1.0 + abs(rhs)))

        step = float(np.linalg.norm(x_next - x))
        bound = step_bound(constants, program.p, sigma, alpha, lam_norm)
        self.report.record("step_bound", step, bound * self.step_slack + 10.0 * self.inner_tol)

        if event.state.t < self.probe_iterations:
            self._check_probes(x, lam, x_next, lam_next, xi)

        if self.comparator is not None and program.p > 0:
            self._comparator_multiplier_sum += float(lam @ program.eval_G(self.comparator, xi))

    def _check_probes(self, x, lam, x_next, lam_next, xi):
        program, sigma, alpha = self.program, self.sigma, self.alpha
        lhs = (
            float(program.eval_F(x_next, xi))
            + float(lam_next @ lam_next) / (2.0 * sigma)
            + 0.5 * alpha * float((x_next - x) @ (x_next - x))
        )
        for probe in self.probes:
            shifted = project_nonneg(lam + sigma * program.eval_G(probe, xi)) if program.p else lam
            rhs = (
                float(program.eval_F(probe, xi))
                + float(shifted @ shifted) / (2.0 * sigma)
                + 0.5 * alpha * (float((probe - x) @ (probe - x)) - float((probe - x_next) @ (probe - x_next)))
            )
            self.report.record("descent_probe", lhs, rhs + self.probe_slack)

    def finalize(self, trace):
        """
        Completa el informe con las comprobaciones acumuladas de la corrida.

        Args:
            trace (RunTrace): Traza producida por la corrida observada.

        Returns:
            InequalityReport: Informe con todas las comprobaciones.
        """
        program = self.program
        constants = program.constants
        T = trace.T

        if program.p > 0:
            g_sums = trace.g_samples().sum(axis=0)
            step_sum = float(trace.step_norms().sum())
            lambda_norm_sum = float(trace.lambda_norms()[:-1].sum())
            for i in range(program.p):
                lam_T_i = float(trace.final_lambda[i])
                self.report.record(
                    "violation_sum",
                    g_sums[i],
                    lam_T_i / self.sigma + constants.kappa_g * step_sum + T * 1e-8,
                )
                self.report.record(
                    "violation_sum_bound",
                    g_sums[i],
                    violation_sum_bound(constants, program.p, self.sigma, self.alpha, T, lam_T_i, lambda_norm_sum)
                    + T * 10.0 * self.inner_tol,
                )

        if self.comparator is not None and trace.has_comparator:
            lhs = float(trace.f_samples().sum())
            rhs = float(trace.f_comparators().sum()) + objective_certificate(
                constants, self.sigma, self.alpha, T, self._comparator_multiplier_sum
            )
            self.report.record("objective_certificate", lhs, rhs + T * self.probe_slack)

        if self.report.passed:
            self.logger.info(f"Desigualdades verificadas sin violaciones ({sum(self.report.checks.values())} comprobaciones)")
        else:
            self.logger.warning(f"Desigualdades violadas: {dict(sorted(self.report.violations.items()))}")
        return self.report
