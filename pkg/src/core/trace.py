#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Trazas de ejecución compartidas por PMMSopt y por el método proyectado.

Cada registro corresponde a una iteración t y guarda las cantidades que
suman las definiciones de regret: F(xᵗ,ξ_t) y G(xᵗ,ξ_t), evaluadas en el
iterado ANTERIOR a la actualización con la muestra ACTUAL.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np


@dataclass
class StepRecord:
    """Cantidades registradas en la iteración t."""

    t: int
    x: np.ndarray
    lam: np.ndarray
    f_sample: float
    g_sample: np.ndarray
    lambda_norm: float
    step_norm: float
    inner_iters: int
    inner_residual: float
    inner_converged: bool
    f_comparator: Optional[float] = None
    g_comparator: Optional[np.ndarray] = None


@dataclass
class RunTrace:
    """
    Traza completa de una corrida.

    Attributes:
        algorithm (str): 'pmmsopt' o 'projected_sa'.
        program_name (str): Nombre de la instancia.
        records (list): Un StepRecord por iteración (exactamente T).
        x_bar (numpy.ndarray): Iterado promediado (1/T)Σ_{t<T} xᵗ.
        final_x (numpy.ndarray): x^T.
        final_lambda (numpy.ndarray): λ^T.
        sigma (float): Parámetro de penalización resuelto (0 en el método proyectado).
        alpha (float): Peso proximal resuelto (0 en el método proyectado).
        config (dict): Eco de la configuración usada.
    """

    algorithm: str
    program_name: str
    records: List[StepRecord]
    x_bar: np.ndarray
    final_x: np.ndarray
    final_lambda: np.ndarray
    sigma: float
    alpha: float
    config: dict = field(default_factory=dict)

    @property
    def T(self):
        return len(self.records)

    @property
    def p(self):
        return self.final_lambda.shape[0]

    @property
    def has_comparator(self):
        return bool(self.records) and self.records[0].f_comparator is not None

    def f_samples(self):
        return np.array([r.f_sample for r in self.records])

    def g_samples(self):
        return np.array([r.g_sample for r in self.records]).reshape(self.T, self.p)

    def f_comparators(self):
        return np.array([np.nan if r.f_comparator is None else r.f_comparator for r in self.records])

    def g_comparators(self):
        if not self.has_comparator:
            return np.full((self.T, self.p), np.nan)
        return np.array([r.g_comparator for r in self.records]).reshape(self.T, self.p)

    def iterates(self):
        """Matriz T×n con x⁰, …, x^{T−1}."""
        return np.array([r.x for r in self.records])

    def lambda_norms(self):
        """‖λ⁰‖, …, ‖λ^T‖ (longitud T+1)."""
        norms = [r.lambda_norm for r in self.records]
        norms.append(float(np.linalg.norm(self.final_lambda)))
        return np.array(norms)

    def step_norms(self):
        return np.array([r.step_norm for r in self.records])

    def flagged_steps(self):
        """Iteraciones cuyo subproblema no alcanzó la tolerancia."""
        return [r.t for r in self.records if not r.inner_converged]
