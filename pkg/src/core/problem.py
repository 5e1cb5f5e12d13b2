#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Módulo con la abstracción del programa estocástico.

Define el programa convexo con restricciones en esperanza
    min f(x) = E[F(x,ξ)]  s.a.  g_i(x) = E[G_i(x,ξ)] ≤ 0,  x ∈ X₀,
junto con las constantes de los supuestos (cotas de diámetro, oscilación,
subgradientes y margen de Slater) y las utilidades de validación de
oráculos: verificación Monte Carlo de las constantes y comparación con
diferencias finitas.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np
from scipy import stats

from ..utils.random_streams import SampleStream

logger = logging.getLogger('PMMSopt.Problem')

# Tolerancia relativa con la que una cota empírica se considera violada
_BOUND_RTOL = 1e-12


@dataclass(frozen=True)
class ConstantsBundle:
    """
    Constantes de los supuestos del problema.

    Attributes:
        D0 (float): Cota del diámetro de X₀.
        nu_f (float): Cota de la oscilación F(x',ξ) − F(x'',ξ).
        nu_g (float): Cota de ‖G(x,ξ)‖.
        kappa_f (float): Cota de ‖v₀(x,ξ)‖.
        kappa_g (float): Cota de ‖v_i(x,ξ)‖ para cada restricción.
        eps0 (float): Margen de Slater.
        slater_point (numpy.ndarray): Punto x̂ con g_i(x̂) ≤ −ε₀.
    """

    D0: float
    nu_f: float
    nu_g: float
    kappa_f: float
    kappa_g: float
    eps0: float
    slater_point: np.ndarray

    def __post_init__(self):
        for name in ("D0", "nu_f", "nu_g", "kappa_f", "kappa_g", "eps0"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"La constante {name} debe ser finita y positiva, se recibió {value}")
            object.__setattr__(self, name, float(value))
        object.__setattr__(self, "slater_point", np.asarray(self.slater_point, dtype=float).reshape(-1))

    def to_dict(self):
        return {
            "D0": self.D0,
            "nu_f": self.nu_f,
            "nu_g": self.nu_g,
            "kappa_f": self.kappa_f,
            "kappa_g": self.kappa_g,
            "eps0": self.eps0,
            "slater_point": self.slater_point.tolist(),
        }


@dataclass(frozen=True)
class StochasticProgram:
    """
    Programa estocástico con restricciones en esperanza.

    Los oráculos son funciones puras de (x, ξ); una instancia es inmutable y
    puede compartirse entre corridas concurrentes.

    Attributes:
        name (str): Nombre de la instancia.
        n (int): Dimensión de la decisión.
        p (int): Número de restricciones en esperanza (puede ser 0).
        sample (callable): sample(rng) → ξ, una realización de la variable aleatoria.
        eval_F (callable): (x, ξ) → F(x,ξ).
        eval_G (callable): (x, ξ) → G(x,ξ), vector de p componentes.
        subgrad_F (callable): (x, ξ) → v₀(x,ξ), vector de n componentes.
        subgrad_G (callable): (x, ξ) → V(x,ξ), matriz n×p con los v_i por columnas.
        domain: Geometría de X₀ (BoxDomain o BallDomain).
        constants (ConstantsBundle): Constantes de los supuestos.
        true_f (callable, opcional): f(x) en forma cerrada; acepta lotes (..., n).
        true_g (callable, opcional): g(x) en forma cerrada; acepta lotes (..., n).
    """

    name: str
    n: int
    p: int
    sample: Callable
    eval_F: Callable
    eval_G: Callable
    subgrad_F: Callable
    subgrad_G: Callable
    domain: object
    constants: ConstantsBundle
    true_f: Optional[Callable] = None
    true_g: Optional[Callable] = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"La dimensión n debe ser positiva, se recibió {self.n}")
        if self.p < 0:
            raise ValueError(f"El número de restricciones p no puede ser negativo, se recibió {self.p}")
        if self.domain.dim != self.n:
            raise ValueError(f"El dominio tiene dimensión {self.domain.dim}, se esperaba {self.n}")
        slater = self.constants.slater_point
        if slater.shape != (self.n,):
            raise ValueError(f"El punto de Slater debe tener dimensión {self.n}")
        if np.linalg.norm(self.project_X0(slater) - slater) > 1e-12:
            raise ValueError("El punto de Slater no pertenece a X₀")

    def project_X0(self, y):
        """Proyección euclídea sobre X₀."""
        return self.domain.project(y)


@dataclass
class ValidationReport:
    """
    Resultado de la verificación Monte Carlo de las constantes.

    Una cota violada se informa en `flags`; nunca se lanza una excepción.
    """

    n_samples: int
    max_G_norm: float
    max_subgrad_F_norm: float
    max_subgrad_G_norm: float
    max_F_oscillation: float
    slater_estimate: np.ndarray
    slater_stderr: np.ndarray
    flags: List[str] = field(default_factory=list)

    @property
    def passed(self):
        return not self.flags

    def to_dict(self):
        return {
            "n_samples": self.n_samples,
            "max_G_norm": self.max_G_norm,
            "max_subgrad_F_norm": self.max_subgrad_F_norm,
            "max_subgrad_G_norm": self.max_subgrad_G_norm,
            "max_F_oscillation": self.max_F_oscillation,
            "slater_estimate": self.slater_estimate.tolist(),
            "slater_stderr": self.slater_stderr.tolist(),
            "flags": list(self.flags),
        }


def require_finite(value, what, t):
    """
    Aborta la corrida si un oráculo devolvió un valor no finito.

    Raises:
        FloatingPointError: Si algún componente de `value` es NaN o infinito.
    """
    if not np.all(np.isfinite(value)):
        raise FloatingPointError(f"El oráculo devolvió un valor no finito en {what} (iteración {t})")


def _exceeds(value, bound):
    return value > bound * (1.0 + _BOUND_RTOL) + _BOUND_RTOL


def validate_constants(program, n_samples, seed=0):
    """
    Comprueba por Monte Carlo las constantes de los supuestos de un programa.

    Se muestrean n_samples pares (x, ξ) con x uniforme sobre X₀ y, para la
    oscilación de F, un segundo punto x' que comparte la misma ξ. Se
    estima además g(x̂) en el punto de Slater.

    Args:
        program (StochasticProgram): Programa a verificar.
        n_samples (int): Número de muestras (≥ 1).
        seed (int, opcional): Semilla de la verificación.

    Returns:
        ValidationReport: Máximos empíricos, estimación de Slater y avisos.
    """
    if n_samples < 1:
        raise ValueError(f"Se necesita al menos una muestra, se recibió {n_samples}")

    constants = program.constants
    stream = SampleStream(seed, run_id=0)
    point_rng = np.random.default_rng([int(seed), 1])

    max_G = 0.0
    max_vF = 0.0
    max_vG = 0.0
    max_osc = -np.inf
    slater_values = np.empty((n_samples, program.p))

    for k in range(n_samples):
        xi = program.sample(stream.generator(k))
        x = program.domain.sample_uniform(point_rng)
        x_other = program.domain.sample_uniform(point_rng)

        max_G = max(max_G, float(np.linalg.norm(program.eval_G(x, xi))))
        max_vF = max(max_vF, float(np.linalg.norm(program.subgrad_F(x, xi))))
        if program.p > 0:
            V = program.subgrad_G(x, xi)
            max_vG = max(max_vG, float(np.max(np.linalg.norm(V, axis=0))))
        max_osc = max(max_osc, abs(program.eval_F(x, xi) - program.eval_F(x_other, xi)))
        slater_values[k] = program.eval_G(constants.slater_point, xi)

    slater_estimate = slater_values.mean(axis=0)
    if n_samples > 1 and program.p > 0:
        slater_stderr = np.atleast_1d(stats.sem(slater_values, axis=0))
    else:
        slater_stderr = np.zeros(program.p)

    report = ValidationReport(
        n_samples=n_samples,
        max_G_norm=max_G,
        max_subgrad_F_norm=max_vF,
        max_subgrad_G_norm=max_vG,
        max_F_oscillation=float(max_osc),
        slater_estimate=slater_estimate,
        slater_stderr=slater_stderr,
    )

    if _exceeds(max_G, constants.nu_g):
        report.flags.append(f"nu_g: max ‖G‖ = {max_G:.6g} > {constants.nu_g:.6g}")
    if _exceeds(max_vF, constants.kappa_f):
        report.flags.append(f"kappa_f: max ‖v0‖ = {max_vF:.6g} > {constants.kappa_f:.6g}")
    if program.p > 0 and _exceeds(max_vG, constants.kappa_g):
        report.flags.append(f"kappa_g: max ‖v_i‖ = {max_vG:.6g} > {constants.kappa_g:.6g}")
    if _exceeds(report.max_F_oscillation, constants.nu_f):
        report.flags.append(f"nu_f: oscilación {report.max_F_oscillation:.6g} > {constants.nu_f:.6g}")
    for i in range(program.p):
        threshold = -constants.eps0 + 3.0 * slater_stderr[i]
        if slater_estimate[i] > threshold + _BOUND_RTOL:
            report.flags.append(
                f"slater: g_{i + 1}(x̂) ≈ {slater_estimate[i]:.6g} > {threshold:.6g}"
            )

    for flag in report.flags:
        logger.warning(f"Constante violada en '{program.name}': {flag}")
    logger.info(f"Validación de '{program.name}' con {n_samples} muestras: {len(report.flags)} avisos")
    return report


def finite_diff_check(program, x, xi, h=1e-5):
    """
    Compara los subgradientes reportados con diferencias finitas centrales.

    Solo tiene sentido donde F y G son diferenciables. Un h demasiado
    pequeño (p. ej. 1e-300) produce cancelación y un valor grande: es un
    mal uso del llamador, no un error.

    Args:
        program (StochasticProgram): Programa con oráculos.
        x (array-like): Punto de evaluación.
        xi: Realización fija.
        h (float): Paso de las diferencias.

    Returns:
        float: Máximo, sobre F y todas las G_i, de la norma infinito de la
        diferencia entre gradiente numérico y subgradiente reportado.
    """
    x = np.asarray(x, dtype=float)
    grad_F = np.empty(program.n)
    jac_G = np.empty((program.n, program.p))
    for j in range(program.n):
        step = np.zeros(program.n)
        step[j] = h
        grad_F[j] = (program.eval_F(x + step, xi) - program.eval_F(x - step, xi)) / (2.0 * h)
        jac_G[j] = (program.eval_G(x + step, xi) - program.eval_G(x - step, xi)) / (2.0 * h)

    error = float(np.max(np.abs(grad_F - program.subgrad_F(x, xi))))
    if program.p > 0:
        error = max(error, float(np.max(np.abs(jac_G - program.subgrad_G(x, xi)))))
    return error
