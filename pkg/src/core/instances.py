#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Módulo de instancias sintéticas.

Genera programas estocásticos con esperanzas en forma cerrada, constantes
de los supuestos calculadas analíticamente, punto de Slater y solución
óptima conocida:

    scalar_toy  min x  s.a.  E[−x + ζ] ≤ 0,  x ∈ [−1, 1]
    affine_qp   min E[½‖x − μ − ξ‖²]  s.a.  E[a_iᵀx − b_i + ξ_i] ≤ 0,  x ∈ [−R, R]ⁿ

El ruido es aditivo y uniforme acotado, de modo que las cotas de los
supuestos valen para toda realización.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..utils.projections import BoxDomain, project_box
from .problem import ConstantsBundle, StochasticProgram

logger = logging.getLogger('PMMSopt.Instances')

MAX_RETRIES = 100
# Margen mínimo de las restricciones inactivas en el óptimo generado
_INACTIVE_MARGIN = 0.05
_FEASIBILITY_TOL = 1e-12


@dataclass(frozen=True)
class InstanceDescriptor:
    """
    Descripción reproducible de una instancia y de su solución.

    Attributes:
        name (str): Nombre registrado de la instancia.
        parameters (dict): Parámetros con los que `build_instance` la reconstruye.
        x_star (numpy.ndarray): Solución óptima x*.
        f_star (float): Valor óptimo f(x*).
        project_feasible (callable): Proyección euclídea exacta sobre Φ.
        true_g (callable): g(x) en forma cerrada (prueba de pertenencia a Φ).
    """

    name: str
    parameters: dict
    x_star: np.ndarray
    f_star: float
    project_feasible: Callable
    true_g: Callable = field(repr=False, default=None)

    def is_feasible(self, x, tol=_FEASIBILITY_TOL):
        return bool(np.all(np.asarray(self.true_g(np.asarray(x, dtype=float))) <= tol))

    def to_dict(self):
        return {
            "name": self.name,
            "parameters": self.parameters,
            "x_star": self.x_star.tolist(),
            "f_star": self.f_star,
        }


def _check_noise(noise_amp, limit=None):
    if noise_amp < 0:
        raise ValueError(f"La amplitud de ruido no puede ser negativa, se recibió {noise_amp}")
    if limit is not None and noise_amp > limit:
        raise ValueError(f"La amplitud de ruido debe ser ≤ {limit}, se recibió {noise_amp}")


def make_scalar_toy(noise_amp=0.0):
    """
    Crea la instancia escalar min x s.a. E[−x + ζ] ≤ 0 sobre X₀ = [−1, 1].

    Args:
        noise_amp (float): Amplitud a del ruido ζ ~ U[−a, a], 0 ≤ a ≤ 0.5.

    Returns:
        tuple: (StochasticProgram, InstanceDescriptor) con x* = 0 y f* = 0.
    """
    _check_noise(noise_amp, limit=0.5)
    a = float(noise_amp)

    constants = ConstantsBundle(
        D0=2.0,
        nu_f=2.2,
        nu_g=1.0 + a,
        kappa_f=1.0,
        kappa_g=1.0,
        eps0=1.0,
        slater_point=np.array([1.0]),
    )

    def true_g(x):
        return -np.asarray(x, dtype=float)[..., :1]

    program = StochasticProgram(
        name="scalar_toy",
        n=1,
        p=1,
        sample=lambda rng: np.array([rng.uniform(-a, a)]),
        eval_F=lambda x, xi: float(x[0]),
        eval_G=lambda x, xi: np.array([-x[0] + xi[0]]),
        subgrad_F=lambda x, xi: np.array([1.0]),
        subgrad_G=lambda x, xi: np.array([[-1.0]]),
        domain=BoxDomain(np.array([-1.0]), np.array([1.0])),
        constants=constants,
        true_f=lambda x: np.asarray(x, dtype=float)[..., 0],
        true_g=true_g,
    )
    descriptor = InstanceDescriptor(
        name="scalar_toy",
        parameters={"noise_amp": a},
        x_star=np.array([0.0]),
        f_star=0.0,
        project_feasible=lambda y: project_box(y, [0.0], [1.0]),
        true_g=true_g,
    )
    logger.info(f"Instancia scalar_toy creada con amplitud de ruido {a:g}")
    return program, descriptor


def _project_halfspace(y, a, b):
    excess = a @ y - b
    if excess <= 0:
        return y
    return y - (excess / (a @ a)) * a


def dykstra_projection(y, lo, hi, A, b, tol=1e-12, max_iter=10000):
    """
    Proyección euclídea sobre {lo ≤ x ≤ hi} ∩ {Ax ≤ b} por el algoritmo de Dykstra.

    Args:
        y (array-like): Punto a proyectar.
        lo (numpy.ndarray): Cota inferior de la caja.
        hi (numpy.ndarray): Cota superior de la caja.
        A (numpy.ndarray): Matriz p×n de normales de los semiespacios.
        b (numpy.ndarray): Términos independientes.
        tol (float): Cambio máximo entre barridos para detenerse.
        max_iter (int): Máximo de barridos.

    Returns:
        numpy.ndarray: Proyección sobre la intersección.
    """
    x = np.asarray(y, dtype=float).copy()
    projectors = [lambda z: np.clip(z, lo, hi)]
    projectors += [lambda z, a=A[i], c=b[i]: _project_halfspace(z, a, c) for i in range(A.shape[0])]
    increments = [np.zeros_like(x) for _ in projectors]

    for _ in range(max_iter):
        previous = x
        for k, project in enumerate(projectors):
            z = project(x + increments[k])
            increments[k] = x + increments[k] - z
            x = z
        if np.linalg.norm(x - previous) <= tol:
            break
    return x


def make_affine_qp_from_parameters(mu, A, b, noise_amp=0.0, slater_point=None, box_radius=None,
                                   name="affine_qp", parameters=None):
    """
    Crea una instancia cuadrática con restricciones afines a partir de parámetros explícitos.

    La restricción 1 debe ser la única activa en el óptimo, de modo que
    x* = μ − a₁(a₁ᵀμ − b₁)/‖a₁‖².

    Args:
        mu (array-like): Centro μ del objetivo (dimensión n).
        A (array-like): Matriz p×n con las filas a_i.
        b (array-like): Vector de p términos independientes.
        noise_amp (float): Amplitud del ruido uniforme del objetivo y de las restricciones.
        slater_point (array-like, opcional): x̂; con p = 1 por defecto x* − a₁/‖a₁‖.
        box_radius (float, opcional): Radio R de X₀ = [−R, R]ⁿ; por defecto
            ⌈max(|μ|, |x*|, |x̂|) + 1⌉.
        name (str): Nombre de la instancia.
        parameters (dict, opcional): Parámetros a registrar en el descriptor.

    Returns:
        tuple: (StochasticProgram, InstanceDescriptor).

    Raises:
        ValueError: Si la geometría no tiene exactamente la restricción 1 activa,
            si x̂ no es estrictamente factible o si x* no es interior a X₀.
    """
    _check_noise(noise_amp)
    a = float(noise_amp)
    mu = np.asarray(mu, dtype=float).reshape(-1)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).reshape(-1)
    n, p = mu.shape[0], A.shape[0]
    if A.shape[1] != n or b.shape[0] != p or p < 1:
        raise ValueError(f"Dimensiones incompatibles: μ∈R^{n}, A∈R^{A.shape}, b∈R^{b.shape[0]}")

    a1 = A[0]
    a1_sq = float(a1 @ a1)
    if a1_sq == 0:
        raise ValueError("La normal a₁ no puede ser nula")
    gap = float(a1 @ mu - b[0])
    if gap <= 0:
        raise ValueError("La restricción 1 no está activa en el óptimo (a₁ᵀμ ≤ b₁)")
    x_star = mu - a1 * gap / a1_sq
    others = A[1:] @ x_star - b[1:]
    if np.any(others >= 0):
        raise ValueError("Alguna restricción distinta de la 1 está activa o violada en el óptimo")

    if slater_point is None:
        if p != 1:
            raise ValueError("Con p > 1 hay que indicar slater_point")
        slater_point = x_star - a1 / math.sqrt(a1_sq)
    slater_point = np.asarray(slater_point, dtype=float).reshape(-1)
    eps0 = float(np.min(b - A @ slater_point))
    if eps0 <= 0:
        raise ValueError(f"El punto de Slater no es estrictamente factible (ε₀ = {eps0:.6g})")

    if box_radius is None:
        box_radius = math.ceil(max(np.max(np.abs(mu)), np.max(np.abs(x_star)), np.max(np.abs(slater_point))) + 1.0)
    R = float(box_radius)
    if np.max(np.abs(x_star)) >= R or np.max(np.abs(slater_point)) > R:
        raise ValueError(f"x* o x̂ fuera de la caja de radio {R:g}")
    lo, hi = -R * np.ones(n), R * np.ones(n)

    kappa_f = float(np.sqrt(np.sum((R + np.abs(mu) + a) ** 2)))
    constants = ConstantsBundle(
        D0=2.0 * R * math.sqrt(n),
        nu_f=0.5 * kappa_f ** 2,
        nu_g=float(np.sqrt(np.sum((R * np.abs(A).sum(axis=1) + np.abs(b) + a) ** 2))),
        kappa_f=kappa_f,
        kappa_g=float(np.max(np.linalg.norm(A, axis=1))),
        eps0=eps0,
        slater_point=slater_point,
    )
    noise_offset = n * a ** 2 / 6.0

    def true_f(x):
        diff = np.asarray(x, dtype=float) - mu
        return 0.5 * np.sum(diff ** 2, axis=-1) + noise_offset

    def true_g(x):
        return np.asarray(x, dtype=float) @ A.T - b

    def eval_F(x, xi):
        diff = x - mu - xi[:n]
        return 0.5 * float(diff @ diff)

    program = StochasticProgram(
        name=name,
        n=n,
        p=p,
        sample=lambda rng: rng.uniform(-a, a, size=n + p),
        eval_F=eval_F,
        eval_G=lambda x, xi: A @ x - b + xi[n:],
        subgrad_F=lambda x, xi: x - mu - xi[:n],
        subgrad_G=lambda x, xi: A.T,
        domain=BoxDomain(lo, hi),
        constants=constants,
        true_f=true_f,
        true_g=true_g,
    )
    if parameters is None:
        parameters = {
            "mu": mu.tolist(),
            "A": A.tolist(),
            "b": b.tolist(),
            "noise_amp": a,
            "slater_point": slater_point.tolist(),
            "box_radius": R,
        }
    descriptor = InstanceDescriptor(
        name=name,
        parameters=parameters,
        x_star=x_star,
        f_star=float(true_f(x_star)),
        project_feasible=lambda y: dykstra_projection(y, lo, hi, A, b),
        true_g=true_g,
    )
    logger.info(f"Instancia {name} creada: n={n}, p={p}, R={R:g}, ε₀={eps0:.4g}")
    return program, descriptor


def make_affine_qp(n, p, seed, noise_amp=0.0):
    """
    Genera una instancia affine_qp aleatoria con una sola restricción activa.

    Se sortean x̂ ~ U[−0.5, 0.5]ⁿ, normales unitarias a_i, holguras
    s_i ~ U[0.5, 1.5] con b_i = a_iᵀx̂ + s_i y μ = x̂ + (s₁ + d)a₁ con
    d ~ U[0.2, 1], de modo que x* = x̂ + s₁a₁. Se repite el sorteo mientras
    alguna restricción i ≥ 2 quede a menos de 0.05 de activarse en x*.

    Args:
        n (int): Dimensión (≥ 1).
        p (int): Número de restricciones (≥ 1).
        seed (int): Semilla de los parámetros.
        noise_amp (float): Amplitud del ruido uniforme.

    Returns:
        tuple: (StochasticProgram, InstanceDescriptor).

    Raises:
        ValueError: Si n < 1, p < 1 o se agotan los reintentos.
    """
    n, p = int(n), int(p)
    if n < 1 or p < 1:
        raise ValueError(f"Se requiere n ≥ 1 y p ≥ 1, se recibió n={n}, p={p}")
    _check_noise(noise_amp)
    rng = np.random.default_rng(int(seed))

    for attempt in range(MAX_RETRIES):
        slater = rng.uniform(-0.5, 0.5, size=n)
        A = rng.standard_normal((p, n))
        norms = np.linalg.norm(A, axis=1)
        if np.any(norms == 0):
            continue
        A = A / norms[:, None]
        slacks = rng.uniform(0.5, 1.5, size=p)
        b = A @ slater + slacks
        mu = slater + (slacks[0] + rng.uniform(0.2, 1.0)) * A[0]
        margins = slacks[0] * (A[1:] @ A[0]) - slacks[1:]
        if np.all(margins <= -_INACTIVE_MARGIN):
            break
        logger.debug(f"Geometría descartada en el intento {attempt + 1}: restricción secundaria casi activa")
    else:
        raise ValueError(f"No se obtuvo una geometría con una sola restricción activa en {MAX_RETRIES} intentos")

    parameters = {"n": n, "p": p, "seed": int(seed), "noise_amp": float(noise_amp)}
    return make_affine_qp_from_parameters(mu, A, b, noise_amp, slater_point=slater, parameters=parameters)


def exact_solution(descriptor):
    """Devuelve (x*, f*) en forma cerrada."""
    return descriptor.x_star.copy(), descriptor.f_star


def grid_search_solution(program, resolution=1e-3):
    """
    Resuelve por fuerza bruta min f(x) s.a. g(x) ≤ 0 sobre una rejilla de X₀.

    Solo para n ≤ 2 y dominios caja; en n = 2 se recorre la rejilla por filas.

    Args:
        program (StochasticProgram): Programa con true_f y true_g.
        resolution (float): Paso de la rejilla por eje.

    Returns:
        tuple: (x, f) del mejor punto factible de la rejilla.
    """
    if program.n > 2:
        raise ValueError("La búsqueda en rejilla solo admite n ≤ 2")
    if program.true_f is None or program.true_g is None:
        raise ValueError("La búsqueda en rejilla necesita true_f y true_g")
    lo, hi = program.domain.lo, program.domain.hi
    axes = [np.linspace(lo[j], hi[j], int(round((hi[j] - lo[j]) / resolution)) + 1) for j in range(program.n)]

    best_x, best_f = None, math.inf
    rows = axes[0] if program.n == 2 else [None]
    for first in rows:
        if program.n == 1:
            points = axes[0][:, None]
        else:
            points = np.column_stack([np.full(axes[1].shape, first), axes[1]])
        values = program.true_f(points)
        feasible = np.all(program.true_g(points) <= _FEASIBILITY_TOL, axis=-1)
        if not np.any(feasible):
            continue
        values = np.where(feasible, values, np.inf)
        k = int(np.argmin(values))
        if values[k] < best_f:
            best_x, best_f = points[k].copy(), float(values[k])
    if best_x is None:
        raise ValueError("Ningún punto de la rejilla es factible")
    return best_x, best_f


def _build_scalar_toy(params):
    return make_scalar_toy(noise_amp=float(params.get("noise_amp", 0.0)))


def _build_affine_qp(params):
    noise_amp = float(params.get("noise_amp", 0.0))
    if "mu" in params:
        return make_affine_qp_from_parameters(
            params["mu"],
            params["A"],
            params["b"],
            noise_amp,
            slater_point=params.get("slater_point"),
            box_radius=params.get("box_radius"),
        )
    return make_affine_qp(
        int(params.get("n", 2)), int(params.get("p", 1)), int(params.get("seed", 0)), noise_amp
    )


INSTANCE_BUILDERS = {
    "scalar_toy": _build_scalar_toy,
    "affine_qp": _build_affine_qp,
}


def build_instance(name, params=None):
    """
    Construye una instancia registrada por nombre.

    Args:
        name (str): 'scalar_toy' o 'affine_qp'.
        params (dict, opcional): Parámetros de la instancia.

    Returns:
        tuple: (StochasticProgram, InstanceDescriptor).

    Raises:
        ValueError: Si el nombre no está registrado.
    """
    if name not in INSTANCE_BUILDERS:
        raise ValueError(f"Instancia desconocida '{name}'; disponibles: {', '.join(sorted(INSTANCE_BUILDERS))}")
    return INSTANCE_BUILDERS[name](dict(params or {}))
