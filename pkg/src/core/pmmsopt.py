#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Módulo del método proximal de multiplicadores por aproximación estocástica.

Este módulo contiene la clase PMMSoptSolver, que ejecuta la iteración

    x^{t+1} = argmin { L_σ(x, λᵗ; ξ_t) + (α/2)‖x − xᵗ‖²,  x ∈ X₀ }
    λ^{t+1} = [λᵗ + σ G(x^{t+1}, ξ_t)]₊

con λ⁰ = 0, junto con las piezas que la componen: el lagrangiano
aumentado muestral, su subgradiente, el resolvedor interno del
subproblema fuertemente convexo y la actualización del multiplicador.
"""

import enum
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from ..utils.projections import project_nonneg
from ..utils.random_streams import SampleStream
from .problem import require_finite
from .trace import RunTrace, StepRecord


class ParameterRule(enum.Enum):
    """Regla para fijar σ o α a partir del horizonte T."""

    EXPLICIT = "explicit"
    INV_SQRT_T = "inv_sqrt_T"
    SQRT_T = "sqrt_T"

    def resolve(self, T, value=None):
        if self is ParameterRule.INV_SQRT_T:
            return 1.0 / math.sqrt(T)
        if self is ParameterRule.SQRT_T:
            return math.sqrt(T)
        if value is None:
            raise ValueError("La regla 'explicit' necesita un valor numérico")
        return float(value)


@dataclass(frozen=True)
class AlgoConfig:
    """
    Configuración de una corrida de PMMSopt.

    Attributes:
        T (int): Horizonte (número de iteraciones).
        sigma (float, opcional): Penalización σ cuando sigma_rule es 'explicit'.
        alpha (float, opcional): Peso proximal α cuando alpha_rule es 'explicit'.
        sigma_rule (ParameterRule): Regla de σ ('explicit', 'inv_sqrt_T', 'sqrt_T').
        alpha_rule (ParameterRule): Regla de α.
        inner_tol (float): Tolerancia del residuo de punto fijo del subproblema.
        inner_max_iter (int): Presupuesto de iteraciones internas.
        seed (int): Semilla maestra del flujo de muestras.
        run_id (int): Identificador de corrida dentro del flujo.
        comparator (numpy.ndarray, opcional): Punto cuyo F y G muestrales se registran.
        x0 (numpy.ndarray, opcional): Iterado inicial; por defecto Π_{X₀}(0).
    """

    T: int
    sigma: Optional[float] = None
    alpha: Optional[float] = None
    sigma_rule: ParameterRule = ParameterRule.EXPLICIT
    alpha_rule: ParameterRule = ParameterRule.EXPLICIT
    inner_tol: float = 1e-8
    inner_max_iter: int = 10000
    seed: int = 0
    run_id: int = 0
    comparator: Optional[np.ndarray] = None
    x0: Optional[np.ndarray] = None

    def __post_init__(self):
        if int(self.T) < 1:
            raise ValueError(f"El horizonte T debe ser positivo, se recibió {self.T}")
        object.__setattr__(self, "sigma_rule", ParameterRule(self.sigma_rule))
        object.__setattr__(self, "alpha_rule", ParameterRule(self.alpha_rule))
        if self.resolved_sigma <= 0:
            raise ValueError(f"sigma debe ser positivo, se recibió {self.resolved_sigma}")
        if self.resolved_alpha <= 0:
            raise ValueError(f"alpha debe ser positivo, se recibió {self.resolved_alpha}")
        if self.inner_tol <= 0:
            raise ValueError(f"inner_tol debe ser positivo, se recibió {self.inner_tol}")
        if self.inner_max_iter < 1:
            raise ValueError(f"inner_max_iter debe ser al menos 1, se recibió {self.inner_max_iter}")
        if self.comparator is not None:
            object.__setattr__(self, "comparator", np.asarray(self.comparator, dtype=float))
        if self.x0 is not None:
            object.__setattr__(self, "x0", np.asarray(self.x0, dtype=float))

    @property
    def resolved_sigma(self):
        return self.sigma_rule.resolve(self.T, self.sigma)

    @property
    def resolved_alpha(self):
        return self.alpha_rule.resolve(self.T, self.alpha)

    def to_dict(self):
        return {
            "T": int(self.T),
            "sigma": self.resolved_sigma,
            "alpha": self.resolved_alpha,
            "sigma_rule": self.sigma_rule.value,
            "alpha_rule": self.alpha_rule.value,
            "inner_tol": self.inner_tol,
            "inner_max_iter": self.inner_max_iter,
            "seed": self.seed,
            "run_id": self.run_id,
            "comparator": None if self.comparator is None else self.comparator.tolist(),
            "x0": None if self.x0 is None else self.x0.tolist(),
        }


@dataclass(frozen=True)
class IterateState:
    """Estado (t, xᵗ, λᵗ) del método; λ siempre no negativo."""

    t: int
    x: np.ndarray
    lam: np.ndarray


class SubproblemResult(NamedTuple):
    x: np.ndarray
    iters: int
    residual: float
    converged: bool


@dataclass(frozen=True)
class StepEvent:
    """Lo que ve un observador tras cada iteración."""

    state: IterateState
    next_state: IterateState
    xi: object
    g_next: np.ndarray
    inner: SubproblemResult


def aug_lagrangian(program, x, lam, xi, sigma):
    """
    Lagrangiano aumentado muestral
    F(x,ξ) + (1/(2σ))·(‖[λ + σG(x,ξ)]₊‖² − ‖λ‖²).

    Args:
        program (StochasticProgram): Programa con oráculos.
        x (numpy.ndarray): Punto de evaluación.
        lam (numpy.ndarray): Multiplicador no negativo.
        xi: Realización.
        sigma (float): Penalización, estrictamente positiva.

    Returns:
        float: Valor del lagrangiano aumentado.
    """
    if sigma <= 0:
        raise ValueError(f"sigma debe ser positivo, se recibió {sigma}")
    value = float(program.eval_F(x, xi))
    if program.p == 0:
        return value
    lam = np.asarray(lam, dtype=float)
    shifted = project_nonneg(lam + sigma * program.eval_G(x, xi))
    return value + (shifted @ shifted - lam @ lam) / (2.0 * sigma)


def aug_lagrangian_subgrad(program, x, lam, xi, sigma):
    """
    Subgradiente en x del lagrangiano aumentado: v₀(x,ξ) + V(x,ξ)·[λ + σG(x,ξ)]₊.
    """
    v0 = np.asarray(program.subgrad_F(x, xi), dtype=float)
    if program.p == 0:
        return v0
    shifted = project_nonneg(lam + sigma * program.eval_G(x, xi))
    return v0 + program.subgrad_G(x, xi) @ shifted


def solve_subproblem(program, x_t, lambda_t, xi, sigma, alpha, inner_tol=1e-8, inner_max_iter=10000):
    """
    Resuelve de forma inexacta el subproblema proximal de la iteración.

    Minimiza φ(x) = L_σ(x, λᵗ; ξ_t) + (α/2)‖x − xᵗ‖² sobre X₀ con
    subgradiente proyectado de paso 2/(α(k+2)), conservando el iterado con
    menor residuo de punto fijo ‖x − Π_{X₀}(x − d(x)/α)‖.

    Args:
        program (StochasticProgram): Programa con oráculos.
        x_t (numpy.ndarray): Centro proximal xᵗ ∈ X₀.
        lambda_t (numpy.ndarray): Multiplicador λᵗ.
        xi: Realización ξ_t.
        sigma (float): Penalización σ > 0.
        alpha (float): Peso proximal α > 0.
        inner_tol (float): Tolerancia del residuo.
        inner_max_iter (int): Máximo de pasos de subgradiente.

    Returns:
        SubproblemResult: (x, iteraciones, residuo, convergió). Si se agota el
        presupuesto se devuelve el mejor iterado con converged=False.
    """
    if alpha <= 0:
        raise ValueError(f"alpha debe ser positivo, se recibió {alpha}")
    if sigma <= 0:
        raise ValueError(f"sigma debe ser positivo, se recibió {sigma}")

    x_t = np.asarray(x_t, dtype=float)
    lambda_t = np.asarray(lambda_t, dtype=float)
    x = x_t.copy()
    best_x, best_residual = x, math.inf

    for k in range(inner_max_iter + 1):
        d = aug_lagrangian_subgrad(program, x, lambda_t, xi, sigma) + alpha * (x - x_t)
        require_finite(d, "el subgradiente del subproblema", k)
        residual = float(np.linalg.norm(x - program.project_X0(x - d / alpha)))
        if residual < best_residual:
            best_x, best_residual = x, residual
        if residual <= inner_tol:
            return SubproblemResult(x, k, residual, True)
        if k == inner_max_iter:
            break
        x = program.project_X0(x - (2.0 / (alpha * (k + 2))) * d)

    return SubproblemResult(best_x, inner_max_iter, best_residual, False)


def update_multiplier(lam, g_val, sigma):
    """Actualización del multiplicador [λ + σ·g]₊."""
    return project_nonneg(np.asarray(lam, dtype=float) + sigma * np.asarray(g_val, dtype=float))


def step_bound(constants, p, sigma, alpha, lambda_norm):
    """
    Cota del desplazamiento ‖x^{t+1} − xᵗ‖ en función de ‖λᵗ‖:

        (2κ_f + √p·κ_g·‖λᵗ‖ + ν_g·√p·κ_g·σ) / (2α − p·κ_g²·σ)

    Raises:
        ValueError: Si 2α − p·κ_g²·σ ≤ 0.
    """
    denominator = 2.0 * alpha - p * constants.kappa_g ** 2 * sigma
    if denominator <= 0:
        raise ValueError(f"Se requiere 2α − pκ_g²σ > 0, se obtuvo {denominator}")
    root_p = math.sqrt(p)
    numerator = (
        2.0 * constants.kappa_f
        + root_p * constants.kappa_g * lambda_norm
        + constants.nu_g * root_p * constants.kappa_g * sigma
    )
    return numerator / denominator


class PMMSoptSolver:
    """
    Ejecutor de PMMSopt sobre un programa estocástico.

    La corrida es estrictamente secuencial y determinista dada la pareja
    (programa, configuración); las muestras se obtienen de un flujo
    contador identificado por (seed, run_id, t).
    """

    def __init__(self, program, config):
        """
        Inicializa el ejecutor y valida los parámetros resueltos.

        Args:
            program (StochasticProgram): Programa a resolver.
            config (AlgoConfig): Configuración de la corrida.

        Raises:
            ValueError: Si 2α − pκ_g²σ ≤ 0 con p ≥ 1.
        """
        self.logger = logging.getLogger('PMMSopt.Solver')
        self.program = program
        self.config = config
        self.sigma = config.resolved_sigma
        self.alpha = config.resolved_alpha

        if program.p >= 1:
            margin = 2.0 * self.alpha - program.p * program.constants.kappa_g ** 2 * self.sigma
            if margin <= 0:
                raise ValueError(
                    f"Parámetros inválidos: 2α − pκ_g²σ = {margin:.6g} ≤ 0 "
                    f"(σ={self.sigma:.6g}, α={self.alpha:.6g})"
                )
        if config.comparator is not None and config.comparator.shape != (program.n,):
            raise ValueError(f"El comparador debe tener dimensión {program.n}")

    def initial_state(self):
        x0 = np.zeros(self.program.n) if self.config.x0 is None else self.config.x0
        return IterateState(0, self.program.project_X0(x0), np.zeros(self.program.p))

    def run(self, observers=None):
        """
        Ejecuta T iteraciones de PMMSopt.

        Args:
            observers (list, opcional): Funciones llamadas con un StepEvent
                tras cada iteración.

        Returns:
            RunTrace: Traza con T registros y el iterado promediado.

        Raises:
            FloatingPointError: Si algún oráculo devuelve un valor no finito.
        """
        program, cfg = self.program, self.config
        observers = list(observers or [])
        stream = SampleStream(cfg.seed, cfg.run_id)
        comparator = cfg.comparator

        self.logger.info(
            f"Iniciando PMMSopt sobre '{program.name}': T={cfg.T}, σ={self.sigma:.6g}, α={self.alpha:.6g}"
        )
        progress_every = max(1, cfg.T // 10)

        state = self.initial_state()
        x_sum = np.zeros(program.n)
        records = []

        for t in range(cfg.T):
            x, lam = state.x, state.lam
            xi = program.sample(stream.generator(t))

            f_t = float(program.eval_F(x, xi))
            g_t = np.asarray(program.eval_G(x, xi), dtype=float)
            require_finite(f_t, "F(xᵗ,ξ_t)", t)
            require_finite(g_t, "G(xᵗ,ξ_t)", t)

            f_cmp = g_cmp = None
            if comparator is not None:
                f_cmp = float(program.eval_F(comparator, xi))
                g_cmp = np.asarray(program.eval_G(comparator, xi), dtype=float)
                require_finite(f_cmp, "F(x_cmp,ξ_t)", t)
                require_finite(g_cmp, "G(x_cmp,ξ_t)", t)

            inner = solve_subproblem(
                program, x, lam, xi, self.sigma, self.alpha, cfg.inner_tol, cfg.inner_max_iter
            )
            g_next = np.asarray(program.eval_G(inner.x, xi), dtype=float)
            require_finite(g_next, "G(x^{t+1},ξ_t)", t)
            next_state = IterateState(t + 1, inner.x, update_multiplier(lam, g_next, self.sigma))

            records.append(StepRecord(
                t=t,
                x=x,
                lam=lam,
                f_sample=f_t,
                g_sample=g_t,
                lambda_norm=float(np.linalg.norm(lam)),
                step_norm=float(np.linalg.norm(inner.x - x)),
                inner_iters=inner.iters,
                inner_residual=inner.residual,
                inner_converged=inner.converged,
                f_comparator=f_cmp,
                g_comparator=g_cmp,
            ))
            if observers:
                event = StepEvent(state, next_state, xi, g_next, inner)
                for observer in observers:
                    observer(event)

            x_sum += x
            state = next_state
            if (t + 1) % progress_every == 0:
                self.logger.debug(f"Iteración {t + 1}/{cfg.T}: ‖λ‖={np.linalg.norm(state.lam):.4g}")

        trace = RunTrace(
            algorithm="pmmsopt",
            program_name=program.name,
            records=records,
            x_bar=x_sum / cfg.T,
            final_x=state.x,
            final_lambda=state.lam,
            sigma=self.sigma,
            alpha=self.alpha,
            config=cfg.to_dict(),
        )
        flagged = trace.flagged_steps()
        if flagged:
            self.logger.warning(
                f"{len(flagged)} subproblemas no alcanzaron inner_tol={cfg.inner_tol:g} "
                f"(primera iteración afectada: {flagged[0]})"
            )
        self.logger.info(f"PMMSopt completado: x̄={np.array2string(trace.x_bar, precision=4)}")
        return trace


def run_pmmsopt(program, config, observers=None):
    """Atajo: construye un PMMSoptSolver y ejecuta la corrida."""
    return PMMSoptSolver(program, config).run(observers=observers)
