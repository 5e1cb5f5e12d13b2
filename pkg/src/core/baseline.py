#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Método de subgradiente estocástico proyectado sobre Φ, con promediado.

    x^{j+1} = Π_Φ(x^j − γ_j v₀(x^j, ξ_j))

Sirve de referencia de comparación en las instancias donde Π_Φ es
calculable (la instancia la aporta en su descriptor). Consume el mismo
flujo de muestras que PMMSopt para una misma (semilla, corrida) y produce
el mismo esquema de traza.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..utils.random_streams import SampleStream
from .problem import require_finite
from .trace import RunTrace, StepRecord


@dataclass(frozen=True)
class BaselineConfig:
    """
    Configuración del método proyectado.

    Attributes:
        T (int): Horizonte.
        step_size (float, opcional): Paso constante γ; por defecto D₀/(κ_f√T).
        seed (int): Semilla maestra del flujo de muestras.
        run_id (int): Identificador de corrida dentro del flujo.
        averaging (bool): Si True, x̄ es la media de x⁰…x^{T−1}; si no, x^T.
        comparator (numpy.ndarray, opcional): Punto cuyo F y G muestrales se registran.
        x0 (numpy.ndarray, opcional): Punto inicial antes de proyectar sobre Φ.
    """

    T: int
    step_size: Optional[float] = None
    seed: int = 0
    run_id: int = 0
    averaging: bool = True
    comparator: Optional[np.ndarray] = None
    x0: Optional[np.ndarray] = None

    def __post_init__(self):
        if int(self.T) < 1:
            raise ValueError(f"El horizonte T debe ser positivo, se recibió {self.T}")
        if self.step_size is not None and not self.step_size > 0:
            raise ValueError(f"El paso debe ser positivo, se recibió {self.step_size}")
        if self.comparator is not None:
            object.__setattr__(self, "comparator", np.asarray(self.comparator, dtype=float))
        if self.x0 is not None:
            object.__setattr__(self, "x0", np.asarray(self.x0, dtype=float))

    def resolved_step(self, constants):
        if self.step_size is not None:
            return float(self.step_size)
        return constants.D0 / (constants.kappa_f * math.sqrt(self.T))

    def to_dict(self, constants=None):
        return {
            "T": int(self.T),
            "step_size": self.step_size if constants is None else self.resolved_step(constants),
            "seed": self.seed,
            "run_id": self.run_id,
            "averaging": self.averaging,
            "comparator": None if self.comparator is None else self.comparator.tolist(),
            "x0": None if self.x0 is None else self.x0.tolist(),
        }


class ProjectedSASolver:
    """
    Ejecutor del subgradiente estocástico proyectado.

    Args:
        program (StochasticProgram): Programa con oráculos.
        proj_Phi (callable): Proyección euclídea exacta sobre Φ.
        config (BaselineConfig): Configuración de la corrida.
    """

    def __init__(self, program, proj_Phi, config):
        self.logger = logging.getLogger('PMMSopt.Baseline')
        self.program = program
        self.proj_Phi = proj_Phi
        self.config = config
        self.step_size = config.resolved_step(program.constants)

    def run(self):
        """
        Ejecuta T iteraciones proyectadas.

        Returns:
            RunTrace: Traza con el mismo esquema que PMMSopt (λ vacío en norma 0).

        Raises:
            FloatingPointError: Si algún oráculo devuelve un valor no finito.
        """
        program, cfg = self.program, self.config
        stream = SampleStream(cfg.seed, cfg.run_id)
        gamma = self.step_size
        no_multiplier = np.zeros(program.p)

        self.logger.info(f"Iniciando método proyectado sobre '{program.name}': T={cfg.T}, γ={gamma:.6g}")

        start = np.zeros(program.n) if cfg.x0 is None else cfg.x0
        x = self.proj_Phi(program.project_X0(start))
        x_sum = np.zeros(program.n)
        records = []

        for t in range(cfg.T):
            xi = program.sample(stream.generator(t))
            f_t = float(program.eval_F(x, xi))
            g_t = np.asarray(program.eval_G(x, xi), dtype=float)
            v0 = np.asarray(program.subgrad_F(x, xi), dtype=float)
            require_finite(f_t, "F(xʲ,ξ_j)", t)
            require_finite(g_t, "G(xʲ,ξ_j)", t)
            require_finite(v0, "v₀(xʲ,ξ_j)", t)

            f_cmp = g_cmp = None
            if cfg.comparator is not None:
                f_cmp = float(program.eval_F(cfg.comparator, xi))
                g_cmp = np.asarray(program.eval_G(cfg.comparator, xi), dtype=float)
                require_finite(f_cmp, "F(x_cmp,ξ_j)", t)
                require_finite(g_cmp, "G(x_cmp,ξ_j)", t)

            x_next = self.proj_Phi(x - gamma * v0)
            records.append(StepRecord(
                t=t,
                x=x,
                lam=no_multiplier,
                f_sample=f_t,
                g_sample=g_t,
                lambda_norm=0.0,
                step_norm=float(np.linalg.norm(x_next - x)),
                inner_iters=0,
                inner_residual=0.0,
                inner_converged=True,
                f_comparator=f_cmp,
                g_comparator=g_cmp,
            ))
            x_sum += x
            x = x_next

        trace = RunTrace(
            algorithm="projected_sa",
            program_name=program.name,
            records=records,
            x_bar=x_sum / cfg.T if cfg.averaging else x.copy(),
            final_x=x,
            final_lambda=no_multiplier,
            sigma=0.0,
            alpha=0.0,
            config=cfg.to_dict(program.constants),
        )
        self.logger.info(f"Método proyectado completado: x̄={np.array2string(trace.x_bar, precision=4)}")
        return trace


def run_projected_sa(program, proj_Phi, config):
    """Atajo: construye un ProjectedSASolver y ejecuta la corrida."""
    return ProjectedSASolver(program, proj_Phi, config).run()
