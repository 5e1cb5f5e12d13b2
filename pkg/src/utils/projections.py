#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Módulo de proyecciones euclídeas elementales.

Contiene las proyecciones sobre el ortante no negativo, cajas y bolas, y las
clases de dominio (BoxDomain, BallDomain) con las que se realiza el conjunto
X₀ de un programa estocástico.
"""

from dataclasses import dataclass

import numpy as np


def project_nonneg(v):
    """
    Proyecta un vector sobre el ortante no negativo, [v]₊.

    Args:
        v (array-like): Vector de dimensión p (p puede ser 0).

    Returns:
        numpy.ndarray: Vector con cada componente igual a max(v_i, 0).
    """
    return np.maximum(np.asarray(v, dtype=float), 0.0)


def project_box(y, lo, hi):
    """
    Proyecta un vector sobre la caja [lo, hi] (recorte por componentes).

    Args:
        y (array-like): Punto a proyectar.
        lo (array-like): Cota inferior por componente.
        hi (array-like): Cota superior por componente.

    Returns:
        numpy.ndarray: Proyección euclídea de y sobre la caja.

    Raises:
        ValueError: Si lo_i > hi_i para algún i.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if np.any(lo > hi):
        raise ValueError(f"Caja vacía: lo={lo} supera a hi={hi} en alguna componente")
    return np.clip(np.asarray(y, dtype=float), lo, hi)


def project_ball(y, center, radius):
    """
    Proyecta un vector sobre la bola cerrada de centro `center` y radio `radius`.

    Args:
        y (array-like): Punto a proyectar.
        center (array-like): Centro de la bola.
        radius (float): Radio, estrictamente positivo.

    Returns:
        numpy.ndarray: y si está dentro de la bola; si no, el punto radial
        center + radius·(y−center)/‖y−center‖.
    """
    if radius <= 0:
        raise ValueError(f"El radio debe ser positivo, se recibió {radius}")
    y = np.asarray(y, dtype=float)
    center = np.asarray(center, dtype=float)
    offset = y - center
    dist = np.linalg.norm(offset)
    if dist <= radius:
        return y.copy()
    return center + radius * offset / dist


@dataclass(frozen=True)
class BoxDomain:
    """
    Conjunto X₀ en forma de caja [lo, hi].
    """

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        if lo.shape != hi.shape:
            raise ValueError("lo y hi deben tener la misma dimensión")
        if np.any(lo > hi):
            raise ValueError(f"Caja vacía: lo={lo}, hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return self.lo.shape[0]

    def project(self, y):
        return np.clip(np.asarray(y, dtype=float), self.lo, self.hi)

    def contains(self, x, tol=0.0):
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))

    def diameter(self):
        return float(np.linalg.norm(self.hi - self.lo))

    def sample_uniform(self, rng):
        """Muestra un punto uniforme sobre la caja."""
        return rng.uniform(self.lo, self.hi)

    def to_dict(self):
        return {"kind": "box", "lo": self.lo.tolist(), "hi": self.hi.tolist()}


@dataclass(frozen=True)
class BallDomain:
    """
    Conjunto X₀ en forma de bola euclídea cerrada.
    """

    center: np.ndarray
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError(f"El radio debe ser positivo, se recibió {self.radius}")
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self):
        return self.center.shape[0]

    def project(self, y):
        return project_ball(y, self.center, self.radius)

    def contains(self, x, tol=0.0):
        return bool(np.linalg.norm(np.asarray(x, dtype=float) - self.center) <= self.radius + tol)

    def diameter(self):
        return 2.0 * self.radius

    def sample_uniform(self, rng):
        """
        Muestra un punto uniforme sobre la bola (dirección gaussiana
        normalizada y radio r·U^{1/n}).
        """
        direction = rng.standard_normal(self.dim)
        norm = np.linalg.norm(direction)
        while norm == 0.0:
            direction = rng.standard_normal(self.dim)
            norm = np.linalg.norm(direction)
        scale = self.radius * rng.uniform() ** (1.0 / self.dim)
        return self.center + scale * direction / norm

    def to_dict(self):
        return {"kind": "ball", "center": self.center.tolist(), "radius": self.radius}
