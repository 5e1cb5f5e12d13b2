#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Calculadoras en forma cerrada de las constantes y cotas de PMMSopt.

Incluye las constantes κ₀…κ₄, κ_*, κ_c y κ_o, la cota de deriva del
multiplicador ϑ(σ,α,s) y sus niveles ψ y φ, el umbral de cola de los
procesos con deriva, las cotas de alta probabilidad π(T,η) y β(T,η), las
tasas ω_c(T) y ω_o(T), y el diagnóstico de deriva sobre una traza.

Todos los logaritmos son naturales. Las cotas de cola se evalúan con
log(1/η) explícito para que η = e^{−T^{1/4}} sea representable aunque
e^{−T^{1/4}} no lo sea en coma flotante.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger('PMMSopt.Bounds')

_ROUNDING = 1e-12


@dataclass(frozen=True)
class BoundConstants:
    """Constantes derivadas de un ConstantsBundle (κ₂ siempre vale 0)."""

    kappa0: float
    kappa1: float
    kappa2: float
    kappa3: float
    kappa4: float
    kappa_star: float
    kappa_c: float
    kappa_o: float

    def to_dict(self):
        return {
            "kappa0": self.kappa0,
            "kappa1": self.kappa1,
            "kappa2": self.kappa2,
            "kappa3": self.kappa3,
            "kappa4": self.kappa4,
            "kappa_star": self.kappa_star,
            "kappa_c": self.kappa_c,
            "kappa_o": self.kappa_o,
        }


def _check_positive(**values):
    for name, value in values.items():
        if not value > 0:
            raise ValueError(f"{name} debe ser positivo, se recibió {value}")


def _check_probability(name, value):
    if not 0.0 < value < 1.0:
        raise ValueError(f"{name} debe pertenecer a (0, 1), se recibió {value}")


def _log_term(constants):
    """(8ν_g²/ε₀)·log(32ν_g²/ε₀²)."""
    nu_g, eps0 = constants.nu_g, constants.eps0
    return (8.0 * nu_g ** 2 / eps0) * math.log(32.0 * nu_g ** 2 / eps0 ** 2)


def _kappa_core(constants):
    nu_f, nu_g, eps0, D0 = constants.nu_f, constants.nu_g, constants.eps0, constants.D0
    kappa0 = 2.0 * nu_f / eps0
    kappa1 = D0 ** 2 / eps0
    kappa3 = nu_g ** 2 / eps0 - nu_g
    kappa4 = 2.0 * nu_g + eps0 / 2.0 + _log_term(constants)
    return kappa0, kappa1, 0.0, kappa3, kappa4


def kappa_constants(constants, p):
    """
    Calcula κ₀…κ₄, κ_*, κ_c y κ_o.

    Args:
        constants (ConstantsBundle): Constantes del problema.
        p (int): Número de restricciones (≥ 1).

    Returns:
        BoundConstants: Constantes derivadas. κ₃ puede ser negativa si ν_g < ε₀.

    Raises:
        ValueError: Si p = 0 (sin restricciones no hay constantes de Slater).
    """
    if p < 1:
        raise ValueError("Las constantes basadas en Slater requieren p ≥ 1")
    kappa0, kappa1, kappa2, kappa3, kappa4 = _kappa_core(constants)
    kappa_star = kappa0 + kappa1 + kappa3 + kappa4
    kf, kg = constants.kappa_f, constants.kappa_g
    kappa_c = kappa_star + 4.0 * kg * kf + 2.0 * math.sqrt(p) * (kappa_star + constants.nu_g) * kg ** 2
    kappa_o = (kf ** 2 + constants.D0 ** 2 + constants.nu_g ** 2) / 2.0
    return BoundConstants(kappa0, kappa1, kappa2, kappa3, kappa4, kappa_star, kappa_c, kappa_o)


def theta_drift(constants, sigma, alpha, s):
    """
    Umbral de deriva ϑ(σ,α,s) = ε₀σs/2 + ν_gσ(s−1) + αD₀²/(ε₀s) + 2ν_f/ε₀ + σν_g²/ε₀.
    """
    _check_positive(sigma=sigma, alpha=alpha)
    if int(s) != s or s < 1:
        raise ValueError(f"La ventana s debe ser un entero ≥ 1, se recibió {s}")
    eps0, nu_g = constants.eps0, constants.nu_g
    return (
        eps0 * sigma * s / 2.0
        + nu_g * sigma * (s - 1)
        + alpha * constants.D0 ** 2 / (eps0 * s)
        + 2.0 * constants.nu_f / eps0
        + sigma * nu_g ** 2 / eps0
    )


def psi_bound(constants, sigma, alpha, s):
    """Cota esperada del multiplicador ψ = ϑ + [ν_g + (8ν_g²/ε₀)log(32ν_g²/ε₀²)]·σs."""
    theta = theta_drift(constants, sigma, alpha, s)
    return theta + (constants.nu_g + _log_term(constants)) * sigma * s


def psi_bound_expanded(constants, sigma, alpha, s):
    """La misma ψ escrita como κ₀ + κ₁α/s + κ₂s + κ₃σ + κ₄σs."""
    _check_positive(sigma=sigma, alpha=alpha, s=s)
    kappa0, kappa1, kappa2, kappa3, kappa4 = _kappa_core(constants)
    return kappa0 + kappa1 * alpha / s + kappa2 * s + kappa3 * sigma + kappa4 * sigma * s


def _phi(constants, sigma, alpha, s, log_inv_mu):
    return psi_bound(constants, sigma, alpha, s) + (
        8.0 * constants.nu_g ** 2 / constants.eps0
    ) * log_inv_mu * sigma * s


def phi_bound(constants, sigma, alpha, s, mu):
    """
    Nivel de alta probabilidad φ = ψ + (8ν_g²/ε₀)·log(1/μ)·σs.

    Raises:
        ValueError: Si μ ∉ (0, 1).
    """
    _check_probability("mu", mu)
    return _phi(constants, sigma, alpha, s, -math.log(mu))


def multiplier_level(constants, sigma, alpha, s, T, eta):
    """
    Nivel φ(σ,α,s,η/(T+1)): con probabilidad al menos 1−η ningún ‖λᵗ‖,
    t ≤ T, lo supera.
    """
    _check_probability("eta", eta)
    if T < 1:
        raise ValueError(f"El horizonte T debe ser positivo, se recibió {T}")
    return _phi(constants, sigma, alpha, s, math.log(T + 1) - math.log(eta))


@dataclass(frozen=True)
class DriftParams:
    """
    Parámetros de un proceso con deriva: umbral θ, incremento máximo δ_max,
    deriva negativa ζ y ventana t₀.
    """

    theta: float
    delta_max: float
    zeta: float
    t0: int

    def __post_init__(self):
        _check_positive(theta=self.theta, delta_max=self.delta_max, zeta=self.zeta)
        if self.zeta > self.delta_max:
            raise ValueError(f"Se requiere ζ ≤ δ_max, se recibió ζ={self.zeta} > δ_max={self.delta_max}")
        if int(self.t0) != self.t0 or self.t0 < 1:
            raise ValueError(f"t0 debe ser un entero ≥ 1, se recibió {self.t0}")

    @classmethod
    def from_constants(cls, constants, sigma, alpha, s):
        """
        Parámetros del proceso ‖λᵗ‖: θ = ϑ(σ,α,s), δ_max = σν_g, ζ = σε₀/2, t₀ = s.

        Raises:
            ValueError: Si ε₀/2 > ν_g (no se cumple ζ ≤ δ_max).
        """
        if constants.eps0 / 2.0 > constants.nu_g:
            logger.warning(
                f"ε₀/2 = {constants.eps0 / 2.0:.6g} supera ν_g = {constants.nu_g:.6g}: "
                f"no se aplican las cotas de deriva"
            )
            raise ValueError("Las cotas de deriva requieren ε₀/2 ≤ ν_g")
        return cls(
            theta=theta_drift(constants, sigma, alpha, s),
            delta_max=sigma * constants.nu_g,
            zeta=sigma * constants.eps0 / 2.0,
            t0=int(s),
        )


def _drift_base(theta, delta_max, zeta, t0):
    return theta + t0 * delta_max + t0 * (4.0 * delta_max ** 2 / zeta) * math.log(8.0 * delta_max ** 2 / zeta ** 2)


def drift_expectation_bound(params):
    """Cota de E[Z(t)]: θ + t₀δ_max + t₀(4δ_max²/ζ)·log(8δ_max²/ζ²)."""
    return _drift_base(params.theta, params.delta_max, params.zeta, params.t0)


def drift_tail_z(theta, delta_max, zeta, t0, mu):
    """
    Umbral z con Pr{Z(t) ≥ z} ≤ μ:
    z = θ + t₀δ_max + t₀(4δ_max²/ζ)·log(8δ_max²/ζ²) + t₀(4δ_max²/ζ)·log(1/μ).

    Raises:
        ValueError: Si ζ > δ_max, μ ∉ (0,1) o algún parámetro no es válido.
    """
    params = DriftParams(theta, delta_max, zeta, t0)
    _check_probability("mu", mu)
    return drift_expectation_bound(params) + params.t0 * (4.0 * delta_max ** 2 / zeta) * (-math.log(mu))


def _pi(constants, p, T, log_inv_eta):
    k = kappa_constants(constants, p)
    kg, root_p, root_T = constants.kappa_g, math.sqrt(p), math.sqrt(T)
    factor = 1.0 + 2.0 * root_p * kg ** 2
    return (
        k.kappa3 * factor
        + 2.0 * root_p * constants.nu_g * kg ** 2
        + (factor * (k.kappa0 + k.kappa1 + k.kappa4) + 4.0 * kg * constants.kappa_f) * root_T
        + 8.0 * factor * (constants.nu_g ** 2 / constants.eps0) * root_T * (math.log(T + 1) + log_inv_eta)
    )


def _beta(constants, T, log_inv_eta):
    k0, k1, _, k3, k4 = _kappa_core(constants)
    nu_g, root_T = constants.nu_g, math.sqrt(T)
    bracket = (
        (k0 + k1 + k4) * root_T
        + k3
        + (8.0 * nu_g ** 2 / constants.eps0) * root_T * (math.log(2.0 * T) + log_inv_eta)
    )
    return (
        (constants.kappa_f ** 2 + nu_g ** 2) / 2.0 * root_T
        + constants.D0 ** 2 / 2.0 * root_T
        + math.sqrt(2.0) * nu_g * math.sqrt(math.log(2.0) + log_inv_eta) * bracket
    )


def _check_horizon(T):
    if T < 1:
        raise ValueError(f"El horizonte T debe ser ≥ 1, se recibió {T}")


def pi_bound(constants, p, T, eta):
    """
    Cota de alta probabilidad de la violación acumulada π(T,η).

    Args:
        constants (ConstantsBundle): Constantes del problema.
        p (int): Número de restricciones (≥ 1).
        T (int): Horizonte.
        eta (float): Probabilidad de fallo en (0, 1).

    Returns:
        float: π(T,η).
    """
    _check_horizon(T)
    _check_probability("eta", eta)
    return _pi(constants, p, T, -math.log(eta))


def beta_bound(constants, T, eta):
    """Cota de alta probabilidad del regret de objetivo β(T,η)."""
    _check_horizon(T)
    _check_probability("eta", eta)
    return _beta(constants, T, -math.log(eta))


def omega_c(constants, p, T):
    """ω_c(T) = π(T, e^{−T^{1/4}})/T."""
    _check_horizon(T)
    return _pi(constants, p, T, T ** 0.25) / T


def omega_o(constants, T):
    """ω_o(T) = β(T, e^{−T^{1/4}})/T."""
    _check_horizon(T)
    return _beta(constants, T, T ** 0.25) / T


def omega_c_leading(constants, p):
    """Límite de ω_c(T)·T^{1/4}: 8(1+2√p·κ_g²)ν_g²/ε₀."""
    return 8.0 * (1.0 + 2.0 * math.sqrt(p) * constants.kappa_g ** 2) * constants.nu_g ** 2 / constants.eps0


def omega_o_leading(constants):
    """Límite de ω_o(T)·T^{1/8}: 8√2·ν_g³/ε₀."""
    return 8.0 * math.sqrt(2.0) * constants.nu_g ** 3 / constants.eps0


def tail_confidence(T):
    """Probabilidad 1 − e^{−T^{1/4}} con la que se cumplen ω_c y ω_o."""
    return -math.expm1(-(T ** 0.25))


def violation_sum_bound(constants, p, sigma, alpha, T, lambda_T_i, lambda_norm_sum):
    """
    Cota de Σ_{t<T} G_i(xᵗ,ξ_t) en función de λ_i^T y Σ_{t<T}‖λᵗ‖:

        λ_i^T/σ + [2κ_gκ_f·T + √p·κ_g²·Σ‖λᵗ‖ + √p·ν_g·κ_g²·σ·T] / (2α − pκ_g²σ)
    """
    kg = constants.kappa_g
    denominator = 2.0 * alpha - p * kg ** 2 * sigma
    if denominator <= 0:
        raise ValueError(f"Se requiere 2α − pκ_g²σ > 0, se obtuvo {denominator}")
    root_p = math.sqrt(p)
    numerator = (
        2.0 * kg * constants.kappa_f * T
        + root_p * kg ** 2 * lambda_norm_sum
        + root_p * constants.nu_g * kg ** 2 * sigma * T
    )
    return lambda_T_i / sigma + numerator / denominator


def objective_certificate(constants, sigma, alpha, T, multiplier_comparator_sum):
    """
    Términos aditivos del certificado de objetivo frente a un x ∈ X₀:
    κ_f²T/(2α) + αD₀²/2 + σν_g²T/2 + Σ⟨λᵗ, G(x,ξ_t)⟩.
    """
    _check_positive(sigma=sigma, alpha=alpha)
    return (
        constants.kappa_f ** 2 * T / (2.0 * alpha)
        + alpha * constants.D0 ** 2 / 2.0
        + sigma * constants.nu_g ** 2 * T / 2.0
        + multiplier_comparator_sum
    )


def default_window(T):
    """Ventana s = ⌈√T⌉ calculada en aritmética entera."""
    T = int(T)
    _check_horizon(T)
    s = math.isqrt(T)
    return s if s * s == T else s + 1


def bounds_summary(constants, p, T, eta):
    """
    Todas las constantes y cotas de un horizonte en un diccionario,
    con σ = T^{−1/2}, α = T^{1/2} y s = ⌈√T⌉.
    """
    sigma, alpha, s = 1.0 / math.sqrt(T), math.sqrt(T), default_window(T)
    k = kappa_constants(constants, p)
    summary = {
        "T": int(T),
        "eta": eta,
        "p": int(p),
        "sigma": sigma,
        "alpha": alpha,
        "s": s,
        "kappa": k.to_dict(),
        "theta": theta_drift(constants, sigma, alpha, s),
        "psi": psi_bound(constants, sigma, alpha, s),
        "phi": phi_bound(constants, sigma, alpha, s, eta),
        "multiplier_level": multiplier_level(constants, sigma, alpha, s, T, eta),
        "expected_violation_bound": k.kappa_c * math.sqrt(T),
        "expected_regret_bound": k.kappa_o * math.sqrt(T),
        "pi": pi_bound(constants, p, T, eta),
        "beta": beta_bound(constants, T, eta),
        "omega_c": omega_c(constants, p, T),
        "omega_o": omega_o(constants, T),
        "omega_c_leading": omega_c_leading(constants, p),
        "omega_o_leading": omega_o_leading(constants),
        "tail_confidence": tail_confidence(T),
    }
    if constants.eps0 / 2.0 <= constants.nu_g:
        params = DriftParams.from_constants(constants, sigma, alpha, s)
        summary["drift_expectation_bound"] = drift_expectation_bound(params)
    return summary


@dataclass
class DriftReport:
    """
    Diagnóstico de deriva de ‖λᵗ‖ sobre una traza.

    `violations` enumera las iteraciones t con | ‖λ^{t+1}‖ − ‖λᵗ‖ | > σν_g.
    Las medias por ventana son solo orientativas: la deriva condicionada es
    una afirmación sobre esperanzas, no sobre trayectorias.
    """

    window: int
    theta: float
    max_step_change: float
    violations: list
    mean_drift_above: float
    mean_drift_below: float
    windows_above: int
    windows_below: int

    @property
    def passed(self):
        return not self.violations

    def to_dict(self):
        return {
            "window": self.window,
            "theta": self.theta,
            "max_step_change": self.max_step_change,
            "violations": list(self.violations),
            "mean_drift_above": self.mean_drift_above,
            "mean_drift_below": self.mean_drift_below,
            "windows_above": self.windows_above,
            "windows_below": self.windows_below,
        }


def check_drift(trace, sigma, constants, alpha=None, s=None):
    """
    Verifica la cota por paso del multiplicador y resume la deriva por ventanas.

    Args:
        trace (RunTrace): Traza completa de PMMSopt.
        sigma (float): σ de la corrida.
        constants (ConstantsBundle): Constantes del problema.
        alpha (float, opcional): α de la corrida; por defecto el de la traza.
        s (int, opcional): Longitud de ventana; por defecto ⌈√T⌉.

    Returns:
        DriftReport: Violaciones por paso y medias de ‖λ^{t+s}‖ − ‖λᵗ‖
        separadas según ‖λᵗ‖ ≥ ϑ(σ,α,s).
    """
    norms = trace.lambda_norms()
    T = trace.T
    alpha = trace.alpha if alpha is None else alpha
    s = default_window(T) if s is None else int(s)
    theta = theta_drift(constants, sigma, alpha, s)

    changes = np.abs(np.diff(norms))
    limit = sigma * constants.nu_g
    violations = [int(t) for t in np.flatnonzero(changes > limit * (1 + _ROUNDING) + _ROUNDING)]

    above, below = [], []
    for t in range(0, len(norms) - s):
        drift = norms[t + s] - norms[t]
        (above if norms[t] >= theta else below).append(drift)

    report = DriftReport(
        window=s,
        theta=theta,
        max_step_change=float(changes.max()) if changes.size else 0.0,
        violations=violations,
        mean_drift_above=float(np.mean(above)) if above else float("nan"),
        mean_drift_below=float(np.mean(below)) if below else float("nan"),
        windows_above=len(above),
        windows_below=len(below),
    )
    if violations:
        logger.warning(f"Cota por paso del multiplicador violada en {len(violations)} iteraciones")
    return report
