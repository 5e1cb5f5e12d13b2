#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Módulo principal de experimentos de PMMSopt.

Este módulo contiene la clase ExperimentApp, que coordina la ejecución de
un experimento multi-semilla (PMMSopt o el método proyectado sobre una
instancia sintética), guarda una traza CSV por corrida y construye el
informe de regret agregando las trazas leídas del disco, junto con las
cotas teóricas, los ajustes de tasa y las frecuencias de cola.
"""

import configparser
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import NamedTuple, Optional, Tuple

import numpy as np
from scipy import stats

from .core.baseline import BaselineConfig, run_projected_sa
from .core.bounds import (
    beta_bound,
    default_window,
    kappa_constants,
    omega_c,
    omega_o,
    pi_bound,
    psi_bound,
    tail_confidence,
)
from .core.instances import build_instance
from .core.pmmsopt import AlgoConfig, ParameterRule, run_pmmsopt
from .utils.trace_io import TraceIO, trace_filename

SCHEMA_VERSION = 1
ALGORITHMS = ("pmmsopt", "projected_sa")
# Suelo relativo (por unidad de T) de los regrets antes del ajuste log-log
REGRET_FLOOR = 1e-6
QUANTILES = (0.1, 0.5, 0.9)


def _parse_value(text):
    text = text.strip()
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    try:
        return json.loads(text)
    except ValueError:
        return text


def _parse_list(text, cast):
    return tuple(cast(item) for item in str(text).split(",") if item.strip())


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Configuración de un experimento.

    Attributes:
        instance_name (str): Instancia registrada ('scalar_toy', 'affine_qp').
        instance_params (dict): Parámetros de la instancia.
        algorithm (str): 'pmmsopt' o 'projected_sa'.
        horizons (tuple): Horizontes T, estrictamente crecientes.
        seeds (tuple): Semillas de corrida, sin duplicados.
        master_seed (int): Semilla maestra de los flujos de muestras.
        sigma_rule (str): Regla de σ.
        alpha_rule (str): Regla de α.
        sigma (float, opcional): σ explícito.
        alpha (float, opcional): α explícito.
        inner_tol (float): Tolerancia del subproblema.
        inner_max_iter (int): Presupuesto del subproblema.
        etas (tuple): Probabilidades η de las cotas de alta probabilidad.
        step_size (float, opcional): Paso del método proyectado.
        out_dir (str): Directorio de salida.
    """

    instance_name: str
    instance_params: dict = field(default_factory=dict)
    algorithm: str = "pmmsopt"
    horizons: Tuple[int, ...] = (100,)
    seeds: Tuple[int, ...] = (0,)
    master_seed: int = 0
    sigma_rule: str = "inv_sqrt_T"
    alpha_rule: str = "sqrt_T"
    sigma: Optional[float] = None
    alpha: Optional[float] = None
    inner_tol: float = 1e-8
    inner_max_iter: int = 10000
    etas: Tuple[float, ...] = (0.5,)
    step_size: Optional[float] = None
    out_dir: str = "out"

    def __post_init__(self):
        object.__setattr__(self, "horizons", tuple(int(T) for T in self.horizons))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        object.__setattr__(self, "etas", tuple(float(e) for e in self.etas))
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"Algoritmo desconocido '{self.algorithm}'; disponibles: {', '.join(ALGORITHMS)}")
        if not self.horizons:
            raise ValueError("La lista de horizontes está vacía")
        if self.horizons[0] < 1 or any(b <= a for a, b in zip(self.horizons, self.horizons[1:])):
            raise ValueError(f"Los horizontes deben ser positivos y estrictamente crecientes: {self.horizons}")
        if not self.seeds:
            raise ValueError("La lista de semillas está vacía")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError(f"La lista de semillas contiene duplicados: {self.seeds}")
        if any(not 0.0 < eta < 1.0 for eta in self.etas):
            raise ValueError(f"Cada η debe pertenecer a (0, 1): {self.etas}")
        ParameterRule(self.sigma_rule)
        ParameterRule(self.alpha_rule)
        if self.inner_tol <= 0 or self.inner_max_iter < 1:
            raise ValueError("inner_tol debe ser positivo e inner_max_iter al menos 1")

    def run_specs(self):
        """Corridas (run_id, T, semilla) en el orden determinista (T, semilla)."""
        pairs = [(T, seed) for T in self.horizons for seed in self.seeds]
        return [(run_id, T, seed) for run_id, (T, seed) in enumerate(pairs)]

    def to_dict(self):
        return {
            "instance": {"name": self.instance_name, **self.instance_params},
            "algorithm": {
                "name": self.algorithm,
                "horizons": list(self.horizons),
                "seeds": list(self.seeds),
                "master_seed": self.master_seed,
                "sigma_rule": self.sigma_rule,
                "alpha_rule": self.alpha_rule,
                "sigma": self.sigma,
                "alpha": self.alpha,
                "inner_tol": self.inner_tol,
                "inner_max_iter": self.inner_max_iter,
                "etas": list(self.etas),
                "step_size": self.step_size,
            },
        }

    @classmethod
    def from_dict(cls, data, out_dir="out"):
        instance = dict(data["instance"])
        algorithm = dict(data["algorithm"])
        return cls(
            instance_name=instance.pop("name"),
            instance_params=instance,
            algorithm=algorithm.pop("name", "pmmsopt"),
            out_dir=out_dir,
            **algorithm,
        )

    @classmethod
    def from_file(cls, path, out_dir=None):
        """
        Lee un fichero INI con secciones [instance] y [algorithm].

        `seeds` admite un número (`seeds = 20` equivale a 0…19) o una lista
        separada por comas.

        Raises:
            FileNotFoundError: Si el fichero no existe.
            ValueError: Si faltan secciones o algún valor no es válido.
        """
        if not os.path.exists(path):
            raise FileNotFoundError(f"No se encontró el fichero de configuración: {path}")
        parser = configparser.ConfigParser()
        parser.optionxform = str
        parser.read(path, encoding="utf-8")
        for section in ("instance", "algorithm"):
            if not parser.has_section(section):
                raise ValueError(f"Falta la sección [{section}] en {path}")

        instance = {key: _parse_value(value) for key, value in parser.items("instance")}
        if "name" not in instance:
            raise ValueError(f"Falta la clave 'name' en [instance] de {path}")
        section = parser["algorithm"]

        seeds_text = section.get("seeds", "1").strip()
        if "," in seeds_text:
            seeds = _parse_list(seeds_text, int)
        else:
            seeds = tuple(range(int(seeds_text)))

        def optional_float(key):
            return float(section[key]) if key in section and section[key].strip() else None

        return cls(
            instance_name=str(instance.pop("name")),
            instance_params=instance,
            algorithm=section.get("name", "pmmsopt").strip(),
            horizons=_parse_list(section.get("horizons", "100"), int),
            seeds=seeds,
            master_seed=section.getint("master_seed", 0),
            sigma_rule=section.get("sigma_rule", "inv_sqrt_T").strip(),
            alpha_rule=section.get("alpha_rule", "sqrt_T").strip(),
            sigma=optional_float("sigma"),
            alpha=optional_float("alpha"),
            inner_tol=section.getfloat("inner_tol", 1e-8),
            inner_max_iter=section.getint("inner_max_iter", 10000),
            etas=_parse_list(section.get("etas", "0.5"), float),
            step_size=optional_float("step_size"),
            out_dir=out_dir or section.get("out_dir", "out").strip(),
        )


class TailEstimate(NamedTuple):
    fraction: float
    target: float


def rate_fit(points):
    """
    Ajuste por mínimos cuadrados de log(valor) frente a log(T).

    Args:
        points (list): Pares (T, valor) con valor > 0.

    Returns:
        tuple: (pendiente, ordenada, r²).

    Raises:
        ValueError: Con menos de 3 puntos o algún valor no positivo.
    """
    points = list(points)
    if len(points) < 3:
        raise ValueError(f"El ajuste de tasa necesita al menos 3 puntos, se recibieron {len(points)}")
    horizons = np.array([float(T) for T, _ in points])
    values = np.array([float(v) for _, v in points])
    if np.any(values <= 0) or np.any(horizons <= 0):
        raise ValueError("El ajuste log-log requiere T y valores estrictamente positivos")
    fit = stats.linregress(np.log(horizons), np.log(values))
    return float(fit.slope), float(fit.intercept), float(fit.rvalue ** 2)


def empirical_tail(values, bound_fn, T):
    """
    Fracción de corridas cuyo regret normalizado no supera la cota.

    Args:
        values (array-like): Regrets normalizados, uno por corrida (≥ 1).
        bound_fn (callable): T → valor de la cota.
        T (int): Horizonte de las corridas.

    Returns:
        TailEstimate: (fracción, objetivo 1 − e^{−T^{1/4}}).
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("Se necesita al menos una corrida para estimar la cola")
    bound = bound_fn(T)
    return TailEstimate(float(np.mean(values <= bound)), tail_confidence(T))


def _summary(values):
    values = np.asarray(values, dtype=float)
    quantiles = np.quantile(values, QUANTILES)
    return {
        "mean": float(values.mean()),
        "q10": float(quantiles[0]),
        "q50": float(quantiles[1]),
        "q90": float(quantiles[2]),
    }


def _positive_part_mean(raw, T):
    return float(np.mean(np.maximum(np.asarray(raw, dtype=float), REGRET_FLOOR * T) / T))


@dataclass
class RegretReport:
    """
    Informe agregado de un experimento.

    Attributes:
        experiment (dict): Eco de la configuración.
        instance (dict): Descriptor de la instancia (parámetros, x*, f*).
        constants (dict): Constantes de los supuestos.
        runs (list): Regret bruto y normalizado por corrida.
        horizons (list): Estadísticos y cotas por horizonte.
        rate_fits (dict): Ajustes log-log de los regrets normalizados.
        failures (list): Corridas esperadas sin traza en disco, con el error
            de ejecución cuando se conoce.
    """

    experiment: dict
    instance: dict
    constants: dict
    runs: list
    horizons: list
    rate_fits: dict
    failures: list
    schema_version: int = SCHEMA_VERSION

    def to_dict(self):
        return {
            "schema_version": self.schema_version,
            "experiment": self.experiment,
            "instance": self.instance,
            "constants": self.constants,
            "runs": self.runs,
            "horizons": self.horizons,
            "rate_fits": self.rate_fits,
            "failures": self.failures,
            "regret_floor": REGRET_FLOOR,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    def horizon(self, T):
        for entry in self.horizons:
            if entry["T"] == T:
                return entry
        raise KeyError(T)


def run_regrets(frame, p):
    """
    Regret de objetivo y de violación de una traza.

    Returns:
        dict: T, R_obj (None sin comparador), R_cv (lista de p valores) y sus
        versiones normalizadas por T.
    """
    T = len(frame)
    r_cv = [float(frame[f"g_sample_{i + 1}"].sum()) for i in range(p)]
    r_obj = None
    if TraceIO.has_comparator(frame):
        r_obj = float(frame["f_sample"].sum() - frame["f_comparator"].sum())
    return {
        "T": T,
        "R_obj": r_obj,
        "R_obj_normalized": None if r_obj is None else r_obj / T,
        "R_cv": r_cv,
        "R_cv_normalized": [value / T for value in r_cv],
        "flagged_inner_solves": int(frame["inner_flag"].sum()),
    }


def aggregate(frames, program, descriptor, config, run_errors=None):
    """
    Construye el RegretReport a partir de las trazas.

    Args:
        frames (list): Pares ((run_id, T, semilla), DataFrame) en orden (T, semilla).
        program (StochasticProgram): Instancia de las corridas.
        descriptor (InstanceDescriptor): Descriptor con x* y f*.
        config (ExperimentConfig): Configuración del experimento.
        run_errors (dict, opcional): Mensaje de error por run_id de las corridas
            que fallaron al ejecutarse.

    Returns:
        RegretReport: Informe agregado.
    """
    logger = logging.getLogger('PMMSopt.Experiment')
    p = program.p
    constants = program.constants
    present = {spec for spec, _ in frames}
    run_errors = run_errors or {}
    failures = []
    for run_id, T, seed in config.run_specs():
        if (run_id, T, seed) in present:
            continue
        failure = {"run_id": run_id, "T": T, "seed": seed}
        if run_id in run_errors:
            failure["error"] = run_errors[run_id]
        failures.append(failure)

    runs = []
    by_horizon = {T: [] for T in config.horizons}
    lambda_paths = {T: [] for T in config.horizons}
    for (run_id, T, seed), frame in frames:
        entry = run_regrets(frame, p)
        if entry["T"] != T:
            raise ValueError(f"La traza de la corrida {run_id} tiene {entry['T']} registros, se esperaban {T}")
        if entry["R_obj"] is None:
            logger.warning(f"La corrida {run_id} no tiene columnas de comparador: se omite el regret de objetivo")
        entry.update({"run_id": run_id, "seed": seed})
        runs.append(entry)
        by_horizon[T].append(entry)
        lambda_paths[T].append(frame["lambda_norm"].to_numpy())

    bounds_available = p >= 1
    horizons = []
    for T in config.horizons:
        entries = by_horizon[T]
        item = {"T": T, "n_runs": len(entries)}
        if not entries:
            horizons.append(item)
            continue

        objective = [e["R_obj"] for e in entries if e["R_obj"] is not None]
        if objective:
            item["objective"] = {
                "raw": _summary(objective),
                "normalized": _summary([v / T for v in objective]),
                "positive_part_normalized_mean": _positive_part_mean(objective, T),
            }
        item["constraints"] = []
        for i in range(p):
            raw = [e["R_cv"][i] for e in entries]
            item["constraints"].append({
                "raw": _summary(raw),
                "normalized": _summary([v / T for v in raw]),
                "positive_part_normalized_mean": _positive_part_mean(raw, T),
            })
        item["flagged_inner_solves"] = int(sum(e["flagged_inner_solves"] for e in entries))
        item["max_mean_lambda_norm"] = float(np.max(np.mean(np.vstack(lambda_paths[T]), axis=0)))

        if bounds_available:
            kappas = kappa_constants(constants, p)
            root_T = math.sqrt(T)
            s = default_window(T)
            w_c = omega_c(constants, p, T)
            w_o = omega_o(constants, T)
            item["bounds"] = {
                "kappa_star": kappas.kappa_star,
                "expected_regret_bound": kappas.kappa_o * root_T,
                "expected_violation_bound": kappas.kappa_c * root_T,
                "pi": {f"{eta:g}": pi_bound(constants, p, T, eta) for eta in config.etas},
                "beta": {f"{eta:g}": beta_bound(constants, T, eta) for eta in config.etas},
                "omega_c": w_c,
                "omega_o": w_o,
                "psi": psi_bound(constants, 1.0 / root_T, root_T, s),
            }
            tail = {
                "target": tail_confidence(T),
                "constraints": [
                    empirical_tail([e["R_cv_normalized"][i] for e in entries], lambda _: w_c, T).fraction
                    for i in range(p)
                ],
            }
            if objective:
                tail["objective"] = empirical_tail([v / T for v in objective], lambda _: w_o, T).fraction
            item["tail"] = tail
        horizons.append(item)

    rate_fits = {}
    fitted = [h for h in horizons if h["n_runs"] > 0]
    if len(fitted) >= 3:
        if all("objective" in h for h in fitted):
            rate_fits["objective"] = _fit_dict(
                [(h["T"], h["objective"]["positive_part_normalized_mean"]) for h in fitted]
            )
        rate_fits["constraints"] = [
            _fit_dict([(h["T"], h["constraints"][i]["positive_part_normalized_mean"]) for h in fitted])
            for i in range(p)
        ]

    return RegretReport(
        experiment=config.to_dict(),
        instance=descriptor.to_dict(),
        constants=constants.to_dict(),
        runs=runs,
        horizons=horizons,
        rate_fits=rate_fits,
        failures=failures,
    )


def _fit_dict(points):
    slope, intercept, r_squared = rate_fit(points)
    return {"slope": slope, "intercept": intercept, "r_squared": r_squared}


class ExperimentApp:
    """
    Clase principal que coordina un experimento.

    Construye la instancia, lanza las corridas (en paralelo si se pide),
    guarda las trazas y genera el informe a partir de ellas.
    """

    CONFIG_ECHO = "experiment.json"
    REPORT = "report.json"

    def __init__(self, config):
        """
        Inicializa el experimento.

        Args:
            config (ExperimentConfig): Configuración validada.
        """
        self.config = config
        self.logger = logging.getLogger('PMMSopt.Experiment')
        self.trace_io = TraceIO()
        self.program, self.descriptor = build_instance(config.instance_name, config.instance_params)
        self.traces_dir = os.path.join(config.out_dir, "traces")
        self.report_path = os.path.join(config.out_dir, self.REPORT)

    def trace_path(self, T, seed):
        return os.path.join(self.traces_dir, trace_filename(self.config.algorithm, T, seed))

    def run_single(self, T, seed):
        """
        Ejecuta una corrida con el comparador x* de la instancia.

        Args:
            T (int): Horizonte.
            seed (int): Semilla de la corrida (identificador del flujo).

        Returns:
            RunTrace: Traza de la corrida.
        """
        cfg = self.config
        if cfg.algorithm == "projected_sa":
            baseline = BaselineConfig(
                T=T,
                step_size=cfg.step_size,
                seed=cfg.master_seed,
                run_id=seed,
                comparator=self.descriptor.x_star,
            )
            return run_projected_sa(self.program, self.descriptor.project_feasible, baseline)
        algo = AlgoConfig(
            T=T,
            sigma=cfg.sigma,
            alpha=cfg.alpha,
            sigma_rule=cfg.sigma_rule,
            alpha_rule=cfg.alpha_rule,
            inner_tol=cfg.inner_tol,
            inner_max_iter=cfg.inner_max_iter,
            seed=cfg.master_seed,
            run_id=seed,
            comparator=self.descriptor.x_star,
        )
        return run_pmmsopt(self.program, algo)

    def _run_and_save(self, spec):
        run_id, T, seed = spec
        path = self.trace_path(T, seed)
        # Una traza previa con el mismo nombre no debe sobrevivir a un fallo
        if os.path.exists(path):
            os.remove(path)
        try:
            trace = self.run_single(T, seed)
            self.trace_io.save_trace(trace, path, run_id, seed)
            return None
        except Exception as e:
            self.logger.error(f"Error en la corrida {run_id} (T={T}, semilla={seed}): {e}")
            return {"run_id": run_id, "T": T, "seed": seed, "error": str(e)}

    def run_experiment(self, jobs=1):
        """
        Ejecuta todas las corridas y escribe trazas, eco de configuración e informe.

        Con jobs > 1 las corridas se reparten entre procesos; cada proceso
        reconstruye la instancia a partir de la configuración.

        Args:
            jobs (int): Número de corridas simultáneas.

        Returns:
            RegretReport: Informe agregado desde las trazas escritas. Las
            corridas fallidas aparecen en `failures` con su mensaje de error.
        """
        if jobs < 1:
            raise ValueError(f"jobs debe ser al menos 1, se recibió {jobs}")
        os.makedirs(self.traces_dir, exist_ok=True)
        echo_path = os.path.join(self.traces_dir, self.CONFIG_ECHO)
        with open(echo_path, "w", encoding="utf-8") as f:
            f.write(json.dumps(self.config.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n")

        specs = self.config.run_specs()
        self.logger.info(f"Ejecutando {len(specs)} corridas de {self.config.algorithm} con {jobs} procesos")
        if jobs == 1:
            errors = [self._run_and_save(spec) for spec in specs]
        else:
            with ProcessPoolExecutor(max_workers=jobs) as executor:
                errors = list(executor.map(partial(_run_in_worker, type(self), self.config), specs))
        failed = [e for e in errors if e is not None]
        if failed:
            self.logger.warning(f"{len(failed)} corridas fallaron; el resto continuó")

        run_errors = {e["run_id"]: e["error"] for e in failed}
        return self.aggregate_directory(self.traces_dir, run_errors=run_errors)

    def load_frames(self, traces_dir):
        frames = []
        for run_id, T, seed in self.config.run_specs():
            path = os.path.join(traces_dir, trace_filename(self.config.algorithm, T, seed))
            if os.path.exists(path):
                frames.append(((run_id, T, seed), self.trace_io.load_trace(path)))
        return frames

    def aggregate_directory(self, traces_dir, run_errors=None):
        """
        Regenera el informe desde las trazas del directorio, sin volver a ejecutar.

        El informe se escribe en el directorio padre de `traces_dir`.

        Args:
            traces_dir (str): Directorio con las trazas CSV.
            run_errors (dict, opcional): Errores de ejecución por run_id.

        Returns:
            RegretReport: Informe agregado.
        """
        report = aggregate(self.load_frames(traces_dir), self.program, self.descriptor, self.config,
                           run_errors=run_errors)
        report_path = os.path.join(os.path.dirname(os.path.abspath(traces_dir)), self.REPORT)
        with open(report_path, "w", encoding="utf-8") as f:
            f.write(report.to_json())
        self.logger.info(f"Informe guardado en: {report_path}")
        self.report_path = report_path
        return report

    @classmethod
    def from_traces(cls, traces_dir):
        """
        Reconstruye el experimento a partir del eco de configuración de un directorio de trazas.

        Raises:
            FileNotFoundError: Si el directorio o su experiment.json no existen.
        """
        echo_path = os.path.join(traces_dir, cls.CONFIG_ECHO)
        if not os.path.exists(echo_path):
            raise FileNotFoundError(f"No se encontró {cls.CONFIG_ECHO} en: {traces_dir}")
        with open(echo_path, "r", encoding="utf-8") as f:
            data = json.load(f)
        out_dir = os.path.dirname(os.path.abspath(traces_dir))
        return cls(ExperimentConfig.from_dict(data, out_dir=out_dir))


def _run_in_worker(app_class, config, spec):
    """Ejecuta y guarda una corrida dentro de un proceso del pool."""
    return app_class(config)._run_and_save(spec)
