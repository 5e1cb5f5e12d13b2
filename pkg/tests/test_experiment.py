#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Pruebas del arnés de experimentos y de la agregación de regrets.
"""

import unittest
import os
import sys
import math
import json
import logging
import tempfile
import numpy as np
import pandas as pd

# Añadir directorio raíz al path para importar los módulos
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src import ExperimentApp, ExperimentConfig, empirical_tail, rate_fit
from src.experiment_app import run_regrets
from src.utils.trace_io import trace_columns

# Desactivar logging durante las pruebas
logging.disable(logging.CRITICAL)

SMALL_INI = """\
[instance]
name = scalar_toy
noise_amp = 0.3

[algorithm]
name = {algorithm}
horizons = 20, 40, 80
seeds = 3
master_seed = 5
sigma_rule = explicit
alpha_rule = explicit
sigma = 0.5
alpha = 1.0
etas = 0.5, 0.1
"""


def small_config(out_dir, algorithm="pmmsopt"):
    return ExperimentConfig(
        instance_name="scalar_toy",
        instance_params={"noise_amp": 0.3},
        algorithm=algorithm,
        horizons=(20, 40, 80),
        seeds=(0, 1, 2),
        master_seed=5,
        sigma_rule="explicit",
        alpha_rule="explicit",
        sigma=0.5,
        alpha=1.0,
        etas=(0.5, 0.1),
        out_dir=out_dir,
    )


def read_bytes(path):
    with open(path, "rb") as f:
        return f.read()


class FailingRunApp(ExperimentApp):
    """Experimento cuya corrida (T=40, semilla=1) siempre falla."""

    def run_single(self, T, seed):
        if (T, seed) == (40, 1):
            raise RuntimeError("fallo forzado")
        return super().run_single(T, seed)


class TestExperimentConfig(unittest.TestCase):
    """
    Pruebas de la validación y la lectura de configuraciones.
    """

    def test_run_order(self):
        """Las corridas siguen el orden (T, semilla)."""
        config = small_config("out")
        specs = config.run_specs()
        self.assertEqual(len(specs), 9)
        self.assertEqual(specs[0], (0, 20, 0))
        self.assertEqual(specs[4], (4, 40, 1))
        self.assertEqual(specs[-1], (8, 80, 2))

    def test_invalid_configs(self):
        """Configuraciones inválidas se rechazan."""
        with self.assertRaises(ValueError):
            ExperimentConfig("scalar_toy", horizons=(40, 20))
        with self.assertRaises(ValueError):
            ExperimentConfig("scalar_toy", horizons=())
        with self.assertRaises(ValueError):
            ExperimentConfig("scalar_toy", seeds=())
        with self.assertRaises(ValueError):
            ExperimentConfig("scalar_toy", seeds=(1, 1))
        with self.assertRaises(ValueError):
            ExperimentConfig("scalar_toy", algorithm="adam")
        with self.assertRaises(ValueError):
            ExperimentConfig("scalar_toy", etas=(1.0,))
        with self.assertRaises(ValueError):
            ExperimentConfig("scalar_toy", sigma_rule="cubic")

    def test_from_file(self):
        """La lectura del INI equivale a la configuración construida en código."""
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "small.ini")
            with open(path, "w", encoding="utf-8") as f:
                f.write(SMALL_INI.format(algorithm="pmmsopt"))
            config = ExperimentConfig.from_file(path, out_dir=tmp)
        self.assertEqual(config, small_config(tmp))

    def test_from_file_keeps_parameter_case(self):
        """Las claves de instancia conservan mayúsculas."""
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "affine.ini")
            with open(path, "w", encoding="utf-8") as f:
                f.write("[instance]\nname = affine_qp\nmu = [2.0, 0.0]\nA = [[1.0, 0.0]]\nb = [1.0]\n"
                        "[algorithm]\nseeds = 0, 4\nhorizons = 10\n")
            config = ExperimentConfig.from_file(path)
        self.assertEqual(config.instance_params["A"], [[1.0, 0.0]])
        self.assertEqual(config.seeds, (0, 4))
        self.assertEqual(config.sigma_rule, "inv_sqrt_T")

    def test_from_file_errors(self):
        """Fichero inexistente o incompleto."""
        with self.assertRaises(FileNotFoundError):
            ExperimentConfig.from_file("/nonexistent/experiment.ini")
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "broken.ini")
            with open(path, "w", encoding="utf-8") as f:
                f.write("[instance]\nname = scalar_toy\n")
            with self.assertRaises(ValueError):
                ExperimentConfig.from_file(path)

    def test_dict_round_trip(self):
        """to_dict y from_dict son inversos."""
        config = small_config("out")
        self.assertEqual(ExperimentConfig.from_dict(config.to_dict(), out_dir="out"), config)


class TestRegretHelpers(unittest.TestCase):
    """
    Pruebas de los cálculos de regret, ajuste de tasa y cola empírica.
    """

    def test_run_regrets(self):
        """Regrets brutos y normalizados de una traza."""
        frame = pd.DataFrame({
            "f_sample": [1.0, 2.0, 3.0],
            "f_comparator": [0.0, 0.0, 1.0],
            "g_sample_1": [0.5, -0.5, 1.0],
            "inner_flag": [0, 1, 0],
        })
        entry = run_regrets(frame, 1)
        self.assertEqual(entry["T"], 3)
        self.assertAlmostEqual(entry["R_obj"], 5.0)
        self.assertAlmostEqual(entry["R_obj_normalized"], 5.0 / 3.0)
        self.assertEqual(entry["R_cv"], [1.0])
        self.assertAlmostEqual(entry["R_cv_normalized"][0], 1.0 / 3.0)
        self.assertEqual(entry["flagged_inner_solves"], 1)

    def test_telescoping_and_identical_comparator(self):
        """Violaciones que se cancelan y comparador idéntico dan regret nulo."""
        frame = pd.DataFrame({
            "f_sample": [0.3, -0.2, 0.7, 0.1],
            "f_comparator": [0.3, -0.2, 0.7, 0.1],
            "g_sample_1": [1.0, -1.0, 1.0, -1.0],
            "inner_flag": [0, 0, 0, 0],
        })
        entry = run_regrets(frame, 1)
        self.assertEqual(entry["R_obj"], 0.0)
        self.assertEqual(entry["R_cv"], [0.0])

    def test_run_regrets_without_comparator(self):
        """Sin comparador no hay regret de objetivo."""
        frame = pd.DataFrame({
            "f_sample": [1.0, 2.0],
            "f_comparator": [np.nan, np.nan],
            "g_sample_1": [0.0, 0.0],
            "inner_flag": [0, 0],
        })
        self.assertIsNone(run_regrets(frame, 1)["R_obj"])

    def test_rate_fit(self):
        """Ajuste log-log de potencias exactas y de puntos constantes."""
        slope, intercept, r_squared = rate_fit([(10, 10 ** -0.5), (100, 0.1), (1000, 10 ** -1.5)])
        self.assertAlmostEqual(slope, -0.5, places=10)
        self.assertAlmostEqual(intercept, 0.0, places=10)
        self.assertAlmostEqual(r_squared, 1.0, places=10)
        slope, _, _ = rate_fit([(10, 2.0), (100, 2.0), (1000, 2.0)])
        self.assertAlmostEqual(slope, 0.0, places=12)
        with self.assertRaises(ValueError):
            rate_fit([(10, 1.0), (100, 0.5)])
        with self.assertRaises(ValueError):
            rate_fit([(10, 1.0), (100, 0.0), (1000, 0.1)])

    def test_empirical_tail(self):
        """Fracción empírica bajo la cota."""
        estimate = empirical_tail([0.1, 0.2, 0.3], lambda T: 0.25, 16)
        self.assertAlmostEqual(estimate.fraction, 2.0 / 3.0)
        self.assertAlmostEqual(estimate.target, 1.0 - math.exp(-2.0))
        self.assertEqual(empirical_tail([0.1, 5.0], lambda T: math.inf, 16).fraction, 1.0)
        self.assertEqual(empirical_tail([0.1, 5.0], lambda T: -math.inf, 16).fraction, 0.0)
        with self.assertRaises(ValueError):
            empirical_tail([], lambda T: 1.0, 16)


class TestExperimentApp(unittest.TestCase):
    """
    Pruebas de extremo a extremo del arnés.
    """

    def test_small_experiment(self):
        """Experimento pequeño completo."""
        with tempfile.TemporaryDirectory() as tmp:
            app = ExperimentApp(small_config(tmp))
            report = app.run_experiment()

            self.assertEqual(report.failures, [])
            self.assertEqual(len(report.runs), 9)
            self.assertEqual([h["T"] for h in report.horizons], [20, 40, 80])
            for run in report.runs:
                self.assertAlmostEqual(run["R_cv_normalized"][0], run["R_cv"][0] / run["T"])
                self.assertAlmostEqual(run["R_obj_normalized"], run["R_obj"] / run["T"])
            horizon = report.horizon(40)
            self.assertEqual(horizon["n_runs"], 3)
            self.assertEqual(set(horizon["bounds"]["pi"]), {"0.5", "0.1"})
            self.assertIn("objective", horizon["tail"])
            self.assertIn("objective", report.rate_fits)
            self.assertEqual(len(report.rate_fits["constraints"]), 1)

            self.assertTrue(os.path.exists(os.path.join(tmp, "report.json")))
            self.assertTrue(os.path.exists(os.path.join(tmp, "traces", "experiment.json")))
            frame = pd.read_csv(os.path.join(tmp, "traces", "pmmsopt_T80_seed2.csv"))
            self.assertEqual(list(frame.columns), trace_columns(1))
            self.assertEqual(len(frame), 80)
            self.assertTrue((frame["run_id"] == 8).all())
            with open(os.path.join(tmp, "report.json"), encoding="utf-8") as f:
                self.assertEqual(json.load(f)["schema_version"], 1)

    def test_reproducible_bytes(self):
        """El informe es idéntico entre repeticiones y con varios procesos."""
        with tempfile.TemporaryDirectory() as first, tempfile.TemporaryDirectory() as second, \
                tempfile.TemporaryDirectory() as parallel:
            ExperimentApp(small_config(first)).run_experiment()
            ExperimentApp(small_config(second)).run_experiment()
            ExperimentApp(small_config(parallel)).run_experiment(jobs=2)

            reference = read_bytes(os.path.join(first, "report.json"))
            self.assertEqual(reference, read_bytes(os.path.join(second, "report.json")))
            self.assertEqual(reference, read_bytes(os.path.join(parallel, "report.json")))
            name = "pmmsopt_T40_seed1.csv"
            self.assertEqual(read_bytes(os.path.join(first, "traces", name)),
                             read_bytes(os.path.join(parallel, "traces", name)))

    def test_aggregate_from_traces(self):
        """Agregar desde las trazas reproduce el informe."""
        with tempfile.TemporaryDirectory() as tmp:
            ExperimentApp(small_config(tmp)).run_experiment()
            report_path = os.path.join(tmp, "report.json")
            original = read_bytes(report_path)
            os.remove(report_path)

            traces_dir = os.path.join(tmp, "traces")
            app = ExperimentApp.from_traces(traces_dir)
            app.aggregate_directory(traces_dir)
            self.assertEqual(read_bytes(report_path), original)

    def test_missing_trace_is_reported(self):
        """Una traza ausente aparece en failures."""
        with tempfile.TemporaryDirectory() as tmp:
            app = ExperimentApp(small_config(tmp))
            app.run_experiment()
            os.remove(app.trace_path(40, 1))
            report = app.aggregate_directory(app.traces_dir)
            self.assertEqual(report.failures, [{"run_id": 4, "T": 40, "seed": 1}])
            self.assertEqual(report.horizon(40)["n_runs"], 2)
            self.assertEqual(len(report.runs), 8)

    def test_failed_run_does_not_reuse_stale_trace(self):
        """Una corrida fallida no reutiliza la traza anterior y su error llega al informe."""
        with tempfile.TemporaryDirectory() as tmp:
            ExperimentApp(small_config(tmp)).run_experiment()
            app = FailingRunApp(small_config(tmp))
            stale_path = app.trace_path(40, 1)
            self.assertTrue(os.path.exists(stale_path))

            report = app.run_experiment()
            self.assertFalse(os.path.exists(stale_path))
            self.assertEqual(report.failures, [{"run_id": 4, "T": 40, "seed": 1, "error": "fallo forzado"}])
            self.assertEqual(report.horizon(40)["n_runs"], 2)
            with open(os.path.join(tmp, "report.json"), encoding="utf-8") as f:
                self.assertEqual(json.load(f)["failures"][0]["error"], "fallo forzado")

    def test_failed_run_in_worker_process(self):
        """El error de una corrida en un proceso del pool llega al informe."""
        with tempfile.TemporaryDirectory() as tmp:
            report = FailingRunApp(small_config(tmp)).run_experiment(jobs=2)
            self.assertEqual(report.failures, [{"run_id": 4, "T": 40, "seed": 1, "error": "fallo forzado"}])
            self.assertEqual(len(report.runs), 8)

    def test_projected_baseline(self):
        """El método proyectado también se agrega."""
        with tempfile.TemporaryDirectory() as tmp:
            report = ExperimentApp(small_config(tmp, algorithm="projected_sa")).run_experiment(jobs=3)
            self.assertEqual(report.failures, [])
            self.assertTrue(os.path.exists(os.path.join(tmp, "traces", "projected_sa_T20_seed0.csv")))
            for run in report.runs:
                self.assertGreaterEqual(run["R_obj"], 0.0)

    def test_from_traces_requires_echo(self):
        """from_traces necesita el eco de configuración."""
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(FileNotFoundError):
                ExperimentApp.from_traces(tmp)


if __name__ == '__main__':
    unittest.main()
