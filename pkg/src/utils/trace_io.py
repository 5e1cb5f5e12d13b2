#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Módulo de lectura y escritura de trazas.

Este módulo contiene la clase TraceIO, que convierte una RunTrace en una
tabla de pandas con las columnas del formato CSV de trazas y la guarda o
recupera del disco. La escritura usa siempre el mismo formato numérico,
de modo que dos corridas idénticas producen ficheros idénticos byte a byte.
"""

import logging
import os

import numpy as np
import pandas as pd

FLOAT_FORMAT = "%.17g"


def trace_columns(p):
    """Columnas del CSV de trazas para p restricciones, en orden."""
    return (
        ["run_id", "seed", "t", "f_sample", "f_comparator"]
        + [f"g_sample_{i + 1}" for i in range(p)]
        + [f"g_comparator_{i + 1}" for i in range(p)]
        + ["lambda_norm", "step_norm", "inner_iters", "inner_flag"]
    )


def trace_filename(algorithm, T, seed):
    return f"{algorithm}_T{int(T)}_seed{int(seed)}.csv"


class TraceIO:
    """
    Utilidades de serialización de trazas.

    Proporciona la conversión RunTrace → DataFrame y la carga y el guardado
    de los CSV de un experimento.
    """

    def __init__(self):
        self.logger = logging.getLogger('PMMSopt.TraceIO')

    def trace_to_frame(self, trace, run_id, seed):
        """
        Convierte una traza en un DataFrame con las columnas del CSV.

        Args:
            trace (RunTrace): Traza a convertir.
            run_id (int): Índice de la corrida en el orden (T, semilla).
            seed (int): Semilla de la corrida.

        Returns:
            pandas.DataFrame: Una fila por iteración.
        """
        T, p = trace.T, trace.p
        data = {
            "run_id": np.full(T, int(run_id), dtype=np.int64),
            "seed": np.full(T, int(seed), dtype=np.int64),
            "t": np.arange(T, dtype=np.int64),
            "f_sample": trace.f_samples(),
            "f_comparator": trace.f_comparators(),
        }
        g_samples = trace.g_samples()
        g_comparators = trace.g_comparators()
        for i in range(p):
            data[f"g_sample_{i + 1}"] = g_samples[:, i]
        for i in range(p):
            data[f"g_comparator_{i + 1}"] = g_comparators[:, i]
        data["lambda_norm"] = trace.lambda_norms()[:-1]
        data["step_norm"] = trace.step_norms()
        data["inner_iters"] = np.array([r.inner_iters for r in trace.records], dtype=np.int64)
        data["inner_flag"] = np.array([0 if r.inner_converged else 1 for r in trace.records], dtype=np.int64)
        return pd.DataFrame(data, columns=trace_columns(p))

    def save_trace(self, trace, path, run_id, seed):
        """
        Guarda una traza como CSV.

        Args:
            trace (RunTrace): Traza a guardar.
            path (str): Ruta del fichero de salida.
            run_id (int): Índice de la corrida.
            seed (int): Semilla de la corrida.

        Returns:
            str: Ruta del fichero escrito.
        """
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        frame = self.trace_to_frame(trace, run_id, seed)
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        self.logger.info(f"Traza guardada en: {path}")
        return path

    def load_trace(self, path):
        """
        Carga un CSV de trazas.

        Args:
            path (str): Ruta del fichero.

        Returns:
            pandas.DataFrame: Tabla con las columnas del CSV.

        Raises:
            FileNotFoundError: Si el fichero no existe.
        """
        if not os.path.exists(path):
            self.logger.error(f"No se encontró la traza en: {path}")
            raise FileNotFoundError(f"No se encontró la traza en: {path}")
        return pd.read_csv(path, float_precision="round_trip")

    @staticmethod
    def has_comparator(frame):
        return "f_comparator" in frame.columns and not frame["f_comparator"].isna().any()
