#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Flujos de muestras reproducibles.

Cada iteración t de una corrida obtiene su propio generador contador
(numpy.random.Philox) identificado por (semilla maestra, id de corrida, t).
Así ξ_t no depende de cuántos números consumieron las iteraciones
anteriores y dos algoritmos distintos pueden consumir exactamente la misma
secuencia de muestras.
"""

import numpy as np


class SampleStream:
    """
    Familia de generadores indexada por iteración.

    Args:
        master_seed (int): Semilla maestra del experimento.
        run_id (int): Identificador de la corrida dentro del experimento.
    """

    def __init__(self, master_seed, run_id=0):
        self.master_seed = int(master_seed)
        self.run_id = int(run_id)
        words = np.random.SeedSequence([self.master_seed, self.run_id]).generate_state(2, dtype=np.uint64)
        self._key = (int(words[0]) << 64) | int(words[1])

    def generator(self, t):
        """
        Devuelve el generador de la iteración t.

        Args:
            t (int): Índice de iteración (t ≥ 0).

        Returns:
            numpy.random.Generator: Generador independiente del resto de iteraciones.
        """
        if t < 0:
            raise ValueError(f"La iteración debe ser no negativa, se recibió {t}")
        # t ocupa la tercera palabra del contador; las extracciones de una
        # iteración avanzan solo las palabras bajas
        return np.random.Generator(np.random.Philox(key=self._key, counter=int(t) << 128))

    def __repr__(self):
        return f"SampleStream(master_seed={self.master_seed}, run_id={self.run_id})"
