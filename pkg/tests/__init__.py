"""
Pruebas unitarias de PMMSopt.

Cada módulo test_<módulo>.py cubre un módulo de src/; test_acceptance.py
agrupa las corridas largas y solo se ejecuta con PMMSOPT_ACCEPTANCE=1.
"""
