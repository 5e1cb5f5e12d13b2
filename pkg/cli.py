#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Script de línea de comandos para PMMSopt.

Subcomandos:
    run        ejecuta un experimento descrito en un fichero INI
    aggregate  regenera el informe desde un directorio de trazas
    bounds     imprime las constantes y cotas teóricas de una instancia
    validate   verifica por Monte Carlo las constantes de una instancia
"""

import argparse
import json
import logging
import sys

from src import (
    ExperimentApp,
    ExperimentConfig,
    bounds_summary,
    build_instance,
    validate_constants,
)


def _parse_param(text):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"Parámetro sin '=': {text}")
    key, value = text.split("=", 1)
    try:
        return key.strip(), json.loads(value)
    except ValueError:
        return key.strip(), value.strip()


def parse_arguments(argv=None):
    """
    Analiza los argumentos de línea de comandos.

    Args:
        argv (list, opcional): Argumentos; por defecto sys.argv[1:].

    Returns:
        argparse.Namespace: Objeto con los argumentos analizados.
    """
    parser = argparse.ArgumentParser(
        description="PMMSopt - Método proximal de multiplicadores estocástico",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter
    )
    parser.add_argument('-v', '--verbose', action='store_true',
                        help='Mostrar información detallada del proceso')
    subparsers = parser.add_subparsers(dest='command', required=True)

    run = subparsers.add_parser('run', help='Ejecutar un experimento',
                                formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    run.add_argument('--config', required=True, help='Fichero INI del experimento')
    run.add_argument('--out', default=None, help='Directorio de salida (sustituye al del fichero)')
    run.add_argument('--jobs', type=int, default=1, help='Procesos para las corridas simultáneas')

    aggregate = subparsers.add_parser('aggregate', help='Regenerar el informe desde las trazas',
                                      formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    aggregate.add_argument('--traces', required=True, help='Directorio de trazas de un experimento')

    for name, help_text in (('bounds', 'Imprimir las cotas teóricas'),
                            ('validate', 'Verificar las constantes por Monte Carlo')):
        sub = subparsers.add_parser(name, help=help_text,
                                    formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        sub.add_argument('--instance', required=True, help='Nombre de la instancia')
        sub.add_argument('--param', action='append', type=_parse_param, default=[],
                         metavar='CLAVE=VALOR', help='Parámetro de la instancia (repetible)')
        if name == 'bounds':
            sub.add_argument('--T', type=int, required=True, help='Horizonte')
            sub.add_argument('--eta', type=float, default=0.5, help='Probabilidad de fallo η')
        else:
            sub.add_argument('--samples', type=int, default=10000, help='Número de muestras')
            sub.add_argument('--seed', type=int, default=0, help='Semilla de la verificación')

    return parser.parse_args(argv)


def setup_logging(verbose):
    """
    Configura el nivel de logging según la verbosidad.

    Args:
        verbose (bool): Si es True, se muestra información detallada.
    """
    level = logging.INFO if verbose else logging.WARNING
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )


def _print_json(data):
    print(json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False))


def main(argv=None):
    """
    Función principal del script de línea de comandos.

    Returns:
        int: 0 si todo fue bien, 1 en caso de error.
    """
    args = parse_arguments(argv)
    setup_logging(args.verbose)
    logger = logging.getLogger('PMMSoptCLI')

    try:
        if args.command == 'run':
            config = ExperimentConfig.from_file(args.config, out_dir=args.out)
            app = ExperimentApp(config)
            report = app.run_experiment(jobs=args.jobs)
            logger.info(f"Experimento completado: {len(report.runs)} corridas, informe en {app.report_path}")
            if report.failures:
                logger.error(f"{len(report.failures)} corridas fallidas o sin traza: {report.failures}")
                return 1
            return 0

        if args.command == 'aggregate':
            app = ExperimentApp.from_traces(args.traces)
            app.aggregate_directory(args.traces)
            logger.info(f"Informe regenerado en {app.report_path}")
            return 0

        program, descriptor = build_instance(args.instance, dict(args.param))
        if args.command == 'bounds':
            summary = bounds_summary(program.constants, program.p, args.T, args.eta)
            summary["instance"] = descriptor.to_dict()
            summary["constants"] = program.constants.to_dict()
            _print_json(summary)
            return 0

        report = validate_constants(program, args.samples, seed=args.seed)
        _print_json(report.to_dict())
        return 0 if report.passed else 1

    except Exception as e:
        logger.error(f"Error durante la ejecución: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
