#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Script de instalación para PMMSopt.
Permite instalar la biblioteca y el comando `pmmsopt` como un paquete.
"""

from setuptools import setup, find_packages

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

with open("requirements.txt", "r", encoding="utf-8") as f:
    requirements = [line.split("#")[0].strip() for line in f.read().splitlines()]
    requirements = [line for line in requirements if line]

setup(
    name="pmmsopt",
    version="1.0.0",
    author="PMMSopt Team",
    description="Método proximal de multiplicadores estocástico para programas con restricciones en esperanza",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "tests.*"]),
    py_modules=["cli"],
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires=">=3.8",
    install_requires=requirements,
    entry_points={
        "console_scripts": [
            "pmmsopt=cli:main",
        ],
    },
)
