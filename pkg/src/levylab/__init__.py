"""Isotropic Lévy flights on the torus and the sphere: generators, spectral
solvers and Monte Carlo estimates for the narrow capture problem."""

__version__ = "0.1.0"
