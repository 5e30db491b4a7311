"""Two-scale and reference particle-in-cell solvers for an axisymmetric beam."""

__version__ = "0.1.0"
