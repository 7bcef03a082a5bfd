"""Asymptotic-preserving solver for one-dimensional radiation MHD."""
from .core import (ConfigurationError, ConvergenceError, InvalidArgumentError, Mesh1D,
                   NondimParams, NumericError, PositivityError, RmhdError, SolverError,
                   derive_regime)
from .quadrature import Quadrature, build_quadrature, moment
from .decomposition import CellRadiation, constraint_norms, decompose, recompose

__version__ = "0.1.0"
