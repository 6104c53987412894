"""Stochastic nonlocal water-wave models with exponential integrators."""

from .errors import (
    BlowUpError,
    ConfigurationError,
    InternalError,
    SolverError,
    StochWavesError,
    UsageError,
)
from .integrators import SCHEMES, Trajectory, simulate
from .models import KINDS, Model, ModelSpec, make_model
from .noise import BrownianPath, NoiseSpec, coarsen_path, gammas_from_epsilon, sample_path
from .spectral import Grid, make_grid

__version__ = "0.1.0"

__all__ = [
    "BlowUpError", "BrownianPath", "ConfigurationError", "Grid", "InternalError", "KINDS",
    "Model", "ModelSpec", "NoiseSpec", "SCHEMES", "SolverError", "StochWavesError",
    "Trajectory", "UsageError", "coarsen_path", "gammas_from_epsilon", "make_grid",
    "make_model", "sample_path", "simulate",
]
