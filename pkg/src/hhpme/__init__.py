"""Radial finite-volume laboratory for porous-medium diffusion with a
singular Hardy-Henon reaction term, plus self-similar profile solvers
and quantitative diagnostics."""

from . import diagnostics, profiles, radial, regimes, solver  # noqa: F401
from .radial import RadialField, RadialGrid  # noqa: F401
from .regimes import ExponentTriple, classify, derive, validate  # noqa: F401
from .solver import Caps, eta_family, make_problem, run  # noqa: F401

__version__ = "0.1.0"
