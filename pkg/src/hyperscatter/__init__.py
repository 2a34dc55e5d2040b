"""Numerical scattering for Schottky groups acting on the hyperbolic plane.

Modules:
    moebius     Moebius maps, boundary charts and exact rational matrices.
    schottky    Schottky data, word enumeration, limit sets, invariant density.
    boundary    Poisson transform and the intertwining Fourier multiplier.
    bgrid       Quadrature grid on the quotient circles.
    scattering  Scattering matrix, continuation, invariant extension, Eisenstein series.
    cohomology  Exact cohomology dimensions of surface groups.
    config, emit, cli, acceptance   Command-line harness.
"""

from .errors import (ConfigError, HyperscatterError, InternalInconsistency, NearSingular,
                     TaskError)
from .moebius import MoebiusMap
from .schottky import SchottkyData

__version__ = "0.1.0"

__all__ = ["ConfigError", "HyperscatterError", "InternalInconsistency", "MoebiusMap",
           "NearSingular", "SchottkyData", "TaskError", "__version__"]
