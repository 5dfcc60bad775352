"""Neutral coated ellipsoidal inclusions with a power-law core.

A core obeying ``div(sigma1 |grad u|^(p-2) grad u) = 0`` sits inside a linear
coating of conductivity ``sigma2``; both are confocal ellipsoids.  For a
uniform applied field the coating can be tuned so the outside field is not
disturbed, which fixes an effective conductivity ``sigma*`` of the matrix.
"""

from .assemblage import Assemblage, PlacedInclusion, overlap_test, pack
from .config import ConfigError, ProblemConfig, dumps, load_config, parse_config
from .depolarization import (K_factors, carlson_rd, coating_integral, depolarization,
                             depolarization_factors)
from .effective import (MaterialPair, effective_conductivity, effective_conductivity_p2,
                        effective_conductivity_sphere, effective_tensor, hashin_shtrikman)
from .field import build_solution, gradient, interface_residuals, potential
from .geometry import EllipsoidSpec, Region, classify_point, g, rho_from_cartesian, volume_fraction
from .matching import MatchingProblem, closed_form_root_p2, solve_matching
from .verifier import ConvergenceError, Grid, exterior_uniformity, rasterize, solve_cell

__version__ = "0.1.0"

__all__ = [
    "Assemblage", "PlacedInclusion", "overlap_test", "pack",
    "ConfigError", "ProblemConfig", "dumps", "load_config", "parse_config",
    "K_factors", "carlson_rd", "coating_integral", "depolarization", "depolarization_factors",
    "MaterialPair", "effective_conductivity", "effective_conductivity_p2",
    "effective_conductivity_sphere", "effective_tensor", "hashin_shtrikman",
    "build_solution", "gradient", "interface_residuals", "potential",
    "EllipsoidSpec", "Region", "classify_point", "g", "rho_from_cartesian", "volume_fraction",
    "MatchingProblem", "closed_form_root_p2", "solve_matching",
    "ConvergenceError", "Grid", "exterior_uniformity", "rasterize", "solve_cell",
]
