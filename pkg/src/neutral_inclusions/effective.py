"""Effective conductivity of the coated-ellipsoid assemblage.

For a field of magnitude ``E`` along axis ``j`` the exterior conductivity
that makes the coated inclusion neutral is

    sigma*_j = s2 + s2 theta1 (s - s2) / (s2 + (s - s2) K_j),   s = s1 |A1|^(p-2),

where ``A1 = E - K_j x0`` is the uniform core field.  For ``p != 2`` it
depends on ``E`` through ``A1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .depolarization import K_factors, _axis_index
from .geometry import EllipsoidSpec, g, volume_fraction
from .matching import MatchingProblem, closed_form_root_p2, solve_matching

__all__ = [
    "MaterialPair",
    "EffectiveResult",
    "effective_formula",
    "effective_conductivity",
    "effective_conductivity_p2",
    "effective_conductivity_sphere",
    "effective_tensor",
    "hashin_shtrikman",
    "core_conductivity",
    "p2_root",
    "scale_invariance_check",
    "SingularDenominatorError",
]


class SingularDenominatorError(ArithmeticError):
    pass


@dataclass(frozen=True)
class MaterialPair:
    """Core coefficient ``sigma1`` with exponent ``p``, coating ``sigma2``, field ``E``.

    Only ``sigma1, sigma2 > 0`` and ``p > 1`` are required; the usual
    assumption ``sigma1 > sigma2`` is not needed for existence of the root.
    """

    sigma1: float
    sigma2: float
    p: float = 2.0
    E: float = 1.0

    def __post_init__(self):
        for name in ("sigma1", "sigma2", "p", "E"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.sigma1 <= 0 or self.sigma2 <= 0:
            raise ValueError(f"conductivities must be positive, got {self.sigma1}, {self.sigma2}")
        if self.p <= 1:
            raise ValueError(f"exponent p must exceed 1, got {self.p}")
        if self.E == 0 and self.p < 2:
            raise ValueError("E = 0 with p < 2 is singular: |A1|^(p-2) blows up at A1 = 0")

    def problem(self, K: float) -> MatchingProblem:
        return MatchingProblem(self.sigma1, self.sigma2, self.E, K, self.p)


@dataclass(frozen=True)
class EffectiveResult:
    sigma_star: tuple
    x0_per_axis: tuple
    A1_per_axis: tuple
    K_per_axis: tuple
    theta1: float


def core_conductivity(mat: MaterialPair, A1: float) -> float:
    """Secant conductivity ``sigma1 |A1|^(p-2)`` of the core at field ``A1``."""
    if mat.p == 2:
        return mat.sigma1
    if A1 == 0:
        if mat.p < 2:
            raise SingularDenominatorError("core field vanishes with p < 2")
        return 0.0
    return mat.sigma1 * abs(A1) ** (mat.p - 2)


def effective_formula(sigma_core: float, sigma2: float, theta1: float, K: float) -> float:
    ds = sigma_core - sigma2
    den = sigma2 + ds * K
    if not den > 0 or not math.isfinite(den):
        raise SingularDenominatorError(
            f"denominator {den!r} not positive: sigma_core={sigma_core!r}, "
            f"sigma2={sigma2!r}, theta1={theta1!r}, K={K!r}"
        )
    return sigma2 + sigma2 * theta1 * ds / den


def _axis_solution(spec: EllipsoidSpec, mat: MaterialPair, axis: int):
    j = _axis_index(axis)
    K = float(K_factors(spec)[j])
    theta1 = volume_fraction(spec)
    sol = solve_matching(mat.problem(K), g_core=g(spec.rho_c, spec))
    return K, theta1, sol


def effective_conductivity(spec: EllipsoidSpec, mat: MaterialPair, axis: int = 1,
                           return_solution: bool = False):
    """Effective conductivity along ``axis`` for the nonlinear core.

    Axes 2 and 3 use the same formula with ``d_c2, d_e2`` (or ``d_c3, d_e3``)
    in place of the axis-1 factors.
    """
    K, theta1, sol = _axis_solution(spec, mat, axis)
    value = effective_formula(core_conductivity(mat, sol.A1), mat.sigma2, theta1, K)
    if return_solution:
        return value, sol
    return value


def effective_conductivity_p2(spec: EllipsoidSpec, mat: MaterialPair, axis: int = 1) -> float:
    """Linear-core closed form; no root solve."""
    if mat.p != 2:
        raise ValueError(f"closed form needs p = 2, got p = {mat.p}")
    K = float(K_factors(spec)[_axis_index(axis)])
    return effective_formula(mat.sigma1, mat.sigma2, volume_fraction(spec), K)


def hashin_shtrikman(sigma1: float, sigma2: float, theta1: float) -> float:
    """Coated-sphere value ``s2 + 3 s2 t1 (s1 - s2) / (3 s2 + t2 (s1 - s2))``."""
    theta2 = 1.0 - theta1
    return sigma2 + 3.0 * sigma2 * theta1 * (sigma1 - sigma2) / (3.0 * sigma2 + theta2 * (sigma1 - sigma2))


def effective_conductivity_sphere(r_c: float, r_e: float, mat: MaterialPair,
                                  return_solution: bool = False):
    """Coated sphere: ``K = theta2 / 3`` and no depolarization integrals."""
    if not 0.0 < r_c < r_e:
        raise ValueError(f"need 0 < r_c < r_e, got r_c={r_c}, r_e={r_e}")
    theta1 = (r_c / r_e) ** 3
    theta2 = 1.0 - theta1
    sol = solve_matching(mat.problem(theta2 / 3.0), g_core=r_c**3)
    s = core_conductivity(mat, sol.A1)
    ds = s - mat.sigma2
    den = 3.0 * mat.sigma2 + theta2 * ds
    if not den > 0:
        raise SingularDenominatorError(f"denominator {den!r} not positive for {mat}, theta1={theta1}")
    value = mat.sigma2 + 3.0 * mat.sigma2 * theta1 * ds / den
    if return_solution:
        return value, sol
    return value


def effective_tensor(spec: EllipsoidSpec, mat: MaterialPair) -> EffectiveResult:
    """Per-axis effective conductivities with the matching data behind them."""
    K = K_factors(spec)
    theta1 = volume_fraction(spec)
    gc = g(spec.rho_c, spec)
    sig, x0s, A1s = [], [], []
    for j in range(3):
        sol = solve_matching(mat.problem(float(K[j])), g_core=gc)
        sig.append(effective_formula(core_conductivity(mat, sol.A1), mat.sigma2, theta1, float(K[j])))
        x0s.append(sol.x0)
        A1s.append(sol.A1)
    return EffectiveResult(tuple(sig), tuple(x0s), tuple(A1s), tuple(float(k) for k in K), theta1)


def scale_invariance_check(spec: EllipsoidSpec, mat: MaterialPair, lam: float,
                           rtol: float = 1e-12) -> dict:
    """Compare per-axis ``sigma*`` of the prototype with its copy scaled by ``lam``.

    The scaled copy belongs to the confocal family ``c' = lam c`` with shell
    parameters ``lam^2 rho``, whose semi-axes are exactly ``lam`` times the
    originals.
    """
    if not lam > 0:
        raise ValueError(f"scale factor must be positive, got {lam}")
    base = effective_tensor(spec, mat).sigma_star
    scaled = effective_tensor(spec.scaled(lam), mat).sigma_star
    rel = [abs(a - b) / abs(a) for a, b in zip(base, scaled)]
    return {
        "lambda": lam,
        "sigma_star": base,
        "sigma_star_scaled": scaled,
        "max_rel_diff": max(rel),
        "equal": max(rel) <= rtol,
    }


def p2_root(spec: EllipsoidSpec, mat: MaterialPair, axis: int = 1) -> float:
    K = float(K_factors(spec)[_axis_index(axis)])
    return closed_form_root_p2(mat.problem(K))
