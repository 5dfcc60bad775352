"""Depolarization factors of ellipsoids and the confocal coating integral.

The factor in direction ``j`` of an ellipsoid with semi-axes ``l1, l2, l3`` is

    d_j = (l1 l2 l3 / 2) * int_0^inf dy / ((l_j^2 + y) sqrt((l1^2+y)(l2^2+y)(l3^2+y)))
        = (l1 l2 l3 / 3) * R_D(l_k^2, l_m^2, l_j^2),

with ``R_D`` Carlson's symmetric elliptic integral of the second kind.  The
main path evaluates ``R_D`` by the duplication algorithm; an adaptive
quadrature path is kept alongside as an independent check.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy import integrate

from .geometry import EllipsoidSpec, g, volume_fraction

__all__ = [
    "DepolarizationTriple",
    "carlson_rd",
    "depolarization",
    "depolarization_quad",
    "coating_integral",
    "coating_integral_quad",
    "K_factor",
    "K_factors",
    "depolarization_factors",
    "tail_integral",
    "MAX_ASPECT_RATIO",
]

MAX_ASPECT_RATIO = 1e4
QUAD_EPSABS = 1e-13
QUAD_EPSREL = 1e-11

_EPS = np.finfo(float).eps


class DepolarizationTriple(NamedTuple):
    d1: float
    d2: float
    d3: float

    @property
    def total(self) -> float:
        return self.d1 + self.d2 + self.d3


def carlson_rd(x, y, z):
    """Carlson's ``R_D(x, y, z) = 3/2 int_0^inf dt / ((t+z) sqrt((t+x)(t+y)(t+z)))``.

    Duplication algorithm (B. C. Carlson, Numer. Algorithms 10, 1995) run to
    double precision.  Broadcasts over array arguments; needs ``x, y >= 0``
    with at most one of them zero, and ``z > 0``.
    """
    x, y, z = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, z)))
    if np.any(x < 0) or np.any(y < 0) or np.any(z <= 0) or np.any(x + y == 0):
        raise ValueError("R_D needs x, y >= 0 (not both zero) and z > 0")
    shape = x.shape
    x, y, z = (np.array(v, dtype=float).reshape(-1) for v in (x, y, z))
    A0 = (x + y + 3.0 * z) / 5.0
    A = A0.copy()
    # error ~ (4^-m Q / A)^6; push it below one rounding unit
    Q = (_EPS / 4.0) ** (-1.0 / 6.0) * np.maximum.reduce([abs(A0 - x), abs(A0 - y), abs(A0 - z)])
    tail = np.zeros_like(A)
    fac = np.ones_like(A)
    active = fac * Q >= np.abs(A)
    for _ in range(100):
        if not active.any():
            break
        xa, ya, za = x[active], y[active], z[active]
        sx, sy, sz = np.sqrt(xa), np.sqrt(ya), np.sqrt(za)
        lam = sx * (sy + sz) + sy * sz
        tail[active] += fac[active] / (sz * (za + lam))
        fac[active] *= 0.25
        x[active] = 0.25 * (xa + lam)
        y[active] = 0.25 * (ya + lam)
        z[active] = 0.25 * (za + lam)
        A[active] = 0.25 * (A[active] + lam)
        active = fac * Q >= np.abs(A)
    else:
        raise ArithmeticError("R_D duplication did not converge")
    out = _rd_finish(x, y, z, A, fac, tail).reshape(shape)
    return float(out) if out.ndim == 0 else out


def _rd_finish(x, y, z, A, fac, tail):
    X = (A - x) / A
    Y = (A - y) / A
    Z = -(X + Y) / 3.0
    XY = X * Y
    Z2 = Z * Z
    E2 = XY - 6.0 * Z2
    E3 = (3.0 * XY - 8.0 * Z2) * Z
    E4 = 3.0 * (XY - Z2) * Z2
    E5 = XY * Z2 * Z
    series = (
        1.0
        - 3.0 * E2 / 14.0
        + E3 / 6.0
        + 9.0 * E2 * E2 / 88.0
        - 3.0 * E4 / 22.0
        - 9.0 * E2 * E3 / 52.0
        + 3.0 * E5 / 26.0
    )
    return fac * series / (A * np.sqrt(A)) + 3.0 * tail


def _normalized_axes(l) -> np.ndarray:
    l = np.asarray(l, dtype=float)
    if l.shape[0] != 3:
        raise ValueError(f"expected three semi-axes, got shape {l.shape}")
    if not np.all(np.isfinite(l)) or np.any(l <= 0):
        raise ValueError(f"semi-axes must be positive and finite, got {l}")
    ratio = l.max(axis=0) / l.min(axis=0)
    if np.any(ratio > MAX_ASPECT_RATIO):
        raise ValueError(
            f"aspect ratio {float(np.max(ratio)):.3g} exceeds {MAX_ASPECT_RATIO:g}; "
            "accuracy is not guaranteed there"
        )
    # power of two near the geometric mean: division is exact, so scaling the
    # axes by any power of two leaves the factors bitwise unchanged
    gm = np.exp2(np.round(np.log2(l).mean(axis=0)))
    return l / gm


def depolarization_factors(axes) -> np.ndarray:
    """Vectorized depolarization factors for semi-axes of shape (3, ...)."""
    l = _normalized_axes(axes)
    sq = l * l
    vol = l[0] * l[1] * l[2]
    d = np.stack([
        vol / 3.0 * carlson_rd(sq[1], sq[2], sq[0]),
        vol / 3.0 * carlson_rd(sq[0], sq[2], sq[1]),
        vol / 3.0 * carlson_rd(sq[0], sq[1], sq[2]),
    ])
    equal = (l[0] == l[1]) & (l[1] == l[2])
    return np.where(equal, 1.0 / 3.0, d)


def depolarization(l1: float, l2: float, l3: float) -> DepolarizationTriple:
    """Depolarization factors of the ellipsoid with semi-axes ``l1, l2, l3``.

    The axes are normalized by their geometric mean first, so the result does
    not depend on the overall size.  A sphere returns exactly 1/3 each.
    """
    d = depolarization_factors(np.array([l1, l2, l3], dtype=float))
    return DepolarizationTriple(float(d[0]), float(d[1]), float(d[2]))


def depolarization_quad(l1: float, l2: float, l3: float,
                        epsabs: float = QUAD_EPSABS, epsrel: float = QUAD_EPSREL) -> DepolarizationTriple:
    """Same factors by adaptive quadrature, after mapping ``[0, inf)`` onto ``[0, 1)``.

    With ``y = L^2 t / (1 - t)`` and ``L`` the largest normalized semi-axis the
    integrand becomes ``L^2 sqrt(1-t) / ((l_j^2 (1-t) + L^2 t) sqrt(prod_k (l_k^2 (1-t) + L^2 t)))``
    which is bounded on the closed interval.
    """
    l = _normalized_axes(np.array([l1, l2, l3], dtype=float))
    sq = l * l
    L2 = sq.max()
    vol = l[0] * l[1] * l[2]
    # the integrand varies on the scale t ~ l_min^2 / L^2
    breaks = sorted({float(s / (s + L2)) for s in sq if s < L2})

    def integrand(t, j):
        u = 1.0 - t
        m = sq * u + L2 * t
        return L2 * math.sqrt(u) / (m[j] * math.sqrt(m[0] * m[1] * m[2]))

    out = []
    for j in range(3):
        val, _ = integrate.quad(integrand, 0.0, 1.0, args=(j,), epsabs=epsabs, epsrel=epsrel,
                                limit=500, points=breaks or None)
        out.append(0.5 * vol * val)
    return DepolarizationTriple(*out)


def tail_integral(rho, spec: EllipsoidSpec, axis: int = 1):
    """``int_rho^inf ds / ((c_j^2 + s) g(s)) = (2/3) R_D(c_k^2+rho, c_m^2+rho, c_j^2+rho)``."""
    j = _axis_index(axis)
    k, m = [i for i in range(3) if i != j]
    a = spec.a
    rho = np.asarray(rho, dtype=float)
    return 2.0 / 3.0 * carlson_rd(a[k] + rho, a[m] + rho, a[j] + rho)


def coating_integral_quad(spec: EllipsoidSpec, axis: int = 1, rho_lo: float | None = None,
                          rho_hi: float | None = None) -> float:
    """Direct adaptive quadrature of ``int ds / ((c_j^2+s)^{3/2} prod_{k!=j} (c_k^2+s)^{1/2})``."""
    j = _axis_index(axis)
    a = spec.a
    lo = spec.rho_c if rho_lo is None else rho_lo
    hi = spec.rho_e if rho_hi is None else rho_hi
    if hi == lo:
        return 0.0

    def integrand(s):
        return 1.0 / ((a[j] + s) * math.sqrt((a[0] + s) * (a[1] + s) * (a[2] + s)))

    val, _ = integrate.quad(integrand, lo, hi, epsabs=0.0, epsrel=1e-13, limit=200)
    return val


def coating_integral(spec: EllipsoidSpec, axis: int = 1, check: bool = True) -> float:
    """Coating integral from ``rho_c`` to ``rho_e`` via depolarization factors.

    Returns ``2 d_cj / g(rho_c) - 2 d_ej / g(rho_e)``.  With ``check`` the value
    is compared with direct quadrature and must agree to 1e-9 relative.
    """
    j = _axis_index(axis)
    d_c = depolarization(*spec.core_axes)[j]
    d_e = depolarization(*spec.exterior_axes)[j]
    value = 2.0 * d_c / g(spec.rho_c, spec) - 2.0 * d_e / g(spec.rho_e, spec)
    if check:
        ref = coating_integral_quad(spec, axis)
        if abs(value - ref) > 1e-9 * abs(ref):
            raise ArithmeticError(f"coating integral mismatch: identity {value!r}, quadrature {ref!r}")
    return value


def K_factors(spec: EllipsoidSpec) -> np.ndarray:
    """``K_j = d_cj - theta1 d_ej`` for all three axes."""
    theta1 = volume_fraction(spec)
    d_c = np.array(depolarization(*spec.core_axes))
    d_e = np.array(depolarization(*spec.exterior_axes))
    K = d_c - theta1 * d_e
    theta2 = 1.0 - theta1
    if np.any(K <= 0) or np.any(K >= theta2):
        raise ArithmeticError(f"K factors {K} fall outside (0, theta2={theta2}); numerical breakdown")
    return K


def K_factor(spec: EllipsoidSpec, axis: int = 1) -> float:
    """Scale-free geometric constant of the matching equation, in ``(0, theta2)``."""
    return float(K_factors(spec)[_axis_index(axis)])


def _axis_index(axis: int) -> int:
    if axis not in (1, 2, 3):
        raise ValueError(f"axis must be 1, 2 or 3, got {axis!r}")
    return axis - 1
