"""Confocal ellipsoidal coordinates for a coated ellipsoid.

A point ``x`` lies on the confocal ellipsoid with parameter ``rho`` when

    x1**2/(c1**2 + rho) + x2**2/(c2**2 + rho) + x3**2/(c3**2 + rho) = 1,

so ``rho`` plays the part of a radius.  The core of the prototype inclusion
is ``rho < rho_c``, the coating ``rho_c < rho < rho_e`` and the surrounding
matrix ``rho > rho_e``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

__all__ = [
    "EllipsoidSpec",
    "EllipsoidalPoint",
    "Region",
    "g",
    "semi_axes",
    "volume_fraction",
    "rho_from_cartesian",
    "ellipsoidal_from_cartesian",
    "cartesian_from_ellipsoidal",
    "classify_point",
    "inside_ellipsoid",
]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class EllipsoidSpec:
    """One coated prototype: confocal constants and the two shell parameters."""

    c1: float
    c2: float
    c3: float
    rho_c: float
    rho_e: float

    def __post_init__(self):
        for name in ("c1", "c2", "c3", "rho_c", "rho_e"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if min(self.c1, self.c2, self.c3) <= 0.0:
            raise ValueError(f"confocal constants must be positive, got {self.c}")
        if not 0.0 < self.rho_c < self.rho_e:
            raise ValueError(
                f"need 0 < rho_c < rho_e, got rho_c={self.rho_c}, rho_e={self.rho_e}"
            )

    @property
    def c(self) -> np.ndarray:
        return np.array([self.c1, self.c2, self.c3])

    @property
    def a(self) -> np.ndarray:
        """Squared confocal constants ``c_j**2``."""
        return self.c**2

    @property
    def is_sphere(self) -> bool:
        return self.c1 == self.c2 == self.c3

    @property
    def is_ordered(self) -> bool:
        """True when ``c1 < c2 < c3`` so the full (rho, mu, nu) chart exists."""
        return self.c1 < self.c2 < self.c3

    @property
    def core_axes(self) -> np.ndarray:
        return semi_axes(self.rho_c, self)

    @property
    def exterior_axes(self) -> np.ndarray:
        return semi_axes(self.rho_e, self)

    @property
    def theta1(self) -> float:
        return volume_fraction(self)

    def scaled(self, lam: float) -> "EllipsoidSpec":
        """Similar copy with every semi-axis multiplied by ``lam``."""
        if not lam > 0:
            raise ValueError(f"scale factor must be positive, got {lam}")
        return EllipsoidSpec(
            lam * self.c1, lam * self.c2, lam * self.c3,
            lam**2 * self.rho_c, lam**2 * self.rho_e,
        )

    @classmethod
    def from_sphere_radii(cls, r_c: float, r_e: float) -> "EllipsoidSpec":
        """Coated sphere with core radius ``r_c`` and outer radius ``r_e``."""
        if not 0.0 < r_c < r_e:
            raise ValueError(f"need 0 < r_c < r_e, got r_c={r_c}, r_e={r_e}")
        c = r_c / math.sqrt(2.0)
        return cls(c, c, c, r_c**2 - c**2, r_e**2 - c**2)

    @classmethod
    def from_volume_fraction(cls, exterior_axes, theta1: float) -> "EllipsoidSpec":
        """Build the confocal family for given outer semi-axes and core fraction.

        The confocal family of an ellipsoid is fixed by its shape, so the core
        is determined by ``theta1`` alone; only the offset of ``rho`` is free.
        """
        le = np.asarray(exterior_axes, dtype=float)
        if le.shape != (3,) or np.any(le <= 0) or not np.all(np.isfinite(le)):
            raise ValueError(f"exterior semi-axes must be three positive lengths, got {exterior_axes}")
        if not 0.0 < theta1 < 1.0:
            raise ValueError(f"volume fraction must lie in (0, 1), got {theta1}")
        le2 = le**2
        lmin2 = le2.min()

        # core semi-axes are sqrt(le2 - delta); find delta from the volume ratio
        def excess(delta):
            return 0.5 * np.sum(np.log1p(-delta / le2)) - math.log(theta1)

        delta = optimize.brentq(excess, 0.0, lmin2 * (1.0 - 1e-15), xtol=1e-300, rtol=4 * _EPS)
        rho_e = 0.5 * (delta + lmin2)
        c = np.sqrt(le2 - rho_e)
        return cls(c[0], c[1], c[2], rho_e - delta, rho_e)


@dataclass(frozen=True)
class EllipsoidalPoint:
    """Ellipsoidal coordinates plus the octant signs of the Cartesian point."""

    rho: float
    mu: float
    nu: float
    octant: tuple = (1, 1, 1)

    def check(self, spec: EllipsoidSpec) -> None:
        a1, a2, a3 = spec.a
        if not (self.rho > -a1 > self.mu > -a2 > self.nu > -a3):
            raise ValueError(
                "coordinates violate rho > -c1^2 > mu > -c2^2 > nu > -c3^2: "
                f"({self.rho}, {self.mu}, {self.nu}) with c^2={spec.a}"
            )
        if any(s not in (1, -1) for s in self.octant):
            raise ValueError(f"octant signs must be +1 or -1, got {self.octant}")


class Region(enum.Enum):
    CORE = "core"
    COATING = "coating"
    EXTERIOR = "exterior"
    CORE_INTERFACE = "core_interface"
    EXTERIOR_INTERFACE = "exterior_interface"


def g(t, spec: EllipsoidSpec):
    """``sqrt((c1^2+t)(c2^2+t)(c3^2+t))``; works on scalars or arrays."""
    t = np.asarray(t, dtype=float)
    f = spec.a.reshape((3,) + (1,) * t.ndim) + t
    if np.any(f <= 0):
        raise ValueError(f"g(t) needs t > -min(c_j^2) = {-spec.a.min()}")
    out = np.sqrt(f[0] * f[1] * f[2])
    return float(out) if out.ndim == 0 else out


def semi_axes(rho: float, spec: EllipsoidSpec) -> np.ndarray:
    """Semi-axes ``sqrt(c_j^2 + rho)`` of the confocal ellipsoid ``rho``."""
    if rho < 0:
        raise ValueError(f"shell parameter must be non-negative, got {rho}")
    return np.sqrt(spec.a + rho)


def volume_fraction(spec: EllipsoidSpec) -> float:
    """Core volume fraction, computed from semi-axes and checked against g."""
    theta_axes = float(np.prod(spec.core_axes / spec.exterior_axes))
    theta_g = g(spec.rho_c, spec) / g(spec.rho_e, spec)
    if abs(theta_axes - theta_g) > 1e-12 * theta_g:
        raise ArithmeticError(f"volume fraction mismatch: {theta_axes} vs {theta_g}")
    return theta_axes


def _cubic_roots(x2: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Roots (descending) of prod(a_j + t) - sum_j x_j^2 prod_{k!=j}(a_k + t).

    ``x2`` has shape (3, m).  Uses the trigonometric form for three real roots.
    """
    a1, a2, a3 = a
    y1, y2, y3 = x2
    b = a1 + a2 + a3 - (y1 + y2 + y3)
    c = a1 * a2 + a1 * a3 + a2 * a3 - y1 * (a2 + a3) - y2 * (a1 + a3) - y3 * (a1 + a2)
    d = a1 * a2 * a3 - y1 * a2 * a3 - y2 * a1 * a3 - y3 * a1 * a2
    p = c - b * b / 3.0
    q = 2.0 * b**3 / 27.0 - b * c / 3.0 + d
    shift = -b / 3.0
    m = np.sqrt(np.maximum(-p / 3.0, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        arg = np.where(m > 0, -q / (2.0 * np.where(m > 0, m, 1.0) ** 3), 0.0)
    phi = np.arccos(np.clip(arg, -1.0, 1.0)) / 3.0
    roots = np.stack([
        shift + 2 * m * np.cos(phi),
        shift + 2 * m * np.cos(phi - 2 * np.pi / 3),
        shift + 2 * m * np.cos(phi + 2 * np.pi / 3),
    ])
    return -np.sort(-roots, axis=0)


def _quadric_terms(x2, a, t):
    """Terms x_j^2/(a_j + t) with 0 where x_j = 0 (avoids 0/0 on axes)."""
    den = a[:, None] + t[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(x2 == 0, 0.0, x2 / den), np.where(x2 == 0, 0.0, x2 / den**2)


def _polish(x2, a, t, lo, hi, maxiter=200):
    """Safeguarded Newton for sum x_j^2/(a_j+t) = 1 on brackets (lo, hi).

    The left-hand side is strictly decreasing in t on each bracket.
    """
    t = np.clip(t, lo, hi)
    lo = lo.copy()
    hi = hi.copy()
    active = hi > lo
    for _ in range(maxiter):
        if not active.any():
            break
        terms, dterms = _quadric_terms(x2[:, active], a, t[active])
        F = terms.sum(axis=0) - 1.0
        dF = -dterms.sum(axis=0)
        ta, la, ha = t[active], lo[active], hi[active]
        la = np.where(F > 0, ta, la)
        ha = np.where(F < 0, ta, ha)
        with np.errstate(divide="ignore", invalid="ignore"):
            tn = ta - F / dF
        bad = ~np.isfinite(tn) | (tn <= la) | (tn >= ha)
        tn = np.where(bad, 0.5 * (la + ha), tn)
        tn = np.where(F == 0, ta, tn)
        scale = np.maximum(np.abs(tn), a.max())
        done = (np.abs(tn - ta) <= 2 * _EPS * scale) | (F == 0) | (ha - la <= 2 * _EPS * scale)
        t[active], lo[active], hi[active] = tn, la, ha
        idx = np.flatnonzero(active)
        active[idx[done]] = False
    else:
        raise ArithmeticError("ellipsoidal coordinate polish did not converge")
    return t


def rho_from_cartesian(x, spec: EllipsoidSpec):
    """Confocal parameter ``rho`` of the ellipsoid through ``x``.

    ``x`` may be a 3-vector or an array of shape (3, ...).  At the origin the
    limit value ``-min(c_j^2)`` is returned.
    """
    x = np.asarray(x, dtype=float)
    shape = x.shape[1:]
    x2 = (x.reshape(3, -1)) ** 2
    a = spec.a
    s = x2.sum(axis=0)
    if spec.is_sphere:
        rho = s - a[0]
    else:
        lo = np.maximum(-a.min(), s - a.max())
        hi = s - a.min()
        guess = _cubic_roots(x2, a)[0]
        rho = _polish(x2, a, guess, lo, hi)
    rho = rho.reshape(shape)
    return float(rho) if rho.ndim == 0 else rho


def ellipsoidal_from_cartesian(x, spec: EllipsoidSpec) -> EllipsoidalPoint:
    """Full (rho, mu, nu) coordinates; needs ``c1 < c2 < c3``."""
    if not spec.is_ordered:
        raise ValueError("the (rho, mu, nu) chart needs c1 < c2 < c3 strictly")
    x = np.asarray(x, dtype=float).reshape(3)
    x2 = (x**2)[:, None]
    a = spec.a
    r = _cubic_roots(x2, a)[:, 0]
    rho = rho_from_cartesian(x, spec)
    mu = _polish(x2, a, r[1:2].copy(), np.array([-a[1]]), np.array([-a[0]]))[0]
    nu = _polish(x2, a, r[2:3].copy(), np.array([-a[2]]), np.array([-a[1]]))[0]
    octant = tuple(1 if v >= 0 else -1 for v in x)
    return EllipsoidalPoint(float(rho), float(mu), float(nu), octant)


def cartesian_from_ellipsoidal(pt: EllipsoidalPoint, spec: EllipsoidSpec) -> np.ndarray:
    """Invert the chart: ``x_j^2 = prod_t (c_j^2 + t) / prod_{k!=j} (c_j^2 - c_k^2)``."""
    if not spec.is_ordered:
        raise ValueError("the (rho, mu, nu) chart needs c1 < c2 < c3 strictly")
    pt.check(spec)
    a = spec.a
    x = np.empty(3)
    tol = 1e-14 * max(1.0, a[2] + abs(pt.rho))
    for j in range(3):
        k, m = [i for i in range(3) if i != j]
        x2 = (a[j] + pt.rho) * (a[j] + pt.mu) * (a[j] + pt.nu) / ((a[j] - a[k]) * (a[j] - a[m]))
        if x2 < -tol:
            raise ValueError(f"x_{j + 1}^2 = {x2} is negative; coordinates are inconsistent")
        x[j] = pt.octant[j] * math.sqrt(max(x2, 0.0))
    return x


def inside_ellipsoid(x, axes, center=(0.0, 0.0, 0.0)):
    """Boolean mask of points strictly inside an axis-aligned ellipsoid.

    For a confocal ellipsoid ``rho0`` this is equivalent to ``rho(x) < rho0``.
    """
    x = np.asarray(x, dtype=float)
    axes = np.asarray(axes, dtype=float).reshape((3,) + (1,) * (x.ndim - 1))
    center = np.asarray(center, dtype=float).reshape((3,) + (1,) * (x.ndim - 1))
    return np.sum(((x - center) / axes) ** 2, axis=0) < 1.0


def classify_point(x, spec: EllipsoidSpec, tol: float | None = None) -> Region:
    if tol is None:
        tol = 1e-9 * spec.rho_e
    if tol < 0:
        raise ValueError(f"tolerance must be non-negative, got {tol}")
    rho = rho_from_cartesian(x, spec)
    if rho < spec.rho_c - tol:
        return Region.CORE
    if rho <= spec.rho_c + tol:
        return Region.CORE_INTERFACE
    if rho < spec.rho_e - tol:
        return Region.COATING
    if rho <= spec.rho_e + tol:
        return Region.EXTERIOR_INTERFACE
    return Region.EXTERIOR
