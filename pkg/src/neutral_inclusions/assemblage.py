"""Finite assemblages of aligned, scaled copies of one coated ellipsoid.

Copies are placed in the unit cell ``[0, 1]^3`` by greedy random sequential
addition: draw a centre, try scales from a geometric ladder (largest first)
and keep the first one that fits inside the cell without overlapping any
earlier copy.  Every copy is similar to the prototype, so all of them share
its core volume fraction and its K factors.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .depolarization import K_factors
from .effective import MaterialPair
from .geometry import EllipsoidSpec, volume_fraction
from .verifier import ConductivityField, Grid, inside_ellipsoid, rasterize_inclusions

__all__ = [
    "PlacedInclusion",
    "Assemblage",
    "pack",
    "overlap_test",
    "assemblage_to_field",
    "assemblage_exterior_mask",
]


@dataclass(frozen=True)
class PlacedInclusion:
    center: tuple
    scale: float
    prototype: EllipsoidSpec

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @property
    def spec(self) -> EllipsoidSpec:
        """The copy as a confocal family of its own: ``lam c``, ``lam^2 rho``."""
        return self.prototype.scaled(self.scale)

    @property
    def exterior_axes(self) -> np.ndarray:
        return self.scale * self.prototype.exterior_axes

    @property
    def volume(self) -> float:
        return 4.0 / 3.0 * math.pi * float(np.prod(self.exterior_axes))


@dataclass
class Assemblage:
    prototype: EllipsoidSpec
    inclusions: list
    target_fill: float
    materials: MaterialPair | None = None
    stop_reason: str = ""
    seed: int | None = None
    ladder: tuple = field(default_factory=tuple)

    @property
    def fill(self) -> float:
        return sum(inc.volume for inc in self.inclusions)

    @property
    def theta1(self) -> float:
        """Core fraction shared by every copy (similarity leaves it unchanged)."""
        return volume_fraction(self.prototype)

    @property
    def K(self) -> tuple:
        return tuple(float(k) for k in K_factors(self.prototype))

    def to_dict(self) -> dict:
        p = self.prototype
        out = {
            "prototype": {"c": [p.c1, p.c2, p.c3], "rho_c": p.rho_c, "rho_e": p.rho_e},
            "inclusions": [{"center": list(inc.center), "scale": inc.scale} for inc in self.inclusions],
            "fill": self.fill,
            "target_fill": self.target_fill,
            "stop_reason": self.stop_reason,
            "seed": self.seed,
            "theta1": self.theta1,
            "K": list(self.K),
        }
        if self.materials is not None:
            m = self.materials
            out["materials"] = {"sigma1": m.sigma1, "sigma2": m.sigma2, "p": m.p, "E": m.E}
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Assemblage":
        pr = data["prototype"]
        proto = EllipsoidSpec(*pr["c"], pr["rho_c"], pr["rho_e"])
        incs = [PlacedInclusion(tuple(i["center"]), float(i["scale"]), proto) for i in data["inclusions"]]
        mat = MaterialPair(**data["materials"]) if "materials" in data else None
        return cls(proto, incs, float(data.get("target_fill", 0.0)), mat,
                   data.get("stop_reason", ""), data.get("seed"))


def overlap_test(a: PlacedInclusion, b: PlacedInclusion) -> bool:
    """True when the outer ellipsoids of two aligned copies overlap.

    Dividing coordinates by the prototype's outer semi-axes turns both copies
    into spheres of radii ``scale_a`` and ``scale_b``.  Tangent copies do not
    overlap.
    """
    le = a.prototype.exterior_axes
    d = np.linalg.norm((np.asarray(a.center) - np.asarray(b.center)) / le)
    return bool(d < a.scale + b.scale)


def pack(prototype: EllipsoidSpec, target_fill: float, max_inclusions: int = 10_000,
         seed: int = 0, levels: int = 8, ratio: float = 0.7, lam0: float | None = None,
         max_failures: int = 5_000, materials: MaterialPair | None = None) -> Assemblage:
    """Random sequential addition of scaled copies into the unit cell.

    The first candidate centre is the middle of the cell, later ones are
    uniform.  ``lam0`` defaults to the scale at which the longest outer
    semi-axis is 0.4.  Packing stops when ``target_fill`` is reached, after
    ``max_inclusions`` copies, or after ``max_failures`` consecutive centres
    for which no ladder scale fits.
    """
    if not 0.0 < target_fill < 1.0:
        raise ValueError(f"target fill must lie in (0, 1), got {target_fill}")
    if not 0.0 < ratio < 1.0 or levels < 1:
        raise ValueError("ladder needs 0 < ratio < 1 and at least one level")
    le = prototype.exterior_axes
    if lam0 is None:
        lam0 = 0.4 / float(le.max())
    if lam0 * le.max() > 0.5:
        raise ValueError("largest ladder scale does not fit in the unit cell")
    ladder = tuple(lam0 * ratio**k for k in range(levels))
    rng = np.random.default_rng(seed)

    centers = np.empty((0, 3))
    scales = np.empty(0)
    placed = []
    fill = 0.0
    failures = 0
    stop = "max_failures"
    first = True
    while True:
        if fill >= target_fill:
            stop = "target_fill"
            break
        if len(placed) >= max_inclusions:
            stop = "max_inclusions"
            break
        if failures >= max_failures:
            stop = "ladder_exhausted"
            break
        c = np.full(3, 0.5) if first else rng.uniform(0.0, 1.0, 3)
        first = False
        if len(scales):
            dist = np.linalg.norm((centers - c) / le, axis=1)
        for lam in ladder:
            ext = lam * le
            if np.any(c - ext < 0.0) or np.any(c + ext > 1.0):
                continue
            if len(scales) and np.any(dist < scales + lam):
                continue
            inc = PlacedInclusion(tuple(c), lam, prototype)
            placed.append(inc)
            centers = np.vstack([centers, c])
            scales = np.append(scales, lam)
            fill += inc.volume
            failures = 0
            break
        else:
            failures += 1
    return Assemblage(prototype, placed, target_fill, materials, stop, seed, ladder)


def assemblage_to_field(asm: Assemblage, sigma_star: float, grid: Grid | None = None,
                        n: int = 64, subsample: int = 1, mat: MaterialPair | None = None,
                        min_cells: float = 4.0) -> ConductivityField:
    """Rasterize every copy; the matrix gets ``sigma_star``.

    Copies narrower than ``min_cells`` cells are dropped with a warning and
    their volume is recorded in ``dropped_volume``.
    """
    mat = asm.materials if mat is None else mat
    if mat is None:
        raise ValueError("materials are needed to build a conductivity field")
    if grid is None:
        grid = Grid(n, 0.5, (0.5, 0.5, 0.5))
    kept = []
    dropped = 0.0
    for inc in asm.inclusions:
        spec = inc.spec
        if 2.0 * float(spec.exterior_axes.min()) < min_cells * grid.h:
            dropped += inc.volume
            continue
        kept.append((spec.core_axes, spec.exterior_axes, inc.center))
    if dropped:
        warnings.warn(f"dropped under-resolved inclusions with total volume {dropped:.4g}", stacklevel=2)
    fieldc = rasterize_inclusions(kept, mat, sigma_star, grid, subsample)
    fieldc.dropped_volume = dropped
    return fieldc


def assemblage_exterior_mask(asm: Assemblage, grid: Grid, clearance_cells: float = 2.0) -> np.ndarray:
    """Matrix cells at least ``clearance_cells`` cells away from every copy."""
    x = grid.mesh()
    gap = clearance_cells * grid.h
    inside = np.zeros(x.shape[1:], dtype=bool)
    for inc in asm.inclusions:
        spec = inc.spec
        rho_clear = (float(spec.exterior_axes.max()) + gap) ** 2 - spec.a.max()
        inside |= inside_ellipsoid(x, np.sqrt(spec.a + rho_clear), inc.center)
    return ~inside
