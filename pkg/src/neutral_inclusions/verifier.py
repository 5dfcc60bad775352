"""Finite-volume cell solver used to test neutrality independently.

A box ``[center - L, center + L]^3`` is split into ``n^3`` cells.  Each cell
carries volume fractions of core, coating and matrix; the cell conductivity
is the mean of the arithmetic and harmonic mixtures on mixed cells.  Face
conductivities are harmonic means of the neighbouring cells, and ``u = E x_j``
is imposed on the box faces.  For ``p != 2`` the core conductivity
``sigma1 (|grad u|^2 + eps^2)^((p-2)/2)`` is frozen at the previous iterate
(damped Picard iteration).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pyamg
from scipy import sparse
from scipy.sparse import linalg as spla

from .depolarization import _axis_index
from .effective import MaterialPair
from .geometry import EllipsoidSpec, inside_ellipsoid

__all__ = [
    "Grid",
    "ConductivityField",
    "CellSolution",
    "ConvergenceError",
    "ClearanceError",
    "rasterize",
    "rasterize_inclusions",
    "solve_cell",
    "exterior_mask",
    "uniformity",
    "exterior_uniformity",
    "effective_from_cell",
    "cell_gradient",
    "write_field_csv",
]

log = logging.getLogger(__name__)


class ConvergenceError(RuntimeError):
    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


class ClearanceError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    n: int
    L: float
    center: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.n < 16 or self.n % 2:
            raise ValueError(f"grid needs an even number of cells >= 16, got n={self.n}")
        if not self.L > 0:
            raise ValueError(f"box half-width must be positive, got {self.L}")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.n

    def coords(self, axis: int) -> np.ndarray:
        """Cell-centre coordinates along ``axis`` (0-based)."""
        return self.center[axis] - self.L + (np.arange(self.n) + 0.5) * self.h

    def mesh(self, offset=(0.0, 0.0, 0.0)) -> np.ndarray:
        """Cell centres (shifted by ``offset``) as an array of shape (3, n, n, n)."""
        axes = [self.coords(d) + offset[d] for d in range(3)]
        return np.stack(np.meshgrid(*axes, indexing="ij"))


@dataclass
class ConductivityField:
    """Per-cell volume fractions and the material coefficients.

    ``core_frac + coat_frac <= 1``; the rest of each cell is matrix with
    conductivity ``sigma_matrix``.
    """

    grid: Grid
    core_frac: np.ndarray
    coat_frac: np.ndarray
    sigma1: float
    p: float
    sigma2: float
    sigma_matrix: float
    dropped_volume: float = 0.0

    def __post_init__(self):
        if min(self.sigma1, self.sigma2, self.sigma_matrix) <= 0:
            raise ValueError("all conductivities must be positive")

    @property
    def matrix_frac(self) -> np.ndarray:
        return np.clip(1.0 - self.core_frac - self.coat_frac, 0.0, 1.0)

    @property
    def tags(self) -> np.ndarray:
        """0 = matrix, 1 = coating, 2 = core, by largest fraction."""
        return np.argmax(np.stack([self.matrix_frac, self.coat_frac, self.core_frac]), axis=0)

    @property
    def is_linear(self) -> bool:
        return self.p == 2 or not np.any(self.core_frac > 0)

    def cell_sigma(self, core_sigma=None) -> np.ndarray:
        """Cell conductivity for a given core conductivity (scalar or per cell)."""
        if core_sigma is None:
            core_sigma = self.sigma1
        core_sigma = np.broadcast_to(np.asarray(core_sigma, dtype=float), self.core_frac.shape)
        fc, ft, fm = self.core_frac, self.coat_frac, self.matrix_frac
        arith = fc * core_sigma + ft * self.sigma2 + fm * self.sigma_matrix
        with np.errstate(divide="ignore"):
            inv = np.where(fc > 0, fc / np.maximum(core_sigma, 1e-300), 0.0)
        harm = 1.0 / (inv + ft / self.sigma2 + fm / self.sigma_matrix)
        return np.where(np.maximum.reduce([fc, ft, fm]) >= 1.0, arith, 0.5 * (arith + harm))


@dataclass
class CellSolution:
    u: np.ndarray
    grid: Grid
    E: float
    axis: int
    sigma: np.ndarray
    residual_log: list = field(default_factory=list)
    change_log: list = field(default_factory=list)
    omega_log: list = field(default_factory=list)
    converged: bool = False
    residual: float = math.nan
    tol: float = math.nan

    @property
    def iterations(self) -> int:
        return len(self.change_log)

    def boundary_value(self, x):
        return self.E * x[_axis_index(self.axis)]


def _subsample_offsets(grid: Grid, k: int):
    frac = (np.arange(k) + 0.5) / k - 0.5
    return [(a * grid.h, b * grid.h, c * grid.h) for a in frac for b in frac for c in frac]


def rasterize_inclusions(inclusions, mat: MaterialPair, sigma_matrix: float, grid: Grid,
                         subsample: int = 1, clearance: float | None = None) -> ConductivityField:
    """Fractions for several aligned coated ellipsoids.

    ``inclusions`` is a sequence of ``(core_axes, exterior_axes, center)``.
    Each cell is probed at ``subsample^3`` points.  If ``clearance`` is given,
    every exterior ellipsoid must stay that far from the box faces.
    """
    if subsample < 1:
        raise ValueError("subsample must be >= 1")
    lo = np.array(grid.center) - grid.L
    hi = np.array(grid.center) + grid.L
    for _, le, c in inclusions:
        c = np.asarray(c, dtype=float)
        le = np.asarray(le, dtype=float)
        if clearance is not None and (np.any(c - le < lo + clearance) or np.any(c + le > hi - clearance)):
            raise ClearanceError(
                f"inclusion at {c} with semi-axes {le} is closer than {clearance:g} to the box boundary"
            )
    n = grid.n
    core = np.zeros((n, n, n))
    coat = np.zeros((n, n, n))
    offsets = _subsample_offsets(grid, subsample)
    w = 1.0 / len(offsets)
    for off in offsets:
        x = grid.mesh(off)
        in_core = np.zeros((n, n, n), dtype=bool)
        in_ext = np.zeros((n, n, n), dtype=bool)
        for lc, le, c in inclusions:
            in_core |= inside_ellipsoid(x, lc, c)
            in_ext |= inside_ellipsoid(x, le, c)
        core += w * in_core
        coat += w * (in_ext & ~in_core)
    return ConductivityField(grid, core, coat, mat.sigma1, mat.p, mat.sigma2, float(sigma_matrix))


def rasterize(spec: EllipsoidSpec, mat: MaterialPair, sigma_star: float, grid: Grid,
              subsample: int = 1, center=None) -> ConductivityField:
    """Conductivity field of one coated inclusion centred in the box.

    A cell belongs to the core when its probe point has ``rho < rho_c`` and to
    the coating when ``rho_c <= rho < rho_e``; both tests reduce to ellipsoid
    membership for the confocal semi-axes.  The inclusion must keep a
    clearance of four cells from the box faces.
    """
    center = grid.center if center is None else tuple(center)
    return rasterize_inclusions([(spec.core_axes, spec.exterior_axes, center)], mat, sigma_star,
                                grid, subsample, clearance=4 * grid.h)


def _face_values(grid: Grid, E: float, axis: int):
    """Dirichlet data on the six box faces, keyed by (dim, side)."""
    j = _axis_index(axis)
    out = {}
    for d in range(3):
        for side in (0, 1):
            coords = [grid.coords(k) for k in range(3)]
            coords[d] = np.array([grid.center[d] + (grid.L if side else -grid.L)])
            X = np.meshgrid(*coords, indexing="ij")
            out[d, side] = (E * X[j]).squeeze(axis=d)
    return out


def _assemble(sigma: np.ndarray, faces: dict):
    """Finite-volume matrix (multiplied through by ``h``) and right-hand side."""
    n = sigma.shape[0]
    N = n**3
    diag = np.zeros((n, n, n))
    rhs = np.zeros((n, n, n))
    offdiag = {}
    strides = (n * n, n, 1)
    for d in range(3):
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        lo[d] = slice(0, -1)
        hi[d] = slice(1, None)
        s_lo, s_hi = sigma[tuple(lo)], sigma[tuple(hi)]
        cond = 2.0 * s_lo * s_hi / (s_lo + s_hi)
        diag[tuple(lo)] += cond
        diag[tuple(hi)] += cond
        full = np.zeros((n, n, n))
        full[tuple(lo)] = cond
        offdiag[strides[d]] = -full.ravel()[: N - strides[d]]
        for side in (0, 1):
            idx = [slice(None)] * 3
            idx[d] = -1 if side else 0
            bc = 2.0 * sigma[tuple(idx)]
            diag[tuple(idx)] += bc
            rhs[tuple(idx)] += bc * faces[d, side]
    offsets = [0]
    data = [diag.ravel()]
    for s, v in offdiag.items():
        offsets += [s, -s]
        data += [v, v]
    A = sparse.diags(data, offsets, shape=(N, N), format="csr")
    return A, rhs.ravel()


def _linear_solve(A, b, x0, rtol: float, maxiter: int | None = None):
    # "local" weighting avoids the randomized spectral-radius estimate, so runs repeat exactly
    ml = pyamg.smoothed_aggregation_solver(A, symmetry="symmetric", max_coarse=500,
                                           smooth=("jacobi", {"weighting": "local"}))
    M = ml.aspreconditioner(cycle="V")
    r0 = np.linalg.norm(b - A @ x0)
    bnorm = np.linalg.norm(b)
    if r0 <= rtol * bnorm:
        return x0, 0
    x, info = spla.cg(A, b, x0=x0, rtol=rtol, atol=0.0, M=M, maxiter=maxiter or 2000)
    if info != 0:
        raise ConvergenceError(f"conjugate gradients stopped with info={info}")
    return x, 1


def cell_gradient(u: np.ndarray, grid: Grid, faces: dict) -> np.ndarray:
    """Central-difference gradient of cell values, shape (3, n, n, n).

    Ghost values ``2 u_face - u_cell`` carry the Dirichlet data.
    """
    h = grid.h
    out = np.empty((3,) + u.shape)
    for d in range(3):
        lo_ghost = 2.0 * np.expand_dims(faces[d, 0], d) - np.take(u, [0], axis=d)
        hi_ghost = 2.0 * np.expand_dims(faces[d, 1], d) - np.take(u, [-1], axis=d)
        padded = np.concatenate([lo_ghost, u, hi_ghost], axis=d)
        n = u.shape[d]
        fwd = np.take(padded, np.arange(2, n + 2), axis=d)
        bwd = np.take(padded, np.arange(0, n), axis=d)
        out[d] = (fwd - bwd) / (2.0 * h)
    return out


def _core_sigma(fieldc: ConductivityField, u, faces, eps):
    grad = cell_gradient(u, fieldc.grid, faces)
    mag2 = np.sum(grad**2, axis=0)
    return fieldc.sigma1 * (mag2 + eps**2) ** ((fieldc.p - 2.0) / 2.0)


def solve_cell(fieldc: ConductivityField, E: float, axis: int = 1, tol: float = 1e-8,
               max_iter: int = 200, omega: float = 0.5, lin_tol: float = 1e-10,
               eps: float | None = None, residual_tol: float = 1e-6,
               raise_on_failure: bool = True) -> CellSolution:
    """Solve the cell problem with ``u = E x_j`` on the box faces.

    The linear case is a single preconditioned conjugate-gradient solve.  For
    a nonlinear core each Picard step solves the linear problem with frozen
    coefficients and moves a fraction ``omega`` towards it; ``omega`` is
    halved (and the step retried) whenever the nonlinear residual would grow,
    so the accepted residual log is non-increasing.  Iteration stops when the
    undamped update is below ``tol`` relative to the solution.
    """
    if tol <= 0 or lin_tol <= 0:
        raise ValueError("tolerances must be positive")
    grid = fieldc.grid
    j = _axis_index(axis)
    faces = _face_values(grid, E, axis)
    x = grid.mesh()[j]
    u = E * x
    if eps is None:
        eps = 1e-8 * max(abs(E), 1e-300) / grid.L

    if fieldc.is_linear:
        sigma = fieldc.cell_sigma()
        A, b = _assemble(sigma, faces)
        uf, _ = _linear_solve(A, b, u.ravel(), lin_tol)
        res = _rel_residual(A, b, uf)
        sol = CellSolution(uf.reshape(u.shape), grid, E, axis, sigma, [res], [0.0], [1.0],
                           converged=True, residual=res, tol=lin_tol)
        return sol

    def state(v):
        sig = fieldc.cell_sigma(_core_sigma(fieldc, v, faces, eps))
        A, b = _assemble(sig, faces)
        return sig, A, b, _rel_residual(A, b, v.ravel())

    sigma, A, b, res = state(u)
    sol = CellSolution(u, grid, E, axis, sigma, [res], [], [], tol=tol)
    for it in range(max_iter):
        ulin, _ = _linear_solve(A, b, u.ravel(), lin_tol)
        ulin = ulin.reshape(u.shape)
        change = np.linalg.norm(ulin - u) / max(np.linalg.norm(ulin), 1e-300)
        w = omega
        while True:
            trial = u + w * (ulin - u)
            t_sigma, t_A, t_b, t_res = state(trial)
            if t_res <= res or w < omega / 64:
                break
            w *= 0.5
        u, sigma, A, b, res = trial, t_sigma, t_A, t_b, t_res
        if w < omega:
            omega = w
        sol.residual_log.append(res)
        sol.change_log.append(change)
        sol.omega_log.append(w)
        log.debug("picard %d: change %.3e residual %.3e omega %.3g", it, change, res, w)
        if change < tol:
            break
    sol.u = u
    sol.sigma = sigma
    sol.residual = res
    sol.converged = sol.change_log[-1] < tol and res < residual_tol
    if not sol.converged and raise_on_failure:
        raise ConvergenceError(
            f"Picard iteration did not converge in {max_iter} steps "
            f"(last change {sol.change_log[-1]:.3e}, residual {res:.3e})",
            sol,
        )
    return sol


def _rel_residual(A, b, u) -> float:
    return float(np.linalg.norm(b - A @ u) / max(np.linalg.norm(b), 1e-300))


def exterior_mask(spec: EllipsoidSpec, grid: Grid, clearance_cells: float = 2.0,
                  center=None) -> np.ndarray:
    """Cells outside the inclusion by at least ``clearance_cells * h``.

    Uses the confocal ellipsoid whose longest semi-axis exceeds the outer
    one by the clearance; the gap between confocal ellipsoids is smallest
    along the longest axis.
    """
    center = grid.center if center is None else center
    a = spec.a
    gap = clearance_cells * grid.h
    rho_clear = (float(spec.exterior_axes.max()) + gap) ** 2 - a.max()
    axes = np.sqrt(a + rho_clear)
    return ~inside_ellipsoid(grid.mesh(), axes, center)


def uniformity(sol: CellSolution, mask: np.ndarray) -> dict:
    """Deviation from the applied field on the cells selected by ``mask``."""
    grid = sol.grid
    j = _axis_index(sol.axis)
    faces = _face_values(grid, sol.E, sol.axis)
    x = grid.mesh()[j]
    E = abs(sol.E) if sol.E else 1.0
    du = np.abs(sol.u - sol.E * x)[mask]
    grad = cell_gradient(sol.u, grid, faces)
    grad[j] -= sol.E
    dg = np.sqrt(np.sum(grad**2, axis=0))[mask]
    return {
        "uniformity_max_u": float(du.max() / (E * grid.L)) if du.size else 0.0,
        "uniformity_max_grad": float(dg.max() / E) if dg.size else 0.0,
        "n_cells": int(mask.sum()),
    }


def exterior_uniformity(sol: CellSolution, spec: EllipsoidSpec, grid: Grid | None = None,
                        clearance_cells: float = 2.0) -> dict:
    """Largest disturbance of ``u`` and ``grad u`` outside the inclusion.

    ``uniformity_max_u`` is ``max |u - E x_j| / (|E| L)`` and
    ``uniformity_max_grad`` is ``max |grad u - E e_j| / |E|`` over matrix cells
    at least ``clearance_cells`` cells from the outer surface.
    """
    grid = sol.grid if grid is None else grid
    return uniformity(sol, exterior_mask(spec, grid, clearance_cells))


def effective_from_cell(sol: CellSolution, fieldc: ConductivityField | None = None,
                        grid: Grid | None = None, axis: int | None = None) -> float:
    """Volume-averaged current along ``axis`` divided by ``E``.

    Face fluxes are summed with the volume each face represents (a full cell
    inside, half a cell at the box faces); ``sigma`` is the last coefficient
    field of the solve.
    """
    grid = sol.grid if grid is None else grid
    axis = sol.axis if axis is None else axis
    d = _axis_index(axis)
    sigma = sol.sigma
    u = sol.u
    h = grid.h
    faces = _face_values(grid, sol.E, sol.axis)
    lo = [slice(None)] * 3
    hi = [slice(None)] * 3
    lo[d] = slice(0, -1)
    hi[d] = slice(1, None)
    s_lo, s_hi = sigma[tuple(lo)], sigma[tuple(hi)]
    cond = 2.0 * s_lo * s_hi / (s_lo + s_hi)
    total = np.sum(cond * (u[tuple(hi)] - u[tuple(lo)]) / h)
    first = np.take(u, 0, axis=d)
    last = np.take(u, -1, axis=d)
    total += 0.5 * np.sum(np.take(sigma, 0, axis=d) * (first - faces[d, 0]) / (0.5 * h))
    total += 0.5 * np.sum(np.take(sigma, -1, axis=d) * (faces[d, 1] - last) / (0.5 * h))
    mean_flux = total / grid.n**3
    return float(mean_flux / sol.E)


def write_field_csv(sol: CellSolution, path) -> None:
    """Write ``index, x, y, z, u`` rows for every cell centre."""
    X = sol.grid.mesh().reshape(3, -1)
    idx = np.arange(X.shape[1])
    data = np.column_stack([idx, X[0], X[1], X[2], sol.u.ravel()])
    np.savetxt(path, data, delimiter=",", header="index,x,y,z,u", comments="",
               fmt=["%d", "%.17g", "%.17g", "%.17g", "%.17g"])
