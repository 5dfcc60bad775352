import math

import numpy as np
import pytest

from neutral_inclusions.effective import MaterialPair, effective_conductivity
from neutral_inclusions.geometry import EllipsoidSpec
from neutral_inclusions.verifier import (ClearanceError, ConductivityField, ConvergenceError, Grid,
                                         effective_from_cell, exterior_mask, exterior_uniformity,
                                         rasterize, solve_cell, write_field_csv)


def uniform_field(grid, sigma=3.0, p=2.0):
    z = np.zeros((grid.n,) * 3)
    if p == 2:
        return ConductivityField(grid, z, z, 1.0, 2.0, 1.0, sigma)
    # the whole box is power-law core
    return ConductivityField(grid, np.ones_like(z), z, sigma, p, 1.0, 1.0)


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(8, 1.0)
    with pytest.raises(ValueError):
        Grid(17, 1.0)
    g = Grid(16, 2.0)
    assert g.h == 0.25
    assert g.coords(1)[0] == pytest.approx(-1.875)


def test_homogeneous_linear_exact():
    grid = Grid(16, 1.0)
    sol = solve_cell(uniform_field(grid), 2.0, axis=3)
    x = grid.mesh()[2]
    assert np.max(np.abs(sol.u - 2.0 * x)) < 1e-10
    assert effective_from_cell(sol) == pytest.approx(3.0, rel=1e-9)


def test_homogeneous_nonlinear_exact():
    grid = Grid(16, 1.0)
    sol = solve_cell(uniform_field(grid, 2.0, p=3.0), 1.5, axis=2)
    x = grid.mesh()[1]
    assert sol.converged
    assert np.max(np.abs(sol.u - 1.5 * x)) < 1e-9
    # flux 2 |1.5|^(1) 1.5 / 1.5
    assert effective_from_cell(sol) == pytest.approx(3.0, rel=1e-7)


def test_maximum_principle():
    grid = Grid(24, 2.0)
    spec = EllipsoidSpec.from_sphere_radii(0.6, 1.0)
    field = rasterize(spec, MaterialPair(50.0, 0.2), 1.0, grid)
    sol = solve_cell(field, 1.0)
    assert sol.u.max() <= grid.L and sol.u.min() >= -grid.L


def test_raster_volumes():
    grid = Grid(64, 2.0)
    spec = EllipsoidSpec(0.5, 0.8, 1.0, 0.2, 0.5)
    field = rasterize(spec, MaterialPair(2, 1), 1.0, grid, subsample=2)
    vc = field.core_frac.sum() * grid.h**3
    ve = (field.core_frac + field.coat_frac).sum() * grid.h**3
    assert vc == pytest.approx(4 / 3 * math.pi * np.prod(spec.core_axes), rel=0.02)
    assert ve == pytest.approx(4 / 3 * math.pi * np.prod(spec.exterior_axes), rel=0.02)


def test_clearance_enforced():
    spec = EllipsoidSpec.from_sphere_radii(0.5, 1.0)
    with pytest.raises(ClearanceError):
        rasterize(spec, MaterialPair(2, 1), 1.0, Grid(32, 1.1))


def test_deterministic():
    grid = Grid(16, 2.0)
    spec = EllipsoidSpec.from_sphere_radii(0.6, 1.0)
    mat = MaterialPair(4, 1, 2.5)
    s = effective_conductivity(spec, mat)
    a = solve_cell(rasterize(spec, mat, s, grid), 1.0)
    b = solve_cell(rasterize(spec, mat, s, grid), 1.0)
    np.testing.assert_array_equal(a.u, b.u)
    assert a.residual_log == b.residual_log


def test_picard_log_and_failure():
    grid = Grid(16, 2.0)
    spec = EllipsoidSpec.from_sphere_radii(0.6, 1.0)
    mat = MaterialPair(4, 1, 3.0)
    field = rasterize(spec, mat, effective_conductivity(spec, mat), grid)
    sol = solve_cell(field, 1.0)
    assert sol.converged
    assert all(b <= a for a, b in zip(sol.residual_log, sol.residual_log[1:]))
    with pytest.raises(ConvergenceError) as info:
        solve_cell(field, 1.0, max_iter=2)
    assert info.value.solution is not None
    assert not solve_cell(field, 1.0, max_iter=2, raise_on_failure=False).converged


def test_neutral_beats_control():
    grid = Grid(32, 2.0)
    spec = EllipsoidSpec.from_sphere_radii(0.5 ** (1 / 3), 1.0)
    mat = MaterialPair(10, 1)
    neutral = exterior_uniformity(solve_cell(rasterize(spec, mat, 2.8, grid), 1.0), spec)
    control = exterior_uniformity(solve_cell(rasterize(spec, mat, 1.0, grid), 1.0), spec)
    assert control["uniformity_max_u"] > 5 * neutral["uniformity_max_u"]


def test_exterior_mask_excludes_inclusion():
    grid = Grid(32, 2.0)
    spec = EllipsoidSpec(0.5, 0.8, 1.0, 0.2, 0.5)
    m = exterior_mask(spec, grid)
    x = grid.mesh()
    r2 = np.sum((x / spec.exterior_axes[:, None, None, None]) ** 2, axis=0)
    assert not np.any(m & (r2 <= 1.0))


def test_csv_rows(tmp_path):
    grid = Grid(16, 1.0)
    sol = solve_cell(uniform_field(grid), 1.0)
    path = tmp_path / "f.csv"
    write_field_csv(sol, path)
    rows = path.read_text().splitlines()
    assert rows[0] == "index,x,y,z,u"
    assert len(rows) == 16**3 + 1
    idx, x, y, z, u = rows[1].split(",")
    assert float(u) == pytest.approx(float(x), abs=1e-10)
