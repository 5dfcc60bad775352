# %% Does the coated sphere leave the outside field alone?
# Solve the cell problem on a box with u = E x1 on the faces.  With the
# matrix at sigma* the field outside the coating stays uniform; with the
# matrix at the coating conductivity it does not.
from neutral_inclusions import EllipsoidSpec, Grid, MaterialPair, exterior_uniformity, rasterize, solve_cell
from neutral_inclusions.effective import effective_conductivity_sphere
from neutral_inclusions.verifier import effective_from_cell

r_c = 0.5 ** (1 / 3)
spec = EllipsoidSpec.from_sphere_radii(r_c, 1.0)
mat = MaterialPair(10.0, 1.0)
s_star = effective_conductivity_sphere(r_c, 1.0, mat)

for n in (32, 48):
    grid = Grid(n, 2.0)
    for label, sm in (("sigma*", s_star), ("sigma2", mat.sigma2)):
        field = rasterize(spec, mat, sm, grid)
        sol = solve_cell(field, 1.0)
        m = exterior_uniformity(sol, spec, grid)
        print(f"n={n} matrix={label:6s} max|u-Ex|/(EL)={m['uniformity_max_u']:.2e}  "
              f"sigma_eff={effective_from_cell(sol, field, grid):.4f}")

# %% Power-law core, p = 2.5: Picard iteration
mat = MaterialPair(5.0, 1.0, 2.5, 1.0)
s_star = effective_conductivity_sphere(r_c, 1.0, mat)
grid = Grid(32, 2.0)
field = rasterize(spec, mat, s_star, grid)
sol = solve_cell(field, 1.0)
print("Picard steps:", sol.iterations)
print("residuals   :", ", ".join(f"{r:.1e}" for r in sol.residual_log))
print("sigma_eff", effective_from_cell(sol, field, grid), "target", s_star)
