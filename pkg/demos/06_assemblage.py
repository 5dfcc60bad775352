# %% Filling a cell with scaled copies of one coated ellipsoid
import warnings

from neutral_inclusions import EllipsoidSpec, Grid, MaterialPair, pack, solve_cell
from neutral_inclusions.assemblage import assemblage_to_field
from neutral_inclusions.effective import effective_conductivity_p2
from neutral_inclusions.verifier import effective_from_cell

proto = EllipsoidSpec(1.0, 2.0, 3.0, 1.0, 4.0)
mat = MaterialPair(5.0, 1.0)

asm = pack(proto, target_fill=0.3, seed=1, materials=mat)
print(len(asm.inclusions), "copies, fill", round(asm.fill, 4), "stopped by", asm.stop_reason)
print("every copy has theta1 =", asm.theta1, "and K =", asm.K)

# %% Three resolved copies in a matrix of sigma*: the cell conductivity stays sigma*
s_star = effective_conductivity_p2(proto, mat, 1)
three = pack(proto, 0.99, max_inclusions=3, seed=0, lam0=1 / 16, levels=2, ratio=0.5, materials=mat)
grid = Grid(48, 0.5, (0.5, 0.5, 0.5))
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    field = assemblage_to_field(three, s_star, grid)
sol = solve_cell(field, 1.0, 1)
print("sigma_eff of the cell", effective_from_cell(sol, field, grid, 1), "sigma*", s_star)
