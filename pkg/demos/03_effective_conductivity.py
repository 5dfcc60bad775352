# %% Effective conductivity of coated ellipsoids
from neutral_inclusions import EllipsoidSpec, MaterialPair, effective_tensor, hashin_shtrikman
from neutral_inclusions.effective import effective_conductivity_sphere

# linear core, coated sphere, half core by volume
print("coated sphere:", effective_conductivity_sphere(0.5 ** (1 / 3), 1.0, MaterialPair(10, 1)))
print("closed form:  ", hashin_shtrikman(10, 1, 0.5))

# %% A triaxial prototype, linear and power-law cores
spec = EllipsoidSpec(1.0, 2.0, 3.0, rho_c=1.0, rho_e=4.0)
print("theta1 =", spec.theta1)
for p in (1.5, 2.0, 3.0):
    res = effective_tensor(spec, MaterialPair(5.0, 1.0, p, 1.0))
    print(f"p={p}: sigma* = " + ", ".join(f"{s:.6f}" for s in res.sigma_star))

# %% For p != 2 the answer depends on the applied field strength
for E in (0.25, 0.5, 1.0, 2.0, 4.0):
    res = effective_tensor(spec, MaterialPair(5.0, 1.0, 3.0, E))
    print(f"E={E:4}: sigma*_1 = {res.sigma_star[0]:.6f}")

# %% but not on the size of the inclusion
mat = MaterialPair(5.0, 1.0, 2.5, 1.0)
for lam in (0.01, 0.37, 1.0, 10.0):
    print(lam, effective_tensor(spec.scaled(lam), mat).sigma_star)
