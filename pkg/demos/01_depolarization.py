# %% Depolarization factors of ellipsoids
import math

import numpy as np

from neutral_inclusions.depolarization import depolarization, depolarization_quad

# sphere: exactly a third each
print(depolarization(1, 1, 1))

# prolate spheroid 2:1:1 against its closed form
e = math.sqrt(1 - 1 / 4)
closed = (1 - e * e) / e**3 * (math.atanh(e) - e)
d = depolarization(2, 1, 1)
print("d1 =", d[0], " closed form =", closed)

# %% Carlson duplication vs adaptive quadrature
rng = np.random.default_rng(0)
worst = 0.0
for _ in range(200):
    l = rng.uniform(1, 100, 3)
    a, b = np.array(depolarization(*l)), np.array(depolarization_quad(*l))
    worst = max(worst, np.max(np.abs(a - b) / b))
print(f"worst relative gap over 200 triples: {worst:.2e}")

# %% Needle-like shapes drive d along the long axis to zero
for ratio in (1, 3, 10, 30, 100, 1000):
    d = depolarization(ratio, 1, 1)
    print(f"{ratio:5d}:1:1  d1={d[0]:.6f}  d2=d3={d[1]:.6f}")
