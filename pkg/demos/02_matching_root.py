# %% The matching equation
# f(x) = s1 |E - K x|^(p-2) (E - K x) - s2 (E - K x) - s2 x decreases strictly,
# so it has one root; x0 fixes every coefficient of the solution.
import numpy as np

from neutral_inclusions.matching import MatchingProblem, f, solve_matching

prob = MatchingProblem(sigma1=5.0, sigma2=1.0, E=1.0, K=0.2, p=3.0)
xs = np.linspace(-3, 8, 12)
for x, v in zip(xs, f(xs, prob)):
    print(f"x={x:6.2f}  f={v:10.4f}")

sol = solve_matching(prob)
print("root", sol.x0, "core field A1", sol.A1, "|f(x0)|", sol.residual)

# %% Flipping the field flips the root exactly
neg = solve_matching(prob.negated())
print(neg.x0 == -sol.x0)

# %% Dependence on p: the core field at the root
for p in (1.2, 1.5, 2.0, 2.5, 3.0, 4.0):
    s = solve_matching(MatchingProblem(5.0, 1.0, 1.0, 0.2, p))
    print(f"p={p:.1f}  x0={s.x0:.6f}  A1={s.A1:.6f}")
