"""Scalar interface-matching equation for the coated inclusion.

With ``A1 = E - K x`` the core field, continuity of normal current across
the core surface reduces to ``f(x) = 0`` where

    f(x) = sigma1 |E - K x|^(p-2) (E - K x) - sigma2 (E - K x) - sigma2 x.

For ``sigma1, sigma2 > 0``, ``p > 1`` and ``0 < K < 1`` the function is
strictly decreasing and runs from +inf to -inf, so the root is unique.  The
root also lies in ``[-|E|/(1-K), |E|/K]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MatchingProblem",
    "MatchingSolution",
    "signed_power",
    "f",
    "f_prime",
    "solve_matching",
    "closed_form_root_p2",
]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class MatchingProblem:
    sigma1: float
    sigma2: float
    E: float
    K: float
    p: float

    def __post_init__(self):
        for name in ("sigma1", "sigma2", "E", "K", "p"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.sigma1 <= 0 or self.sigma2 <= 0:
            raise ValueError(f"conductivities must be positive, got {self.sigma1}, {self.sigma2}")
        if self.p <= 1:
            raise ValueError(f"exponent p must exceed 1, got {self.p}")
        if not 0.0 < self.K < 1.0:
            raise ValueError(f"K must lie in (0, 1), got {self.K}")

    @property
    def x_scale(self) -> float:
        """Bound on the root magnitude, ``|E| max(1/K, 1/(1-K))`` (1 when E = 0)."""
        if self.E == 0:
            return 1.0
        return abs(self.E) * max(1.0 / self.K, 1.0 / (1.0 - self.K))

    @property
    def f_scale(self) -> float:
        E = abs(self.E)
        return max(self.sigma1 * E ** (self.p - 1), self.sigma2 * E, 1.0)

    def negated(self) -> "MatchingProblem":
        return MatchingProblem(self.sigma1, self.sigma2, -self.E, self.K, self.p)


@dataclass(frozen=True)
class MatchingSolution:
    """Root of the matching equation and the coefficients it fixes.

    ``B2 = x0 g(rho_c) / 2`` for the ``g_core`` passed to the solver; with the
    default ``g_core = 1`` it is the scale-free ``x0 / 2``.
    """

    x0: float
    A1: float
    A2: float
    B2: float
    K: float
    residual: float


def signed_power(t, q):
    """``|t|^(q-1) t`` written as ``sign(t) |t|^q``; zero at ``t = 0`` for ``q > 0``."""
    t = np.asarray(t, dtype=float)
    out = np.sign(t) * np.abs(t) ** q
    return float(out) if out.ndim == 0 else out


def f(x, prob: MatchingProblem):
    A = prob.E - prob.K * np.asarray(x, dtype=float)
    out = prob.sigma1 * signed_power(A, prob.p - 1.0) - prob.sigma2 * A - prob.sigma2 * np.asarray(x)
    return float(out) if np.ndim(out) == 0 else out


def f_prime(x, prob: MatchingProblem) -> float:
    """Derivative of ``f``; ``-inf`` at the kink ``x = E/K`` when ``p < 2``."""
    A = prob.E - prob.K * x
    if A == 0:
        if prob.p < 2:
            return -math.inf
        lead = prob.sigma1 * (prob.p - 1) if prob.p == 2 else 0.0
    else:
        lead = prob.sigma1 * (prob.p - 1) * abs(A) ** (prob.p - 2)
    return -prob.K * lead + prob.sigma2 * (prob.K - 1.0)


def _bracket(prob: MatchingProblem):
    kink = prob.E / prob.K
    lo = min(0.0, kink) - 1.0
    hi = max(0.0, kink) + 1.0
    for _ in range(2100):
        flo, fhi = f(lo, prob), f(hi, prob)
        if flo >= 0 >= fhi:
            return lo, hi, flo, fhi
        if not (math.isfinite(lo) and math.isfinite(hi)):
            break
        width = hi - lo
        if flo < 0:
            lo -= width
        if fhi > 0:
            hi += width
    raise OverflowError(f"could not bracket the matching root for {prob}")


def _bisect(prob: MatchingProblem, lo: float, hi: float, flo: float, fhi: float, width: float):
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = f(mid, prob)
        if fm == 0:
            return mid, mid
        if fm > 0:
            lo = mid
        else:
            hi = mid
    return lo, hi


def solve_matching(prob: MatchingProblem, polish: bool = True, g_core: float = 1.0) -> MatchingSolution:
    """Unique root of the matching equation.

    Brackets the root by doubling, bisects to a width of ``1e-14 * x_scale``
    and, if ``polish`` is set, refines with guarded Newton steps that never
    leave the bracket or cross the kink at ``x = E/K``.

    Negative ``E`` is solved through the mirror problem so that the root is
    exactly odd in ``E``.
    """
    if prob.E < 0:
        sol = solve_matching(prob.negated(), polish=polish, g_core=g_core)
        return MatchingSolution(-sol.x0, -sol.A1, -sol.A2, -sol.B2, sol.K, sol.residual)
    if prob.E == 0:
        if prob.p < 2:
            raise ValueError("E = 0 with p < 2 makes |A1|^(p-2) singular; use a nonzero field")
        return _solution(prob, 0.0, g_core)

    lo, hi, flo, fhi = _bracket(prob)
    lo, hi = _bisect(prob, lo, hi, flo, fhi, 1e-14 * prob.x_scale)
    x = 0.5 * (lo + hi)
    if polish:
        x = _newton_polish(prob, x, lo, hi)
        x = min((x, lo, hi), key=lambda t: abs(f(t, prob)))
    return _solution(prob, x, g_core)


def _newton_polish(prob: MatchingProblem, x: float, lo: float, hi: float, steps: int = 8) -> float:
    kink = prob.E / prob.K
    fx = f(x, prob)
    for _ in range(steps):
        if fx == 0:
            break
        d = f_prime(x, prob)
        if not math.isfinite(d) or d == 0:
            break
        xn = x - fx / d
        if not lo <= xn <= hi:
            break
        if prob.p < 2 and (x - kink) * (xn - kink) <= 0:
            break
        fn = f(xn, prob)
        if abs(fn) >= abs(fx):
            break
        x, fx = xn, fn
    return x


def _solution(prob: MatchingProblem, x0: float, g_core: float) -> MatchingSolution:
    A1 = prob.E - prob.K * x0
    return MatchingSolution(x0=x0, A1=A1, A2=A1, B2=0.5 * x0 * g_core, K=prob.K,
                            residual=abs(f(x0, prob)))


def closed_form_root_p2(prob: MatchingProblem) -> float:
    """Root of the linear (p = 2) matching equation, ``E (s1 - s2) / (K (s1 - s2) + s2)``."""
    if prob.p != 2:
        raise ValueError(f"closed form needs p = 2, got p = {prob.p}")
    ds = prob.sigma1 - prob.sigma2
    return prob.E * ds / (prob.K * ds + prob.sigma2)
