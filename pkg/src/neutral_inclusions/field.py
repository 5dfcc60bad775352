"""Analytic potential of the neutral coated ellipsoid and its checks.

The potential is ``A1 x_j`` in the core, ``phi(rho) x_j`` in the coating and
``E x_j`` outside, with

    phi(rho) = A2 + B2 int_{rho_c}^{rho} ds / ((c_j^2 + s) g(s)).

The integral is evaluated as ``T(rho_c) - T(rho)`` where
``T(rho) = int_rho^inf ds / ((c_j^2+s) g(s)) = 2 d_j(rho) / g(rho)`` is the
depolarization factor of the confocal ellipsoid ``rho`` divided by its
volume scale.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import mpmath
import numpy as np

from .depolarization import _axis_index, tail_integral
from .effective import MaterialPair, effective_conductivity
from .geometry import EllipsoidSpec, Region, g, rho_from_cartesian, semi_axes
from .matching import MatchingSolution, signed_power

__all__ = [
    "AnalyticSolution",
    "InterfaceResiduals",
    "build_solution",
    "varphi",
    "varphi_prime",
    "potential",
    "gradient",
    "interface_points",
    "interface_residuals",
    "coefficient_chain",
    "pde_residual",
]


@dataclass(frozen=True)
class AnalyticSolution:
    spec: EllipsoidSpec
    mat: MaterialPair
    coeffs: MatchingSolution
    sigma_star: float
    axis: int = 1

    @property
    def j(self) -> int:
        return _axis_index(self.axis)

    @property
    def A1(self) -> float:
        return self.coeffs.A1

    @property
    def A2(self) -> float:
        return self.coeffs.A2

    @property
    def B2(self) -> float:
        return self.coeffs.B2

    def with_core_field(self, A1: float) -> "AnalyticSolution":
        """Copy with ``A1`` (and ``A2``) replaced; ``B2`` and ``sigma*`` kept."""
        return replace(self, coeffs=replace(self.coeffs, A1=A1, A2=A1))


def build_solution(spec: EllipsoidSpec, mat: MaterialPair, axis: int = 1) -> AnalyticSolution:
    sigma_star, coeffs = effective_conductivity(spec, mat, axis, return_solution=True)
    return AnalyticSolution(spec, mat, coeffs, sigma_star, axis)


def _tail(rho, sol: AnalyticSolution):
    return tail_integral(rho, sol.spec, sol.axis)


def varphi(rho, sol: AnalyticSolution):
    """Coating profile ``phi(rho)``; ``phi(rho_c) = A2`` exactly."""
    spec = sol.spec
    rho = np.asarray(rho, dtype=float)
    slack = 1e-12 * max(spec.rho_e, 1.0)
    if np.any(rho < spec.rho_c - slack) or np.any(rho > spec.rho_e + slack):
        raise ValueError(f"phi is defined on the coating [{spec.rho_c}, {spec.rho_e}] only")
    rho = np.clip(rho, spec.rho_c, spec.rho_e)
    integral = _tail(spec.rho_c, sol) - _tail(rho, sol)
    out = np.where(rho == spec.rho_c, sol.A2, sol.A2 + sol.B2 * integral)
    return float(out) if out.ndim == 0 else out


def varphi_prime(rho, sol: AnalyticSolution):
    rho = np.asarray(rho, dtype=float)
    out = sol.B2 / ((sol.spec.a[sol.j] + rho) * g(rho, sol.spec))
    return float(out) if np.ndim(out) == 0 else out


def potential(x, sol: AnalyticSolution):
    """Potential at ``x`` (a 3-vector or an array of shape (3, ...))."""
    x = np.asarray(x, dtype=float)
    spec = sol.spec
    rho = np.asarray(rho_from_cartesian(x, spec), dtype=float)
    xj = np.asarray(x[sol.j], dtype=float)
    out = np.where(rho < spec.rho_c, sol.A1 * xj, sol.mat.E * xj)
    coat = (rho >= spec.rho_c) & (rho <= spec.rho_e)
    if np.any(coat):
        out[coat] = varphi(rho[coat], sol) * xj[coat]
    return float(out) if out.ndim == 0 else out


def _rho_gradient(x: np.ndarray, rho: float, a: np.ndarray) -> np.ndarray:
    """``grad rho`` by implicit differentiation of the confocal quadric."""
    w = x / (a + rho)
    return 2.0 * w / np.dot(w, w)


def outward_normal(x: np.ndarray, rho: float, spec: EllipsoidSpec) -> np.ndarray:
    """Unit normal of the confocal ellipsoid through ``x`` (quadric gradient)."""
    w = x / (spec.a + rho)
    return w / np.linalg.norm(w)


def _coating_gradient(x: np.ndarray, rho: float, sol: AnalyticSolution) -> np.ndarray:
    grad = varphi_prime(rho, sol) * x[sol.j] * _rho_gradient(x, rho, sol.spec.a)
    grad[sol.j] += varphi(rho, sol)
    return grad


def gradient(x, sol: AnalyticSolution, tol: float | None = None) -> np.ndarray:
    """Analytic gradient of the potential; interface points are rejected."""
    x = np.asarray(x, dtype=float).reshape(3)
    spec = sol.spec
    if tol is None:
        tol = 1e-9 * spec.rho_e
    rho = rho_from_cartesian(x, spec)
    if abs(rho - spec.rho_c) <= tol or abs(rho - spec.rho_e) <= tol:
        raise ValueError(f"gradient is one-sided on an interface (rho={rho})")
    e = np.zeros(3)
    if rho < spec.rho_c:
        e[sol.j] = sol.A1
        return e
    if rho > spec.rho_e:
        e[sol.j] = sol.mat.E
        return e
    return _coating_gradient(x, rho, sol)


def interface_points(spec: EllipsoidSpec, rho: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` points on the confocal ellipsoid ``rho``, all octants; shape (n, 3).

    For ``c1 < c2 < c3`` the hyperboloid coordinates ``mu, nu`` are drawn
    uniformly over their admissible intervals.  Otherwise (degenerate chart)
    a uniform direction is stretched onto the ellipsoid.
    """
    a = spec.a
    if spec.is_ordered:
        mu = rng.uniform(-a[1], -a[0], n)
        nu = rng.uniform(-a[2], -a[1], n)
        pts = np.empty((n, 3))
        for j in range(3):
            k, m = [i for i in range(3) if i != j]
            x2 = (a[j] + rho) * (a[j] + mu) * (a[j] + nu) / ((a[j] - a[k]) * (a[j] - a[m]))
            pts[:, j] = np.sqrt(np.maximum(x2, 0.0))
        signs = rng.choice([-1.0, 1.0], size=(n, 3))
        return pts * signs
    u = rng.normal(size=(n, 3))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    return u * semi_axes(rho, spec)


@dataclass
class InterfaceResiduals:
    continuity_core: float
    boundary_exterior: float
    flux_core: float
    flux_exterior: float
    u_scale: float
    flux_scale: float
    n_samples: int

    @property
    def normalized(self) -> dict:
        return {
            "continuity_core": self.continuity_core / self.u_scale,
            "boundary_exterior": self.boundary_exterior / self.u_scale,
            "flux_core": self.flux_core / self.flux_scale,
            "flux_exterior": self.flux_exterior / self.flux_scale,
        }

    @property
    def max_normalized(self) -> float:
        return max(self.normalized.values())

    def as_dict(self) -> dict:
        out = {k: getattr(self, k) for k in ("continuity_core", "boundary_exterior", "flux_core",
                                             "flux_exterior", "u_scale", "flux_scale", "n_samples")}
        out["max_normalized"] = self.max_normalized
        return out


def interface_residuals(sol: AnalyticSolution, n_samples: int = 500, seed: int = 0) -> InterfaceResiduals:
    """Sampled violations of the four interface conditions.

    Continuity at the core surface, ``u = E x_j`` on the outer surface, and
    normal-current continuity on both surfaces, each with one-sided limits.
    """
    if n_samples < 1:
        raise ValueError("need at least one sample per interface")
    spec, mat = sol.spec, sol.mat
    j = sol.j
    rng = np.random.default_rng(seed)
    s_core = mat.sigma1 * abs(sol.A1) ** (mat.p - 2) if sol.A1 != 0 else 0.0
    flux_core_in = s_core * sol.A1

    cont = flux_c = 0.0
    for x in interface_points(spec, spec.rho_c, n_samples, rng):
        n = outward_normal(x, spec.rho_c, spec)
        u_core = sol.A1 * x[j]
        u_coat = varphi(spec.rho_c, sol) * x[j]
        cont = max(cont, abs(u_core - u_coat))
        jn_core = flux_core_in * n[j]
        jn_coat = mat.sigma2 * np.dot(_coating_gradient(x, spec.rho_c, sol), n)
        flux_c = max(flux_c, abs(jn_core - jn_coat))

    bnd = flux_e = 0.0
    for x in interface_points(spec, spec.rho_e, n_samples, rng):
        n = outward_normal(x, spec.rho_e, spec)
        bnd = max(bnd, abs(varphi(spec.rho_e, sol) * x[j] - mat.E * x[j]))
        jn_coat = mat.sigma2 * np.dot(_coating_gradient(x, spec.rho_e, sol), n)
        jn_ext = sol.sigma_star * mat.E * n[j]
        flux_e = max(flux_e, abs(jn_coat - jn_ext))

    u_scale = max(abs(mat.E), abs(sol.A1)) * float(spec.exterior_axes.max())
    flux_scale = max(abs(flux_core_in), mat.sigma2 * abs(mat.E), sol.sigma_star * abs(mat.E),
                     mat.sigma2 * abs(sol.A1))
    return InterfaceResiduals(cont, bnd, flux_c, flux_e, u_scale or 1.0, flux_scale or 1.0, n_samples)


def coefficient_chain(sol: AnalyticSolution) -> dict:
    """Residuals of the relations tying ``A1, A2, B2, sigma*`` and ``E`` together."""
    spec, mat = sol.spec, sol.mat
    gc, ge = g(spec.rho_c, spec), g(spec.rho_e, spec)
    K = sol.coeffs.K
    A1, B2, E = sol.A1, sol.B2, mat.E
    s2 = mat.sigma2
    t = E - 2.0 * B2 * K / gc
    combined = mat.sigma1 * signed_power(t, mat.p - 1) - s2 * t - 2.0 * s2 * B2 / gc
    B2_core = A1 * gc * (mat.sigma1 * abs(A1) ** (mat.p - 2) - s2) / (2.0 * s2) if A1 else 0.0
    B2_ext = E * ge * (sol.sigma_star - s2) / (2.0 * s2)
    E_back = 2.0 * B2 * s2 / (ge * (sol.sigma_star - s2)) if sol.sigma_star != s2 else E
    scale = max(mat.sigma1 * abs(E) ** (mat.p - 1), s2 * abs(E), 1.0)
    b_scale = max(abs(B2), 1e-300)
    return {
        "combined_identity": abs(combined) / scale,
        "A2_minus_A1": abs(sol.A2 - A1),
        "B2_core_rel": abs(B2_core - B2) / b_scale,
        "B2_exterior_rel": abs(B2_ext - B2) / b_scale,
        "E_reconstructed_rel": abs(E_back - E) / max(abs(E), 1e-300),
        "E_from_core_rel": abs(A1 + 2.0 * B2 * K / gc - E) / max(abs(E), 1e-300),
    }


# high-precision evaluation used by the finite-difference checks

def _mp_rho(x, a, guess):
    x2 = [mpmath.mpf(v) ** 2 for v in x]
    aa = [mpmath.mpf(v) for v in a]

    def F(r):
        return sum(x2[k] / (aa[k] + r) for k in range(3)) - 1

    def dF(r):
        return -sum(x2[k] / (aa[k] + r) ** 2 for k in range(3))

    r = mpmath.mpf(guess)
    for _ in range(60):
        step = F(r) / dF(r)
        r -= step
        if abs(step) <= mpmath.mpf(10) ** (-mpmath.mp.dps + 3) * (1 + abs(r)):
            break
    return r


def _mp_tail(rho, a, j):
    k, m = [i for i in range(3) if i != j]
    return mpmath.mpf(2) / 3 * mpmath.elliprd(a[k] + rho, a[m] + rho, a[j] + rho)


def _mp_phi(rho, sol: AnalyticSolution, a):
    return mpmath.mpf(sol.A2) + mpmath.mpf(sol.B2) * (_mp_tail(mpmath.mpf(sol.spec.rho_c), a, sol.j)
                                                      - _mp_tail(rho, a, sol.j))


def _mp_potential(x, sol: AnalyticSolution, a, guess):
    rho = _mp_rho(x, sol.spec.a, guess)
    return _mp_phi(rho, sol, a) * x[sol.j]


def _coating_samples(sol: AnalyticSolution, n: int, h_max: float, rng) -> list:
    spec = sol.spec
    width = spec.rho_e - spec.rho_c
    out = []
    tries = 0
    while len(out) < n:
        tries += 1
        if tries > 100 * n:
            raise ValueError("coating too thin for the requested finite-difference step")
        rho = rng.uniform(spec.rho_c + 0.2 * width, spec.rho_e - 0.2 * width)
        x = interface_points(spec, rho, 1, rng)[0]
        stencil = x[:, None] + h_max * np.hstack([np.eye(3), -np.eye(3)])
        r = rho_from_cartesian(stencil, spec)
        if np.all((r > spec.rho_c) & (r < spec.rho_e)):
            out.append((x, rho))
    return out


def pde_residual(sol: AnalyticSolution, region: Region = Region.COATING, n_samples: int = 50,
                 h_values=(1e-3, 5e-4, 2.5e-4), seed: int = 0, dps: int = 40) -> dict:
    """Residual of the field equations in the core or the coating.

    Core: the potential is linear, so the flux is constant and its divergence
    vanishes identically; 0.0 is returned.

    Coating: the 7-point Laplacian of the analytic potential at ``n_samples``
    points for each step in ``h_values`` (evaluated in ``dps``-digit
    arithmetic so round-off does not mask the O(h^2) truncation error), the
    ratios between successive steps, and the residual of the radial ODE
    ``phi'' + (g'/g + 1/(c_j^2+rho)) phi' = 0`` by numerical differentiation.
    """
    if region == Region.CORE:
        return {"region": "core", "residual": 0.0}
    if region != Region.COATING:
        raise ValueError(f"region must be CORE or COATING, got {region}")
    rng = np.random.default_rng(seed)
    spec = sol.spec
    j = sol.j
    with mpmath.workdps(dps):
        a = [mpmath.mpf(v) for v in spec.a]
        samples = _coating_samples(sol, n_samples, max(h_values), rng)
        lap_max = []
        for h in h_values:
            hm = mpmath.mpf(h)
            worst = mpmath.mpf(0)
            for x, rho in samples:
                xm = [mpmath.mpf(v) for v in x]
                u0 = _mp_potential(xm, sol, a, rho)
                acc = mpmath.mpf(0)
                for k in range(3):
                    for s in (1, -1):
                        xs = list(xm)
                        xs[k] += s * hm
                        acc += _mp_potential(xs, sol, a, rho)
                    acc -= 2 * u0
                worst = max(worst, abs(acc / hm**2))
            lap_max.append(float(worst))
        ratios = [lap_max[i] / lap_max[i + 1] for i in range(len(lap_max) - 1)]

        ode_worst = 0.0
        phi_diff = 0.0
        for _, rho in samples:
            r = mpmath.mpf(rho)

            def phi(t):
                return _mp_phi(t, sol, a)

            d1 = mpmath.diff(phi, r, 1)
            d2 = mpmath.diff(phi, r, 2)
            coeff = sum(1 / (2 * (a[k] + r)) for k in range(3)) + 1 / (a[j] + r)
            res = d2 + coeff * d1
            ode_worst = max(ode_worst, float(abs(res) / max(abs(d2), abs(coeff * d1))))
            phi_diff = max(phi_diff, abs(varphi(rho, sol) - float(phi(r))) / max(abs(float(phi(r))), 1e-300))
    return {
        "region": "coating",
        "h": list(h_values),
        "laplacian_max": lap_max,
        "ratios": ratios,
        "ode_residual": ode_worst,
        "phi_float_vs_mp": phi_diff,
        "n_samples": n_samples,
    }
