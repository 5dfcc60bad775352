"""Command-line front end.

    neutral-inclusions depol     --config problem.json
    neutral-inclusions effective --config problem.json [--axis 2]
    neutral-inclusions verify    --config problem.json --grid-n 64 [--csv field.csv]
    neutral-inclusions pack      --config problem.json --seed 3 --out asm.json
    neutral-inclusions sweep     --config problem.json [--csv sweep.csv]

Reports are JSON with 17 significant digits.  Exit codes: 0 success,
2 configuration error, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import logging
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .assemblage import assemblage_exterior_mask, assemblage_to_field, pack
from .config import ConfigError, ProblemConfig, dumps, load_config, validate_run
from .depolarization import K_factors, depolarization_factors
from .effective import (EffectiveResult, MaterialPair, SingularDenominatorError,
                        effective_conductivity, effective_tensor)
from .field import build_solution, interface_residuals
from .geometry import EllipsoidSpec, g, volume_fraction
from .matching import MatchingProblem
from .verifier import (ClearanceError, ConvergenceError, Grid, effective_from_cell,
                       exterior_uniformity, rasterize, solve_cell, uniformity, write_field_csv)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NONCONVERGENCE = 3

THREADS_ENV = "NEUTRAL_INCLUSIONS_THREADS"

log = logging.getLogger("neutral_inclusions")


class _NonConvergence(Exception):
    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


def worker_count(n_tasks: int) -> int:
    raw = os.environ.get(THREADS_ENV)
    cap = os.cpu_count() or 1
    if raw:
        try:
            cap = int(raw)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
        if cap < 1:
            raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return max(1, min(cap, n_tasks))


def _axes(args, cfg: ProblemConfig):
    return [args.axis] if args.axis is not None else [1, 2, 3]


def cmd_depol(cfg: ProblemConfig, args) -> dict:
    spec = cfg.spec
    dc = depolarization_factors(spec.core_axes)
    de = depolarization_factors(spec.exterior_axes)
    K = K_factors(spec)
    report = {
        "core": {"semi_axes": spec.core_axes, "d": list(dc), "sum": float(sum(dc))},
        "exterior": {"semi_axes": spec.exterior_axes, "d": list(de), "sum": float(sum(de))},
        "theta1": volume_fraction(spec),
        "K": list(K),
    }
    if args.axis is not None:
        j = args.axis - 1
        report["axis"] = {"axis": args.axis, "d_core": float(dc[j]), "d_exterior": float(de[j]),
                          "K": float(K[j])}
    return report


def _axis_report(spec: EllipsoidSpec, mat: MaterialPair, axis: int) -> dict:
    sigma_star, sol = effective_conductivity(spec, mat, axis, return_solution=True)
    prob = MatchingProblem(mat.sigma1, mat.sigma2, mat.E, sol.K, mat.p)
    return {
        "axis": axis,
        "K": sol.K,
        "x0": sol.x0,
        "A1": sol.A1,
        "A2": sol.A2,
        "B2": sol.B2,
        "sigma_star": sigma_star,
        "f_residual": abs(sol.residual),
        "f_scale": prob.f_scale,
    }


def cmd_effective(cfg: ProblemConfig, args) -> dict:
    spec, mat = cfg.spec, cfg.materials
    return {
        "theta1": volume_fraction(spec),
        "g_core": g(spec.rho_c, spec),
        "materials": dataclasses.asdict(mat),
        "axes": [_axis_report(spec, mat, a) for a in _axes(args, cfg)],
    }


def _matrix_sigma(cfg: ProblemConfig, axis: int) -> tuple[float, str]:
    m = cfg.run["matrix"]
    if m == "effective":
        return effective_conductivity(cfg.spec, cfg.materials, axis), "effective"
    if m == "coating":
        return cfg.materials.sigma2, "coating"
    return float(m), "custom"


def _cell_metrics(sol, metric: dict, sigma_eff: float) -> dict:
    return {
        "uniformity_max_u": metric["uniformity_max_u"],
        "uniformity_max_grad": metric["uniformity_max_grad"],
        "sigma_eff": sigma_eff,
        "iterations": sol.iterations,
        "converged": bool(sol.converged),
    }


def _csv_path(args, default_name: str) -> Path | None:
    if args.csv is None:
        return None
    if args.csv is not True:
        return Path(args.csv)
    if args.out:
        return Path(args.out).with_suffix(".csv")
    return Path(default_name)


def cmd_verify(cfg: ProblemConfig, args) -> dict:
    spec, mat, run = cfg.spec, cfg.materials, cfg.run
    axis = run["axis"]
    sigma_m, kind = _matrix_sigma(cfg, axis)
    sigma_star = effective_conductivity(spec, mat, axis)

    analytic = build_solution(spec, mat, axis)
    resid = interface_residuals(analytic, n_samples=run["n_samples"], seed=run["seed"])

    L = run["box_factor"] * float(spec.exterior_axes.max())
    grid = Grid(run["grid_n"], L)
    try:
        fieldc = rasterize(spec, mat, sigma_m, grid, subsample=run["subsample"])
    except ClearanceError as exc:
        raise ConfigError(f"box too small for the inclusion: {exc}") from exc
    sol = solve_cell(fieldc, mat.E, axis, tol=run["tol"], lin_tol=run["lin_tol"],
                     max_iter=run["max_iter"], omega=run["omega"], raise_on_failure=False)
    metric = exterior_uniformity(sol, spec, grid)
    sigma_eff = effective_from_cell(sol, fieldc, grid, axis)
    metrics = _cell_metrics(sol, metric, sigma_eff)
    report = {
        "metrics": metrics,
        "status": "neutral" if metric["uniformity_max_u"] < run["neutral_threshold"] else "non-neutral",
        "neutral_threshold": run["neutral_threshold"],
        "matrix": kind,
        "sigma_matrix": sigma_m,
        "sigma_star": sigma_star,
        "grid": {"n": grid.n, "L": grid.L, "h": grid.h},
        "axis": axis,
        "exterior_cells": metric["n_cells"],
        "residual_log": sol.residual_log,
        "interface_residuals": resid.as_dict(),
    }
    path = _csv_path(args, "field.csv")
    if path is not None:
        write_field_csv(sol, path)
        report["field_csv"] = str(path)
    if not sol.converged:
        raise _NonConvergence("finite-difference solve did not converge", report)
    return report


def cmd_pack(cfg: ProblemConfig, args) -> dict:
    run = cfg.run
    try:
        asm = pack(cfg.spec, run["target_fill"], max_inclusions=run["max_inclusions"],
                   seed=run["seed"], levels=run["levels"], ratio=run["ratio"], lam0=run["lam0"],
                   max_failures=run["max_failures"], materials=cfg.materials)
    except ValueError as exc:
        raise ConfigError(f"packing: {exc}") from exc
    report = asm.to_dict()
    report["n_inclusions"] = len(asm.inclusions)
    if run["verify"]:
        axis = run["axis"]
        sigma_m, kind = _matrix_sigma(cfg, axis)
        grid = Grid(run["grid_n"], 0.5, (0.5, 0.5, 0.5))
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            fieldc = assemblage_to_field(asm, sigma_m, grid, subsample=run["subsample"])
        for w in caught:
            log.warning("%s", w.message)
        sol = solve_cell(fieldc, cfg.materials.E, axis, tol=run["tol"], lin_tol=run["lin_tol"],
                         max_iter=run["max_iter"], omega=run["omega"], raise_on_failure=False)
        metric = uniformity(sol, assemblage_exterior_mask(asm, grid))
        report["verify"] = {
            "metrics": _cell_metrics(sol, metric, effective_from_cell(sol, fieldc, grid, axis)),
            "matrix": kind,
            "sigma_matrix": sigma_m,
            "dropped_volume": fieldc.dropped_volume,
            "grid": {"n": grid.n, "L": grid.L, "h": grid.h},
        }
        if not sol.converged:
            raise _NonConvergence("finite-difference solve did not converge", report)
    return report


def _sweep_point(cfg: ProblemConfig, name: str, value: float) -> EffectiveResult:
    spec, mat = cfg.spec, cfg.materials
    if name == "theta1":
        spec = EllipsoidSpec.from_volume_fraction(spec.exterior_axes, value)
    else:
        mat = dataclasses.replace(mat, **{name: value})
    return effective_tensor(spec, mat)


def cmd_sweep(cfg: ProblemConfig, args) -> dict:
    if cfg.sweep is None:
        raise ConfigError("sweep needs a 'sweep' block with 'parameter' and 'values'")
    name = cfg.sweep["parameter"]
    values = [float(v) for v in cfg.sweep["values"]]

    def one(v):
        try:
            return _sweep_point(cfg, name, v)
        except (ValueError, SingularDenominatorError) as exc:
            raise ConfigError(f"sweep {name}={v!r}: {exc}") from exc

    with ThreadPoolExecutor(max_workers=worker_count(len(values))) as pool:
        results = list(pool.map(one, values))
    rows = []
    for v, res in zip(values, results):
        row = {name: v, "theta1": res.theta1}
        for j in range(3):
            row[f"sigma_star_{j + 1}"] = res.sigma_star[j]
            row[f"A1_{j + 1}"] = res.A1_per_axis[j]
        rows.append(row)
    report = {"parameter": name, "rows": rows}
    path = _csv_path(args, "sweep.csv")
    if path is not None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(list(rows[0]))
            for row in rows:
                w.writerow([format(v, ".17g") for v in row.values()])
        report["csv"] = str(path)
    return report


COMMANDS = {
    "depol": cmd_depol,
    "effective": cmd_effective,
    "verify": cmd_verify,
    "pack": cmd_pack,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="neutral-inclusions",
                                     description="Design and check neutral coated ellipsoidal inclusions.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON problem description")
        p.add_argument("--axis", type=int, choices=(1, 2, 3))
        p.add_argument("--grid-n", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="write the JSON report here instead of stdout")
        p.add_argument("--csv", nargs="?", const=True, default=None,
                       help="also write CSV (optionally to the given path)")
    return parser


def _apply_overrides(cfg: ProblemConfig, args) -> None:
    if args.axis is not None:
        cfg.run["axis"] = args.axis
    if args.grid_n is not None:
        cfg.run["grid_n"] = args.grid_n
    if args.seed is not None:
        cfg.run["seed"] = args.seed
    validate_run(cfg.run)


def _emit(report: dict, out) -> None:
    text = dumps(report) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        _apply_overrides(cfg, args)
        report = COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _NonConvergence as exc:
        _emit(exc.report, args.out)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (ConvergenceError, SingularDenominatorError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    _emit(report, args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
