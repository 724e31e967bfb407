"""Command-line front end.

Every subcommand accepts ``--config FILE`` (``key = value`` lines) and an
equivalent ``--key value`` flag for each configuration key; flags win over
the file, and ``LOGNS_OUT`` overrides the configured output directory.

Exit status: 0 success, 1 invalid configuration, 2 non-convergence or a
refused (non-finite) output, 3 failed property suite.
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .domain import GridSpec, kinetic_split
from .energy import RegularizationParams
from .io import (
    ConfigError,
    NonFiniteRowError,
    SnapshotError,
    emit_csv,
    read_config,
    read_field_snapshot,
    write_field_snapshot,
    write_manifest,
)

log = logging.getLogger("logns")

EXIT_OK, EXIT_CONFIG, EXIT_NONCONVERGED, EXIT_SUITE = 0, 1, 2, 3
MANIFEST_NAME = "manifest.json"
FAILED_MARKER = ".failed"
MANIFEST_FORMAT = "logns-manifest/1"

GAUSSON_THETA = math.sqrt(2.0 * math.pi * math.sqrt(math.pi) * math.e**3)


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _floats(s: str) -> tuple[float, ...]:
    vals = tuple(float(x) for x in s.split(",") if x.strip())
    if not vals:
        raise ValueError("empty list")
    return vals


def _pos(v):
    return v > 0


def _nonneg(v):
    return v >= 0


@dataclass(frozen=True)
class Key:
    parse: Callable[[str], Any]
    default: Any
    check: Callable[[Any], bool] | None = None
    help: str = ""


GRID_KEYS = {
    "d": Key(int, 1, _nonneg, "number of unbounded axes"),
    "n": Key(int, 1, _nonneg, "number of torus axes"),
    "L": Key(float, 12.0, _pos, "half width of the truncated unbounded axes"),
    "points_x": Key(int, 256, lambda v: v >= 8 and v % 2 == 0, "samples per unbounded axis"),
    "points_y": Key(int, 32, lambda v: v >= 8 and v % 2 == 0, "samples per torus axis"),
}
COMMON_KEYS = {
    "out": Key(str, "", None, "output directory"),
    "seed": Key(int, 0, _nonneg, "random seed"),
}
FLOW_KEYS = {
    "theta": Key(float, GAUSSON_THETA, _pos, "L2 norm of the constraint (mass is theta^2)"),
    "mu": Key(float, 1.0, _nonneg, "anisotropy weight"),
    "init": Key(str, "random", lambda v: v in ("gausson", "gausson-tent", "random", "file"), "initial guess"),
    "initial": Key(str, "", None, "snapshot used when init = file"),
    "restarts": Key(int, 4, _pos, "random restarts"),
    "tol": Key(float, 1e-8, _pos, "constrained residual tolerance"),
    "max_steps": Key(int, 5000, _nonneg, "iteration cap"),
    "dt0": Key(float, 0.1, _pos, "initial step"),
    "dt_min": Key(float, 1e-6, _pos, "step floor"),
    "eps_sat": Key(float, 0.0, _nonneg, "saturation of the logarithm"),
}

SCHEMAS: dict[str, dict[str, Key]] = {
    "groundstate": {**COMMON_KEYS, **GRID_KEYS, **FLOW_KEYS,
                    "snapshot": Key(_bool, True, None, "write the minimizer snapshot")},
    "mu-scan": {**COMMON_KEYS, **GRID_KEYS, **FLOW_KEYS,
                "mu_min": Key(float, 1e-2, _pos, "smallest mu"),
                "mu_max": Key(float, 1e3, _pos, "largest mu"),
                "mu_count": Key(int, 13, lambda v: v >= 3, "number of log-spaced mu values"),
                "warm_start": Key(_bool, True, None, "seed each mu from the previous minimizer"),
                "sentinels": Key(int, 3, _nonneg, "cold-start cross-checks")},
    "evolve": {**COMMON_KEYS, **GRID_KEYS, **FLOW_KEYS,
               "dt": Key(float, 5e-4, _pos, "time step"),
               "t_end": Key(float, 10.0, _pos, "horizon"),
               "record_every": Key(int, 500, _pos, "steps between trajectory samples"),
               "delta_pert": Key(float, 1e-3, _nonneg, "perturbation size (unit H1 bump)"),
               "lambda_sign": Key(int, 1, lambda v: v in (1, -1), "sign of the nonlinearity"),
               "evolve_eps_sat": Key(float, 0.0, _nonneg, "saturation used during time stepping"),
               "snapshot_every": Key(int, 0, _nonneg, "dump a snapshot every k samples (0: none)")},
    "bounds": {**COMMON_KEYS,
               "theta": Key(float, 6.0, _pos, "L2 norm of the constraint"),
               "d": Key(int, 1, _pos, "number of unbounded axes"),
               "n": Key(int, 1, _pos, "number of torus axes"),
               "a_values": Key(_floats, (0.5, 1.0, 1.5, 2.0, 2.5, 3.0, math.pi - 0.05), None, "tent parameters"),
               "eps_moll": Key(float, 1e-3, _pos, "mollifier width"),
               "ell": Key(float, 1.0, _pos, "box edge for the eigenfunction test"),
               "r_values": Key(_floats, (0.25, 0.5, 1.0, 2.0, 4.0, 8.0), None, "dilations")},
    "verify": {**COMMON_KEYS, **GRID_KEYS,
               "suite": Key(str, "all", None, "property suite name or 'all'")},
    "oracle": {**COMMON_KEYS,
               "theta": Key(float, GAUSSON_THETA, _pos, "L2 norm on the waveguide"),
               "d": Key(int, 1, _pos, "number of unbounded axes"),
               "n": Key(int, 1, _nonneg, "number of torus axes")},
}

COMMANDS = tuple(SCHEMAS)


def resolve_config(command: str, file_values: dict[str, str], flag_values: dict[str, str]) -> dict[str, Any]:
    """Merge defaults < config file < flags, parse and validate every value."""
    schema = SCHEMAS[command]
    unknown = sorted(set(file_values) - set(schema))
    if unknown:
        raise ConfigError(f"unknown configuration keys for {command}: {', '.join(unknown)}")
    cfg: dict[str, Any] = {}
    for key, spec in schema.items():
        raw = flag_values.get(key, file_values.get(key))
        if raw is None:
            cfg[key] = spec.default
            continue
        try:
            val = spec.parse(raw)
        except ValueError as exc:
            raise ConfigError(f"{key}: cannot parse {raw!r}: {exc}") from exc
        if isinstance(val, float) and not math.isfinite(val):
            raise ConfigError(f"{key}: value must be finite")
        if spec.check is not None and not spec.check(val):
            raise ConfigError(f"{key}: value {raw!r} out of range")
        cfg[key] = val
    if os.environ.get("LOGNS_OUT"):
        cfg["out"] = os.environ["LOGNS_OUT"]
    if not cfg["out"]:
        cfg["out"] = os.path.join("runs", command)
    _cross_validate(command, cfg)
    return cfg


def _cross_validate(command: str, cfg: dict) -> None:
    if "dt0" in cfg and not cfg["dt0"] > cfg["dt_min"]:
        raise ConfigError("dt0 must exceed dt_min")
    if cfg.get("init") == "file" and not cfg.get("initial"):
        raise ConfigError("init = file needs an initial snapshot path")
    if command == "mu-scan" and not cfg["mu_max"] > cfg["mu_min"]:
        raise ConfigError("mu_max must exceed mu_min")
    if command == "bounds":
        if any(not 0 < a < math.pi for a in cfg["a_values"]):
            raise ConfigError("a_values must lie in (0, pi)")
        if any(not 2 * cfg["eps_moll"] < a for a in cfg["a_values"]):
            raise ConfigError("eps_moll must be below a/2 for every a")
        if any(r <= 0 for r in cfg["r_values"]):
            raise ConfigError("r_values must be positive")
    if command == "verify":
        from .propcheck import SUITES

        if cfg["suite"] != "all" and cfg["suite"] not in SUITES:
            raise ConfigError(f"suite must be 'all' or one of {', '.join(SUITES)}")
    if "d" in cfg and "points_x" in cfg:
        try:
            _grid(cfg)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def _grid(cfg) -> GridSpec:
    return GridSpec(d=cfg["d"], n=cfg["n"], L=cfg["L"], points_x=cfg["points_x"], points_y=cfg["points_y"])


def _flow_config(cfg, grid):
    from .gradflow import FlowConfig

    initial = None
    if cfg["init"] == "file":
        initial = read_field_snapshot(cfg["initial"], expect=grid)
    return FlowConfig(
        theta=cfg["theta"], mu=cfg["mu"], reg=RegularizationParams(cfg["eps_sat"]), dt0=cfg["dt0"],
        dt_min=cfg["dt_min"], tol=cfg["tol"], max_steps=cfg["max_steps"], init=cfg["init"],
        restarts=cfg["restarts"], seed=cfg["seed"], initial=initial,
    )


def _clean(obj):
    """JSON-safe copy: tuples to lists, non-finite floats to None, numpy scalars to Python."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


class RunFailure(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


# --- experiments: each returns (summary dict, exit status) -------------------------


def cmd_groundstate(cfg, out: Path):
    from .gradflow import minimize, pohozaev_residual
    from .oracle import waveguide_reference

    grid = _grid(cfg)
    res = minimize(_flow_config(cfg, grid), grid)
    kx, ky = kinetic_split(res.field)
    ref = waveguide_reference(cfg["theta"], grid.d, grid.n) if grid.d >= 1 else float("nan")
    row = (res.m, kx, ky, res.lambda_rayleigh, res.lambda_energy, res.residual, res.steps, res.converged,
           res.boundary_mass, pohozaev_residual(res.field, cfg["theta"]))
    emit_csv([row], ("m", "Kx", "Ky", "lambda_rayleigh", "lambda_energy", "residual", "steps", "converged",
                     "boundary_mass", "pohozaev"), out / "groundstate.csv")
    if cfg["snapshot"]:
        write_field_snapshot(res.field, out / "groundstate.logns")
    summary = {
        "m": res.m, "reduced_reference": ref, "gap": res.m - ref, "Kx": kx, "Ky": ky,
        "lambda_rayleigh": res.lambda_rayleigh, "lambda_energy": res.lambda_energy,
        "residual": res.residual, "steps": res.steps, "converged": res.converged,
        "restart_energies": res.restart_energies,
    }
    return summary, EXIT_OK if res.converged else EXIT_NONCONVERGED


def cmd_mu_scan(cfg, out: Path):
    from .depscan import CSV_HEADER, MuScanConfig, classify, reduced_reference, scan

    grid = _grid(cfg)
    mus = tuple(np.logspace(math.log10(cfg["mu_min"]), math.log10(cfg["mu_max"]), cfg["mu_count"]))
    base = _flow_config(cfg, grid)
    records = scan(MuScanConfig(theta=cfg["theta"], grid=grid, mu_list=mus, base=base,
                                warm_start=cfg["warm_start"], sentinels=cfg["sentinels"]))
    emit_csv([r.csv_row() for r in records], CSV_HEADER, out / "mu_scan.csv")
    ref = reduced_reference(cfg["theta"], grid) if grid.d >= 1 else None
    closed = records[0].reduced_ref
    cls = classify(records, closed)
    converged = all(r.converged for r in records)
    summary = {
        "classification": str(cls), "case": cls.case, "mu_star": cls.mu_star, "monotone": cls.monotone,
        "reduced_reference": closed, "reduced_reference_numeric": ref.numeric if ref else None,
        "reduced_reference_agrees": ref.agrees if ref else None,
        "max_m_minus_reference": max(r.m - closed for r in records),
        "ky_last": records[-1].ky, "mu_ky_last": records[-1].mu_ky, "all_converged": converged,
    }
    return summary, EXIT_OK if converged else EXIT_NONCONVERGED


def cmd_evolve(cfg, out: Path):
    from .evolve import EvolveConfig, stability_experiment
    from .gradflow import minimize

    grid = _grid(cfg)
    if cfg["init"] == "file":
        u0 = read_field_snapshot(cfg["initial"], expect=grid)
        converged = True
    else:
        gs = minimize(_flow_config(cfg, grid), grid)
        u0, converged = gs.field, gs.converged
    steps = max(1, int(round(cfg["t_end"] / cfg["dt"])))
    ecfg = EvolveConfig(dt=cfg["dt"], steps=steps, reg=RegularizationParams(cfg["evolve_eps_sat"]),
                        lambda_sign=cfg["lambda_sign"], record_every=cfg["record_every"])
    snaps: list[tuple[float, Any]] = []
    rep = stability_experiment(u0, cfg["delta_pert"], ecfg, seed=cfg["seed"],
                               snapshot_every=cfg["snapshot_every"], snapshots=snaps)
    emit_csv([(s.t, s.mass, s.energy, s.orbital_distance, s.boundary_mass) for s in rep.samples],
             ("t", "mass", "energy", "orbdist", "boundary_mass"), out / "trajectory.csv")
    for k, (t, u) in enumerate(snaps):
        write_field_snapshot(u, out / f"snapshot_{k:04d}.logns")
    summary = {
        "max_orbital_distance": rep.max_distance, "initial_distance": rep.initial_distance,
        "mass_drift": rep.mass_drift, "energy_drift": rep.energy_drift, "steps": steps,
        "ground_state_converged": converged,
        "distance_note": "H1 distance to the phase/grid-translation orbit plus |int F1(psi) - int F1(u0)|",
    }
    return summary, EXIT_OK if converged else EXIT_NONCONVERGED


def cmd_bounds(cfg, out: Path):
    from .bounds import EigenBoxParams, eigen_testfield_scan, upper_bound_I0

    table = upper_bound_I0(cfg["theta"], cfg["a_values"], cfg["eps_moll"], cfg["d"], cfg["n"])
    emit_csv(
        [(r.a, r.eps_moll, r.norm_sq, r.reduced_term, r.remainder, r.energy, r.reference, r.strict, r.reduced_strict)
         for r in table.rows],
        ("a", "eps_moll", "norm_sq", "reduced_term", "remainder", "I0", "reference", "strict", "reduced_strict"),
        out / "tent_bounds.csv",
    )
    eig = EigenBoxParams(ell=cfg["ell"], theta=cfg["theta"], d=cfg["d"], n=cfg["n"])
    rows = eigen_testfield_scan(eig, cfg["r_values"])
    emit_csv(
        [(r.r, r.energy, r.lower_inverse, r.lower_direct, r.upper, r.in_window_inverse, r.in_window_direct,
          r.negative) for r in rows],
        ("r", "energy", "lower_inverse", "lower_direct", "upper", "in_window_inverse", "in_window_direct",
         "negative"),
        out / "eigen_scan.csv",
    )
    summary = {
        "tent_strict_rows": sum(r.strict for r in table.rows),
        "tent_reduced_strict_rows": sum(r.reduced_strict for r in table.rows),
        "tent_rows": len(table.rows), "tent_monotone_in_a": table.monotone_in_a,
        "eigen_negative_rows": sum(r.negative for r in rows), "eigen_window_empty": rows[0].window_empty,
    }
    return summary, EXIT_OK


def cmd_verify(cfg, out: Path):
    from .propcheck import SUITES, run_suite

    names = SUITES if cfg["suite"] == "all" else (cfg["suite"],)
    results = {}
    for name in names:
        res = run_suite(name, seed=cfg["seed"], grid=_grid(cfg))
        emit_csv(res.rows, res.header, out / f"verify_{name}.csv")
        results[name] = {"passed": res.passed, **res.summary}
    ok = all(r["passed"] for r in results.values())
    return {"suites": results, "all_passed": ok}, EXIT_OK if ok else EXIT_SUITE


def cmd_oracle(cfg, out: Path):
    from .oracle import gausson_spec, reduced_mass, waveguide_reference

    mred = reduced_mass(cfg["theta"], cfg["n"])
    spec = gausson_spec(mred, cfg["d"])
    ref = waveguide_reference(cfg["theta"], cfg["d"], cfg["n"])
    emit_csv([(cfg["d"], cfg["n"], cfg["theta"] ** 2, mred, spec.lam, spec.amplitude, spec.energy, ref)],
             ("d", "n", "theta_sq", "mass_red", "lambda", "amplitude", "m_red", "reference"), out / "oracle.csv")
    return {"lambda": spec.lam, "amplitude": spec.amplitude, "m_red": spec.energy, "reference": ref}, EXIT_OK


HANDLERS = {
    "groundstate": cmd_groundstate,
    "mu-scan": cmd_mu_scan,
    "evolve": cmd_evolve,
    "bounds": cmd_bounds,
    "verify": cmd_verify,
    "oracle": cmd_oracle,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="logns", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"logns {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, schema in SCHEMAS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", help="key = value configuration file")
        for key, spec in schema.items():
            p.add_argument(f"--{key.replace('_', '-')}", dest=f"key_{key}", default=None, help=spec.help)
    return parser


def run_command(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    flags = {k[4:]: v for k, v in vars(args).items() if k.startswith("key_") and v is not None}
    try:
        file_values = read_config(args.config) if args.config else {}
        cfg = resolve_config(args.command, file_values, flags)
    except ConfigError as exc:
        print(f"logns: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    for stale in (out / MANIFEST_NAME, out / FAILED_MARKER):
        if stale.exists():
            stale.unlink()
    started = datetime.now(timezone.utc).isoformat()
    try:
        summary, status = HANDLERS[args.command](cfg, out)
    except (ConfigError, SnapshotError, ValueError) as exc:
        status = EXIT_NONCONVERGED if isinstance(exc, NonFiniteRowError) else EXIT_CONFIG
        (out / FAILED_MARKER).write_text(f"{type(exc).__name__}: {exc}\n")
        print(f"logns: {exc}", file=sys.stderr)
        return status
    except FloatingPointError as exc:
        (out / FAILED_MARKER).write_text(f"{type(exc).__name__}: {exc}\n")
        print(f"logns: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    manifest = {
        "format": MANIFEST_FORMAT,
        "version": __version__,
        "command": args.command,
        "config": _clean(cfg),
        "started": started,
        "finished": datetime.now(timezone.utc).isoformat(),
        "exit_status": status,
        "summary": _clean(summary),
    }
    write_manifest(out / MANIFEST_NAME, manifest)
    return status


def main() -> None:
    sys.exit(run_command())
