"""Command-line entry point: ``tfwd <command> [options]``.

Every run writes ``manifest_<command>.json`` (full configuration and library
versions, no timestamps) next to its outputs, so identical manifests mean
identical outputs.

Exit codes: 0 success, 1 failed check or infeasible certificate, 2 usage or
I/O error, 3 solver non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import platform
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np
import scipy

from . import __version__, bounds, checks, edf, radial, semiclassic, specfun, stability

log = logging.getLogger("tfwd")

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2, 3


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    Z: float | None = None
    Z_range: str | None = None
    kappa: float | None = None
    c: float = edf.C_LIGHT
    lam: float = edf.LAMBDA_DEFAULT
    beta: float = 2.0
    nodes: int = 4000
    r_min_factor: float = 1e-6
    r_max_factor: float = 50.0
    tol: float = 1e-9
    out: str = "tfwd_out"
    jobs: int = 1
    seed: int = 0
    density: str | None = None
    inject_fault: str | None = None
    geometry: dict | None = None

    def validate(self) -> None:
        for name in ("Z", "kappa", "c", "lam", "beta", "r_min_factor", "r_max_factor", "tol"):
            v = getattr(self, name)
            if v is not None and not (math.isfinite(v) and v > 0):
                raise UsageError(f"--{name.replace('_', '-')} must be positive, got {v}")
        if self.nodes < 16:
            raise UsageError("--nodes must be at least 16")
        if self.jobs < 1:
            raise UsageError("--jobs must be at least 1")
        if self.inject_fault is not None and self.inject_fault not in checks.FAULTS:
            raise UsageError(f"unknown fault {self.inject_fault!r}")

    def z_values(self) -> list[float]:
        if self.Z_range:
            return parse_z_range(self.Z_range)
        if self.Z is not None:
            return [float(self.Z)]
        raise UsageError("give --Z or --Z-range")

    def require_Z(self) -> float:
        if self.Z is None:
            raise UsageError("--Z is required")
        return float(self.Z)


def parse_z_range(text: str) -> list[float]:
    """``a:b:step`` with b included; ``a:b`` uses step 1."""
    parts = text.split(":")
    try:
        nums = [float(p) for p in parts]
    except ValueError:
        raise UsageError(f"bad --Z-range {text!r}, expected a:b:step") from None
    if len(nums) == 2:
        nums.append(1.0)
    if len(nums) != 3:
        raise UsageError(f"bad --Z-range {text!r}, expected a:b:step")
    a, b, step = nums
    if step <= 0 or a <= 0:
        raise UsageError("--Z-range needs a positive start and step")
    n = int(math.floor((b - a) / step + 1e-9)) + 1
    if n < 1:
        raise UsageError(f"--Z-range {text!r} is empty")
    return [a + i * step for i in range(n)]


# --------------------------------------------------------------------------
# output helpers


def _out_dir(cfg: RunConfig) -> Path:
    path = Path(cfg.out)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {path}: {exc}") from None
    return path


def _dump(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    return str(o)


def _finite(x):
    """JSON-safe float: inf and nan become strings."""
    x = float(x)
    return x if math.isfinite(x) else repr(x)


def write_manifest(cfg: RunConfig, outputs: list[str], extra: dict | None = None) -> Path:
    path = _out_dir(cfg) / f"manifest_{cfg.command.replace('-', '_')}.json"
    manifest = {
        "config": asdict(cfg),
        "outputs": sorted(outputs),
        "versions": {
            "tfwd": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "tolerances": {"tfw_residual": cfg.tol, "phase_space_rtol": 1e-10, "s0_root": "brentq xtol 1e-14"},
    }
    if extra:
        manifest.update(extra)
    _dump(path, manifest)
    return path


# --------------------------------------------------------------------------
# commands


def cmd_verify(cfg: RunConfig) -> int:
    ctx = checks.make_context(seed=cfg.seed, c=cfg.c, lam=cfg.lam, fault=cfg.inject_fault)
    results = checks.run_checks(ctx)
    report = {
        "n_checks": len(results),
        "n_failed": sum(not r.passed for r in results),
        "checks": [r.to_dict() for r in results],
    }
    out = _out_dir(cfg)
    _dump(out / "verify.json", report)
    write_manifest(cfg, ["verify.json"])
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:32s} slack {r.slack: .3e}  {r.detail}")
    return EXIT_OK if report["n_failed"] == 0 else EXIT_CHECK


def cmd_tf_solve(cfg: RunConfig) -> int:
    Z = cfg.require_Z()
    sol = semiclassic.tf_atom(Z, nodes=max(cfg.nodes, 2001))
    out = _out_dir(cfg)
    radial.write_density_csv(out / "tf_density.csv", sol.sigma)
    u = sol.universal
    side = {
        "Z": Z,
        "N": sol.sigma.N,
        "E_TF": sol.E_TF,
        "D_sigma": sol.D_sigma,
        "e_tf_functional": sol.e_tf_constant,
        "e_tf_slope": sol.e_tf_slope,
        "initial_slope": u.slope,
        "length_scale": sol.length_scale,
        "units": "Hartree, Bohr",
    }
    _dump(out / "tf.json", side)
    write_manifest(cfg, ["tf_density.csv", "tf.json"])
    print(json.dumps(side, indent=2))
    return EXIT_OK


def cmd_tfw_solve(cfg: RunConfig) -> int:
    Z = cfg.require_Z()
    sol = semiclassic.solve_tfw(Z, cfg.beta, cfg.nodes, cfg.r_min_factor, cfg.r_max_factor, cfg.tol)
    tf = semiclassic.tf_atom(Z)
    out = _out_dir(cfg)
    radial.write_density_csv(out / "tfw_density.csv", sol.rho_W)
    side = {
        "Z": Z,
        "beta": cfg.beta,
        "N": sol.rho_W.N,
        "excess_charge": sol.excess_charge,
        "energy": sol.energy,
        "E_TF": tf.E_TF,
        "gap_over_Z2": (sol.energy - tf.E_TF) / Z**2,
        "el_residual": sol.el_residual,
        "iterations": sol.iterations,
        "units": "Hartree, Bohr",
    }
    _dump(out / "tfw.json", side)
    write_manifest(cfg, ["tfw_density.csv", "tfw.json"])
    print(json.dumps(side, indent=2))
    return EXIT_OK


def cmd_energy(cfg: RunConfig) -> int:
    if cfg.density:
        try:
            rho = radial.read_density_csv(cfg.density)
        except OSError as exc:
            raise UsageError(f"cannot read density {cfg.density}: {exc}") from None
        Z = float(cfg.Z) if cfg.Z is not None else 0.0
    else:
        # the TF density itself has infinite gradient energy at the nucleus
        Z = cfg.require_Z()
        rho = semiclassic.solve_tfw(Z, cfg.beta, cfg.nodes, cfg.r_min_factor, cfg.r_max_factor, cfg.tol).rho_W
    c = Z / cfg.kappa if cfg.kappa is not None and Z > 0 else cfg.c
    br = edf.total_energy_atomic(rho, edf.AtomicSystem(Z=Z, c=c, lam=cfg.lam))
    out = _out_dir(cfg)
    (out / "energy.json").write_text(br.to_json(indent=2, sort_keys=True) + "\n")
    write_manifest(cfg, ["energy.json"], {"resolved": {"Z": Z, "c": c}})
    print(br.to_json(indent=2))
    return EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    Zs = cfg.z_values()
    kappa = cfg.kappa if cfg.kappa is not None else 1.0
    reports = bounds.asymptotics_sweep(kappa, Zs, cfg.lam, cfg.beta, cfg.nodes, cfg.jobs)
    out = _out_dir(cfg)
    bounds.write_sweep_csv(reports, out / "sweep.csv")
    meta = {"kappa": kappa, "lambda": cfg.lam, "beta": cfg.beta, "nodes": cfg.nodes, "Z": Zs}
    (out / "sweep.json").write_text(bounds.sweep_json(reports, meta) + "\n")
    write_manifest(cfg, ["sweep.csv", "sweep.json"])
    fit = bounds.fit_summary(reports)
    print(json.dumps(fit, indent=2, default=_json_default))
    failed = [r for r in reports if r.error]
    for r in failed:
        log.error("Z=%g: %s", r.Z, r.error)
    return EXIT_SOLVER if failed else EXIT_OK


def _load_geometry(cfg: RunConfig) -> tuple[stability.NuclearConfiguration, float]:
    geo = cfg.geometry
    if geo is None:
        raise UsageError("stability needs --config with centers and charges")
    centers = np.asarray(geo.get("centers", []), dtype=float)
    charges = np.asarray(geo.get("charges", []), dtype=float)
    if charges.size == 0:
        raise UsageError("no nuclei")
    c = float(geo.get("c", cfg.c))
    N = float(geo.get("N", charges.sum()))
    try:
        config = stability.NuclearConfiguration(centers.reshape(-1, 3), charges, c=c, lam=cfg.lam)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return config, N


def cmd_stability(cfg: RunConfig) -> int:
    config, N = _load_geometry(cfg)
    try:
        cert = stability.molecular_certificate(config, N)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = _out_dir(cfg)
    body = {k: (_finite(v) if isinstance(v, float) else v) for k, v in cert.to_dict().items()}
    _dump(out / "stability.json", body)
    write_manifest(cfg, ["stability.json"])
    print(json.dumps(body, indent=2, default=_json_default))
    return EXIT_OK if cert.feasible else EXIT_CHECK


def cmd_specfun_table(cfg: RunConfig) -> int:
    t = np.geomspace(1e-4, 1e4, cfg.nodes)
    cols = {
        "t": t,
        "f_sq": specfun.f_sq(t),
        "F": specfun.F_int_grid(t),
        "tf": specfun.tf_fn(t),
        "X": specfun.x_fn(t),
    }
    out = _out_dir(cfg)
    with open(out / "specfun_table.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in zip(*cols.values()):
            w.writerow([repr(float(v)) for v in row])
    write_manifest(cfg, ["specfun_table.csv"])
    print(f"wrote {out / 'specfun_table.csv'} ({t.size} rows)")
    return EXIT_OK


COMMANDS = {
    "verify": (cmd_verify, "run the inequality and identity checks"),
    "tf-solve": (cmd_tf_solve, "neutral Thomas-Fermi atom: density CSV and energies"),
    "tfw-solve": (cmd_tfw_solve, "Thomas-Fermi-Weizsaecker minimizer: density CSV and energies"),
    "energy": (cmd_energy, "evaluate the relativistic TFWD functional on a density"),
    "sweep": (cmd_sweep, "upper and lower bounds over a range of Z at fixed kappa"),
    "stability": (cmd_stability, "molecular stability certificate from a geometry file"),
    "specfun-table": (cmd_specfun_table, "plot-ready table of f^2, F, tf and X"),
}


# --------------------------------------------------------------------------
# argument handling


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--Z", type=float, help="nuclear charge")
    common.add_argument("--Z-range", dest="Z_range", metavar="a:b:step", help="inclusive range of Z values")
    common.add_argument("--kappa", type=float, help="coupling Z/c")
    common.add_argument("--c", type=float, help=f"speed of light (default {edf.C_LIGHT})")
    common.add_argument("--lambda", dest="lam", type=float, help="Weizsaecker weight (default 1/9)")
    common.add_argument("--beta", type=float, help="TFW gradient weight (default 2)")
    common.add_argument("--nodes", type=int, help="radial grid nodes or table rows (default 4000)")
    common.add_argument("--tol", type=float, help="TFW residual tolerance (default 1e-9)")
    common.add_argument("--density", help="density CSV (columns r,rho) for the energy command")
    common.add_argument("--out", metavar="DIR", help="output directory (default tfwd_out)")
    common.add_argument("--jobs", type=int, help="worker processes for sweep")
    common.add_argument("--seed", type=int, help="seed for randomized checks (default 0)")
    common.add_argument("--config", metavar="FILE", help="JSON file of defaults; for stability also the geometry")
    common.add_argument("--inject-fault", dest="inject_fault", help=argparse.SUPPRESS)
    common.add_argument("-v", "--verbose", action="store_true", help="log progress")

    parser = argparse.ArgumentParser(prog="tfwd", description="Relativistic TFWD energy bounds toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text, description=help_text)
    return parser


_CONFIG_KEYS = {f.name for f in fields(RunConfig)} - {"command", "geometry"}
_CONFIG_ALIASES = {"lambda": "lam", "Z-range": "Z_range", "Z_range": "Z_range"}


def make_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    geometry = None
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise UsageError("config must be a JSON object")
        for k, v in data.items():
            key = _CONFIG_ALIASES.get(k, k)
            if key in _CONFIG_KEYS:
                values[key] = v
        if args.command == "stability":
            geometry = data
    for key in _CONFIG_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    cfg = RunConfig(command=args.command, geometry=geometry, **values)
    cfg.validate()
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = make_config(args)
        return COMMANDS[cfg.command][0](cfg)
    except UsageError as exc:
        print(f"tfwd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except specfun.DomainError as exc:
        print(f"tfwd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except semiclassic.SolverError as exc:
        print(f"tfwd: solver did not converge: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"tfwd: I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
