"""Command line experiment runner.

Subcommands::

    nitsche-uppr study  [config] [--example E] [--levels L] [--out DIR] [--tol T] [--set key=value ...]
    nitsche-uppr solve  [config] [--example E] [--n N] ...
    nitsche-uppr mesh   --interface NAME --out FILE [--theta T --n0 N --max-levels M]
    nitsche-uppr check  --interface NAME (--n N | --mesh FILE)

Config files are flat ``key = value`` text; ``#`` starts a comment.
Exit codes: 0 success, 2 interface assumption violated, 3 solver failure,
4 bad configuration, 1 any other pipeline error.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from dataclasses import dataclass, fields, replace

from . import analysis, interfaces
from .analysis import ConvergenceReport, error_norms, solve_problem
from .errors import (AssumptionViolation, BudgetExceeded, ConfigError, IndefiniteDetected, NitscheError,
                     NotConverged)
from .io import emit_fields
from .mesh import read_mesh, uniform_mesh, write_mesh
from .problems import CATALOG, affine, get_problem

log = logging.getLogger("nitsche_uppr")

EXIT_OK, EXIT_OTHER, EXIT_ASSUMPTION, EXIT_SOLVER, EXIT_CONFIG = 0, 1, 2, 3, 4
UNIFORM_N0 = 32          # h = 2/32 = 1/16 on the first level
DESK_MAX_N = 512         # h = 1/256


@dataclass(frozen=True)
class ExperimentConfig:
    example: str = "ex51a"
    levels: int = 4
    n0: int = 16
    theta: float = 0.8
    max_levels: int = 24
    solver_tol: float = 1e-10
    solver_maxit: int = 0              # 0 -> solver default
    q_penalty_scaling: str = "with_hinv"
    penalty_scale: float = 1.0
    output_dir: str = "results"
    emit_fields: bool = False
    curved_subdivisions: int = 8
    check: str = ""                    # raise | warn | off; empty -> per example
    beta1: float = 3.0                 # custom example only
    beta2: float = 7.0
    allow_large: bool = False

    def validate(self) -> "ExperimentConfig":
        if self.example not in CATALOG:
            raise ConfigError(f"example: unknown {self.example!r}; choose from {sorted(CATALOG)}")
        if self.levels < 1:
            raise ConfigError("levels: must be >= 1")
        if self.q_penalty_scaling not in ("with_hinv", "paper_literal"):
            raise ConfigError("q_penalty_scaling: must be with_hinv or paper_literal")
        if self.check not in ("", "raise", "warn", "off"):
            raise ConfigError("check: must be raise, warn or off")
        if not (self.solver_tol > 0 and self.theta > 0 and self.penalty_scale > 0):
            raise ConfigError("solver_tol, theta and penalty_scale must be positive")
        if self.curved_subdivisions < 1 or self.n0 < 2 or self.max_levels < 0 or self.solver_maxit < 0:
            raise ConfigError("curved_subdivisions >= 1, n0 >= 2, max_levels >= 0, solver_maxit >= 0 required")
        return self


_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _convert(key, raw, where):
    kind = _TYPES.get(key)
    if kind is None:
        raise ConfigError(f"{where}: unknown key {key!r}")
    raw = raw.strip()
    try:
        if kind == "bool":
            low = raw.lower()
            if low not in ("1", "0", "true", "false", "yes", "no", "on", "off"):
                raise ValueError(raw)
            return low in ("1", "true", "yes", "on")
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"{where}: {key} expects {kind}, got {raw!r}") from None


def parse_config(text: str, source: str = "<config>") -> dict:
    """``key = value`` lines to a dict of typed values."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value, got {line!r}")
        key, raw = line.split("=", 1)
        key = key.strip()
        out[key] = _convert(key, raw, f"{source}:{lineno}")
    return out


def load_config(path=None, overrides=None) -> ExperimentConfig:
    values = {}
    if path is not None:
        try:
            with open(path) as fh:
                values.update(parse_config(fh.read(), str(path)))
        except OSError as exc:
            raise ConfigError(f"{path}: {exc.strerror}") from None
    for key, raw in (overrides or {}).items():
        values[key] = raw if not isinstance(raw, str) else _convert(key, raw, f"--{key}")
    return ExperimentConfig(**values).validate()


# -- experiments -----------------------------------------------------------------

def _problem(cfg: ExperimentConfig):
    if cfg.example == "custom":
        return affine(beta1=cfg.beta1, beta2=cfg.beta2)
    return get_problem(cfg.example)


def _check_mode(cfg, problem):
    return cfg.check or problem.meta.get("check", "raise")


def level_meshes(cfg: ExperimentConfig, problem):
    """Yield the mesh of every level."""
    if problem.meta.get("mesh") == "adaptive":
        mesh = analysis.adaptive_initial_mesh(problem.interface, cfg.theta, cfg.n0, cfg.max_levels)
        yield mesh
        for _ in range(cfg.levels):
            mesh, repaired = analysis.refine_level(mesh, problem.interface)
            if repaired:
                log.info("repaired %d element(s) after refinement", repaired)
            yield mesh
    else:
        n_last = UNIFORM_N0 * 2 ** (cfg.levels - 1)
        if n_last > DESK_MAX_N and not cfg.allow_large:
            raise ConfigError(f"levels: {cfg.levels} reaches h=1/{n_last // 2}; set allow_large = true to go "
                              f"below h=1/{DESK_MAX_N // 2}")
        for k in range(cfg.levels):
            yield uniform_mesh(UNIFORM_N0 * 2 ** k)


def _solve(cfg, mesh, problem):
    return solve_problem(mesh, problem, check=_check_mode(cfg, problem), tol=cfg.solver_tol,
                         maxit=cfg.solver_maxit or None, q_hinv=cfg.q_penalty_scaling == "with_hinv",
                         penalty_scale=cfg.penalty_scale)


def run(cfg: ExperimentConfig, write: bool = True) -> ConvergenceReport:
    """Convergence study; writes ``<example>.csv`` and ``<example>.txt`` into ``output_dir``."""
    cfg.validate()
    problem = _problem(cfg)
    mode = "by_dof" if problem.meta.get("mesh") == "adaptive" else "by_h"
    rows = []
    for level, mesh in enumerate(level_meshes(cfg, problem)):
        t0 = time.perf_counter()
        state = _solve(cfg, mesh, problem)
        err = error_norms(state, subdivisions=cfg.curved_subdivisions)
        err.extra.update(iterations=state.report.iterations, violations=int(state.classification.violations.size))
        rows.append(err)
        log.info("%s level %d: %d dofs, De %.3e, %d CG its, %.1fs", cfg.example, level, err.ndofs, err.De,
                 state.report.iterations, time.perf_counter() - t0)
        if write and cfg.emit_fields:
            emit_fields(state, os.path.join(cfg.output_dir, f"{cfg.example}_level{level}"))
    report = ConvergenceReport(cfg.example, rows, mode)
    if write:
        os.makedirs(cfg.output_dir, exist_ok=True)
        report.to_csv(os.path.join(cfg.output_dir, f"{cfg.example}.csv"))
        with open(os.path.join(cfg.output_dir, f"{cfg.example}.txt"), "w") as fh:
            fh.write(report.to_text())
    return report


# -- command line -------------------------------------------------------------------

def _overrides(args) -> dict:
    out = {}
    for key, attr in (("example", "example"), ("levels", "levels"), ("output_dir", "out"), ("solver_tol", "tol")):
        value = getattr(args, attr, None)
        if value is not None:
            out[key] = value
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, raw = item.split("=", 1)
        out[key.strip()] = raw
    return out


def _cmd_study(args):
    cfg = load_config(args.config, _overrides(args))
    report = run(cfg)
    print(report.to_text(), end="")
    return EXIT_OK


def _cmd_solve(args):
    cfg = load_config(args.config, _overrides(args))
    problem = _problem(cfg)
    if args.n:
        mesh = uniform_mesh(args.n)
    elif args.mesh:
        mesh = read_mesh(args.mesh)
    else:
        mesh = next(iter(level_meshes(replace(cfg, levels=1), problem)))
    state = _solve(cfg, mesh, problem)
    err = error_norms(state, subdivisions=cfg.curved_subdivisions)
    eta, true, ratio = analysis.effectivity(state, err)
    print(f"{problem.name}: {mesh.n_triangles} triangles, {err.ndofs} dofs, {len(state.infos)} cut elements")
    print(f"CG: {state.report.iterations} iterations, relative residual {state.report.residual:.2e}")
    print(f"De = {err.De:.4e}  Die = {err.Die:.4e}  Dre = {err.Dre:.4e}")
    print(f"eta_h = {eta:.4e}  weighted error = {true:.4e}  effectivity = {ratio:.4f}")
    if cfg.emit_fields:
        for path in emit_fields(state, os.path.join(cfg.output_dir, f"{cfg.example}_level0")):
            print(path)
    return EXIT_OK


def _cmd_mesh(args):
    iface = _interface(args.interface)
    mesh = analysis.adaptive_initial_mesh(iface, args.theta, args.n0, args.max_levels)
    write_mesh(mesh, args.out)
    print(f"{mesh.n_triangles} triangles, {mesh.n_vertices} vertices -> {args.out}")
    return EXIT_OK


def _cmd_check(args):
    iface = _interface(args.interface)
    if args.mesh:
        mesh = read_mesh(args.mesh)
    elif args.n:
        mesh = uniform_mesh(args.n)
    else:
        raise ConfigError("check needs --n or --mesh")
    rep = analysis.check_assumption2(mesh, iface)
    if rep.ok:
        print("ok")
        return EXIT_OK
    P = mesh.corner_coordinates()[rep.violations].mean(axis=1)
    for t, (x, y) in zip(rep.violations, P):
        print(f"violation: element {t} near ({x:.6f}, {y:.6f})")
    return EXIT_ASSUMPTION


def _interface(name):
    try:
        return interfaces.get_interface(name)
    except KeyError as exc:
        raise ConfigError(str(exc.args[0])) from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nitsche-uppr", description=__doc__.split("\n")[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def experiment(name, help_):
        s = sub.add_parser(name, help=help_)
        s.add_argument("config", nargs="?", help="key = value config file")
        s.add_argument("--example")
        s.add_argument("--levels", type=int)
        s.add_argument("--out", help="output directory")
        s.add_argument("--tol", type=float, help="relative CG residual tolerance")
        s.add_argument("--set", action="append", metavar="KEY=VALUE", help="override any config key")
        return s

    experiment("study", "convergence table over refinement levels").set_defaults(func=_cmd_study)
    s = experiment("solve", "single solve with error and estimator summary")
    s.add_argument("--n", type=int, help="use uniform_mesh(n)")
    s.add_argument("--mesh", help="read a mesh file instead")
    s.set_defaults(func=_cmd_solve)

    s = sub.add_parser("mesh", help="write the adaptive initial mesh of an interface")
    s.add_argument("--interface", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--theta", type=float, default=0.8)
    s.add_argument("--n0", type=int, default=16)
    s.add_argument("--max-levels", type=int, default=24)
    s.set_defaults(func=_cmd_mesh)

    s = sub.add_parser("check", help="audit the two-crossing rule on a mesh")
    s.add_argument("--interface", required=True)
    s.add_argument("--n", type=int)
    s.add_argument("--mesh")
    s.set_defaults(func=_cmd_check)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (AssumptionViolation, BudgetExceeded) as exc:
        elems = getattr(exc, "elements", [])
        print(f"assumption violated: {exc} (elements {list(elems)[:10]})", file=sys.stderr)
        return EXIT_ASSUMPTION
    except (NotConverged, IndefiniteDetected) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except NitscheError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OTHER


if __name__ == "__main__":
    sys.exit(main())
