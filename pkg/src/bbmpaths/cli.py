"""Command-line entry point: ``bbmpaths {paths,simulate,verify,figure}``.

Configs are flat TOML files (``key = value`` lines; strings, numbers, booleans
and arrays; no tables).  Exit codes: 0 success, 1 failed verification, 2 usage
or config error, 3 solver failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from pathlib import Path

import tomli

from . import __version__, _io
from .euler_lagrange import DomainError, SolverError, frontier, solve_constrained, solve_unconstrained
from .model import ModelError, OffspringLaw, PotentialParams, validate
from .profiles import default_z_grid, tabulate_profile
from .rate import SampledPath, uniform_grid
from .sim import CapacityExceeded, SimConfig, TubeSpec, run_bbm, tube_count
from .verify import LEVELS, run_level

EXIT_FAIL, EXIT_CONFIG, EXIT_SOLVER = 1, 2, 3

PATHS_KEYS = {"p", "m_beta", "z_expected", "z_almost_sure", "n", "profile_points"}
SIM_KEYS = {"p", "beta", "offspring", "T", "dt", "replicates", "seed", "record_times",
            "max_particles", "on_capacity", "tube_path", "tube_slope", "tube_epsilon",
            "tube_theta", "kill_on_exit", "tube_bridge", "chunk_size"}

FIGURE_CONFIG = {"p": 1.0, "m_beta": 1.0, "z_expected": [0.0, 0.1, 0.25, 0.4, 0.5],
                 "z_almost_sure": [0.0, 0.1, 0.25, 0.4, 0.5], "n": 200, "profile_points": 101}


class ConfigError(Exception):
    pass


class SolverFailure(Exception):
    pass


def load_config(path, allowed: set[str]) -> dict:
    try:
        with open(path, "rb") as fh:
            data = tomli.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"config {path} does not parse: {exc}") from exc
    for key, val in data.items():
        if isinstance(val, dict):
            raise ConfigError(f"config must be flat; table found at key {key!r}")
        if key not in allowed:
            raise ConfigError(f"unknown config key {key!r}")
    return data


def config_digest(subcommand: str, config: dict, seed) -> str:
    canon = json.dumps({"subcommand": subcommand, "config": config, "seed": seed,
                        "version": __version__}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


class Run:
    """Collects output paths and writes the manifest; every payload embeds the digest."""

    def __init__(self, subcommand: str, config: dict, seed, out: Path):
        self.subcommand, self.config, self.seed, self.out = subcommand, config, seed, out
        self.digest = config_digest(subcommand, config, seed)
        self.paths: list[str] = []
        self.started = time.time()

    @property
    def comment(self) -> str:
        return f"digest={self.digest} subcommand={self.subcommand} version={__version__}"

    def stamp(self) -> dict:
        return {"digest": self.digest, "subcommand": self.subcommand, "seed": self.seed,
                "version": __version__}

    def write(self, name: str, text: str) -> Path:
        path = _io.atomic_write_text(self.out / name, text)
        self.paths.append(name)
        return path

    def finish(self, **extra) -> None:
        manifest = dict(self.stamp(), config=self.config, outputs=sorted(self.paths),
                        wall_clock_s=time.time() - self.started, **extra)
        _io.atomic_write_text(self.out / "manifest.json", _io.json_text(manifest))


def _floats(cfg, key, default=None) -> list[float]:
    val = cfg.get(key, default)
    if val is None:
        raise ConfigError(f"missing config key {key!r}")
    vals = val if isinstance(val, list) else [val]
    try:
        return [float(v) for v in vals]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"key {key!r} must hold numbers") from exc


def _params(beta: float, p: float, offspring=None) -> PotentialParams:
    """Validated parameters; ``offspring`` is a list of [k, probability] pairs (default A = 1)."""
    try:
        law = OffspringLaw.constant(1) if offspring is None else OffspringLaw(offspring)
        return validate(PotentialParams(beta=beta, p=p, m=law.mean, offspring=law))
    except (ModelError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _tag(x: float) -> str:
    return f"{x:g}"


def cmd_paths(cfg: dict, run: Run) -> None:
    n = int(cfg.get("n", 200))
    npts = int(cfg.get("profile_points", 101))
    z_exp = _floats(cfg, "z_expected", [])
    z_as = _floats(cfg, "z_almost_sure", [])
    for p in _floats(cfg, "p"):
        for mb in _floats(cfg, "m_beta", 1.0):
            P = _params(mb, p)  # A = 1, so beta = m_beta
            stem = f"p{_tag(p)}_mb{_tag(mb)}"
            s = uniform_grid(n)
            run.write(f"frontier_{stem}.csv",
                      _io.csv_text(["s", "r"], zip(s.tolist(), frontier(P, s).tolist()), run.comment))
            for kind, zs, solve, prefix in (("expected", z_exp, solve_unconstrained, "h"),
                                            ("almost_sure", z_as, solve_constrained, "g")):
                for z in zs:
                    try:
                        res = solve(P, abs(z), n=n)
                    except (DomainError, SolverError) as exc:
                        raise SolverFailure(f"{kind} path failed for p={p}, m_beta={mb}, z={z}: {exc}")
                    path = -res.path if z < 0 else res.path
                    name = f"{prefix}_{stem}_z{_tag(z)}"
                    run.write(name + ".csv", _io.csv_text(
                        ["s", "f"], zip(path.grid.tolist(), path.values.tolist()), run.comment))
                    run.write(name + ".json", _io.json_text(dict(res.sidecar(), manifest=run.stamp())))
                try:
                    prof = tabulate_profile(P, kind, default_z_grid(P, kind, npts))
                except (DomainError, SolverError, RuntimeError) as exc:
                    raise SolverFailure(f"{kind} profile failed for p={p}, m_beta={mb}: {exc}")
                run.write(f"profile_{kind}_{stem}.csv", prof.to_csv(comment=run.comment))


def _tube(cfg: dict):
    shape = cfg.get("tube_path")
    if shape is None:
        return None
    slope = float(cfg.get("tube_slope", 1.0))
    shapes = {"zero": lambda s: 0.0 * s, "linear": lambda s: slope * s,
              "quadratic": lambda s: slope * s * s}
    if shape not in shapes:
        raise ConfigError(f"tube_path must be one of {sorted(shapes)}, got {shape!r}")
    try:
        return TubeSpec(SampledPath.from_function(shapes[shape], 1024), float(cfg["tube_epsilon"]),
                        float(cfg.get("tube_theta", 1.0)), bool(cfg.get("kill_on_exit", True)),
                        bool(cfg.get("tube_bridge", False)))
    except KeyError as exc:
        raise ConfigError("tube_path given without tube_epsilon") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def build_sim_config(cfg: dict, seed) -> SimConfig:
    if seed is None:
        raise ConfigError("no seed given: set 'seed' in the config or pass --seed")
    P = _params(float(cfg.get("beta", 1.0)), float(cfg.get("p", 0.0)), cfg.get("offspring"))
    try:
        T = float(cfg["T"])
        return SimConfig(P, T, int(cfg.get("replicates", 100)), int(seed),
                         dt=float(cfg.get("dt", 1e-3)),
                         max_particles=int(cfg.get("max_particles", 50_000_000)),
                         tube=_tube(cfg), record_times=tuple(_floats(cfg, "record_times", [T])),
                         on_capacity=str(cfg.get("on_capacity", "abort")),
                         chunk_size=int(cfg.get("chunk_size", 1024)))
    except KeyError as exc:
        raise ConfigError(f"missing config key {exc.args[0]!r}") from exc
    except (ValueError, ModelError) as exc:
        raise ConfigError(str(exc)) from exc


def cmd_simulate(cfg: dict, run: Run, sim_cfg: SimConfig) -> None:
    truncated = False
    try:
        out = tube_count(sim_cfg) if sim_cfg.tube is not None else run_bbm(sim_cfg)
    except CapacityExceeded as exc:
        out, truncated = exc.partial, True
    reference = None
    if sim_cfg.params.p == 0.0:
        # E N(t) = exp(m beta t) exactly when the rate is constant
        reference = {"mean_population_exact": [math.exp(sim_cfg.params.m_beta * t) for t in out.times]}
    text = out.to_json(manifest=run.stamp())
    if reference is not None:
        payload = json.loads(text)
        payload["reference"] = reference
        text = _io.json_text(payload)
    run.write("outcome.json", text)
    run.write("outcome.csv", out.to_csv(comment=run.comment))
    run.finish(truncated=truncated)


def cmd_verify(level: str, out: Path | None) -> int:
    results = run_level(level, echo=print)
    ok = all(r.passed for r in results)
    if out is not None:
        report = {"level": level, "passed": ok, "version": __version__,
                  "criteria": [r.to_dict() for r in results]}
        _io.atomic_write_text(out / "verify.json", _io.json_text(report))
    print(f"overall: {'PASS' if ok else 'FAIL'}")
    return 0 if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bbmpaths", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (("paths", "optimal paths, frontier and growth profiles"),
                        ("simulate", "Monte Carlo simulation of the branching process"),
                        ("figure", "data for the p=1 paths-and-profiles figure")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", type=Path, required=(name != "figure"))
        sp.add_argument("--out", type=Path, default=Path("out"))
        if name == "simulate":
            sp.add_argument("--seed", type=int)
    sp = sub.add_parser("verify", help="run the acceptance criteria")
    sp.add_argument("--level", choices=LEVELS, default="fast")
    sp.add_argument("--out", type=Path)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(args.level, args.out)
        if args.command == "simulate":
            cfg = load_config(args.config, SIM_KEYS)
            seed = args.seed if args.seed is not None else cfg.get("seed")
            sim_cfg = build_sim_config(cfg, seed)
            cmd_simulate(cfg, Run("simulate", cfg, int(seed), args.out), sim_cfg)
            return 0
        cfg = dict(FIGURE_CONFIG) if args.config is None else load_config(args.config, PATHS_KEYS)
        run = Run(args.command, cfg, None, args.out)
        cmd_paths(cfg, run)
        run.finish()
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
