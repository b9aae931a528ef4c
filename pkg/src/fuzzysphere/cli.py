"""Command-line front end: convergence tables, property verdicts and fixtures.

Exit codes: 0 success, 1 property violation, 2 configuration error,
3 unstable optimizer estimate (the table is still written).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .berezin import berezin_context
from .bridge import SAFETY_FACTOR, SMOOTHING_SCHEDULE, constants_csv, prox_bound
from .errors import ConfigError
from .groupmodel import LENGTH_CONVENTION, cyclic_group_spec, finite_group_load, su2_frame
from .optsolve import DEFAULT_RESTARTS, SPREAD_LIMIT
from .repn import MAX_N, span_check_finite, span_check_su2, spin_irrep
from .statespace import three_point_fixture

log = logging.getLogger("fuzzysphere")

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG, EXIT_UNSTABLE = 0, 1, 2, 3
COMMANDS = ("constants", "check", "fixture")
DEFAULT_STATES = 20


@dataclass
class RunConfig:
    command: str
    n_list: list = field(default_factory=list)
    seed: int = 0
    restarts: int = DEFAULT_RESTARTS
    band: int | None = None
    out: str | None = None
    format: str = "csv"
    states: int = DEFAULT_STATES
    bridge_scale: float = 1.0

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.format!r}")
        if self.command != "fixture":
            if not self.n_list:
                raise ConfigError("at least one --n is required")
            bad = [n for n in self.n_list if not 1 <= n <= MAX_N]
            if bad:
                raise ConfigError(f"n must lie in [1, {MAX_N}], got {bad}")
        if self.restarts < 1:
            raise ConfigError("restarts must be positive")
        if self.band is not None:
            low = [n for n in self.n_list if self.band < n]
            if low:
                raise ConfigError(f"band {self.band} is below n for {low}; the frame must be exact to degree 4n")
        if self.states < 0:
            raise ConfigError("states must be nonnegative")
        return self


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fuzzysphere",
        description="Matrix algebras approximating the sphere: constants, property checks, fixtures.",
        epilog="exit codes: 0 success, 1 property violation, 2 configuration error, 3 unstable estimate",
    )
    p.add_argument("command", nargs="?", choices=COMMANDS, help="what to run")
    p.add_argument("--n", type=int, action="append", dest="n_list", help="matrix size parameter (repeatable)")
    p.add_argument("--seed", type=int, help="base seed (default 0)")
    p.add_argument("--restarts", type=int, help=f"optimizer restarts (default {DEFAULT_RESTARTS})")
    p.add_argument("--band", type=int, help="frame band override (default n; must be >= n)")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")
    p.add_argument("--states", type=int, help=f"random density matrices per n in check (default {DEFAULT_STATES})")
    p.add_argument("--config", help="JSON file with the same keys; command-line flags win")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    p.add_argument("--fault-bridge-scale", type=float, dest="bridge_scale", help=argparse.SUPPRESS)
    return p


_CONFIG_KEYS = {
    "command": "command",
    "n": "n_list",
    "nList": "n_list",
    "seed": "seed",
    "restarts": "restarts",
    "band": "band",
    "out": "out",
    "format": "format",
    "states": "states",
}


def load_config(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    out = {}
    for key, value in data.items():
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        out[_CONFIG_KEYS[key]] = value
    if "n_list" in out and isinstance(out["n_list"], int):
        out["n_list"] = [out["n_list"]]
    return out


def resolve_config(args) -> RunConfig:
    merged = load_config(args.config) if args.config else {}
    for key in ("command", "n_list", "seed", "restarts", "band", "out", "format", "states", "bridge_scale"):
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    if "command" not in merged:
        raise ConfigError("no command given")
    try:
        cfg = RunConfig(**merged)
        cfg.n_list = [int(n) for n in cfg.n_list]
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()


def header_lines(cfg: RunConfig) -> list:
    bands = ", ".join(f"n={n}: band {cfg.band or n}, exact to degree {su2_frame(cfg.band or n).exactness_degree}" for n in cfg.n_list)
    schedule = " ".join(f"p={p}/{k}dirs" for p, k in SMOOTHING_SCHEDULE)
    return [
        f"length convention: {LENGTH_CONVENTION}",
        f"frames: {bands}",
        f"optimizer: seed={cfg.seed} restarts={cfg.restarts} spread limit={SPREAD_LIMIT} smoothing {schedule}",
        f"safety factor on gamma: {SAFETY_FACTOR}",
    ]


def _emit(text: str, cfg: RunConfig):
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_constants(cfg: RunConfig) -> int:
    rows = []
    for n in cfg.n_list:
        log.info("constants for n=%d", n)
        rows.append(prox_bound(n, cfg.restarts, cfg.seed, cfg.band))
    head = header_lines(cfg)
    if cfg.format == "csv":
        text = constants_csv(rows, head)
    else:
        text = json.dumps({"header": head, "rows": [r.row() for r in rows]}, indent=2) + "\n"
    _emit(text, cfg)
    return EXIT_UNSTABLE if any(r.unstable for r in rows) else EXIT_OK


def cmd_check(cfg: RunConfig) -> int:
    from .suite import run_suite

    results = []
    for n in cfg.n_list:
        log.info("property suite for n=%d", n)
        constants = prox_bound(n, cfg.restarts, cfg.seed, cfg.band)
        ctx = berezin_context(n, cfg.band)
        results += run_suite(ctx, constants, cfg.seed, n_random=cfg.states, bridge_scale=cfg.bridge_scale)
    passed = all(r.passed for r in results)
    if cfg.format == "json":
        text = json.dumps(
            {"header": header_lines(cfg), "passed": passed, "results": [r.to_json() for r in results]}, indent=2
        ) + "\n"
    else:
        buf = io.StringIO()
        for line in header_lines(cfg):
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "check", "passed", "worst", "trials", "witness"])
        for r in results:
            w.writerow([r.n, r.name, int(r.passed), f"{r.worst:.10g}", r.trials, json.dumps(r.witness) if r.witness else ""])
        text = buf.getvalue()
    _emit(text, cfg)
    return EXIT_OK if passed else EXIT_VIOLATION


def fixture_report() -> dict:
    fx = three_point_fixture()
    z4 = finite_group_load(cyclic_group_spec(4))
    e11 = np.diag([1.0, 0.0]).astype(complex)
    z4_span = span_check_finite(z4, e11)
    su2_span = {n: span_check_su2(spin_irrep(n), su2_frame(n)).rank for n in (1, 2, 3)}
    out = fx.to_json()
    out["z4SpanRank"] = z4_span.rank
    out["z4SpanTarget"] = z4_span.target
    out["su2SpanRank"] = {str(n): r for n, r in su2_span.items()}
    return out


def cmd_fixture(cfg: RunConfig) -> int:
    rep = fixture_report()
    if cfg.format == "json":
        text = json.dumps(rep, indent=2, sort_keys=True) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["quantity", "value"])
        for key in sorted(rep):
            v = rep[key]
            w.writerow([key, json.dumps(v, sort_keys=True) if isinstance(v, dict) else (f"{v:.10g}" if isinstance(v, float) else v)])
        text = buf.getvalue()
    _emit(text, cfg)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s", stream=sys.stderr)
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    log.info("length convention: %s", LENGTH_CONVENTION)
    return {"constants": cmd_constants, "check": cmd_check, "fixture": cmd_fixture}[cfg.command](cfg)


if __name__ == "__main__":
    sys.exit(main())
