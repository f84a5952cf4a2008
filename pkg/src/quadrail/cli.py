"""``quadrail`` command line: build lattices, run schedules, compile programs, verify, export.

Exit status is 0 on success, 1 for invalid input (bad flags, files that fail
their schema, infeasible requests, failed verification) and 2 for internal
errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import traceback
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import io
from .compiler import attach_program_inputs, compile as compile_program, routing_map
from .gaussian import SAMPLE, graph_from_state, graph_to_dot, tensor, vacuum
from .lattice import BOUNDARIES, MacronodeGrid, grid_to_dot, qrl_state
from .macronode import run_schedule
from .noise import estimate_noise
from .verify import CHECKS, DEFAULT_SEED, run_all

DB_HELP = "squeezing in dB, converted with r = dB * ln(10) / 20 (so 10 dB is r = 1.1513)"


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def db_to_r(db: float) -> float:
    """Squeezing parameter for a squeezing level in dB: ``r = dB ln(10) / 20``."""
    return float(db) * np.log(10.0) / 20.0


def _squeezing(args, required: bool = True):
    if args.r is not None:
        r = float(args.r)
    elif args.db is not None:
        r = db_to_r(args.db)
    elif required:
        raise UsageError("give the squeezing with --r or --db")
    else:
        return None
    if not np.isfinite(r) or r <= 0:
        raise UsageError(f"squeezing must be positive, got r = {r}")
    return r


def _add_squeezing(p):
    g = p.add_mutually_exclusive_group(required=False)
    g.add_argument("--r", type=float, help="squeezing parameter r (epsilon = sech 2r)")
    g.add_argument("--db", type=float, help=DB_HELP)


def _add_dims(p):
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------- commands


def cmd_build(args) -> int:
    r = _squeezing(args)
    grid = MacronodeGrid(args.rows, args.cols, r, boundary=args.boundary)
    state = qrl_state(grid)
    out = _out_dir(args)
    io.save(out / "grid.json", grid, "grid")
    io.save(out / "state.json", state, "state")
    io.save(out / "graph.json", graph_from_state(state), "graph")
    (out / "lattice.dot").write_text(grid_to_dot(grid, "physical"))
    (out / "lattice_distributed.dot").write_text(grid_to_dot(grid, "distributed"))
    print(f"built {args.rows}x{args.cols} lattice, {state.n_modes} modes, r = {r:.6g} -> {out}")
    return 0


def _forced_outcomes(path, n_records: int):
    data = io.read_json(path)
    if isinstance(data, dict):
        if "outcomes" not in data:
            raise io.ArtifactError(f"{path}: expected an 'outcomes' key")
        data = data["outcomes"]
    arr = np.asarray(data, dtype=float)
    if arr.shape not in ((4,), (n_records, 4)) or not np.all(np.isfinite(arr)):
        raise io.ArtifactError(
            f"{path}: forced outcomes must be a 4-vector or a {n_records} x 4 array, got shape {arr.shape}"
        )
    return arr


def _shot(grid, schedule, outcomes, seed_seq, correct, seed, shot):
    rng = np.random.default_rng(seed_seq)
    state, trace = run_schedule(qrl_state(grid), grid, schedule, outcomes, rng, correct, seed)
    data = trace.to_json()
    data["shot"] = shot
    return state, data


def cmd_simulate(args) -> int:
    grid = io.load(args.grid, "grid")
    r = _squeezing(args, required=False)
    if r is not None:
        grid = dataclasses.replace(grid, r=r)
    schedule = io.load(args.schedule, "schedule")
    if args.shots < 1:
        raise UsageError("--shots must be at least 1")
    outcomes = SAMPLE if args.force_outcomes is None else _forced_outcomes(args.force_outcomes, len(schedule))
    seeds = np.random.SeedSequence(args.seed).spawn(args.shots)
    out = _out_dir(args)

    def job(k):
        return _shot(grid, schedule, outcomes, seeds[k], args.correct_displacements, args.seed, k)

    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        results = list(pool.map(job, range(args.shots)))
    if args.shots == 1:
        state, trace = results[0]
        io.write_json(out / "trace.json", trace, "trace")
        io.save(out / "final_state.json", state, "state")
    else:
        for k, (_, trace) in enumerate(results):
            io.write_json(out / f"trace_{k:05d}.json", trace, "trace")
    print(f"simulated {len(schedule)} records x {args.shots} shot(s), seed {args.seed} -> {out}")
    return 0


def cmd_compile(args) -> int:
    r = _squeezing(args)
    program = io.load(args.program, "program")
    grid, schedule, route = compile_program(program, (args.rows, args.cols), r, fuse=not args.no_fuse)
    inputs = tensor(*[vacuum(1) for _ in range(program.n_wires)])
    grid = attach_program_inputs(grid, route, inputs)
    out = _out_dir(args)
    io.save(out / "grid.json", grid, "grid")
    io.save(out / "schedule.json", schedule, "schedule")
    io.write_json(out / "route.json", route.to_json(), "route")
    io.write_json(out / "noise.json", estimate_noise(schedule, r, route).to_json())
    text = routing_map(grid, route)
    (out / "routing.txt").write_text(text)
    print(text, end="" if text.endswith("\n") else "\n")
    print(f"{len(schedule)} records -> {out}")
    return 0


def _parse_only(text):
    if text is None:
        return None
    try:
        numbers = sorted({int(x) for x in text.split(",") if x.strip()})
    except ValueError as exc:
        raise UsageError(f"--only takes comma-separated criterion numbers, got {text!r}") from exc
    unknown = [n for n in numbers if n not in CHECKS]
    if unknown:
        raise UsageError(f"unknown suite number(s) {unknown}; valid: 1-{max(CHECKS)}")
    return numbers


def cmd_verify(args) -> int:
    results = run_all(seed=args.seed, only=_parse_only(args.only))
    for res in results:
        print(res.line(), flush=True)
    failed = [res.number for res in results if not res.passed]
    print(f"{len(results) - len(failed)}/{len(results)} suites passed")
    if args.json:
        io.write_json(args.json, [res.to_json() for res in results])
    return 1 if failed else 0


def cmd_export(args) -> int:
    sources = [x for x in (args.state, args.graph, args.grid) if x is not None]
    if len(sources) != 1:
        raise UsageError("export needs exactly one of --state, --graph, --grid")
    if args.grid is not None:
        text = grid_to_dot(io.load(args.grid, "grid"), args.picture)
    elif args.state is not None:
        state = io.load(args.state, "state")
        text = graph_to_dot(graph_from_state(state), state.labels)
    else:
        text = graph_to_dot(io.load(args.graph, "graph"))
    if args.out is None:
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="quadrail",
        description="Quad-rail lattice simulator and compiler. " + DB_HELP + ".",
    )
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("build", help="build a lattice and write state, graph and DOT files")
    _add_dims(b)
    _add_squeezing(b)
    b.add_argument("--boundary", choices=BOUNDARIES, default="open")
    b.add_argument("--out", default="build")
    b.set_defaults(func=cmd_build)

    s = sub.add_parser("simulate", help="run a measurement schedule on a lattice")
    s.add_argument("--grid", required=True, help="grid JSON (inputs included)")
    s.add_argument("--schedule", required=True, help="schedule JSON")
    _add_squeezing(s)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--shots", type=int, default=1, help="independent shots, each with its own RNG stream")
    s.add_argument("--jobs", type=int, default=1, help="threads used for shots")
    s.add_argument("--force-outcomes", help="JSON 4-vector or per-record list of physical outcomes")
    s.add_argument("--correct-displacements", action="store_true", help="undo D(m) after each gate step")
    s.add_argument("--out", default="run")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("compile", help="compile a circuit program to a schedule and routing")
    c.add_argument("--program", required=True)
    _add_dims(c)
    _add_squeezing(c)
    c.add_argument("--no-fuse", action="store_true", help="decompose each single-mode gate separately")
    c.add_argument("--out", default="compiled")
    c.set_defaults(func=cmd_compile)

    v = sub.add_parser("verify", help="run the invariant suites and print a pass/fail table")
    v.add_argument("--only", help="comma-separated suite numbers")
    v.add_argument("--seed", type=int, default=DEFAULT_SEED)
    v.add_argument("--json", help="also write the results table as JSON")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("export", help="render a state, graph or grid as DOT")
    e.add_argument("--state")
    e.add_argument("--graph")
    e.add_argument("--grid")
    e.add_argument("--picture", choices=("physical", "distributed"), default="physical")
    e.add_argument("--out", help="output file (default stdout)")
    e.set_defaults(func=cmd_export)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        # validation-type errors: bad files, infeasible requests, bad parameters
        print(f"quadrail: error: {exc}", file=sys.stderr)
        return 1
    except Exception:  # noqa: BLE001
        traceback.print_exc()
        print("quadrail: internal error", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
