"""``chemdu`` command line: encode, evaluate, neb, split, synth, stats, goldens.

Exit codes: 0 success (a non-converged NEB included), 1 usage error,
2 data, validation or I/O error. Every subcommand writes a JSON manifest next
to its primary output; primary outputs are written atomically.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .core import make_frame
from .encoding import (
    EncodingConfig,
    encode_3d_trajectory,
    encode_4d_sparse,
    supervision_pair,
    token_stats,
)
from .io import (
    ParseError,
    SchemaError,
    atomic_write,
    parse_extxyz,
    read_predictions,
    read_records_file,
    write_extxyz,
    write_records,
)
from .metrics import evaluate_catalytic, evaluate_gas
from .neb import NebConfig, NebError, run_neb
from .potentials import builtin_potentials, get_potential
from .smiles import SmilesError
from .splits import SplitError, format_assignment, scaffold_split, verify_split

log = logging.getLogger("chemdu")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# Default Müller–Brown endpoints: the two deepest minima.
MB_START = (-0.558224, 1.441726)
MB_END = (0.623499, 0.028038)


def _manifest(args, inputs, outputs, started, **extra) -> bytes:
    config = {k: v for k, v in vars(args).items()
              if k not in ("func", "command") and not k.startswith("_")}
    doc = {
        "subcommand": args.command,
        "tool_version": __version__,
        "config": config,
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
        "seed": getattr(args, "seed", None),
        **extra,
        "wall_time_s": round(time.perf_counter() - started, 6),
    }
    return (json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n").encode()


def _manifest_path(out: Path) -> Path:
    return out / "manifest.json" if out.is_dir() else out.with_name(out.name + ".manifest.json")


def _cfg(args) -> EncodingConfig:
    try:
        return EncodingConfig(cutoff=args.cutoff, k_cap=args.kcap, delta=args.delta)
    except ValueError as e:
        raise UsageError(str(e)) from e


def _read_bytes(path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as e:
        raise DataError(f"cannot read {path}: {e.strerror or e}") from e


def _pair_job(item):
    rec, task, text, cfg = item
    prompt, target = supervision_pair(rec, task, text, cfg)
    return json.dumps({"id": rec.id, "prompt": prompt, "target": target})


def _map(fn, items, jobs):
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


# --- subcommands ------------------------------------------------------------------


def cmd_encode(args) -> int:
    started = time.perf_counter()
    cfg = _cfg(args)
    out = Path(args.output)
    if args.mode == "pairs":
        recs = read_records_file(args.input, args.task)
        lines = _map(_pair_job, [(r, args.task, args.text, cfg) for r in recs], args.jobs)
        data = "".join(line + "\n" for line in lines)
    else:
        traj, diag = parse_extxyz(_read_bytes(args.input))
        for lineno, msg in diag.warnings:
            log.warning("%s:%d: %s", args.input, lineno, msg)
        frames = list(traj)
        data = encode_3d_trajectory(frames, cfg) if args.mode == "full3d" else encode_4d_sparse(frames, cfg)
    atomic_write(out, data.encode())
    atomic_write(_manifest_path(out), _manifest(args, [args.input], [out], started))
    return 0


def cmd_evaluate(args) -> int:
    started = time.perf_counter()
    refs = read_records_file(args.refs, args.task, eager=False)
    diags = []
    preds = read_predictions(_read_bytes(args.preds), args.task, diags)
    fn = evaluate_gas if args.task == "gas" else evaluate_catalytic
    try:
        report = fn(refs, preds)
    except ValueError as e:
        raise DataError(str(e)) from e
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    text = report.to_text()
    atomic_write(out / "report.txt", text.encode())
    atomic_write(out / "report.jsonl", report.to_jsonl().encode())
    atomic_write(out / "manifest.json", _manifest(
        args, [args.refs, args.preds], [out / "report.txt", out / "report.jsonl"], started,
        prediction_diagnostics=[f"line {n}: {m}" for n, m in diags]))
    sys.stdout.write(text)
    return 0


def _endpoint(spec, pot_name, default):
    """'x,y' literal for 2-D surfaces, else a geometry file (first frame)."""
    if spec is None:
        if default is None:
            raise UsageError(f"--start/--end are required for {pot_name}")
        return np.array(default, dtype=float), None
    p = Path(spec)
    if p.exists():
        traj, _ = parse_extxyz(_read_bytes(p))
        return traj[0].positions.copy(), traj[0]
    try:
        return np.array([float(v) for v in spec.split(",")]), None
    except ValueError:
        raise DataError(f"endpoint {spec!r} is neither a file nor a comma-separated point") from None


def cmd_neb(args) -> int:
    started = time.perf_counter()
    pot = get_potential(args.potential)
    default = (MB_START, MB_END) if args.potential == "muller_brown" else (None, None)
    start, frame = _endpoint(args.start, args.potential, default[0])
    end, _ = _endpoint(args.end, args.potential, default[1])
    if start.shape != end.shape:
        raise DataError(f"endpoint shapes differ: {start.shape} vs {end.shape}")
    if pot.shape is not None and start.shape != pot.shape:
        raise DataError(f"{args.potential} expects points of shape {pot.shape}, got {start.shape}")
    try:
        cfg = NebConfig(n_images=args.images, spring_k=args.spring, climbing=args.climbing,
                        max_force_tol=args.tol, max_steps=args.max_steps, step_size=args.step_size)
    except ValueError as e:
        raise UsageError(str(e)) from e
    try:
        res = run_neb(pot, start, end, cfg)
    except NebError as e:
        raise DataError(str(e)) from e
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    energies = res.profile.energies
    if frame is not None:
        path_file = out / "path.extxyz"
        frames = [make_frame(frame.symbols, x, frame.cell, e) for x, e in zip(res.images, energies)]
        atomic_write(path_file, write_extxyz(frames))
    else:
        path_file = out / "path.txt"
        rows = ["# image " + " ".join(f"q{k}" for k in range(start.size)) + " energy"]
        rows += [f"{i} " + " ".join(f"{v:.8f}" for v in np.ravel(x)) + f" {e:.8f}"
                 for i, (x, e) in enumerate(zip(res.images, energies))]
        atomic_write(path_file, ("\n".join(rows) + "\n").encode())
    atomic_write(out / "profile.txt", "".join(f"{e:.8f}\n" for e in energies).encode())
    a = res.analysis
    analysis = {"ts_index": a.ts_index, "barrier": round(a.barrier_ev, 8),
                "enthalpy": round(a.enthalpy_ev, 8), "converged": res.converged,
                "steps_taken": res.steps_taken, "max_force": round(res.max_force, 8)}
    atomic_write(out / "analysis.json", (json.dumps(analysis, indent=2) + "\n").encode())
    atomic_write(out / "manifest.json", _manifest(
        args, [p for p in (args.start, args.end) if p], [path_file, out / "profile.txt",
                                                       out / "analysis.json"],
        started, converged=res.converged, steps_taken=res.steps_taken))
    print(json.dumps(analysis))
    return 0


def cmd_split(args) -> int:
    started = time.perf_counter()
    rows = read_records_file(args.records, "gas", eager=False)
    try:
        asg = scaffold_split(rows, args.holdout_fraction, args.seed)
    except SplitError as e:
        raise DataError(str(e)) from e
    except ValueError as e:
        raise UsageError(str(e)) from e
    violations = verify_split(rows, asg)
    out = Path(args.out)
    atomic_write(out, format_assignment(asg, [r.id for r in rows]).encode())
    atomic_write(_manifest_path(out), _manifest(
        args, [args.records], [out], started, held_out=sorted(asg.held_out),
        counts=asg.counts(), violations=violations))
    print(json.dumps({"counts": asg.counts(), "violations": len(violations)}))
    return 2 if violations else 0


def cmd_synth(args) -> int:
    from .synth import synthesize_catalytic_records, synthesize_gas_records

    started = time.perf_counter()
    if args.count < 1:
        raise UsageError("--count must be >= 1")
    gen = synthesize_catalytic_records if args.kind == "catalytic" else synthesize_gas_records
    recs = gen(args.seed, args.count)
    out = Path(args.out_dir)
    target = write_records(out, recs)
    atomic_write(out / "manifest.json", _manifest(args, [], [target], started, count=len(recs)))
    print(f"wrote {len(recs)} {args.kind} records to {target}")
    return 0


def cmd_stats(args) -> int:
    started = time.perf_counter()
    raw = _read_bytes(args.input)
    if args.mode == "text" or not raw.strip():
        text = raw.decode("utf-8", errors="replace")
    else:
        traj, _ = parse_extxyz(raw)
        cfg = _cfg(args)
        text = encode_3d_trajectory(list(traj), cfg) if args.mode == "full3d" \
            else encode_4d_sparse(traj, cfg)
    stats = token_stats(text)
    print(json.dumps(stats))
    if args.out:
        out = Path(args.out)
        atomic_write(out, (json.dumps(stats) + "\n").encode())
        atomic_write(_manifest_path(out), _manifest(args, [args.input], [out], started))
    return 0


def cmd_goldens(args) -> int:
    from .goldens import verify_goldens

    results = verify_goldens(update=args.update)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}" + ("" if r.passed else f"\n{r.message}"))
    return 0 if all(r.passed for r in results) else 2


# --- parser ----------------------------------------------------------------------


def _encoding_flags(p):
    p.add_argument("--delta", type=float, default=0.1, help="displacement threshold, Å")
    p.add_argument("--cutoff", type=float, default=2.5, help="neighbor cutoff, Å")
    p.add_argument("--kcap", type=int, default=4, help="max neighbors per atom")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="chemdu", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"chemdu {__version__}")
    p.add_argument("--config", help="JSON file of flag values; explicit flags win")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for record-parallel work")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("encode", help="text encodings or prompt/target pairs")
    e.add_argument("--mode", choices=("full3d", "sparse4d", "pairs"), default="full3d")
    e.add_argument("--task", choices=("gas", "catalytic"), default="gas")
    e.add_argument("--text", choices=("text3d", "text4d"), default="text3d",
                   help="geometry encoding used inside pairs")
    _encoding_flags(e)
    e.add_argument("input")
    e.add_argument("output")
    e.set_defaults(func=cmd_encode)

    v = sub.add_parser("evaluate", help="score predictions against references")
    v.add_argument("--task", choices=("gas", "catalytic"), required=True)
    v.add_argument("--refs", required=True)
    v.add_argument("--preds", required=True)
    v.add_argument("--out", required=True, help="output directory")
    v.set_defaults(func=cmd_evaluate)

    n = sub.add_parser("neb", help="nudged elastic band on a built-in potential")
    n.add_argument("--potential", choices=sorted(builtin_potentials()), default="muller_brown")
    n.add_argument("--start", help="'x,y' point or geometry file")
    n.add_argument("--end", help="'x,y' point or geometry file")
    n.add_argument("--images", type=int, default=15)
    n.add_argument("--spring", type=float, default=50.0)
    n.add_argument("--climbing", action=argparse.BooleanOptionalAction, default=True)
    n.add_argument("--tol", type=float, default=0.05)
    n.add_argument("--max-steps", type=int, default=20000)
    n.add_argument("--step-size", type=float, default=0.005)
    n.add_argument("--seed-free", action="store_true",
                   help="accepted for symmetry with other subcommands; NEB uses no randomness")
    n.add_argument("--out", default="neb_out", help="output directory")
    n.set_defaults(func=cmd_neb)

    s = sub.add_parser("split", help="scaffold ID/OOD split of gas records")
    s.add_argument("--holdout-fraction", type=float, default=0.2)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("records")
    s.add_argument("--out", required=True, help="assignment file (id label per line)")
    s.set_defaults(func=cmd_split)

    y = sub.add_parser("synth", help="generate synthetic records")
    y.add_argument("--count", type=int, default=10)
    y.add_argument("--seed", type=int, default=0)
    y.add_argument("--kind", choices=("catalytic", "gas"), default="catalytic")
    y.add_argument("--out-dir", required=True)
    y.set_defaults(func=cmd_synth)

    t = sub.add_parser("stats", help="token / char / line counts of an encoding")
    t.add_argument("--mode", choices=("full3d", "sparse4d", "text"), default="full3d")
    _encoding_flags(t)
    t.add_argument("input")
    t.add_argument("--out")
    t.set_defaults(func=cmd_stats)

    g = sub.add_parser("goldens", help="re-run the golden fixtures and byte-compare")
    g.add_argument("--update", action="store_true", help="rewrite expected outputs")
    g.set_defaults(func=cmd_goldens)
    return p


def _explicit_dests(parser: argparse.ArgumentParser, argv: list[str]) -> set[str]:
    """Destinations whose option strings appear literally on the command line."""
    given = {a.split("=", 1)[0] for a in argv if a.startswith("-")}
    out = set()
    parsers = [parser]
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            parsers.extend(action.choices.values())
    for prs in parsers:
        for action in prs._actions:
            if given.intersection(action.option_strings):
                out.add(action.dest)
    return out


def _apply_config(args, parser, argv):
    try:
        cfg = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot load config {args.config}: {e}") from e
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold a JSON object")
    explicit = _explicit_dests(parser, argv)
    for key, value in cfg.items():
        dest = key.replace("-", "_")
        if dest in ("command", "func", "config"):
            continue
        if not hasattr(args, dest):
            raise UsageError(f"config key {key!r} is not a flag of '{args.command}'")
        if dest not in explicit:
            setattr(args, dest, value)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.config:
            _apply_config(args, parser, argv)
        return args.func(args)
    except UsageError as e:
        print(f"chemdu {args.command}: error: {e}", file=sys.stderr)
        return 1
    except (DataError, ParseError, SchemaError, SmilesError, SplitError, ValueError,
            KeyError, OSError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        print(f"chemdu {args.command}: error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
