"""Golden fixtures: re-run each pipeline on checked-in inputs and byte-compare.

Fixtures are listed in ``goldens/MANIFEST.json``; each entry names a
pipeline kind, its inputs, the expected output file and a provenance tag
(PAPER, TRIVIAL or DERIVED). Everything is byte-exact except the Müller–Brown
oracle table, which is a numeric comparison within the entry's tolerance.
"""

from __future__ import annotations

import difflib
import json
import tempfile
from dataclasses import dataclass
from pathlib import Path


from .encoding import EncodingConfig, encode_3d_trajectory, encode_4d_sparse, supervision_pair
from .io import parse_extxyz, read_predictions, read_records_file, write_predictions, write_records
from .metrics import evaluate_catalytic, evaluate_gas
from .neb import NebConfig, run_neb
from .potentials import get_potential
from .splits import format_assignment, scaffold_split

__all__ = ["GOLDEN_DIR", "GoldenResult", "load_manifest", "run_fixture", "verify_goldens"]

GOLDEN_DIR = Path(__file__).with_name("goldens")
PROVENANCE = ("PAPER", "TRIVIAL", "DERIVED")


@dataclass(frozen=True)
class GoldenResult:
    name: str
    passed: bool
    provenance: str
    message: str = ""


def load_manifest(root: Path = GOLDEN_DIR) -> list[dict]:
    entries = json.loads((root / "MANIFEST.json").read_text())
    for e in entries:
        if e.get("provenance") not in PROVENANCE:
            raise ValueError(f"golden {e.get('name')!r} lacks a provenance tag")
    return entries


def _traj(root, e):
    traj, _ = parse_extxyz((root / e["input"]).read_bytes())
    return list(traj)


def _neb_summary(e) -> bytes:
    res = run_neb(get_potential(e["potential"]), e["start"], e["end"], NebConfig(**e["config"]))
    a = res.analysis
    doc = {
        "ts_index": a.ts_index,
        "barrier": round(a.barrier_ev, 4),
        "enthalpy": round(a.enthalpy_ev, 4),
        "converged": res.converged,
        "profile": [round(x, 4) for x in res.profile.energies],
    }
    return (json.dumps(doc, indent=1) + "\n").encode()


def _synth_bytes(e) -> bytes:
    from .synth import synthesize_catalytic_records

    recs = synthesize_catalytic_records(e["seed"], e["count"])
    with tempfile.TemporaryDirectory() as tmp:
        write_records(tmp, recs)
        files = sorted(p for p in Path(tmp).rglob("*") if p.is_file())
        chunks = []
        for p in files:
            chunks.append(f"==> {p.relative_to(tmp).as_posix()} <==\n".encode())
            chunks.append(p.read_bytes())
    return b"".join(chunks)


def _oracle_table() -> dict:
    from .oracles import muller_brown_stationary_points

    minima, saddles = muller_brown_stationary_points()
    row = lambda p: {"x": round(p.x, 6), "y": round(p.y, 6), "energy": round(p.energy, 6)}
    return {"minima": [row(p) for p in minima], "saddles": [row(p) for p in saddles]}


def run_fixture(e: dict, root: Path = GOLDEN_DIR) -> bytes:
    """Produce the fixture's output bytes from its inputs."""
    kind = e["kind"]
    cfg = EncodingConfig()
    if kind == "encode_full3d":
        return encode_3d_trajectory(_traj(root, e), cfg).encode()
    if kind == "encode_sparse4d":
        return encode_4d_sparse(_traj(root, e), cfg).encode()
    if kind == "pairs":
        recs = read_records_file(root / e["input"], e["task"])
        out = []
        for r in recs:
            prompt, target = supervision_pair(r, e["task"], e["text"], cfg)
            out.append(json.dumps({"id": r.id, "prompt": prompt, "target": target}) + "\n")
        return "".join(out).encode()
    if kind == "predictions":
        return write_predictions(read_predictions((root / e["input"]).read_bytes(), e["task"]))
    if kind == "evaluate":
        refs = read_records_file(root / e["refs"], e["task"], eager=False)
        preds = read_predictions((root / e["input"]).read_bytes(), e["task"])
        fn = evaluate_gas if e["task"] == "gas" else evaluate_catalytic
        return fn(refs, preds).to_jsonl().encode()
    if kind == "neb":
        return _neb_summary(e)
    if kind == "split":
        rows = read_records_file(root / e["input"], "gas", eager=False)
        asg = scaffold_split(rows, e["holdout_fraction"], e["seed"])
        return format_assignment(asg, [r.id for r in rows]).encode()
    if kind == "synth":
        return _synth_bytes(e)
    if kind == "oracle_mb":
        return (json.dumps(_oracle_table(), indent=1) + "\n").encode()
    raise ValueError(f"unknown golden kind {kind!r}")


def _diff(expected: bytes, actual: bytes, limit: int = 40) -> str:
    lines = list(difflib.unified_diff(
        expected.decode("utf-8", "replace").splitlines(),
        actual.decode("utf-8", "replace").splitlines(),
        "expected", "actual", lineterm=""))
    if len(lines) > limit:
        lines = lines[:limit] + [f"... ({len(lines) - limit} more diff lines)"]
    return "\n".join(lines)


def _compare_oracle(expected: bytes, actual: bytes, tol: float) -> str:
    exp, act = json.loads(expected), json.loads(actual)
    problems = []
    for group in ("minima", "saddles"):
        if len(exp[group]) != len(act[group]):
            problems.append(f"{group}: {len(act[group])} found, {len(exp[group])} expected")
            continue
        for k, (a, b) in enumerate(zip(exp[group], act[group])):
            for key in ("x", "y", "energy"):
                if abs(a[key] - b[key]) > tol:
                    problems.append(f"{group}[{k}].{key}: {b[key]} vs expected {a[key]}")
    return "\n".join(problems)


def verify_goldens(root: Path = GOLDEN_DIR, update: bool = False,
                   names: list[str] | None = None) -> list[GoldenResult]:
    """Pass/fail per fixture. ``update`` rewrites expected files instead."""
    results = []
    for e in load_manifest(root):
        if names is not None and e["name"] not in names:
            continue
        path = root / e["expected"]
        try:
            actual = run_fixture(e, root)
        except Exception as exc:  # a crashing pipeline is a named failure
            results.append(GoldenResult(e["name"], False, e["provenance"],
                                        f"pipeline raised {type(exc).__name__}: {exc}"))
            continue
        if update:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(actual)
            results.append(GoldenResult(e["name"], True, e["provenance"], "updated"))
            continue
        if not path.exists():
            results.append(GoldenResult(e["name"], False, e["provenance"], f"missing {path}"))
            continue
        expected = path.read_bytes()
        if e["kind"] == "oracle_mb":
            msg = _compare_oracle(expected, actual, float(e.get("tolerance", 1e-3)))
        else:
            msg = "" if expected == actual else _diff(expected, actual)
        results.append(GoldenResult(e["name"], not msg, e["provenance"], msg))
    return results
