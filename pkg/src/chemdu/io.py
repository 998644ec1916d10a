"""Extended-XYZ trajectories and line-delimited JSON record/prediction files.

Extended XYZ, per frame::

    N
    Lattice="ax ay az bx by bz cx cy cz" pbc="T T F" energy=-12.5
    Sym x y z            (N lines)

A frame without Lattice and pbc is non-periodic. A Lattice without pbc means
fully periodic, which is the usual extended-XYZ reading.

Record files hold one JSON object per line; see ``docs/formats.md`` for the
field schemas. Geometry paths are resolved relative to ``base_dir``.
"""

from __future__ import annotations

import io
import json
import logging
import math
import os
import shlex
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable

import numpy as np

from .core import (
    CatalyticRecord,
    Cell,
    EnergyProfile,
    Frame,
    ReactionRecord,
    ReactionType,
    Trajectory,
    validate_catalytic_record,
    validate_reaction_record,
)
from .elements import element, is_symbol

log = logging.getLogger(__name__)

__all__ = [
    "ParseError",
    "SchemaError",
    "ParseDiagnostics",
    "RecordRow",
    "GasPrediction",
    "CatalyticPrediction",
    "parse_extxyz",
    "write_extxyz",
    "read_trajectory",
    "write_trajectory",
    "read_records",
    "write_records",
    "read_predictions",
    "write_predictions",
]


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class SchemaError(ValueError):
    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


@dataclass
class ParseDiagnostics:
    warnings: list[tuple[int, str]] = field(default_factory=list)
    frame_count: int = 0


def _as_text(source) -> str:
    if isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    elif isinstance(source, str):
        return source
    else:
        data = source.read()
        if isinstance(data, str):
            return data
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"input is not valid UTF-8 ({exc.reason} at byte {exc.start})") from None


_KNOWN_KEYS = {"lattice", "pbc", "energy"}
_BOOL = {"T": True, "F": False, "TRUE": True, "FALSE": False, "1": True, "0": False}


def _parse_comment(line: str, lineno: int, diag: ParseDiagnostics, strict: bool):
    try:
        parts = shlex.split(line, comments=False, posix=True)
    except ValueError as exc:
        raise ParseError(f"malformed comment line ({exc})", lineno) from None
    kv = {}
    for p in parts:
        if "=" not in p:
            # bare words are legal extended-XYZ flags; nothing here uses them
            continue
        k, v = p.split("=", 1)
        kl = k.lower()
        if kl in _KNOWN_KEYS:
            kv[kl] = v
        else:
            if strict:
                raise ParseError(f"unknown comment key {k!r}", lineno)
            diag.warnings.append((lineno, f"ignored comment key {k!r}"))

    basis = np.zeros((3, 3))
    pbc = (False, False, False)
    if "lattice" in kv:
        try:
            vals = [float(x) for x in kv["lattice"].split()]
        except ValueError:
            raise ParseError("non-numeric Lattice value", lineno) from None
        if len(vals) != 9 or not all(math.isfinite(v) for v in vals):
            raise ParseError("Lattice needs 9 finite numbers", lineno)
        basis = np.array(vals).reshape(3, 3)
        pbc = (True, True, True)
    if "pbc" in kv:
        flags = kv["pbc"].split()
        if len(flags) != 3 or any(f.upper() not in _BOOL for f in flags):
            raise ParseError(f"bad pbc value {kv['pbc']!r}", lineno)
        pbc = tuple(_BOOL[f.upper()] for f in flags)
    for d in range(3):
        if pbc[d] and np.linalg.norm(basis[d]) < 1e-8:
            raise ParseError(f"periodic direction {'abc'[d]} has no lattice vector", lineno)
    energy = None
    if "energy" in kv:
        try:
            energy = float(kv["energy"])
        except ValueError:
            raise ParseError(f"non-numeric energy {kv['energy']!r}", lineno) from None
        if not math.isfinite(energy):
            raise ParseError("energy is not finite", lineno)
    return Cell(basis, pbc), energy


def parse_extxyz(source, strict: bool = False) -> tuple[Trajectory, ParseDiagnostics]:
    """Parse a multi-frame extended-XYZ stream (bytes, str or file object).

    Raises ParseError (with a 1-based line number) on any malformed input.
    """
    text = _as_text(source)
    lines = text.splitlines()
    diag = ParseDiagnostics()
    frames: list[Frame] = []
    i = 0
    n = len(lines)
    while i < n:
        if not lines[i].strip():
            i += 1
            continue
        lineno = i + 1
        head = lines[i].strip()
        try:
            natoms = int(head)
        except ValueError:
            raise ParseError(f"expected atom count, got {head[:40]!r}", lineno) from None
        if natoms < 1:
            raise ParseError(f"atom count must be positive, got {natoms}", lineno)
        frame_no = len(frames) + 1
        if frames and natoms != frames[0].n_atoms:
            raise ParseError(
                f"frame {frame_no} declares {natoms} atoms, frame 1 had {frames[0].n_atoms}",
                lineno,
            )
        if i + 2 + natoms > n:
            raise ParseError(f"frame {frame_no} is truncated", lineno)
        cell, energy = _parse_comment(lines[i + 1], lineno + 1, diag, strict)
        symbols = []
        pos = np.empty((natoms, 3))
        for a in range(natoms):
            ln = i + 2 + a
            cols = lines[ln].split()
            if len(cols) < 4:
                raise ParseError("atom line needs a symbol and three coordinates", ln + 1)
            sym = cols[0]
            if not is_symbol(sym):
                raise ParseError(f"unknown element symbol {sym[:10]!r}", ln + 1)
            try:
                xyz = [float(c) for c in cols[1:4]]
            except ValueError:
                raise ParseError("non-numeric coordinate", ln + 1) from None
            if not all(math.isfinite(v) for v in xyz):
                raise ParseError("non-finite coordinate", ln + 1)
            if len(cols) > 4:
                diag.warnings.append((ln + 1, "extra atom columns ignored"))
            symbols.append(sym)
            pos[a] = xyz
        elems = tuple(element(s) for s in symbols)
        if frames:
            if elems != frames[0].elements:
                raise ParseError(f"frame {frame_no} has a different atom set than frame 1", lineno)
            if cell.pbc != frames[0].cell.pbc:
                raise ParseError(f"frame {frame_no} has different pbc flags than frame 1", lineno + 1)
        frames.append(Frame(elems, pos, cell, energy))
        i += 2 + natoms
    if not frames:
        raise ParseError("no frames found")
    diag.frame_count = len(frames)
    return Trajectory(tuple(frames)), diag


def _frame_comment(f: Frame) -> str:
    parts = []
    if f.cell.periodic or np.any(f.cell.basis != 0):
        parts.append('Lattice="' + " ".join(f"{v:.6f}" for v in f.cell.basis.reshape(-1)) + '"')
        parts.append('pbc="' + " ".join("T" if p else "F" for p in f.cell.pbc) + '"')
    if f.energy is not None:
        parts.append(f"energy={f.energy!r}")
    return " ".join(parts)


def write_extxyz(t: Trajectory | Iterable[Frame]) -> bytes:
    out = []
    for f in t:
        out.append(str(f.n_atoms))
        out.append(_frame_comment(f))
        for e, (x, y, z) in zip(f.elements, f.positions):
            out.append(f"{e.symbol} {x:.6f} {y:.6f} {z:.6f}")
    return ("\n".join(out) + "\n").encode("utf-8")


def read_trajectory(path: str | os.PathLike) -> Trajectory:
    with open(path, "rb") as fh:
        traj, diag = parse_extxyz(fh)
    for ln, msg in diag.warnings:
        log.debug("%s:%d: %s", path, ln, msg)
    return traj


def atomic_write(path: str | os.PathLike, data: bytes) -> None:
    """Write via a temporary sibling and rename, so readers never see a partial file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.tmp{os.getpid()}")
    try:
        with open(tmp, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    finally:
        if tmp.exists():
            tmp.unlink()


def write_trajectory(path: str | os.PathLike, t: Trajectory | Iterable[Frame]) -> None:
    atomic_write(path, write_extxyz(t))


# --- record files ----------------------------------------------------------

GAS_FIELDS = {
    "id": str, "reactant_path": str, "ts_path": str, "product_path": str,
    "product_smiles": str, "barrier_ev": float, "enthalpy_ev": float,
}
GAS_OPTIONAL = {"reactant_smiles": str}
CATALYTIC_FIELDS = {
    "id": str, "trajectory_path": str, "reaction_type": str, "adsorbate_smiles": str,
    "product_smiles": str, "ts_step": int, "barrier_ev": float, "enthalpy_ev": float,
}


def _json_lines(source):
    text = _as_text(source)
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON ({exc.msg})", lineno) from None
        if not isinstance(obj, dict):
            raise SchemaError("record must be a JSON object", lineno)
        yield lineno, obj


def _coerce(value, typ, lineno, name, optional=False):
    if value is None:
        if optional:
            return None
        raise SchemaError("missing value", lineno, name)
    if typ is str:
        if not isinstance(value, str):
            raise SchemaError(f"expected string, got {type(value).__name__}", lineno, name)
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"expected number, got {type(value).__name__}", lineno, name)
    if typ is int:
        if isinstance(value, float) and not value.is_integer():
            raise SchemaError("expected integer", lineno, name)
        return int(value)
    if not math.isfinite(value):
        raise SchemaError("number is not finite", lineno, name)
    return float(value)


def _check_fields(obj, lineno, required, optional=()):
    for k in obj:
        if k not in required and k not in optional:
            raise SchemaError("unknown field", lineno, k)
    for k in required:
        if k not in obj:
            raise SchemaError("missing field", lineno, k)


@dataclass(frozen=True)
class RecordRow:
    """One schema-checked record line whose geometry has not been loaded yet."""

    kind: str
    lineno: int
    fields: dict
    base_dir: Path

    def __getattr__(self, name):
        try:
            return self.__dict__["fields"][name]
        except KeyError:
            raise AttributeError(name) from None

    def load(self) -> ReactionRecord | CatalyticRecord:
        f = self.fields
        try:
            if self.kind == "gas":
                frames = {}
                for key in ("reactant_path", "ts_path", "product_path"):
                    traj = read_trajectory(self.base_dir / f[key])
                    frames[key] = traj[0]
                rec = ReactionRecord(
                    id=f["id"], reactant=frames["reactant_path"],
                    transition_state=frames["ts_path"], product=frames["product_path"],
                    product_smiles=f["product_smiles"], barrier_ev=f["barrier_ev"],
                    enthalpy_ev=f["enthalpy_ev"], reactant_smiles=f.get("reactant_smiles"),
                )
                problems = validate_reaction_record(rec)
            else:
                traj = read_trajectory(self.base_dir / f["trajectory_path"])
                energies = [fr.energy for fr in traj]
                if any(e is None for e in energies):
                    raise SchemaError("trajectory frames lack energies", self.lineno, "trajectory_path")
                rec = CatalyticRecord(
                    id=f["id"], trajectory=traj, profile=EnergyProfile(tuple(energies)),
                    reaction_type=ReactionType(f["reaction_type"]),
                    adsorbate_smiles=f["adsorbate_smiles"], product_smiles=f["product_smiles"],
                    ts_step=f["ts_step"], barrier_ev=f["barrier_ev"], enthalpy_ev=f["enthalpy_ev"],
                )
                problems = validate_catalytic_record(rec)
        except (OSError, ParseError) as exc:
            raise SchemaError(f"cannot load geometry: {exc}", self.lineno) from None
        if problems:
            raise SchemaError("; ".join(problems), self.lineno)
        return rec


def _record_row(obj, lineno, kind, base_dir) -> RecordRow:
    if kind == "gas":
        _check_fields(obj, lineno, GAS_FIELDS, GAS_OPTIONAL)
        fields = {k: _coerce(obj[k], t, lineno, k) for k, t in GAS_FIELDS.items()}
        for k, t in GAS_OPTIONAL.items():
            fields[k] = _coerce(obj.get(k), t, lineno, k, optional=True)
    elif kind == "catalytic":
        _check_fields(obj, lineno, CATALYTIC_FIELDS)
        fields = {k: _coerce(obj[k], t, lineno, k) for k, t in CATALYTIC_FIELDS.items()}
        if fields["reaction_type"] not in {r.value for r in ReactionType}:
            raise SchemaError(f"unknown reaction type {fields['reaction_type']!r}", lineno, "reaction_type")
        if fields["ts_step"] < 0:
            raise SchemaError("ts_step must be non-negative", lineno, "ts_step")
    else:
        raise ValueError(f"unknown record kind {kind!r}")
    return RecordRow(kind, lineno, fields, Path(base_dir))


def read_records(source, kind: str, base_dir: str | os.PathLike = ".", eager: bool = True):
    """Records from a line-delimited JSON file.

    With ``eager`` every geometry file is loaded and validated immediately and
    full records are returned; otherwise schema-checked ``RecordRow`` objects
    are returned and geometry is read on ``row.load()``.
    """
    rows = []
    seen = set()
    for lineno, obj in _json_lines(source):
        row = _record_row(obj, lineno, kind, base_dir)
        if row.id in seen:
            raise SchemaError(f"duplicate id {row.id!r}", lineno, "id")
        seen.add(row.id)
        rows.append(row)
    if not eager:
        return rows
    return [r.load() for r in rows]


def read_records_file(path: str | os.PathLike, kind: str, eager: bool = True):
    path = Path(path)
    with open(path, "rb") as fh:
        return read_records(fh, kind, base_dir=path.parent, eager=eager)


def record_line(rec, paths: dict[str, str]) -> dict:
    if isinstance(rec, CatalyticRecord):
        return {
            "id": rec.id, "trajectory_path": paths["trajectory_path"],
            "reaction_type": str(rec.reaction_type), "adsorbate_smiles": rec.adsorbate_smiles,
            "product_smiles": rec.product_smiles, "ts_step": rec.ts_step,
            "barrier_ev": rec.barrier_ev, "enthalpy_ev": rec.enthalpy_ev,
        }
    obj = {
        "id": rec.id, "reactant_path": paths["reactant_path"], "ts_path": paths["ts_path"],
        "product_path": paths["product_path"], "product_smiles": rec.product_smiles,
        "barrier_ev": rec.barrier_ev, "enthalpy_ev": rec.enthalpy_ev,
    }
    if rec.reactant_smiles is not None:
        obj["reactant_smiles"] = rec.reactant_smiles
    return obj


def write_records(out_dir: str | os.PathLike, records, name: str = "records.jsonl") -> Path:
    """Write records plus their geometry files under ``out_dir``.

    Geometry goes to ``trajectories/<id>*.extxyz``; the record file references
    those paths relative to ``out_dir``.
    """
    out_dir = Path(out_dir)
    lines = []
    for rec in records:
        if isinstance(rec, CatalyticRecord):
            rel = f"trajectories/{rec.id}.extxyz"
            write_trajectory(out_dir / rel, rec.trajectory)
            paths = {"trajectory_path": rel}
        else:
            paths = {}
            for key, frame in (("reactant_path", rec.reactant), ("ts_path", rec.transition_state),
                               ("product_path", rec.product)):
                rel = f"trajectories/{rec.id}.{key[:-5]}.extxyz"
                write_trajectory(out_dir / rel, [frame])
                paths[key] = rel
        lines.append(json.dumps(record_line(rec, paths)))
    target = out_dir / name
    atomic_write(target, ("\n".join(lines) + "\n" if lines else "").encode())
    return target


# --- predictions ----------------------------------------------------------


@dataclass(frozen=True)
class GasPrediction:
    id: str
    product_smiles: str | None
    barrier_ev: float | None = None
    enthalpy_ev: float | None = None


@dataclass(frozen=True)
class CatalyticPrediction:
    id: str
    reaction_type: ReactionType | None
    adsorbate_smiles: str | None
    product_smiles: str | None
    ts_step: int | None = None
    barrier_ev: float | None = None
    enthalpy_ev: float | None = None
    raw_reaction_type: str | None = None

    @property
    def type_valid(self) -> bool:
        return self.reaction_type is not None


def read_predictions(source, kind: str, diagnostics: list | None = None):
    """Prediction rows; absent numeric fields stay ``None``.

    An unknown reaction_type keeps the row with ``reaction_type=None`` and adds
    a (line, message) entry to ``diagnostics`` when given.
    """
    rows = []
    seen = set()
    for lineno, obj in _json_lines(source):
        if kind == "gas":
            _check_fields(obj, lineno, {"id", "product_smiles"}, {"barrier_ev", "enthalpy_ev"})
            row = GasPrediction(
                id=_coerce(obj["id"], str, lineno, "id"),
                product_smiles=_coerce(obj["product_smiles"], str, lineno, "product_smiles", True),
                barrier_ev=_coerce(obj.get("barrier_ev"), float, lineno, "barrier_ev", True),
                enthalpy_ev=_coerce(obj.get("enthalpy_ev"), float, lineno, "enthalpy_ev", True),
            )
        elif kind == "catalytic":
            _check_fields(obj, lineno, {"id", "reaction_type", "adsorbate_smiles", "product_smiles"},
                          {"ts_step", "barrier_ev", "enthalpy_ev"})
            raw = _coerce(obj["reaction_type"], str, lineno, "reaction_type", True)
            try:
                rtype = ReactionType(raw) if raw is not None else None
            except ValueError:
                rtype = None
            if rtype is None:
                msg = f"unknown reaction_type {raw!r}; counted as incorrect"
                log.warning("line %d: %s", lineno, msg)
                if diagnostics is not None:
                    diagnostics.append((lineno, msg))
            row = CatalyticPrediction(
                id=_coerce(obj["id"], str, lineno, "id"),
                reaction_type=rtype,
                adsorbate_smiles=_coerce(obj["adsorbate_smiles"], str, lineno, "adsorbate_smiles", True),
                product_smiles=_coerce(obj["product_smiles"], str, lineno, "product_smiles", True),
                ts_step=_coerce(obj.get("ts_step"), int, lineno, "ts_step", True),
                barrier_ev=_coerce(obj.get("barrier_ev"), float, lineno, "barrier_ev", True),
                enthalpy_ev=_coerce(obj.get("enthalpy_ev"), float, lineno, "enthalpy_ev", True),
                raw_reaction_type=raw,
            )
        else:
            raise ValueError(f"unknown prediction kind {kind!r}")
        if row.id in seen:
            raise SchemaError(f"duplicate id {row.id!r}", lineno, "id")
        seen.add(row.id)
        rows.append(row)
    return rows


def write_predictions(rows) -> bytes:
    out = []
    for r in rows:
        obj = {k: v for k, v in r.__dict__.items() if v is not None and k != "raw_reaction_type"}
        if isinstance(r, CatalyticPrediction):
            obj["reaction_type"] = r.raw_reaction_type if r.reaction_type is None else str(r.reaction_type)
            obj.setdefault("adsorbate_smiles", None)
            obj.setdefault("product_smiles", None)
        else:
            obj.setdefault("product_smiles", None)
        out.append(json.dumps(obj))
    return ("\n".join(out) + "\n" if out else "").encode()
