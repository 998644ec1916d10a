"""Domain types shared across the package: cells, frames, trajectories, records.

Units are fixed: coordinates in Angstrom, energies in eV. Atom indices are
0-based here and 1-based in every piece of emitted text.

Constructors only check structure (shapes, types). Physical invariants are
reported by the ``validate_*`` functions, which return a list of violation
strings instead of raising.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .elements import Element, element

__all__ = [
    "Cell",
    "Frame",
    "Trajectory",
    "EnergyProfile",
    "ReactionType",
    "ReactionRecord",
    "CatalyticRecord",
    "NON_PERIODIC",
    "displacement",
    "validate_cell",
    "validate_frame",
    "validate_trajectory",
    "validate_reaction_record",
    "validate_catalytic_record",
]

_EPS_ROW = 1e-8


def _frozen_array(a, shape=None, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    if shape is not None and arr.shape != shape:
        raise ValueError(f"expected shape {shape}, got {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Cell:
    """Lattice vectors as rows (Angstrom) plus one periodicity flag per row."""

    basis: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))
    pbc: tuple[bool, bool, bool] = (False, False, False)

    def __post_init__(self):
        object.__setattr__(self, "basis", _frozen_array(self.basis, (3, 3)))
        pbc = tuple(bool(p) for p in self.pbc)
        if len(pbc) != 3:
            raise ValueError(f"pbc needs 3 flags, got {len(pbc)}")
        object.__setattr__(self, "pbc", pbc)

    @property
    def periodic(self) -> bool:
        return any(self.pbc)

    def __eq__(self, other):
        if not isinstance(other, Cell):
            return NotImplemented
        return self.pbc == other.pbc and np.array_equal(self.basis, other.basis)

    def __repr__(self):
        return f"Cell(basis={self.basis.tolist()}, pbc={self.pbc})"


NON_PERIODIC = Cell()


@dataclass(frozen=True, eq=False)
class Frame:
    """One configuration: element list, N x 3 positions, cell, optional energy."""

    elements: tuple[Element, ...]
    positions: np.ndarray
    cell: Cell = NON_PERIODIC
    energy: float | None = None

    def __post_init__(self):
        elems = tuple(e if isinstance(e, Element) else element(e) for e in self.elements)
        object.__setattr__(self, "elements", elems)
        pos = _frozen_array(self.positions)
        if pos.ndim != 2 or pos.shape[1] != 3 or pos.shape[0] != len(elems):
            raise ValueError(
                f"positions must be ({len(elems)}, 3), got {pos.shape}"
            )
        object.__setattr__(self, "positions", pos)
        if self.energy is not None:
            object.__setattr__(self, "energy", float(self.energy))

    @property
    def n_atoms(self) -> int:
        return len(self.elements)

    @property
    def symbols(self) -> list[str]:
        return [e.symbol for e in self.elements]

    @property
    def atomic_numbers(self) -> np.ndarray:
        return np.array([e.atomic_number for e in self.elements], dtype=int)

    def replace(self, **changes) -> "Frame":
        kw = dict(elements=self.elements, positions=self.positions,
                  cell=self.cell, energy=self.energy)
        kw.update(changes)
        return Frame(**kw)

    def __repr__(self):
        return f"Frame(n_atoms={self.n_atoms}, pbc={self.cell.pbc}, energy={self.energy})"


@dataclass(frozen=True)
class Trajectory:
    frames: tuple[Frame, ...]

    def __post_init__(self):
        frames = tuple(self.frames)
        if not frames:
            raise ValueError("a trajectory needs at least one frame")
        object.__setattr__(self, "frames", frames)

    def __len__(self):
        return len(self.frames)

    def __iter__(self):
        return iter(self.frames)

    def __getitem__(self, i):
        return self.frames[i]

    @property
    def n_atoms(self) -> int:
        return self.frames[0].n_atoms

    @property
    def energies(self) -> list[float | None]:
        return [f.energy for f in self.frames]


@dataclass(frozen=True)
class EnergyProfile:
    """Energies (eV) of the images along a pathway, in path order."""

    energies: tuple[float, ...]

    def __post_init__(self):
        e = tuple(float(x) for x in self.energies)
        if len(e) < 2:
            raise ValueError("an energy profile needs at least 2 points")
        if any(math.isnan(x) for x in e):
            raise ValueError("energy profile contains NaN")
        object.__setattr__(self, "energies", e)

    def __len__(self):
        return len(self.energies)

    def __getitem__(self, i):
        return self.energies[i]


class ReactionType(str, enum.Enum):
    TRANSFER = "transfer"
    DISSOCIATION = "dissociation"
    DESORPTION = "desorption"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class ReactionRecord:
    """Gas-phase benchmark row: reactant, TS and product geometries plus labels.

    ``reactant_smiles`` is optional and only needed for scaffold splitting.
    """

    id: str
    reactant: Frame
    transition_state: Frame
    product: Frame
    product_smiles: str
    barrier_ev: float
    enthalpy_ev: float
    reactant_smiles: str | None = None


@dataclass(frozen=True)
class CatalyticRecord:
    id: str
    trajectory: Trajectory
    profile: EnergyProfile
    reaction_type: ReactionType
    adsorbate_smiles: str
    product_smiles: str
    ts_step: int
    barrier_ev: float
    enthalpy_ev: float


def _same_atoms(a: Frame, b: Frame) -> bool:
    return a.elements == b.elements


def displacement(a: Frame, b: Frame) -> np.ndarray:
    """Raw per-atom displacement ``b - a`` (no periodic wrapping)."""
    if not _same_atoms(a, b):
        raise ValueError("frames do not share the same atom set")
    return b.positions - a.positions


def validate_cell(cell: Cell) -> list[str]:
    out = []
    if not np.all(np.isfinite(cell.basis)):
        out.append("cell basis contains non-finite values")
        return out
    for d, name in enumerate("abc"):
        if cell.pbc[d] and np.linalg.norm(cell.basis[d]) < _EPS_ROW:
            out.append(f"cell vector {name} is periodic but has zero length")
    return out


def validate_frame(f: Frame, label: str = "frame") -> list[str]:
    out = [f"{label}: {v}" for v in validate_cell(f.cell)]
    if f.n_atoms < 1:
        out.append(f"{label}: no atoms")
    bad = ~np.isfinite(f.positions)
    for i in np.unique(np.nonzero(bad)[0]):
        axes = "".join("xyz"[k] for k in np.nonzero(bad[i])[0])
        out.append(f"{label}: atom {i} has non-finite coordinate ({axes})")
    if f.energy is not None and not math.isfinite(f.energy):
        out.append(f"{label}: energy is not finite")
    return out


def _shortest_periodic_vector(cell: Cell) -> float | None:
    lengths = [np.linalg.norm(cell.basis[d]) for d in range(3) if cell.pbc[d]]
    return min(lengths) if lengths else None


def validate_trajectory(t: Trajectory, check_wrapping: bool = False) -> list[str]:
    """Every violated invariant of ``t``; empty means valid.

    With ``check_wrapping`` the list also carries a warning for any single-step
    displacement longer than half the shortest periodic cell vector, which
    usually means the input was wrapped into the cell.
    """
    out: list[str] = []
    first = t.frames[0]
    for k, f in enumerate(t.frames):
        label = f"frame {k + 1}"  # 1-based, as in parser errors and encodings
        out.extend(validate_frame(f, label))
        if k == 0:
            continue
        if f.elements != first.elements:
            out.append(f"{label}: element list differs from frame 1")
        if f.cell.pbc != first.cell.pbc:
            out.append(f"{label}: pbc flags differ from frame 1")
        if check_wrapping and f.elements == first.elements:
            limit = _shortest_periodic_vector(f.cell)
            if limit is not None:
                with np.errstate(invalid="ignore"):
                    step = np.linalg.norm(f.positions - t.frames[k - 1].positions, axis=1)
                for i in np.nonzero(step > 0.5 * limit)[0]:
                    out.append(
                        f"warning: {label}: atom {i} moved {step[i]:.3f} A, more than "
                        "half the shortest cell vector (wrapped trajectory?)"
                    )
    return out


_TOL = 1e-6


def validate_reaction_record(r: ReactionRecord) -> list[str]:
    out = []
    for name in ("reactant", "transition_state", "product"):
        out.extend(validate_frame(getattr(r, name), name))
    if not (_same_atoms(r.reactant, r.transition_state) and _same_atoms(r.reactant, r.product)):
        out.append("reactant, transition_state and product have different atom sets")
    if r.barrier_ev < -_TOL:
        out.append(f"barrier_ev {r.barrier_ev} is negative")
    if r.barrier_ev < max(0.0, r.enthalpy_ev) - _TOL:
        out.append(
            f"barrier_ev {r.barrier_ev} is below max(0, enthalpy_ev={r.enthalpy_ev})"
        )
    return [f"record {r.id}: {v}" for v in out]


def validate_catalytic_record(r: CatalyticRecord) -> list[str]:
    out = list(validate_trajectory(r.trajectory))
    k = len(r.trajectory)
    if not isinstance(r.reaction_type, ReactionType):
        out.append(f"unknown reaction_type {r.reaction_type!r}")
    if not 0 <= r.ts_step < k:
        out.append(f"ts_step {r.ts_step} outside trajectory of length {k}")
    if len(r.profile) != k:
        out.append(f"profile length {len(r.profile)} != trajectory length {k}")
    else:
        if 0 <= r.ts_step < k and abs(r.barrier_ev - (r.profile[r.ts_step] - r.profile[0])) > _TOL:
            out.append("barrier_ev != profile[ts_step] - profile[0]")
        if abs(r.enthalpy_ev - (r.profile[k - 1] - r.profile[0])) > _TOL:
            out.append("enthalpy_ev != profile[-1] - profile[0]")
    if r.barrier_ev < -_TOL or r.barrier_ev < r.enthalpy_ev - _TOL:
        out.append("barrier_ev below max(0, enthalpy_ev)")
    return [f"record {r.id}: {v}" for v in out]


def make_frame(symbols: Iterable[str], positions: Sequence, cell: Cell | None = None,
               energy: float | None = None) -> Frame:
    """Convenience constructor taking element symbols."""
    return Frame(tuple(element(s) for s in symbols), np.asarray(positions, dtype=float),
                 cell or NON_PERIODIC, energy)
