"""Text serialisations of frames and trajectories, and the graph-token layout.

Two text formats are produced:

* ``encode_3d``: a full description of one frame (periodicity sentence,
  atom list, k-capped neighbor distances).
* ``encode_4d_sparse``: frame 1 in full, then per later frame only the atoms
  that moved more than ``delta`` since the previous frame and the recomputed
  edges touching them.

Layout of the graph-token input is handled by ``build_token_layout``: per
frame one ``<graph_start>``, one ``<graph>`` per atom, one ``<graph_end>``,
and one feature row per ``<graph>`` made of the encoder output followed by
16 raw columns (Z, xyz, pbc flags, cell rows).
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .core import CatalyticRecord, Frame, ReactionRecord, Trajectory, displacement
from .pbc import NeighborEdge, build_neighbor_graph, neighbor_candidates

__all__ = [
    "EncodingConfig",
    "RawFeatureLayout",
    "TokenLayout",
    "Marker",
    "MarkerKind",
    "encode_3d",
    "encode_3d_trajectory",
    "encode_4d_sparse",
    "moved_atoms",
    "build_token_layout",
    "mock_encoder",
    "emit_supervision_pairs",
    "token_stats",
    "GAS_INSTRUCTION",
    "CATALYTIC_INSTRUCTION",
]

NON_PERIODIC_SENTENCE = "The system is non-periodic. The atom and its position are as follows:"
ATOMS_SENTENCE = "The atom and its position are as follows:"
DISTANCE_HEADER = "The distance between atoms is as follows:"
EDGE_COLUMNS = "atom1_index atom2_index distance(A)"
MOVED_HEADER = "The atom with big movements are listed as follows:"
NEW_EDGES_HEADER = "New edge distances:"

GAS_INSTRUCTION = (
    "Given the reactant and transition state geometries, predict the product SMILES, "
    "reaction barrier and reaction enthalpy. The geometry is as follows:"
)
CATALYTIC_INSTRUCTION = (
    "Given the catalytic reaction trajectory, predict the reaction type, the adsorbate "
    "SMILES, the product SMILES, the transition state step, the reaction barrier and "
    "the reaction enthalpy. The geometry is as follows:"
)


@dataclass(frozen=True)
class EncodingConfig:
    coord_decimals: int = 2
    dist_decimals: int = 2
    cutoff: float = 2.5
    k_cap: int = 4
    delta: float = 0.1

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.coord_decimals < 0 or self.dist_decimals < 0:
            raise ValueError("decimals must be non-negative")
        if self.cutoff <= 0 or self.k_cap < 1:
            raise ValueError("cutoff must be positive and k_cap >= 1")


def _fmt(x: float, decimals: int) -> str:
    s = f"{x:.{decimals}f}"
    if s.startswith("-") and float(s) == 0.0:
        s = s[1:]
    return s


def _atom_line(f: Frame, i: int, decimals: int) -> str:
    x, y, z = (_fmt(v, decimals) for v in f.positions[i])
    return f"{f.elements[i].symbol}{i + 1} {x} {y} {z}"


def _edge_line(e: NeighborEdge, decimals: int) -> str:
    return f"{e.src + 1} {e.dst + 1} {_fmt(e.distance, decimals)}"


def _sorted_edges(edges: Iterable[NeighborEdge]) -> list[NeighborEdge]:
    # src, then distance, then dst; graph order already guarantees this but
    # filtered subsets are re-sorted defensively
    return sorted(edges, key=lambda e: (e.src, round(e.distance, 10), e.dst, e.shift))


def _periodicity_lines(f: Frame, decimals: int) -> list[str]:
    cell = f.cell
    if not cell.periodic:
        return [NON_PERIODIC_SENTENCE]
    dirs = " ".join(ax for ax, p in zip("xyz", cell.pbc) if p)
    lines = [f"The system is periodic along {dirs}. The lattice vectors are as follows:"]
    for ax, row in zip("xyz", cell.basis):
        lines.append(ax + " " + " ".join(_fmt(v, decimals) for v in row))
    lines.append(ATOMS_SENTENCE)
    return lines


def encode_3d(f: Frame, cfg: EncodingConfig = EncodingConfig()) -> str:
    lines = _periodicity_lines(f, cfg.coord_decimals)
    lines.extend(_atom_line(f, i, cfg.coord_decimals) for i in range(f.n_atoms))
    lines.append(DISTANCE_HEADER)
    lines.append(EDGE_COLUMNS)
    graph = build_neighbor_graph(f, cfg.cutoff, cfg.k_cap)
    lines.extend(_edge_line(e, cfg.dist_decimals) for e in _sorted_edges(graph.edges))
    return "\n".join(lines) + "\n"


def encode_3d_trajectory(frames: Sequence[Frame], cfg: EncodingConfig = EncodingConfig()) -> str:
    """Independent full 3D blocks, one per frame, separated by blank lines."""
    return "\n".join(encode_3d(f, cfg) for f in frames)


def moved_atoms(prev: Frame, cur: Frame, delta: float) -> list[int]:
    """Indices whose raw displacement norm is strictly greater than ``delta``."""
    step = np.linalg.norm(displacement(prev, cur), axis=1)
    return [int(i) for i in np.nonzero(step > delta)[0]]


def encode_4d_sparse(t: Trajectory | Sequence[Frame], cfg: EncodingConfig = EncodingConfig()) -> str:
    frames = list(t)
    blocks = ["Frame 1:\n" + encode_3d(frames[0], cfg)]
    for k in range(1, len(frames)):
        cur = frames[k]
        moved = moved_atoms(frames[k - 1], cur, cfg.delta)
        lines = [f"Frame {k + 1}:", MOVED_HEADER]
        lines.extend(_atom_line(cur, i, cfg.coord_decimals) for i in moved)
        lines.append(NEW_EDGES_HEADER)
        lines.append(EDGE_COLUMNS)
        if moved:
            active = set(moved)
            graph = build_neighbor_graph(cur, cfg.cutoff, cfg.k_cap)
            kept = [e for e in graph.edges if e.src in active or e.dst in active]
            lines.extend(_edge_line(e, cfg.dist_decimals) for e in _sorted_edges(kept))
        blocks.append("\n".join(lines) + "\n")
    return "\n".join(blocks)


# --- graph-token layout -----------------------------------------------------


class MarkerKind(enum.Enum):
    GRAPH_START = "<graph_start>"
    GRAPH = "<graph>"
    GRAPH_END = "<graph_end>"


@dataclass(frozen=True)
class Marker:
    kind: MarkerKind
    frame: int
    atom: int | None = None

    @property
    def token(self) -> str:
        return self.kind.value


@dataclass(frozen=True)
class RawFeatureLayout:
    """Column layout of one per-atom feature row.

    ``[encoder (encoder_width) | Z (1) | xyz (3) | pbc (3) | cell row-major (9)]``
    """

    encoder_width: int = 512

    RAW_WIDTH = 16

    @property
    def width(self) -> int:
        return self.encoder_width + self.RAW_WIDTH

    @property
    def slices(self) -> dict[str, slice]:
        o = self.encoder_width
        return {
            "encoder": slice(0, o),
            "atomic_number": slice(o, o + 1),
            "xyz": slice(o + 1, o + 4),
            "pbc": slice(o + 4, o + 7),
            "cell": slice(o + 7, o + 16),
        }


@dataclass(frozen=True, eq=False)
class TokenLayout:
    markers: tuple[Marker, ...]
    feature_rows: np.ndarray

    def tokens(self) -> list[str]:
        return [m.token for m in self.markers]


FrameEncoder = Callable[[Frame], np.ndarray]


def raw_features(f: Frame) -> np.ndarray:
    n = f.n_atoms
    out = np.empty((n, RawFeatureLayout.RAW_WIDTH))
    out[:, 0] = f.atomic_numbers
    out[:, 1:4] = f.positions
    out[:, 4:7] = np.asarray(f.cell.pbc, dtype=float)
    out[:, 7:16] = f.cell.basis.reshape(-1)
    return out


def build_token_layout(t: Trajectory | Sequence[Frame], enc: FrameEncoder,
                       layout: RawFeatureLayout = RawFeatureLayout()) -> TokenLayout:
    markers: list[Marker] = []
    rows = []
    for k, f in enumerate(t):
        h = np.asarray(enc(f), dtype=float)
        if h.shape != (f.n_atoms, layout.encoder_width):
            raise ValueError(
                f"encoder returned shape {h.shape} for frame {k}, expected "
                f"({f.n_atoms}, {layout.encoder_width})"
            )
        markers.append(Marker(MarkerKind.GRAPH_START, k))
        markers.extend(Marker(MarkerKind.GRAPH, k, i) for i in range(f.n_atoms))
        markers.append(Marker(MarkerKind.GRAPH_END, k))
        rows.append(np.hstack([h, raw_features(f)]))
    feats = np.vstack(rows) if rows else np.empty((0, layout.width))
    feats.setflags(write=False)
    return TokenLayout(tuple(markers), feats)


def _element_embedding(z: int, width: int) -> np.ndarray:
    seed = int.from_bytes(hashlib.blake2b(f"element:{z}".encode(), digest_size=8).digest(), "little")
    return np.random.default_rng(seed).standard_normal(width)


def mock_encoder(f: Frame, width: int = 512, cutoff: float = 2.5) -> np.ndarray:
    """Deterministic, rigid-motion invariant stand-in for a learned encoder.

    Row i is a fixed pseudo-random embedding of atom i's element plus a
    Gaussian radial-basis expansion of its neighbor distances (periodic
    images included) within ``cutoff``, smoothly cut off at the radius.
    """
    if width < 1:
        raise ValueError("width must be >= 1")
    out = np.stack([_element_embedding(int(z), width) for z in f.atomic_numbers])
    centers = np.linspace(0.0, cutoff, width)
    sigma = max(cutoff / width, 0.05) * 2.0
    for e in neighbor_candidates(f, cutoff):
        env = 0.5 * (np.cos(np.pi * e.distance / cutoff) + 1.0)
        out[e.src] += env * np.exp(-(((e.distance - centers) / sigma) ** 2))
    return out


# --- supervision pairs ----------------------------------------------------------


def _ev(x: float) -> str:
    return _fmt(x, 2) + " eV"


def _geometry(frames: Sequence[Frame], mode: str, cfg: EncodingConfig) -> str:
    if mode == "text3d":
        return encode_3d_trajectory(frames, cfg)
    if mode == "text4d":
        return encode_4d_sparse(frames, cfg)
    raise ValueError(f"unknown mode {mode!r}")


def gas_target(r) -> str:
    return (f"Product: {r.product_smiles}\n"
            f"Barrier: {_ev(r.barrier_ev)}\n"
            f"Enthalpy: {_ev(r.enthalpy_ev)}")


def catalytic_target(r) -> str:
    # TS step is printed as the 1-based frame number used in "Frame k:" headers
    return (f"Reaction type: {r.reaction_type}\n"
            f"Adsorbate: {r.adsorbate_smiles}\n"
            f"Product: {r.product_smiles}\n"
            f"TS step: {r.ts_step + 1}\n"
            f"Barrier: {_ev(r.barrier_ev)}\n"
            f"Enthalpy: {_ev(r.enthalpy_ev)}")


def supervision_pair(record, task: str, mode: str,
                     cfg: EncodingConfig = EncodingConfig()) -> tuple[str, str]:
    if task == "gas":
        frames = [record.reactant, record.transition_state]
        prompt = GAS_INSTRUCTION + "\n" + _geometry(frames, mode, cfg)
        return prompt, gas_target(record)
    if task == "catalytic":
        prompt = CATALYTIC_INSTRUCTION + "\n" + _geometry(list(record.trajectory), mode, cfg)
        return prompt, catalytic_target(record)
    raise ValueError(f"unknown task {task!r}")


def emit_supervision_pairs(records: Iterable[ReactionRecord | CatalyticRecord], task: str,
                           mode: str, cfg: EncodingConfig = EncodingConfig()) -> list[tuple[str, str]]:
    """(prompt, target) text pairs for causal-LM fine-tuning data."""
    return [supervision_pair(r, task, mode, cfg) for r in records]


def token_stats(text: str) -> dict[str, int]:
    """Whitespace-token, character and line counts of ``text``."""
    return {
        "whitespace_tokens": len(text.split()),
        "chars": len(text),
        "lines": len(text.splitlines()),
    }
