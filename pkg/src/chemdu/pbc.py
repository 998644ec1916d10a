"""Minimum-image displacements and k-capped periodic neighbor graphs.

Periodicity is only ever applied along cell rows whose pbc flag is set, so a
slab (pbc T T F) is tiled in-plane and left open along the normal. Rows of
non-periodic directions are replaced internally by an orthonormal completion
of the periodic rows; their stored values never influence the geometry.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import Cell, Frame

__all__ = [
    "NeighborEdge",
    "NeighborGraph",
    "DegenerateCellError",
    "mic_displacement",
    "tiling_extent",
    "build_neighbor_graph",
    "check_cell",
]

# distances are quantised to this grid before ordering, so that mirror images
# whose computed lengths differ in the last ulp still tie and fall through to
# the index / image-shift tie-breakers
_ORDER_DECIMALS = 10
_EPS = 1e-8


class DegenerateCellError(ValueError):
    pass


@dataclass(frozen=True)
class NeighborEdge:
    src: int
    dst: int
    distance: float
    shift: tuple[int, int, int] = (0, 0, 0)


@dataclass(frozen=True)
class NeighborGraph:
    edges: tuple[NeighborEdge, ...]
    cutoff: float
    k_cap: int
    n_atoms: int

    def out_edges(self, i: int) -> list[NeighborEdge]:
        return [e for e in self.edges if e.src == i]

    def degree(self, i: int) -> int:
        return sum(1 for e in self.edges if e.src == i)


def _completed_basis(cell: Cell) -> np.ndarray:
    """Basis whose periodic rows are the cell's and whose other rows are an
    orthonormal completion of the periodic subspace."""
    B = np.array(cell.basis, dtype=float)
    per = [d for d in range(3) if cell.pbc[d]]
    if not per:
        return np.eye(3)
    P = B[per]
    # orthonormal complement via SVD of the periodic rows
    _, s, vt = np.linalg.svd(P)
    rank = int(np.sum(s > _EPS * max(1.0, s.max())))
    if rank < len(per):
        raise DegenerateCellError("periodic cell vectors are linearly dependent")
    comp = vt[rank:]
    out = np.empty((3, 3))
    j = 0
    for d in range(3):
        if cell.pbc[d]:
            out[d] = B[d]
        else:
            out[d] = comp[j]
            j += 1
    return out


def check_cell(cell: Cell) -> None:
    """Raise DegenerateCellError if the cell is outside the supported envelope.

    Periodic rows must be non-zero and independent, and pairwise reduced
    (|a_i . a_j| <= |a_k|^2 / 2 for the shorter of the two) so that the
    minimum image is always found within one image per direction.
    """
    per = [d for d in range(3) if cell.pbc[d]]
    B = np.asarray(cell.basis, dtype=float)
    if not np.all(np.isfinite(B[per])):
        raise DegenerateCellError("cell basis is not finite")
    for d in per:
        if np.linalg.norm(B[d]) < _EPS:
            raise DegenerateCellError(f"periodic cell vector {'abc'[d]} has zero length")
    _completed_basis(cell)
    for i, j in itertools.combinations(per, 2):
        dot = abs(float(B[i] @ B[j]))
        shorter = min(B[i] @ B[i], B[j] @ B[j])
        if dot > 0.5 * shorter * (1 + 1e-9):
            raise DegenerateCellError(
                f"cell vectors {'abc'[i]} and {'abc'[j]} are too skewed for "
                "single-image minimum-image search"
            )


def tiling_extent(cell: Cell, cutoff: float) -> tuple[int, int, int]:
    """Images needed per direction so no neighbor within ``cutoff`` is missed.

    For periodic direction d this is ceil(cutoff / h_d), with h_d the spacing
    between lattice planes normal to the reciprocal vector of d.
    """
    if not cell.periodic:
        return (0, 0, 0)
    inv = np.linalg.inv(_completed_basis(cell))
    out = []
    for d in range(3):
        if not cell.pbc[d]:
            out.append(0)
            continue
        h = 1.0 / np.linalg.norm(inv[:, d])
        out.append(int(math.ceil(cutoff / h - 1e-12)))
    return tuple(out)


def _reduce(d: np.ndarray, cell: Cell, full: np.ndarray, inv: np.ndarray):
    """Shift ``d`` (..., 3) by whole periodic lattice vectors so every periodic
    fractional coordinate lies in [-0.5, 0.5]. Returns (reduced, shift)."""
    frac = d @ inv
    n = np.zeros_like(frac)
    for k in range(3):
        if cell.pbc[k]:
            n[..., k] = np.round(frac[..., k])
    return d - n @ full, n.astype(int)


def _mic_one(d: np.ndarray, cell: Cell) -> np.ndarray:
    full = _completed_basis(cell)
    inv = np.linalg.inv(full)
    r, _ = _reduce(d, cell, full, inv)
    ranges = [(-1, 0, 1) if cell.pbc[k] else (0,) for k in range(3)]
    best, best_norm = r, float(r @ r)
    for s in itertools.product(*ranges):
        if s == (0, 0, 0):
            continue
        c = r + np.asarray(s, dtype=float) @ full
        n2 = float(c @ c)
        if n2 < best_norm:
            best, best_norm = c, n2
    return best


def mic_displacement(a, b, cell: Cell) -> np.ndarray:
    """Minimum-image vector from position ``a`` to position ``b``.

    Exactly antisymmetric: the search always runs on the lexicographically
    non-negative orientation of ``b - a`` and the result is negated if needed,
    so ties at exactly half a cell resolve consistently in both directions.
    """
    d = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
    if not cell.periodic:
        return d
    flip = False
    for x in d:
        if x != 0:
            flip = x < 0
            break
    if flip:
        return -_mic_one(-d, cell)
    return _mic_one(d, cell)


def _candidates(frame: Frame, cutoff: float):
    """All (src, dst, distance, shift) pairs within cutoff, unsorted."""
    pos = frame.positions
    n = len(pos)
    cell = frame.cell
    d = pos[None, :, :] - pos[:, None, :]  # d[i, j] = r_j - r_i
    if not cell.periodic:
        dist = np.linalg.norm(d, axis=-1)
        ii, jj = np.nonzero((dist <= cutoff) & (dist > 0))
        return [(int(i), int(j), float(dist[i, j]), (0, 0, 0)) for i, j in zip(ii, jj)]

    check_cell(cell)
    full = _completed_basis(cell)
    inv = np.linalg.inv(full)
    r, n0 = _reduce(d, cell, full, inv)
    ext = tiling_extent(cell, cutoff)
    shifts = np.array(
        list(itertools.product(*[range(-e, e + 1) for e in ext])), dtype=int
    )
    vecs = r[:, :, None, :] + (shifts @ full)[None, None, :, :]
    dist = np.linalg.norm(vecs, axis=-1)
    ii, jj, ss = np.nonzero((dist <= cutoff) & (dist > 0))
    out = []
    for i, j, s in zip(ii, jj, ss):
        shift = tuple(int(x) for x in (shifts[s] - n0[i, j]))
        out.append((int(i), int(j), float(dist[i, j, s]), shift))
    return out


def _order_key(c):
    return (round(c[2], _ORDER_DECIMALS), c[1], c[3])


def build_neighbor_graph(f: Frame, cutoff: float = 2.5, k_cap: int = 4) -> NeighborGraph:
    """Directed neighbor graph, at most ``k_cap`` out-edges per atom.

    Candidates are all atom pairs and, along periodic directions, periodic
    images within ``cutoff`` (an atom's own images included, the zero-distance
    self pair excluded). Each atom keeps its first ``k_cap`` candidates ordered
    by (distance, destination index, image shift). Edges come out grouped by
    source in ascending order.
    """
    if cutoff <= 0:
        raise ValueError("cutoff must be positive")
    if k_cap < 1:
        raise ValueError("k_cap must be >= 1")
    per_src: dict[int, list] = {}
    for c in _candidates(f, cutoff):
        per_src.setdefault(c[0], []).append(c)
    edges = []
    for i in range(f.n_atoms):
        kept = sorted(per_src.get(i, []), key=_order_key)[:k_cap]
        edges.extend(NeighborEdge(*c) for c in kept)
    return NeighborGraph(tuple(edges), float(cutoff), int(k_cap), f.n_atoms)


def neighbor_candidates(f: Frame, cutoff: float = 2.5) -> list[NeighborEdge]:
    """Uncapped candidate set (sorted per source like the capped graph)."""
    cands = sorted(_candidates(f, cutoff), key=lambda c: (c[0],) + _order_key(c))
    return [NeighborEdge(*c) for c in cands]
