"""Desk-scale synthetic records: adsorbate-on-slab pathways, gas-phase
isomerisations and a dense trajectory for token budgeting.

Catalytic recipe. A rigid two-layer 3x3 Cu slab (periodic in-plane, open
along z) carries a 1-3 atom adsorbate anchored above a hollow site. The
reaction type is drawn uniformly, then a compatible species:

* desorption: the adsorbate rises 4-6 Å along the surface normal;
* dissociation: one fragment slides to the neighbouring hollow site, which
  takes the broken bond well past the 2.0 Å bond cutoff;
* transfer: the whole adsorbate hops to the neighbouring hollow site along a
  shallow arc.

Energies follow E(s) = h sin^2(pi s) (1 + a s) + dH s + E0 on s in [0, 1],
with h in [0.4, 2.0] eV, a in [-0.5, 0.5], dH in [-h/2, h/2]. On K >= 5
evenly spaced samples the maximum is strictly interior and the barrier is at
least max(0, dH).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from .core import (
    Cell,
    CatalyticRecord,
    EnergyProfile,
    ReactionRecord,
    ReactionType,
    Trajectory,
    make_frame,
)
from .pbc import mic_displacement
from .smiles import parse_smiles

__all__ = [
    "SLAB_ATOMS",
    "LATTICE",
    "DETACH_THRESHOLD",
    "BOND_CUTOFF",
    "SPECIES",
    "bump_profile",
    "make_slab",
    "synthesize_catalytic_records",
    "classify_reaction",
    "synthesize_gas_records",
    "dense_trajectory",
]

LATTICE = 2.55  # Å, in-plane site spacing
LAYER_GAP = 1.80
ADS_HEIGHT = 1.50  # anchor height above the top layer
N_SIDE = 3
SLAB_ATOMS = 2 * N_SIDE * N_SIDE
VACUUM_C = 25.0

DETACH_THRESHOLD = 4.0
BOND_CUTOFF = 2.0


@dataclass(frozen=True)
class Species:
    name: str
    smiles: str
    atoms: tuple[tuple[str, tuple[float, float, float]], ...]  # relative to the anchor
    # dissociation: indices of the fragment that moves away, and the product SMILES
    leaving: tuple[int, ...] = ()
    fragments_smiles: str = ""


SPECIES: dict[str, Species] = {s.name: s for s in (
    Species("H", "[H]", (("H", (0.0, 0.0, 0.0)),)),
    Species("O", "[O]", (("O", (0.0, 0.0, 0.0)),)),
    Species("OH", "[OH]", (("O", (0.0, 0.0, 0.0)), ("H", (0.0, 0.0, 0.97))),
            leaving=(1,), fragments_smiles="[H].[O]"),
    Species("CO", "[C-]#[O+]", (("C", (0.0, 0.0, 0.0)), ("O", (0.0, 0.0, 1.15))),
            leaving=(1,), fragments_smiles="[C].[O]"),
    Species("H2O", "O", (("O", (0.0, 0.0, 0.0)), ("H", (0.76, 0.0, 0.59)),
                         ("H", (-0.76, 0.0, 0.59))),
            leaving=(1,), fragments_smiles="[H].[OH]"),
    Species("O2", "O=O", (("O", (0.0, 0.0, 0.0)), ("O", (1.21, 0.0, 0.0))),
            leaving=(1,), fragments_smiles="[O].[O]"),
    Species("H2", "[H][H]", (("H", (0.0, 0.0, 0.0)), ("H", (0.74, 0.0, 0.0))),
            leaving=(1,), fragments_smiles="[H].[H]"),
)}

_DISSOCIABLE = tuple(n for n, s in SPECIES.items() if s.leaving)
_ALL = tuple(SPECIES)
_DIRECTIONS = ((1, 0), (-1, 0), (0, 1), (0, -1))


def bump_profile(K: int, h: float, a: float, dH: float, e0: float = 0.0) -> np.ndarray:
    s = np.linspace(0.0, 1.0, K)
    return h * np.sin(np.pi * s) ** 2 * (1 + a * s) + dH * s + e0


def make_slab() -> tuple[list[str], np.ndarray, Cell]:
    pos = []
    for layer, z in ((0, 0.0), (1, LAYER_GAP)):
        off = 0.5 * LATTICE * layer
        for i in range(N_SIDE):
            for j in range(N_SIDE):
                pos.append((i * LATTICE + off, j * LATTICE + off, z))
    side = N_SIDE * LATTICE
    cell = Cell(np.diag([side, side, VACUUM_C]), (True, True, False))
    return ["Cu"] * SLAB_ATOMS, np.array(pos), cell


def _rot_z(v: np.ndarray, phi: float) -> np.ndarray:
    c, s = math.cos(phi), math.sin(phi)
    return v @ np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])


def _adsorbate_path(rtype: ReactionType, sp: Species, K: int, rng) -> np.ndarray:
    """(K, n_ads, 3) adsorbate positions; anchor at the hollow above a bottom atom."""
    i, j = rng.integers(0, N_SIDE, size=2)
    anchor = np.array([i * LATTICE, j * LATTICE, LAYER_GAP + ADS_HEIGHT])
    # rotate flat species in-plane; vertical offsets are untouched
    rel = _rot_z(np.array([p for _, p in sp.atoms]), rng.uniform(0, 2 * np.pi))
    start = anchor + rel
    s = np.linspace(0.0, 1.0, K)[:, None, None]
    dx, dy = _DIRECTIONS[rng.integers(0, 4)]
    hop = np.array([dx * LATTICE, dy * LATTICE, 0.0])
    if rtype is ReactionType.DESORPTION:
        rise = np.array([0.0, 0.0, rng.uniform(4.0, 6.0)])
        return start + s * rise
    if rtype is ReactionType.TRANSFER:
        lift = 0.4 * np.sin(np.pi * s) * np.array([0.0, 0.0, 1.0])
        return start + s * hop + lift
    # dissociation: leaving fragment ends at the neighbouring hollow (at anchor
    # height) that lies farthest from the atoms staying behind
    leaving = list(sp.leaving)
    staying = [k for k in range(len(start)) if k not in sp.leaving]
    frag = start[leaving]
    flat = (frag - frag.mean(axis=0)) * np.array([1.0, 1.0, 0.0])

    def ends(d):
        return anchor + np.array([d[0] * LATTICE, d[1] * LATTICE, 0.0]) + flat

    best = max(_DIRECTIONS, key=lambda d: min(
        np.linalg.norm(ends(d)[:, None] - start[staying][None], axis=-1).ravel()))
    end = start.copy()
    end[leaving] = ends(best)
    return start + s * (end - start)


def synthesize_catalytic_records(seed: int, count: int, id_prefix: str = "cat") -> list[CatalyticRecord]:
    """Deterministic given ``seed``; each record uses its own child generator."""
    if count < 1:
        raise ValueError("count must be >= 1")
    slab_sym, slab_pos, cell = make_slab()
    children = np.random.SeedSequence(seed).spawn(count)
    width = max(4, len(str(count - 1)))
    out = []
    for n, child in enumerate(children):
        rng = np.random.default_rng(child)
        rtype = list(ReactionType)[rng.integers(0, 3)]
        pool = _DISSOCIABLE if rtype is ReactionType.DISSOCIATION else _ALL
        sp = SPECIES[pool[rng.integers(0, len(pool))]]
        K = int(rng.integers(5, 13))
        path = _adsorbate_path(rtype, sp, K, rng)
        h = rng.uniform(0.4, 2.0)
        energies = bump_profile(K, h, rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5) * h,
                                e0=rng.uniform(-10.0, -5.0))
        symbols = slab_sym + [el for el, _ in sp.atoms]
        frames = [
            make_frame(symbols, np.vstack([slab_pos, path[k]]), cell, float(energies[k]))
            for k in range(K)
        ]
        ts = int(np.argmax(energies))
        product = sp.fragments_smiles if rtype is ReactionType.DISSOCIATION else sp.smiles
        out.append(CatalyticRecord(
            id=f"{id_prefix}-{n:0{width}d}",
            trajectory=Trajectory(frames),
            profile=EnergyProfile(energies.tolist()),
            reaction_type=rtype,
            adsorbate_smiles=sp.smiles,
            product_smiles=product,
            ts_step=ts,
            barrier_ev=float(energies[ts] - energies[0]),
            enthalpy_ev=float(energies[-1] - energies[0]),
        ))
    return out


def _min_mic_distance(pos_a: np.ndarray, pos_b: np.ndarray, cell: Cell) -> float:
    return min(
        float(np.linalg.norm(mic_displacement(p, q, cell))) for p in pos_a for q in pos_b
    )


def _n_components(pos: np.ndarray, cell: Cell, cutoff: float) -> int:
    n = len(pos)
    adj = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for j in range(i + 1, n):
            if np.linalg.norm(mic_displacement(pos[i], pos[j], cell)) <= cutoff:
                adj[i, j] = adj[j, i] = True
    return connected_components(adj, directed=False)[0]


def classify_reaction(t: Trajectory, slab_atom_count: int, detach: float = DETACH_THRESHOLD,
                      bond_cutoff: float = BOND_CUTOFF) -> ReactionType:
    """Label a slab + adsorbate trajectory from its first and last frames."""
    first, last = t.frames[0], t.frames[-1]
    if not 0 < slab_atom_count < first.n_atoms:
        raise ValueError("slab_atom_count must leave at least one slab and one adsorbate atom")
    slab, ads = slice(0, slab_atom_count), slice(slab_atom_count, None)
    if _min_mic_distance(last.positions[ads], last.positions[slab], last.cell) > detach:
        return ReactionType.DESORPTION
    c0 = _n_components(first.positions[ads], first.cell, bond_cutoff)
    c1 = _n_components(last.positions[ads], last.cell, bond_cutoff)
    if c1 > c0:
        return ReactionType.DISSOCIATION
    return ReactionType.TRANSFER


# --- gas phase ---------------------------------------------------------------------

# isomerisations: reactant and product share a formula, so the three frames
# can carry one atom set
GAS_REACTIONS = (
    ("C1CC1", "C=CC"),
    ("C1CCC1", "C=CCC"),
    ("CC1CC1", "CC=CC"),
    ("C1=CCCC1", "C=CCC=C"),
    ("Oc1ccccc1", "O=C1C=CCC=C1"),
    ("CC=O", "C=CO"),
    ("C1CCOC1", "C=CCCO"),
    ("O=CC1CCCCC1", "OC=C1CCCCC1"),
    ("OC1CCCCC1", "CCCCCC=O"),
    ("C1CCNCC1", "C=CCCCN"),
)


def _formula_symbols(smiles: str) -> list[str]:
    g = parse_smiles(smiles)
    heavy = [a.element for a in g.atoms]
    n_h = sum(g.hydrogens(i) for i in range(len(g.atoms)))
    return heavy + ["H"] * n_h


def _chain_positions(n: int, rng) -> np.ndarray:
    """Self-avoiding random walk with 1.1-1.5 Å steps."""
    pos = [np.zeros(3)]
    while len(pos) < n:
        v = rng.normal(size=3)
        step = pos[-1] + v / np.linalg.norm(v) * rng.uniform(1.1, 1.5)
        if all(np.linalg.norm(step - p) > 1.0 for p in pos):
            pos.append(step)
    return np.array(pos)


def synthesize_gas_records(seed: int, count: int, id_prefix: str = "gas") -> list[ReactionRecord]:
    """Toy gas-phase records cycling through GAS_REACTIONS. Geometries are
    format-valid stand-ins, not chemically relaxed structures."""
    if count < 1:
        raise ValueError("count must be >= 1")
    children = np.random.SeedSequence(seed).spawn(count)
    width = max(4, len(str(count - 1)))
    out = []
    for n, child in enumerate(children):
        rng = np.random.default_rng(child)
        reac, prod = GAS_REACTIONS[int(rng.integers(0, len(GAS_REACTIONS)))]
        symbols = _formula_symbols(reac)
        r = _chain_positions(len(symbols), rng)
        p = r + rng.normal(scale=0.4, size=r.shape)
        h = rng.uniform(0.4, 2.0)
        dH = rng.uniform(-0.5, 0.5) * h
        e = bump_profile(3, h, 0.0, dH, e0=rng.uniform(-50.0, -10.0))
        frames = [make_frame(symbols, x, energy=float(ei)) for x, ei in zip((r, 0.5 * (r + p), p), e)]
        out.append(ReactionRecord(
            id=f"{id_prefix}-{n:0{width}d}",
            reactant=frames[0],
            transition_state=frames[1],
            product=frames[2],
            product_smiles=prod,
            barrier_ev=float(e[1] - e[0]),
            enthalpy_ev=float(e[2] - e[0]),
            reactant_smiles=reac,
        ))
    return out


# --- dense trajectory for token budgeting ------------------------------------------


def dense_trajectory(seed: int = 0, n_frames: int = 10, n_atoms: int = 200,
                     active_fraction: float = 0.1, spacing: float = 1.5) -> Trajectory:
    """Jittered cubic packing; every atom has >= 4 neighbors within 2.5 Å.

    Per frame, ``active_fraction`` of the atoms take a 0.15-0.30 Å step and
    the rest a thermal wiggle below 0.05 Å, so exactly the active set crosses
    the 0.1 Å reporting threshold.
    """
    rng = np.random.default_rng(seed)
    side = math.ceil(n_atoms ** (1 / 3))
    grid = np.array([(i, j, k) for i in range(side) for j in range(side) for k in range(side)],
                    dtype=float)[:n_atoms] * spacing
    pos = grid + rng.uniform(-0.05, 0.05, size=grid.shape)
    symbols = list(rng.choice(["C", "H", "O", "N"], size=n_atoms, p=[0.4, 0.4, 0.1, 0.1]))
    n_active = int(round(active_fraction * n_atoms))
    frames = [make_frame(symbols, pos)]
    for _ in range(n_frames - 1):
        step = rng.normal(size=pos.shape)
        step /= np.linalg.norm(step, axis=1, keepdims=True)
        mag = rng.uniform(0.0, 0.05, size=(n_atoms, 1))
        active = rng.choice(n_atoms, size=n_active, replace=False)
        mag[active, 0] = rng.uniform(0.15, 0.30, size=n_active)
        pos = pos + step * mag
        frames.append(make_frame(symbols, pos))
    return Trajectory(frames)
