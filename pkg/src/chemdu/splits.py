"""Scaffold-level ID / OOD partitioning of gas-phase reaction records.

Every record contributes a reactant scaffold and a product scaffold. A
seeded shuffle of the sorted scaffold universe marks a fraction of scaffolds
as held out, and each record is labelled by which of its two scaffolds are
held out:

    neither  -> train or id_test (seeded hash, ``id_fraction`` to id_test)
    reactant -> ood_reactants
    product  -> ood_products
    both     -> ood_both

Records only need ``id``, ``reactant_smiles`` and ``product_smiles``.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .smiles import SmilesError, canonicalize, extract_scaffold, parse_smiles

__all__ = [
    "LABELS",
    "SplitAssignment",
    "SplitError",
    "scaffold_key",
    "scaffold_split",
    "verify_split",
    "format_assignment",
    "parse_assignment",
]

LABELS = ("train", "id_test", "ood_reactants", "ood_products", "ood_both")


class SplitError(ValueError):
    pass


@dataclass(frozen=True)
class SplitAssignment:
    labels: dict[str, str]
    held_out: frozenset[str]
    scaffolds: dict[str, tuple[str, str]]  # id -> (reactant key, product key)

    def by_label(self) -> dict[str, list[str]]:
        out = {lab: [] for lab in LABELS}
        for rid, lab in self.labels.items():
            out[lab].append(rid)
        return out

    def counts(self) -> dict[str, int]:
        return {lab: len(ids) for lab, ids in self.by_label().items()}


def scaffold_key(smiles: str) -> str:
    """Canonical scaffold string of the largest component (ties: smaller
    canonical string). Acyclic molecules map to ``str(ACYCLIC)``."""
    g = parse_smiles(smiles)
    comps = g.components()
    if len(comps) > 1:
        subs = [g.subgraph(c) for c in comps]
        g = min(subs, key=lambda s: (-len(s.atoms), canonicalize(s)))
    return str(extract_scaffold(g))


def _record_scaffolds(r) -> tuple[str, str]:
    if getattr(r, "reactant_smiles", None) is None:
        raise SplitError(f"record {r.id}: no reactant_smiles")
    out = []
    for field in ("reactant_smiles", "product_smiles"):
        try:
            out.append(scaffold_key(getattr(r, field)))
        except SmilesError as e:
            raise SplitError(f"record {r.id}: {field} does not parse ({e})") from e
    return out[0], out[1]


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _hash_unit(seed: int, rid: str) -> float:
    h = hashlib.blake2b(f"{seed}:{rid}".encode(), digest_size=8).digest()
    return int.from_bytes(h, "big") / 2.0**64


def scaffold_split(records: Sequence, holdout_fraction: float = 0.2, seed: int = 0,
                   id_fraction: float = 0.1,
                   held_out: Iterable[str] | None = None) -> SplitAssignment:
    """Label every record; ``held_out`` overrides the seeded scaffold choice."""
    if not 0 < holdout_fraction < 1:
        raise ValueError("holdout_fraction must lie strictly between 0 and 1")
    if not 0 <= id_fraction <= 1:
        raise ValueError("id_fraction must lie in [0, 1]")
    ids = [r.id for r in records]
    if len(set(ids)) != len(ids):
        raise SplitError("duplicate record ids")
    scaf = {r.id: _record_scaffolds(r) for r in records}
    universe = sorted({k for pair in scaf.values() for k in pair})
    if held_out is None:
        n_hold = _round_half_up(holdout_fraction * len(universe))
        order = np.random.default_rng(seed).permutation(len(universe))
        held = frozenset(universe[i] for i in order[:n_hold])
    else:
        held = frozenset(held_out)
    labels = {}
    for rid in ids:
        rk, pk = scaf[rid]
        rh, ph = rk in held, pk in held
        if rh and ph:
            labels[rid] = "ood_both"
        elif rh:
            labels[rid] = "ood_reactants"
        elif ph:
            labels[rid] = "ood_products"
        else:
            labels[rid] = "id_test" if _hash_unit(seed, rid) < id_fraction else "train"
    return SplitAssignment(labels, held, scaf)


def verify_split(records: Sequence, assignment: SplitAssignment) -> list[str]:
    """Re-derive each record's scaffolds and check its label against them."""
    out = []
    seen_ids = set()
    held = assignment.held_out
    for r in records:
        seen_ids.add(r.id)
        lab = assignment.labels.get(r.id)
        if lab is None:
            out.append(f"record {r.id}: no label")
            continue
        if lab not in LABELS:
            out.append(f"record {r.id}: unknown label {lab!r}")
            continue
        try:
            rk, pk = _record_scaffolds(r)
        except SplitError as e:
            out.append(str(e))
            continue
        rh, ph = rk in held, pk in held
        expect = {(True, True): ("ood_both",), (True, False): ("ood_reactants",),
                  (False, True): ("ood_products",), (False, False): ("train", "id_test")}[(rh, ph)]
        if lab not in expect:
            why = []
            if rh:
                why.append(f"reactant scaffold {rk} is held out")
            if ph:
                why.append(f"product scaffold {pk} is held out")
            if not why:
                why.append("both scaffolds are seen in training")
            out.append(f"record {r.id}: labelled {lab} but {' and '.join(why)}")
    for rid in assignment.labels:
        if rid not in seen_ids:
            out.append(f"record {rid}: labelled but not in the record set")
    return out


def format_assignment(assignment: SplitAssignment, order: Sequence[str] | None = None) -> str:
    ids = order if order is not None else list(assignment.labels)
    return "".join(f"{rid} {assignment.labels[rid]}\n" for rid in ids)


def parse_assignment(text: str) -> dict[str, str]:
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {n}: expected 'id label'")
        if parts[0] in out:
            raise ValueError(f"line {n}: duplicate id {parts[0]}")
        out[parts[0]] = parts[1]
    return out
