"""String, fingerprint and energetic metrics, and the per-task report builders.

Conventions that the benchmark tables leave open:

* BLEU is sentence-level over characters (SMILES has no word boundaries),
  n = 1..4, uniform weights, add-one smoothing for n >= 2.
* A prediction that does not parse is kept in every denominator: it scores
  EXACT false and similarity 0. Missing numeric predictions are left out of
  the matching MAE, and the count actually used is reported next to it.
* Fingerprint bits come from a fixed 64-bit mixer (splitmix64 finaliser over
  FNV-1a), folded modulo ``nbits``; they are stable across runs and platforms.
"""

from __future__ import annotations

import json
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .core import ReactionType
from .smiles import (
    BondOrder,
    MoleculeGraph,
    SmilesError,
    atom_invariant,
    canonicalize,
    check_valence,
    parse_smiles,
)

log = logging.getLogger(__name__)

__all__ = [
    "Fingerprint",
    "MetricReport",
    "levenshtein",
    "bleu",
    "exact_match",
    "morgan_fingerprint",
    "path_fingerprint",
    "tanimoto",
    "evaluate_gas",
    "evaluate_catalytic",
    "GAS_COLUMNS",
    "CATALYTIC_COLUMNS",
]

_MASK = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def hash_ints(values: Iterable[int]) -> int:
    h = 0x84222325CBF29CE4
    for v in values:
        h = splitmix64(h ^ (v & _MASK))
    return h


def hash_str(s: str) -> int:
    h = 0xCBF29CE484222325
    for byte in s.encode("utf-8"):
        h = ((h ^ byte) * 0x100000001B3) & _MASK
    return splitmix64(h)


# --- string metrics ---------------------------------------------------------------


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def _ngrams(s: str, n: int) -> Counter:
    return Counter(s[i:i + n] for i in range(len(s) - n + 1))


def bleu(hyp: str, ref: str, max_n: int = 4) -> float:
    """Character-level sentence BLEU in [0, 1]."""
    if not hyp or not ref:
        return 0.0
    log_p = 0.0
    for n in range(1, max_n + 1):
        h, r = _ngrams(hyp, n), _ngrams(ref, n)
        match = sum(min(c, r[g]) for g, c in h.items())
        total = sum(h.values())
        if n == 1:
            if match == 0:
                return 0.0
            p = match / total
        else:
            p = (match + 1) / (total + 1)
        log_p += math.log(p) / max_n
    bp = 1.0 if len(hyp) >= len(ref) else math.exp(1 - len(ref) / len(hyp))
    return min(1.0, bp * math.exp(log_p))


def _try_parse(s: str | None) -> MoleculeGraph | None:
    if s is None:
        return None
    try:
        return parse_smiles(s)
    except SmilesError:
        return None


def exact_match(pred: str | None, ref: str) -> bool:
    """Both parse and have the same canonical SMILES."""
    gp, gr = _try_parse(pred), _try_parse(ref)
    if gp is None or gr is None:
        return False
    return canonicalize(gp) == canonicalize(gr)


def is_valid(pred: str | None) -> bool:
    g = _try_parse(pred)
    return g is not None and not check_valence(g)


# --- fingerprints ----------------------------------------------------------------


@dataclass(frozen=True)
class Fingerprint:
    bits: frozenset[int]
    nbits: int = 2048

    def __post_init__(self):
        object.__setattr__(self, "bits", frozenset(self.bits))
        if any(b < 0 or b >= self.nbits for b in self.bits):
            raise ValueError("fingerprint bit out of range")

    def __len__(self):
        return len(self.bits)


def _morgan_invariants(g: MoleculeGraph, radius: int) -> list[list[int]]:
    """Per radius, the per-atom environment hashes."""
    cur = [hash_ints(int(x) for x in atom_invariant(g, i)) for i in range(len(g.atoms))]
    layers = [cur]
    for _ in range(radius):
        nxt = []
        for i in range(len(g.atoms)):
            env = sorted((o.value, cur[j]) for j, o in g.neighbors[i])
            nxt.append(hash_ints([cur[i]] + [v for pair in env for v in pair]))
        cur = nxt
        layers.append(cur)
    return layers


def morgan_fingerprint(g: MoleculeGraph, radius: int = 2, nbits: int = 2048) -> Fingerprint:
    """ECFP-style circular fingerprint folded to ``nbits``."""
    bits = set()
    for layer in _morgan_invariants(g, radius):
        bits.update(h % nbits for h in layer)
    return Fingerprint(frozenset(bits), nbits)


def _path_strings(g: MoleculeGraph, max_len: int) -> set[str]:
    def sym(i):
        a = g.atoms[i]
        return a.element.lower() if a.aromatic else a.element

    out = set()

    def spell(path, orders):
        parts = [sym(path[0])]
        for o, v in zip(orders, path[1:]):
            parts.append(o.symbol + sym(v))
        return "".join(parts)

    def extend(path, orders):
        if orders:
            fwd = spell(path, orders)
            bwd = spell(path[::-1], orders[::-1])
            out.add(min(fwd, bwd))
        if len(orders) == max_len:
            return
        for w, o in g.neighbors[path[-1]]:
            if w not in path:
                extend(path + [w], orders + [o])

    for start in range(len(g.atoms)):
        extend([start], [])
    return out


def path_fingerprint(g: MoleculeGraph, max_len: int = 7, nbits: int = 2048) -> Fingerprint:
    """Linear-path fingerprint: every simple path of 1..max_len bonds."""
    return Fingerprint(frozenset(hash_str(p) % nbits for p in _path_strings(g, max_len)), nbits)


def tanimoto(a: Fingerprint, b: Fingerprint) -> float:
    if a.nbits != b.nbits:
        raise ValueError(f"fingerprint widths differ ({a.nbits} vs {b.nbits})")
    union = len(a.bits | b.bits)
    if union == 0:
        return 1.0
    return len(a.bits & b.bits) / union


def _similarity(pred: str | None, ref: str, kind: str) -> float:
    gp, gr = _try_parse(pred), _try_parse(ref)
    if gp is None or gr is None:
        return 0.0
    fp = morgan_fingerprint if kind == "morgan" else path_fingerprint
    return tanimoto(fp(gp), fp(gr))


# --- reports ----------------------------------------------------------------------

GAS_COLUMNS = ("BLEU", "EXACT", "LEVENSHTEIN", "RDK", "MORGAN", "VALIDITY",
               "MAE_BARRIER", "MAE_ENTHALPY")
CATALYTIC_COLUMNS = ("TYPE_ACC", "ADS_EXACT", "ADS_MORGAN", "PROD_EXACT", "PROD_MORGAN",
                     "TS_STEP_MAE", "BARRIER_MAE", "ENTHALPY_MAE")


@dataclass
class MetricReport:
    task: str
    columns: tuple[str, ...]
    values: dict[str, float | None]
    counts: dict[str, int]
    per_record: list[dict]
    n_records: int
    n_missing: int
    n_invalid: int
    warnings: list[str] = field(default_factory=list)

    def __getitem__(self, key):
        return self.values[key]

    def check_consistency(self, tol: float = 1e-12) -> list[str]:
        """Aggregates must equal the mean of the per-record entries."""
        problems = []
        for col in self.columns:
            vals = [r[col] for r in self.per_record if r.get(col) is not None]
            if len(vals) != self.counts[col]:
                problems.append(f"{col}: count {self.counts[col]} != {len(vals)} entries")
                continue
            agg = self.values[col]
            if not vals:
                if agg is not None:
                    problems.append(f"{col}: aggregate present with no entries")
                continue
            mean = math.fsum(float(v) for v in vals) / len(vals)
            if agg is None or abs(agg - mean) > tol:
                problems.append(f"{col}: aggregate {agg} != mean {mean}")
        return problems

    def to_text(self) -> str:
        lines = [f"task: {self.task}",
                 f"records: {self.n_records}  missing predictions: {self.n_missing}  "
                 f"invalid predictions: {self.n_invalid}"]
        width = max(len(c) for c in self.columns)
        for col in self.columns:
            v = self.values[col]
            shown = "n/a" if v is None else f"{v:.4f}"
            lines.append(f"{col:<{width}}  {shown:>10}  (n={self.counts[col]})")
        lines.extend(f"warning: {w}" for w in self.warnings)
        return "\n".join(lines) + "\n"

    def to_jsonl(self) -> str:
        summary = {"type": "summary", "task": self.task, "n_records": self.n_records,
                   "n_missing": self.n_missing, "n_invalid": self.n_invalid,
                   "metrics": {c: self.values[c] for c in self.columns},
                   "counts": {c: self.counts[c] for c in self.columns}}
        lines = [json.dumps(summary)]
        lines.extend(json.dumps({"type": "record", **r}) for r in self.per_record)
        return "\n".join(lines) + "\n"


def _aggregate(task, columns, rows, n_missing, n_invalid, warnings) -> MetricReport:
    values, counts = {}, {}
    for col in columns:
        vals = [float(r[col]) for r in rows if r.get(col) is not None]
        counts[col] = len(vals)
        values[col] = math.fsum(vals) / len(vals) if vals else None
    return MetricReport(task, columns, values, counts, rows, len(rows), n_missing,
                        n_invalid, warnings)


def _index_predictions(refs, preds) -> tuple[dict, list[str]]:
    ref_ids = {r.id for r in refs}
    by_id = {}
    for p in preds:
        if p.id not in ref_ids:
            raise ValueError(f"prediction id {p.id!r} has no reference record")
        by_id[p.id] = p
    warnings = []
    missing = len(ref_ids) - len(by_id)
    if missing:
        msg = f"{missing} of {len(ref_ids)} records have no prediction"
        log.warning(msg)
        warnings.append(msg)
    return by_id, warnings


def _abs_err(pred, ref):
    return None if pred is None else abs(pred - ref)


def evaluate_gas(refs: Sequence, preds: Sequence) -> MetricReport:
    """Table-1 style report. ``refs`` need id, product_smiles, barrier_ev, enthalpy_ev."""
    by_id, warnings = _index_predictions(refs, preds)
    rows = []
    n_invalid = 0
    for r in refs:
        p = by_id.get(r.id)
        smi = p.product_smiles if p is not None else None
        valid = is_valid(smi)
        if p is not None and not valid:
            n_invalid += 1
        rows.append({
            "id": r.id,
            "BLEU": bleu(smi or "", r.product_smiles),
            "EXACT": float(exact_match(smi, r.product_smiles)),
            "LEVENSHTEIN": float(levenshtein(smi or "", r.product_smiles)),
            "RDK": _similarity(smi, r.product_smiles, "path"),
            "MORGAN": _similarity(smi, r.product_smiles, "morgan"),
            "VALIDITY": float(valid),
            "MAE_BARRIER": _abs_err(p.barrier_ev if p else None, r.barrier_ev),
            "MAE_ENTHALPY": _abs_err(p.enthalpy_ev if p else None, r.enthalpy_ev),
        })
    n_missing = sum(1 for r in refs if r.id not in by_id)
    return _aggregate("gas", GAS_COLUMNS, rows, n_missing, n_invalid, warnings)


def evaluate_catalytic(refs: Sequence, preds: Sequence) -> MetricReport:
    """Table-2 style report for catalytic records."""
    by_id, warnings = _index_predictions(refs, preds)
    rows = []
    n_invalid = 0
    for r in refs:
        p = by_id.get(r.id)
        ref_type = ReactionType(str(r.reaction_type))
        if p is not None and (p.reaction_type is None or not is_valid(p.product_smiles)
                              or not is_valid(p.adsorbate_smiles)):
            n_invalid += 1
        ads = p.adsorbate_smiles if p else None
        prod = p.product_smiles if p else None
        rows.append({
            "id": r.id,
            "TYPE_ACC": float(p is not None and p.reaction_type == ref_type),
            "ADS_EXACT": float(exact_match(ads, r.adsorbate_smiles)),
            "ADS_MORGAN": _similarity(ads, r.adsorbate_smiles, "morgan"),
            "PROD_EXACT": float(exact_match(prod, r.product_smiles)),
            "PROD_MORGAN": _similarity(prod, r.product_smiles, "morgan"),
            "TS_STEP_MAE": None if p is None or p.ts_step is None else float(abs(p.ts_step - r.ts_step)),
            "BARRIER_MAE": _abs_err(p.barrier_ev if p else None, r.barrier_ev),
            "ENTHALPY_MAE": _abs_err(p.enthalpy_ev if p else None, r.enthalpy_ev),
        })
    n_missing = sum(1 for r in refs if r.id not in by_id)
    return _aggregate("catalytic", CATALYTIC_COLUMNS, rows, n_missing, n_invalid, warnings)
