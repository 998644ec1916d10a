"""SMILES parsing, valence checking, canonical SMILES and Murcko scaffolds.

Supported grammar (documented in ``docs/formats.md``): organic-subset atoms
``B C N O P S F Cl Br I`` and aromatic ``b c n o p s``; bracket atoms
``[isotope? symbol chirality? H<n>? charge? class?]``; bonds ``- = # :``;
branches; ring closures ``0-9`` and ``%nn``; ``.`` between components.
Stereo marks (``/ \\ @``) are accepted and dropped with a note; isotopes are
ignored.

There is no aromaticity perception. Aromatic flags come from the notation
only, so a Kekule ring and its lowercase spelling canonicalize differently.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .elements import SYMBOLS, is_symbol

__all__ = [
    "SmilesError",
    "Atom",
    "Bond",
    "BondOrder",
    "MoleculeGraph",
    "ACYCLIC",
    "parse_smiles",
    "check_valence",
    "canonical_ranks",
    "canonicalize",
    "canonical_smiles",
    "extract_scaffold",
    "scaffold_atom_indices",
    "random_smiles",
    "is_valid_smiles",
]


def _isdigits(text: str) -> bool:
    return bool(text) and all("0" <= ch <= "9" for ch in text)


class SmilesError(ValueError):
    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} (at offset {offset})")


class BondOrder(enum.Enum):
    SINGLE = 1
    DOUBLE = 2
    TRIPLE = 3
    AROMATIC = 4

    @property
    def symbol(self) -> str:
        return {1: "-", 2: "=", 3: "#", 4: ":"}[self.value]


_BOND_CHARS = {"-": BondOrder.SINGLE, "=": BondOrder.DOUBLE, "#": BondOrder.TRIPLE,
               ":": BondOrder.AROMATIC}


@dataclass(frozen=True)
class Atom:
    element: str
    formal_charge: int = 0
    explicit_h: int = 0
    aromatic: bool = False
    bracket: bool = False


@dataclass(frozen=True)
class Bond:
    a: int
    b: int
    order: BondOrder


@dataclass(frozen=True)
class MoleculeGraph:
    atoms: tuple[Atom, ...]
    bonds: tuple[Bond, ...]
    notes: tuple[str, ...] = field(default=(), compare=False)

    @cached_property
    def neighbors(self) -> tuple[tuple[tuple[int, BondOrder], ...], ...]:
        adj: list[list] = [[] for _ in self.atoms]
        for b in self.bonds:
            adj[b.a].append((b.b, b.order))
            adj[b.b].append((b.a, b.order))
        return tuple(tuple(x) for x in adj)

    def degree(self, i: int) -> int:
        return len(self.neighbors[i])

    @cached_property
    def ring_bonds(self) -> frozenset[frozenset[int]]:
        """Bonds that lie on at least one cycle (non-bridges)."""
        n = len(self.atoms)
        disc = [-1] * n
        low = [0] * n
        bridges = set()
        t = 0
        for root in range(n):
            if disc[root] >= 0:
                continue
            disc[root] = low[root] = t
            t += 1
            stack = [(root, -1, iter(self.neighbors[root]))]
            while stack:
                v, parent, it = stack[-1]
                advanced = False
                for w, _ in it:
                    if w == parent:
                        continue
                    if disc[w] < 0:
                        disc[w] = low[w] = t
                        t += 1
                        stack.append((w, v, iter(self.neighbors[w])))
                        advanced = True
                        break
                    low[v] = min(low[v], disc[w])
                if advanced:
                    continue
                stack.pop()
                if stack:
                    u = stack[-1][0]
                    low[u] = min(low[u], low[v])
                    if low[v] > disc[u]:
                        bridges.add(frozenset((u, v)))
        return frozenset(frozenset((b.a, b.b)) for b in self.bonds) - bridges

    @cached_property
    def ring_membership(self) -> tuple[bool, ...]:
        member = [False] * len(self.atoms)
        for pair in self.ring_bonds:
            for i in pair:
                member[i] = True
        return tuple(member)

    def hydrogens(self, i: int) -> int:
        a = self.atoms[i]
        return a.explicit_h if a.bracket else implicit_hydrogens(self, i)

    def components(self) -> list[list[int]]:
        seen = [False] * len(self.atoms)
        out = []
        for s in range(len(self.atoms)):
            if seen[s]:
                continue
            comp, stack = [], [s]
            seen[s] = True
            while stack:
                v = stack.pop()
                comp.append(v)
                for w, _ in self.neighbors[v]:
                    if not seen[w]:
                        seen[w] = True
                        stack.append(w)
            out.append(sorted(comp))
        return out

    def subgraph(self, keep) -> "MoleculeGraph":
        keep = sorted(keep)
        index = {old: new for new, old in enumerate(keep)}
        atoms = tuple(self.atoms[i] for i in keep)
        bonds = tuple(Bond(index[b.a], index[b.b], b.order) for b in self.bonds
                      if b.a in index and b.b in index)
        return MoleculeGraph(atoms, bonds)


class _Acyclic:
    """Scaffold value for molecules without any ring."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "ACYCLIC"

    def __str__(self):
        return "<acyclic>"

    def __reduce__(self):
        return (_Acyclic, ())


ACYCLIC = _Acyclic()

# --- parsing ------------------------------------------------------------------

ORGANIC = ("Cl", "Br", "B", "C", "N", "O", "P", "S", "F", "I")
AROMATIC_ORGANIC = ("b", "c", "n", "o", "p", "s")
AROMATIC_BRACKET = ("se", "as", "b", "c", "n", "o", "p", "s")


def _parse_bracket(s: str, start: int) -> tuple[Atom, int, list[str]]:
    """Parse ``[...]`` starting at ``s[start] == '['``; returns (atom, next index, notes)."""
    end = s.find("]", start)
    if end < 0:
        raise SmilesError("unclosed bracket atom", start)
    body = s[start + 1:end]
    notes = []
    i = 0
    while i < len(body) and _isdigits(body[i]):
        i += 1
    if i:
        notes.append(f"isotope ignored at offset {start}")
    sym = None
    aromatic = False
    for cand in AROMATIC_BRACKET:
        if body.startswith(cand, i):
            sym, aromatic = cand[0].upper() + cand[1:], True
            i += len(cand)
            break
    if sym is None:
        if i < len(body) and body[i].isupper():
            if i + 1 < len(body) and body[i + 1].islower() and is_symbol(body[i:i + 2]):
                sym = body[i:i + 2]
                i += 2
            elif is_symbol(body[i]):
                sym = body[i]
                i += 1
        if sym is None:
            raise SmilesError(f"unknown atom symbol in bracket {body!r}", start + 1 + i)
    if i < len(body) and body[i] == "@":
        j = i
        while j < len(body) and body[j] == "@":
            j += 1
        if body.startswith(("TH", "AL", "SP", "TB", "OH"), j):
            j += 2
            while j < len(body) and _isdigits(body[j]):
                j += 1
        notes.append(f"chirality dropped at offset {start}")
        i = j
    hcount = 0
    if i < len(body) and body[i] == "H":
        i += 1
        hcount = 1
        if i < len(body) and _isdigits(body[i]):
            hcount = int(body[i])
            i += 1
    charge = 0
    if i < len(body) and body[i] in "+-":
        sign = 1 if body[i] == "+" else -1
        c = body[i]
        i += 1
        if i < len(body) and _isdigits(body[i]):
            j = i
            while j < len(body) and _isdigits(body[j]):
                j += 1
            charge = sign * int(body[i:j])
            i = j
        else:
            charge = sign
            while i < len(body) and body[i] == c:
                charge += sign
                i += 1
    if i < len(body) and body[i] == ":":
        j = i + 1
        while j < len(body) and _isdigits(body[j]):
            j += 1
        if j == i + 1:
            raise SmilesError("atom class needs digits", start + 1 + i)
        i = j
    if i != len(body):
        raise SmilesError(f"unexpected {body[i]!r} in bracket atom", start + 1 + i)
    if abs(charge) > 15:
        raise SmilesError("formal charge out of range", start)
    return Atom(sym, charge, hcount, aromatic, True), end + 1, notes


def parse_smiles(s: str) -> MoleculeGraph:
    """Parse ``s`` into a molecule graph. Raises SmilesError with the offset."""
    if not isinstance(s, str):
        raise TypeError("SMILES must be a string")
    atoms: list[Atom] = []
    bonds: dict[frozenset, Bond] = {}
    notes: list[str] = []
    prev: int | None = None
    pending: tuple[BondOrder | None, int] | None = None  # (order or None for stereo-single, offset)
    branches: list[int] = []
    rings: dict[int, tuple[int, BondOrder | None, int]] = {}
    last = None  # kind of the previous token

    def default_order(a: int, b: int) -> BondOrder:
        if atoms[a].aromatic and atoms[b].aromatic:
            return BondOrder.AROMATIC
        return BondOrder.SINGLE

    def add_bond(a: int, b: int, order: BondOrder, offset: int):
        key = frozenset((a, b))
        if a == b:
            raise SmilesError("ring closure bonds an atom to itself", offset)
        if key in bonds:
            raise SmilesError("duplicate bond between the same atoms", offset)
        bonds[key] = Bond(a, b, order)

    i = 0
    n = len(s)
    while i < n:
        c = s[i]
        if c == "(":
            if prev is None or last in ("bond", "open"):
                raise SmilesError("branch must follow an atom", i)
            branches.append(prev)
            last = "open"
            i += 1
        elif c == ")":
            if not branches:
                raise SmilesError("unmatched ')'", i)
            if last in ("open", "bond", "dot"):
                raise SmilesError("empty or incomplete branch", i)
            prev = branches.pop()
            last = "close"
            i += 1
        elif c in _BOND_CHARS or c in "/\\":
            if pending is not None or prev is None or last == "dot":
                raise SmilesError(f"misplaced bond {c!r}", i)
            if c in "/\\":
                notes.append(f"directional bond dropped at offset {i}")
                pending = (BondOrder.SINGLE, i)
            else:
                pending = (_BOND_CHARS[c], i)
            last = "bond"
            i += 1
        elif c == ".":
            if prev is None or pending is not None or last in ("open", "dot"):
                raise SmilesError("misplaced '.'", i)
            prev = None
            last = "dot"
            i += 1
        elif _isdigits(c) or c == "%":
            if prev is None or last in ("open", "dot"):
                raise SmilesError("ring closure must follow an atom", i)
            off = i
            if c == "%":
                two = s[i + 1:i + 3]
                if len(two) != 2 or not _isdigits(two):
                    raise SmilesError("'%' needs two digits", i)
                num = int(s[i + 1:i + 3])
                i += 3
            else:
                num = int(c)
                i += 1
            order = pending[0] if pending else None
            pending = None
            if num in rings:
                j, order_j, _ = rings.pop(num)
                if order is not None and order_j is not None and order != order_j:
                    raise SmilesError("conflicting bond orders on ring closure", off)
                add_bond(prev, j, order or order_j or default_order(prev, j), off)
            else:
                rings[num] = (prev, order, off)
            last = "ring"
        else:
            if c == "[":
                atom, i2, more = _parse_bracket(s, i)
                notes.extend(more)
            elif s.startswith(("Cl", "Br"), i):
                atom, i2 = Atom(s[i:i + 2]), i + 2
            elif c in "BCNOPSFI":
                atom, i2 = Atom(c), i + 1
            elif c in AROMATIC_ORGANIC:
                atom, i2 = Atom(c.upper(), aromatic=True), i + 1
            else:
                raise SmilesError(f"unexpected character {c!r}", i)
            atoms.append(atom)
            idx = len(atoms) - 1
            if prev is not None:
                order = pending[0] if pending else default_order(prev, idx)
                add_bond(prev, idx, order, pending[1] if pending else i)
            elif pending is not None:
                raise SmilesError("bond without a preceding atom", pending[1])
            pending = None
            prev = idx
            last = "atom"
            i = i2
    if pending is not None:
        raise SmilesError("dangling bond at end of input", pending[1])
    if branches:
        raise SmilesError("unclosed branch", n)
    if rings:
        num, (_, _, off) = min(rings.items(), key=lambda kv: kv[1][2])
        raise SmilesError(f"unpaired ring closure {num}", off)
    if last == "dot":
        raise SmilesError("trailing '.'", n - 1)
    if not atoms:
        raise SmilesError("empty SMILES", 0)
    return MoleculeGraph(tuple(atoms), tuple(bonds.values()), tuple(notes))


def is_valid_smiles(s: str) -> bool:
    """Parses and passes the valence check."""
    try:
        g = parse_smiles(s)
    except SmilesError:
        return False
    return not check_valence(g)


# --- valence ---------------------------------------------------------------------

_VALENCE = {
    "H": (1,), "B": (3,), "C": (4,), "N": (3,), "O": (2,), "P": (3, 5), "S": (2, 4, 6),
    "F": (1,), "Cl": (1,), "Br": (1,), "I": (1,),
}


def allowed_valences(el: str, charge: int = 0) -> tuple[int, ...] | None:
    """Allowed bond-order sums, or None if the element is not modelled.

    A formal charge shifts N, O, P, S and the halogens by its sign (N+ -> 4,
    O- -> 1); for B and C the shift goes the other way (C+ and C- -> 3,
    B- -> 4), matching the isoelectronic neighbor.
    """
    base = _VALENCE.get(el)
    if base is None:
        return None
    if charge == 0:
        return base
    if el == "C":
        vals = tuple(v - abs(charge) for v in base)
    elif el in ("B", "H"):
        vals = tuple(v - charge for v in base)
    else:
        vals = tuple(v + charge for v in base)
    return tuple(v for v in vals if v >= 0)


def _bond_sums(g: MoleculeGraph, i: int) -> tuple[int, int]:
    """(sum of non-aromatic bond orders, number of aromatic bonds)."""
    plain = 0
    arom = 0
    for _, order in g.neighbors[i]:
        if order is BondOrder.AROMATIC:
            arom += 1
        else:
            plain += order.value
    return plain, arom


def _implicit_count(el: str, charge: int, aromatic: bool, plain: int, arom: int) -> int:
    allowed = allowed_valences(el, charge)
    if not allowed:
        return 0
    if aromatic:
        s = plain + arom
        for v in allowed:
            if v >= s:
                return max(0, v - s - 1)
        return 0
    s = plain + -(-3 * arom // 2)  # aromatic bonds on an aliphatic atom count 1.5, rounded up
    for v in allowed:
        if v >= s:
            return v - s
    return 0


def implicit_hydrogens(g: MoleculeGraph, i: int) -> int:
    """Implicit H count of an organic-subset atom (0 for bracket atoms).

    Fills up to the lowest allowed valence not below the bond sum; an
    aromatic atom gives one unit to its ring.
    """
    a = g.atoms[i]
    if a.bracket:
        return 0
    return _implicit_count(a.element, a.formal_charge, a.aromatic, *_bond_sums(g, i))


def check_valence(g: MoleculeGraph) -> list[str]:
    """Per-atom valence violations; empty means every atom is satisfied.

    Each atom's sum is its bond orders plus hydrogens. An atom with aromatic
    bonds may take one extra unit (its share of the ring's double bonds), so
    its sum is accepted if any allowed valence lies in [sum, sum + 1] with
    aromatic bonds counted as 1. Bracket atoms below their valence are
    radicals and accepted; exceeding it is not. Elements outside the table are
    not checked.
    """
    out = []
    for i, a in enumerate(g.atoms):
        allowed = allowed_valences(a.element, a.formal_charge)
        if allowed is None:
            continue
        plain, arom = _bond_sums(g, i)
        total = plain + arom + g.hydrogens(i)
        hi = total + (1 if arom else 0)
        ok = any(total <= v <= hi for v in allowed)
        if not ok and a.bracket and not arom:
            # a bracket atom states its hydrogens, so a shortfall is a radical
            ok = total <= max(allowed)
        if not ok:
            shown = f"{total}" if not arom else f"{total}-{hi}"
            out.append(f"atom {i} ({a.element}): valence {shown} not in {list(allowed)}")
    return out


# --- canonicalization ------------------------------------------------------------

_Z = {s: k + 1 for k, s in enumerate(SYMBOLS)}


def _dense_rank(keys) -> list[int]:
    order = sorted(set(keys))
    lookup = {k: r for r, k in enumerate(order)}
    return [lookup[k] for k in keys]


def _refine(g: MoleculeGraph, ranks: list[int]) -> list[int]:
    n_classes = len(set(ranks))
    while True:
        keys = [
            (ranks[i], tuple(sorted((ranks[j], o.value) for j, o in g.neighbors[i])))
            for i in range(len(ranks))
        ]
        new = _dense_rank(keys)
        k = len(set(new))
        ranks = new
        if k == n_classes:
            return ranks
        n_classes = k


def atom_invariant(g: MoleculeGraph, i: int) -> tuple:
    a = g.atoms[i]
    return (g.degree(i), _Z[a.element], a.formal_charge, g.hydrogens(i), a.aromatic,
            g.ring_membership[i])


def canonical_ranks(g: MoleculeGraph) -> list[int]:
    """Distinct canonical ranks 0..n-1 from iterative invariant refinement.

    While ties remain, the lowest-index atom of the lowest tied class is
    split off (all ranks doubled, that atom's reduced by one) and the
    refinement is repeated.
    """
    n = len(g.atoms)
    ranks = _refine(g, _dense_rank([atom_invariant(g, i) for i in range(n)]))
    while len(set(ranks)) < n:
        counts: dict[int, int] = {}
        for r in ranks:
            counts[r] = counts.get(r, 0) + 1
        tied = min(r for r, c in counts.items() if c > 1)
        pick = min(i for i in range(n) if ranks[i] == tied)
        ranks = [2 * r for r in ranks]
        ranks[pick] -= 1
        ranks = _refine(g, _dense_rank(ranks))
    return ranks


def _atom_text(g: MoleculeGraph, i: int) -> str:
    a = g.atoms[i]
    h = g.hydrogens(i)
    sym = a.element.lower() if a.aromatic else a.element
    bare_ok = (a.formal_charge == 0
               and (sym in AROMATIC_ORGANIC if a.aromatic else a.element in ORGANIC)
               and _implicit_count(a.element, 0, a.aromatic, *_bond_sums(g, i)) == h)
    if bare_ok:
        return sym
    text = "[" + sym
    if h:
        text += "H" + (str(h) if h > 1 else "")
    if a.formal_charge:
        q = a.formal_charge
        text += ("+" if q > 0 else "-") + (str(abs(q)) if abs(q) > 1 else "")
    return text + "]"


def _bond_text(g: MoleculeGraph, u: int, v: int, order: BondOrder) -> str:
    both_arom = g.atoms[u].aromatic and g.atoms[v].aromatic
    if order is BondOrder.SINGLE:
        return "-" if both_arom else ""
    if order is BondOrder.AROMATIC:
        return "" if both_arom else ":"
    return order.symbol


def _write(g: MoleculeGraph, ranks: list[int]) -> str:
    """SMILES for ``g`` with DFS start and branch order driven by ``ranks``."""
    n = len(g.atoms)
    order_of = {}
    for i in range(n):
        order_of[i] = sorted(g.neighbors[i], key=lambda t: ranks[t[0]])

    visited = [False] * n
    children: list[list[tuple[int, BondOrder]]] = [[] for _ in range(n)]
    # ring closures: opener -> list of (partner, order); closer -> list of partners
    opens: list[list[tuple[int, BondOrder]]] = [[] for _ in range(n)]
    closes: list[list[int]] = [[] for _ in range(n)]
    preorder = {}
    comps = []
    for start in sorted(range(n), key=lambda i: ranks[i]):
        if visited[start]:
            continue
        comps.append(start)
        visited[start] = True
        preorder[start] = len(preorder)
        stack = [(start, -1, iter(order_of[start]))]
        while stack:
            v, parent, it = stack[-1]
            advanced = False
            for w, o in it:
                if w == parent:
                    continue
                if not visited[w]:
                    visited[w] = True
                    preorder[w] = len(preorder)
                    children[v].append((w, o))
                    stack.append((w, v, iter(order_of[w])))
                    advanced = True
                    break
                if preorder[w] < preorder[v] and v not in [p for p, _ in opens[w]]:
                    opens[w].append((v, o))
                    closes[v].append(w)
            if not advanced:
                stack.pop()

    pieces = []
    for start in comps:
        out = []
        free = list(range(1, 100))
        digit_of: dict[frozenset, int] = {}
        work: list = [("atom", start, "")]
        while work:
            item = work.pop()
            if item[0] == "text":
                out.append(item[1])
                continue
            _, v, btxt = item
            out.append(btxt + _atom_text(g, v))
            released = []
            for w in sorted(closes[v], key=lambda w: digit_of[frozenset((v, w))]):
                d = digit_of.pop(frozenset((v, w)))
                out.append(str(d) if d < 10 else f"%{d:02d}")
                released.append(d)
            for w, o in sorted(opens[v], key=lambda t: ranks[t[0]]):
                if not free:
                    raise ValueError("more than 99 simultaneous ring closures")
                d = free.pop(0)
                digit_of[frozenset((v, w))] = d
                out.append(_bond_text(g, v, w, o) + (str(d) if d < 10 else f"%{d:02d}"))
            free = sorted(free + released)
            kids = children[v]
            todo = []
            for k, (w, o) in enumerate(kids):
                if k < len(kids) - 1:
                    todo.append(("text", "("))
                    todo.append(("atom", w, _bond_text(g, v, w, o)))
                    todo.append(("text", ")"))
                else:
                    todo.append(("atom", w, _bond_text(g, v, w, o)))
            work.extend(reversed(todo))
        pieces.append("".join(out))
    return ".".join(pieces)


def canonicalize(g: MoleculeGraph) -> str:
    """Canonical SMILES: same string for every spelling of the same graph."""
    if not g.atoms:
        return ""
    return _write(g, canonical_ranks(g))


def canonical_smiles(s: str) -> str:
    return canonicalize(parse_smiles(s))


def random_smiles(g: MoleculeGraph, rng: np.random.Generator) -> str:
    """A valid, randomly ordered SMILES spelling of ``g`` (for testing)."""
    ranks = list(rng.permutation(len(g.atoms)))
    return _write(g, [int(r) for r in ranks])


# --- scaffolds ---------------------------------------------------------------------


def scaffold_atom_indices(g: MoleculeGraph) -> list[int]:
    """Atoms that survive repeated removal of non-ring atoms of degree <= 1."""
    ring = g.ring_membership
    alive = set(range(len(g.atoms)))
    deg = [g.degree(i) for i in range(len(g.atoms))]
    changed = True
    while changed:
        changed = False
        for i in sorted(alive):
            if not ring[i] and deg[i] <= 1:
                alive.discard(i)
                for j, _ in g.neighbors[i]:
                    if j in alive:
                        deg[j] -= 1
                changed = True
    return sorted(alive)


def extract_scaffold(g: MoleculeGraph):
    """Canonical SMILES of the ring systems plus linkers, or ACYCLIC."""
    keep = scaffold_atom_indices(g)
    if not keep:
        return ACYCLIC
    kept = set(keep)
    atoms = list(g.atoms)
    for i in keep:
        a = atoms[i]
        if not a.bracket:
            continue
        lost = sum(1 if o is BondOrder.AROMATIC else o.value
                   for j, o in g.neighbors[i] if j not in kept)
        if not lost:
            continue
        if a.formal_charge == 0 and a.element in ORGANIC and not a.aromatic:
            atoms[i] = Atom(a.element, 0, 0, False, False)
        else:
            atoms[i] = Atom(a.element, a.formal_charge, a.explicit_h + lost, a.aromatic, True)
    sub = MoleculeGraph(tuple(atoms), g.bonds).subgraph(keep)
    return canonicalize(sub)
