"""Periodic table lookup (symbol <-> atomic number)."""

from __future__ import annotations

from dataclasses import dataclass

SYMBOLS = (
    "H", "He",
    "Li", "Be", "B", "C", "N", "O", "F", "Ne",
    "Na", "Mg", "Al", "Si", "P", "S", "Cl", "Ar",
    "K", "Ca", "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn",
    "Ga", "Ge", "As", "Se", "Br", "Kr",
    "Rb", "Sr", "Y", "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd",
    "In", "Sn", "Sb", "Te", "I", "Xe",
    "Cs", "Ba",
    "La", "Ce", "Pr", "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er",
    "Tm", "Yb", "Lu",
    "Hf", "Ta", "W", "Re", "Os", "Ir", "Pt", "Au", "Hg",
    "Tl", "Pb", "Bi", "Po", "At", "Rn",
    "Fr", "Ra",
    "Ac", "Th", "Pa", "U", "Np", "Pu", "Am", "Cm", "Bk", "Cf", "Es", "Fm",
    "Md", "No", "Lr",
    "Rf", "Db", "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn",
    "Nh", "Fl", "Mc", "Lv", "Ts", "Og",
)

_NUMBER = {s: i + 1 for i, s in enumerate(SYMBOLS)}


@dataclass(frozen=True)
class Element:
    atomic_number: int
    symbol: str

    def __post_init__(self):
        if not 1 <= self.atomic_number <= len(SYMBOLS):
            raise ValueError(f"atomic number out of range: {self.atomic_number}")
        if SYMBOLS[self.atomic_number - 1] != self.symbol:
            raise ValueError(
                f"symbol {self.symbol!r} does not match atomic number {self.atomic_number}"
            )

    def __str__(self):
        return self.symbol


_TABLE = tuple(Element(i + 1, s) for i, s in enumerate(SYMBOLS))


def element(key: str | int) -> Element:
    """Return the element for a symbol (case-sensitive) or an atomic number.

    Raises KeyError for anything outside the table.
    """
    if isinstance(key, str):
        try:
            return _TABLE[_NUMBER[key] - 1]
        except KeyError:
            raise KeyError(f"unknown element symbol {key!r}") from None
    z = int(key)
    if not 1 <= z <= len(SYMBOLS):
        raise KeyError(f"unknown atomic number {key!r}")
    return _TABLE[z - 1]


def is_symbol(s: str) -> bool:
    return s in _NUMBER
