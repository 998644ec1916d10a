"""SMILES parsing, valence checks, canonical forms and scaffolds."""

import numpy as np

from chemdu.smiles import (
    SmilesError, canonical_smiles, check_valence, extract_scaffold, parse_smiles, random_smiles,
)

# %% Different spellings of one molecule share a canonical form
for s in ("CCO", "OCC", "C(O)C"):
    print(f"{s:8s} -> {canonical_smiles(s)}")
g = parse_smiles("CC(=O)Oc1ccccc1C(=O)O")
rng = np.random.default_rng(0)
for _ in range(3):
    r = random_smiles(g, rng)
    print(f"{r:28s} -> {canonical_smiles(r)}")

# %% Valence problems and parse errors
print(check_valence(parse_smiles("C(C)(C)(C)(C)C")))
try:
    parse_smiles("C1CC(")
except SmilesError as e:
    print("SmilesError at offset", e.offset, "-", e)

# %% Murcko scaffolds
for s in ("CCC1CCCCC1", "O=C(N1CCOCC1)c1ccccc1", "CCO"):
    print(f"{s:24s} scaffold {extract_scaffold(parse_smiles(s))}")
