"""Regenerate the checked-in golden *inputs* under src/chemdu/goldens/inputs.

Expected outputs are written separately by ``chemdu goldens --update`` and
reviewed by hand before committing. Run from the repository root.
"""

import json
from pathlib import Path

import numpy as np

from chemdu.core import Cell, ReactionRecord, make_frame
from chemdu.io import write_predictions, write_records, write_trajectory, GasPrediction, CatalyticPrediction
from chemdu.synth import synthesize_catalytic_records, synthesize_gas_records

ROOT = Path("src/chemdu/goldens/inputs")

# acetaldehyde-like molecule, coordinates chosen to print like Table 3 rows
MOLECULE = [
    ("C", (-1.62, 0.55, 0.99)),
    ("C", (-0.13, 0.61, 1.02)),
    ("O", (0.52, 1.63, 1.12)),
    ("H", (-2.01, 1.56, 0.88)),
    ("H", (-1.98, 0.12, 1.92)),
    ("H", (-1.95, -0.06, 0.15)),
    ("H", (0.36, -0.37, 0.96)),
]


def molecule():
    syms = [s for s, _ in MOLECULE]
    pos = np.array([p for _, p in MOLECULE])
    write_trajectory(ROOT / "molecule.extxyz", [make_frame(syms, pos, energy=-153.2)])
    # frame 2: H7 moves 0.25 Å (reported), H6 moves exactly 0.1 Å (omitted;
    # 0.25 - 0.15 is exactly 0.1 in binary floating point), C1 wiggles 0.03 Å
    moved = pos.copy()
    moved[6] += (0.25, 0.0, 0.0)
    moved[5] += (0.0, 0.0, 0.1)
    moved[0] += (0.0, 0.0, 0.03)
    write_trajectory(ROOT / "molecule_2frame.extxyz",
                     [make_frame(syms, pos, energy=-153.2), make_frame(syms, moved, energy=-152.9)])


def slab():
    rec = synthesize_catalytic_records(0, 1)[0]
    write_trajectory(ROOT / "slab_frame.extxyz", [rec.trajectory[0]])


def gas4():
    recs = synthesize_gas_records(5, 4)
    write_records(ROOT / "gas4", recs)
    preds = []
    for k, r in enumerate(recs):
        smi = r.product_smiles
        barrier = r.barrier_ev
        if k == 1:
            smi = "CCCC" if smi != "CCCC" else "CCC"
        if k == 2:
            barrier = r.barrier_ev + 0.4
        preds.append(GasPrediction(r.id, smi, barrier, r.enthalpy_ev))
    (ROOT / "gas4" / "preds.jsonl").write_bytes(write_predictions(preds))


def cat4():
    recs = synthesize_catalytic_records(21, 4)
    write_records(ROOT / "cat4", recs)
    preds = []
    for k, r in enumerate(recs):
        step = r.ts_step + (2 if k % 2 == 0 else 0)
        preds.append(CatalyticPrediction(r.id, r.reaction_type, r.adsorbate_smiles, r.product_smiles,
                                         step, r.barrier_ev, r.enthalpy_ev,
                                         raw_reaction_type=str(r.reaction_type)))
    (ROOT / "cat4" / "preds.jsonl").write_bytes(write_predictions(preds))


# held-out scaffold under seed 0 / fraction 0.2 is benzene ("C" in the table)
SIX = [
    ("r1", "Cc1ccccc1", "CC1CCCCC1"),    # C -> A  ood_reactants
    ("r2", "OC1CCCCC1", "O=C1CCCCC1"),   # A -> A  train
    ("r3", "CCC1CCCCC1", "CCc1ccccc1"),  # A -> C  ood_products
    ("r4", "Oc1ccccc1", "Nc1ccccc1"),    # C -> C  ood_both
    ("r5", "CN1CCCCC1", "C1CCNCC1"),     # B -> B  train
    ("r6", "CC1CCNCC1", "CC1CCCCC1"),    # B -> A  train
]


def six():
    f = make_frame(["C"], [[0.0, 0.0, 0.0]])
    recs = [ReactionRecord(rid, f, f, f, prod, 0.5, 0.1, reactant_smiles=reac) for rid, reac, prod in SIX]
    write_records(ROOT / "split6", recs)


if __name__ == "__main__":
    ROOT.mkdir(parents=True, exist_ok=True)
    molecule()
    slab()
    gas4()
    cat4()
    six()
    print("inputs written to", ROOT)
