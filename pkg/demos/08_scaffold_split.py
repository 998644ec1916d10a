"""Scaffold-level ID/OOD split of gas-phase records."""

from types import SimpleNamespace

from chemdu.splits import format_assignment, scaffold_key, scaffold_split, verify_split

# %% Six records over three ring scaffolds
rows = [("r1", "Cc1ccccc1", "CC1CCCCC1"), ("r2", "OC1CCCCC1", "O=C1CCCCC1"),
        ("r3", "CCC1CCCCC1", "CCc1ccccc1"), ("r4", "Oc1ccccc1", "Nc1ccccc1"),
        ("r5", "CN1CCCCC1", "C1CCNCC1"), ("r6", "CC1CCNCC1", "CC1CCCCC1")]
recs = [SimpleNamespace(id=i, reactant_smiles=r, product_smiles=p) for i, r, p in rows]
for r in recs:
    print(f"{r.id}: {scaffold_key(r.reactant_smiles):10s} -> {scaffold_key(r.product_smiles)}")

# %% Hold out 20% of scaffolds with seed 0
asg = scaffold_split(recs, holdout_fraction=0.2, seed=0)
print("held out:", sorted(asg.held_out))
print(format_assignment(asg, [r.id for r in recs]), end="")
print("violations:", verify_split(recs, asg))
