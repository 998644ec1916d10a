"""Synthetic adsorbate-on-slab trajectories and the geometric reaction classifier."""

from collections import Counter

from chemdu.neb import analyze_profile
from chemdu.synth import SLAB_ATOMS, classify_reaction, synthesize_catalytic_records

# %% Generate and inspect a few records
recs = synthesize_catalytic_records(seed=7, count=200)
for r in recs[:3]:
    a = analyze_profile(r.profile)
    print(f"{r.id} {r.reaction_type.value:12s} {r.adsorbate_smiles:10s} -> {r.product_smiles:10s} "
          f"frames={len(r.trajectory)} ts={a.ts_index} barrier={a.barrier_ev:.2f} eV")

# %% The classifier only sees the first and last geometry
pairs = Counter((r.reaction_type.value, classify_reaction(r.trajectory, SLAB_ATOMS).value) for r in recs)
for (assigned, recovered), n in sorted(pairs.items()):
    print(f"assigned {assigned:12s} recovered {recovered:12s} x{n}")
