"""Climbing-image NEB on the Müller–Brown surface, checked against the oracle."""

from chemdu.neb import NebConfig, run_neb
from chemdu.oracles import MB_MINIMA, muller_brown_barrier
from chemdu.potentials import MullerBrown, get_potential

# %% Independent reference: grid + local refinement
oracle = muller_brown_barrier()
print(f"oracle barrier {oracle['barrier']:.4f}, enthalpy {oracle['enthalpy']:.4f}")

# %% The band between the two deepest minima
cfg = NebConfig(n_images=15, spring_k=50.0, climbing=True, max_force_tol=0.05,
                max_steps=20000, step_size=0.005)
a, b = MB_MINIMA[0], MB_MINIMA[1]
res = run_neb(MullerBrown(), [a.x, a.y], [b.x, b.y], cfg)
an = res.analysis
print(f"converged={res.converged} in {res.steps_taken} steps, climbing image {res.climbing_image}")
print(f"NEB barrier {an.barrier_ev:.4f}, enthalpy {an.enthalpy_ev:.4f}, TS image {an.ts_index}")
for i, (x, e) in enumerate(zip(res.images, res.profile.energies)):
    print(f"  {i:2d}  ({x[0]:+.3f}, {x[1]:+.3f})  E={e:9.3f}")

# %% A Lennard-Jones dimer pulled apart: the barrier is E(3) - E(r_min)
rmin = 2 ** (1 / 6)
lj = run_neb(get_potential("lj_pair"), [[0, 0, 0], [rmin, 0, 0]], [[0, 0, 0], [3.0, 0, 0]],
             NebConfig(climbing=False, max_force_tol=1e-3))
print(f"LJ dimer barrier {lj.analysis.barrier_ev:.4f}")
