import time

import numpy as np
import pytest
from hypothesis import given, strategies as st

from chemdu.core import EnergyProfile
from chemdu.neb import NebConfig, NebError, analyze_profile, run_neb
from chemdu.oracles import MB_MINIMA, MB_SADDLES, muller_brown_barrier, muller_brown_stationary_points
from chemdu.potentials import (
    HarmonicWell, MullerBrown, Potential, builtin_potentials, get_potential, gradient_error,
)
from oracles import lj_dimer_barrier, random_point

MB_START = [MB_MINIMA[0].x, MB_MINIMA[0].y]
MB_END = [MB_MINIMA[1].x, MB_MINIMA[1].y]


@pytest.mark.parametrize("name", sorted(builtin_potentials()))
def test_gradients_match_finite_differences(name):
    pot = get_potential(name)
    rng = np.random.default_rng(11)
    for _ in range(25):
        assert gradient_error(pot, random_point(name, rng)) < 1e-4


def test_unknown_potential_lists_choices():
    with pytest.raises(KeyError) as e:
        get_potential("nope")
    assert "muller_brown" in str(e.value)


def test_mb_vectorised_matches_scalar():
    mb = MullerBrown()
    pts = np.random.default_rng(0).uniform(-1, 1, size=(7, 2))
    E, G = mb.energies_gradients(pts)
    assert np.allclose(E, [mb.energy(p) for p in pts])
    assert np.allclose(G, [mb.gradient(p) for p in pts])


def test_oracle_agrees_with_frozen_table():
    minima, saddles = muller_brown_stationary_points()
    assert len(minima) == 3 and len(saddles) == 2
    for got, want in zip(minima + saddles, MB_MINIMA + MB_SADDLES):
        assert abs(got.x - want.x) < 1e-5 and abs(got.energy - want.energy) < 1e-5
    b = muller_brown_barrier()
    assert b["saddle"] == saddles[1]  # A -> B crosses the higher saddle
    assert abs(b["grid_level"] - b["saddle"].energy) < 0.5


@pytest.mark.parametrize("profile, ts, barrier, enthalpy", [
    ([0.0, 1.2, 0.4, -0.3], 1, 1.2, -0.3),
    ([0.0, -0.2, -0.5], 0, 0.0, -0.5),
    ([0.0, 1.0, 1.0, 0.2], 1, 1.0, 0.2),
    ([0.0, 0.5, 0.9], 2, 0.9, 0.9),
])
def test_profile_analysis(profile, ts, barrier, enthalpy):
    a = analyze_profile(EnergyProfile(profile))
    assert (a.ts_index, a.barrier_ev, a.enthalpy_ev) == (ts, pytest.approx(barrier), pytest.approx(enthalpy))


@given(st.lists(st.floats(-100, 100), min_size=2, max_size=20))
def test_profile_invariant(e):
    a = analyze_profile(e)
    assert a.barrier_ev >= max(0.0, a.enthalpy_ev)
    assert e[a.ts_index] == max(e) and a.ts_index == e.index(max(e))


def test_mb_climbing_neb_matches_oracle():
    cfg = NebConfig(n_images=15, spring_k=50.0, climbing=True, max_force_tol=0.05,
                    max_steps=20000, step_size=0.005)
    t0 = time.perf_counter()
    res = run_neb(MullerBrown(), MB_START, MB_END, cfg)
    assert time.perf_counter() - t0 < 10
    assert res.converged and res.climbing_image is not None
    want = muller_brown_barrier()
    assert abs(res.analysis.barrier_ev - want["barrier"]) < 1e-2
    assert abs(res.analysis.enthalpy_ev - want["enthalpy"]) < 1e-2
    a = res.analysis
    assert a.barrier_ev >= max(0.0, a.enthalpy_ev)
    assert np.array_equal(res.images[0], MB_START) and np.array_equal(res.images[-1], MB_END)


def test_lj_dimer_barrier():
    rmin = 2 ** (1 / 6)
    cfg = NebConfig(n_images=11, climbing=False, max_force_tol=1e-3, step_size=0.01)
    res = run_neb(get_potential("lj_pair"), [[0, 0, 0], [rmin, 0, 0]], [[0, 0, 0], [3.0, 0, 0]], cfg)
    assert abs(res.analysis.barrier_ev - 0.9945) < 1e-3
    assert abs(res.analysis.barrier_ev - lj_dimer_barrier()) < 1e-3


def test_identical_endpoints_return_immediately():
    res = run_neb(HarmonicWell(), [1.0, 1.0], [1.0, 1.0])
    assert res.converged and res.steps_taken == 0
    assert res.analysis.barrier_ev == 0.0


def test_step_budget_reports_non_convergence():
    res = run_neb(MullerBrown(), MB_START, MB_END, NebConfig(max_steps=3))
    assert not res.converged and res.steps_taken == 3 and len(res.history) == 4


class Exploding(Potential):
    def energy(self, x):
        return float("nan") if x[0] > 0.5 else 0.0

    def gradient(self, x):
        return np.zeros_like(x)


def test_non_finite_energy_names_the_image():
    with pytest.raises(NebError) as e:
        run_neb(Exploding(), [0.0, 0.0], [1.0, 0.0], NebConfig(n_images=5))
    assert e.value.image == 3


def test_config_validation():
    with pytest.raises(ValueError):
        NebConfig(n_images=2)
    with pytest.raises(ValueError):
        NebConfig(spring_k=0)
    with pytest.raises(ValueError):
        run_neb(HarmonicWell(), [0.0], [1.0, 2.0])
