import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from chemdu.core import Cell, make_frame
from chemdu.pbc import (
    DegenerateCellError, build_neighbor_graph, check_cell, mic_displacement,
    neighbor_candidates, tiling_extent,
)
from oracles import brute_graph, random_cell, random_frame


def edges_as_tuples(g):
    return [(e.src, e.dst, round(e.distance, 10), e.shift) for e in g.edges]


def brute_as_tuples(edges):
    return [(i, j, round(d, 10), s) for i, j, d, s in edges]


@pytest.mark.parametrize("seed", range(30))
def test_graph_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    cell = random_cell(rng)
    f = random_frame(rng, cell=cell)
    assert edges_as_tuples(build_neighbor_graph(f, 2.5, 4)) == brute_as_tuples(brute_graph(f, 2.5, 4))


def test_non_periodic_has_no_image_edges():
    f = make_frame(["H", "H"], [[0, 0, 0], [0.74, 0, 0]])
    g = build_neighbor_graph(f)
    assert [(e.src, e.dst, e.shift) for e in g.edges] == [(0, 1, (0, 0, 0)), (1, 0, (0, 0, 0))]


def test_slab_has_in_plane_images_only():
    cell = Cell(np.diag([2.0, 2.0, 20.0]), (True, True, False))
    f = make_frame(["Cu"], [[0.0, 0.0, 10.0]], cell)
    g = build_neighbor_graph(f, 2.5, 8)
    shifts = {e.shift for e in g.edges}
    assert shifts == {(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0)}
    assert all(e.shift[2] == 0 for e in g.edges)


def test_small_cell_needs_multiple_images():
    cell = Cell(np.eye(3) * 1.0, (True, True, True))
    assert tiling_extent(cell, 2.5) == (3, 3, 3)
    f = make_frame(["H"], [[0, 0, 0]], cell)
    cands = neighbor_candidates(f, 2.5)
    expected = sum(1 for s in itertools.product(range(-3, 4), repeat=3)
                   if 0 < np.linalg.norm(s) <= 2.5)
    assert len(cands) == expected


def test_k_cap_ties_break_by_destination():
    pos = [[0, 0, 0], [1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1]]
    g = build_neighbor_graph(make_frame(["C"] + ["H"] * 5, pos), 2.5, 4)
    assert [e.dst for e in g.out_edges(0)] == [1, 2, 3, 4]


def test_degenerate_cell_rejected():
    B = np.array([[4.0, 0, 0], [3.9, 0.5, 0], [0, 0, 4.0]])
    with pytest.raises(DegenerateCellError):
        check_cell(Cell(B, (True, True, True)))
    f = make_frame(["H"], [[0, 0, 0]], Cell(B, (True, True, True)))
    with pytest.raises(DegenerateCellError):
        build_neighbor_graph(f)


def test_bad_parameters():
    f = make_frame(["H"], [[0, 0, 0]])
    with pytest.raises(ValueError):
        build_neighbor_graph(f, cutoff=0)
    with pytest.raises(ValueError):
        build_neighbor_graph(f, k_cap=0)


def test_mic_half_cell_tie_is_antisymmetric():
    cell = Cell(np.eye(3) * 4.0, (True, True, True))
    a, b = np.zeros(3), np.array([2.0, 0, 0])
    assert np.array_equal(mic_displacement(a, b, cell), -mic_displacement(b, a, cell))


@given(st.integers(0, 2**32 - 1))
def test_mic_properties(seed):
    rng = np.random.default_rng(seed)
    cell = random_cell(rng, pbc=(True, True, True), skew=0.0)
    a, b = rng.uniform(-10, 10, size=(2, 3))
    d = mic_displacement(a, b, cell)
    raw = b - a
    assert np.linalg.norm(d) <= np.linalg.norm(raw) + 1e-9
    assert np.linalg.norm(d) <= 0.5 * np.linalg.norm(np.diag(cell.basis)) + 1e-9
    # differs from raw by a whole lattice vector
    n = np.linalg.solve(cell.basis.T, raw - d)
    assert np.allclose(n, np.round(n), atol=1e-8)
    assert np.allclose(mic_displacement(b, a, cell), -d)


@given(st.integers(0, 2**32 - 1))
def test_mic_is_the_nearest_image(seed):
    rng = np.random.default_rng(seed)
    cell = random_cell(rng)
    a, b = rng.uniform(-8, 8, size=(2, 3))
    d = mic_displacement(a, b, cell)
    ranges = [range(-10, 11) if p else (0,) for p in cell.pbc]
    best = min(np.linalg.norm(b - a + np.asarray(s) @ cell.basis) for s in itertools.product(*ranges))
    assert np.linalg.norm(d) == pytest.approx(best, abs=1e-9)


@given(st.integers(0, 2**32 - 1))
def test_graph_invariant_under_lattice_translation_of_an_atom(seed):
    rng = np.random.default_rng(seed)
    cell = random_cell(rng, pbc=(True, True, True))
    f = random_frame(rng, n=5, cell=cell)
    pos = f.positions.copy()
    pos[0] += cell.basis[0] - cell.basis[2]
    g = make_frame(f.symbols, pos, cell)
    da = [(e.src, e.dst, round(e.distance, 8)) for e in build_neighbor_graph(f).edges]
    db = [(e.src, e.dst, round(e.distance, 8)) for e in build_neighbor_graph(g).edges]
    assert da == db
