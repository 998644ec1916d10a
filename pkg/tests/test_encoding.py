import numpy as np
import pytest
from hypothesis import given, strategies as st

from chemdu.core import Cell, Trajectory, make_frame
from chemdu.encoding import (
    DISTANCE_HEADER, EDGE_COLUMNS, MOVED_HEADER, NEW_EDGES_HEADER, NON_PERIODIC_SENTENCE,
    EncodingConfig, MarkerKind, RawFeatureLayout, build_token_layout, encode_3d,
    encode_4d_sparse, mock_encoder, moved_atoms, supervision_pair, token_stats,
)
from chemdu.synth import dense_trajectory, synthesize_catalytic_records, synthesize_gas_records
from oracles import reported_sets


def water(dx=0.0):
    return make_frame(["O", "H", "H"], [[0, 0, 0], [0.96 + dx, 0, 0], [-0.24, 0.93, 0]])


def test_3d_structure():
    text = encode_3d(water())
    lines = text.splitlines()
    assert lines[0] == NON_PERIODIC_SENTENCE
    assert lines[1] == "O1 0.00 0.00 0.00"
    assert lines[2] == "H2 0.96 0.00 0.00"
    assert lines[3] == "H3 -0.24 0.93 0.00"
    assert lines[4] == DISTANCE_HEADER and lines[5] == EDGE_COLUMNS
    assert lines[6:] == ["1 2 0.96", "1 3 0.96", "2 1 0.96", "2 3 1.52", "3 1 0.96", "3 2 1.52"]


def test_3d_periodic_sentence_and_lattice():
    cell = Cell(np.diag([5.1, 5.1, 20.0]), (True, True, False))
    lines = encode_3d(make_frame(["Cu"], [[0, 0, 10]], cell)).splitlines()
    assert lines[0].startswith("The system is periodic along x y.")
    assert lines[1:4] == ["x 5.10 0.00 0.00", "y 0.00 5.10 0.00", "z 0.00 0.00 20.00"]


def test_negative_zero_is_not_printed():
    assert "-0.00" not in encode_3d(make_frame(["H"], [[-0.001, 0, 0]]))


def test_sparse_single_mover():
    t = [water(), water(0.2)]
    text = encode_4d_sparse(t)
    assert reported_sets(text) == {2: {1}}
    block = text.split("Frame 2:\n")[1].splitlines()
    assert block[0] == MOVED_HEADER and block[1] == "H2 1.16 0.00 0.00"
    assert block[2] == NEW_EDGES_HEADER and block[3] == EDGE_COLUMNS
    for line in block[4:]:
        i, j, _ = line.split()
        assert "2" in (i, j)


def test_sparse_stationary_frame_is_empty():
    text = encode_4d_sparse([water(), water()])
    block = text.split("Frame 2:\n")[1].splitlines()
    assert block == [MOVED_HEADER, NEW_EDGES_HEADER, EDGE_COLUMNS]


def test_threshold_is_strict():
    a = make_frame(["H"], [[0.0, 0.0, 0.25]])
    b = make_frame(["H"], [[0.0, 0.0, 0.35]])
    assert moved_atoms(a, b, 0.1) == [] or np.linalg.norm(b.positions - a.positions) > 0.1
    c = make_frame(["H"], [[0.0, 0.0, 0.125]])
    d = make_frame(["H"], [[0.0, 0.0, 0.25]])
    assert moved_atoms(c, d, 0.125) == []  # exact in binary: 0.125 is not > 0.125


def test_diagonal_move_just_over_threshold():
    a = make_frame(["H"], [[0, 0, 0]])
    b = make_frame(["H"], [[0.06, 0.06, 0.06]])
    assert moved_atoms(a, b, 0.1) == [0]


@given(st.integers(0, 2**32 - 1), st.floats(0.01, 0.5))
def test_sparse_sets_match_direct_displacements(seed, delta):
    rng = np.random.default_rng(seed)
    n, k = int(rng.integers(1, 8)), int(rng.integers(2, 5))
    pos = rng.uniform(0, 5, size=(n, 3))
    frames = []
    for _ in range(k):
        frames.append(make_frame(["C"] * n, pos.copy()))
        pos = pos + rng.normal(0, 0.1, size=pos.shape)
    got = reported_sets(encode_4d_sparse(frames, EncodingConfig(delta=delta)))
    for j in range(1, k):
        step = frames[j].positions - frames[j - 1].positions
        assert got[j + 1] == {i for i in range(n) if np.sqrt(step[i] @ step[i]) > delta}


def test_token_budget_shape():
    t = dense_trajectory(seed=0)
    full = token_stats("\n".join(encode_3d(f) for f in t))["whitespace_tokens"]
    sparse = token_stats(encode_4d_sparse(t))["whitespace_tokens"]
    assert full > 20000 and sparse < 0.3 * full


def test_token_layout():
    t = Trajectory([water(), water(0.2)])
    lay = build_token_layout(t, mock_encoder)
    toks = lay.tokens()
    assert toks == ["<graph_start>"] + ["<graph>"] * 3 + ["<graph_end>"] + ["<graph_start>"] + ["<graph>"] * 3 + ["<graph_end>"]
    assert lay.feature_rows.shape == (6, RawFeatureLayout().width) == (6, 528)
    sl = RawFeatureLayout().slices
    assert lay.feature_rows[0, sl["atomic_number"]][0] == 8
    assert np.allclose(lay.feature_rows[4, sl["xyz"]], [1.16, 0, 0])
    assert lay.markers[6].kind is MarkerKind.GRAPH and lay.markers[6].frame == 1 and lay.markers[6].atom == 0


def test_token_layout_rejects_wrong_encoder_shape():
    with pytest.raises(ValueError):
        build_token_layout([water()], lambda f: np.zeros((f.n_atoms, 10)))


def test_mock_encoder_is_rigid_invariant():
    rng = np.random.default_rng(3)
    pos = rng.uniform(0, 3, size=(6, 3))
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    a = mock_encoder(make_frame(["C"] * 3 + ["O"] * 3, pos))
    b = mock_encoder(make_frame(["C"] * 3 + ["O"] * 3, pos @ q.T + 1.7))
    assert np.allclose(a, b)


def test_supervision_pairs():
    g = synthesize_gas_records(1, 1)[0]
    prompt, target = supervision_pair(g, "gas", "text3d")
    assert prompt.count(DISTANCE_HEADER) == 2
    assert target.splitlines()[0] == f"Product: {g.product_smiles}"
    c = synthesize_catalytic_records(1, 1)[0]
    prompt, target = supervision_pair(c, "catalytic", "text4d")
    assert prompt.count("Frame ") == len(c.trajectory)
    assert f"TS step: {c.ts_step + 1}" in target
    with pytest.raises(ValueError):
        supervision_pair(g, "gas", "text5d")


def test_config_validation():
    with pytest.raises(ValueError):
        EncodingConfig(delta=0)
    with pytest.raises(ValueError):
        EncodingConfig(k_cap=0)
