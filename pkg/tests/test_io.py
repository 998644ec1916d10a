import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from chemdu.core import Cell, Trajectory, make_frame
from chemdu.io import (
    ParseError, RecordRow, SchemaError, parse_extxyz, read_predictions, read_records,
    read_records_file, write_extxyz, write_predictions, write_records,
)
from chemdu.synth import synthesize_catalytic_records, synthesize_gas_records

TWO_FRAMES = b"""3
energy=-1.5
O 0.0 0.0 0.0
H 0.96 0.0 0.0
H -0.24 0.93 0.0
3

O 0.0 0.0 0.1
H 0.96 0.0 0.1
H -0.24 0.93 0.1
"""


def test_two_frames_non_periodic():
    t, diag = parse_extxyz(TWO_FRAMES)
    assert len(t) == 2 and diag.frame_count == 2
    assert all(f.cell.pbc == (False, False, False) for f in t)
    assert t[0].energy == -1.5 and t[1].energy is None
    assert t[1].positions[2, 2] == pytest.approx(0.1)


def test_lattice_and_pbc_keys():
    src = b'1\nLattice="10 0 0 0 10 0 0 0 10" pbc="T T F"\nCu 0 0 0\n'
    t, _ = parse_extxyz(src)
    assert t[0].cell.pbc == (True, True, False)
    assert np.array_equal(t[0].cell.basis, np.eye(3) * 10)


def test_crlf_accepted():
    t, _ = parse_extxyz(TWO_FRAMES.replace(b"\n", b"\r\n"))
    assert len(t) == 2


def test_atom_count_mismatch_names_frame_2():
    src = TWO_FRAMES.replace(b"3\n\nO", b"4\n\nO") + b"H 1 1 1\n"
    with pytest.raises(ParseError) as e:
        parse_extxyz(src)
    assert "frame 2" in str(e.value) and e.value.line == 6


@pytest.mark.parametrize("bad, fragment", [
    (b"x\n\nH 0 0 0\n", "atom count"),
    (b"1\n\nXx 0 0 0\n", "element"),
    (b"1\n\nH 0 zero 0\n", "coordinate"),
    (b"2\n\nH 0 0 0\n", "truncated"),
])
def test_malformed_inputs(bad, fragment):
    with pytest.raises(ParseError) as e:
        parse_extxyz(bad)
    assert fragment in str(e.value).lower() and e.value.line >= 1


def test_unknown_keys_warn_or_raise():
    src = b"1\nfoo=bar energy=1.0\nH 0 0 0\n"
    _, diag = parse_extxyz(src)
    assert diag.warnings and "foo" in diag.warnings[0][1]
    with pytest.raises(ParseError):
        parse_extxyz(src, strict=True)


def test_write_shapes():
    one = Trajectory([make_frame(["H"], [[0, 0, 0]])])
    assert write_extxyz(one).decode().count("\n") == 3
    cell = Cell(np.eye(3) * 4, (True, True, False))
    text = write_extxyz([make_frame(["H"], [[0, 0, 0]], cell)]).decode()
    assert "Lattice=" in text.splitlines()[1] and 'pbc="T T F"' in text


coords = st.floats(-50, 50, allow_nan=False)


@st.composite
def trajectories(draw):
    n = draw(st.integers(1, 6))
    k = draw(st.integers(1, 4))
    syms = draw(st.lists(st.sampled_from(["H", "C", "O", "Cu", "Pt"]), min_size=n, max_size=n))
    pbc = draw(st.tuples(st.booleans(), st.booleans(), st.booleans()))
    cell = Cell(np.diag(draw(st.lists(st.floats(2, 20), min_size=3, max_size=3))), pbc) if any(pbc) else None
    frames = []
    for _ in range(k):
        pos = draw(st.lists(st.tuples(coords, coords, coords), min_size=n, max_size=n))
        e = draw(st.none() | st.floats(-1e3, 1e3))
        frames.append(make_frame(syms, pos, cell, e))
    return Trajectory(frames)


@given(trajectories())
def test_round_trip(t):
    back, _ = parse_extxyz(write_extxyz(t))
    assert len(back) == len(t)
    for a, b in zip(t, back):
        assert a.symbols == b.symbols and a.cell.pbc == b.cell.pbc
        assert np.max(np.abs(a.positions - b.positions)) <= 1e-6 + 1e-12
        assert np.allclose(a.cell.basis, b.cell.basis, atol=1e-6)
        assert a.energy == b.energy


@given(st.binary(max_size=300))
def test_parser_never_crashes_on_bytes(data):
    try:
        parse_extxyz(data)
    except ParseError:
        pass


@given(st.text(alphabet="0123456789 .-\nHCOTFLatice=\"pbcnrgy", max_size=200))
def test_parser_never_crashes_on_near_miss_text(text):
    try:
        parse_extxyz(text)
    except ParseError:
        pass


def test_records_round_trip(tmp_path):
    gas = synthesize_gas_records(2, 2)
    write_records(tmp_path / "g", gas)
    back = read_records_file(tmp_path / "g" / "records.jsonl", "gas")
    assert [r.id for r in back] == [r.id for r in gas]
    assert back[0].reactant_smiles == gas[0].reactant_smiles
    assert np.allclose(back[1].product.positions, gas[1].product.positions, atol=1e-6)

    cat = synthesize_catalytic_records(2, 2)
    write_records(tmp_path / "c", cat)
    lazy = read_records_file(tmp_path / "c" / "records.jsonl", "catalytic", eager=False)
    assert isinstance(lazy[0], RecordRow) and lazy[0].ts_step == cat[0].ts_step
    assert len(lazy[0].load().trajectory) == len(cat[0].trajectory)


def test_empty_record_file():
    assert read_records(b"", "gas") == []


def test_ts_step_beyond_trajectory_is_rejected(tmp_path):
    cat = synthesize_catalytic_records(4, 1)
    path = write_records(tmp_path, cat)
    line = json.loads(path.read_text())
    line["ts_step"] = len(cat[0].trajectory)
    path.write_text(json.dumps(line) + "\n")
    with pytest.raises(SchemaError) as e:
        read_records_file(path, "catalytic")
    assert e.value.line == 1


def test_schema_errors_name_line_and_field():
    good = {"id": "a", "reactant_path": "r", "ts_path": "t", "product_path": "p",
            "product_smiles": "C", "barrier_ev": 1.0, "enthalpy_ev": 0.0}
    bad = dict(good, id="b", barrier_ev="high")
    src = (json.dumps(good) + "\n" + json.dumps(bad) + "\n").encode()
    with pytest.raises(SchemaError) as e:
        read_records(src, "gas", eager=False)
    assert e.value.line == 2 and e.value.field == "barrier_ev"
    missing = {k: v for k, v in good.items() if k != "product_smiles"}
    with pytest.raises(SchemaError) as e:
        read_records(json.dumps(missing).encode(), "gas", eager=False)
    assert e.value.field == "product_smiles"


def test_gas_predictions():
    rows = read_predictions(b'{"id": "a", "product_smiles": "CCO", "barrier_ev": 0.5, "enthalpy_ev": -0.1}\n'
                            b'{"id": "b", "product_smiles": "CC"}\n', "gas")
    assert rows[0].barrier_ev == 0.5 and rows[1].barrier_ev is None


def test_unknown_reaction_type_is_kept():
    diags = []
    rows = read_predictions(b'{"id": "a", "reaction_type": "melting", "adsorbate_smiles": "O", '
                            b'"product_smiles": "O", "ts_step": 2}\n', "catalytic", diags)
    assert rows[0].reaction_type is None and not rows[0].type_valid
    assert diags and "melting" in diags[0][1]


def test_duplicate_prediction_ids():
    with pytest.raises(SchemaError):
        read_predictions(b'{"id": "a", "product_smiles": "C"}\n{"id": "a", "product_smiles": "C"}\n', "gas")


def test_catalytic_fields_in_gas_predictions_are_schema_errors():
    with pytest.raises(SchemaError):
        read_predictions(b'{"id": "a", "product_smiles": "C", "ts_step": 1}\n', "gas")


def test_prediction_round_trip():
    src = (b'{"id": "a", "reaction_type": "transfer", "adsorbate_smiles": "O", "product_smiles": "O", '
           b'"ts_step": 2, "barrier_ev": 1.0}\n')
    rows = read_predictions(src, "catalytic")
    assert read_predictions(write_predictions(rows), "catalytic") == rows
