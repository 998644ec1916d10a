import json
import shutil
import subprocess
import sys

import pytest

from chemdu.cli import main
from chemdu.goldens import GOLDEN_DIR

INPUTS = GOLDEN_DIR / "inputs"


def test_encode_full3d_matches_golden(tmp_path):
    out = tmp_path / "enc.txt"
    assert main(["encode", "--mode", "full3d", str(INPUTS / "molecule.extxyz"), str(out)]) == 0
    assert out.read_bytes() == (GOLDEN_DIR / "expected" / "encode3d_molecule.txt").read_bytes()
    manifest = json.loads((tmp_path / "enc.txt.manifest.json").read_text())
    assert manifest["subcommand"] == "encode" and "wall_time_s" in manifest


def test_encode_pairs_in_parallel_matches_serial(tmp_path):
    src = str(INPUTS / "gas4" / "records.jsonl")
    assert main(["encode", "--mode", "pairs", "--task", "gas", src, str(tmp_path / "a.jsonl")]) == 0
    assert main(["--jobs", "2", "encode", "--mode", "pairs", "--task", "gas", src, str(tmp_path / "b.jsonl")]) == 0
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()


def test_missing_input_is_exit_2_and_writes_nothing(tmp_path, capsys):
    out = tmp_path / "x.txt"
    assert main(["encode", str(tmp_path / "nope.extxyz"), str(out)]) == 2
    assert not out.exists()
    assert "cannot read" in capsys.readouterr().err


def test_malformed_input_is_exit_2(tmp_path):
    bad = tmp_path / "bad.extxyz"
    bad.write_text("2\n\nH 0 0 0\n")
    assert main(["encode", str(bad), str(tmp_path / "o.txt")]) == 2


def test_usage_errors_are_exit_1(tmp_path, capsys):
    assert main(["neb", "--potential", "nope"]) == 1
    assert "muller_brown" in capsys.readouterr().err
    assert main(["encode", "--delta", "-1", str(INPUTS / "molecule.extxyz"), str(tmp_path / "o")]) == 1
    assert main([]) == 1


def test_evaluate_writes_report_dir(tmp_path, capsys):
    d = INPUTS / "gas4"
    assert main(["evaluate", "--task", "gas", "--refs", str(d / "records.jsonl"),
                 "--preds", str(d / "preds.jsonl"), "--out", str(tmp_path / "rep")]) == 0
    assert "EXACT" in capsys.readouterr().out
    summary = json.loads((tmp_path / "rep" / "report.jsonl").read_text().splitlines()[0])
    assert summary["metrics"]["EXACT"] == 0.75
    assert (tmp_path / "rep" / "manifest.json").exists()


def test_neb_default_muller_brown(tmp_path):
    out = tmp_path / "neb"
    assert main(["neb", "--out", str(out)]) == 0
    a = json.loads((out / "analysis.json").read_text())
    assert a["converged"] and abs(a["barrier"] - 106.0347) < 1e-2
    assert len((out / "profile.txt").read_text().splitlines()) == 15
    assert (out / "path.txt").exists()


def test_neb_with_geometry_files(tmp_path):
    for name, x in (("a", 1.1225), ("b", 3.0)):
        (tmp_path / f"{name}.extxyz").write_text(f"2\n\nAr 0 0 0\nAr {x} 0 0\n")
    out = tmp_path / "lj"
    assert main(["neb", "--potential", "lj_pair", "--start", str(tmp_path / "a.extxyz"),
                 "--end", str(tmp_path / "b.extxyz"), "--no-climbing", "--images", "9",
                 "--out", str(out)]) == 0
    assert (out / "path.extxyz").read_text().startswith("2\n")


def test_neb_requires_endpoints_off_muller_brown(tmp_path):
    assert main(["neb", "--potential", "lj_pair", "--out", str(tmp_path / "o")]) == 1


def test_split_and_config_precedence(tmp_path):
    recs = str(INPUTS / "split6" / "records.jsonl")
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 0, "holdout_fraction": 0.9}))
    out = tmp_path / "asg.txt"
    assert main(["--config", str(cfg), "split", "--holdout-fraction", "0.2", recs, "--out", str(out)]) == 0
    assert out.read_bytes() == (GOLDEN_DIR / "expected" / "split_six.txt").read_bytes()
    cfg.write_text(json.dumps({"bogus": 1}))
    assert main(["--config", str(cfg), "split", recs, "--out", str(out)]) == 1


def test_synth_then_stats(tmp_path, capsys):
    assert main(["synth", "--count", "3", "--seed", "1", "--out-dir", str(tmp_path / "s")]) == 0
    assert len((tmp_path / "s" / "records.jsonl").read_text().splitlines()) == 3
    capsys.readouterr()
    assert main(["stats", "--mode", "sparse4d", str(INPUTS / "molecule_2frame.extxyz")]) == 0
    stats = json.loads(capsys.readouterr().out)
    assert stats["whitespace_tokens"] > 0
    empty = tmp_path / "empty.extxyz"
    empty.write_text("")
    assert main(["stats", str(empty)]) == 0
    assert json.loads(capsys.readouterr().out)["whitespace_tokens"] == 0


def test_goldens_subcommand(capsys):
    assert main(["goldens"]) == 0
    assert "FAIL" not in capsys.readouterr().out


@pytest.mark.skipif(shutil.which("chemdu") is None, reason="console script not installed")
def test_console_script():
    r = subprocess.run(["chemdu", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and "chemdu" in r.stdout


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "chemdu.cli", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "encode" in r.stdout


def test_encode_sparse4d_matches_golden(tmp_path):
    out = tmp_path / "s.txt"
    assert main(["encode", "--mode", "sparse4d", str(INPUTS / "molecule_2frame.extxyz"), str(out)]) == 0
    assert out.read_bytes() == (GOLDEN_DIR / "expected" / "encode4d_sparse.txt").read_bytes()


def _perfect_gas_preds(path):
    rows = [json.loads(l) for l in (INPUTS / "gas4" / "records.jsonl").read_text().splitlines()]
    path.write_text("".join(json.dumps({k: r[k] for k in ("id", "product_smiles", "barrier_ev", "enthalpy_ev")}) + "\n"
                            for r in rows))
    return rows


def test_evaluate_perfect_and_half_missing(tmp_path, capsys):
    preds = tmp_path / "p.jsonl"
    _perfect_gas_preds(preds)
    refs = str(INPUTS / "gas4" / "records.jsonl")
    assert main(["evaluate", "--task", "gas", "--refs", refs, "--preds", str(preds), "--out", str(tmp_path / "a")]) == 0
    m = json.loads((tmp_path / "a" / "report.jsonl").read_text().splitlines()[0])["metrics"]
    assert m["EXACT"] == 1.0 and m["BLEU"] == 1.0 and m["LEVENSHTEIN"] == 0.0 and m["MORGAN"] == 1.0
    assert m["MAE_BARRIER"] == 0.0 and m["VALIDITY"] == 1.0
    preds.write_text("".join(preds.read_text().splitlines(keepends=True)[:2]))
    capsys.readouterr()
    assert main(["evaluate", "--task", "gas", "--refs", refs, "--preds", str(preds), "--out", str(tmp_path / "b")]) == 0
    assert "2 of 4 records have no prediction" in capsys.readouterr().err
    s = json.loads((tmp_path / "b" / "report.jsonl").read_text().splitlines()[0])
    assert s["n_missing"] == 2 and s["metrics"]["EXACT"] == 0.5 and s["counts"]["MAE_BARRIER"] == 2


def test_evaluate_catalytic_on_gas_predictions_is_schema_error(tmp_path):
    assert main(["evaluate", "--task", "catalytic", "--refs", str(INPUTS / "cat4" / "records.jsonl"),
                 "--preds", str(INPUTS / "gas4" / "preds.jsonl"), "--out", str(tmp_path / "r")]) == 2
    assert not (tmp_path / "r" / "report.txt").exists()


def test_neb_identical_endpoints(tmp_path):
    out = tmp_path / "n"
    assert main(["neb", "--start", "0.5,0.5", "--end", "0.5,0.5", "--out", str(out)]) == 0
    assert json.loads((out / "analysis.json").read_text())["barrier"] == 0.0


def test_neb_non_convergence_is_exit_0(tmp_path):
    out = tmp_path / "n"
    assert main(["neb", "--max-steps", "5", "--out", str(out)]) == 0
    assert json.loads((out / "manifest.json").read_text())["converged"] is False
    assert (out / "profile.txt").exists()


def test_split_corrupt_record_is_named(tmp_path, capsys):
    src = (INPUTS / "split6" / "records.jsonl").read_text().splitlines()
    bad = json.loads(src[2])
    bad["product_smiles"] = "C1CC("
    recs = tmp_path / "records.jsonl"
    recs.write_text("\n".join(src[:2] + [json.dumps(bad)] + src[3:]) + "\n")
    shutil.copytree(INPUTS / "split6" / "trajectories", tmp_path / "trajectories")
    out = tmp_path / "asg.txt"
    assert main(["split", str(recs), "--out", str(out)]) == 2
    assert "r3" in capsys.readouterr().err and not out.exists()


def test_split_rerun_is_byte_identical(tmp_path):
    recs = str(INPUTS / "split6" / "records.jsonl")
    main(["split", recs, "--seed", "3", "--out", str(tmp_path / "a")])
    main(["split", recs, "--seed", "3", "--out", str(tmp_path / "b")])
    assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()


def test_synth_is_deterministic(tmp_path):
    for d in ("a", "b"):
        assert main(["synth", "--count", "4", "--seed", "11", "--out-dir", str(tmp_path / d)]) == 0
    files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*.extxyz"))
    assert files
    assert (tmp_path / "a" / "records.jsonl").read_bytes() == (tmp_path / "b" / "records.jsonl").read_bytes()
    for f in files:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_stats_on_dense_fixture(tmp_path, capsys):
    from chemdu.io import write_extxyz
    from chemdu.synth import dense_trajectory

    src = tmp_path / "dense.extxyz"
    src.write_bytes(write_extxyz(dense_trajectory(seed=0)))
    capsys.readouterr()
    assert main(["stats", "--mode", "full3d", str(src)]) == 0
    assert json.loads(capsys.readouterr().out)["whitespace_tokens"] > 20000


def test_manifest_config_reproduces_output(tmp_path):
    recs = str(INPUTS / "split6" / "records.jsonl")
    a = tmp_path / "a.txt"
    assert main(["split", "--seed", "3", recs, "--out", str(a)]) == 0
    manifest = json.loads((tmp_path / "a.txt.manifest.json").read_text())
    cfg = dict(manifest["config"], out=str(tmp_path / "b.txt"))
    (tmp_path / "cfg.json").write_text(json.dumps(cfg))
    assert main(["--config", str(tmp_path / "cfg.json"), "split", recs, "--out", str(tmp_path / "b.txt")]) == 0
    assert a.read_bytes() == (tmp_path / "b.txt").read_bytes()
