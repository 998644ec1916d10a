"""String, fingerprint and energy metrics on the four-record gas fixture."""

from chemdu.goldens import GOLDEN_DIR
from chemdu.io import read_predictions, read_records_file
from chemdu.metrics import bleu, evaluate_gas, levenshtein, morgan_fingerprint, tanimoto
from chemdu.smiles import parse_smiles

# %% Single-pair metrics
print("levenshtein CCO/CCN:", levenshtein("CCO", "CCN"))
print("bleu CCN vs CCO:", round(bleu("CCN", "CCO"), 4))
fp = lambda s: morgan_fingerprint(parse_smiles(s))
print("tanimoto phenol/toluene:", round(tanimoto(fp("Oc1ccccc1"), fp("Cc1ccccc1")), 3))

# %% The full report
d = GOLDEN_DIR / "inputs" / "gas4"
refs = read_records_file(d / "records.jsonl", "gas", eager=False)
preds = read_predictions((d / "preds.jsonl").read_bytes(), "gas")
report = evaluate_gas(refs, preds)
print(report.to_text())
print("aggregate/per-record consistency problems:", report.check_consistency())
