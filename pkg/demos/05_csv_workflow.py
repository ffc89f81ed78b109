"""File-based workflow: write a CSV and config, then use the library the way
the command line does (the `countreg` CLI wraps exactly these calls).

Equivalent shell session:

    countreg simulate --config design.json --out data/
    countreg fit      --data data/dataset.csv --config run.json --out results/
    countreg compare  --data data/dataset.csv --config run.json --families P,NB,HNB --out results/
"""

import json
import tempfile
from pathlib import Path

from countreg.cli import main

workdir = Path(tempfile.mkdtemp(prefix="countreg_demo_"))

design = {
    "family": "HNB",
    "n": 8000,
    "seed": 5,
    "r": 0.6,
    "response": "cites",
    "covariates": [
        {"name": "oa", "kind": "categorical",
         "levels": ["closed", "green", "gold"], "probs": [0.6, 0.3, 0.1], "base": "closed"},
        {"name": "readers", "kind": "normal"},
    ],
    "beta": {"intercept": 1.5, "oa=green": 0.13, "oa=gold": 0.06, "readers": 0.4},
    "delta": {"intercept": -1.2, "oa=green": -0.3, "oa=gold": 0.1, "readers": -0.5},
}
(workdir / "design.json").write_text(json.dumps(design, indent=2))

run = {
    "family": "HNB",
    "response": "cites",
    "predictors": [
        {"name": "oa", "kind": "categorical", "base": "closed",
         "levels": ["closed", "green", "gold"]},
        {"name": "readers", "kind": "numeric"},
    ],
}
(workdir / "run.json").write_text(json.dumps(run, indent=2))

print("simulate ->", main(["simulate", "--config", str(workdir / "design.json"),
                           "--out", str(workdir / "data")]))
print("fit      ->", main(["fit", "--data", str(workdir / "data" / "dataset.csv"),
                           "--config", str(workdir / "run.json"),
                           "--out", str(workdir / "results")]))
print("compare  ->", main(["compare", "--data", str(workdir / "data" / "dataset.csv"),
                           "--config", str(workdir / "run.json"),
                           "--families", "P,NB,HNB", "--out", str(workdir / "results")]))

report = json.loads((workdir / "results" / "report.json").read_text())
print("\nhurdle fit: positives block")
for row in report["positives"]:
    print(f"  {row['name']:>12}: {row['estimate']} ({row['std_err']}){row['stars']}")
print("zeros block")
for row in report["zeros"]:
    print(f"  {row['name']:>17}: {row['estimate']} ({row['std_err']}){row['stars']}")

comparison = json.loads((workdir / "results" / "comparison.json").read_text())
print("\nAIC ranking:", " < ".join(f"{r['family']} ({r['aic_int']})" for r in comparison["ranking"]))
print("\nartifacts in", workdir)
