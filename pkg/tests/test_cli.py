"""End-to-end command-line checks on temporary directories."""

import json
import math

import numpy as np
import pytest

from countreg.cli import main
from countreg.likelihood import link_hurdle, link_mean

RUN_CONFIG = {
    "family": "NB",
    "response": "cites",
    "predictors": [
        {"name": "oa", "kind": "categorical", "base": "closed",
         "levels": ["closed", "green", "gold"]},
        {"name": "x1", "kind": "numeric"},
    ],
}


def write_json(path, doc):
    path.write_text(json.dumps(doc, indent=2), encoding="utf-8")
    return path


def make_csv(path, n=3000, seed=0, family="NB", noise_column=False):
    rng = np.random.default_rng(seed)
    oa = rng.choice(["closed", "green", "gold"], size=n, p=[0.6, 0.3, 0.1])
    x1 = rng.normal(size=n)
    X = np.column_stack(
        [np.ones(n), (oa == "green").astype(float), (oa == "gold").astype(float), x1]
    )
    beta = np.array([1.3, 0.25, 0.1, 0.4])
    theta = link_mean(X, beta)
    r = 0.6
    if family == "NB":
        y = rng.poisson(rng.gamma(1 / r, r * theta))
    else:
        phi = link_hurdle(X, np.array([-0.8, -0.5, 0.2, 0.7]))
        y = np.zeros(n, dtype=np.int64)
        idx = np.flatnonzero(rng.random(n) >= phi)
        while idx.size:
            y[idx] = rng.poisson(rng.gamma(1 / r, r * theta[idx]))
            idx = idx[y[idx] == 0]
    lines = ["cites,oa,x1" + (",noise" if noise_column else "")]
    noise = rng.normal(size=n)
    for i in range(n):
        row = f"{y[i]},{oa[i]},{float(x1[i])!r}"
        if noise_column:
            row += f",{float(noise[i])!r}"
        lines.append(row)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


class TestFit:
    def test_nb_fit_report_and_plot_data(self, tmp_path):
        data = make_csv(tmp_path / "d.csv")
        config = write_json(tmp_path / "run.json", RUN_CONFIG)
        out = tmp_path / "out"
        assert main(["fit", "--data", str(data), "--config", str(config), "--out", str(out)]) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["schema_version"] == 1
        assert report["family"] == "NB"
        assert report["converged"] is True
        names = [row["name"] for row in report["coefficients"]]
        assert names == ["intercept", "oa=green", "oa=gold", "x1"]
        for row in report["coefficients"]:
            # 4-decimal fixed formatting and stars consistent with p-values
            assert len(row["estimate"].rsplit(".", 1)[1]) == 4
            p = float(row["p_value"])
            expected = "***" if p < 0.01 else "**" if p < 0.05 else "*" if p < 0.10 else ""
            assert row["stars"] == expected
        assert "dispersion" in report
        assert (out / "frequency.csv").exists()
        assert (out / "pearson_residuals.csv").exists()
        assert (out / "deviance_residuals.csv").exists()
        freq_lines = (out / "frequency.csv").read_text().strip().splitlines()
        assert freq_lines[0] == "value,empirical,fitted"

    def test_hnb_fit_has_positives_and_zeros_blocks(self, tmp_path):
        data = make_csv(tmp_path / "d.csv", family="HNB", seed=1)
        config = write_json(tmp_path / "run.json", {**RUN_CONFIG, "family": "HNB"})
        out = tmp_path / "out"
        assert main(["fit", "--data", str(data), "--config", str(config), "--out", str(out)]) == 0
        report = json.loads((out / "report.json").read_text())
        assert "positives" in report and "zeros" in report
        assert [r["name"] for r in report["zeros"]][0] == "zero:intercept"
        assert "irr" in report
        assert not (out / "deviance_residuals.csv").exists()

    def test_missing_column_exits_1(self, tmp_path, capsys):
        data = make_csv(tmp_path / "d.csv", n=200)
        bad = {**RUN_CONFIG, "predictors": RUN_CONFIG["predictors"] + [{"name": "absent"}]}
        config = write_json(tmp_path / "run.json", bad)
        code = main(["fit", "--data", str(data), "--config", str(config), "--out", str(tmp_path / "o")])
        assert code == 1
        assert "absent" in capsys.readouterr().err

    def test_missing_data_flag_exits_1(self, tmp_path, capsys):
        config = write_json(tmp_path / "run.json", RUN_CONFIG)
        code = main(["fit", "--config", str(config), "--out", str(tmp_path / "o")])
        assert code == 1
        assert "data" in capsys.readouterr().err

    def test_perfect_separation_exits_2(self, tmp_path, capsys):
        rng = np.random.default_rng(20)
        n = 400
        flag = np.repeat([1, 0], n // 2)
        y = np.where(flag == 1, 0, rng.poisson(5.0, n) + 1)
        lines = ["cites,sep"] + [f"{y[i]},{flag[i]}" for i in range(n)]
        data = tmp_path / "d.csv"
        data.write_text("\n".join(lines) + "\n", encoding="utf-8")
        run = {
            "family": "HNB",
            "response": "cites",
            "predictors": [{"name": "sep", "kind": "binary"}],
        }
        config = write_json(tmp_path / "run.json", run)
        code = main(["fit", "--data", str(data), "--config", str(config),
                     "--out", str(tmp_path / "o")])
        assert code == 2
        assert "sep" in capsys.readouterr().err

    def test_usage_error_exits_1(self):
        assert main(["no-such-command"]) == 1

    def test_non_convergence_exits_2_with_flagged_report(self, tmp_path):
        data = make_csv(tmp_path / "d.csv", n=1500, seed=9)
        strangled = {**RUN_CONFIG, "fit_options": {"max_iterations": 1}}
        config = write_json(tmp_path / "run.json", strangled)
        out = tmp_path / "out"
        code = main(["fit", "--data", str(data), "--config", str(config), "--out", str(out)])
        assert code == 2
        report = json.loads((out / "report.json").read_text())
        assert report["converged"] is False
        assert float(report["gradient_norm"]) > 0.0

    def test_reports_deterministic(self, tmp_path):
        data = make_csv(tmp_path / "d.csv", n=800)
        config = write_json(tmp_path / "run.json", RUN_CONFIG)
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        main(["fit", "--data", str(data), "--config", str(config), "--out", str(out1)])
        main(["fit", "--data", str(data), "--config", str(config), "--out", str(out2)])
        assert (out1 / "report.json").read_bytes() == (out2 / "report.json").read_bytes()
        assert (out1 / "frequency.csv").read_bytes() == (out2 / "frequency.csv").read_bytes()


class TestCompare:
    def test_ranking_on_hurdle_data(self, tmp_path):
        data = make_csv(tmp_path / "d.csv", family="HNB", seed=2, n=4000)
        config = write_json(tmp_path / "run.json", RUN_CONFIG)
        out = tmp_path / "out"
        code = main([
            "compare", "--data", str(data), "--config", str(config),
            "--families", "P,NB,HNB", "--out", str(out),
        ])
        assert code == 0
        report = json.loads((out / "comparison.json").read_text())
        assert report["best"] == "HNB"
        assert [row["family"] for row in report["ranking"]] == ["HNB", "NB", "P"]
        assert report["ranking"][0]["delta"] == 0.0
        for row in report["ranking"]:
            assert isinstance(row["aic_int"], int)

    def test_deltas_relative_to_best(self, tmp_path):
        data = make_csv(tmp_path / "d.csv", n=1500, seed=3)
        config = write_json(tmp_path / "run.json", RUN_CONFIG)
        out = tmp_path / "out"
        main(["compare", "--data", str(data), "--config", str(config),
              "--families", "P,NB", "--out", str(out)])
        report = json.loads((out / "comparison.json").read_text())
        aics = [row["aic"] for row in report["ranking"]]
        assert report["ranking"][1]["delta"] == pytest.approx(aics[1] - aics[0], rel=1e-6)

    def test_empty_family_list_exits_1(self, tmp_path, capsys):
        data = make_csv(tmp_path / "d.csv", n=300)
        config = write_json(tmp_path / "run.json", RUN_CONFIG)
        code = main(["compare", "--data", str(data), "--config", str(config),
                     "--families", "", "--out", str(tmp_path / "o")])
        assert code == 1
        assert "two families" in capsys.readouterr().err


SIM_DESIGN = {
    "family": "NB",
    "n": 10,
    "seed": 99,
    "r": 0.7,
    "response": "cites",
    "covariates": [{"name": "x1", "kind": "normal", "mean": 0, "sd": 1}],
    "beta": {"intercept": 1.0, "x1": 0.3},
}


class TestSimulate:
    def test_minimal_design_writes_csv(self, tmp_path):
        config = write_json(tmp_path / "design.json", SIM_DESIGN)
        out = tmp_path / "out"
        assert main(["simulate", "--config", str(config), "--out", str(out)]) == 0
        lines = (out / "dataset.csv").read_text().strip().splitlines()
        assert lines[0] == "cites,x1"
        assert len(lines) == 11
        truth = json.loads((out / "truth.json").read_text())
        assert truth["truth"]["beta"] == {"intercept": 1.0, "x1": 0.3}

    def test_repeated_seed_identical_bytes(self, tmp_path):
        config = write_json(tmp_path / "design.json", SIM_DESIGN)
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        main(["simulate", "--config", str(config), "--out", str(out1)])
        main(["simulate", "--config", str(config), "--out", str(out2)])
        assert (out1 / "dataset.csv").read_bytes() == (out2 / "dataset.csv").read_bytes()

    def test_seed_override_changes_data(self, tmp_path):
        config = write_json(tmp_path / "design.json", SIM_DESIGN)
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        main(["simulate", "--config", str(config), "--out", str(out1)])
        main(["simulate", "--config", str(config), "--out", str(out2), "--seed", "123"])
        assert (out1 / "dataset.csv").read_bytes() != (out2 / "dataset.csv").read_bytes()

    def test_recovery_mode_writes_summary(self, tmp_path):
        design = {**SIM_DESIGN, "n": 1200, "recovery": {"replications": 5}}
        config = write_json(tmp_path / "design.json", design)
        out = tmp_path / "out"
        assert main(["simulate", "--config", str(config), "--out", str(out)]) == 0
        summary = json.loads((out / "recovery.json").read_text())
        assert summary["completed"] == 5
        assert set(summary["parameters"]) == {"intercept", "x1", "r"}

    def test_invalid_design_exits_1(self, tmp_path, capsys):
        config = write_json(tmp_path / "design.json", {**SIM_DESIGN, "family": "XXX"})
        assert main(["simulate", "--config", str(config), "--out", str(tmp_path / "o")]) == 1
        assert "family" in capsys.readouterr().err

    def test_generated_csv_feeds_fit(self, tmp_path):
        design = {**SIM_DESIGN, "n": 2500}
        config = write_json(tmp_path / "design.json", design)
        out = tmp_path / "out"
        main(["simulate", "--config", str(config), "--out", str(out)])
        run = {
            "family": "NB",
            "response": "cites",
            "predictors": [{"name": "x1", "kind": "numeric"}],
        }
        run_config = write_json(tmp_path / "run.json", run)
        out2 = tmp_path / "fit"
        code = main(["fit", "--data", str(out / "dataset.csv"),
                     "--config", str(run_config), "--out", str(out2)])
        assert code == 0
        report = json.loads((out2 / "report.json").read_text())
        estimate = float(report["coefficients"][1]["estimate"])
        assert estimate == pytest.approx(0.3, abs=0.15)


class TestRestrict:
    def test_noise_covariate_dropped(self, tmp_path):
        data = make_csv(tmp_path / "d.csv", n=4000, seed=4, noise_column=True)
        run = {
            "family": "NB",
            "response": "cites",
            "predictors": RUN_CONFIG["predictors"] + [{"name": "noise", "kind": "numeric"}],
        }
        config = write_json(tmp_path / "run.json", run)
        out = tmp_path / "out"
        code = main(["restrict", "--data", str(data), "--config", str(config),
                     "--level", "0.10", "--out", str(out)])
        assert code == 0
        report = json.loads((out / "restricted_report.json").read_text())
        assert "noise" in report["dropped"]["mean"]
        names = [row["name"] for row in report["coefficients"]]
        assert "noise" not in names
        assert (out / "full_report.json").exists()

    def test_all_significant_keeps_model(self, tmp_path):
        data = make_csv(tmp_path / "d.csv", n=6000, seed=5)
        config = write_json(tmp_path / "run.json", RUN_CONFIG)
        out = tmp_path / "out"
        main(["restrict", "--data", str(data), "--config", str(config),
              "--level", "0.10", "--out", str(out)])
        report = json.loads((out / "restricted_report.json").read_text())
        full = json.loads((out / "full_report.json").read_text())
        assert report["dropped"] == {"mean": [], "zeros": []}
        assert [r["name"] for r in report["coefficients"]] == [
            r["name"] for r in full["coefficients"]
        ]
        assert report["coefficients"] == full["coefficients"]

    def test_level_zero_falls_back_to_intercept_only(self, tmp_path):
        data = make_csv(tmp_path / "d.csv", n=800, seed=6)
        config = write_json(tmp_path / "run.json", RUN_CONFIG)
        out = tmp_path / "out"
        code = main(["restrict", "--data", str(data), "--config", str(config),
                     "--level", "0", "--out", str(out)])
        assert code == 0
        report = json.loads((out / "restricted_report.json").read_text())
        assert [row["name"] for row in report["coefficients"]] == ["intercept"]
        assert any("intercept-only" in w for w in report["restriction_warnings"])

    def test_hnb_prunes_equations_independently(self, tmp_path):
        data = make_csv(tmp_path / "d.csv", family="HNB", seed=7, n=5000, noise_column=True)
        run = {
            "family": "HNB",
            "response": "cites",
            "predictors": RUN_CONFIG["predictors"] + [{"name": "noise", "kind": "numeric"}],
        }
        config = write_json(tmp_path / "run.json", run)
        out = tmp_path / "out"
        code = main(["restrict", "--data", str(data), "--config", str(config),
                     "--level", "0.10", "--out", str(out)])
        assert code in (0, 2)
        report = json.loads((out / "restricted_report.json").read_text())
        assert "noise" in report["dropped"]["mean"]
        assert "noise" in report["dropped"]["zeros"]
        assert "positives" in report and "zeros" in report
