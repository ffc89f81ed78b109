"""Command-line front end.

Subcommands::

    countreg fit       --data d.csv --config run.json --out outdir
    countreg compare   --data d.csv --config run.json --families P,NB,HNB --out outdir
    countreg simulate  --config design.json --out outdir [--seed N] [--threads N]
    countreg restrict  --data d.csv --config run.json --level 0.10 --out outdir

The run configuration is a JSON document with the encoding fields
(``response``, ``predictors``, optional ``hurdle_predictors``) plus
``family`` (fit/restrict), optional ``families``, optional ``fit_options``,
and an optional ``y_max`` for the frequency table.  Reports are JSON with
``schema_version`` 1; tabulated estimates are fixed to 4 decimals while
machine fields carry 6 significant digits.  Plot data (frequency table,
Pearson residual scatter, NB deviance residuals) is written as RFC 4180 CSV
for external plotting.

Exit codes: 0 success, 1 configuration or I/O errors, 2 statistical
non-convergence (the report is still written, flagged).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

from .data import EncodingConfig, encode, read_csv
from .diagnostics import deviance_residuals, frequency_table, pearson
from .exceptions import ConfigError, CountregError, DataError, SeparationError
from .fit import FitOptions, fit_hnb, fit_nb, fit_poisson
from .inference import aic, compare, irr, wald_table
from .simulate import SimDesign, generate, recovery_study

SCHEMA_VERSION = 1
_FAMILIES = ("P", "NB", "HNB")


def _fmt4(value: float) -> str:
    return f"{value:.4f}"


def _sig6(value: float):
    if value is None or not math.isfinite(value):
        return str(value)
    return float(f"{value:.6g}")


def _load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from None


def _fit_options(doc: dict) -> FitOptions | None:
    raw = doc.get("fit_options")
    if raw is None:
        return None
    allowed = {"max_iterations", "gradient_tolerance", "step_halving_limit", "hessian_step"}
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"unknown fit options {sorted(unknown)}")
    return FitOptions(**raw)


def _coefficient_row(report) -> dict:
    return {
        "name": report.name,
        "estimate": _fmt4(report.estimate),
        "std_err": _fmt4(report.std_err),
        "stars": report.stars,
        "ci_low": _fmt4(report.ci_low),
        "ci_high": _fmt4(report.ci_high),
        "z": _sig6(report.z),
        "p_value": _sig6(report.p_value),
    }


def _irr_row(report) -> dict:
    return {
        "name": report.name,
        "irr": _fmt4(report.irr),
        "std_err": _fmt4(report.irr_std_err),
        "ci_low": _fmt4(report.ci_low),
        "ci_high": _fmt4(report.ci_high),
    }


def _fit_family(family, X, X_h, y, options, labels, hurdle_labels):
    if family == "P":
        return fit_poisson(X, y, options=options, labels=labels)
    if family == "NB":
        return fit_nb(X, y, options=options, labels=labels)
    if family == "HNB":
        return fit_hnb(X, X_h, y, options=options, labels=labels, hurdle_labels=hurdle_labels)
    raise ConfigError(f"unknown family {family!r}; expected one of {', '.join(_FAMILIES)}")


def _model_report(model, data_path):
    rows = wald_table(model)
    by_name = {row.name: row for row in rows}
    mean_rows = [_coefficient_row(by_name[name]) for name in model.mean_names]
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "fit",
        "family": model.family,
        "data": str(data_path),
        "n": model.n,
        "n_parameters": model.n_params,
        "converged": model.converged,
        "iterations": model.iterations,
        "gradient_norm": _sig6(model.gradient_norm),
        "loglik": _sig6(model.loglik),
        "aic": _sig6(aic(model)),
        "aic_int": int(round(aic(model))),
        "warnings": list(model.warnings),
    }
    if model.family == "HNB":
        report["positives"] = mean_rows
        report["zeros"] = [_coefficient_row(by_name[name]) for name in model.hurdle_names]
    else:
        report["coefficients"] = mean_rows
    if "r" in model.estimates:
        report["dispersion"] = _coefficient_row(by_name["r"])
    irr_names = [name for name in model.mean_names if name != "intercept"]
    if irr_names:
        report["irr"] = [_irr_row(row) for row in irr(rows, irr_names)]
    return report


def _residual_section(model, X, X_h, y):
    section = {}
    res = pearson(model, X, y, X_h=X_h)
    section["pearson_ps"] = _sig6(res.ps)
    section["df"] = res.df
    section["ps_over_df"] = _sig6(res.ps / res.df) if res.df > 0 else None
    if model.family == "NB":
        dev = deviance_residuals(model, X, y)
        section["deviance_signed_sum"] = _sig6(dev.deviance_sum_signed)
        section["deviance_sum_squared"] = _sig6(dev.deviance_sum_squared)
        if dev.df > 0:
            section["deviance_signed_over_df"] = _sig6(dev.deviance_sum_signed / dev.df)
            section["deviance_squared_over_df"] = _sig6(dev.deviance_sum_squared / dev.df)
    return section, res


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _write_plot_data(out_dir, model, X, X_h, y, res, y_max):
    empirical, fitted = frequency_table(y, model, y_max=y_max, X=X, X_h=X_h)
    values = [str(v) for v in range(y_max + 1)] + [f">{y_max}"]
    _write_csv(
        out_dir / "frequency.csv",
        ["value", "empirical", "fitted"],
        [(v, int(e), repr(float(f))) for v, e, f in zip(values, empirical, fitted)],
    )
    _write_csv(
        out_dir / "pearson_residuals.csv",
        ["predicted_mean", "pearson_residual"],
        [(repr(float(m)), repr(float(r))) for m, r in zip(res.mu, res.pearson)],
    )
    if model.family == "NB":
        dev = deviance_residuals(model, X, y)
        _write_csv(
            out_dir / "deviance_residuals.csv",
            ["predicted_mean", "deviance_residual"],
            [(repr(float(m)), repr(float(d))) for m, d in zip(dev.mu, dev.deviance)],
        )


def _write_report(path, report):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")


def _prepare(args, need_family=True):
    doc = _load_json(args.config)
    config = EncodingConfig.from_dict(doc)
    data_path = args.data or doc.get("data")
    if not data_path:
        raise ConfigError("no data file given (use --data or the config 'data' field)")
    dataset = read_csv(data_path, config)
    X = encode(dataset, config, equation="mean")
    X_h = encode(dataset, config, equation="hurdle")
    options = _fit_options(doc)
    family = doc.get("family", "NB") if need_family else None
    y_max_default = int(min(int(dataset.y.max()), 200))
    y_max = int(doc.get("y_max", y_max_default))
    return doc, config, data_path, dataset, X, X_h, options, family, y_max


def cmd_fit(args) -> int:
    _, _, data_path, dataset, X, X_h, options, family, y_max = _prepare(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    model = _fit_family(family, X.X, X_h.X, dataset.y, options, X.labels, X_h.labels)
    report = _model_report(model, data_path)
    residuals, res = _residual_section(model, X.X, X_h.X if model.family == "HNB" else None, dataset.y)
    report["residuals"] = residuals
    _write_report(out_dir / "report.json", report)
    _write_plot_data(out_dir, model, X.X, X_h.X if model.family == "HNB" else None, dataset.y, res, y_max)
    return 0 if model.converged else 2


def cmd_compare(args) -> int:
    doc, _, data_path, dataset, X, X_h, options, _, _ = _prepare(args, need_family=False)
    if args.families:
        families = [f.strip() for f in args.families.split(",") if f.strip()]
    else:
        families = list(doc.get("families", []))
    if len(families) < 2:
        raise ConfigError("compare needs at least two families")
    for family in families:
        if family not in _FAMILIES:
            raise ConfigError(f"unknown family {family!r}")
    models = [
        _fit_family(family, X.X, X_h.X, dataset.y, options, X.labels, X_h.labels)
        for family in families
    ]
    ranking = compare(models)
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "compare",
        "data": str(data_path),
        "n": dataset.n,
        "best": ranking[0].family,
        "ranking": [
            {
                "family": row.family,
                "aic": _sig6(row.aic),
                "aic_int": int(round(row.aic)),
                "delta": _sig6(row.delta),
                "loglik": _sig6(row.loglik),
                "n_parameters": row.n_params,
                "converged": row.model.converged,
            }
            for row in ranking
        ],
    }
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_report(out_dir / "comparison.json", report)
    return 0 if all(m.converged for m in models) else 2


def _write_dataset_csv(path, dataset):
    header = [dataset.response_name] + [col.name for col in dataset.columns]
    rows = []
    for i in range(dataset.n):
        row = [str(int(dataset.y[i]))]
        for col in dataset.columns:
            value = col.values[i]
            row.append(str(value) if col.kind == "categorical" else repr(float(value)))
        rows.append(row)
    _write_csv(path, header, rows)


def cmd_simulate(args) -> int:
    design = SimDesign.from_json(args.config)
    if args.seed is not None:
        import dataclasses

        design = dataclasses.replace(design, seed=args.seed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    dataset, truth = generate(design)
    _write_dataset_csv(out_dir / "dataset.csv", dataset)
    sidecar = {
        "schema_version": SCHEMA_VERSION,
        "command": "simulate",
        "design": design.to_dict(),
        "truth": truth,
        "encoding_config": {
            "response": design.response_name,
            "predictors": [
                {
                    "name": spec.name,
                    "kind": spec.kind,
                    **({"base": spec.base, "levels": list(spec.levels)} if spec.kind == "categorical" else {}),
                }
                for spec in design.encoding_config().predictors
            ],
        },
    }
    _write_report(out_dir / "truth.json", sidecar)
    doc = _load_json(args.config)
    recovery = doc.get("recovery")
    if recovery:
        replications = int(recovery.get("replications", 0))
        summary = recovery_study(design, replications, threads=max(1, args.threads))
        summary_report = {
            "schema_version": SCHEMA_VERSION,
            "command": "simulate/recovery",
            "design": design.to_dict(),
            "replications": summary["replications"],
            "completed": summary["completed"],
            "failures": summary["failures"],
            "parameters": {
                name: {key: _sig6(val) if isinstance(val, float) else val for key, val in stats.items()}
                for name, stats in summary["parameters"].items()
            },
        }
        _write_report(out_dir / "recovery.json", summary_report)
    return 0


def _prune(rows_by_name, names, level):
    """Names of covariates whose coefficients survive p <= level."""
    dropped = []
    kept = []
    for name in names:
        if name == "intercept":
            continue
        p_value = rows_by_name[name].p_value
        if not math.isnan(p_value) and p_value > level:
            dropped.append(name)
        else:
            kept.append(name)
    return kept, dropped


def _columns_to_predictors(labels, predictors):
    """Map surviving design-column labels back to predictor names."""
    keep = set()
    for label in labels:
        keep.add(label.split("=", 1)[0])
    return [p.name for p in predictors if p.name in keep]


def cmd_restrict(args) -> int:
    doc, config, data_path, dataset, X, X_h, options, family, y_max = _prepare(args)
    level = args.level if args.level is not None else float(doc.get("level", 0.10))
    if not 0.0 <= level <= 1.0:
        raise ConfigError("significance level must be in [0, 1]")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    full_model = _fit_family(family, X.X, X_h.X, dataset.y, options, X.labels, X_h.labels)
    rows = {row.name: row for row in wald_table(full_model)}

    kept_mean, dropped_mean = _prune(rows, full_model.mean_names, level)
    warnings = []
    if not kept_mean:
        warnings.append("all mean-equation covariates dropped; intercept-only")
    mean_predictors = _columns_to_predictors(kept_mean, config.predictors)

    dropped_zero = []
    hurdle_predictors = None
    if family == "HNB":
        zero_names = [name.removeprefix("zero:") for name in full_model.hurdle_names]
        kept_zero, dropped_zero_named = _prune(
            {name.removeprefix("zero:"): rows[name] for name in full_model.hurdle_names},
            zero_names,
            level,
        )
        dropped_zero = dropped_zero_named
        if not kept_zero:
            warnings.append("all hurdle-equation covariates dropped; intercept-only")
        hurdle_predictors = _columns_to_predictors(kept_zero, config.hurdle_specs())

    restricted_config = EncodingConfig(
        response=config.response,
        predictors=tuple(p for p in config.predictors if p.name in set(mean_predictors)),
        hurdle_predictors=tuple(hurdle_predictors) if hurdle_predictors is not None else None,
    )
    Xr = encode(dataset, restricted_config, equation="mean")
    Xr_h = encode(dataset, restricted_config, equation="hurdle")
    restricted = _fit_family(family, Xr.X, Xr_h.X, dataset.y, options, Xr.labels, Xr_h.labels)

    report = _model_report(restricted, data_path)
    report["command"] = "restrict"
    report["level"] = level
    report["dropped"] = {"mean": dropped_mean, "zeros": dropped_zero}
    report["restriction_warnings"] = warnings
    residuals, _ = _residual_section(
        restricted, Xr.X, Xr_h.X if family == "HNB" else None, dataset.y
    )
    report["residuals"] = residuals
    full_report = _model_report(full_model, data_path)
    _write_report(out_dir / "restricted_report.json", report)
    _write_report(out_dir / "full_report.json", full_report)
    return 0 if restricted.converged else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="countreg",
        description="Count-data regression: Poisson, negative binomial, and hurdle NB models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, data=True):
        if data:
            p.add_argument("--data", help="CSV data file (overrides the config 'data' field)")
        p.add_argument("--config", required=True, help="JSON configuration document")
        p.add_argument("--out", default="countreg_out", help="output directory")
        p.add_argument("--threads", type=int, default=1, help="worker processes where supported")

    p_fit = sub.add_parser("fit", help="fit one model family and write reports")
    common(p_fit)
    p_fit.set_defaults(func=cmd_fit)

    p_cmp = sub.add_parser("compare", help="fit several families and rank by AIC")
    common(p_cmp)
    p_cmp.add_argument("--families", help="comma-separated families, e.g. P,NB,HNB")
    p_cmp.set_defaults(func=cmd_compare)

    p_sim = sub.add_parser("simulate", help="generate data from a simulation design")
    common(p_sim, data=False)
    p_sim.add_argument("--seed", type=int, help="override the design seed")
    p_sim.set_defaults(func=cmd_simulate)

    p_res = sub.add_parser("restrict", help="drop insignificant covariates and refit")
    common(p_res)
    p_res.add_argument("--level", type=float, help="significance level for pruning (default 0.10)")
    p_res.set_defaults(func=cmd_restrict)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses exit code 2 for usage errors; 2 is reserved here for
        # statistical non-convergence, so usage problems map to 1.
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except SeparationError as exc:
        print(f"countreg: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, DataError, CountregError, ValueError, OSError) as exc:
        print(f"countreg: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
