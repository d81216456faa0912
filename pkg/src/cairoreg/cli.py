"""Command-line front end: simulate | fit | predict | eval | bench.

Every command is deterministic given its flags; seeds are explicit with
fixed defaults. Options may also come from a JSON config file (--config),
with command-line flags taking precedence and unknown config keys
rejected. JSON outputs carry {"version", "config"}; CSV outputs get a
<name>.meta.json sidecar with the same fields.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .bench import (
    BenchConfig,
    config_to_dict,
    run_bench,
    write_results_json,
    write_table_csv,
)
from .data import (
    TARGET_COLUMN,
    TRUE_MEAN_COLUMN,
    load_csv,
    read_numeric_csv,
    write_csv,
)
from .dgp import Scenario, ScenarioSpec, generate
from .isotonic import predict as calibration_predict
from .metrics import rmse, spearman, kendall
from .pipeline import (
    VARIANTS,
    CairoModel,
    cairo_fit,
    fit_variant,
    load_model,
    predict_model,
    save_model,
    variant_loss_spec,
)
from .scorer import AdamHyper, TrainConfig, forward

EVAL_VERSION = "cairo-eval-v1"
DATASET_VERSION = "cairo-dataset-v1"
PREDICTIONS_VERSION = "cairo-predictions-v1"


class CliError(RuntimeError):
    pass


def _load_config_file(path: str | None, allowed: set[str]) -> dict:
    if path is None:
        return {}
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(obj, dict):
        raise CliError("config file must hold a JSON object")
    unknown = set(obj) - allowed
    if unknown:
        raise CliError(f"unknown config keys: {sorted(unknown)}")
    return obj


def _effective(args: argparse.Namespace, file_cfg: dict, key: str, default):
    flag = getattr(args, key.replace("-", "_"))
    if flag is not None:
        return flag
    if key in file_cfg:
        return file_cfg[key]
    return default


def _write_sidecar(csv_path: Path, version: str, config: dict) -> None:
    meta = {"version": version, "config": config}
    csv_path.with_suffix(csv_path.suffix + ".meta.json").write_text(
        json.dumps(meta, indent=2), encoding="utf-8"
    )


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2), encoding="utf-8")


def cmd_simulate(args: argparse.Namespace) -> int:
    allowed = {"scenario", "n", "d", "seed", "lognormal_scale", "raw_lognormal"}
    cfg = _load_config_file(args.config, allowed)
    scenario = _effective(args, cfg, "scenario", "normal")
    spec = ScenarioSpec(
        scenario=Scenario(scenario),
        n=int(_effective(args, cfg, "n", 6000)),
        d=int(_effective(args, cfg, "d", 10)),
        seed=int(_effective(args, cfg, "seed", 0)),
        lognormal_scale=float(
            _effective(args, cfg, "lognormal_scale", ScenarioSpec.lognormal_scale)
        ),
        raw_lognormal=bool(_effective(args, cfg, "raw_lognormal", False)),
    )
    ds = generate(spec)
    out = Path(args.out)
    write_csv(ds, out)
    config = {
        "scenario": spec.scenario.value,
        "n": spec.n,
        "d": spec.d,
        "seed": spec.seed,
        "lognormal_scale": spec.lognormal_scale,
        "raw_lognormal": spec.raw_lognormal,
    }
    _write_sidecar(out, DATASET_VERSION, config)
    print(f"wrote {ds.n} rows x {ds.d} features to {out}")
    return 0


_FIT_KEYS = {
    "model",
    "target_column",
    "epochs",
    "batch_size",
    "learning_rate",
    "sigma",
    "temperature",
    "seed",
    "calibration_fraction",
    "rank_weights_full_set",
}


def cmd_fit(args: argparse.Namespace) -> int:
    cfg = _load_config_file(args.config, _FIT_KEYS)
    model_name = _effective(args, cfg, "model", None)
    if model_name not in VARIANTS:
        raise CliError(f"--model must be one of {sorted(VARIANTS)}")
    target_column = _effective(args, cfg, "target_column", TARGET_COLUMN)
    config = {
        "model": model_name,
        "data": str(args.data),
        "target_column": target_column,
        "epochs": int(_effective(args, cfg, "epochs", 200)),
        "batch_size": int(_effective(args, cfg, "batch_size", 256)),
        "learning_rate": float(_effective(args, cfg, "learning_rate", 1e-3)),
        "sigma": float(_effective(args, cfg, "sigma", 1.0)),
        "temperature": float(_effective(args, cfg, "temperature", 0.1)),
        "seed": int(_effective(args, cfg, "seed", 0)),
        "calibration_fraction": _effective(args, cfg, "calibration_fraction", None),
        "rank_weights_full_set": bool(
            _effective(args, cfg, "rank_weights_full_set", False)
        ),
    }
    ds = load_csv(args.data, target_column)
    train_cfg = TrainConfig(
        epochs=config["epochs"],
        batch_size=config["batch_size"],
        seed=config["seed"],
        loss=variant_loss_spec(
            model_name, sigma=config["sigma"], temperature=config["temperature"]
        ),
        adam=AdamHyper(learning_rate=config["learning_rate"]),
        rank_weights_full_set=config["rank_weights_full_set"],
    )
    if model_name == "nn-mse" and config["calibration_fraction"] is not None:
        raise CliError("calibration_fraction applies only to ranking variants")
    if model_name == "nn-mse":
        model = fit_variant(model_name, ds, train_cfg)
    else:
        model = cairo_fit(
            ds,
            train_cfg.loss,
            train_cfg,
            calibration_fraction=config["calibration_fraction"],
        )
    save_model(model, args.out, config)
    if args.emit_plot_data is not None:
        _emit_plot_data(model, ds, Path(args.emit_plot_data), config)
    print(f"fitted {VARIANTS[model_name]} on {ds.n} rows; model at {args.out}")
    return 0


def _emit_plot_data(model, ds, path: Path, config: dict) -> None:
    """Training-point sets for score/target, score/calibrated, and fit/target plots."""
    if isinstance(model, CairoModel):
        scores, _ = forward(model.scorer, model.standardizer.transform(ds.features))
        calibrated = calibration_predict(model.calibration, scores)
    else:
        scores = predict_model(model, ds.features)
        calibrated = scores
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["score", "target", "calibrated"])
        for s, y, c in zip(scores, ds.targets, calibrated):
            writer.writerow([f"{s:.17g}", f"{y:.17g}", f"{c:.17g}"])
    _write_sidecar(path, "cairo-plot-data-v1", config)


def _load_feature_matrix(path: str, target_column: str) -> np.ndarray:
    header, parsed = read_numeric_csv(path)
    drop = {target_column, TRUE_MEAN_COLUMN}
    keep = [j for j, name in enumerate(header) if name not in drop]
    return parsed[:, keep]


def cmd_predict(args: argparse.Namespace) -> int:
    cfg = _load_config_file(args.config, {"target_column"})
    target_column = _effective(args, cfg, "target_column", TARGET_COLUMN)
    model = load_model(args.model)
    X = _load_feature_matrix(args.data, target_column)
    expected = model.scorer.dims[0]
    if X.shape[1] != expected:
        raise CliError(
            f"dimension mismatch: model expects {expected} features, data has {X.shape[1]}"
        )
    yhat = predict_model(model, X)
    out = Path(args.out)
    with out.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["prediction"])
        for v in yhat:
            writer.writerow([f"{v:.17g}"])
    config = {"model": str(args.model), "data": str(args.data), "target_column": target_column}
    _write_sidecar(out, PREDICTIONS_VERSION, config)
    print(f"wrote {yhat.size} predictions to {out}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = _load_config_file(args.config, {"target_column"})
    target_column = _effective(args, cfg, "target_column", TARGET_COLUMN)
    if (args.model is None) == (args.pred is None):
        raise CliError("provide exactly one of --model or --pred")
    ds = load_csv(args.data, target_column)
    if args.model is not None:
        model = load_model(args.model)
        expected = model.scorer.dims[0]
        if ds.d != expected:
            raise CliError(
                f"dimension mismatch: model expects {expected} features, data has {ds.d}"
            )
        yhat = predict_model(model, ds.features)
        model_label = str(args.model)
    else:
        header, parsed = read_numeric_csv(args.pred)
        if "prediction" not in header:
            raise CliError(f"missing 'prediction' column in {args.pred}")
        yhat = parsed[:, header.index("prediction")]
        if yhat.size != ds.n:
            raise CliError(
                f"row mismatch: {yhat.size} predictions vs {ds.n} data rows"
            )
        model_label = str(args.pred)
    config = {
        "data": str(args.data),
        "target_column": target_column,
        "model": args.model and str(args.model),
        "pred": args.pred and str(args.pred),
    }
    payload = {
        "version": EVAL_VERSION,
        "config": config,
        "model": model_label,
        "spearman": spearman(ds.targets, yhat),
        "kendall": kendall(ds.targets, yhat),
        "rmse": rmse(ds.targets, yhat),
    }
    if ds.true_mean is not None:
        payload["rmse_vs_true_mean"] = rmse(ds.true_mean, yhat)
    _write_json(Path(args.out), payload)
    print(
        f"spearman={payload['spearman']:.4f} kendall={payload['kendall']:.4f} "
        f"rmse={payload['rmse']:.4f}"
    )
    return 0


_BENCH_KEYS = {
    "scenarios",
    "models",
    "n",
    "d",
    "repetitions",
    "base_seed",
    "train_fraction",
    "epochs",
    "batch_size",
    "learning_rate",
    "sigma",
    "temperature",
    "overrides",
}


def cmd_bench(args: argparse.Namespace) -> int:
    cfg_file = _load_config_file(args.config, _BENCH_KEYS)
    scenarios = _effective(args, cfg_file, "scenarios", "normal,gamma,heavy")
    if isinstance(scenarios, str):
        scenarios = [s for s in scenarios.split(",") if s]
    models = _effective(args, cfg_file, "models", ",".join(VARIANTS))
    if isinstance(models, str):
        models = [m for m in models.split(",") if m]
    cfg = BenchConfig(
        scenarios=tuple(Scenario(s) for s in scenarios),
        models=tuple(models),
        n=int(_effective(args, cfg_file, "n", 6000)),
        d=int(_effective(args, cfg_file, "d", 10)),
        repetitions=int(_effective(args, cfg_file, "repetitions", 5)),
        base_seed=int(_effective(args, cfg_file, "base_seed", 0)),
        train_fraction=float(_effective(args, cfg_file, "train_fraction", 0.7)),
        epochs=int(_effective(args, cfg_file, "epochs", 200)),
        batch_size=int(_effective(args, cfg_file, "batch_size", 256)),
        learning_rate=float(_effective(args, cfg_file, "learning_rate", 1e-3)),
        sigma=float(_effective(args, cfg_file, "sigma", 1.0)),
        temperature=float(_effective(args, cfg_file, "temperature", 0.1)),
        overrides=cfg_file.get("overrides", {}),
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    result = run_bench(cfg, max_workers=args.threads)
    write_results_json(result, out_dir / "results.json")
    write_table_csv(result, out_dir / "table1.csv")
    _write_sidecar(out_dir / "table1.csv", "cairo-bench-v1", config_to_dict(cfg))
    print(f"bench complete: {len(result.raw)} model-repetitions; results in {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cairo",
        description="Rank-then-calibrate regression: simulate, fit, predict, eval, bench.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic dataset CSV")
    p.add_argument("--scenario", choices=[s.value for s in Scenario], default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--lognormal-scale", type=float, default=None)
    p.add_argument("--raw-lognormal", action="store_true", default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit a model variant on a CSV dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--model", choices=sorted(VARIANTS), default=None)
    p.add_argument("--target-column", default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--learning-rate", type=float, default=None)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--temperature", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--calibration-fraction", type=float, default=None)
    p.add_argument("--rank-weights-full-set", action="store_true", default=None)
    p.add_argument("--emit-plot-data", default=None, metavar="CSV")
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="apply a fitted model to a feature CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--target-column", default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="evaluate a model or a predictions file")
    p.add_argument("--data", required=True)
    p.add_argument("--model", default=None)
    p.add_argument("--pred", default=None)
    p.add_argument("--target-column", default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="run the synthetic comparison harness")
    p.add_argument("--scenarios", default=None, help="comma-separated subset of normal,gamma,heavy")
    p.add_argument("--models", default=None, help=f"comma-separated subset of {','.join(VARIANTS)}")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--repetitions", type=int, default=None)
    p.add_argument("--base-seed", type=int, default=None)
    p.add_argument("--train-fraction", type=float, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--learning-rate", type=float, default=None)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--temperature", type=float, default=None)
    p.add_argument("--threads", type=int, default=None, help="overrides CAIRO_THREADS")
    p.add_argument("--config", default=None)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # runtime failures exit 1; usage errors exit 2 via argparse
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
