"""Synthetic comparison harness: CAIRO variants vs the MSE baseline.

One repetition = generate a dataset (fresh weight vector per seed), split,
fit every requested model, evaluate on the held-out rows. Repetitions fork
their seeds as base_seed + rep, so serial and parallel execution produce
identical reports. RMSE is measured against observed targets (it includes
the irreducible noise); RMSE against the true conditional mean is carried
as an auxiliary diagnostic.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .data import SplitSpec, split
from .dgp import Scenario, ScenarioSpec, generate
from .metrics import AggregateReport, EvalReport, aggregate, kendall, rmse, spearman
from .pipeline import VARIANTS, fit_variant, predict_model, variant_loss_spec
from .scorer import AdamHyper, TrainConfig

RESULTS_VERSION = "cairo-bench-v1"

_OVERRIDE_KEYS = {"epochs", "batch_size", "learning_rate", "sigma", "temperature"}


class BenchError(RuntimeError):
    pass


@dataclass(frozen=True)
class BenchConfig:
    scenarios: tuple[Scenario, ...] = (
        Scenario.NORMAL,
        Scenario.GAMMA_TAIL,
        Scenario.HEAVY_TAIL,
    )
    models: tuple[str, ...] = ("ranknet", "ranknet-giniw", "gininet-softrank", "nn-mse")
    n: int = 6000
    d: int = 10
    repetitions: int = 5
    base_seed: int = 0
    train_fraction: float = 0.7
    epochs: int = 200
    batch_size: int = 256
    learning_rate: float = 1e-3
    sigma: float = 1.0
    temperature: float = 0.1
    # per-model overrides, e.g. {"nn-mse": {"epochs": 400}}
    overrides: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        unknown = set(self.models) - set(VARIANTS)
        if unknown:
            raise ValueError(f"unknown models: {sorted(unknown)}")
        for model, kv in self.overrides.items():
            if model not in VARIANTS:
                raise ValueError(f"override for unknown model: {model!r}")
            bad = set(kv) - _OVERRIDE_KEYS
            if bad:
                raise ValueError(f"unknown override keys for {model!r}: {sorted(bad)}")


@dataclass(frozen=True)
class RepetitionResult:
    scenario: str
    model: str  # display name
    rep: int
    report: EvalReport


@dataclass(frozen=True)
class BenchResult:
    config: BenchConfig
    raw: list[RepetitionResult]
    aggregates: list[tuple[str, AggregateReport]]  # (scenario, per-model aggregate)


def _train_config(cfg: BenchConfig, model: str, seed: int) -> TrainConfig:
    kv = dict(cfg.overrides.get(model, {}))
    epochs = int(kv.get("epochs", cfg.epochs))
    batch_size = int(kv.get("batch_size", cfg.batch_size))
    lr = float(kv.get("learning_rate", cfg.learning_rate))
    sigma = float(kv.get("sigma", cfg.sigma))
    temperature = float(kv.get("temperature", cfg.temperature))
    return TrainConfig(
        epochs=epochs,
        batch_size=batch_size,
        seed=seed,
        loss=variant_loss_spec(model, sigma=sigma, temperature=temperature),
        adam=AdamHyper(learning_rate=lr),
    )


def _run_repetition(cfg: BenchConfig, scenario: Scenario, rep: int) -> list[RepetitionResult]:
    seed = cfg.base_seed + rep
    ds = generate(ScenarioSpec(scenario=scenario, n=cfg.n, d=cfg.d, seed=seed))
    train_ds, test_ds = split(ds, SplitSpec(cfg.train_fraction, seed=seed))
    out = []
    for model_name in cfg.models:
        try:
            model = fit_variant(model_name, train_ds, _train_config(cfg, model_name, seed))
            yhat = predict_model(model, test_ds.features)
            report = EvalReport(
                model_name=VARIANTS[model_name],
                spearman=spearman(test_ds.targets, yhat),
                kendall=kendall(test_ds.targets, yhat),
                rmse=rmse(test_ds.targets, yhat),
                rmse_vs_true_mean=rmse(test_ds.true_mean, yhat),
            )
        except Exception as exc:
            raise BenchError(
                f"repetition failed: scenario={scenario.value} model={model_name} rep={rep}"
            ) from exc
        out.append(
            RepetitionResult(
                scenario=scenario.value, model=VARIANTS[model_name], rep=rep, report=report
            )
        )
    return out


def run_bench(cfg: BenchConfig, max_workers: int | None = None) -> BenchResult:
    """Run every (scenario, repetition), aggregate per (scenario, model).

    max_workers defaults to the CAIRO_THREADS environment variable (1 if
    unset). Workers receive forked seeds; results are ordered by task
    index, so the report is identical for any worker count.
    """
    if max_workers is None:
        max_workers = int(os.environ.get("CAIRO_THREADS", "1"))
    tasks = [(scenario, rep) for scenario in cfg.scenarios for rep in range(cfg.repetitions)]
    if max_workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(max_workers, len(tasks))) as pool:
            chunks = list(pool.map(_run_repetition, [cfg] * len(tasks), *zip(*tasks)))
    else:
        chunks = [_run_repetition(cfg, scenario, rep) for scenario, rep in tasks]

    raw = [r for chunk in chunks for r in chunk]
    aggregates = []
    for scenario in cfg.scenarios:
        for model_name in cfg.models:
            display = VARIANTS[model_name]
            reports = [
                r.report for r in raw if r.scenario == scenario.value and r.model == display
            ]
            if len(reports) >= 2:
                aggregates.append((scenario.value, aggregate(reports)))
    return BenchResult(config=cfg, raw=raw, aggregates=aggregates)


def config_to_dict(cfg: BenchConfig) -> dict:
    return {
        "scenarios": [s.value for s in cfg.scenarios],
        "models": list(cfg.models),
        "n": cfg.n,
        "d": cfg.d,
        "repetitions": cfg.repetitions,
        "base_seed": cfg.base_seed,
        "train_fraction": cfg.train_fraction,
        "epochs": cfg.epochs,
        "batch_size": cfg.batch_size,
        "learning_rate": cfg.learning_rate,
        "sigma": cfg.sigma,
        "temperature": cfg.temperature,
        "overrides": cfg.overrides,
    }


def result_to_dict(result: BenchResult) -> dict:
    def agg_entry(scenario: str, agg: AggregateReport) -> dict:
        entry = {
            "scenario": scenario,
            "model": agg.model_name,
            "repetitions": agg.repetitions,
            "spearman": {"mean": agg.spearman.mean, "ci95": agg.spearman.half_width},
            "kendall": {"mean": agg.kendall.mean, "ci95": agg.kendall.half_width},
            "rmse": {"mean": agg.rmse.mean, "ci95": agg.rmse.half_width},
        }
        if agg.rmse_vs_true_mean is not None:
            entry["rmse_vs_true_mean"] = {
                "mean": agg.rmse_vs_true_mean.mean,
                "ci95": agg.rmse_vs_true_mean.half_width,
            }
        return entry

    return {
        "version": RESULTS_VERSION,
        "config": config_to_dict(result.config),
        "raw": [
            {
                "scenario": r.scenario,
                "model": r.model,
                "rep": r.rep,
                "spearman": r.report.spearman,
                "kendall": r.report.kendall,
                "rmse": r.report.rmse,
                "rmse_vs_true_mean": r.report.rmse_vs_true_mean,
            }
            for r in result.raw
        ],
        "aggregates": [agg_entry(s, a) for s, a in result.aggregates],
    }


def write_results_json(result: BenchResult, path: str | Path) -> None:
    Path(path).write_text(json.dumps(result_to_dict(result), indent=2), encoding="utf-8")


def write_table_csv(result: BenchResult, path: str | Path) -> None:
    """Summary table: one row per (scenario, model) with mean +/- half-width."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "scenario",
                "model",
                "spearman",
                "spearman_ci95",
                "kendall",
                "kendall_ci95",
                "rmse",
                "rmse_ci95",
                "rmse_vs_true_mean",
                "rmse_vs_true_mean_ci95",
            ]
        )
        for scenario, agg in result.aggregates:
            vs = agg.rmse_vs_true_mean
            writer.writerow(
                [
                    scenario,
                    agg.model_name,
                    f"{agg.spearman.mean:.17g}",
                    f"{agg.spearman.half_width:.17g}",
                    f"{agg.kendall.mean:.17g}",
                    f"{agg.kendall.half_width:.17g}",
                    f"{agg.rmse.mean:.17g}",
                    f"{agg.rmse.half_width:.17g}",
                    "" if vs is None else f"{vs.mean:.17g}",
                    "" if vs is None else f"{vs.half_width:.17g}",
                ]
            )
