"""Two-stage fit/predict plus the same-architecture MSE baseline.

cairo_fit standardizes features, trains the scorer on a ranking loss
against raw targets, then fits the monotone calibration map on the
training scores. Targets are never standardized on the ranking path: the
calibration stage restores their scale. The baseline standardizes targets
during training and undoes that at prediction time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .data import Dataset, SplitSpec, Standardizer, apply_standardizer, fit_standardizer, split
from .isotonic import (
    CalibrationMap,
    calibration_from_dict,
    calibration_to_dict,
    pav_fit,
)
from .isotonic import predict as calibration_predict
from .losses import (
    LossSpec,
    PairwiseSurrogate,
    PointwiseMse,
    SoftGini,
    WeightVariant,
    is_ranking_loss,
)
from .scorer import MlpParams, TrainConfig, forward, mlp_from_dict, mlp_to_dict, train

BUNDLE_VERSION = "cairo-model-v1"

# CLI variant flag -> display name used in reports
VARIANTS = {
    "ranknet": "CAIRO-RankNet",
    "ranknet-giniw": "CAIRO-RankNet-GiniW",
    "gininet-softrank": "CAIRO-GiniNet-SoftRank",
    "nn-mse": "NN-MSE",
}


def variant_loss_spec(variant: str, sigma: float = 1.0, temperature: float = 0.1) -> LossSpec:
    if variant == "ranknet":
        return PairwiseSurrogate(WeightVariant.UNIFORM, sigma)
    if variant == "ranknet-giniw":
        return PairwiseSurrogate(WeightVariant.ABSOLUTE_GAP, sigma)
    if variant == "gininet-softrank":
        return SoftGini(temperature)
    if variant == "nn-mse":
        return PointwiseMse()
    raise ValueError(f"unknown model variant: {variant!r} (choose from {sorted(VARIANTS)})")


@dataclass(frozen=True)
class CairoModel:
    scorer: MlpParams
    calibration: CalibrationMap
    standardizer: Standardizer
    spec: LossSpec


@dataclass(frozen=True)
class MseBaselineModel:
    scorer: MlpParams
    standardizer: Standardizer
    target_mean: float
    target_std: float


def cairo_fit(
    train_ds: Dataset,
    loss: LossSpec,
    cfg: TrainConfig,
    calibration_fraction: float | None = None,
) -> CairoModel:
    """Stage 1 (rank scorer) then Stage 2 (isotonic scale recovery).

    Calibration reuses the full training set by default; pass
    calibration_fraction to fit it on a held-out slice instead.
    """
    if not is_ranking_loss(loss):
        raise ValueError("cairo_fit needs a ranking objective; use mse_fit for the baseline")
    st = fit_standardizer(train_ds)
    std_train = apply_standardizer(st, train_ds)

    if calibration_fraction is None:
        scorer_ds, calib_ds = std_train, std_train
    else:
        scorer_ds, calib_ds = split(
            std_train, SplitSpec(train_fraction=1.0 - calibration_fraction, seed=cfg.seed)
        )

    params, _ = train(scorer_ds, replace(cfg, loss=loss))
    scores, _ = forward(params, calib_ds.features)
    calibration = pav_fit(scores, calib_ds.targets)
    return CairoModel(scorer=params, calibration=calibration, standardizer=st, spec=loss)


def cairo_predict(model: CairoModel, X: np.ndarray) -> np.ndarray:
    scores, _ = forward(model.scorer, model.standardizer.transform(X))
    return calibration_predict(model.calibration, scores)


def mse_fit(train_ds: Dataset, cfg: TrainConfig) -> MseBaselineModel:
    """Identical architecture and loop, squared error on standardized targets."""
    st = fit_standardizer(train_ds)
    y_mean = float(train_ds.targets.mean())
    y_std = float(train_ds.targets.std()) or 1.0
    std_train = Dataset(
        features=st.transform(train_ds.features),
        targets=(train_ds.targets - y_mean) / y_std,
        feature_names=list(train_ds.feature_names),
    )
    params, _ = train(std_train, replace(cfg, loss=PointwiseMse()))
    return MseBaselineModel(
        scorer=params, standardizer=st, target_mean=y_mean, target_std=y_std
    )


def mse_predict(model: MseBaselineModel, X: np.ndarray) -> np.ndarray:
    scores, _ = forward(model.scorer, model.standardizer.transform(X))
    return scores * model.target_std + model.target_mean


Model = CairoModel | MseBaselineModel


def fit_variant(variant: str, train_ds: Dataset, cfg: TrainConfig) -> Model:
    """Fit one named variant; cfg.loss must match the variant's objective."""
    if variant == "nn-mse":
        return mse_fit(train_ds, cfg)
    if variant not in VARIANTS:
        raise ValueError(f"unknown model variant: {variant!r}")
    return cairo_fit(train_ds, cfg.loss, cfg)


def predict_model(model: Model, X: np.ndarray) -> np.ndarray:
    if isinstance(model, CairoModel):
        return cairo_predict(model, X)
    return mse_predict(model, X)


def _loss_to_dict(spec: LossSpec) -> dict:
    if isinstance(spec, PairwiseSurrogate):
        return {
            "objective": "pairwise-surrogate",
            "variant": spec.variant.value,
            "sigma": spec.sigma,
        }
    if isinstance(spec, SoftGini):
        return {"objective": "soft-gini", "temperature": spec.temperature}
    return {"objective": "pointwise-mse"}


def _loss_from_dict(obj: dict) -> LossSpec:
    kind = obj.get("objective")
    if kind == "pairwise-surrogate":
        return PairwiseSurrogate(WeightVariant(obj["variant"]), float(obj["sigma"]))
    if kind == "soft-gini":
        return SoftGini(float(obj["temperature"]))
    if kind == "pointwise-mse":
        return PointwiseMse()
    raise ValueError(f"unknown loss objective: {kind!r}")


def model_to_dict(model: Model, config: dict | None = None) -> dict:
    st = model.standardizer
    out = {
        "version": BUNDLE_VERSION,
        "config": config or {},
        "scorer": mlp_to_dict(model.scorer),
        "standardizer": {"mean": st.mean.tolist(), "std": st.std.tolist()},
    }
    if isinstance(model, CairoModel):
        out["kind"] = "cairo"
        out["calibration"] = calibration_to_dict(model.calibration)
        out["loss"] = _loss_to_dict(model.spec)
    else:
        out["kind"] = "nn-mse"
        out["target_mean"] = model.target_mean
        out["target_std"] = model.target_std
    return out


def model_from_dict(obj: dict) -> Model:
    if obj.get("version") != BUNDLE_VERSION:
        raise ValueError(f"unsupported model version: {obj.get('version')!r}")
    st = Standardizer(
        mean=np.asarray(obj["standardizer"]["mean"], dtype=np.float64),
        std=np.asarray(obj["standardizer"]["std"], dtype=np.float64),
    )
    params = mlp_from_dict(obj["scorer"])
    if obj.get("kind") == "cairo":
        return CairoModel(
            scorer=params,
            calibration=calibration_from_dict(obj["calibration"]),
            standardizer=st,
            spec=_loss_from_dict(obj["loss"]),
        )
    if obj.get("kind") == "nn-mse":
        return MseBaselineModel(
            scorer=params,
            standardizer=st,
            target_mean=float(obj["target_mean"]),
            target_std=float(obj["target_std"]),
        )
    raise ValueError(f"unknown model kind: {obj.get('kind')!r}")


def save_model(model: Model, path: str | Path, config: dict | None = None) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model, config)), encoding="utf-8")


def load_model(path: str | Path) -> Model:
    return model_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
