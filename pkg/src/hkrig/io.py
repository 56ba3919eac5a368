"""JSON model documents.

A document stores the training data, options and estimated correlation
lengths; loading rebuilds the factorization through the same code path as
fitting, so a reloaded model predicts bit-for-bit like the original.
External-predictor trends embed the lower-level document.
"""

from __future__ import annotations

import json

import numpy as np

from .data import Dataset, Transform
from .errors import SchemaError
from .gp import Estimation, KrigingModel
from .hierarchical import HierarchicalModel
from .kernels import CorrelationSpec
from .trend import TrendKind, TrendSpec

SCHEMA_VERSION = 1


def _trend_to_dict(trend: TrendSpec) -> dict:
    doc = {"kind": trend.kind.value}
    if trend.kind is TrendKind.POLYNOMIAL:
        doc["degree"] = trend.degree
    elif trend.kind is TrendKind.EXTERNAL:
        doc["intercept"] = trend.intercept
        doc["predictor"] = model_to_dict(trend.predictor)
    return doc


def _trend_from_dict(doc: dict) -> TrendSpec:
    kind = TrendKind(doc["kind"])
    if kind is TrendKind.ORDINARY:
        return TrendSpec.ordinary()
    if kind is TrendKind.POLYNOMIAL:
        return TrendSpec.polynomial(int(doc["degree"]))
    return TrendSpec.external(model_from_dict(doc["predictor"]), bool(doc["intercept"]))


def model_to_dict(model) -> dict:
    """Serialize a KrigingModel or HierarchicalModel (its top level)."""
    if isinstance(model, HierarchicalModel):
        model = model.top
    if not isinstance(model, KrigingModel):
        raise TypeError(f"cannot serialize {type(model).__name__}")
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "kriging",
        "correlation": model.spec.to_dict(),
        "trend": _trend_to_dict(model.trend),
        "estimation": model.estimation.value,
        "theta": [float(t) for t in model.theta],
        "transform": model.transform.to_dict(),
        "data": model.data.to_dict(),
        "info": model.info,
        # informational; recomputed on load
        "summary": {
            "beta": [float(b) for b in model.beta],
            "sigma2": float(model.sigma2),
            "sigma2_original": model.sigma2_original,
            "jitter": float(model.corr.jitter),
        },
    }


def model_from_dict(doc: dict):
    """Rebuild a model; returns a HierarchicalModel when the trend is external."""
    if doc.get("schema_version") != SCHEMA_VERSION or doc.get("kind") != "kriging":
        raise SchemaError(
            f"unsupported model document (schema_version={doc.get('schema_version')!r}, "
            f"kind={doc.get('kind')!r})"
        )
    trend = _trend_from_dict(doc["trend"])
    if trend.kind is TrendKind.EXTERNAL and isinstance(trend.predictor, HierarchicalModel):
        trend = TrendSpec.external(trend.predictor.top, trend.intercept)
    model = KrigingModel.assemble(
        Dataset.from_dict(doc["data"]),
        CorrelationSpec.from_dict(doc["correlation"]),
        trend,
        np.array(doc["theta"], dtype=float),
        Transform.from_dict(doc["transform"]),
        Estimation(doc["estimation"]),
        doc.get("info", {}),
    )
    if trend.kind is TrendKind.EXTERNAL:
        return HierarchicalModel.from_top(model)
    return model


def dumps(model) -> str:
    return json.dumps(model_to_dict(model), indent=2, sort_keys=True) + "\n"


def save_model(model, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(model))


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not a JSON model document ({exc})") from exc
    return model_from_dict(doc)
