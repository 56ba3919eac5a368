"""Hierarchical Kriging: the lower-fidelity Kriging mean is the trend of the next level.

Each level is an ordinary :class:`~hkrig.gp.KrigingModel` whose trend is
``TrendSpec.external(previous_level)``, so prediction is plain universal
Kriging with f(x) replaced by the lower-level posterior mean.  The lower
level's predictive variance is not propagated.
"""

from __future__ import annotations

from dataclasses import dataclass


from .data import Dataset
from .errors import ShapeError
from .gp import Estimation, KrigingModel, Prediction, fit
from .kernels import CorrelationSpec
from .optimize import OptimizerSpec
from .trend import TrendKind, TrendSpec


@dataclass(frozen=True, eq=False)
class HierarchicalModel:
    """Chain of fitted levels, lowest fidelity first."""

    levels: tuple

    def __post_init__(self):
        levels = tuple(self.levels)
        if not levels:
            raise ValueError("a hierarchical model needs at least one level")
        for lower, upper in zip(levels, levels[1:]):
            if upper.trend.kind is not TrendKind.EXTERNAL or upper.trend.predictor is not lower:
                raise ValueError("each level must use the level below as its trend")
        object.__setattr__(self, "levels", levels)

    @property
    def top(self) -> KrigingModel:
        return self.levels[-1]

    @property
    def d(self) -> int:
        return self.top.d

    @property
    def beta_scale(self) -> float:
        """Scaling factor applied to the lower-level mean at the top level."""
        if len(self.levels) < 2:
            raise ValueError("single-level model has no scaling factor")
        return float(self.top.beta[-1])

    @property
    def beta_scales(self) -> list:
        return [float(m.beta[-1]) for m in self.levels[1:]]

    def predict(self, x) -> Prediction:
        return self.top.predict(x)

    @classmethod
    def from_top(cls, model: KrigingModel) -> "HierarchicalModel":
        """Recover the level chain by following external-predictor trends down."""
        levels = [model]
        while levels[-1].trend.kind is TrendKind.EXTERNAL:
            levels.append(levels[-1].trend.predictor)
        return cls(tuple(reversed(levels)))


def _top(model) -> KrigingModel:
    return model.top if isinstance(model, HierarchicalModel) else model


def fit_hierarchical(lf_model, hf_data: Dataset, spec: CorrelationSpec | None = None,
                     estimation=Estimation.MLE, optimizer: OptimizerSpec | None = None,
                     seed: int = 0, intercept: bool = False) -> HierarchicalModel:
    """Fit the next fidelity level on ``hf_data`` with ``lf_model``'s mean as trend.

    ``lf_model`` may be a single :class:`KrigingModel` or a
    :class:`HierarchicalModel`; the new level is appended to its chain.  The
    kernel ``spec`` may differ from the one used below.
    """
    lower = _top(lf_model)
    if hf_data.d != lower.d:
        raise ShapeError(
            f"high-fidelity data has d={hf_data.d} but the lower level has d={lower.d}"
        )
    trend = TrendSpec.external(lower, intercept=intercept)
    upper = fit(hf_data, spec or lower.spec, trend, estimation, optimizer, seed)
    chain = lf_model.levels if isinstance(lf_model, HierarchicalModel) else (lower,)
    return HierarchicalModel(tuple(chain) + (upper,))


def fit_multilevel(datasets, spec: CorrelationSpec | None = None, trend: TrendSpec | None = None,
                   estimation=Estimation.MLE, optimizer: OptimizerSpec | None = None,
                   seed: int = 0) -> HierarchicalModel:
    """Fit s >= 1 levels in order of increasing fidelity.

    ``spec`` may be one CorrelationSpec or a list with one per level.
    ``trend`` applies to the lowest level only.
    """
    datasets = list(datasets)
    specs = spec if isinstance(spec, (list, tuple)) else [spec] * len(datasets)
    if len(specs) != len(datasets):
        raise ValueError("need one correlation spec per level")
    model = HierarchicalModel((fit(datasets[0], specs[0], trend, estimation, optimizer, seed),))
    for level, (data, sp) in enumerate(zip(datasets[1:], specs[1:]), start=1):
        model = fit_hierarchical(model, data, sp, estimation, optimizer, seed + level)
    return model


def predict_hierarchical(model, x) -> Prediction:
    """Top-level posterior mean and variance; identical to ``model.top.predict``."""
    return _top(model).predict(x)
