"""Box-constrained minimizers for hyperparameter objectives.

Three methods are offered:

* ``LocalGradient``: quasi-Newton (L-BFGS-B) with central finite-difference
  gradients.
* ``HybridGA``: real-coded genetic algorithm, then ``LocalGradient`` from the
  best individual.
* ``HybridDE``: self-adaptive differential evolution (each member carries its
  own mutation factor and crossover rate), then ``LocalGradient``.

Objectives signal failure (e.g. a correlation matrix that cannot be
factorized) by returning :data:`INFEASIBLE` or any non-finite value.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
from scipy.optimize import minimize as _scipy_minimize

from .errors import AllInfeasibleError

INFEASIBLE = 1e10
FD_STEP = 1e-6
STAGNATION_GENERATIONS = 10
DE_F_RANGE = (0.1, 0.9)
DE_RESAMPLE_PROB = 0.1
GA_MUTATION_PROB = 0.5
GA_IMMIGRANT_DIVISOR = 4  # a quarter of each generation is drawn afresh


class Method(str, Enum):
    LOCAL_GRADIENT = "LocalGradient"
    HYBRID_GA = "HybridGA"
    HYBRID_DE = "HybridDE"


@dataclass(frozen=True)
class OptimizerSpec:
    """Optimizer settings.  ``population=None`` means max(20, 10 * dim)."""

    method: Method = Method.HYBRID_DE
    population: int | None = None
    max_generations: int = 100
    max_local_iters: int = 200
    objective_tolerance: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if self.population is not None:
            if self.population < 1:
                raise ValueError("population must be positive")
            if self.method is Method.HYBRID_DE and self.population < 4:
                raise ValueError("differential evolution needs a population of at least 4")
        if self.max_generations < 1 or self.max_local_iters < 1:
            raise ValueError("iteration limits must be positive")
        if not self.objective_tolerance > 0:
            raise ValueError("objective_tolerance must be positive")

    def with_seed(self, seed: int) -> "OptimizerSpec":
        return replace(self, seed=int(seed))

    def population_for(self, dim: int) -> int:
        return self.population if self.population is not None else max(20, 10 * dim)


@dataclass
class OptimResult:
    x_best: np.ndarray
    f_best: float
    evaluations: int
    converged: bool
    global_best: float | None = None
    history: list = field(default_factory=list)


class _Counted:
    """Objective wrapper: counts calls, clips to bounds, maps failures."""

    def __init__(self, fun, lo, hi):
        self.fun, self.lo, self.hi = fun, lo, hi
        self.calls = 0

    def __call__(self, x):
        self.calls += 1
        x = np.clip(np.asarray(x, dtype=float), self.lo, self.hi)
        try:
            f = float(self.fun(x))
        except (ArithmeticError, np.linalg.LinAlgError):
            return INFEASIBLE
        if not np.isfinite(f) or f >= INFEASIBLE:
            return INFEASIBLE
        return f


def _feasible(f: float) -> bool:
    return f < INFEASIBLE


def _value_and_gradient(obj: _Counted, x):
    """Central differences, one-sided where a probe leaves the box or is infeasible."""
    f = obj(x)
    g = np.zeros(x.size)
    if not _feasible(f):
        return f, g
    for j in range(x.size):
        h = FD_STEP * max(1.0, abs(x[j]))
        fp = fm = INFEASIBLE
        if x[j] + h <= obj.hi[j]:
            xp = x.copy()
            xp[j] += h
            fp = obj(xp)
        if x[j] - h >= obj.lo[j]:
            xm = x.copy()
            xm[j] -= h
            fm = obj(xm)
        if _feasible(fp) and _feasible(fm):
            g[j] = (fp - fm) / (2.0 * h)
        elif _feasible(fp):
            g[j] = (fp - f) / h
        elif _feasible(fm):
            g[j] = (f - fm) / h
    return f, g


def _local(obj: _Counted, x0, spec: OptimizerSpec):
    """L-BFGS-B from x0; returns (x, f, converged).  Never worse than x0."""
    x0 = np.clip(np.asarray(x0, dtype=float), obj.lo, obj.hi)
    f0 = obj(x0)
    res = _scipy_minimize(
        lambda x: _value_and_gradient(obj, x), x0, method="L-BFGS-B", jac=True,
        bounds=list(zip(obj.lo, obj.hi)),
        options={"maxiter": spec.max_local_iters, "ftol": 1e-12, "gtol": 1e-8},
    )
    x = np.clip(res.x, obj.lo, obj.hi)
    f = obj(x)
    if f <= f0:
        return x, f, bool(res.success)
    return x0, f0, False


def _stagnated(history, fit, tol):
    """Best value flat for the window and the population itself converged."""
    if len(history) <= STAGNATION_GENERATIONS:
        return False
    old, new = history[-STAGNATION_GENERATIONS - 1], history[-1]
    scale = tol * max(1.0, abs(new))
    return old - new <= tol * max(1.0, abs(old)) and float(np.ptp(fit)) <= scale


def _genetic(obj: _Counted, spec: OptimizerSpec, rng):
    """Real-coded GA: tournament selection, blend crossover, Gaussian mutation."""
    lo, hi = obj.lo, obj.hi
    dim = lo.size
    span = hi - lo
    npop = spec.population_for(dim)
    pop = lo + span * rng.random((npop, dim))
    fit = np.array([obj(p) for p in pop])
    history = [float(fit.min())]
    n_elite = min(2, npop)
    n_immigrant = min(npop - n_elite, npop // GA_IMMIGRANT_DIVISOR)
    for _ in range(spec.max_generations):
        order = np.argsort(fit, kind="stable")
        children = [pop[i].copy() for i in order[:n_elite]]
        # fresh uniform samples keep the population from collapsing early
        children.extend(lo + span * rng.random((n_immigrant, dim)))
        while len(children) < npop:
            parents = []
            for _ in range(2):
                a, b = rng.integers(npop, size=2)
                parents.append(pop[a] if fit[a] <= fit[b] else pop[b])
            p1, p2 = parents
            if rng.random() < 0.9:
                # BLX-0.5
                cmin, cmax = np.minimum(p1, p2), np.maximum(p1, p2)
                ext = 0.5 * (cmax - cmin)
                child = cmin - ext + (cmax - cmin + 2 * ext) * rng.random(dim)
            else:
                child = p1.copy()
            mutate = rng.random(dim) < GA_MUTATION_PROB
            child = child + mutate * rng.normal(0.0, 0.1, dim) * span
            children.append(np.clip(child, lo, hi))
        pop = np.array(children)
        fit = np.array([obj(p) for p in pop])
        history.append(float(fit.min()))
        if _stagnated(history, fit, spec.objective_tolerance):
            break
    i = int(np.argmin(fit))
    return pop[i], float(fit[i]), history


def _bounce(trial, parent, lo, hi, rng):
    """Resample out-of-box coordinates between the parent and the violated bound."""
    u = rng.random(trial.size)
    trial = np.where(trial < lo, lo + u * (parent - lo), trial)
    trial = np.where(trial > hi, hi - u * (hi - parent), trial)
    return np.clip(trial, lo, hi)


def _self_adaptive_de(obj: _Counted, spec: OptimizerSpec, rng):
    """DE/rand/1/bin with per-member F and CR re-sampled with probability 0.1."""
    lo, hi = obj.lo, obj.hi
    dim = lo.size
    span = hi - lo
    npop = max(4, spec.population_for(dim))
    pop = lo + span * rng.random((npop, dim))
    fit = np.array([obj(p) for p in pop])
    F = DE_F_RANGE[0] + (DE_F_RANGE[1] - DE_F_RANGE[0]) * rng.random(npop)
    CR = rng.random(npop)
    history = [float(fit.min())]
    idx = np.arange(npop)
    for _ in range(spec.max_generations):
        for i in range(npop):
            Fi, CRi = F[i], CR[i]
            if rng.random() < DE_RESAMPLE_PROB:
                Fi = DE_F_RANGE[0] + (DE_F_RANGE[1] - DE_F_RANGE[0]) * rng.random()
            if rng.random() < DE_RESAMPLE_PROB:
                CRi = rng.random()
            a, b, c = rng.choice(idx[idx != i], size=3, replace=False)
            mutant = pop[a] + Fi * (pop[b] - pop[c])
            cross = rng.random(dim) < CRi
            cross[rng.integers(dim)] = True
            trial = _bounce(np.where(cross, mutant, pop[i]), pop[i], lo, hi, rng)
            ft = obj(trial)
            if ft <= fit[i]:
                pop[i], fit[i], F[i], CR[i] = trial, ft, Fi, CRi
        history.append(float(fit.min()))
        if _stagnated(history, fit, spec.objective_tolerance):
            break
    i = int(np.argmin(fit))
    return pop[i].copy(), float(fit[i]), history


def _feasible_start(obj: _Counted, x0, rng, tries=20):
    f0 = obj(x0)
    if _feasible(f0):
        return x0, f0
    best_x, best_f = x0, f0
    for _ in range(tries):
        x = obj.lo + (obj.hi - obj.lo) * rng.random(obj.lo.size)
        f = obj(x)
        if f < best_f:
            best_x, best_f = x, f
    return best_x, best_f


def minimize(objective, bounds, spec: OptimizerSpec | None = None, x0=None) -> OptimResult:
    """Minimize ``objective`` over the box ``bounds`` (sequence of (lo, hi)).

    ``x0`` is only used by ``LocalGradient``; it defaults to the box center.
    Results are deterministic given ``spec.seed``.
    """
    spec = spec or OptimizerSpec()
    bounds = np.asarray(bounds, dtype=float).reshape(-1, 2)
    lo, hi = bounds[:, 0].copy(), bounds[:, 1].copy()
    if np.any(~(lo < hi)):
        raise ValueError(f"each bound needs lo < hi, got {bounds.tolist()}")
    rng = np.random.default_rng(spec.seed)
    obj = _Counted(objective, lo, hi)

    if spec.method is Method.LOCAL_GRADIENT:
        start = 0.5 * (lo + hi) if x0 is None else np.asarray(x0, dtype=float)
        xs, fs = _feasible_start(obj, np.clip(start, lo, hi), rng)
        history, global_best = [], None
    elif spec.method is Method.HYBRID_GA:
        xs, fs, history = _genetic(obj, spec, rng)
        global_best = fs
    else:
        xs, fs, history = _self_adaptive_de(obj, spec, rng)
        global_best = fs

    if not _feasible(fs):
        raise AllInfeasibleError(
            f"objective infeasible at all {obj.calls} probed points"
        )
    x, f, converged = _local(obj, xs, spec)
    return OptimResult(x, f, obj.calls, converged, global_best, history)
