import numpy as np
import pytest

from hkrig.errors import AllInfeasibleError
from hkrig.optimize import INFEASIBLE, Method, OptimizerSpec, minimize

import oracles

METHODS = list(Method)
HYBRIDS = [Method.HYBRID_GA, Method.HYBRID_DE]


def quad(x):
    return float((x[0] - 0.3) ** 2)


@pytest.mark.parametrize("method", METHODS)
def test_convex_quadratic(method):
    res = minimize(quad, [(0.0, 1.0)], OptimizerSpec(method, seed=3))
    assert abs(res.x_best[0] - 0.3) <= 1e-4
    assert res.f_best <= 1e-8


@pytest.mark.parametrize("method", METHODS)
def test_bound_active_optimum(method):
    res = minimize(lambda x: float((x[0] - 2.0) ** 2), [(0.0, 1.0)], OptimizerSpec(method))
    assert res.x_best[0] == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("method", METHODS)
def test_reported_value_is_reproducible(method):
    f = lambda x: float(np.sum((x - np.array([0.2, -0.7])) ** 2) + np.sin(3 * x[0]))
    res = minimize(f, [(-1, 1), (-1, 1)], OptimizerSpec(method, seed=9))
    assert res.f_best == pytest.approx(f(res.x_best), rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("method", HYBRIDS)
def test_rastrigin_success_rate(method):
    target = oracles.grid_minimum(oracles.rastrigin, -1.0, 1.0)
    hits = 0
    for seed in range(100):
        res = minimize(oracles.rastrigin, [(-1, 1), (-1, 1)], OptimizerSpec(method, seed=seed))
        hits += res.f_best <= target + 1e-3
    assert hits >= 95


@pytest.mark.parametrize("method", METHODS)
def test_determinism(method):
    spec = OptimizerSpec(method, seed=123)
    a = minimize(oracles.rastrigin, [(-1, 1), (-1, 1)], spec)
    b = minimize(oracles.rastrigin, [(-1, 1), (-1, 1)], spec)
    assert np.array_equal(a.x_best, b.x_best)
    assert a.f_best == b.f_best and a.evaluations == b.evaluations


@pytest.mark.parametrize("method", METHODS)
def test_every_probe_inside_bounds(method):
    lo, hi = np.array([-2.0, 0.5]), np.array([-1.0, 3.0])
    probes = []

    def f(x):
        probes.append(np.array(x, copy=True))
        return float(np.sum(x * x))

    res = minimize(f, list(zip(lo, hi)), OptimizerSpec(method, seed=1))
    P = np.array(probes)
    assert len(P) == res.evaluations
    assert np.all(P >= lo) and np.all(P <= hi)
    assert np.all(res.x_best >= lo) and np.all(res.x_best <= hi)


@pytest.mark.parametrize("method", HYBRIDS)
def test_refinement_never_worsens(method):
    for seed in range(10):
        res = minimize(oracles.rastrigin, [(-1, 1), (-1, 1)], OptimizerSpec(method, seed=seed))
        assert res.global_best is not None
        assert res.f_best <= res.global_best
        assert res.history and all(np.diff(res.history) <= 0)


@pytest.mark.parametrize("method", METHODS)
def test_all_infeasible(method):
    with pytest.raises(AllInfeasibleError):
        minimize(lambda x: np.inf, [(0, 1)], OptimizerSpec(method, max_generations=3))


def test_partially_infeasible_region():
    # left half of the box fails; optimum lies in the feasible right half
    def f(x):
        if x[0] < 0.5:
            raise ArithmeticError("not factorizable")
        return float((x[0] - 0.8) ** 2)

    for method in METHODS:
        res = minimize(f, [(0, 1)], OptimizerSpec(method))
        assert res.f_best < INFEASIBLE
        assert res.x_best[0] == pytest.approx(0.8, abs=1e-4)


def test_spec_validation():
    with pytest.raises(ValueError):
        OptimizerSpec(Method.HYBRID_DE, population=3)
    with pytest.raises(ValueError):
        OptimizerSpec(max_generations=0)
    assert OptimizerSpec().population_for(1) == 20
    assert OptimizerSpec().population_for(3) == 30


def test_bad_bounds():
    with pytest.raises(ValueError):
        minimize(quad, [(1.0, 0.0)])
