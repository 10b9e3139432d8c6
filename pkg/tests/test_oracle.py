import numpy as np
import pytest

from conftest import EXAMPLE1, random_joint
from mibound.dist import LN2, JointDist, MarginalX, marginal_x, mutual_information, product, validate_joint
from mibound.oracle import (
    DimensionGuard,
    OracleConfig,
    brute_force_bound,
    brute_force_inner,
    random_feasible,
)
from mibound.solver import InnerProblem, feasible_init, inner_minimize, is_feasible
from mibound.sweep import lower_bound


@pytest.fixture
def ex1():
    return validate_joint(EXAMPLE1)


def test_random_feasible_eps_zero(ex1):
    prob = InnerProblem(ex1, marginal_x(ex1), 0.0)
    for q in random_feasible(prob, 50, seed=3):
        np.testing.assert_allclose(q.values, ex1.values, atol=1e-15)


def test_random_feasible_contract(rng):
    for k in range(40):
        my = int(rng.integers(1, 8))
        p = JointDist(random_joint(rng, my, alpha=0.7))
        eps = float(rng.uniform(0, 2))
        shift = rng.uniform(-eps / 2, eps / 2)
        first = float(np.clip(marginal_x(p).values[0] + shift, 0, 1))
        prob = InnerProblem(p, MarginalX([first, 1 - first]), eps)
        for q in random_feasible(prob, 200, seed=k):
            assert is_feasible(q, prob, tol=0.0)


def test_random_feasible_deterministic(ex1):
    prob = InnerProblem(ex1, MarginalX([0.35, 0.65]), 0.3)
    a = random_feasible(prob, 30, seed=42)
    b = random_feasible(prob, 30, seed=42)
    assert all(np.array_equal(x.values, y.values) for x, y in zip(a, b))
    c = random_feasible(prob, 30, seed=43)
    assert not all(np.array_equal(x.values, y.values) for x, y in zip(a, c))


def test_random_feasible_reaches_sphere(ex1):
    prob = InnerProblem(ex1, marginal_x(ex1), 0.3)
    dists = [np.abs(q.values - ex1.values).sum() for q in random_feasible(prob, 200, seed=1)]
    assert max(dists) == pytest.approx(0.3, abs=1e-9)


def test_brute_inner_eps_zero(ex1):
    res = brute_force_inner(InnerProblem(ex1, marginal_x(ex1), 0.0))
    assert res.value.nats == pytest.approx(mutual_information(ex1).nats, abs=1e-12)


def test_brute_inner_example1_reference(ex1):
    prob = InnerProblem(ex1, marginal_x(ex1), 0.3)
    ref = brute_force_inner(prob, OracleConfig(resolution=1e-3))
    sol = inner_minimize(prob)
    assert abs(ref.value.bits - sol.value.bits) <= 1e-3
    assert ref.value.nats >= sol.value.nats - sol.gap - 1e-12
    assert 0 < ref.slack < LN2


def test_brute_inner_eps_two(rng):
    for _ in range(3):
        p = JointDist(random_joint(rng, 2))
        res = brute_force_inner(InnerProblem(p, MarginalX([0.4, 0.6]), 2.0))
        assert res.value.nats <= res.slack
        assert res.value.nats <= 1e-5


def test_dimension_guard(rng):
    p = JointDist(random_joint(rng, 4))
    with pytest.raises(DimensionGuard):
        brute_force_inner(InnerProblem(p, marginal_x(p), 0.1))
    with pytest.raises(DimensionGuard):
        brute_force_bound(p, 0.1)


def test_oracle_brackets_solver(rng):
    for k in range(12):
        my = 2 if k % 2 else 3
        p = JointDist(random_joint(rng, my))
        eps = float(rng.uniform(0.05, 0.8))
        shift = rng.uniform(-eps / 2, eps / 2)
        first = float(np.clip(marginal_x(p).values[0] + shift, 0, 1))
        prob = InnerProblem(p, MarginalX([first, 1 - first]), eps)
        ref = brute_force_inner(prob)
        sol = inner_minimize(prob)
        assert sol.value.nats - sol.gap - 1e-12 <= ref.value.nats <= sol.value.nats + ref.slack
        assert is_feasible(ref.argmin, prob)


def test_brute_bound_example1(ex1):
    ref = brute_force_bound(ex1, 0.3)
    rep = lower_bound(ex1, 0.3, 1000)
    assert abs(ref.value.bits - rep.bound.bits) <= 2e-3


def test_brute_bound_eps_zero(ex1):
    assert brute_force_bound(ex1, 0.0).value.nats == pytest.approx(mutual_information(ex1).nats, abs=1e-12)


def test_brute_bound_product():
    p = product([0.3, 0.7], [0.6, 0.4])
    assert brute_force_bound(p, 0.2, OracleConfig(resolution=1e-2)).value.nats == pytest.approx(0, abs=1e-15)


def test_oracle_config_validation():
    with pytest.raises(ValueError):
        OracleConfig(resolution=0.5)
    with pytest.raises(ValueError):
        OracleConfig(samples=0)
    assert OracleConfig().step_for(2) == 1e-3
    assert OracleConfig().step_for(3) == 5e-3
