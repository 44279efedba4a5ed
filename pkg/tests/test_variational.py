import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nmekit import (
    ContractViolation,
    FiniteMetricSpace,
    OrbitIndeterminate,
    PremiseViolation,
    StepMap,
    ekeland_point,
    run_orbit,
    verify_orbit,
)
from nmekit.suites import brute_force_ekeland, line_metric, random_finite_space
from nmekit.variational import aitken_limit


# ---- finite metric spaces --------------------------------------------------

def test_space_validation():
    with pytest.raises(ValueError):
        FiniteMetricSpace([0, 1], [[0, 1], [2, 0]])
    with pytest.raises(ValueError):
        FiniteMetricSpace([0, 1], [[0, -1], [-1, 0]])
    with pytest.raises(ValueError):
        FiniteMetricSpace([0, 1], [[1, 1], [1, 1]])
    M = FiniteMetricSpace.from_coordinates([0.0, 1.0, 3.0], ids="abc")
    assert M.index("c") == 2
    assert M.triangle_defect() <= 0
    with pytest.raises(KeyError):
        M.index("z")


# ---- Ekeland ---------------------------------------------------------------

def test_ekeland_singleton():
    M = FiniteMetricSpace(["a"], [[0.0]])
    r = ekeland_point(M, [0.0], "a", 1.0, 1.0)
    assert r.x_hat == "a" and r.ok


def test_ekeland_line_example():
    M = FiniteMetricSpace.from_coordinates([0.0, 1.0, 2.0])
    r = ekeland_point(M, [3.0, 1.0, 0.0], 0, eps=3.0, lam=1.0)
    assert r.x_hat == 2
    assert r.slacks["i"] == 1.0  # 3 - 0 - 1*2
    assert r.slacks["ii"] == 1.0  # 3 - 2
    assert r.ok
    assert brute_force_ekeland(M.dist.tolist(), [3.0, 1.0, 0.0], 2, 0, 3.0, 1.0, 0.0) == {
        "i": True, "ii": True, "iii": True}


def test_ekeland_callable_and_infinite_values():
    M = FiniteMetricSpace.from_coordinates([0.0, 0.5, 1.0, 5.0])
    f = {0: 1.0, 1: 0.4, 2: np.inf, 3: 0.0}
    r = ekeland_point(M, lambda p: f[p], 1, eps=1.0, lam=1.0)
    assert r.ok and r.x_hat in (1, 3)


def test_ekeland_premise_errors():
    M = FiniteMetricSpace.from_coordinates([0.0, 1.0])
    with pytest.raises(PremiseViolation):
        ekeland_point(M, [10.0, 0.0], 0, eps=1.0, lam=1.0)
    with pytest.raises(PremiseViolation):
        ekeland_point(M, [np.inf, np.inf], 0, eps=1.0, lam=1.0)
    with pytest.raises(PremiseViolation):
        ekeland_point(M, [np.inf, 0.0], 0, eps=10.0, lam=10.0)
    with pytest.raises(PremiseViolation):
        ekeland_point(M, [-np.inf, 0.0], 1, eps=1.0, lam=1.0)
    with pytest.raises(ValueError):
        ekeland_point(M, [0.0, 0.0], 0, eps=0.0, lam=1.0)


@given(st.integers(0, 2**32 - 1))
def test_ekeland_random_against_brute_force(seed):
    rng = np.random.default_rng(seed)
    M = random_finite_space(rng, 60)
    v = rng.uniform(0, 5, size=len(M))
    eps, lam = float(rng.uniform(0.05, 2)), float(rng.uniform(0.1, 5))
    y = int(rng.choice(np.flatnonzero(v <= v.min() + eps * lam)))
    r = ekeland_point(M, v, y, eps, lam)
    assert all(brute_force_ekeland(M.dist.tolist(), v.tolist(), r.index, y, eps, lam, 1e-12).values())
    assert all(b < a for a, b in zip(r.path_values, r.path_values[1:]))


# ---- orbits ----------------------------------------------------------------

def grid_map():
    pts = [Fraction(i, 4) for i in range(5)]
    return StepMap(lambda x: [p for p in pts if p > x], lambda x: x != 1)


def test_orbit_grid_b1():
    S = grid_map()
    out = run_orbit(S, Fraction(0), line_metric)
    assert out.case == "B1"
    assert out.points == [0, Fraction(3, 4), 1]
    assert [st.s for st in out.steps] == [1.0, 0.25]
    assert verify_orbit(out, S, line_metric)


def test_orbit_empty_is_immediate_b1():
    S = StepMap(lambda x: [])
    out = run_orbit(S, 3.0, line_metric)
    assert out.case == "B1" and out.steps == [] and out.reason == "empty value"
    assert verify_orbit(out, S, line_metric)


def test_orbit_ray_a_after_100_steps():
    S = StepMap(lambda x: [x + 1], lambda x: True)
    out = run_orbit(S, 0, line_metric, div_threshold=100)
    assert out.case == "A" and len(out.steps) == 100 and out.length == 100.0
    assert verify_orbit(out, S, line_metric)


def test_orbit_geometric_b2_exact_limit():
    S = StepMap(lambda x: [x / 2], lambda x: x != 0)
    out = run_orbit(S, Fraction(1), line_metric)
    assert out.case == "B2" and len(out.steps) == 62
    assert out.limit == 0
    assert verify_orbit(out, S, line_metric)


def test_orbit_contract_violations():
    with pytest.raises(ContractViolation):
        run_orbit(StepMap(lambda x: [x, x + 1]), 0, line_metric)
    with pytest.raises(ContractViolation):
        run_orbit(StepMap(lambda x: [], lambda x: True), 0, line_metric)


def test_orbit_indeterminate_carries_trace():
    S = StepMap(lambda x: [x / 2], lambda x: True)  # converges inside the target set
    with pytest.raises(OrbitIndeterminate) as exc:
        run_orbit(S, Fraction(1), line_metric, budget=80)
    assert len(exc.value.trace.steps) == 80


def test_verify_detects_tampering():
    S = grid_map()
    out = run_orbit(S, Fraction(0), line_metric)
    bad = verify_orbit(type(out)(**{**out.__dict__, "case": "B2"}), S, line_metric)
    assert not bad and any("B2" in r for r in bad.reasons)
    steps = list(out.steps)
    steps[0] = type(steps[0])(Fraction(1, 8), 0.125, 1.0, 0, 4)
    assert not verify_orbit(type(out)(**{**out.__dict__, "steps": steps}), S, line_metric)


def test_orbit_json_trace():
    S = grid_map()
    d = json.loads(run_orbit(S, Fraction(0), line_metric).to_json())
    assert d["case"] == "B1"
    assert [r["point"] for r in d["trace"]] == ["0", "3/4", "1"]
    assert d["trace"][-1]["case"] == {"A": False, "B1": True, "B2": False}
    assert d["trace"][1]["s"] == 1.0


def test_aitken_limit():
    assert aitken_limit([Fraction(1), Fraction(1, 3), Fraction(1, 9)]) == 0
    assert aitken_limit([1.0]) == 1.0
    assert aitken_limit([1, 1, 1]) == 1
    np.testing.assert_allclose(aitken_limit([np.ones(2), 0.5 * np.ones(2), 0.25 * np.ones(2)]), 0.0)
    assert aitken_limit(["a", "b", "c"]) == "c"


@given(st.integers(1, 50), st.sampled_from([1, 2, 4, 8]))
def test_half_sup_rule_on_random_candidates(seed, m):
    rng = np.random.default_rng(seed)
    offsets = [float(v) for v in rng.uniform(0.01, 3.0, size=m)]
    S = StepMap(lambda x: [x + o for o in offsets], lambda x: True)
    out = run_orbit(S, 0.0, line_metric, div_threshold=20)
    assert out.case == "A"
    for st_ in out.steps:
        assert st_.length > st_.s / 2
    assert verify_orbit(out, S, line_metric)
