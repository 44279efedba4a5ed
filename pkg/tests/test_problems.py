import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nmekit import (
    DomainError,
    SmoothingQuadratic,
    SpaceConfig,
    fixed_point_solve,
    identity_problem,
    make_diagonal,
    make_smoothing_quadratic,
    problem_from_descriptor,
    sample_graph,
)
from nmekit.graded import CanonicalMetric
from nmekit.problems import lattice_axis

SP = SpaceConfig()
K = np.arange(64, dtype=np.float64)


def small_vector(rng, size):
    return size * rng.uniform(-1, 1, 64) * (1.0 + K) ** -11


def test_diagonal_oracles():
    P = make_diagonal(1, 1.0, SP)
    np.testing.assert_array_equal(P.f(SP.basis(1).coeffs), SP.basis(1, 0.5).coeffs)
    assert not P.f(np.zeros(64)).any()
    x = np.random.default_rng(0).normal(size=64)
    np.testing.assert_array_equal(P.R(x, SP.basis(1).coeffs), SP.basis(1, 2.0).coeffs)
    with pytest.raises(ValueError):
        make_diagonal(12, 1.0, SP)


def test_smoothing_hand_values():
    S = SmoothingQuadratic(0.3, SP)
    # Q(e_0)_0 = 1 and nothing else
    np.testing.assert_array_equal(S.Q(SP.basis(0).coeffs), SP.basis(0).coeffs)
    np.testing.assert_allclose(S.f(SP.basis(0).coeffs), SP.basis(0, 1.3).coeffs)
    # Q(e_1)_2 = 1 / 9
    q = S.Q(SP.basis(1).coeffs)
    assert q[2] == pytest.approx(1 / 9) and np.count_nonzero(q) == 1
    assert not S.f(np.zeros(64)).any()


def test_smoothing_lambda_zero_is_identity(rng):
    S = SmoothingQuadratic(0.0, SP)
    x, v = small_vector(rng, 1.0), small_vector(rng, 1.0)
    np.testing.assert_array_equal(S.f(x), x)
    np.testing.assert_array_equal(S.R(x, v), v)


def test_operator_norms_dominate_action(rng):
    S = SmoothingQuadratic(0.1, SP)
    x = small_vector(rng, 0.2)
    norms = S.operator_norms(x)
    W = SP.weights
    for _ in range(20):
        u = rng.normal(size=64) * (1.0 + K) ** -rng.uniform(0, 11)
        lu = S.Qbilin(x, u)
        for n in range(12):
            assert np.max(W[n] * np.abs(lu)) <= norms[n] * np.max(W[n] * np.abs(u)) * (1 + 1e-12)


def test_right_inverse_is_tame_and_exact(rng):
    S = SmoothingQuadratic(0.1, SP)
    P = S.problem()
    for _ in range(10):
        x, v = small_vector(rng, 0.1), small_vector(rng, 1.0)
        u = P.right_inverse(x, v)
        res = S.derivative(x, u) - v
        assert np.all(np.max(SP.weights * np.abs(res)[None, :], axis=1)
                      <= 1e-10 * np.max(SP.weights * np.abs(v)[None, :], axis=1) + 1e-300)
        assert S.last_depth >= 1


def test_domain_error_outside_contraction():
    S = SmoothingQuadratic(0.1, SP)
    with pytest.raises(DomainError):
        S.R(SP.basis(0, 10.0).coeffs, SP.basis(0).coeffs)


def test_spillover_reported():
    S = SmoothingQuadratic(0.1, SP)
    assert S.spillover(SP.basis(0).coeffs) == 0.0
    x = SP.basis(63).coeffs
    assert S.spillover(x) == pytest.approx(1.0 / (1 + 126) ** 2)


def test_fixed_point_oracle_matches_solver():
    from nmekit import solve_continuation, SolverParams
    from nmekit.io import preset_target

    y = preset_target("smoothing_small", SP)
    x_fp, _ = fixed_point_solve(0.1, y.coeffs)
    cert = solve_continuation(make_smoothing_quadratic(0.1, SP), y, SolverParams(eps=1e-3))
    assert CanonicalMetric(SP).distance(cert.x.coeffs, x_fp) <= 1e-6


def test_descriptors():
    assert problem_from_descriptor({"kind": "diagonal", "d": 2, "c": 3.0}, SP).d == 2
    assert problem_from_descriptor({"kind": "identity"}, SP).name == "identity"
    assert problem_from_descriptor({"kind": "smoothing", "lambda": 0.2}, SP).info["lam"] == 0.2
    with pytest.raises(ValueError):
        problem_from_descriptor({"kind": "cubic"}, SP)


def test_lattice_samples():
    F = sample_graph(identity_problem(SP), 0.5, coords=(0,))
    assert len(F) == 5
    np.testing.assert_allclose(lattice_axis(-1, 1, 0.5), [-1, -0.5, 0, 0.5, 1])
    G = sample_graph(make_diagonal(1, 1.0, SP), 0.5, coords=(0, 1))
    np.testing.assert_allclose(G.ys[:, 1], 0.5 * G.xs[:, 1])
    masked = G.without(G.xs[:, 0] > 0)
    assert len(masked) == len(G) - 10
    assert len(G.without(lambda x, y: y[1] < 0)) == len(G) - 10
    with pytest.raises(ValueError):
        sample_graph(identity_problem(SP), 1e-4, coords=(0, 1), cap=1000)


@given(st.integers(0, 2**32 - 1))
def test_f_of_zero_is_zero(seed):
    lam = float(np.random.default_rng(seed).uniform(0, 1))
    for P in (make_diagonal(seed % 5, 1.0, SP), make_smoothing_quadratic(lam, SP)):
        assert not P.f(np.zeros(64)).any()
