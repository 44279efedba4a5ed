import numpy as np
import pytest

from nmekit import (
    Box,
    SeminormProfile,
    SpaceConfig,
    check_openness,
    check_weak_pi_surjectivity,
    identity_problem,
    make_diagonal,
    sample_graph,
)
from nmekit.checkers import box_bounds
from nmekit.graded import CanonicalMetric

SP = SpaceConfig()
N = SP.levels
V = Box(np.zeros(SP.coeffs), SeminormProfile(2.0 ** np.arange(N)))
S03 = SeminormProfile(0.3 * 2.0 ** np.arange(N))


@pytest.fixture(scope="module")
def diag_sample():
    return sample_graph(make_diagonal(1, 1.0, SP), 0.05, coords=(0, 1), V=V)


@pytest.fixture(scope="module")
def ident_sample():
    return sample_graph(identity_problem(SP), 0.05, coords=(0, 1), V=V)


def test_box_bounds_and_margin():
    b = box_bounds(np.ones(N), SP.weights)
    assert b[0] == 1.0 and b[1] == 2.0 ** -(N - 1)
    U = Box(np.zeros(SP.coeffs), SeminormProfile(np.ones(N)))
    m = CanonicalMetric(SP)
    assert U.margin(np.zeros(SP.coeffs), m) == pytest.approx(min(
        max(2.0 ** -n * (t / (1 + t)) for n in range(N) for t in [(1 + k) ** n * b[k]]) for k in range(SP.coeffs)))
    outside = np.zeros(SP.coeffs)
    outside[0] = 2.0
    assert U.margin(outside, m) == 0.0
    assert Box.everything(SP).margin(np.zeros(SP.coeffs), m) == np.inf


def test_identity_weak_pi_matches_at_zero(ident_sample):
    rep = check_weak_pi_surjectivity(ident_sample, 1.0, SeminormProfile(0.1 * 2.0 ** np.arange(N)),
                                     rng=np.random.default_rng(1), delta=1e-12, probe_budget=0)
    # corners of the target box are lattice points, so they are hit up to lattice rounding
    assert rep.consistent and rep.worst <= 1e-12


def test_identity_openness_consistent(ident_sample):
    rep = check_openness(ident_sample, 1.0, rng=np.random.default_rng(2))
    assert rep.consistent and rep.worst <= ident_sample.resolution


def test_diagonal_weak_pi_at_kappa_one(diag_sample):
    rep = check_weak_pi_surjectivity(diag_sample, 1.0, S03, rng=np.random.default_rng(3))
    assert rep.consistent, rep.verdict
    assert rep.verdict.startswith("consistent at resolution")


def test_diagonal_weak_pi_fails_at_kappa_two(diag_sample):
    rep = check_weak_pi_surjectivity(diag_sample, 2.0, S03, rng=np.random.default_rng(3))
    assert not rep.consistent


def test_deleted_quadrant_reports_unmatched(diag_sample):
    holed = diag_sample.without(lambda x, y: y[0] > 0.2 and y[1] > 0.1)
    rep = check_weak_pi_surjectivity(holed, 1.0, S03, rng=np.random.default_rng(3), max_pairs=200)
    assert not rep.consistent and rep.unmatched
    assert rep.to_dict()["n_unmatched"] == len(rep.unmatched)


def test_openness_positive_and_negative(diag_sample):
    good = check_openness(diag_sample, 0.5, rng=np.random.default_rng(4))
    bad = check_openness(diag_sample, 10.0, rng=np.random.default_rng(4))
    assert good.consistent, good.verdict
    assert not bad.consistent and bad.worst > diag_sample.resolution


def test_vacuous_reports(diag_sample):
    tiny_u = Box(np.full(SP.coeffs, 5.0), SeminormProfile(np.full(N, 1e-6)))
    F = sample_graph(make_diagonal(1, 1.0, SP), 0.5, coords=(0,), U=tiny_u, V=V)
    assert check_weak_pi_surjectivity(F, 1.0, S03).vacuous
    assert check_openness(F, 0.5).verdict.startswith("vacuous")


def test_unbounded_target_ball_rejected():
    F = sample_graph(make_diagonal(1, 1.0, SP), 0.1, coords=(0,))
    with pytest.raises(ValueError):
        check_openness(F, 10.0)
