import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from nmekit import _kernels
from nmekit.graded import SpaceConfig

NB = _kernels.numba_kernels
NP = _kernels.numpy_kernels
pytestmark = pytest.mark.skipif(NB is None, reason="numba unavailable")

SPACE = SpaceConfig(levels=6, coeffs=12)
W, S = SPACE.weights, SPACE.scales
coeff = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
vec = arrays(np.float64, SPACE.coeffs, elements=coeff)
mat = st.integers(1, 5).flatmap(lambda m: arrays(np.float64, (m, SPACE.coeffs), elements=coeff))


@given(vec)
def test_seminorms_agree(x):
    np.testing.assert_array_equal(NB.seminorms(x, W), NP.seminorms(x, W))


@given(mat)
def test_batch_seminorms_agree(xs):
    np.testing.assert_array_equal(NB.batch_seminorms(xs, W), NP.batch_seminorms(xs, W))


@given(vec)
def test_rho_from_zero_agrees(z):
    assert NB.rho_from_zero(z, W, S) == pytest.approx(NP.rho_from_zero(z, W, S), rel=1e-15, abs=0)


@given(vec, mat)
def test_rho_to_many_and_nearest_agree(z, pts):
    np.testing.assert_allclose(NB.rho_to_many(z, pts, W, S), NP.rho_to_many(z, pts, W, S), rtol=1e-15)
    d1, i1 = NB.nearest_rho(pts, pts[::-1].copy(), W, S)
    d2, i2 = NP.nearest_rho(pts, pts[::-1].copy(), W, S)
    # indices may differ on ties, the distances may not
    np.testing.assert_allclose(d1, d2, rtol=1e-15)
    assert np.all(d1 == 0.0)


@given(vec, vec)
def test_conv_weighted_agrees(x, u):
    decay = 1.0 / (1.0 + np.arange(x.size)) ** 2
    np.testing.assert_allclose(NB.conv_weighted(x, u, decay), NP.conv_weighted(x, u, decay),
                               rtol=1e-12, atol=1e-9 * max(1.0, np.abs(x).max() * np.abs(u).max()))


def test_rho_to_many_empty():
    assert NB.rho_to_many(np.zeros(12), np.zeros((0, 12)), W, S).shape == (0,)
    assert NP.rho_to_many(np.zeros(12), np.zeros((0, 12)), W, S).shape == (0,)


@pytest.mark.parametrize("flag,expected", [("1", "numpy"), ("0", "numba"), ("", "numba"), ("yes", "numpy")])
def test_env_flag_selects_path(flag, expected):
    env = dict(os.environ, NMEKIT_DISABLE_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", "from nmekit import _kernels; print(_kernels.active.name)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == expected
