"""Hot numeric kernels.

Every kernel exists twice: a numba ``@njit`` version and a plain numpy
version with identical semantics.  The numba path is used when numba imports
and ``NMEKIT_DISABLE_NUMBA`` is unset (or ``0``); set the flag to ``1`` to force
the numpy path.  Both implementations stay importable as ``numpy_kernels`` and
``numba_kernels`` so tests and the benchmark can compare them directly.

Conventions shared by all kernels:

* ``weights`` is the ``(N, K)`` matrix ``w[n, k] = (1 + k) ** n``.
* ``scales`` is the length-``N`` vector ``2 ** -n`` used by the metric.
"""

import os
from types import SimpleNamespace

import numpy as np


def _env_disabled():
    return os.environ.get("NMEKIT_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")


# --------------------------------------------------------------------------
# numpy reference path
# --------------------------------------------------------------------------

def _np_seminorms(x, weights):
    return np.max(weights * np.abs(x)[None, :], axis=1)


def _np_batch_seminorms(xs, weights):
    # (M, K) -> (M, N)
    return np.max(np.abs(xs)[:, None, :] * weights[None, :, :], axis=2)


def _np_rho_from_zero(z, weights, scales):
    t = _np_seminorms(z, weights)
    return float(np.max(scales * t / (1.0 + t)))


def _np_rho_to_many(z, points, weights, scales):
    if points.shape[0] == 0:
        return np.empty(0)
    t = _np_batch_seminorms(points - z[None, :], weights)
    return np.max(scales[None, :] * t / (1.0 + t), axis=1)


def _np_nearest_rho(samples, points, weights, scales):
    out = np.empty(samples.shape[0])
    idx = np.empty(samples.shape[0], dtype=np.int64)
    for i in range(samples.shape[0]):
        d = _np_rho_to_many(samples[i], points, weights, scales)
        j = int(np.argmin(d))
        out[i] = d[j]
        idx[i] = j
    return out, idx


def _np_conv_weighted(x, u, decay):
    # out_k = decay_k * sum_{i+j=k} x_i u_j, truncated to len(x)
    k = x.shape[0]
    return decay * np.convolve(x, u)[:k]


numpy_kernels = SimpleNamespace(
    name="numpy",
    seminorms=_np_seminorms,
    batch_seminorms=_np_batch_seminorms,
    rho_from_zero=_np_rho_from_zero,
    rho_to_many=_np_rho_to_many,
    nearest_rho=_np_nearest_rho,
    conv_weighted=_np_conv_weighted,
)


# --------------------------------------------------------------------------
# numba path
# --------------------------------------------------------------------------

def _build_numba():
    from numba import njit

    @njit(cache=True)
    def seminorms(x, weights):
        n_lev, k_len = weights.shape
        out = np.zeros(n_lev)
        for n in range(n_lev):
            m = 0.0
            for k in range(k_len):
                v = weights[n, k] * abs(x[k])
                if v > m:
                    m = v
            out[n] = m
        return out

    @njit(cache=True)
    def batch_seminorms(xs, weights):
        n_lev, k_len = weights.shape
        out = np.zeros((xs.shape[0], n_lev))
        for i in range(xs.shape[0]):
            for n in range(n_lev):
                m = 0.0
                for k in range(k_len):
                    v = weights[n, k] * abs(xs[i, k])
                    if v > m:
                        m = v
                out[i, n] = m
        return out

    @njit(cache=True)
    def rho_from_zero(z, weights, scales):
        n_lev, k_len = weights.shape
        best = 0.0
        for n in range(n_lev):
            m = 0.0
            for k in range(k_len):
                v = weights[n, k] * abs(z[k])
                if v > m:
                    m = v
            r = scales[n] * m / (1.0 + m)
            if r > best:
                best = r
        return best

    @njit(cache=True)
    def _rho_pair(a, b, weights, scales):
        n_lev, k_len = weights.shape
        best = 0.0
        for n in range(n_lev):
            m = 0.0
            for k in range(k_len):
                v = weights[n, k] * abs(b[k] - a[k])
                if v > m:
                    m = v
            r = scales[n] * m / (1.0 + m)
            if r > best:
                best = r
        return best

    @njit(cache=True)
    def rho_to_many(z, points, weights, scales):
        out = np.empty(points.shape[0])
        for i in range(points.shape[0]):
            out[i] = _rho_pair(z, points[i], weights, scales)
        return out

    @njit(cache=True)
    def nearest_rho(samples, points, weights, scales):
        out = np.empty(samples.shape[0])
        idx = np.empty(samples.shape[0], dtype=np.int64)
        for i in range(samples.shape[0]):
            best = np.inf
            bj = 0
            for j in range(points.shape[0]):
                d = _rho_pair(samples[i], points[j], weights, scales)
                if d < best:
                    best = d
                    bj = j
            out[i] = best
            idx[i] = bj
        return out, idx

    @njit(cache=True)
    def conv_weighted(x, u, decay):
        k_len = x.shape[0]
        out = np.zeros(k_len)
        for k in range(k_len):
            acc = 0.0
            for i in range(k + 1):
                acc += x[i] * u[k - i]
            out[k] = decay[k] * acc
        return out

    return SimpleNamespace(
        name="numba",
        seminorms=seminorms,
        batch_seminorms=batch_seminorms,
        rho_from_zero=rho_from_zero,
        rho_to_many=rho_to_many,
        nearest_rho=nearest_rho,
        conv_weighted=conv_weighted,
    )


try:
    numba_kernels = _build_numba()
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba_kernels = None

active = numpy_kernels if (numba_kernels is None or _env_disabled()) else numba_kernels


def warmup(kern=None):
    """Trigger JIT compilation of every kernel on tiny inputs."""
    kern = kern or active
    w = np.ones((2, 3))
    s = np.ones(2)
    x = np.zeros(3)
    m = np.zeros((2, 3))
    kern.seminorms(x, w)
    kern.batch_seminorms(m, w)
    kern.rho_from_zero(x, w, s)
    kern.rho_to_many(x, m, w, s)
    kern.nearest_rho(m, m, w, s)
    kern.conv_weighted(x, x, x)
