"""Concrete tame problems and lattice samples of their graphs."""

from __future__ import annotations

import itertools
import math

import numpy as np

from . import _kernels
from .errors import ContractViolation, DomainError
from .checkers import Box, MultimapSample
from .graded import CanonicalMetric, SpaceConfig
from .solver import TameProblem


def make_diagonal(d: int, c: float = 1.0, space: SpaceConfig | None = None) -> TameProblem:
    """``f(x)_k = (1 + k)**-d x_k`` with exact right inverse ``R(x, v)_k = (1 + k)**d v_k``."""
    space = space or SpaceConfig()
    if d < 0 or d >= space.levels:
        raise ValueError(f"loss d={d} must lie in 0..{space.levels - 1}")
    k = np.arange(space.coeffs, dtype=np.float64)
    up = np.power(1.0 + k, d)
    down = 1.0 / up

    def f(x):
        return down * x

    def R(x, v):
        return up * v

    return TameProblem(f, R, float(c), int(d), space, name=f"diagonal(d={d})")


def identity_problem(space: SpaceConfig | None = None) -> TameProblem:
    P = make_diagonal(0, 1.0, space)
    P.name = "identity"
    return P


class SmoothingQuadratic:
    """``f(x) = x + lam * Q(x)`` with ``Q(x)_k = (1+k)**-2 sum_{i+j=k} x_i x_j`` (truncated at ``K``).

    ``f'(x) u = u + 2 lam L_x u`` where ``L_x u = Q-bilinear(x, u)``.  For each
    tracked level the weighted operator norm of ``L_x`` is computed exactly;
    when ``q(x) = 2 lam max_n ||L_x||_n <= contraction`` the Neumann series for
    the right inverse converges at every level and
    ``||R(x, v)||_n <= |v|_n / (1 - contraction)``, i.e. a tame bound with
    ``d = 0`` and ``c = 1 / (1 - contraction)``.
    """

    def __init__(self, lam: float, space: SpaceConfig | None = None, contraction: float = 0.5,
                 neumann_tol: float = 1e-10, max_depth: int = 500):
        if lam < 0:
            raise ValueError("lam must be non-negative")
        if not 0 < contraction < 1:
            raise ValueError("contraction must lie in (0, 1)")
        self.lam = float(lam)
        self.space = space or SpaceConfig()
        self.contraction = float(contraction)
        self.neumann_tol = neumann_tol
        self.max_depth = max_depth
        k = np.arange(self.space.coeffs, dtype=np.float64)
        self.decay = 1.0 / (1.0 + k) ** 2
        self.last_depth = 0

    @property
    def c(self):
        return 1.0 / (1.0 - self.contraction)

    def Q(self, x):
        return _kernels.active.conv_weighted(x, x, self.decay)

    def Qbilin(self, x, u):
        return _kernels.active.conv_weighted(x, u, self.decay)

    def spillover(self, x):
        """Largest coefficient of ``Q(x)`` discarded by the truncation at ``K``."""
        K = self.space.coeffs
        full = np.convolve(x, x)[K:]
        if full.size == 0:
            return 0.0
        kk = np.arange(K, K + full.size, dtype=np.float64)
        return float(np.max(np.abs(full) / (1.0 + kk) ** 2))

    def f(self, x):
        return x + self.lam * self.Q(x)

    def derivative(self, x, u):
        return u + 2.0 * self.lam * self.Qbilin(x, u)

    def operator_norms(self, x):
        """Weighted operator norm of ``u -> Qbilin(x, u)`` at every tracked level."""
        K = self.space.coeffs
        kk = np.arange(K)
        diff = kk[:, None] - kk[None, :]
        A = np.where(diff >= 0, np.abs(x)[np.clip(diff, 0, K - 1)], 0.0) * self.decay[:, None]
        w = self.space.weights
        return np.array([np.max((A * (w[n][:, None] / w[n][None, :])).sum(axis=1)) for n in range(self.space.levels)])

    def contraction_factor(self, x):
        return 2.0 * self.lam * float(np.max(self.operator_norms(x)))

    def R(self, x, v):
        q = self.contraction_factor(x)
        if q > self.contraction:
            raise DomainError(f"point outside the contraction region (q={q:.4g} > {self.contraction})")
        w = self.space.weights
        vs = _kernels.active.seminorms(v, w)
        tol = self.neumann_tol * vs
        u = v.copy()
        for depth in range(1, self.max_depth + 1):
            res = self.derivative(x, u) - v
            if np.all(_kernels.active.seminorms(res, w) <= tol):
                self.last_depth = depth
                return u
            u = v - 2.0 * self.lam * self.Qbilin(x, u)
        raise ContractViolation(f"Neumann series did not reach {self.neumann_tol} in {self.max_depth} terms")

    def problem(self) -> TameProblem:
        return TameProblem(
            self.f, self.R, self.c, 0, self.space, name=f"smoothing(lam={self.lam})",
            info={"lam": self.lam, "contraction": self.contraction, "neumann_tol": self.neumann_tol},
        )


def make_smoothing_quadratic(lam: float, space: SpaceConfig | None = None, **kw) -> TameProblem:
    return SmoothingQuadratic(lam, space, **kw).problem()


def fixed_point_solve(lam, y, space=None, tol=1e-15, max_iter=10_000):
    """Independent oracle for ``x + lam Q(x) = y``: iterate ``x <- y - lam Q(x)``.

    Uses a plain numpy convolution, not the kernels the problem oracles use.
    """
    y = np.asarray(y, dtype=np.float64)
    K = y.shape[0]
    decay = 1.0 / (1.0 + np.arange(K, dtype=np.float64)) ** 2
    x = y.copy()
    for it in range(max_iter):
        xn = y - lam * decay * np.convolve(x, x)[:K]
        if np.max(np.abs(xn - x)) <= tol * max(1.0, np.max(np.abs(xn))):
            return xn, it + 1
        x = xn
    raise RuntimeError("fixed-point iteration did not converge")


def problem_from_descriptor(desc: dict, space: SpaceConfig | None = None) -> TameProblem:
    """Build a problem from ``{"kind": "diagonal"|"smoothing"|"identity", "d", "c", "lambda"}``."""
    kind = desc.get("kind")
    if kind == "diagonal":
        return make_diagonal(int(desc.get("d", 0)), float(desc.get("c", 1.0)), space)
    if kind == "identity":
        return identity_problem(space)
    if kind == "smoothing":
        extra = {k: desc[k] for k in ("contraction", "neumann_tol") if k in desc}
        return make_smoothing_quadratic(float(desc.get("lambda", 0.0)), space, **extra)
    raise ValueError(f"unknown problem kind {kind!r}")


# --------------------------------------------------------------------------
# lattice samples
# --------------------------------------------------------------------------

def lattice_axis(lo, hi, pitch):
    n = int(math.floor((hi - lo) / pitch + 1e-9))
    return lo + pitch * np.arange(n + 1)


def sample_graph(problem: TameProblem, pitch: float, bounds=(-1.0, 1.0), coords=(0,), cap: int = 200_000,
                 U=None, V=None):
    """Lattice of ``x`` values over ``coords`` (zero elsewhere) paired with their images."""
    if pitch <= 0:
        raise ValueError("pitch must be positive")
    space = problem.space
    lo, hi = bounds
    axis = lattice_axis(lo, hi, pitch)
    count = axis.size ** len(coords)
    if count > cap:
        raise ValueError(f"lattice needs {count} samples, cap is {cap}")
    xs = np.zeros((count, space.coeffs))
    xs[:, list(coords)] = np.array(list(itertools.product(axis, repeat=len(coords))))
    ys = np.array([problem.f(x) for x in xs])
    U = U or Box.everything(space)
    V = V or Box.everything(space)
    step = np.zeros(space.coeffs)
    step[list(coords)] = pitch
    metric_y = CanonicalMetric(space, shift=problem.d)
    base = xs[:: max(1, count // 16)]
    resolution = max(metric_y.distance(problem.f(b + step), problem.f(b)) for b in base)
    lo_arr = np.full(len(coords), float(axis[0]))
    hi_arr = np.full(len(coords), float(axis[-1]))
    return MultimapSample(xs, ys, U, V, space, tuple(coords), resolution, problem.d, (lo_arr, hi_arr),
                          name=f"{problem.name} lattice pitch={pitch}")
