"""Weighted sup-norm sequence space with a graded family of seminorms.

A point is a truncated coefficient sequence ``x = (x_0, ..., x_{K-1})`` and the
level-``n`` seminorm is ``max_k (1 + k)**n * |x_k|`` for ``n = 0, ..., N-1``.
Because each seminorm is a weighted max over coordinates, every box
``{x : ||x||_n <= s_n}`` is a product of symmetric intervals; most of the
routines below exploit that.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _kernels
from .errors import (
    DegenerateProfile,
    InvalidDirection,
    LevelOutOfRange,
    NetTooLarge,
    PremiseViolation,
    SpaceMismatch,
)

DEFAULT_LEVELS = 12
DEFAULT_COEFFS = 64
DEFAULT_SLACK = 1e-12
DEFAULT_NET_CAP = 200_000


@lru_cache(maxsize=32)
def _weights(levels, coeffs):
    n = np.arange(levels, dtype=np.float64)[:, None]
    k = np.arange(coeffs, dtype=np.float64)[None, :]
    w = np.power(1.0 + k, n)
    w.setflags(write=False)
    return w


@lru_cache(maxsize=32)
def _scales(levels):
    s = np.power(2.0, -np.arange(levels, dtype=np.float64))
    s.setflags(write=False)
    return s


def g(t):
    """The map ``t -> t / (1 + t)`` applied inside the metric."""
    return t / (1.0 + t)


def g_inv(a):
    """Inverse of :func:`g` on ``[0, 1)``; ``+inf`` for ``a >= 1``."""
    a = np.asarray(a, dtype=np.float64)
    with np.errstate(divide="ignore"):
        out = np.where(a < 1.0, a / np.maximum(1.0 - a, 1e-300), np.inf)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class SpaceConfig:
    """Truncation of the model space: ``levels`` seminorms, ``coeffs`` coordinates."""

    levels: int = DEFAULT_LEVELS
    coeffs: int = DEFAULT_COEFFS
    slack: float = DEFAULT_SLACK

    def __post_init__(self):
        if int(self.levels) < 1 or int(self.coeffs) < 1:
            raise ValueError("SpaceConfig needs levels >= 1 and coeffs >= 1")
        if self.slack < 0:
            raise ValueError("slack must be non-negative")
        object.__setattr__(self, "levels", int(self.levels))
        object.__setattr__(self, "coeffs", int(self.coeffs))

    @property
    def weights(self):
        return _weights(self.levels, self.coeffs)

    @property
    def scales(self):
        return _scales(self.levels)

    @property
    def tail_bound(self):
        """Upper bound on what the untracked levels could add to the metric."""
        return 2.0 ** -self.levels

    def vector(self, coeffs):
        return GradedVector(coeffs, self)

    def zeros(self):
        return GradedVector(np.zeros(self.coeffs), self)

    def basis(self, k, scale=1.0):
        c = np.zeros(self.coeffs)
        c[k] = scale
        return GradedVector(c, self)

    def profile(self, levels):
        s = SeminormProfile(levels)
        if len(s) != self.levels:
            raise SpaceMismatch(f"profile has {len(s)} levels, space has {self.levels}")
        return s

    def to_dict(self):
        return {"levels": self.levels, "coeffs": self.coeffs}


@dataclass(frozen=True, eq=False)
class GradedVector:
    """A point of the truncated space.  Immutable; arithmetic returns new vectors."""

    coeffs: np.ndarray
    space: SpaceConfig = field(default_factory=SpaceConfig)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.float64).reshape(-1)
        if c.shape[0] != self.space.coeffs:
            raise SpaceMismatch(f"expected {self.space.coeffs} coefficients, got {c.shape[0]}")
        if not np.all(np.isfinite(c)):
            raise ValueError("GradedVector entries must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def _other(self, other):
        if not isinstance(other, GradedVector):
            return NotImplemented
        if other.space != self.space:
            raise SpaceMismatch("vectors live in different spaces")
        return other.coeffs

    def __add__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return GradedVector(self.coeffs + o, self.space)

    def __sub__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return GradedVector(self.coeffs - o, self.space)

    def __mul__(self, t):
        return GradedVector(float(t) * self.coeffs, self.space)

    __rmul__ = __mul__

    def __neg__(self):
        return GradedVector(-self.coeffs, self.space)

    def seminorm(self, n):
        return seminorm(self, n)

    def seminorms(self):
        return seminorms(self)

    def allclose(self, other, atol=0.0, rtol=1e-12):
        return np.allclose(self.coeffs, other.coeffs, atol=atol, rtol=rtol)

    def __repr__(self):
        nz = np.flatnonzero(self.coeffs)
        body = ", ".join(f"{k}: {self.coeffs[k]:.6g}" for k in nz[:6])
        more = ", ..." if nz.size > 6 else ""
        return f"GradedVector({{{body}{more}}}, K={self.space.coeffs})"


@dataclass(frozen=True, eq=False)
class SeminormProfile:
    """Finite profile ``s = (s_0, ..., s_{N-1})`` of non-negative reals."""

    levels: np.ndarray

    def __post_init__(self):
        s = np.array(self.levels, dtype=np.float64).reshape(-1)
        if s.size == 0:
            raise ValueError("profile needs at least one level")
        if np.any(np.isnan(s)) or np.any(s < 0):
            raise ValueError("profile entries must be non-negative")
        s.setflags(write=False)
        object.__setattr__(self, "levels", s)

    @classmethod
    def constant(cls, value, levels=DEFAULT_LEVELS):
        return cls(np.full(levels, float(value)))

    @classmethod
    def of(cls, x):
        """Profile of seminorms of ``x``."""
        return cls(seminorms(x))

    def __len__(self):
        return self.levels.shape[0]

    @property
    def support(self):
        return np.flatnonzero(self.levels > 0)

    @property
    def is_degenerate(self):
        return self.support.size == 0

    def magnitude(self):
        return s_magnitude(self)

    def scaled(self, c):
        return SeminormProfile(float(c) * self.levels)

    def coordinate_bounds(self, space):
        """Half-widths ``b_k = min_n s_n / (1 + k)**n`` of the box as an interval product."""
        _check_profile(self, space)
        with np.errstate(invalid="ignore"):
            b = self.levels[:, None] / space.weights
        b = np.where(np.isnan(b), np.inf, b)
        return np.min(b, axis=0)

    def to_list(self):
        return [float(v) for v in self.levels]


def _as_array(x, space=None):
    if isinstance(x, GradedVector):
        if space is not None and x.space != space:
            raise SpaceMismatch("vector does not belong to the given space")
        return x.coeffs
    return np.asarray(x, dtype=np.float64)


def _check_profile(s, space):
    if len(s) != space.levels:
        raise SpaceMismatch(f"profile has {len(s)} levels, space has {space.levels}")


def _space_of(*vs):
    spaces = {v.space for v in vs if isinstance(v, GradedVector)}
    if len(spaces) > 1:
        raise SpaceMismatch("vectors live in different spaces")
    return spaces.pop() if spaces else SpaceConfig()


def seminorm(x: GradedVector, n: int) -> float:
    if not 0 <= n < x.space.levels:
        raise LevelOutOfRange(f"level {n} outside 0..{x.space.levels - 1}")
    return float(np.max(x.space.weights[n] * np.abs(x.coeffs)))


def seminorms(x: GradedVector) -> np.ndarray:
    return _kernels.active.seminorms(x.coeffs, x.space.weights)


# --------------------------------------------------------------------------
# metrics
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CanonicalMetric:
    """``rho(x, y) = max_n 2**-n |x-y|_n / (1 + |x-y|_n)`` over tracked levels.

    ``shift = d`` regrades the space so that level ``n`` reads seminorm ``n + d``
    (used on the target side of problems that lose ``d`` derivatives);
    ``depth`` caps how many levels enter the max.
    """

    space: SpaceConfig
    shift: int = 0
    depth: int | None = None

    def __post_init__(self):
        if not 0 <= self.shift < self.space.levels:
            raise LevelOutOfRange(f"shift {self.shift} leaves no tracked levels")
        room = self.space.levels - self.shift
        depth = room if self.depth is None else int(self.depth)
        if not 1 <= depth <= room:
            raise LevelOutOfRange(f"depth {depth} outside 1..{room}")
        object.__setattr__(self, "depth", depth)

    variant = "canonical"

    @property
    def weights(self):
        return self.space.weights[self.shift: self.shift + self.depth]

    @property
    def scales(self):
        return self.space.scales[: self.depth]

    def from_zero(self, z):
        return float(_kernels.active.rho_from_zero(_as_array(z, self.space), self.weights, self.scales))

    def distance(self, x, y):
        return self.from_zero(_as_array(x, self.space) - _as_array(y, self.space))

    def to_many(self, z, points):
        return _kernels.active.rho_to_many(
            np.ascontiguousarray(_as_array(z, self.space)), np.ascontiguousarray(points), self.weights, self.scales
        )

    def from_zero_rows(self, Z):
        """``rho(0, z)`` for every row of ``Z``."""
        t = _kernels.active.batch_seminorms(np.ascontiguousarray(Z), np.ascontiguousarray(self.weights))
        return np.max(self.scales[None, :] * g(t), axis=1)

    def describe(self):
        return {"variant": "canonical", "shift": self.shift, "depth": self.depth,
                "tail_bound": 2.0 ** -(self.shift + self.depth)}


@dataclass(frozen=True, eq=False)
class RemetrizedMetric:
    """Shift-invariant metric normalised along ``xbar``: ``rho(0, t*xbar) = |t|``.

    Uses the coordinate functional ``p(z) = z_j / xbar_j`` and
    ``rho_bar(0, z) = |p(z)| + rho(0, z - p(z) * xbar)``.
    """

    space: SpaceConfig
    xbar: np.ndarray
    j: int
    base: CanonicalMetric = None

    variant = "remetrized"

    def __post_init__(self):
        xb = np.array(self.xbar, dtype=np.float64).reshape(-1)
        xb.setflags(write=False)
        object.__setattr__(self, "xbar", xb)
        if self.base is None:
            object.__setattr__(self, "base", CanonicalMetric(self.space))

    def functional(self, z):
        return float(z[self.j] / self.xbar[self.j])

    def from_zero(self, z):
        z = _as_array(z, self.space)
        p = self.functional(z)
        r = z - p * self.xbar
        r[self.j] = 0.0  # exactly zero in exact arithmetic
        return abs(p) + self.base.from_zero(r)

    def distance(self, x, y):
        return self.from_zero(_as_array(x, self.space) - _as_array(y, self.space))

    def to_many(self, z, points):
        return self.from_zero_rows(np.atleast_2d(points) - _as_array(z, self.space)[None, :])

    def from_zero_rows(self, Z):
        p = Z[:, self.j] / self.xbar[self.j]
        R = Z - p[:, None] * self.xbar[None, :]
        R[:, self.j] = 0.0
        return np.abs(p) + self.base.from_zero_rows(R)

    def describe(self):
        return {"variant": "remetrized", "j": int(self.j), "shift": self.base.shift}


MetricHandle = CanonicalMetric | RemetrizedMetric


def rho_metric(x: GradedVector, y: GradedVector, metric: MetricHandle | None = None) -> float:
    if metric is None:
        metric = CanonicalMetric(_space_of(x, y))
    elif isinstance(x, GradedVector) and isinstance(y, GradedVector) and x.space != y.space:
        raise SpaceMismatch("vectors live in different spaces")
    return metric.distance(x, y)


def remetrize(xbar: GradedVector, j: int | None = None, shift: int = 0) -> RemetrizedMetric:
    """Build the equivalent metric along direction ``xbar`` using coordinate ``j``.

    ``j`` defaults to the coordinate of largest magnitude.
    """
    c = xbar.coeffs
    if not np.any(c != 0.0):
        raise InvalidDirection("direction must be nonzero")
    if j is None:
        j = int(np.argmax(np.abs(c)))
    if not 0 <= j < c.shape[0] or c[j] == 0.0:
        raise InvalidDirection(f"coordinate {j} of the direction is zero, p(xbar) = 1 is unachievable")
    return RemetrizedMetric(xbar.space, c, int(j), CanonicalMetric(xbar.space, shift))


# --------------------------------------------------------------------------
# profiles and boxes
# --------------------------------------------------------------------------

def s_magnitude(s: SeminormProfile) -> float:
    lv = s.levels
    sc = _scales(len(lv))
    return float(np.max(sc * g(lv)))


def pi_membership(x: GradedVector, s: SeminormProfile, slack: float | None = None) -> bool:
    _check_profile(s, x.space)
    if slack is None:
        slack = x.space.slack
    return bool(np.all(seminorms(x) <= s.levels + slack))


def s_norm(x: GradedVector, s: SeminormProfile, slack: float = 0.0) -> float:
    """``sup_{n in supp s} ||x||_n / s_n``; ``inf`` when ``x`` has mass off the support.

    ``slack`` is subtracted from each seminorm before dividing so that
    ``s_norm(x, s, slack) <= 1`` matches ``pi_membership(x, s, slack)``.
    """
    _check_profile(s, x.space)
    supp = s.support
    if supp.size == 0:
        raise DegenerateProfile("profile has empty support; the box is {0}")
    t = np.maximum(seminorms(x) - slack, 0.0)
    off = np.ones(len(s), dtype=bool)
    off[supp] = False
    if np.any(t[off] > 0.0):
        return math.inf
    return float(np.max(t[supp] / s.levels[supp]))


def key_inclusion_check(x: GradedVector, s: SeminormProfile, c: float, slack: float | None = None) -> bool:
    """Probe for ``c * Pi_s`` lying inside the metric ball of radius ``c * |s|``."""
    if c < 1:
        raise PremiseViolation("the inclusion needs c >= 1")
    if slack is None:
        slack = x.space.slack
    if not pi_membership(x, s.scaled(c), slack=0.0):
        return True
    return rho_metric(x.space.zeros(), x) <= c * s_magnitude(s) + slack


def diam_upper_bound(s: SeminormProfile, t: float) -> float:
    if t <= 0:
        raise ValueError("t must be positive")
    ts = t * s.levels
    return float(np.max(_scales(len(ts)) * g(ts)))


def sample_box(s: SeminormProfile, space: SpaceConfig, rng, size, boundary_frac=0.1, center=None):
    """Draw ``size`` points of ``center + Pi_s`` (uniform per coordinate, some pinned to faces)."""
    b = s.coordinate_bounds(space)
    return sample_intervals(b, rng, size, boundary_frac, center)


def sample_intervals(bounds, rng, size, boundary_frac=0.1, center=None):
    b = np.asarray(bounds, dtype=np.float64)
    if np.any(~np.isfinite(b)):
        raise ValueError("cannot sample an unbounded box")
    pts = rng.uniform(-1.0, 1.0, size=(size, b.shape[0]))
    n_face = int(round(boundary_frac * size))
    if n_face:
        face = rng.random((n_face, b.shape[0])) < 0.5
        pts[:n_face] = np.where(face, np.sign(pts[:n_face]), pts[:n_face])
    pts *= b[None, :]
    if center is not None:
        pts += np.asarray(center)[None, :]
    return pts


# --------------------------------------------------------------------------
# epsilon nets
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EpsilonNet:
    epsilon: float
    points: np.ndarray  # (M, K)
    profile: SeminormProfile
    space: SpaceConfig
    grid_level: int
    per_coordinate: tuple  # points per coordinate before projection

    @property
    def size(self):
        return self.points.shape[0]

    @property
    def guaranteed_radius(self):
        return 3.0 * self.epsilon

    def vectors(self):
        return [GradedVector(p, self.space) for p in self.points]

    def covering_distances(self, samples):
        """Distance from each sample to its nearest net point."""
        d, _ = _kernels.active.nearest_rho(
            np.ascontiguousarray(samples), self.points, self.space.weights, self.space.scales
        )
        return d


def net_grid_level(eps, levels):
    """Smallest level ``k`` with ``2**-k < eps``, capped at the last tracked level."""
    k = 0
    while 2.0 ** -k >= eps:
        k += 1
    return min(k, levels - 1)


def epsilon_net(s: SeminormProfile, eps: float, space: SpaceConfig | None = None, cap: int = DEFAULT_NET_CAP) -> EpsilonNet:
    """Finite subset of ``Pi_s`` that covers it within ``3 * eps`` in the canonical metric.

    Coordinates are gridded on levels ``0..k`` where ``2**-k < eps``; levels above
    ``k`` contribute less than ``eps`` to the metric anyway.  Grid points are
    clipped into the box, which only moves them closer to any box point.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    space = space or SpaceConfig(levels=len(s))
    _check_profile(s, space)
    K = space.coeffs
    k = net_grid_level(eps, space.levels)
    box = s.coordinate_bounds(space)
    outer_lv = min(k + 1, space.levels - 1)
    outer = np.min(s.levels[: outer_lv + 1, None] / space.weights[: outer_lv + 1], axis=0)
    # per-level seminorm allowance so that 2**-n g(|x-a|_n) <= eps
    allow = g_inv(np.minimum(space.scales[: k + 1] ** -1 * eps, 1.0))
    with np.errstate(invalid="ignore"):
        err = np.min(allow[:, None] / space.weights[: k + 1], axis=0)
    counts = [
        1 if box[j] == 0.0 or not np.isfinite(err[j]) else max(1, math.ceil(outer[j] / err[j] - 1e-12))
        for j in range(K)
    ]
    required = math.prod(counts)
    if required > cap:
        raise NetTooLarge(required, cap)
    axes = []
    for j, m in enumerate(counts):
        if m == 1 or box[j] == 0.0:
            axes.append(np.zeros(1))
        else:
            c = (-(m - 1) + 2.0 * np.arange(m)) * err[j]
            axes.append(np.unique(np.clip(c, -box[j], box[j])))
    active = [j for j in range(K) if axes[j].shape[0] > 1]
    if active:
        grid = np.array(list(itertools.product(*(axes[j] for j in active))))
        pts = np.zeros((grid.shape[0], K))
        pts[:, active] = grid
    else:
        pts = np.zeros((1, K))
    pts = np.unique(pts, axis=0)
    pts.setflags(write=False)
    return EpsilonNet(float(eps), pts, s, space, k, tuple(counts))


def rho_ball_bounds(radius: float, metric: CanonicalMetric) -> np.ndarray:
    """Coordinate half-widths of the ball ``{z : rho(0, z) <= radius}`` (``inf`` = unconstrained).

    The canonical ball is itself a box: level ``n`` caps the seminorm at
    ``g_inv(2**n * radius)`` whenever that argument is below one.
    """
    a = radius / metric.scales
    allow = g_inv(np.where(a < 1.0, a, 1.0))
    with np.errstate(invalid="ignore"):
        b = allow[:, None] / metric.weights
    return np.min(b, axis=0)
