"""Sampled checkers for box surjectivity and openness at a linear rate.

Neither property is finitely decidable (both involve closures or all radii),
so the checkers only report whether a finite graph sample is *consistent*
with the property at a stated resolution ``delta``: every probe target must be
matched by some admissible sampled image within ``delta``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .graded import CanonicalMetric, SeminormProfile, SpaceConfig, g, rho_ball_bounds


def box_bounds(levels, weights):
    """``min_n levels[n] / weights[n, k]`` for each coordinate ``k``."""
    with np.errstate(invalid="ignore"):
        b = np.asarray(levels, dtype=np.float64)[:, None] / weights
    return np.min(np.where(np.isnan(b), np.inf, b), axis=0)


@dataclass(eq=False)
class Box:
    """Set ``center + Pi_profile``; used to describe the open sets ``U`` and ``V``."""

    center: np.ndarray
    profile: SeminormProfile

    @classmethod
    def everything(cls, space: SpaceConfig):
        return cls(np.zeros(space.coeffs), SeminormProfile(np.full(space.levels, np.inf)))

    def bounds(self, space):
        return self.profile.coordinate_bounds(space)

    def contains(self, pts, space, slack=0.0):
        pts = np.atleast_2d(pts)
        return np.all(np.abs(pts - self.center[None, :]) <= self.bounds(space)[None, :] + slack, axis=1)

    def contains_box(self, x, half_widths, space):
        """Whether ``x + prod[-h_k, h_k]`` lies inside the box."""
        return bool(np.all(np.abs(x - self.center) + half_widths <= self.bounds(space)))

    def margin(self, x, metric: CanonicalMetric):
        """``m_U(x)``: distance from ``x`` to the complement of the box in ``metric``."""
        b = self.bounds(metric.space)
        gap = b - np.abs(x - self.center)
        if np.any(gap < 0):
            return 0.0
        finite = np.isfinite(gap)
        if not finite.any():
            return np.inf
        # moving one coordinate by its gap is the cheapest exit
        t = metric.weights[:, finite] * gap[finite][None, :]
        per_coord = np.max(metric.scales[:, None] * g(t), axis=0)
        return float(np.min(per_coord))

    def to_dict(self):
        return {"center": self.center.tolist(), "profile": self.profile.to_list()}


@dataclass(eq=False)
class MultimapSample:
    """Finite graph sample ``{(x_i, y_i)}`` of a multimap with its sets ``U``, ``V``.

    ``coords`` are the coordinates the sample resolves; probe targets vary only
    there.  ``domain`` is the coordinate range the sample covers; base pairs whose
    probe neighbourhood leaves it are skipped (the sample says nothing there).
    ``shift`` is the derivative loss used to regrade the target space.
    """

    xs: np.ndarray
    ys: np.ndarray
    U: Box
    V: Box
    space: SpaceConfig
    coords: tuple
    resolution: float
    shift: int = 0
    domain: tuple | None = None
    name: str = ""

    def __len__(self):
        return self.xs.shape[0]

    def without(self, mask):
        """Copy with the pairs where ``mask`` is true removed (``mask`` may be a predicate)."""
        if callable(mask):
            mask = np.array([bool(mask(x, y)) for x, y in zip(self.xs, self.ys)])
        keep = ~np.asarray(mask, dtype=bool)
        return MultimapSample(self.xs[keep], self.ys[keep], self.U, self.V, self.space, self.coords,
                              self.resolution, self.shift, self.domain, self.name + " (masked)")

    @property
    def metric_x(self):
        return CanonicalMetric(self.space, 0, self.space.levels - self.shift)

    @property
    def metric_y(self):
        return CanonicalMetric(self.space, self.shift)

    def fits_domain(self, x, half):
        if self.domain is None:
            return True
        lo, hi = self.domain
        c = list(self.coords)
        return bool(np.all(x[c] - half[c] >= lo - 1e-12) and np.all(x[c] + half[c] <= hi + 1e-12))


@dataclass
class Probe:
    pair: int
    target: list
    distance: float
    radius: float | None = None


@dataclass
class CheckReport:
    kind: str
    parameter: float
    delta: float
    pairs_checked: int
    probes: int
    worst: float
    unmatched: list = field(default_factory=list)
    per_radius: dict = field(default_factory=dict)
    vacuous: bool = False

    @property
    def consistent(self):
        return not self.vacuous and not self.unmatched

    @property
    def verdict(self):
        if self.vacuous:
            return "vacuous: no qualifying graph pair"
        if self.consistent:
            return f"consistent at resolution {self.delta:.3g}"
        return f"inconsistent: {len(self.unmatched)} of {self.probes} probes unmatched at resolution {self.delta:.3g}"

    def to_dict(self):
        return {
            "kind": self.kind,
            "parameter": self.parameter,
            "delta": self.delta,
            "pairs_checked": self.pairs_checked,
            "probes": self.probes,
            "worst": self.worst,
            "verdict": self.verdict,
            "consistent": self.consistent,
            "per_radius": {str(k): v for k, v in self.per_radius.items()},
            "unmatched": [p.__dict__ for p in self.unmatched[:50]],
            "n_unmatched": len(self.unmatched),
        }


def _targets(y, lo, hi, coords, rng, budget, K):
    """Corners of ``y + prod[lo, hi]`` over ``coords`` plus ``budget`` uniform draws."""
    c = list(coords)
    corners = np.array(np.meshgrid(*[[lo[k], hi[k]] for k in c], indexing="ij")).reshape(len(c), -1).T
    draws = rng.uniform(lo[c], hi[c], size=(budget, len(c)))
    offs = np.vstack([corners, draws])
    out = np.repeat(y[None, :], offs.shape[0], axis=0)
    out[:, c] += offs
    return out


def _pick_pairs(candidates, max_pairs, rng):
    candidates = np.asarray(candidates, dtype=np.int64)
    if max_pairs is not None and candidates.size > max_pairs:
        candidates = np.sort(rng.choice(candidates, size=max_pairs, replace=False))
    return candidates


def check_weak_pi_surjectivity(F: MultimapSample, kappa: float, s: SeminormProfile, probe_budget: int = 32,
                               rng=None, delta: float | None = None, max_pairs: int | None = 64) -> CheckReport:
    """Probe ``cl F(x + Pi_s(X)) >= {y + kappa Pi_s(Y)} /\\ V`` on the sample.

    ``Pi_s(X)`` uses levels ``0..N-1-shift`` and ``Pi_s(Y)`` reads level ``n``
    of ``s`` against target seminorm ``n + shift``.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    delta = F.resolution if delta is None else delta
    sp = F.space
    depth = sp.levels - F.shift
    lv = s.levels[:depth]
    bx = box_bounds(lv, sp.weights[:depth])
    by = kappa * box_bounds(lv, sp.weights[F.shift:])
    vb = F.V.bounds(sp)
    in_u = F.U.contains(F.xs, sp)
    in_v = F.V.contains(F.ys, sp)
    qual = [i for i in np.flatnonzero(in_u & in_v)
            if F.U.contains_box(F.xs[i], bx, sp) and F.fits_domain(F.xs[i], bx)]
    if not qual:
        return CheckReport("weak_pi", kappa, delta, 0, 0, np.nan, vacuous=True)
    my = F.metric_y
    worst = 0.0
    unmatched = []
    n_probe = 0
    picked = _pick_pairs(qual, max_pairs, rng)
    for i in picked:
        x, y = F.xs[i], F.ys[i]
        lo = np.maximum(-by, F.V.center - vb - y)
        hi = np.minimum(by, F.V.center + vb - y)
        Z = _targets(y, lo, hi, F.coords, rng, probe_budget, sp.coeffs)
        adm = np.all(np.abs(F.xs - x[None, :]) <= bx[None, :] * (1 + 1e-12) + sp.slack, axis=1)
        Ys = np.ascontiguousarray(F.ys[adm])
        d, _ = _kernels.active.nearest_rho(np.ascontiguousarray(Z), Ys, my.weights, my.scales)
        n_probe += Z.shape[0]
        worst = max(worst, float(d.max()))
        for z, dz in zip(Z, d):
            if dz > delta:
                unmatched.append(Probe(int(i), z[list(F.coords)].tolist(), float(dz)))
    return CheckReport("weak_pi", kappa, delta, len(picked), n_probe, worst, unmatched)


def check_openness(F: MultimapSample, theta: float, probe_budget: int = 32, radii=(0.02, 0.05, 0.1),
                   rng=None, delta: float | None = None, max_pairs: int | None = 64) -> CheckReport:
    """Probe ``F(B(x; r)) >= B(y; theta r) /\\ V`` for radii below ``m_U(x)``."""
    rng = rng if rng is not None else np.random.default_rng(0)
    delta = F.resolution if delta is None else delta
    sp = F.space
    mx, my = F.metric_x, F.metric_y
    vb = F.V.bounds(sp)
    in_u = F.U.contains(F.xs, sp)
    in_v = F.V.contains(F.ys, sp)
    base = np.flatnonzero(in_u & in_v)
    worst_by_r = {float(r): 0.0 for r in radii}
    unmatched = []
    n_probe = 0
    used = set()
    ball_x = {float(r): rho_ball_bounds(r, mx) for r in radii}
    ball_y = {float(r): rho_ball_bounds(theta * r, my) for r in radii}
    todo = [i for i in base if any(F.fits_domain(F.xs[i], ball_x[float(r)]) for r in radii)]
    for i in _pick_pairs(todo, max_pairs, rng):
        x, y = F.xs[i], F.ys[i]
        m = F.U.margin(x, mx)
        for r in radii:
            r = float(r)
            if not r < m or not F.fits_domain(x, ball_x[r]):
                continue
            used.add(int(i))
            lo = np.maximum(-ball_y[r], F.V.center - vb - y)
            hi = np.minimum(ball_y[r], F.V.center + vb - y)
            if np.any(~np.isfinite(lo[list(F.coords)])) or np.any(~np.isfinite(hi[list(F.coords)])):
                raise ValueError("target ball is unbounded on the sampled coordinates; bound V")
            Z = _targets(y, lo, hi, F.coords, rng, probe_budget, sp.coeffs)
            adm = mx.to_many(x, F.xs) <= r * (1 + 1e-12)
            Ys = np.ascontiguousarray(F.ys[adm])
            d, _ = _kernels.active.nearest_rho(np.ascontiguousarray(Z), Ys, my.weights, my.scales)
            n_probe += Z.shape[0]
            worst_by_r[r] = max(worst_by_r[r], float(d.max()))
            for z, dz in zip(Z, d):
                if dz > delta:
                    unmatched.append(Probe(int(i), z[list(F.coords)].tolist(), float(dz), r))
    if not used:
        return CheckReport("openness", theta, delta, 0, 0, np.nan, vacuous=True)
    return CheckReport("openness", theta, delta, len(used), n_probe, max(worst_by_r.values()), unmatched,
                       per_radius=worst_by_r)
