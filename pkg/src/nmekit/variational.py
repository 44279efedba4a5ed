"""Ekeland point finding on finite metric spaces and the long-orbit / empty-value engine."""

from __future__ import annotations

import json
import numbers
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

import numpy as np

from .errors import ContractViolation, OrbitIndeterminate, PremiseViolation

FLOAT_SLACK = 1e-12


# --------------------------------------------------------------------------
# Ekeland
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    points: list
    dist: np.ndarray

    def __post_init__(self):
        d = np.array(self.dist, dtype=np.float64)
        n = len(self.points)
        if d.shape != (n, n):
            raise ValueError(f"distance matrix must be {n}x{n}")
        if np.any(d < 0) or np.any(np.diag(d) != 0) or not np.array_equal(d, d.T):
            raise ValueError("distance matrix must be symmetric, non-negative, zero on the diagonal")
        d.setflags(write=False)
        object.__setattr__(self, "dist", d)

    def __len__(self):
        return len(self.points)

    def index(self, p):
        for i, q in enumerate(self.points):
            if _same(p, q):
                return i
        raise KeyError(p)

    def triangle_defect(self):
        """Largest violation of ``d(i,j) <= d(i,k) + d(k,j)`` (<= 0 means a metric)."""
        d = self.dist
        worst = -np.inf
        for k in range(d.shape[0]):
            worst = max(worst, float(np.max(d - (d[:, k][:, None] + d[k][None, :]))))
        return worst

    @classmethod
    def from_coordinates(cls, coords, ids=None):
        """Euclidean distances between the rows of ``coords``."""
        c = np.asarray(coords, dtype=np.float64)
        if c.ndim == 1:
            c = c[:, None]
        diff = c[:, None, :] - c[None, :, :]
        d = np.sqrt(np.sum(diff * diff, axis=2))
        d = 0.5 * (d + d.T)
        np.fill_diagonal(d, 0.0)
        return cls(list(range(len(c))) if ids is None else list(ids), d)


@dataclass(frozen=True)
class EkelandResult:
    x_hat: Any
    index: int
    checks: dict
    slacks: dict
    path: tuple
    path_values: tuple

    @property
    def ok(self):
        return all(self.checks.values())


def _values(M, f):
    if callable(f):
        v = np.array([f(p) for p in M.points], dtype=np.float64)
    else:
        v = np.array(f, dtype=np.float64)
    if v.shape != (len(M),):
        raise ValueError("need one objective value per point")
    if np.any(np.isnan(v)) or np.any(v == -np.inf):
        raise PremiseViolation("objective must take values in R or +inf")
    return v


def ekeland_checks(M, values, x_idx, y_idx, eps, lam, slack=FLOAT_SLACK):
    """Exhaustive check of the three Ekeland conditions at ``x_idx``."""
    d = M.dist
    fx, fy = values[x_idx], values[y_idx]
    r = d[x_idx, y_idx]
    s1 = fy - fx - lam * r
    s2 = eps - r
    with np.errstate(invalid="ignore"):
        s3 = float(np.min(lam * d[:, x_idx] + values - fx))
    checks = {"i": bool(s1 >= -slack), "ii": bool(s2 >= -slack), "iii": bool(s3 >= -slack)}
    return checks, {"i": float(s1), "ii": float(s2), "iii": s3}


def ekeland_point(M: FiniteMetricSpace, f, y_hat, eps: float, lam: float, slack: float = FLOAT_SLACK) -> EkelandResult:
    """Find ``x_hat`` satisfying the Ekeland conditions relative to ``y_hat``.

    Starting at ``y_hat``, repeatedly jump to the minimiser of
    ``x -> f(x) + lam * d(x, current)`` while that strictly beats ``f(current)``
    (ties go to the smaller ``f``).
    The objective strictly decreases, so on a finite space the loop ends, and it
    ends exactly where no strict improver remains.
    """
    if eps <= 0 or lam <= 0:
        raise ValueError("eps and lam must be positive")
    v = _values(M, f)
    finite = np.isfinite(v)
    if not np.any(finite):
        raise PremiseViolation("objective is identically +inf")
    y = M.index(y_hat)
    if not finite[y]:
        raise PremiseViolation("f(y_hat) must be finite")
    if v[y] > np.min(v[finite]) + eps * lam + slack:
        raise PremiseViolation("f(y_hat) exceeds inf f + eps * lam")

    cur = y
    path, vals = [cur], [float(v[cur])]
    while True:
        cand = v + lam * M.dist[:, cur]
        # among tied minimisers take the lowest objective value, then the lowest index
        ties = np.flatnonzero(cand == np.min(cand))
        j = int(ties[np.argmin(v[ties])])
        if not cand[j] < v[cur]:
            break
        cur = j
        path.append(cur)
        vals.append(float(v[cur]))
    checks, slacks = ekeland_checks(M, v, cur, y, eps, lam, slack)
    return EkelandResult(M.points[cur], cur, checks, slacks, tuple(path), tuple(vals))


# --------------------------------------------------------------------------
# orbits
# --------------------------------------------------------------------------

def _same(a, b):
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        return np.array_equal(np.asarray(a), np.asarray(b))
    try:
        return bool(a == b)
    except (TypeError, ValueError):
        return a is b


def aitken_limit(points):
    """Estimate where a convergent orbit is heading.

    Uses Aitken's delta-squared extrapolation on the last three points when
    they are numbers (kept in their own arithmetic, so ``Fraction`` stays exact)
    or numeric arrays; otherwise returns the last point.
    """
    if len(points) < 3:
        return points[-1]
    a, b, c = points[-3:]
    if all(isinstance(p, numbers.Number) for p in (a, b, c)):
        den = c - 2 * b + a
        return c if den == 0 else c - (c - b) ** 2 / den
    try:
        a, b, c = (np.asarray(p, dtype=np.float64) for p in (a, b, c))
    except (TypeError, ValueError):
        return points[-1]
    den = c - 2.0 * b + a
    safe = np.where(den != 0, den, 1.0)
    out = np.where(den != 0, c - (c - b) ** 2 / safe, c)
    return out


@dataclass
class StepMap:
    """Finite-sample oracle for a set-valued step map ``S`` and a target set ``M'``.

    ``candidates(x)`` returns a finite sample of ``S(x)`` in a fixed order.
    ``in_target`` defaults to "``S(x)`` is nonempty".  ``limit`` maps the list of
    visited points to an estimate of their limit (default :func:`aitken_limit`).
    """

    candidates: Callable[[Any], Sequence[Any]]
    in_target: Callable[[Any], bool] | None = None
    limit: Callable[[list], Any] | None = None
    name: str = ""

    def target(self, x):
        if self.in_target is None:
            return len(list(self.candidates(x))) > 0
        return bool(self.in_target(x))

    def estimate_limit(self, points):
        return (self.limit or aitken_limit)(points)


@dataclass(frozen=True)
class OrbitStep:
    point: Any
    length: float
    s: float
    choice: int
    n_candidates: int


@dataclass
class OrbitOutcome:
    case: str  # "A", "B1" or "B2"
    x0: Any
    steps: list
    length: float
    reason: str
    params: dict
    limit: Any = None

    @property
    def points(self):
        return [self.x0] + [s.point for s in self.steps]

    @property
    def terminal(self):
        return self.steps[-1].point if self.steps else self.x0

    def to_dict(self):
        rows = [{"point": self.x0, "step": 0.0, "s": None, "case": None}]
        for i, st in enumerate(self.steps):
            last = i == len(self.steps) - 1
            rows.append({
                "point": st.point,
                "step": st.length,
                "s": st.s,
                "choice": st.choice,
                "candidates": st.n_candidates,
                "case": {c: (last and self.case == c) for c in ("A", "B1", "B2")},
            })
        return {
            "case": self.case,
            "length": self.length,
            "reason": self.reason,
            "params": self.params,
            "limit": self.limit,
            "trace": rows,
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), default=_json_default, **kw)


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, Fraction):
        return str(o)
    if isinstance(o, tuple):
        return list(o)
    return repr(o)


def _step_data(S, metric, x):
    cands = list(S.candidates(x))
    if any(_same(c, x) for c in cands):
        raise ContractViolation(f"step map contains its own argument at {x!r}")
    dists = [float(metric(x, c)) for c in cands]
    return cands, dists


def _half_sup_choice(dists):
    s = min(1.0, max(dists))
    for k, d in enumerate(dists):
        if d > 0.5 * s:
            return k, s
    raise ContractViolation("no candidate exceeds half the sampled sup")  # unreachable for a metric


def run_orbit(S: StepMap, x0, metric, budget: int = 10_000, div_threshold: float = 1e3,
              window: int = 32, tail_tol: float = 1e-9) -> OrbitOutcome:
    """Run the half-sup orbit from ``x0`` and classify it.

    At each point either ``S`` is empty (or the point left ``M'``): case B1; or
    step to the first sampled candidate farther than half of
    ``s_i = min(1, max candidate distance)``.  Cumulative length reaching
    ``div_threshold`` is case A; ``window`` consecutive steps of total length
    below ``tail_tol`` whose extrapolated limit is outside ``M'`` is case B2.
    """
    params = {"budget": budget, "div_threshold": div_threshold, "window": window, "tail_tol": tail_tol}
    steps = []
    pts = [x0]
    total = 0.0
    x = x0

    def done(case, reason, limit=None):
        return OrbitOutcome(case, x0, steps, total, reason, params, limit)

    for _ in range(budget):
        cands, dists = _step_data(S, metric, x)
        if S.in_target is None:
            if not cands:
                return done("B1", "empty value")
        else:
            inside = bool(S.in_target(x))
            if not inside:
                return done("B1", "left target set")
            if not cands:
                raise ContractViolation(f"empty step value at {x!r} inside the target set")
        k, s = _half_sup_choice(dists)
        x = cands[k]
        total += dists[k]
        steps.append(OrbitStep(x, dists[k], s, k, len(cands)))
        pts.append(x)
        if total >= div_threshold:
            return done("A", f"cumulative length {total:.6g} >= {div_threshold:g}")
        if len(steps) >= window and sum(st.length for st in steps[-window:]) < tail_tol:
            lim = S.estimate_limit(pts)
            if not S.target(lim):
                return done("B2", "summable tail, limit outside target set", lim)
    raise OrbitIndeterminate(f"no classification within {budget} steps", done("?", "budget"))


@dataclass
class OrbitCheck:
    ok: bool
    reasons: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def verify_orbit(outcome: OrbitOutcome, S: StepMap, metric) -> OrbitCheck:
    """Recheck every disclosed step and the final classification."""
    reasons = []
    p = outcome.params
    x = outcome.x0
    pts = [x]
    for i, st in enumerate(outcome.steps):
        if S.in_target is not None and not S.in_target(x):
            reasons.append(f"step {i}: orbit continued after leaving the target set")
        try:
            cands, dists = _step_data(S, metric, x)
        except ContractViolation as exc:
            reasons.append(f"step {i}: {exc}")
            break
        hits = [k for k, c in enumerate(cands) if _same(c, st.point)]
        if not hits:
            reasons.append(f"step {i}: point is not a candidate of the previous point")
            break
        s = min(1.0, max(dists))
        if s != st.s:
            reasons.append(f"step {i}: recorded s={st.s!r} but sampled sup gives {s!r}")
        d = float(metric(x, st.point))
        if d != st.length:
            reasons.append(f"step {i}: recorded length {st.length!r} but distance is {d!r}")
        if not d > 0.5 * s:
            reasons.append(f"step {i}: half-sup inequality fails ({d!r} <= {s!r}/2)")
        first = next(k for k, dd in enumerate(dists) if dd > 0.5 * s)
        if first != st.choice or first not in hits:
            reasons.append(f"step {i}: not the first admissible candidate")
        x = st.point
        pts.append(x)

    total = sum(st.length for st in outcome.steps)
    if abs(total - outcome.length) > 1e-9 * max(1.0, abs(total)):
        reasons.append("cumulative length does not match the steps")
    term = outcome.terminal
    case = outcome.case
    if case == "A":
        if not total >= p["div_threshold"]:
            reasons.append("case A needs cumulative length >= threshold")
    elif case == "B1":
        if S.target(term):
            reasons.append("case B1 needs the terminal point outside the target set")
    elif case == "B2":
        w = p["window"]
        if len(outcome.steps) < w or not sum(st.length for st in outcome.steps[-w:]) < p["tail_tol"]:
            reasons.append("case B2 needs a window of summable tail steps")
        if not S.target(term):
            reasons.append("case B2 orbit should stay in the target set (that would be B1)")
        lim = S.estimate_limit(pts)
        if S.target(lim):
            reasons.append("case B2 needs the limit outside the target set")
    else:
        reasons.append(f"unknown case {case!r}")
    return OrbitCheck(not reasons, reasons)
