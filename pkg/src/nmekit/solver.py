"""Continuation solver for ``f(x) = y`` with tame right inverses, and its certificate.

The iteration starts at ``x_0 = 0`` and moves along ``u_i = R(x_i, ybar)``:

    x_{i+1} = x_i + t_i * u_i,     p_{i+1} = p_i + t_i,

accepting ``t_i`` only when ``rho(f(x_{i+1}) - f(x_i), t_i * ybar) <= eps * t_i`` in
the metric renormalised along ``ybar`` (so that ``rho(0, t * ybar) = |t|``).
With the default fixed direction ``ybar = y`` every iterate satisfies
``||x_i||_n <= p_i * c * |y|_{n+d}``, which is the certificate at ``p = 1``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import _kernels
from .errors import BudgetExceeded, NoProgress, TameBoundViolation
from .graded import CanonicalMetric, GradedVector, SpaceConfig, remetrize


@dataclass
class TameProblem:
    """Oracle bundle: map ``f``, right inverse ``R`` of ``f'``, tame constants ``c`` and ``d``.

    ``f`` and ``R`` take and return coefficient arrays.  Every ``R`` call made
    through :meth:`right_inverse` is checked against
    ``||R(x, v)||_n <= c |v|_{n+d}`` for ``n = 0 .. N-1-d``.
    """

    f: Callable[[np.ndarray], np.ndarray]
    R: Callable[[np.ndarray, np.ndarray], np.ndarray]
    c: float
    d: int
    space: SpaceConfig = field(default_factory=SpaceConfig)
    name: str = "problem"
    tame_tol: float = 1e-9
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("c must be positive")
        if not 0 <= self.d < self.space.levels:
            raise ValueError(f"loss d={self.d} must lie in 0..{self.space.levels - 1}")

    @property
    def tame_levels(self):
        return self.space.levels - self.d

    def apply(self, x):
        if isinstance(x, GradedVector):
            return GradedVector(self.f(x.coeffs), self.space)
        return np.asarray(self.f(np.asarray(x, dtype=np.float64)))

    def tame_check(self, u, v):
        """Levels where ``||u||_n > c |v|_{n+d}`` (relative slack ``tame_tol``)."""
        w = self.space.weights
        lhs = _kernels.active.seminorms(u, w)[: self.tame_levels]
        rhs = self.c * _kernels.active.seminorms(v, w)[self.d:]
        bad = np.flatnonzero(lhs > rhs * (1.0 + self.tame_tol) + 1e-300)
        return bad, lhs, rhs

    def right_inverse(self, x, v, check=True):
        xa = x.coeffs if isinstance(x, GradedVector) else np.asarray(x, dtype=np.float64)
        va = v.coeffs if isinstance(v, GradedVector) else np.asarray(v, dtype=np.float64)
        u = np.asarray(self.R(xa, va), dtype=np.float64)
        if check:
            bad, lhs, rhs = self.tame_check(u, va)
            if bad.size:
                raise TameBoundViolation(bad.tolist(), lhs[bad].tolist(), rhs[bad].tolist())
        return GradedVector(u, self.space) if isinstance(v, GradedVector) else u

    def describe(self):
        return {"name": self.name, "c": self.c, "d": self.d, **self.info}


@dataclass
class SolverParams:
    eps: float = 0.1
    backtrack: float = 0.5
    tol_residual: float = 1e-6
    tol_certificate: float = 1e-9
    max_steps: int = 100_000
    direction: str = "fixed"  # "corrected" re-aims at the remaining residual each step
    min_step: float = 1e-14

    def __post_init__(self):
        if not 0 < self.eps < 1:
            raise ValueError("eps must lie in (0, 1)")
        if not 0 < self.backtrack < 1:
            raise ValueError("backtrack factor must lie in (0, 1)")
        if self.tol_residual <= 0 or self.tol_certificate <= 0 or self.max_steps < 1:
            raise ValueError("tolerances and max_steps must be positive")
        if self.direction not in ("fixed", "corrected"):
            raise ValueError("direction must be 'fixed' or 'corrected'")


@dataclass(frozen=True)
class StepRecord:
    t: float
    p: float  # parameter after the step
    defect: float  # rho(f(x_{i+1}) - f(x_i), t * ybar) in the renormalised metric
    backtracks: int
    box_norm: float  # ||x_{i+1}||_s with s_n = c |y|_{n+d}


@dataclass
class CertificateTable:
    rows: list
    unevaluable: list
    passed: bool

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["level", "x_seminorm", "bound", "ratio", "pass"])
        for r in self.rows:
            w.writerow([r["level"], repr(r["x_seminorm"]), repr(r["bound"]), repr(r["ratio"]), int(r["pass"])])
        return buf.getvalue()


def tame_certificate(x: GradedVector, y: GradedVector, c: float, d: int, tol: float = 1e-9) -> CertificateTable:
    """Per-level table of ``||x||_n`` against ``c |y|_{n+d}``.

    Levels with ``n + d >= N`` have no tracked bound and are listed as
    unevaluable rather than assumed.
    """
    N = x.space.levels
    xs = _kernels.active.seminorms(x.coeffs, x.space.weights)
    ys = _kernels.active.seminorms(y.coeffs, y.space.weights)
    rows = []
    for n in range(N - d):
        lhs = float(xs[n])
        bound = float(c * ys[n + d])
        if bound > 0:
            ratio = lhs / bound
        else:
            ratio = 0.0 if lhs == 0 else math.inf
        rows.append({"level": n, "x_seminorm": lhs, "bound": bound, "ratio": ratio,
                     "pass": bool(lhs <= bound * (1.0 + tol))})
    return CertificateTable(rows, list(range(N - d, N)), all(r["pass"] for r in rows))


@dataclass
class SolveCertificate:
    x: GradedVector
    y: GradedVector
    p_final: float
    residual_levels: np.ndarray
    residual_rho: float
    table: CertificateTable
    passed: bool
    steps: list
    problem: dict
    params: dict
    metric: dict
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "x": self.x.coeffs.tolist(),
            "y": self.y.coeffs.tolist(),
            "p_final": self.p_final,
            "residual_levels": [float(v) for v in self.residual_levels],
            "residual_rho": self.residual_rho,
            "table": self.table.rows,
            "unevaluable_levels": self.table.unevaluable,
            "pass": self.passed,
            "n_steps": len(self.steps),
            "steps": [asdict(s) for s in self.steps],
            "problem": self.problem,
            "params": self.params,
            "metric": self.metric,
            "notes": self.notes,
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    def to_csv(self):
        return self.table.to_csv()


def _box_norm(xs_levels, s):
    # ||x||_s over supp s; inf when x has mass where s vanishes
    supp = s > 0
    if np.any(xs_levels[~supp] > 0):
        return math.inf
    return float(np.max(xs_levels[supp] / s[supp])) if supp.any() else 0.0


def solve_continuation(P: TameProblem, y: GradedVector, params: SolverParams | None = None) -> SolveCertificate:
    """Solve ``f(x) = y`` by continuation from ``x = 0`` and certify the tame bound."""
    params = params or SolverParams()
    space = P.space
    if y.space != space:
        y = GradedVector(y.coeffs, space)
    w = space.weights
    kern = _kernels.active
    metric_y = CanonicalMetric(space, shift=P.d)
    s = P.c * kern.seminorms(y.coeffs, w)[P.d:]
    meta = {"shift": P.d, "tail_bound": 2.0 ** -(space.levels - P.d), "step_metric": "renormalised along ybar"}

    def finish(x, fx, p, steps, notes):
        r = fx - y.coeffs
        res_lv = kern.seminorms(r, w)
        res_rho = metric_y.from_zero(r)
        xv = GradedVector(x, space)
        table = tame_certificate(xv, y, P.c, P.d, params.tol_certificate)
        return SolveCertificate(
            xv, y, p, res_lv, res_rho, table,
            bool(table.passed and res_rho <= params.tol_residual),
            steps, P.describe(), asdict(params), meta, notes,
        )

    x = np.zeros(space.coeffs)
    fx = np.asarray(P.f(x), dtype=np.float64)
    if not np.any(y.coeffs != 0):
        return finish(x, fx, 1.0, [], ["y = 0: returned x = 0"])
    if not np.any(s > 0):
        raise ValueError("profile c|y|_{n+d} has empty support on tracked levels")

    notes = [] if params.direction == "fixed" else ["direction re-aimed at the remaining residual each step"]
    metric = remetrize(y, shift=P.d)
    steps = []
    p = 0.0
    for _ in range(params.max_steps):
        gap = 1.0 - p
        if gap <= 0.0:
            break
        if p > 0 and metric_y.from_zero(fx - y.coeffs) <= params.tol_residual and params.direction == "corrected":
            break
        if params.direction == "fixed":
            ybar = y.coeffs
        else:
            ybar = (y.coeffs - fx) / gap
            metric = remetrize(GradedVector(ybar, space), shift=P.d) if np.any(ybar != 0) else metric
        u = P.right_inverse(x, ybar)
        # a remainder within rounding of eps is taken whole so p lands on 1 exactly
        t = gap if gap <= params.eps * (1.0 + 1e-9) else params.eps
        n_back = 0
        while True:
            xn = x + t * u
            fn = np.asarray(P.f(xn), dtype=np.float64)
            defect = metric.from_zero(fn - fx - t * ybar)
            if defect <= params.eps * t:
                break
            t *= params.backtrack
            n_back += 1
            if t < params.min_step:
                raise NoProgress(f"backtracking stalled at p={p:.6g}", finish(x, fx, p, steps, notes))
        x, fx = xn, fn
        p = 1.0 if t == gap else p + t
        steps.append(StepRecord(t, p, defect, n_back, _box_norm(kern.seminorms(x, w)[: P.tame_levels], s)))
    else:
        if p < 1.0:
            raise BudgetExceeded(f"max_steps={params.max_steps} reached at p={p:.6g}", finish(x, fx, p, steps, notes))
    return finish(x, fx, p, steps, notes)
