"""Run configuration: parsing, validation, presets and JSON helpers."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .graded import GradedVector, SeminormProfile, SpaceConfig
from .solver import SolverParams
from .suites import SUITE_NAMES

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Malformed or out-of-range run configuration."""


def vector_to_json(x: GradedVector):
    return {"space": x.space.to_dict(), "coeffs": x.coeffs.tolist()}


def vector_from_json(d, space=None):
    space = space or SpaceConfig(**d["space"])
    return GradedVector(d["coeffs"], space)


def profile_to_json(s: SeminormProfile):
    return [v if np.isfinite(v) else "inf" for v in s.to_list()]


def profile_from_json(levels):
    return SeminormProfile([float(v) for v in levels])


def json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, Fraction):
        return str(o)
    if isinstance(o, (set, tuple)):
        return list(o)
    raise TypeError(f"cannot serialise {type(o).__name__}")


def dumps(obj):
    """Canonical JSON: sorted keys, fixed separators, so equal objects give equal bytes."""
    return json.dumps(obj, sort_keys=True, indent=2, default=json_default, allow_nan=True)


def config_hash(raw: dict) -> str:
    blob = json.dumps(raw, sort_keys=True, separators=(",", ":"), default=json_default)
    return hashlib.sha256(blob.encode()).hexdigest()


def preset_target(name, space):
    """Named right-hand sides used by the example configs."""
    y = np.zeros(space.coeffs)
    if name == "e1+0.1e3":
        y[1], y[3] = 1.0, 0.1
    elif name == "smoothing_small":
        # |y|_n = 0.05 at every level: y_0 dominates, higher modes decay like (1+k)**-(N-1)
        y[0] = 0.05
        for k in (1, 2, 3):
            if k < space.coeffs:
                y[k] = 0.025 * (-1) ** k * (1.0 + k) ** -(space.levels - 1)
    elif name == "zero":
        pass
    else:
        raise ConfigError(f"unknown target preset {name!r}")
    return GradedVector(y, space)


def _target(desc, space):
    if desc is None:
        return preset_target("e1+0.1e3", space)
    if isinstance(desc, str):
        return preset_target(desc, space)
    if "preset" in desc:
        return preset_target(desc["preset"], space)
    c = desc.get("coeffs")
    y = np.zeros(space.coeffs)
    if isinstance(c, dict):
        for k, v in c.items():
            k = int(k)
            if not 0 <= k < space.coeffs:
                raise ConfigError(f"target coefficient index {k} outside 0..{space.coeffs - 1}")
            y[k] = float(v)
    elif isinstance(c, list):
        if len(c) > space.coeffs:
            raise ConfigError(f"target has {len(c)} coefficients, space has {space.coeffs}")
        y[: len(c)] = np.asarray(c, dtype=np.float64)
    else:
        raise ConfigError("target needs 'preset' or 'coeffs'")
    if not np.all(np.isfinite(y)):
        raise ConfigError("target coefficients must be finite")
    return GradedVector(y, space)


def _positive(d, key, default, kind=float):
    v = d.get(key, default)
    try:
        v = kind(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a number") from None
    if not v > 0:
        raise ConfigError(f"{key} must be positive")
    return v


@dataclass
class RunConfig:
    raw: dict
    space: SpaceConfig
    problem: dict
    target: GradedVector
    solver: SolverParams
    check: dict = field(default_factory=dict)
    net: dict = field(default_factory=dict)
    suites: tuple = SUITE_NAMES
    slack: float = 1e-12

    @property
    def hash(self):
        return config_hash(self.raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        if raw.get("schema") != SCHEMA_VERSION:
            raise ConfigError(f"config needs \"schema\": {SCHEMA_VERSION}")
        sp = raw.get("space", {})
        try:
            space = SpaceConfig(int(sp.get("levels", 12)), int(sp.get("coeffs", 64)))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad space: {exc}") from None
        prob = dict(raw.get("problem", {"kind": "diagonal", "d": 1, "c": 1.0}))
        if prob.get("kind") not in ("diagonal", "identity", "smoothing"):
            raise ConfigError(f"unknown problem kind {prob.get('kind')!r}")
        d = int(prob.get("d", 0)) if prob["kind"] == "diagonal" else 0
        if not 0 <= d < space.levels:
            raise ConfigError(f"loss d={d} outside 0..{space.levels - 1}")
        if prob["kind"] == "diagonal":
            _positive(prob, "c", 1.0)
        if prob["kind"] == "smoothing" and float(prob.get("lambda", 0.0)) < 0:
            raise ConfigError("lambda must be non-negative")
        target = _target(raw.get("target"), space)
        try:
            solver = SolverParams(**raw.get("solver", {}))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad solver parameters: {exc}") from None
        check = dict(raw.get("check", {}))
        for key, default in (("pitch", 0.05), ("kappa", 1.0), ("theta", 0.5), ("s_scale", 0.3), ("v_scale", 1.0)):
            check[key] = _positive(check, key, default)
        check.setdefault("coords", [0, 1])
        check.setdefault("bounds", [-1.0, 1.0])
        if any(not 0 <= int(k) < space.coeffs for k in check["coords"]):
            raise ConfigError("check coords outside the space")
        net = dict(raw.get("net", {}))
        net["eps"] = _positive(net, "eps", 0.1)
        net["cap"] = _positive(net, "cap", 200_000, int)
        net["samples"] = _positive(net, "samples", 10_000, int)
        s = net.get("s", 1.0)
        net["s"] = [float(s)] * space.levels if isinstance(s, (int, float)) else [float(v) for v in s]
        if len(net["s"]) != space.levels or any(v < 0 for v in net["s"]):
            raise ConfigError(f"net profile needs {space.levels} non-negative levels")
        suites = tuple(raw.get("suites", SUITE_NAMES))
        unknown = [n for n in suites if n not in SUITE_NAMES]
        if unknown:
            raise ConfigError(f"unknown suites {unknown}; choose from {list(SUITE_NAMES)}")
        slack = float(raw.get("slack", 1e-12))
        if slack < 0:
            raise ConfigError("slack must be non-negative")
        return cls(raw, space, prob, target, solver, check, net, suites, slack)

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        return cls.from_dict(raw)
