"""JSON scenario files: parsing and validation.

Variants use a tagged-object convention (``{"kind": ..., ...}``) and complex
numbers are two-element ``[re, im]`` arrays. A minimal scenario::

    {
      "truncation": 32,
      "params": {"nu": 1.0, "omega": 2.0, "chi": 0.2, "gamma": 0.05},
      "drive": {"kind": "constant", "f0": [0.1, 0.0]},
      "initial": {"field": {"kind": "coherent", "re": 1.0, "im": 0.0},
                  "atom": {"c_e": [0.7071067811865476, 0], "c_g": [0.7071067811865476, 0]}},
      "times": {"t_max": 2.0, "steps": 20},
      "observables": ["inversion", "mean_photon", "coherence"],
      "method": "both"
    }
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .blocks import AtomFieldState, ModelParams
from .drive import DriveSpec
from .fock import DEFAULT_N_MAX, coherent_state, fock_state
from .phase_space import PhaseSpaceGrid

OBSERVABLES = ("inversion", "mean_photon", "purity", "coherence", "trace_check")
METHODS = ("analytic", "oracle", "both")
NORM_TOL = 1e-9


class ScenarioError(ValueError):
    """Invalid scenario; ``field`` names the offending key path."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        super().__init__(message)
        self.field = field
        self.line = line

    def to_dict(self) -> dict:
        out = {"error": "scenario", "message": str(self)}
        if self.field is not None:
            out["field"] = self.field
        if self.line is not None:
            out["line"] = self.line
        return out


@dataclass
class PhaseSpaceRequest:
    which: str
    grid: PhaseSpaceGrid
    snapshot_times: list[float]


@dataclass
class Scenario:
    n_max: int
    params: ModelParams
    drive: DriveSpec
    field_spec: dict
    c_e: complex
    c_g: complex
    t_max: float
    steps: int
    observables: list[str]
    method: str
    phase_space: PhaseSpaceRequest | None = None
    snapshot_times: list[float] = field(default_factory=list)
    frame: str = "rotating"

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.steps + 1)

    def snapshot_indices(self) -> list[int]:
        """Output-time indices nearest to the requested snapshot times (final time if none)."""
        req = list(self.snapshot_times)
        if self.phase_space is not None:
            req += self.phase_space.snapshot_times
        if not req:
            return [self.steps]
        times = self.times
        return sorted({int(np.argmin(np.abs(times - t))) for t in req})

    def field_vector(self) -> np.ndarray:
        if self.field_spec["kind"] == "coherent":
            return coherent_state(complex(self.field_spec["re"], self.field_spec["im"]), self.n_max)
        return fock_state(self.field_spec["n"], self.n_max)

    def initial_state(self) -> AtomFieldState:
        return AtomFieldState.product(self.c_e, self.c_g, self.field_vector())


def _complex(value, path: str) -> complex:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if (isinstance(value, (list, tuple)) and len(value) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
        return complex(value[0], value[1])
    raise ScenarioError(f"{path} must be a number or a [re, im] pair", path)


def _number(obj: dict, key: str, path: str, default=None) -> float:
    if key not in obj:
        if default is None:
            raise ScenarioError(f"missing required field {path}.{key}", f"{path}.{key}")
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ScenarioError(f"{path}.{key} must be a finite number", f"{path}.{key}")
    return float(v)


def _section(data: dict, key: str) -> dict:
    v = data.get(key)
    if not isinstance(v, dict):
        raise ScenarioError(f"missing or non-object section {key!r}", key)
    return v


def parse_drive(obj) -> DriveSpec:
    if obj is None:
        return DriveSpec.zero()
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ScenarioError("drive must be an object with a 'kind' tag", "drive.kind")
    kind = obj["kind"]
    if kind == "zero":
        return DriveSpec.zero()
    try:
        if kind == "constant":
            return DriveSpec("constant", _complex(obj.get("f0", 0.0), "drive.f0"))
        if kind == "exponential":
            return DriveSpec("exponential", _complex(obj.get("f0", 0.0), "drive.f0"),
                             kappa=_complex(obj.get("kappa", 0.0), "drive.kappa"))
        if kind == "sinusoid":
            return DriveSpec("sinusoid", _complex(obj.get("f0", 0.0), "drive.f0"),
                             omega=_number(obj, "omega", "drive"),
                             phase=_number(obj, "phase", "drive", 0.0))
        if kind == "samples":
            times = obj.get("times")
            values = obj.get("values")
            if not isinstance(times, list) or not isinstance(values, list):
                raise ScenarioError("sampled drive needs 'times' and 'values' lists", "drive.times")
            vals = tuple(_complex(v, f"drive.values[{i}]") for i, v in enumerate(values))
            return DriveSpec("samples", times=tuple(float(t) for t in times), values=vals)
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(str(exc), "drive") from exc
    raise ScenarioError(f"unknown drive kind {kind!r}", "drive.kind")


def parse_scenario(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a JSON object")
    n_max = data.get("truncation", DEFAULT_N_MAX)
    if isinstance(n_max, bool) or not isinstance(n_max, int) or n_max < 1:
        raise ScenarioError("truncation must be an integer >= 1", "truncation")

    p = _section(data, "params")
    gamma = _number(p, "gamma", "params")
    if gamma < 0:
        raise ScenarioError(f"params.gamma must be >= 0, got {gamma}", "params.gamma")
    params = ModelParams(nu=_number(p, "nu", "params", 0.0), omega=_number(p, "omega", "params", 0.0),
                         chi=_number(p, "chi", "params"), gamma=gamma)
    drive = parse_drive(data.get("drive"))

    init = _section(data, "initial")
    fld = init.get("field")
    if not isinstance(fld, dict) or fld.get("kind") not in ("coherent", "fock"):
        raise ScenarioError("initial.field must be {kind: coherent|fock, ...}", "initial.field.kind")
    if fld["kind"] == "coherent":
        field_spec = {"kind": "coherent", "re": _number(fld, "re", "initial.field", 0.0),
                      "im": _number(fld, "im", "initial.field", 0.0)}
    else:
        n = fld.get("n")
        if isinstance(n, bool) or not isinstance(n, int) or not 0 <= n <= n_max:
            raise ScenarioError(f"initial.field.n must be an integer in 0..{n_max}", "initial.field.n")
        field_spec = {"kind": "fock", "n": n}
    atom = init.get("atom", {"c_e": [1, 0], "c_g": [0, 0]})
    if not isinstance(atom, dict):
        raise ScenarioError("initial.atom must be an object", "initial.atom")
    c_e = _complex(atom.get("c_e", 0.0), "initial.atom.c_e")
    c_g = _complex(atom.get("c_g", 0.0), "initial.atom.c_g")
    if abs(abs(c_e) ** 2 + abs(c_g) ** 2 - 1) > NORM_TOL:
        raise ScenarioError("initial.atom amplitudes must satisfy |c_e|^2 + |c_g|^2 = 1",
                            "initial.atom")

    tm = _section(data, "times")
    t_max = _number(tm, "t_max", "times")
    if not t_max > 0:
        raise ScenarioError(f"times.t_max must be > 0, got {t_max}", "times.t_max")
    steps = tm.get("steps")
    if isinstance(steps, bool) or not isinstance(steps, int) or steps < 1:
        raise ScenarioError("times.steps must be an integer >= 1", "times.steps")

    obs = data.get("observables", list(OBSERVABLES))
    if not isinstance(obs, list) or any(o not in OBSERVABLES for o in obs):
        raise ScenarioError(f"observables must be a list drawn from {OBSERVABLES}", "observables")

    method = data.get("method", "analytic")
    if method not in METHODS:
        raise ScenarioError(f"method must be one of {METHODS}", "method")

    frame = data.get("frame", "rotating")
    if frame not in ("rotating", "lab"):
        raise ScenarioError("frame must be 'rotating' or 'lab'", "frame")

    snaps = data.get("snapshot_times", [])
    if not isinstance(snaps, list):
        raise ScenarioError("snapshot_times must be a list", "snapshot_times")
    snapshot_times = [_check_time(t, t_max, f"snapshot_times[{i}]") for i, t in enumerate(snaps)]

    return Scenario(n_max, params, drive, field_spec, c_e, c_g, t_max, steps, list(obs), method,
                    _parse_phase_space(data.get("phase_space"), t_max), snapshot_times, frame)


def _check_time(t, t_max: float, path: str) -> float:
    if isinstance(t, bool) or not isinstance(t, (int, float)) or not 0 <= t <= t_max:
        raise ScenarioError(f"{path} must lie in [0, t_max]", path)
    return float(t)


def _parse_phase_space(ps, t_max: float) -> PhaseSpaceRequest | None:
    if ps is None:
        return None
    if not isinstance(ps, dict):
        raise ScenarioError("phase_space must be an object", "phase_space")
    which = ps.get("which", "both")
    if which not in ("q", "w", "both"):
        raise ScenarioError("phase_space.which must be q, w or both", "phase_space.which")
    bounds = ps.get("bounds", [-3, 3, -3, 3])
    res = ps.get("resolution", [41, 41])
    if not (isinstance(bounds, list) and len(bounds) == 4):
        raise ScenarioError("phase_space.bounds must be [re_min, re_max, im_min, im_max]",
                            "phase_space.bounds")
    if isinstance(res, int):
        res = [res, res]
    if not (isinstance(res, list) and len(res) == 2 and all(isinstance(r, int) for r in res)):
        raise ScenarioError("phase_space.resolution must be [n_re, n_im]", "phase_space.resolution")
    try:
        grid = PhaseSpaceGrid(*map(float, bounds), res[0], res[1])
    except (TypeError, ValueError) as exc:
        raise ScenarioError(str(exc), "phase_space") from exc
    snaps = ps.get("snapshot_times", [t_max])
    if not isinstance(snaps, list):
        raise ScenarioError("phase_space.snapshot_times must be a list", "phase_space.snapshot_times")
    times = [_check_time(t, t_max, f"phase_space.snapshot_times[{i}]") for i, t in enumerate(snaps)]
    return PhaseSpaceRequest(which, grid, times)


def load_scenario(path: str | Path) -> Scenario:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})",
                            line=exc.lineno) from exc
    return parse_scenario(data)
