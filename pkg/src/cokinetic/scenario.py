"""Scenario files: a JSON description of a model, named isotopies and curves,
and an ordered task list.

Schema version "cokinetic-scenario/1".  Validation reports problems with a
JSON-pointer path so a failing file can be fixed without reading tracebacks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError, SchemaError, UnknownNameError
from .manifold import ModelSpec
from .isotopy import MAX_POLY_DEGREE, CoIsotopy, Generator, ReebComponent
from .reparam import ReparamCurve

SCHEMA = "cokinetic-scenario/1"

DEFAULTS = {
    "tol_flow": 1e-8,
    "tol_quad": 1e-6,
    "steps": 1024,
    "osc_resolution": 256,
    "quadrature_grid": 64,
}

KNOWN_COMMANDS = (
    "length",
    "almost_length",
    "distance",
    "verify_generator",
    "verify_inverse",
    "verify_composition",
    "verify_conjugation",
    "check_cosymplectic",
    "conformal_fact",
    "lift_check",
    "fixed_points",
    "mean_winding",
    "winding_at_fixed_points",
    "boundary_flatten",
    "verify_rl2",
    "orbit_energy",
    "flux_identity",
)


@dataclass
class Scenario:
    model: ModelSpec
    isotopies: dict
    curves: dict
    tasks: list
    seed: int = 0
    defaults: dict = field(default_factory=lambda: dict(DEFAULTS))

    def isotopy(self, name: str) -> CoIsotopy:
        if name not in self.isotopies:
            raise UnknownNameError(f"unknown isotopy {name!r}")
        return self.isotopies[name]

    def curve(self, name: str) -> ReparamCurve:
        if name not in self.curves:
            raise UnknownNameError(f"unknown curve {name!r}")
        return self.curves[name]


def _expect(cond: bool, pointer: str, message: str):
    if not cond:
        raise SchemaError(pointer, message)


def _as_dict(obj, pointer):
    _expect(isinstance(obj, dict), pointer, "expected an object")
    return obj


def _parse_generator(data, spec: ModelSpec, pointer: str) -> Generator:
    data = _as_dict(data, pointer)
    terms = data.get("terms", [])
    _expect(isinstance(terms, list), f"{pointer}/terms", "expected an array")
    k_rows, a_rows, b_rows = [], [], []
    width = 1
    for i, term in enumerate(terms):
        tp = f"{pointer}/terms/{i}"
        term = _as_dict(term, tp)
        k = term.get("k")
        _expect(isinstance(k, list) and len(k) == spec.dim,
                f"{tp}/k", f"frequency vector must have length {spec.dim}")
        _expect(all(isinstance(v, int) for v in k), f"{tp}/k",
                "frequencies must be integers")
        a = term.get("a", [0.0])
        b = term.get("b", [0.0])
        for key, val in (("a", a), ("b", b)):
            _expect(isinstance(val, list) and
                    all(isinstance(v, (int, float)) for v in val),
                    f"{tp}/{key}", "amplitude polynomial must be a number array")
            _expect(len(val) <= MAX_POLY_DEGREE + 1, f"{tp}/{key}",
                    f"amplitude degree exceeds {MAX_POLY_DEGREE}")
        width = max(width, len(a), len(b))
        k_rows.append(k)
        a_rows.append(a)
        b_rows.append(b)
    k_arr = np.array(k_rows, np.int64) if k_rows else np.zeros((0, spec.dim), np.int64)
    a_arr = np.zeros((len(terms), width))
    b_arr = np.zeros((len(terms), width))
    for i in range(len(terms)):
        a_arr[i, :len(a_rows[i])] = a_rows[i]
        b_arr[i, :len(b_rows[i])] = b_rows[i]
    z_slope = data.get("z_slope", 0.0)
    _expect(isinstance(z_slope, (int, float)), f"{pointer}/z_slope",
            "z_slope must be a number")
    normalization = data.get("normalization", "zero-mean")
    _expect(normalization in ("zero-mean", "raw"), f"{pointer}/normalization",
            "normalization must be 'zero-mean' or 'raw'")
    try:
        return Generator(spec=spec, k=k_arr, a=a_arr, b=b_arr,
                         z_slope=float(z_slope), normalization=normalization)
    except Exception as exc:
        raise SchemaError(pointer, str(exc)) from exc


def _parse_reeb(data, pointer: str) -> ReebComponent:
    data = _as_dict(data, pointer)
    terms = data.get("terms", [])
    _expect(isinstance(terms, list) and terms, f"{pointer}/terms",
            "reeb component needs at least one term")
    kz, a_rows, b_rows = [], [], []
    width = 1
    for i, term in enumerate(terms):
        tp = f"{pointer}/terms/{i}"
        term = _as_dict(term, tp)
        freq = term.get("kz", 0)
        _expect(isinstance(freq, int) and freq >= 0, f"{tp}/kz",
                "kz must be a nonnegative integer")
        a = term.get("a", [0.0])
        b = term.get("b", [0.0])
        width = max(width, len(a), len(b))
        kz.append(freq)
        a_rows.append(a)
        b_rows.append(b)
    a_arr = np.zeros((len(terms), width))
    b_arr = np.zeros((len(terms), width))
    for i in range(len(terms)):
        a_arr[i, :len(a_rows[i])] = a_rows[i]
        b_arr[i, :len(b_rows[i])] = b_rows[i]
    try:
        return ReebComponent(kz=np.array(kz, np.int64), a=a_arr, b=b_arr)
    except Exception as exc:
        raise SchemaError(pointer, str(exc)) from exc


def _parse_isotopy(name, data, spec: ModelSpec, pointer: str) -> CoIsotopy:
    data = _as_dict(data, pointer)
    kind = data.get("kind", "coHamiltonian")
    steps = data.get("steps", DEFAULTS["steps"])
    _expect(isinstance(steps, int) and steps >= 2, f"{pointer}/steps",
            "steps must be an integer >= 2")
    _expect("generator" in data, pointer, "isotopy needs a generator")
    gen = _parse_generator(data["generator"], spec, f"{pointer}/generator")
    reeb = None
    if data.get("reeb") is not None:
        reeb = _parse_reeb(data["reeb"], f"{pointer}/reeb")
    if kind == "coHamiltonian" and gen.k.size and gen.k[:, -1].any():
        raise SchemaError(f"{pointer}/generator",
                          "z-dependence forbidden for co-Hamiltonian kind")
    try:
        return CoIsotopy(model=spec, generator=gen, reeb=reeb, kind=kind,
                         steps=steps)
    except Exception as exc:
        raise SchemaError(pointer, str(exc)) from exc


def _parse_curve(data, pointer: str) -> ReparamCurve:
    data = _as_dict(data, pointer)
    kind = data.get("kind")
    _expect(kind in ("identity", "polynomial", "smooth-plateau"), f"{pointer}/kind",
            "curve kind must be identity, polynomial or smooth-plateau")
    params = data.get("params", [])
    _expect(isinstance(params, list) and
            all(isinstance(v, (int, float)) for v in params),
            f"{pointer}/params", "params must be a number array")
    try:
        return ReparamCurve(kind=kind, params=tuple(float(v) for v in params))
    except Exception as exc:
        raise SchemaError(pointer, str(exc)) from exc


def parse_scenario(data: dict) -> Scenario:
    """Validate a decoded JSON document and build the Scenario."""
    data = _as_dict(data, "/")
    _expect(data.get("schema") == SCHEMA, "/schema",
            f"expected schema {SCHEMA!r}")
    model_data = _as_dict(data.get("model", {}), "/model")
    n = model_data.get("n", 1)
    _expect(isinstance(n, int) and n >= 1, "/model/n", "n must be a positive integer")
    topo = model_data.get("z_topology", "circle")
    _expect(topo in ("circle", "line"), "/model/z_topology",
            "z_topology must be 'circle' or 'line'")
    spec = ModelSpec(n=n, z_topology=topo)

    seed = data.get("seed", 0)
    _expect(isinstance(seed, int), "/seed", "seed must be an integer")

    defaults = dict(DEFAULTS)
    overrides = _as_dict(data.get("defaults", {}), "/defaults")
    for key, val in overrides.items():
        _expect(key in DEFAULTS, f"/defaults/{key}", "unknown default")
        _expect(isinstance(val, (int, float)) and val > 0, f"/defaults/{key}",
                "defaults must be positive numbers")
        defaults[key] = val

    isotopies = {}
    for name, iso_data in _as_dict(data.get("isotopies", {}), "/isotopies").items():
        isotopies[name] = _parse_isotopy(name, iso_data, spec,
                                         f"/isotopies/{name}")
    curves = {}
    for name, cdata in _as_dict(data.get("curves", {}), "/curves").items():
        curves[name] = _parse_curve(cdata, f"/curves/{name}")
    _expect(not set(isotopies) & set(curves), "/curves",
            "isotopy and curve names must not collide")

    tasks = []
    raw_tasks = data.get("tasks", [])
    _expect(isinstance(raw_tasks, list), "/tasks", "expected an array")
    names = set()
    for i, task in enumerate(raw_tasks):
        tp = f"/tasks/{i}"
        task = _as_dict(task, tp)
        command = task.get("command")
        _expect(command in KNOWN_COMMANDS, f"{tp}/command",
                f"unknown command {command!r}")
        name = task.get("name", f"task{i}")
        _expect(name not in names, f"{tp}/name", f"duplicate task name {name!r}")
        names.add(name)
        tol = task.get("tolerances", {})
        tol = _as_dict(tol, f"{tp}/tolerances")
        for key, val in tol.items():
            _expect(isinstance(val, (int, float)) and val > 0,
                    f"{tp}/tolerances/{key}", "tolerances must be positive")
        for key in ("isotopy", "a", "b", "other"):
            if key in task:
                ref = task[key]
                if ref not in isotopies:
                    raise UnknownNameError(
                        f"{tp}/{key}: unknown isotopy {ref!r}")
        for key in ("curve", "curve_a", "curve_b"):
            if key in task:
                ref = task[key]
                if ref not in curves:
                    raise UnknownNameError(f"{tp}/{key}: unknown curve {ref!r}")
        tasks.append(dict(task, name=name))

    return Scenario(model=spec, isotopies=isotopies, curves=curves,
                    tasks=tasks, seed=seed, defaults=defaults)


def load_scenario(path) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return parse_scenario(data)
