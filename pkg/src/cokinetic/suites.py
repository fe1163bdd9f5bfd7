"""Packaged verification suites, built as in-memory scenarios.

Each suite is a reduced, deterministic slice of the full verification
programme, sized to run in seconds from the command line.
"""

from __future__ import annotations

import numpy as np

from .manifold import ModelSpec
from .isotopy import CoIsotopy, Generator, ReebComponent
from .reparam import flatten_curve, ReparamCurve
from .scenario import DEFAULTS, Scenario

SUITE_SEED = 20240811


def _model() -> ModelSpec:
    return ModelSpec(n=1, z_topology="circle")


def random_co_hamiltonian(model: ModelSpec, rng, max_terms: int = 4,
                          amplitude: float = 1.0, steps: int = 1024) -> CoIsotopy:
    """A random trig generator with frequencies in {-1,0,1}^2 x {0}."""
    terms = []
    for _ in range(int(rng.integers(1, max_terms + 1))):
        k = [int(rng.integers(-1, 2)), int(rng.integers(-1, 2)), 0]
        if not any(k):
            k[int(rng.integers(0, 2))] = 1
        terms.append((tuple(k), float(rng.uniform(-amplitude, amplitude)),
                      float(rng.uniform(-amplitude, amplitude))))
    gen = Generator.autonomous(model, terms)
    return CoIsotopy(model=model, generator=gen, kind="coHamiltonian", steps=steps)


def random_almost(model: ModelSpec, rng, steps: int = 1024) -> CoIsotopy:
    iso = random_co_hamiltonian(model, rng, amplitude=0.7, steps=steps)
    reeb = ReebComponent(
        kz=np.array([0, 1]),
        a=np.array([[float(rng.uniform(-0.3, 0.3))],
                    [float(rng.uniform(-0.25, 0.25))]]),
        b=np.array([[0.0], [float(rng.uniform(-0.25, 0.25))]]))
    return CoIsotopy(model=model, generator=iso.generator, reeb=reeb,
                     kind="almostCoHamiltonian", steps=steps)


def _scenario(isotopies: dict, tasks: list, curves: dict | None = None) -> Scenario:
    return Scenario(model=_model(), isotopies=isotopies, curves=curves or {},
                    tasks=tasks, seed=SUITE_SEED, defaults=dict(DEFAULTS))


def _algebra_suite() -> Scenario:
    rng = np.random.default_rng(SUITE_SEED)
    model = _model()
    isotopies = {f"rand{i}": random_co_hamiltonian(model, rng) for i in range(4)}
    tasks = []
    for i in range(4):
        tasks.append({"command": "verify_generator", "isotopy": f"rand{i}",
                      "name": f"generator_{i}"})
        tasks.append({"command": "verify_inverse", "isotopy": f"rand{i}",
                      "name": f"inverse_{i}"})
        tasks.append({"command": "check_cosymplectic", "isotopy": f"rand{i}",
                      "name": f"cosymplectic_{i}"})
    tasks.append({"command": "verify_composition", "a": "rand0", "b": "rand1",
                  "name": "composition_01"})
    tasks.append({"command": "verify_conjugation", "isotopy": "rand2",
                  "offset": [0.7, 1.9, 0.3], "name": "conjugation_2"})
    return _scenario(isotopies, tasks)


def _lengths_suite() -> Scenario:
    model = _model()
    sin_y = CoIsotopy(model=model,
                      generator=Generator.autonomous(model, [((0, 1, 0), 0.0, 1.0)]),
                      kind="coHamiltonian")
    t_sin = CoIsotopy(model=model,
                      generator=Generator(spec=model, k=np.array([[0, 1, 0]]),
                                          a=np.zeros((1, 2)),
                                          b=np.array([[0.0, 1.0]])),
                      kind="coHamiltonian")
    almost = CoIsotopy(model=model, generator=sin_y.generator,
                       reeb=ReebComponent.constant(0.3),
                       kind="almostCoHamiltonian")
    isotopies = {"sin_y": sin_y, "t_sin": t_sin, "almost": almost}
    tasks = [
        {"command": "length", "isotopy": "sin_y", "flavor": "L1inf",
         "expect": 2.0, "tol": 1e-3, "name": "length_sin"},
        {"command": "length", "isotopy": "t_sin", "flavor": "L1inf",
         "expect": 1.0, "tol": 1e-3, "name": "length_tsin_l1"},
        {"command": "length", "isotopy": "t_sin", "flavor": "Linf",
         "expect": 2.0, "tol": 1e-3, "name": "length_tsin_linf"},
        {"command": "almost_length", "isotopy": "almost",
         "expect": 2.3, "tol": 1e-3, "name": "almost_length"},
        {"command": "distance", "a": "sin_y", "b": "t_sin",
         "name": "distance_sin_tsin"},
    ]
    return _scenario(isotopies, tasks)


def _reparam_suite() -> Scenario:
    rng = np.random.default_rng(SUITE_SEED + 1)
    model = _model()
    isotopies = {f"rand{i}": random_co_hamiltonian(model, rng) for i in range(3)}
    curves = {
        "identity": ReparamCurve.identity(),
        "square": ReparamCurve.polynomial((0.0, 0.0, 1.0)),
        "plateau": flatten_curve(0.1),
    }
    tasks = []
    for i in range(3):
        tasks.append({"command": "verify_rl2", "isotopy": f"rand{i}",
                      "curve_a": "identity", "curve_b": "square",
                      "name": f"rl2_square_{i}"})
        tasks.append({"command": "verify_rl2", "isotopy": f"rand{i}",
                      "curve_a": "identity", "curve_b": "plateau",
                      "name": f"rl2_plateau_{i}"})
    tasks.append({"command": "boundary_flatten", "isotopy": "rand0",
                  "epsilon": 0.1, "name": "flatten_rand0"})
    return _scenario(isotopies, tasks, curves)


def _lift_suite() -> Scenario:
    rng = np.random.default_rng(SUITE_SEED + 2)
    model = _model()
    co_ham = random_co_hamiltonian(model, rng)
    cosymp = CoIsotopy(model=model, generator=co_ham.generator,
                       reeb=ReebComponent.constant(0.4), kind="cosymplectic")
    almost = random_almost(model, rng)
    isotopies = {"co_ham": co_ham, "cosymp": cosymp, "almost": almost}
    tasks = [
        {"command": "lift_check", "isotopy": "co_ham", "samples": 16,
         "name": "lift_co_ham"},
        {"command": "lift_check", "isotopy": "cosymp", "samples": 16,
         "name": "lift_cosymp"},
        {"command": "conformal_fact", "fact": 6, "isotopy": "almost",
         "samples": 8, "name": "conformal_inverse"},
        {"command": "conformal_fact", "fact": 10, "isotopy": "almost",
         "samples": 8, "name": "reeb_inverse"},
    ]
    return _scenario(isotopies, tasks)


def _fixpoints_suite() -> Scenario:
    model = _model()
    morse = CoIsotopy(model=model,
                      generator=Generator.autonomous(
                          model, [((1, 0, 0), 0.1, 0.0), ((0, 1, 0), 0.1, 0.0)]),
                      kind="coHamiltonian")
    sin_y = CoIsotopy(model=model,
                      generator=Generator.autonomous(model, [((0, 1, 0), 0.0, 1.0)]),
                      kind="coHamiltonian")
    isotopies = {"morse": morse, "sin_y": sin_y}
    tasks = [
        {"command": "fixed_points", "isotopy": "morse", "name": "fix_morse"},
        {"command": "winding_at_fixed_points", "isotopy": "morse",
         "name": "winding_fix"},
        {"command": "mean_winding", "isotopy": "sin_y", "form": 0, "grid": 32,
         "name": "mean_winding_dx"},
        {"command": "mean_winding", "isotopy": "sin_y", "form": 2, "grid": 32,
         "name": "mean_winding_dz"},
        {"command": "flux_identity", "isotopy": "sin_y", "form": 0, "grid": 32,
         "name": "flux_dx"},
        {"command": "orbit_energy", "isotopy": "morse",
         "point": [0.5, 1.2, 0.0], "name": "orbit_energy"},
    ]
    return _scenario(isotopies, tasks)


_SUITES = {
    "algebra": _algebra_suite,
    "lengths": _lengths_suite,
    "reparam": _reparam_suite,
    "lift": _lift_suite,
    "fixpoints": _fixpoints_suite,
}


def built_in_suite(name: str) -> Scenario:
    if name not in _SUITES:
        raise KeyError(f"unknown suite {name!r}; choices: {sorted(_SUITES)}")
    return _SUITES[name]()
