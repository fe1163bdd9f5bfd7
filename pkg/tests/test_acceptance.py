"""Desk-scale acceptance battery.

Each test covers one published criterion and prints a single PASS/FAIL line
with its runtime.  Runtimes are diagnostics, not assertions.
"""

import sys
import time

import numpy as np
import pytest

from conftest import random_almost, random_co_ham, sin_y_isotopy
from cokinetic.cli import run as run_scenario
from cokinetic.conformal import (
    verify_composed_conformal_factor,
    verify_conjugated_conformal_factor,
    verify_inverse_conformal_factor,
    verify_reeb_pairing_composition,
    verify_reeb_pairing_inverse,
)
from cokinetic.fixpoints import (
    basis_forms,
    find_fixed_points,
    mean_winding_integral,
    winding_at_fixed_points,
)
from cokinetic.isotopy import (
    CoIsotopy,
    Generator,
    Translation,
    check_cosymplectic,
    compose_isotopies,
    conjugate_isotopy,
    flux_identity_residual,
    inverse_isotopy,
    orbit_energy_profile,
    orbit_energy_report,
    verify_generator_identity,
)
from cokinetic.lift import check_symplectic, lift_isotopy, section_differentials_agree
from cokinetic.manifold import (
    FourierScalar,
    ModelSpec,
    OneFormField,
    exterior_derivative,
    hodge_split,
)
from cokinetic.norms import length_L1inf, length_Linf
from cokinetic.reparam import ReparamCurve, boundary_flatten, flatten_curve, \
    normalized_flatten, reparametrize, verify_rl2
from cokinetic.scenario import parse_scenario

MODEL = ModelSpec(n=1, z_topology="circle")


class _Stamp:
    def __init__(self, index, label):
        self.index = index
        self.label = label
        self.t0 = time.perf_counter()

    def done(self, ok):
        elapsed = time.perf_counter() - self.t0
        verdict = "PASS" if ok else "FAIL"
        print(f"[criterion {self.index:2d}] {self.label}: {verdict} "
              f"({elapsed:.1f}s)", file=sys.__stdout__, flush=True)
        return ok


def test_criterion_01_group_algebra_identities():
    stamp = _Stamp(1, "group algebra identities, 100 random generators")
    rng = np.random.default_rng(101)
    worst = 0.0
    isotopies = [random_co_ham(MODEL, rng, steps=1024, max_terms=6)
                 for _ in range(100)]
    for i, iso in enumerate(isotopies):
        rep = verify_generator_identity(iso, samples=64, rng=rng)
        worst = max(worst, max(rep.residuals.values()))
        if i % 5 == 0:
            rep = verify_generator_identity(inverse_isotopy(iso), samples=16,
                                            rng=rng, model=MODEL)
            worst = max(worst, max(rep.residuals.values()))
        if i % 5 == 1:
            other = isotopies[(i + 7) % 100]
            rep = verify_generator_identity(compose_isotopies(iso, other),
                                            samples=16, rng=rng, model=MODEL)
            worst = max(worst, max(rep.residuals.values()))
        if i % 5 == 2:
            rho = Translation(offset=rng.uniform(0, 2 * np.pi, 3))
            rep = verify_generator_identity(conjugate_isotopy(iso, rho),
                                            samples=16, rng=rng, model=MODEL)
            worst = max(worst, max(rep.residuals.values()))
        if i % 5 == 3:
            rep = check_cosymplectic(iso, samples=8)
            worst = max(worst, max(rep.residuals.values()))
    ok = worst <= 1e-5
    assert stamp.done(ok), f"worst residual {worst:.3e}"


def test_criterion_02_conformal_identities():
    stamp = _Stamp(2, "conformal factor identities, 50 almost scenarios")
    rng = np.random.default_rng(102)
    worst = 0.0
    for i in range(50):
        iso = random_almost(MODEL, rng)
        fact = 6 + i % 5
        if fact == 6:
            rep = verify_inverse_conformal_factor(iso, samples=8, rng=rng, tol=1e-5)
        elif fact == 7:
            rep = verify_composed_conformal_factor(
                iso, random_almost(MODEL, rng), samples=8, rng=rng, tol=1e-5)
        elif fact == 8:
            rho = Translation(offset=rng.uniform(0, 2 * np.pi, 3))
            rep = verify_conjugated_conformal_factor(iso, rho, samples=8,
                                                     rng=rng, tol=1e-5)
        elif fact == 9:
            rep = verify_reeb_pairing_composition(
                iso, random_almost(MODEL, rng), samples=8, rng=rng, tol=1e-5)
        else:
            rep = verify_reeb_pairing_inverse(iso, samples=8, rng=rng, tol=1e-5)
        worst = max(worst, max(rep.residuals.values()))
    ok = worst <= 1e-5
    assert stamp.done(ok), f"worst residual {worst:.3e}"


def test_criterion_03_orbit_energy():
    stamp = _Stamp(3, "orbit energy conservation and line-topology slope")
    rng = np.random.default_rng(103)
    ok = True
    for _ in range(5):
        iso = random_co_ham(MODEL, rng, steps=1024)
        p = rng.uniform(0, 2 * np.pi, 3)
        rep = orbit_energy_report(iso, p, np.linspace(0, 1, 21), tol=1e-8)
        ok = ok and rep.passed
    line = ModelSpec(n=1, z_topology="line")
    gen = Generator.autonomous(line, [((0, 1, 0), 0.0, 1.0)], z_slope=0.3)
    iso = CoIsotopy(model=line, generator=gen, kind="coHamiltonian", steps=1024)
    grid = np.linspace(0, 1, 21)
    prof = orbit_energy_profile(iso, np.array([0.2, 1.4, 0.5]), grid)
    vals = np.array([v for _, v in prof])
    slope = np.polyfit(grid, vals, 1)[0]
    linear_defect = np.max(np.abs(vals - (vals[0] + 0.09 * grid)))
    ok = ok and abs(slope - 0.09) <= 1e-8 and linear_defect <= 1e-8
    assert stamp.done(ok), (slope, linear_defect)


def test_criterion_04_length_axioms():
    stamp = _Stamp(4, "co-Hofer length axioms and the sin anchor")
    rng = np.random.default_rng(104)
    ok = True
    for _ in range(5):
        iso = random_co_ham(MODEL, rng, steps=1024)
        l_fwd = length_L1inf(iso).value
        ok = ok and abs(l_fwd - length_L1inf(inverse_isotopy(iso)).value) <= 1e-6
        rho = Translation(offset=rng.uniform(0, 2 * np.pi, 3))
        ok = ok and abs(l_fwd -
                        length_L1inf(conjugate_isotopy(iso, rho)).value) <= 1e-6
        curve = ReparamCurve.polynomial((0.0, 0.0, 1.0))
        ok = ok and abs(l_fwd -
                        length_L1inf(reparametrize(iso, curve)).value) <= 1e-6
        sup_speed = 2.0  # max derivative of t^2 on [0, 1]
        ok = ok and (length_Linf(reparametrize(iso, curve)).value <=
                     sup_speed * length_Linf(iso).value + 1e-8)
    anchor = length_L1inf(sin_y_isotopy(MODEL, steps=64))
    lo, hi = anchor.enclosure
    ok = ok and lo <= 2.0 + 1e-12 <= hi and hi - lo <= 1e-3
    ok = ok and abs(length_Linf(sin_y_isotopy(MODEL, steps=64)).value - 2.0) <= 1e-6
    assert stamp.done(ok)


def test_criterion_05_rl2_bound():
    stamp = _Stamp(5, "reparameterization distance bound, 100 trials")
    rng = np.random.default_rng(105)

    def random_curve():
        if rng.uniform() < 0.3:
            return flatten_curve(float(rng.uniform(0.05, 0.8)))
        w = rng.dirichlet(np.ones(3))
        return ReparamCurve.polynomial((0.0, w[0], w[1], w[2]))

    failures = 0
    for _ in range(100):
        iso = random_co_ham(MODEL, rng, steps=512)
        rep = verify_rl2(iso, random_curve(), random_curve())
        failures += 0 if rep.passed else 1
    assert stamp.done(failures == 0), f"{failures} failures"


def test_criterion_06_flattening_constructions():
    stamp = _Stamp(6, "boundary flattening constructions at eps 0.1 and 0.01")
    rng = np.random.default_rng(106)
    ok = True
    for eps in (0.1, 0.01):
        for _ in range(10):
            iso = random_co_ham(MODEL, rng, steps=512)
            flat, rep = boundary_flatten(iso, epsilon=eps)
            ok = ok and rep.passed and rep.residuals["endpoint_gap"] <= 1e-8
            _, norm_rep = normalized_flatten(iso, epsilon=eps)
            ok = ok and norm_rep.passed
    assert stamp.done(ok)


def test_criterion_07_symplectization_lift():
    stamp = _Stamp(7, "symplectization lift, 20 scenarios")
    rng = np.random.default_rng(107)
    t_grid = tuple(np.linspace(0.125, 1.0, 8))
    ok = True
    worst = 0.0
    for i in range(20):
        if i % 2 == 0:
            iso = random_co_ham(MODEL, rng, steps=1024)
        else:
            base = random_co_ham(MODEL, rng, steps=1024)
            from cokinetic.isotopy import ReebComponent

            iso = CoIsotopy(model=MODEL, generator=base.generator,
                            reeb=ReebComponent.constant(float(rng.uniform(-0.5, 0.5))),
                            kind="cosymplectic", steps=1024)
        li = lift_isotopy(iso)
        rep = check_symplectic(li, samples=32, t_grid=t_grid, rng=rng)
        worst = max(worst, rep.residuals["max_symplectic_residual"])
        ok = ok and rep.passed
        ok = ok and section_differentials_agree(iso, float(rng.uniform(0, 1)))
        if iso.kind == "coHamiltonian":
            pts = rng.uniform(0, 2 * np.pi, size=(8, 4))
            theta_gap = np.max(np.abs(li.point(pts, 1.0)[:, -1] - pts[:, -1]))
            ok = ok and theta_gap <= 1e-14
    assert stamp.done(ok and worst <= 1e-5), f"worst residual {worst:.3e}"


def test_criterion_08_fixed_points():
    stamp = _Stamp(8, "fixed point search")
    gen = Generator.autonomous(MODEL, [((1, 0, 0), 0.1, 0.0), ((0, 1, 0), 0.1, 0.0)])
    iso = CoIsotopy(model=MODEL, generator=gen, kind="coHamiltonian", steps=1024)
    fps = find_fixed_points(iso)
    ok = fps.count == 4 and all(c["residual"] <= 1e-10 for c in fps.components)
    rng = np.random.default_rng(108)
    for _ in range(25):
        small = random_co_ham(MODEL, rng, steps=512, amplitude=0.15)
        ok = ok and find_fixed_points(small).count >= 1
    assert stamp.done(ok)


def test_criterion_09_winding_flux():
    stamp = _Stamp(9, "winding and flux invariants at resolution 64")
    rng = np.random.default_rng(109)
    iso = random_co_ham(MODEL, rng, steps=1024)
    ok = True
    for alpha in basis_forms(MODEL):
        rep = mean_winding_integral(iso, alpha, resolution=64, tol_quad=1e-5)
        ok = ok and rep.passed and rep.residuals["abs_mean"] <= 1e-5
    wrep = winding_at_fixed_points(random_co_ham(MODEL, rng, steps=1024,
                                                 amplitude=0.15))
    ok = ok and wrep.passed and wrep.residuals["max_winding"] <= 1e-6
    for alpha in basis_forms(MODEL)[:2]:
        ok = ok and flux_identity_residual(iso, alpha, resolution=64) <= 1e-5
    assert stamp.done(ok)


def test_criterion_10_infrastructure():
    stamp = _Stamp(10, "determinism, integrator order, Hodge exactness")
    import json

    doc = {
        "schema": "cokinetic-scenario/1",
        "seed": 5,
        "model": {"n": 1, "z_topology": "circle"},
        "isotopies": {"w": {"kind": "coHamiltonian",
                            "generator": {"terms": [{"k": [1, 0, 0], "a": [0.4]},
                                                    {"k": [0, 1, 0], "b": [0.7]}]}}},
        "tasks": [{"command": "length", "isotopy": "w", "name": "l"},
                  {"command": "verify_generator", "isotopy": "w", "name": "g"},
                  {"command": "fixed_points", "isotopy": "w", "name": "f"}],
    }
    a = json.dumps(run_scenario(parse_scenario(doc)).to_dict(
        include_environment=False), sort_keys=True)
    b = json.dumps(run_scenario(parse_scenario(doc)).to_dict(
        include_environment=False), sort_keys=True)
    ok = a == b

    from conftest import random_trig_generator

    rng = np.random.default_rng(110)
    for _ in range(5):
        gen = random_trig_generator(MODEL, rng, max_terms=3)
        pts = rng.uniform(0, 2 * np.pi, size=(4, 3))

        def flow_at(steps):
            return CoIsotopy(model=MODEL, generator=gen, kind="coHamiltonian",
                             steps=steps).time1(pts)

        ref = flow_at(4096)
        errs = [np.max(np.abs(flow_at(s) - ref)) for s in (16, 32, 64)]
        if errs[0] < 1e-10:  # flow too close to exact for order estimation
            continue
        orders = [np.log2(errs[i] / errs[i + 1]) for i in range(2)]
        ok = ok and min(orders) >= 3.8

    U = FourierScalar.from_terms(3, [((1, 0, 0), 0.5, -0.2), ((1, 1, 0), 0.0, 0.3)])
    const = rng.uniform(-1, 1, 3)
    alpha = OneFormField.of(*[exterior_derivative(U).components[j] +
                              FourierScalar.constant(3, const[j])
                              for j in range(3)])
    harmonic, primitive = hodge_split(alpha)
    ok = ok and np.max(np.abs(harmonic.constant_part() - const)) <= 1e-13
    ok = ok and primitive.allclose(U.zero_mean(), tol=1e-13)
    assert stamp.done(ok)
