import numpy as np
import pytest

from conftest import random_co_ham, sin_y_isotopy
from cokinetic.errors import KindMismatch, UnsupportedModel
from cokinetic.fixpoints import (
    basis_forms,
    check_fix_lower_bound,
    find_fixed_points,
    fixed_point_points,
    gamma_lower_bound,
    mean_winding_integral,
    winding_at_fixed_points,
)
from cokinetic.isotopy import CoIsotopy, Generator, identity_isotopy


def morse_isotopy(model, steps=1024):
    gen = Generator.autonomous(model, [((1, 0, 0), 0.1, 0.0), ((0, 1, 0), 0.1, 0.0)])
    return CoIsotopy(model=model, generator=gen, kind="coHamiltonian", steps=steps)


def test_morse_flow_has_four_components(model):
    fps = find_fixed_points(morse_isotopy(model))
    assert fps.count == 4
    assert all(c["residual"] <= 1e-10 for c in fps.components)
    # critical points of 0.1(cos x + cos y) sit on the half-period lattice
    reps = np.array([c["representative"][:2] for c in fps.components])
    lattice = np.round(reps / np.pi) * np.pi
    assert np.max(np.abs(reps - lattice)) <= 1e-6


def test_degenerate_tori_merge_into_components(model):
    # F = sin(y): Fix is two tori y in {pi/2, 3pi/2}, found as 2 components
    fps = find_fixed_points(sin_y_isotopy(model))
    assert fps.count == 2
    ys = sorted(c["representative"][1] for c in fps.components)
    assert ys[0] == pytest.approx(np.pi / 2, abs=1e-6)
    assert ys[1] == pytest.approx(3 * np.pi / 2, abs=1e-6)


def test_identity_flagged(model):
    fps = find_fixed_points(identity_isotopy(model, steps=64))
    assert fps.identity_map


def test_random_small_isotopies_have_fixed_points(model):
    rng = np.random.default_rng(61)
    for _ in range(3):
        iso = random_co_ham(model, rng, steps=512, amplitude=0.2)
        assert find_fixed_points(iso).count >= 1


def test_gamma_bracket_values(model):
    circle = gamma_lower_bound(model, "circle")
    assert (circle.lower, circle.upper) == (1, 2)
    interval = gamma_lower_bound(model, "interval")
    assert (interval.lower, interval.upper) == (1, 1)
    torus = gamma_lower_bound(model, "torus", k=2)
    assert (torus.lower, torus.upper) == (1, 5)
    with pytest.raises(ValueError):
        gamma_lower_bound(model, "torus")
    with pytest.raises(UnsupportedModel):
        gamma_lower_bound(model, "sphere")


def test_fix_lower_bound_check(model):
    rep = check_fix_lower_bound(morse_isotopy(model))
    assert rep.passed
    assert rep.residuals["component_count"] >= rep.details["gamma_lower"]


def test_fix_lower_bound_needs_circle_co_hamiltonian(line_model):
    gen = Generator.autonomous(line_model, [((0, 1, 0), 0.0, 0.1)])
    iso = CoIsotopy(model=line_model, generator=gen, kind="coHamiltonian", steps=64)
    with pytest.raises(KindMismatch):
        check_fix_lower_bound(iso)


def test_windings_vanish_at_fixed_points(model):
    rep = winding_at_fixed_points(morse_isotopy(model))
    assert rep.passed
    assert rep.residuals["max_winding"] <= 1e-6


def test_mean_winding_bracketing(model):
    iso = sin_y_isotopy(model)
    for alpha in basis_forms(model):
        rep = mean_winding_integral(iso, alpha, resolution=32)
        assert rep.passed
        assert rep.residuals["abs_mean"] <= 1e-6
        assert rep.residuals["min_delta"] <= 1e-8
        assert rep.residuals["max_delta"] >= -1e-8


def test_mean_winding_requires_co_hamiltonian(model):
    from cokinetic.isotopy import ReebComponent

    gen = Generator.autonomous(model, [((0, 1, 0), 0.0, 0.2)])
    iso = CoIsotopy(model=model, generator=gen, reeb=ReebComponent.constant(0.3),
                    kind="cosymplectic", steps=64)
    with pytest.raises(KindMismatch):
        mean_winding_integral(iso, basis_forms(model)[2], resolution=8)


def test_fixed_point_points_wraps(model):
    fps = find_fixed_points(morse_isotopy(model))
    pts = fixed_point_points(fps, model)
    assert len(pts) == 4
    for p in pts:
        arr = p.as_array()
        assert np.all(arr >= 0) and np.all(arr < 2 * np.pi)
