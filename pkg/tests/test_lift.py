import numpy as np
import pytest

from conftest import random_almost, random_co_ham, sin_y_isotopy
from cokinetic.errors import KindMismatch, NotAFixedPoint, UnsupportedModel
from cokinetic.isotopy import CoIsotopy, Generator, ReebComponent, identity_isotopy
from cokinetic.lift import (
    LiftedPoint,
    check_symplectic,
    fixed_point_correspondence,
    lift_isotopy,
    lifted_form_matrix,
    lifted_hamiltonian,
    section_differentials_agree,
)
from cokinetic.manifold import Point


def lifted_points(rng, count):
    pts = rng.uniform(0, 2 * np.pi, size=(count, 4))
    return pts


def test_identity_lift_is_identity(model):
    li = lift_isotopy(identity_isotopy(model, steps=64))
    rng = np.random.default_rng(31)
    pts = lifted_points(rng, 8)
    assert np.allclose(li.time1(pts), pts, atol=1e-14)


def test_co_hamiltonian_lift_has_trivial_rotation(model):
    rng = np.random.default_rng(32)
    li = lift_isotopy(random_co_ham(model, rng, steps=256))
    pts = lifted_points(rng, 8)
    out = li.point(pts, 0.8)
    assert np.max(np.abs(out[:, -1] - pts[:, -1])) <= 1e-14


def test_base_projection_commutes(model):
    rng = np.random.default_rng(33)
    iso = random_almost(model, rng)
    li = lift_isotopy(iso)
    pts = lifted_points(rng, 6)
    lifted = li.point(pts, 0.6)
    base = iso.point(pts[:, :3], 0.6)
    assert np.allclose(lifted[:, :3], base, atol=1e-14)


def test_lift_is_symplectic_co_hamiltonian(model):
    rng = np.random.default_rng(34)
    li = lift_isotopy(random_co_ham(model, rng, steps=512))
    rep = check_symplectic(li, samples=8, rng=rng)
    assert rep.passed
    assert rep.residuals["max_symplectic_residual"] <= 1e-5


def test_lift_is_symplectic_constant_reeb(model):
    rng = np.random.default_rng(35)
    gen = Generator.autonomous(model, [((0, 1, 0), 0.0, 0.5)])
    iso = CoIsotopy(model=model, generator=gen, reeb=ReebComponent.constant(0.4),
                    kind="cosymplectic", steps=512)
    rep = check_symplectic(lift_isotopy(iso), samples=8, rng=rng)
    assert rep.passed


def test_lifted_form_matrix_nondegenerate(model):
    omega = lifted_form_matrix(model)
    assert omega.shape == (4, 4)
    assert np.allclose(omega, -omega.T)
    assert abs(np.linalg.det(omega)) == pytest.approx(1.0)


def test_lifted_hamiltonian_section_value(model):
    iso = sin_y_isotopy(model, steps=64)
    lp = LiftedPoint(base=Point.from_array(np.array([0.0, np.pi / 2, 0.0]), model),
                     theta=1.7)
    # co-Hamiltonian: no Reeb term, the lift's Hamiltonian is F o p
    assert lifted_hamiltonian(iso, 0.0, lp) == pytest.approx(1.0)


def test_lifted_hamiltonian_needs_co_hamiltonian_kind(model):
    rng = np.random.default_rng(36)
    iso = random_almost(model, rng)
    lp = LiftedPoint(base=Point.from_array(np.zeros(3), model), theta=0.0)
    with pytest.raises(KindMismatch):
        lifted_hamiltonian(iso, 0.0, lp)


def test_section_differentials_agree_on_circle(model):
    rng = np.random.default_rng(37)
    iso = random_co_ham(model, rng, steps=64)
    assert section_differentials_agree(iso, 0.5)


def test_fixed_point_correspondence(model):
    # F = 0.1(cos x + cos y): the origin is a fixed point of the time-1 map
    gen = Generator.autonomous(model, [((1, 0, 0), 0.1, 0.0), ((0, 1, 0), 0.1, 0.0)])
    iso = CoIsotopy(model=model, generator=gen, kind="coHamiltonian", steps=512)
    li = lift_isotopy(iso)
    rep = fixed_point_correspondence(li, Point.from_array(np.zeros(3), model))
    assert rep.passed


def test_fixed_point_correspondence_rejects_moving_point(model):
    iso = sin_y_isotopy(model, steps=128)
    li = lift_isotopy(iso)
    with pytest.raises(NotAFixedPoint):
        fixed_point_correspondence(li, Point.from_array(np.zeros(3), model))


def test_line_topology_has_no_lift(line_model):
    gen = Generator.autonomous(line_model, [((0, 1, 0), 0.0, 1.0)])
    iso = CoIsotopy(model=line_model, generator=gen, kind="coHamiltonian", steps=64)
    with pytest.raises(UnsupportedModel):
        lift_isotopy(iso)
