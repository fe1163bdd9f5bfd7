import numpy as np
import pytest

from conftest import random_almost, random_co_ham
from cokinetic.conformal import (
    inverse_transit,
    verify_composed_conformal_factor,
    verify_conjugated_conformal_factor,
    verify_inverse_conformal_factor,
    verify_reeb_pairing_composition,
    verify_reeb_pairing_inverse,
)
from cokinetic.errors import KindMismatch
from cokinetic.isotopy import Translation

TOL = 1e-5


def test_inverse_conformal_factor(model):
    rng = np.random.default_rng(21)
    iso = random_almost(model, rng)
    rep = verify_inverse_conformal_factor(iso, samples=8, rng=rng, tol=TOL)
    assert rep.passed, rep.residuals


def test_composed_conformal_factor(model):
    rng = np.random.default_rng(22)
    a = random_almost(model, rng)
    b = random_almost(model, rng)
    rep = verify_composed_conformal_factor(a, b, samples=8, rng=rng, tol=TOL)
    assert rep.passed, rep.residuals


def test_conjugated_conformal_factor(model):
    rng = np.random.default_rng(23)
    iso = random_almost(model, rng)
    rho = Translation(offset=np.array([0.5, 1.3, 0.8]))
    rep = verify_conjugated_conformal_factor(iso, rho, samples=8, rng=rng, tol=TOL)
    assert rep.passed, rep.residuals


def test_reeb_pairing_of_composition(model):
    rng = np.random.default_rng(24)
    a = random_almost(model, rng)
    b = random_almost(model, rng)
    rep = verify_reeb_pairing_composition(a, b, samples=8, rng=rng, tol=TOL)
    assert rep.passed, rep.residuals


def test_reeb_pairing_of_inverse(model):
    rng = np.random.default_rng(25)
    iso = random_almost(model, rng)
    rep = verify_reeb_pairing_inverse(iso, samples=8, rng=rng, tol=TOL)
    assert rep.passed, rep.residuals


def test_conformal_checks_need_reeb_component(model):
    rng = np.random.default_rng(26)
    iso = random_co_ham(model, rng, steps=64)
    with pytest.raises(KindMismatch):
        verify_inverse_conformal_factor(iso, samples=4)


def test_inverse_transit_inverts_flow(model):
    rng = np.random.default_rng(27)
    iso = random_almost(model, rng)
    pts = rng.uniform(0, 2 * np.pi, size=(6, 3))
    fwd = iso.point(pts, 0.7)
    back, exponent = inverse_transit(iso, fwd, 0.7)
    assert np.max(model.circular_distance(back, pts)) < 1e-7
    assert exponent.shape == (6,)
