import numpy as np
import pytest

from conftest import random_almost, random_co_ham, sin_y_isotopy
from cokinetic.errors import KindMismatch, NoValidCandidate
from cokinetic.isotopy import (
    CoIsotopy,
    Generator,
    ReebComponent,
    Translation,
    conjugate_isotopy,
    identity_isotopy,
    inverse_isotopy,
)
from cokinetic.manifold import FourierScalar, OneFormField, exterior_derivative
from cokinetic.norms import (
    aco_norm,
    almost_length,
    almost_length_of_inverse,
    c0_distance,
    cauchy_report,
    distance_AH,
    distance_CH,
    energy_upper_bound,
    field_data_at,
    length_L1inf,
    length_Linf,
    path_distance,
    theta_of_field,
)


def t_sin_isotopy(model, steps=1024):
    # F_t = t sin(y): integral of osc is 1, sup of osc is 2
    gen = Generator(spec=model, k=np.array([[0, 1, 0]]),
                    a=np.zeros((1, 2)), b=np.array([[0.0, 1.0]]))
    return CoIsotopy(model=model, generator=gen, kind="coHamiltonian", steps=steps)


def test_length_of_sine_is_two(model):
    rep = length_L1inf(sin_y_isotopy(model, steps=64))
    lo, hi = rep.enclosure
    assert lo <= 2.0 + 1e-12 and hi >= 2.0 - 1e-12
    assert rep.value == pytest.approx(2.0, abs=1e-6)
    assert hi - lo <= 1e-3


def test_flavors_differ_for_time_dependent_generator(model):
    iso = t_sin_isotopy(model, steps=64)
    assert length_L1inf(iso).value == pytest.approx(1.0, abs=1e-3)
    assert length_Linf(iso).value == pytest.approx(2.0, abs=1e-3)


def test_length_symmetry_under_inverse(model):
    rng = np.random.default_rng(41)
    iso = random_co_ham(model, rng, steps=512)
    fwd = length_L1inf(iso).value
    bwd = length_L1inf(inverse_isotopy(iso)).value
    assert abs(fwd - bwd) <= 1e-6


def test_length_conjugation_invariance(model):
    rng = np.random.default_rng(42)
    iso = random_co_ham(model, rng, steps=512)
    conj = conjugate_isotopy(iso, Translation(offset=np.array([1.1, 0.4, 2.0])))
    assert abs(length_L1inf(iso).value - length_L1inf(conj).value) <= 1e-6


def test_length_requires_co_hamiltonian_kind(model):
    rng = np.random.default_rng(43)
    iso = random_almost(model, rng)
    with pytest.raises(KindMismatch):
        length_L1inf(iso)


def test_distance_vanishes_on_equal_paths(model):
    rng = np.random.default_rng(44)
    iso = random_co_ham(model, rng, steps=64)
    assert distance_CH(iso, iso) == pytest.approx(0.0, abs=1e-14)


def test_distance_of_generator_gap(model):
    # D(sin(y), 0) is just the length of sin(y)
    iso = sin_y_isotopy(model, steps=64)
    ident = identity_isotopy(model, steps=64)
    assert distance_CH(iso, ident) == pytest.approx(2.0, abs=1e-3)


def test_aco_norm_of_reeb_field(model):
    # the Reeb field: i(xi)omega = 0, eta(xi) = 1, so the norm is Theta = 1
    zero = OneFormField.zero(3)
    one = FourierScalar.constant(3, 1.0)
    assert aco_norm(model, zero, one) == pytest.approx(1.0)
    assert theta_of_field(model, one) == pytest.approx(1.0)


def test_aco_norm_of_hamiltonian_field(model):
    F = FourierScalar.from_terms(3, [((0, 1, 0), 0.0, 1.0)])
    assert aco_norm(model, exterior_derivative(F), FourierScalar.zero(3)) == \
        pytest.approx(2.0, abs=1e-3)


def test_almost_length_adds_reeb_drift(model):
    # osc(sin y) = 2 plus |mean c| = 0.3 integrated in time
    gen = Generator.autonomous(model, [((0, 1, 0), 0.0, 1.0)])
    iso = CoIsotopy(model=model, generator=gen, reeb=ReebComponent.constant(0.3),
                    kind="almostCoHamiltonian", steps=64)
    rep = almost_length(iso)
    assert rep.value == pytest.approx(2.3, abs=1e-3)


def test_almost_length_symmetric_under_inverse(model):
    rng = np.random.default_rng(45)
    iso = random_almost(model, rng)
    fwd = almost_length(iso).value
    bwd = almost_length_of_inverse(iso).value
    assert abs(fwd - bwd) <= 1e-6


def test_distance_ah_of_constant_drift_gap(model):
    gen = Generator.autonomous(model, [((0, 1, 0), 0.0, 1.0)])
    a = CoIsotopy(model=model, generator=gen, reeb=ReebComponent.constant(0.5),
                  kind="almostCoHamiltonian", steps=64)
    b = CoIsotopy(model=model, generator=gen, reeb=ReebComponent.constant(0.3),
                  kind="almostCoHamiltonian", steps=64)
    assert distance_AH(a, b) == pytest.approx(0.2, abs=1e-3)


def test_c0_distance_of_translations(model):
    shift = np.array([0.4, 0.0, 0.0])
    f = Translation(offset=shift)
    g = Translation(offset=np.zeros(3))
    assert c0_distance(f, g, model) == pytest.approx(0.4, abs=1e-12)


def test_path_distance_bounds_endpoint_gap(model):
    rng = np.random.default_rng(46)
    a = random_co_ham(model, rng, steps=128)
    b = identity_isotopy(model, steps=128)
    endpoint = c0_distance(a.time1, b.time1, model)
    assert path_distance(a, b) >= endpoint - 1e-12


def test_energy_upper_bound_picks_cheapest_candidate(model):
    iso = sin_y_isotopy(model, steps=128)
    # the same time-1 map generated twice as fast on [0, 1/2] has equal length
    val = energy_upper_bound(iso, [iso])
    assert val == pytest.approx(2.0, abs=1e-3)
    with pytest.raises(NoValidCandidate):
        energy_upper_bound(iso, [identity_isotopy(model, steps=64)])


def test_cauchy_report_margin(model):
    # an alternating sequence is not Cauchy: the margin stays at full size
    plus = sin_y_isotopy(model, steps=64)
    minus = CoIsotopy(model=model,
                      generator=Generator.autonomous(model, [((0, 1, 0), 0.0, -1.0)]),
                      kind="coHamiltonian", steps=64)
    diag = cauchy_report([plus, minus, plus, minus])
    assert diag.cauchy_margin == pytest.approx(4.0, abs=1e-2)
    assert np.allclose(diag.pairwise_D, diag.pairwise_D.T)


def test_field_data_matches_generator(model):
    iso = sin_y_isotopy(model, steps=64)
    alpha, eta_part = field_data_at(iso, 0.5)
    assert alpha.components[1].allclose(
        FourierScalar.from_terms(3, [((0, 1, 0), 1.0, 0.0)]))
    assert eta_part.is_zero()
