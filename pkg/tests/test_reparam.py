import numpy as np
import pytest

from conftest import random_co_ham, sin_y_isotopy
from cokinetic.errors import (
    InvalidEpsilon,
    NotCauchy,
    NotNormalized,
    RangeViolation,
)
from cokinetic.isotopy import CoIsotopy, Generator
from cokinetic.norms import length_L1inf, length_Linf
from cokinetic.reparam import (
    ReparamCurve,
    boundary_flatten,
    flatten_curve,
    ham_norm,
    is_boundary_flat,
    lipschitz_constants,
    normalized_flatten,
    reparametrize,
    verify_rl2,
    verify_rl3,
)


def test_ham_norm_anchors():
    # identity: sup 1 plus total variation 1
    assert ham_norm(ReparamCurve.identity()) == pytest.approx(2.0, abs=1e-6)
    # t^2 has the same sup and total variation
    square = ReparamCurve.polynomial((0.0, 0.0, 1.0))
    assert ham_norm(square) == pytest.approx(2.0, abs=1e-6)
    assert ham_norm(square - square) == pytest.approx(0.0, abs=1e-12)


def test_flatten_curve_shape():
    chi = flatten_curve(0.6)
    assert chi.delta == pytest.approx(1.0 / 13.0)
    assert chi.value(0.0) == 0.0
    assert chi.value(1.0) == pytest.approx(1.0, abs=1e-12)
    ts = np.linspace(0, 1, 2001)
    dv = chi.derivative(ts)
    assert np.all(dv >= -1e-14)
    assert np.max(dv) <= 1.0 / (1.0 - 3.0 * chi.delta) + 1e-9
    # flat plateaus at both ends
    assert np.all(np.abs(chi.value(np.linspace(0, chi.delta, 50))) < 1e-12)
    assert np.all(np.abs(chi.value(np.linspace(1 - chi.delta, 1, 50)) - 1.0) < 1e-12)


def test_flatten_curve_stays_near_identity_for_small_epsilon():
    eps = 0.06
    chi = flatten_curve(eps)
    ts = np.linspace(0, 1, 1001)
    assert np.max(np.abs(chi.value(ts) - ts)) <= eps / 2.0


def test_flatten_curve_epsilon_validation():
    for bad in (0.0, -0.1, 1.0, 2.0):
        with pytest.raises(InvalidEpsilon):
            flatten_curve(bad)


def test_curve_monotonicity_and_range():
    assert flatten_curve(0.2).is_monotone()
    assert flatten_curve(0.2).maps_into_unit()
    wiggly = ReparamCurve.polynomial((0.0, 3.0, -3.0, 1.0))
    assert wiggly.maps_into_unit()


def test_l1inf_length_is_reparam_invariant(model):
    rng = np.random.default_rng(51)
    iso = random_co_ham(model, rng, steps=512)
    base = length_L1inf(iso).value
    for curve in (ReparamCurve.polynomial((0.0, 0.0, 1.0)), flatten_curve(0.1)):
        again = length_L1inf(reparametrize(iso, curve)).value
        assert abs(base - again) <= 1e-6


def test_linf_length_scales_by_max_speed(model):
    rng = np.random.default_rng(52)
    iso = random_co_ham(model, rng, steps=512)
    base = length_Linf(iso).value
    square = ReparamCurve.polynomial((0.0, 0.0, 1.0))  # max derivative 2
    scaled = length_Linf(reparametrize(iso, square)).value
    assert scaled <= 2.0 * base + 1e-8


def test_lipschitz_constants_autonomous(model):
    iso = sin_y_isotopy(model, steps=64)
    lip = lipschitz_constants(iso)
    assert lip.k0 == pytest.approx(0.0, abs=1e-12)
    assert lip.c0 == pytest.approx(0.0, abs=1e-12)
    assert lip.C_of_F_eta >= 2.0  # at least 2 max osc envelope


def test_lipschitz_k0_of_linear_time_dependence(model):
    gen = Generator(spec=model, k=np.array([[0, 1, 0]]),
                    a=np.zeros((1, 2)), b=np.array([[0.0, 1.0]]))
    iso = CoIsotopy(model=model, generator=gen, kind="coHamiltonian", steps=64)
    # true Lipschitz constant in C0 norm is 1; the estimate inflates by 1.25
    k0 = lipschitz_constants(iso).k0
    assert 1.0 <= k0 <= 1.3


def test_rl2_bound_holds(model):
    rng = np.random.default_rng(53)
    iso = random_co_ham(model, rng, steps=512)
    rep = verify_rl2(iso, ReparamCurve.identity(), flatten_curve(0.3))
    assert rep.passed
    assert rep.residuals["lhs"] <= rep.residuals["rhs"]


def test_rl2_rejects_nonmonotone_curve(model):
    rng = np.random.default_rng(54)
    iso = random_co_ham(model, rng, steps=64)
    over = ReparamCurve.polynomial((0.0, 2.0))  # leaves [0, 1]
    with pytest.raises(RangeViolation):
        verify_rl2(iso, ReparamCurve.identity(), over)


def test_rl3_tail_stability(model):
    # a genuinely Cauchy sequence: scaled copies converging geometrically
    gen0 = Generator.autonomous(model, [((0, 1, 0), 0.0, 1.0)])
    seq = []
    for j in range(4):
        gen = Generator.autonomous(model, [((0, 1, 0), 0.0, 1.0 + 2.0 ** -(j + 3))])
        seq.append(CoIsotopy(model=model, generator=gen, kind="coHamiltonian",
                             steps=128))
    rep = verify_rl3(seq, epsilon=0.5)
    assert rep.passed
    assert rep.details["j0"] is not None


def test_rl3_detects_non_cauchy(model):
    plus = sin_y_isotopy(model, steps=64)
    minus = CoIsotopy(model=model,
                      generator=Generator.autonomous(model, [((0, 1, 0), 0.0, -1.0)]),
                      kind="coHamiltonian", steps=64)
    with pytest.raises(NotCauchy):
        verify_rl3([plus, minus, plus, minus], epsilon=0.5)


def test_boundary_flatten_certificates(model):
    rng = np.random.default_rng(55)
    iso = random_co_ham(model, rng, steps=512)
    flat, rep = boundary_flatten(iso, epsilon=0.1)
    assert rep.passed
    assert rep.residuals["distance"] < 0.1
    assert rep.residuals["path_distance"] < 0.1
    assert rep.residuals["endpoint_gap"] <= 1e-8
    assert is_boundary_flat(flat, rep.details["delta"])


def test_boundary_flatten_epsilon_validation(model):
    rng = np.random.default_rng(56)
    iso = random_co_ham(model, rng, steps=64)
    with pytest.raises(InvalidEpsilon):
        boundary_flatten(iso, epsilon=0.0)


def test_normalized_flatten_bounds(model):
    rng = np.random.default_rng(57)
    iso = random_co_ham(model, rng, steps=512)
    flat, rep = normalized_flatten(iso, epsilon=0.1)
    assert rep.passed
    assert all(rep.details["checks"].values())


def test_normalized_flatten_rejects_raw_generator(model):
    gen = Generator(spec=model, k=np.array([[0, 0, 0], [0, 1, 0]]),
                    a=np.array([[0.5], [0.0]]), b=np.array([[0.0], [1.0]]),
                    normalization="raw")
    iso = CoIsotopy(model=model, generator=gen, kind="coHamiltonian", steps=64)
    with pytest.raises(NotNormalized):
        normalized_flatten(iso, 0.1)


def test_reparametrized_endpoints_match(model):
    rng = np.random.default_rng(58)
    iso = random_co_ham(model, rng, steps=256)
    flat = reparametrize(iso, flatten_curve(0.2))
    pts = rng.uniform(0, 2 * np.pi, size=(6, 3))
    assert np.max(model.circular_distance(iso.time1(pts), flat.time1(pts))) <= 1e-10
