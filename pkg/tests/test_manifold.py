import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cokinetic.errors import NotClosed, UnboundedDomain
from cokinetic.manifold import (
    FourierScalar,
    ModelSpec,
    OneFormField,
    exterior_derivative,
    hodge_split,
    integrate,
    l2_norm_harmonic,
    osc,
)

DIM = 3


def trig_reference(pts, terms):
    out = np.zeros(pts.shape[0])
    for k, a, b in terms:
        phase = pts @ np.asarray(k, float)
        out += a * np.cos(phase) + b * np.sin(phase)
    return out


def test_evaluation_matches_reference():
    rng = np.random.default_rng(0)
    terms = [((1, 0, 0), 0.3, -0.2), ((0, 2, 0), 0.0, 1.1), ((1, -1, 1), 0.5, 0.0)]
    F = FourierScalar.from_terms(DIM, terms)
    pts = rng.uniform(0, 2 * np.pi, size=(40, DIM))
    assert np.allclose(F(pts), trig_reference(pts, terms), atol=1e-14)


def test_gradient_is_exact():
    terms = [((1, 0, 0), 0.3, -0.2), ((0, 2, 1), 0.0, 1.1)]
    F = FourierScalar.from_terms(DIM, terms)
    rng = np.random.default_rng(1)
    pts = rng.uniform(0, 2 * np.pi, size=(10, DIM))
    grad = F.gradient_at(pts)
    h = 1e-6
    for j in range(DIM):
        shifted = pts.copy()
        shifted[:, j] += h
        shifted2 = pts.copy()
        shifted2[:, j] -= h
        fd = (F(shifted) - F(shifted2)) / (2 * h)
        assert np.max(np.abs(grad[:, j] - fd)) < 1e-8


def test_partial_derivative_operator():
    F = FourierScalar.from_terms(DIM, [((0, 1, 0), 0.0, 1.0)])  # sin(y)
    dFdy = F.partial(1)
    pts = np.linspace(0, 2 * np.pi, 17)[:, None] * np.array([[0.0, 1.0, 0.0]])
    assert np.allclose(dFdy(pts), np.cos(pts[:, 1]), atol=1e-14)
    assert dFdy.partial(0).is_zero()


def test_mean_and_zero_mean():
    F = FourierScalar.from_terms(DIM, [((0, 0, 0), 2.5, 0.0), ((1, 0, 0), 1.0, 0.0)])
    assert F.mean() == pytest.approx(2.5)
    assert F.zero_mean().mean() == 0.0


def test_sup_bound_dominates_grid_sup():
    rng = np.random.default_rng(5)
    for _ in range(20):
        terms = [(tuple(rng.integers(-2, 3, DIM)),
                  float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1)))
                 for _ in range(4)]
        F = FourierScalar.from_terms(DIM, terms)
        pts = rng.uniform(0, 2 * np.pi, size=(500, DIM))
        assert F.sup_bound() >= np.max(np.abs(F(pts))) - 1e-12


def test_osc_of_sine_is_two():
    F = FourierScalar.from_terms(DIM, [((0, 1, 0), 0.0, 1.0)])
    enc = osc(F, resolution=256)
    assert enc.lo <= 2.0 <= enc.hi
    assert enc.width <= 1e-3
    assert enc.value == pytest.approx(2.0, abs=1e-3)


def test_osc_enclosure_brackets_truth():
    # osc(a cos x + b sin y) = 2(|a| + |b|)
    F = FourierScalar.from_terms(DIM, [((1, 0, 0), 0.7, 0.0), ((0, 1, 0), 0.0, -0.4)])
    enc = osc(F, resolution=256)
    assert enc.lo <= 2.2 <= enc.hi


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=-2, max_value=2),
       st.integers(min_value=-2, max_value=2),
       st.floats(min_value=-1, max_value=1, allow_nan=False),
       st.floats(min_value=-1, max_value=1, allow_nan=False))
def test_osc_enclosure_property(k1, k2, a, b):
    F = FourierScalar.from_terms(DIM, [((k1, k2, 0), a, b)])
    enc = osc(F, resolution=128)
    truth = 2.0 * np.hypot(a, b) if (k1, k2) != (0, 0) else 0.0
    assert enc.lo - 1e-12 <= truth <= enc.hi + 1e-12


def test_exterior_derivative_is_closed():
    F = FourierScalar.from_terms(DIM, [((1, 2, 0), 0.4, 0.1), ((0, 0, 1), 0.0, 0.3)])
    dF = exterior_derivative(F)
    assert dF.is_closed()
    assert dF.closedness_defect() <= 1e-15


def test_hodge_split_reconstruction_exact():
    rng = np.random.default_rng(9)
    U = FourierScalar.from_terms(DIM, [((1, 0, 0), 0.5, -0.2), ((1, 1, 0), 0.0, 0.3)])
    const = rng.uniform(-1, 1, DIM)
    alpha = OneFormField.of(*[exterior_derivative(U).components[j] +
                              FourierScalar.constant(DIM, const[j])
                              for j in range(DIM)])
    harmonic, primitive = hodge_split(alpha)
    assert np.allclose(harmonic.constant_part(), const, atol=1e-13)
    assert primitive.allclose(U.zero_mean(), tol=1e-13)


def test_hodge_split_rejects_non_closed():
    comps = [FourierScalar.from_terms(DIM, [((0, 1, 0), 0.0, 1.0)]),
             FourierScalar.zero(DIM), FourierScalar.zero(DIM)]
    with pytest.raises(NotClosed):
        hodge_split(OneFormField.of(*comps))


def test_l2_norm_of_constant_harmonic_form():
    spec = ModelSpec(n=1, z_topology="circle")
    h = OneFormField.of(FourierScalar.constant(DIM, 2.0),
                        FourierScalar.zero(DIM), FourierScalar.zero(DIM))
    assert l2_norm_harmonic(h, spec) == pytest.approx(2.0 * np.sqrt(spec.volume))


def test_integrate_constants_and_oscillations():
    spec = ModelSpec(n=1, z_topology="circle")
    F = FourierScalar.from_terms(DIM, [((0, 0, 0), 1.5, 0.0), ((2, 0, 0), 0.7, 0.0)])
    assert integrate(F, spec) == pytest.approx(1.5 * spec.volume)


def test_wrap_and_circular_distance():
    spec = ModelSpec(n=1, z_topology="circle")
    p = np.array([[0.1, 6.2, 2 * np.pi + 0.3]])
    q = np.array([[6.2, 0.1, 0.3]])
    d = spec.circular_distance(spec.wrap(p), spec.wrap(q))
    assert np.max(d) < 0.3
    assert np.all(spec.wrap(p) >= 0) and np.all(spec.wrap(p) < 2 * np.pi)


def test_line_model_volume_unbounded():
    spec = ModelSpec(n=1, z_topology="line")
    with pytest.raises(UnboundedDomain):
        spec.volume
