"""Time-dependent generators, co-Hamiltonian flows, and the isotopy algebra.

A generator is a Fourier field whose amplitudes are polynomials in time over
[0, 1].  The induced vector field is

    X_t = sum dF/dy_i d/dx_i - dF/dx_i d/dy_i + c(z, t) d/dz,

where the Reeb component c comes either from a z-linear part of F (line
topology) or from an explicitly declared Reeb series.  Flows are integrated
with fixed-step RK4; path integrals (windings, rotation numbers, conformal
exponents) accumulate alongside the integration with per-step Simpson rules
using a cubic-Hermite midpoint, so their defect matches the integrator order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import (
    InvalidDimension,
    KindMismatch,
    ModelMismatch,
    NonAutonomous,
    NotClosed,
)
from .manifold import (
    TWO_PI,
    FourierScalar,
    ModelSpec,
    OneFormField,
    OscEnclosure,
    Point,
    exterior_derivative,
    osc,
    pairing_I,
)
from .reports import VerificationReport
from ._kernels import transport, transport_with_jacobian

KINDS = ("coHamiltonian", "almostCoHamiltonian", "cosymplectic")

FD_SPACE = 1e-5          # spatial step for flow Jacobians / pullbacks
MAX_POLY_DEGREE = 6


def _poly_at(coeffs: np.ndarray, t) -> np.ndarray:
    """Evaluate rows of (K, D) polynomial coefficients at scalar or vector t."""
    if coeffs.shape[0] == 0:
        t_arr = np.asarray(t)
        shape = (0,) if t_arr.ndim == 0 else (t_arr.size, 0)
        return np.zeros(shape)
    out = npoly.polyval(t, coeffs.T)  # (K,) or (K, T)
    return out if np.asarray(t).ndim == 0 else out.T


@dataclass(frozen=True)
class Generator:
    """Fourier generator with polynomial-in-t amplitudes (degree <= 6)."""

    spec: ModelSpec
    k: np.ndarray            # (K, dim) integer frequencies
    a: np.ndarray            # (K, D) cosine amplitude polynomials, low->high
    b: np.ndarray            # (K, D) sine amplitude polynomials
    z_slope: float = 0.0     # line topology only: F includes z_slope * z
    normalization: str = "zero-mean"

    def __post_init__(self):
        k = np.atleast_2d(np.asarray(self.k, np.int64))
        a = np.atleast_2d(np.asarray(self.a, float))
        b = np.atleast_2d(np.asarray(self.b, float))
        if k.size == 0:
            k = np.zeros((0, self.spec.dim), np.int64)
            a = np.zeros((0, 1))
            b = np.zeros((0, 1))
        if k.shape[1] != self.spec.dim:
            raise InvalidDimension(
                f"frequency vectors have length {k.shape[1]}, expected {self.spec.dim}")
        if a.shape[0] != k.shape[0] or b.shape[0] != k.shape[0]:
            raise InvalidDimension("amplitude arrays must have one row per frequency")
        if max(a.shape[1], b.shape[1]) > MAX_POLY_DEGREE + 1:
            raise InvalidDimension("amplitude polynomials must have degree <= 6")
        D = max(a.shape[1], b.shape[1])
        a = np.pad(a, ((0, 0), (0, D - a.shape[1])))
        b = np.pad(b, ((0, 0), (0, D - b.shape[1])))
        k = k.copy()
        a = a.copy()
        b = b.copy()
        for i in range(k.shape[0]):
            nz = np.nonzero(k[i])[0]
            if nz.size == 0:
                b[i] = 0.0
            elif k[i, nz[0]] < 0:
                k[i] = -k[i]
                b[i] = -b[i]
        if self.normalization == "zero-mean":
            zero_rows = ~k.any(axis=1)
            if np.any(np.abs(a[zero_rows]) > 0):
                raise InvalidDimension("zero-mean generator has a nonzero zero mode")
        elif self.normalization != "raw":
            raise InvalidDimension(f"unknown normalization {self.normalization!r}")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "z_slope", float(self.z_slope))

    @classmethod
    def autonomous(cls, spec: ModelSpec, terms, z_slope: float = 0.0,
                   normalization: str = "zero-mean") -> "Generator":
        """terms: iterable of (k_vector, a, b) constants."""
        terms = list(terms)
        if not terms:
            return cls(spec=spec, k=np.zeros((0, spec.dim), np.int64),
                       a=np.zeros((0, 1)), b=np.zeros((0, 1)),
                       z_slope=z_slope, normalization=normalization)
        k = np.array([t[0] for t in terms], np.int64)
        a = np.array([[t[1]] for t in terms], float)
        b = np.array([[t[2]] for t in terms], float)
        return cls(spec=spec, k=k, a=a, b=b, z_slope=z_slope, normalization=normalization)

    # -- queries ---------------------------------------------------------------

    @property
    def z_independent(self) -> bool:
        return self.z_slope == 0.0 and not bool(self.k[:, -1].any())

    @property
    def is_autonomous(self) -> bool:
        return (self.a.shape[1] <= 1 or not np.any(self.a[:, 1:])) and \
               (self.b.shape[1] <= 1 or not np.any(self.b[:, 1:]))

    def amplitudes_at(self, t):
        return _poly_at(self.a, t), _poly_at(self.b, t)

    def at_time(self, t: float) -> FourierScalar:
        """Periodic part of F_t; the z-linear part is carried separately."""
        a, b = self.amplitudes_at(float(t))
        return FourierScalar(dim=self.spec.dim, k=self.k, a=a, b=b)

    def z_slope_at(self, t) -> np.ndarray:
        return np.broadcast_to(self.z_slope, np.shape(t)) if np.ndim(t) else self.z_slope

    def value(self, pts: np.ndarray, t: float) -> np.ndarray:
        v = self.at_time(t)(pts)
        if self.z_slope:
            v = v + self.z_slope * np.atleast_2d(pts)[:, -1]
        return v

    def gradient_value(self, pts: np.ndarray, t: float) -> np.ndarray:
        g = self.at_time(t).gradient_at(np.atleast_2d(pts))
        if self.z_slope:
            g = g.copy()
            g[:, -1] += self.z_slope
        return g


@dataclass(frozen=True)
class ReebComponent:
    """c(z, t): Fourier series in z with polynomial-in-t amplitudes."""

    kz: np.ndarray           # (R,) nonnegative integer z-frequencies
    a: np.ndarray            # (R, D)
    b: np.ndarray            # (R, D)

    def __post_init__(self):
        kz = np.atleast_1d(np.asarray(self.kz, np.int64))
        a = np.atleast_2d(np.asarray(self.a, float))
        b = np.atleast_2d(np.asarray(self.b, float))
        if kz.size == 0:
            a = np.zeros((0, 1))
            b = np.zeros((0, 1))
        if np.any(kz < 0):
            raise InvalidDimension("z-frequencies must be nonnegative")
        if max(a.shape[1], b.shape[1]) > MAX_POLY_DEGREE + 1:
            raise InvalidDimension("amplitude polynomials must have degree <= 6")
        D = max(a.shape[1], b.shape[1])
        a = np.pad(a, ((0, 0), (0, D - a.shape[1])))
        b = np.pad(b, ((0, 0), (0, D - b.shape[1])))
        object.__setattr__(self, "kz", kz)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def constant(cls, c0: float) -> "ReebComponent":
        return cls(kz=np.array([0]), a=np.array([[c0]]), b=np.array([[0.0]]))

    @property
    def constant_in_z(self) -> bool:
        return not bool(self.kz.any())

    def c_at(self, z: np.ndarray, t) -> np.ndarray:
        a, b = _poly_at(self.a, t), _poly_at(self.b, t)
        ph = np.multiply.outer(np.asarray(z, float), self.kz.astype(float))
        return np.cos(ph) @ a + np.sin(ph) @ b

    def mu_at(self, z: np.ndarray, t) -> np.ndarray:
        """mu = dc/dz, the conformal factor of L_X eta = mu eta."""
        a, b = _poly_at(self.a, t), _poly_at(self.b, t)
        kf = self.kz.astype(float)
        ph = np.multiply.outer(np.asarray(z, float), kf)
        return np.cos(ph) @ (b * kf) - np.sin(ph) @ (a * kf)

    def at_time(self, t: float, dim: int) -> FourierScalar:
        a, b = _poly_at(self.a, float(t)), _poly_at(self.b, float(t))
        k = np.zeros((self.kz.size, dim), np.int64)
        k[:, -1] = self.kz
        return FourierScalar(dim=dim, k=k, a=a, b=b)

    def mean_abs_profile(self, times) -> np.ndarray:
        """(1/2pi)|integral of c(., t) dz| per time, exact from the zero mode."""
        a, _ = _poly_at(self.a, np.asarray(times, float))
        zero = self.kz == 0
        return np.abs(np.atleast_2d(a)[:, zero].sum(axis=1))


# ---------------------------------------------------------------------------
# vector field and integrator
# ---------------------------------------------------------------------------


class VelocityField:
    """Evaluates X_t on batches of unwrapped points."""

    def __init__(self, generator, reeb=None, model: ModelSpec | None = None):
        self.generator = generator
        self.reeb = reeb
        self.model = model if model is not None else generator.spec
        self.n = self.model.n

    def __call__(self, pts: np.ndarray, t: float) -> np.ndarray:
        pts = np.atleast_2d(pts)
        n = self.n
        out = np.zeros_like(pts)
        gen = self.generator
        a, b = gen.amplitudes_at(t)
        if gen.k.shape[0]:
            kf = gen.k.astype(float)
            ph = pts @ gen.k.T
            grad = np.cos(ph) @ (b[:, None] * kf) - np.sin(ph) @ (a[:, None] * kf)
            out[:, :n] = grad[:, n:2 * n]
            out[:, n:2 * n] = -grad[:, :n]
        zs = gen.z_slope_at(t)
        if np.any(zs):
            out[:, -1] += zs
        if self.reeb is not None:
            out[:, -1] += self.reeb.c_at(pts[:, -1], t)
        return out


def rk4_segment(field, pts: np.ndarray, t0: float, t1: float, n_steps: int) -> np.ndarray:
    h = (t1 - t0) / n_steps
    y = pts
    t = t0
    for _ in range(n_steps):
        k1 = field(y, t)
        k2 = field(y + 0.5 * h * k1, t + 0.5 * h)
        k3 = field(y + 0.5 * h * k2, t + 0.5 * h)
        k4 = field(y + h * k3, t + h)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += h
    return y


def flow_states(field, pts0: np.ndarray, targets, steps: int, integrands=()):
    """RK4 from t=0 capturing states (and cumulative integrals) at targets.

    integrands: callables g(pts, vel, t) -> (N,) accumulated by per-step
    Simpson with a cubic-Hermite midpoint state.  Targets must lie in [0, 1]
    and are hit exactly by splitting steps.  Returns (states, integrals):
    lists aligned with sorted(targets); caller gets them back in the order
    given.
    """
    targets = np.atleast_1d(np.asarray(targets, float))
    order = np.argsort(targets, kind="stable")
    sorted_t = targets[order]
    pts0 = np.atleast_2d(np.asarray(pts0, float))
    h_nom = 1.0 / steps
    y = pts0.copy()
    t = 0.0
    acc = [np.zeros(pts0.shape[0]) for _ in integrands]
    states = [None] * targets.size
    integrals = [None] * targets.size
    idx = 0
    v_curr = field(y, t) if integrands else None
    while idx < sorted_t.size and sorted_t[idx] <= t + 1e-15:
        states[order[idx]] = y.copy()
        integrals[order[idx]] = [a.copy() for a in acc]
        idx += 1
    while idx < sorted_t.size:
        t_stop = sorted_t[idx]
        h = min(h_nom, t_stop - t)
        k1 = v_curr if integrands else field(y, t)
        k2 = field(y + 0.5 * h * k1, t + 0.5 * h)
        k3 = field(y + 0.5 * h * k2, t + 0.5 * h)
        k4 = field(y + h * k3, t + h)
        y_next = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if integrands:
            v_next = field(y_next, t + h)
            y_mid = 0.5 * (y + y_next) + (h / 8.0) * (k1 - v_next)
            v_mid = field(y_mid, t + 0.5 * h)
            for i, g in enumerate(integrands):
                acc[i] = acc[i] + (h / 6.0) * (
                    g(y, k1, t) + 4.0 * g(y_mid, v_mid, t + 0.5 * h) + g(y_next, v_next, t + h))
            v_curr = v_next
        y = y_next
        t = t + h
        while idx < sorted_t.size and sorted_t[idx] <= t + 1e-12:
            states[order[idx]] = y.copy()
            integrals[order[idx]] = [a.copy() for a in acc]
            idx += 1
    return states, integrals


# ---------------------------------------------------------------------------
# isotopies
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoIsotopy:
    """A generator-driven isotopy with a deterministic RK4 flow."""

    model: ModelSpec
    generator: Generator
    reeb: ReebComponent | None = None
    kind: str = "coHamiltonian"
    steps: int = 1024

    def __post_init__(self):
        if self.kind not in KINDS:
            raise KindMismatch(f"unknown kind {self.kind!r}")
        gen = self.generator
        if gen.k.size and gen.k[:, -1].any():
            raise InvalidDimension(
                "generators must be z-independent: i(X)omega = dF forces dF/dz = 0")
        if self.model.z_topology == "circle":
            if gen.z_slope != 0.0:
                raise InvalidDimension("z-linear generators require line topology")
            if self.kind == "coHamiltonian" and self.reeb is not None:
                raise KindMismatch(
                    "co-Hamiltonian isotopies on the closed model have no Reeb component")
        else:
            if self.kind == "coHamiltonian" and self.reeb is not None:
                raise KindMismatch(
                    "line-topology co-Hamiltonian Reeb part comes from the z slope only")
        if self.kind == "cosymplectic" and self.reeb is not None and not self.reeb.constant_in_z:
            raise KindMismatch("cosymplectic kind requires dc/dz = 0")
        if self.steps < 2:
            raise InvalidDimension("steps must be >= 2")

    # -- flow ------------------------------------------------------------------

    def field(self) -> VelocityField:
        return VelocityField(self.generator, self.reeb, self.model)

    def points_at(self, pts: np.ndarray, times, integrands=()):
        if integrands:
            return flow_states(self.field(), pts, times, self.steps, integrands)
        # capture-only transport: equal steps per segment between targets
        times = np.atleast_1d(np.asarray(times, float))
        order = np.argsort(times, kind="stable")
        fld = self.field()
        states = [None] * times.size
        y = np.atleast_2d(np.asarray(pts, float)).copy()
        t = 0.0
        for idx in order:
            target = times[idx]
            span = target - t
            if span > 1e-15:
                n_steps = max(1, int(np.ceil(span * self.steps)))
                y = transport(fld, y, t, target, n_steps)
                t = target
            states[idx] = y.copy()
        return states, None

    def point(self, pts: np.ndarray, t: float) -> np.ndarray:
        states, _ = self.points_at(pts, [t])
        return states[0]

    def inverse_point(self, pts: np.ndarray, t: float) -> np.ndarray:
        """phi_t^{-1}(pts) by integrating the field backward from time t."""
        pts = np.atleast_2d(np.asarray(pts, float))
        if t == 0.0:
            return pts.copy()
        n_steps = max(1, int(np.ceil(t * self.steps)))
        return transport(self.field(), pts, t, 0.0, n_steps)

    def jacobian_at(self, pts: np.ndarray, t: float):
        """(phi_t(pts), D phi_t(pts)) via the variational equation.

        Integrating J' = (dX/dx) J alongside the flow keeps the Jacobian at
        integrator accuracy even for strongly stretching flows where spatial
        finite differences lose most digits.
        """
        pts = np.atleast_2d(np.asarray(pts, float))
        n_steps = max(1, int(np.ceil(abs(t) * self.steps)))
        return transport_with_jacobian(self.field(), pts, 0.0, t, n_steps)

    def inverse_jacobian_at(self, pts: np.ndarray, t: float):
        """(phi_t^{-1}(pts), D(phi_t^{-1})(pts)) by backward variational transport."""
        pts = np.atleast_2d(np.asarray(pts, float))
        if t == 0.0:
            d = self.model.dim
            return pts.copy(), np.broadcast_to(np.eye(d), (pts.shape[0], d, d)).copy()
        n_steps = max(1, int(np.ceil(t * self.steps)))
        return transport_with_jacobian(self.field(), pts, t, 0.0, n_steps)

    def time1(self, pts: np.ndarray) -> np.ndarray:
        return self.point(pts, 1.0)

    # -- generator access (shared protocol with derived isotopies) -------------

    def generator_eval(self, pts: np.ndarray, t: float) -> np.ndarray:
        return self.generator.value(pts, t)

    def claimed_differential(self, pts: np.ndarray, t: float) -> np.ndarray:
        return self.generator.gradient_value(pts, t)

    def osc_enclosure_at(self, t: float, resolution: int = 256) -> OscEnclosure:
        return osc(self.generator.at_time(t), resolution)

    def c_values(self, pts: np.ndarray, t: float) -> np.ndarray:
        """C(Phi, eta)^t at pts: eta(phidot_t) evaluated at phi_t(pts)."""
        pts = np.atleast_2d(pts)
        if self._z_invariant_flow():
            return self._c_of_z(pts[:, -1], t)
        z_t = self.point(pts, t)[:, -1]
        return self._c_of_z(z_t, t)

    def _c_of_z(self, z: np.ndarray, t: float) -> np.ndarray:
        out = np.zeros_like(np.asarray(z, float))
        if self.generator.z_slope:
            out = out + self.generator.z_slope
        if self.reeb is not None:
            out = out + self.reeb.c_at(z, t)
        return out

    def _z_invariant_flow(self) -> bool:
        """True when z is constant along the flow (co-Hamiltonian, closed model)."""
        return self.generator.z_slope == 0.0 and self.reeb is None

    def c_profile(self, times) -> np.ndarray:
        """Spatially constant C(Phi, eta)^t; valid for co-Hamiltonian and
        cosymplectic kinds where dc/dz = 0."""
        times = np.atleast_1d(np.asarray(times, float))
        out = np.zeros(times.size)
        if self.generator.z_slope:
            out += self.generator.z_slope
        if self.reeb is not None:
            if not self.reeb.constant_in_z:
                raise KindMismatch("C(Phi, eta)^t is not spatially constant for this kind")
            zero = self.reeb.kz == 0
            out += _poly_at(self.reeb.a, times)[:, zero].sum(axis=1)
        return out

    def theta_profile(self, times) -> np.ndarray:
        """vartheta_t = (1/Vol)|int_M C(Phi, eta)^t|, via the z-marginal flow."""
        times = np.atleast_1d(np.asarray(times, float))
        if self.reeb is None or self.reeb.constant_in_z:
            return np.abs(self.c_profile(times))
        # z evolves by dz/dt = c(z, t); average c over the initial z grid
        zgrid = np.linspace(0.0, TWO_PI, 256, endpoint=False)
        pts = np.zeros((zgrid.size, self.model.dim))
        pts[:, -1] = zgrid
        states, _ = self.points_at(pts, times)
        return np.array([np.abs(np.mean(self._c_of_z(s[:, -1], t)))
                         for s, t in zip(states, times)])

    def f_exponent(self, pts: np.ndarray, times):
        """f_t with phi_t^* eta = e^{f_t} eta: integral of mu along the flow."""
        if self.reeb is None or self.reeb.constant_in_z:
            pts = np.atleast_2d(pts)
            return [np.zeros(pts.shape[0]) for _ in np.atleast_1d(times)]
        mu = lambda y, v, s: self.reeb.mu_at(y[:, -1], s)
        _, integrals = self.points_at(pts, times, integrands=(mu,))
        return [i[0] for i in integrals]


def identity_isotopy(model: ModelSpec, steps: int = 1024) -> CoIsotopy:
    gen = Generator.autonomous(model, [])
    return CoIsotopy(model=model, generator=gen, kind="coHamiltonian", steps=steps)


# ---------------------------------------------------------------------------
# derived paths
# ---------------------------------------------------------------------------


class InverseIsotopy:
    """t -> phi_t^{-1}; generated by -F_t o phi_t (fact: inverse of a
    co-Hamiltonian isotopy is co-Hamiltonian)."""

    def __init__(self, base: CoIsotopy):
        if base.kind != "coHamiltonian":
            raise KindMismatch("inverse generator formula requires a co-Hamiltonian isotopy")
        self.base = base
        self.model = base.model
        self.kind = base.kind
        self.steps = base.steps

    def point(self, pts: np.ndarray, t: float) -> np.ndarray:
        return self.base.inverse_point(pts, t)

    def points_at(self, pts: np.ndarray, times, integrands=()):
        if integrands:
            raise NotImplementedError("integral accumulation runs on the base flow")
        return [self.point(pts, t) for t in np.atleast_1d(times)], None

    def generator_eval(self, pts: np.ndarray, t: float) -> np.ndarray:
        return -self.base.generator_eval(self.base.point(pts, t), t)

    def claimed_differential(self, pts: np.ndarray, t: float) -> np.ndarray:
        """d(-F_t o phi_t) = -dF_t(phi_t) . D phi_t, Jacobian by variational flow."""
        y, J = self.base.jacobian_at(pts, t)
        dF = self.base.generator.gradient_value(y, t)
        return -np.einsum("np,npq->nq", dF, J)

    def osc_enclosure_at(self, t: float, resolution: int = 256) -> OscEnclosure:
        # osc(-F_t o phi_t) = osc(F_t): composition with a diffeomorphism and
        # sign flips preserve the oscillation exactly
        return self.base.osc_enclosure_at(t, resolution)

    def c_profile(self, times) -> np.ndarray:
        return -self.base.c_profile(times)

    def time1(self, pts: np.ndarray) -> np.ndarray:
        return self.base.inverse_point(pts, 1.0)


class ComposedPath:
    """t -> phi_t o psi_t with claimed generator F_t + H_t o phi_t^{-1}."""

    def __init__(self, a: CoIsotopy, b: CoIsotopy):
        if a.model != b.model:
            raise ModelMismatch("composition requires isotopies on the same model")
        if a.kind != "coHamiltonian" or b.kind != "coHamiltonian":
            raise KindMismatch("composition generator formula requires co-Hamiltonian inputs")
        self.a = a
        self.b = b
        self.model = a.model
        self.steps = max(a.steps, b.steps)

    def point(self, pts: np.ndarray, t: float) -> np.ndarray:
        return self.a.point(self.b.point(pts, t), t)

    def points_at(self, pts: np.ndarray, times, integrands=()):
        if integrands:
            raise NotImplementedError("integral accumulation runs on primitive flows")
        times = np.atleast_1d(np.asarray(times, float))
        inner, _ = self.b.points_at(pts, times)
        return [self.a.point(s, float(t)) for s, t in zip(inner, times)], None

    def claimed_generator(self, pts: np.ndarray, t: float) -> np.ndarray:
        pts = np.atleast_2d(pts)
        return self.a.generator_eval(pts, t) + \
            self.b.generator_eval(self.a.inverse_point(pts, t), t)

    def claimed_differential(self, pts: np.ndarray, t: float) -> np.ndarray:
        """d(F_t + H_t o phi_t^{-1}) with the inverse Jacobian from the
        variational equation."""
        pts = np.atleast_2d(pts)
        q, Jinv = self.a.inverse_jacobian_at(pts, t)
        dF = self.a.generator.gradient_value(pts, t)
        dH = self.b.generator.gradient_value(q, t)
        return dF + np.einsum("np,npq->nq", dH, Jinv)


@dataclass(frozen=True)
class Translation:
    """Flat-model cosymplectomorphism: rigid translation in all coordinates."""

    offset: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "offset", np.asarray(self.offset, float))

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        return np.asarray(pts, float) + self.offset

    def inverse(self) -> "Translation":
        return Translation(offset=-self.offset)


class ConjugatedPath:
    """t -> rho^{-1} o phi_t o rho for a general flat cosymplectomorphism rho."""

    def __init__(self, base: CoIsotopy, rho, rho_inverse):
        self.base = base
        self.rho = rho
        self.rho_inverse = rho_inverse
        self.model = base.model
        self.steps = base.steps

    def point(self, pts: np.ndarray, t: float) -> np.ndarray:
        return self.rho_inverse(self.base.point(self.rho(np.atleast_2d(pts)), t))

    def points_at(self, pts: np.ndarray, times, integrands=()):
        if integrands:
            raise NotImplementedError("integral accumulation runs on primitive flows")
        states, _ = self.base.points_at(self.rho(np.atleast_2d(pts)), times)
        return [self.rho_inverse(s) for s in states], None

    def claimed_generator(self, pts: np.ndarray, t: float) -> np.ndarray:
        return self.base.generator_eval(self.rho(np.atleast_2d(pts)), t)


def translate_generator(gen: Generator, offset: np.ndarray) -> Generator:
    """Exact Fourier representation of F o rho for a translation rho."""
    offset = np.asarray(offset, float)
    if gen.k.shape[0] == 0:
        return gen
    phase = gen.k.astype(float) @ offset  # (K,)
    c, s = np.cos(phase)[:, None], np.sin(phase)[:, None]
    # a cos(k.t + p) + b sin(k.t + p) regrouped on cos(k.t), sin(k.t)
    a_new = gen.a * c + gen.b * s
    b_new = -gen.a * s + gen.b * c
    return Generator(spec=gen.spec, k=gen.k, a=a_new, b=b_new,
                     z_slope=gen.z_slope, normalization=gen.normalization)


def translate_reeb(reeb: ReebComponent, z_offset: float) -> ReebComponent:
    kf = reeb.kz.astype(float)
    c, s = np.cos(kf * z_offset)[:, None], np.sin(kf * z_offset)[:, None]
    return ReebComponent(kz=reeb.kz, a=reeb.a * c + reeb.b * s,
                         b=-reeb.a * s + reeb.b * c)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def vector_field(g: Generator, r: ReebComponent | None, p, t: float) -> np.ndarray:
    """Tangent vector X_t at p (a Point or coordinate array)."""
    pts = p.as_array()[None, :] if isinstance(p, Point) else np.atleast_2d(np.asarray(p, float))
    v = VelocityField(g, r)(pts, t)
    return v[0] if (isinstance(p, Point) or np.asarray(p).ndim == 1) else v


def flow(iso: CoIsotopy, p, t: float):
    """phi_t(p); circle coordinates reduced on output only."""
    if isinstance(p, Point):
        out = iso.point(p.as_array()[None, :], t)[0]
        return Point.from_array(iso.model.wrap(out), iso.model)
    pts = np.asarray(p, float)
    out = iso.point(np.atleast_2d(pts), t)
    out = iso.model.wrap(out)
    return out[0] if pts.ndim == 1 else out


def inverse_isotopy(iso: CoIsotopy) -> InverseIsotopy:
    return InverseIsotopy(iso)


def compose_isotopies(a: CoIsotopy, b: CoIsotopy) -> ComposedPath:
    return ComposedPath(a, b)


def conjugate_isotopy(iso: CoIsotopy, rho):
    """Conjugation by a flat cosymplectomorphism.

    Translations act exactly on the Fourier data, so the result is again a
    CoIsotopy; other conjugators yield an evaluable ConjugatedPath.
    """
    if isinstance(rho, Translation):
        gen = translate_generator(iso.generator, rho.offset)
        reeb = translate_reeb(iso.reeb, float(rho.offset[-1])) if iso.reeb is not None else None
        return CoIsotopy(model=iso.model, generator=gen, reeb=reeb,
                         kind=iso.kind, steps=iso.steps)
    return ConjugatedPath(iso, rho, rho.inverse())


def c_function(iso: CoIsotopy, t: float, p) -> float | np.ndarray:
    """C(Phi, eta)^t(p) = eta(phidot_t)(phi_t(p))."""
    pts = p.as_array()[None, :] if isinstance(p, Point) else np.atleast_2d(np.asarray(p, float))
    vals = iso.c_values(pts, t)
    return float(vals[0]) if (isinstance(p, Point) or np.asarray(p).ndim == 1) else vals


def check_cosymplectic(iso_or_field, samples: int = 16) -> VerificationReport:
    """Exact symbolic Lie-derivative residuals on the Fourier representation.

    Accepts a CoIsotopy (sampled over `samples` time nodes) or a raw tuple of
    FourierScalar vector-field components.
    """
    residuals = {}
    if isinstance(iso_or_field, CoIsotopy):
        iso = iso_or_field
        times = np.linspace(0.0, 1.0, samples)
        eta_res = 0.0
        omega_res = 0.0
        mu_res = 0.0
        for t in times:
            omega_res = max(omega_res, _omega_defect_of_generator(iso.generator, t))
            if iso.reeb is not None:
                w = iso.reeb.at_time(t, iso.model.dim)
                d_w = exterior_derivative(w)
                # L_X eta = d(eta(X)) = dw; conformal residual: dw - mu eta
                mu = w.partial(iso.model.dim - 1)
                defect = 0.0
                for j in range(iso.model.dim - 1):
                    comp = d_w.components[j]
                    if comp.k.shape[0]:
                        defect = max(defect, float(np.max(np.abs(comp.a))),
                                     float(np.max(np.abs(comp.b))))
                diff = d_w.components[-1] - mu
                if diff.k.shape[0]:
                    defect = max(defect, float(np.max(np.abs(diff.a))),
                                 float(np.max(np.abs(diff.b))))
                mu_res = max(mu_res, defect)
                if iso.kind in ("coHamiltonian", "cosymplectic"):
                    eta_res = max(eta_res, float(mu.sup_bound()))
        residuals["lie_omega"] = omega_res
        if iso.kind in ("coHamiltonian", "cosymplectic"):
            residuals["lie_eta"] = eta_res
        else:
            residuals["conformal_defect"] = mu_res
        tol = 1e-13
    else:
        components = tuple(iso_or_field)
        dim = components[0].dim
        n = (dim - 1) // 2
        eta_form = exterior_derivative(components[-1])
        eta_res = 0.0
        for comp in eta_form.components:
            if comp.k.shape[0]:
                eta_res = max(eta_res, float(np.max(np.abs(comp.a))),
                              float(np.max(np.abs(comp.b))))
        iota = [(-1.0) * components[n + i] for i in range(n)] + \
               [1.0 * components[i] for i in range(n)] + [FourierScalar.zero(dim)]
        omega_res = OneFormField(components=tuple(iota), dim=dim).closedness_defect()
        residuals["lie_eta"] = eta_res
        residuals["lie_omega"] = omega_res
        tol = 1e-13
    passed = all(v <= tol for v in residuals.values())
    return VerificationReport(name="check_cosymplectic", residuals=residuals,
                              tolerances={k: tol for k in residuals}, passed=passed)


def _omega_defect_of_generator(gen: Generator, t: float) -> float:
    # i(X)omega = sum u_i dy_i - v_i dx_i with u_i = F_{y_i}, v_i = -F_{x_i},
    # which is exactly dF restricted to the x, y coordinates
    F = gen.at_time(t)
    n = gen.spec.n
    dim = gen.spec.dim
    dx = [F.partial(i) for i in range(n)]
    dy = [F.partial(n + i) for i in range(n)]
    comps = dx + dy + [FourierScalar.zero(dim)]
    return OneFormField(components=tuple(comps), dim=dim).closedness_defect()


def velocity_fd(path, pts: np.ndarray, t: float, dt: float):
    """d/dt path_t(pts) by a 4th-order central stencil, clamped inside [0, 1].

    Returns (velocity, center): the stencil center moves off t when it would
    leave [0, 1].  The higher order keeps the truncation error negligible even
    when the flow stretches trajectories strongly.
    """
    tc = min(max(t, 2 * dt), 1.0 - 2 * dt)
    stencil = [tc + m * dt for m in (-2, -1, 1, 2)]
    if hasattr(path, "points_at"):
        f, _ = path.points_at(pts, stencil)
    else:
        f = [path.point(pts, s) for s in stencil]
    vel = (8.0 * (f[2] - f[1]) - (f[3] - f[0])) / (12.0 * dt)
    return vel, tc


def verify_generator_identity(path, claimed_generator=None, samples: int = 64,
                              times=(0.25, 0.5, 0.75, 1.0), model: ModelSpec | None = None,
                              steps: int | None = None, rng=None,
                              tol: float = 1e-5,
                              claimed_differential=None) -> VerificationReport:
    """Check I(path velocity) = d(claimed generator) at sampled points/times.

    The velocity is a central time difference.  The differential uses the
    supplied analytic/variational callback when given (paths built here all
    provide one), falling back to central space differences of the claimed
    generator otherwise.
    """
    model = model or path.model
    steps = steps or getattr(path, "steps", 1024)
    dt = 1.0 / (4 * steps)
    rng = rng or np.random.default_rng(0)
    pts = rng.uniform(0.0, TWO_PI, size=(samples, model.dim))
    if claimed_generator is None:
        # verify the path against the generator it claims for itself
        claimed_generator = getattr(path, "claimed_generator", None) or path.generator_eval
        if claimed_differential is None:
            claimed_differential = getattr(path, "claimed_differential", None)
    worst = 0.0
    for t in np.atleast_1d(times):
        vel, tc = velocity_fd(path, pts, float(t), dt)
        cov = pairing_I(vel, model)
        m = path.point(pts, tc)
        if claimed_differential is not None:
            dG = claimed_differential(m, tc)
        else:
            dG = np.empty_like(cov)
            for j in range(model.dim):
                e = np.zeros(model.dim)
                e[j] = FD_SPACE
                dG[:, j] = (claimed_generator(m + e, tc) -
                            claimed_generator(m - e, tc)) / (2 * FD_SPACE)
        worst = max(worst, float(np.max(np.abs(cov - dG))))
    return VerificationReport(name="generator_identity",
                              residuals={"max_residual": worst},
                              tolerances={"max_residual": tol},
                              passed=worst <= tol,
                              details={"samples": samples, "times": list(np.atleast_1d(times))})


def flow_jacobian(point_fn, pts: np.ndarray, h: float = FD_SPACE) -> np.ndarray:
    """Central-difference Jacobian of a map R^d -> R^d on a batch: (N, d, d)."""
    pts = np.atleast_2d(pts)
    N, d = pts.shape
    J = np.empty((N, d, d))
    for j in range(d):
        e = np.zeros(d)
        e[j] = h
        J[:, :, j] = (point_fn(pts + e) - point_fn(pts - e)) / (2 * h)
    return J


def orbit_energy_profile(iso: CoIsotopy, p, grid) -> list:
    """(t, G(phi_t(p))) along the orbit of an autonomous generator."""
    if not iso.generator.is_autonomous or (
            iso.reeb is not None and not _reeb_autonomous(iso.reeb)):
        raise NonAutonomous("orbit energy profiles require an autonomous generator")
    pts = p.as_array()[None, :] if isinstance(p, Point) else np.atleast_2d(np.asarray(p, float))
    grid = np.atleast_1d(np.asarray(grid, float))
    states, _ = iso.points_at(pts, grid)
    out = []
    for t, s in zip(grid, states):
        out.append((float(t), float(iso.generator.value(s, 0.0)[0])))
    return out


def orbit_energy_report(iso: CoIsotopy, p, grid, tol: float = 1e-8) -> VerificationReport:
    """Residual of G(phi_t) = G(p) + int_0^t eta(X)^2 along the orbit."""
    if not iso.generator.is_autonomous:
        raise NonAutonomous("orbit energy profiles require an autonomous generator")
    pts = p.as_array()[None, :] if isinstance(p, Point) else np.atleast_2d(np.asarray(p, float))
    grid = np.atleast_1d(np.asarray(grid, float))
    energy = lambda y, v, s: v[:, -1] ** 2
    states, integrals = iso.points_at(pts, grid, integrands=(energy,))
    g0 = iso.generator.value(pts, 0.0)
    worst = 0.0
    for t, s, acc in zip(grid, states, integrals):
        defect = np.abs(iso.generator.value(s, 0.0) - g0 - acc[0])
        worst = max(worst, float(defect.max()))
    return VerificationReport(name="orbit_energy", residuals={"max_defect": worst},
                              tolerances={"max_defect": tol}, passed=worst <= tol)


def _reeb_autonomous(reeb: ReebComponent) -> bool:
    return (reeb.a.shape[1] <= 1 or not np.any(reeb.a[:, 1:])) and \
           (reeb.b.shape[1] <= 1 or not np.any(reeb.b[:, 1:]))


def winding(iso, alpha: OneFormField, p) -> float | np.ndarray:
    """Delta(Phi, alpha)(p) = int_0^1 alpha(phidot_t)(phi_t(p)) dt."""
    if not alpha.is_closed():
        raise NotClosed("winding requires a closed 1-form")
    pts = p.as_array()[None, :] if isinstance(p, Point) else np.atleast_2d(np.asarray(p, float))
    g = lambda y, v, s: alpha.pair_vector(v, y)
    _, integrals = iso.points_at(pts, [1.0], integrands=(g,))
    vals = integrals[0][0]
    return float(vals[0]) if (isinstance(p, Point) or np.asarray(p).ndim == 1) else vals


def quadrature_grid(iso: CoIsotopy, resolution: int = 64):
    """Grid for integrals over M, collapsing z when the flow is z-invariant
    and the integrand cannot depend on z.

    Returns (points, weight) with weight the volume element per node against
    eta ^ omega^n (the n! factor of omega^n included).
    """
    model = iso.model
    n = model.n
    collapse_z = iso._z_invariant_flow() and model.z_topology == "circle"
    dims = 2 * n if collapse_z else model.dim
    axes = [np.arange(resolution) * (TWO_PI / resolution) for _ in range(dims)]
    mesh = np.meshgrid(*axes, indexing="ij")
    flat = np.stack([m.ravel() for m in mesh], axis=-1)
    pts = np.zeros((flat.shape[0], model.dim))
    pts[:, :dims] = flat
    cell = (TWO_PI / resolution) ** dims
    weight = cell * (TWO_PI if collapse_z else 1.0) * _factorial(n)
    return pts, weight


def _factorial(n: int) -> float:
    out = 1.0
    for i in range(2, n + 1):
        out *= i
    return out


def flux_identity_residual(iso: CoIsotopy, alpha: OneFormField,
                           resolution: int = 64) -> float:
    """| int Delta(Phi, eta) alpha^omega^n - int Delta(Phi, alpha) eta^omega^n |.

    Both integrals are grid quadratures over M; the first reduces to the
    dz-component of alpha weighting the eta-winding.
    """
    if iso.kind != "coHamiltonian":
        raise KindMismatch("flux identity is stated for co-Hamiltonian isotopies")
    if not alpha.is_closed():
        raise NotClosed("flux identity requires a closed 1-form")
    pts, weight = quadrature_grid(iso, resolution)
    g_alpha = lambda y, v, s: alpha.pair_vector(v, y)
    g_eta = lambda y, v, s: v[:, -1]
    _, integrals = iso.points_at(pts, [1.0], integrands=(g_alpha, g_eta))
    delta_alpha, delta_eta = integrals[0]
    alpha_z = alpha.components[-1](pts)
    lhs = float(np.sum(delta_eta * alpha_z) * weight)
    rhs = float(np.sum(delta_alpha) * weight)
    return abs(lhs - rhs)
