"""Conformal algebra of almost co-Hamiltonian isotopies.

These checks cover the interaction of the conformal factor mu_t (from
L_X eta = mu_t eta, equivalently phi_t^* eta = e^{f_t} eta) with inversion,
composition and conjugation, plus the transformation rules of the Reeb
pairing C(Phi, eta)^t.  Left-hand sides are measured on the actual flows
with finite differences; right-hand sides assemble the claimed formulas from
exponent integrals along trajectories.
"""

from __future__ import annotations

import numpy as np

from .errors import KindMismatch
from .manifold import TWO_PI, ModelSpec
from .isotopy import CoIsotopy, Translation, conjugate_isotopy, flow_states
from .reports import VerificationReport

# 4th-order stencils: wide spacing keeps the flow-evaluation noise from
# dominating the difference quotients
DT_FACTOR = 4          # time step = 1 / (DT_FACTOR * steps)
HZ = 1e-2              # spatial step for z-derivatives of measured quantities


def _fd4(values, h):
    """4th-order derivative from values at offsets (-2h, -h, +h, +2h)."""
    return (8.0 * (values[2] - values[1]) - (values[3] - values[0])) / (12.0 * h)


def _stencil_times(t, dt):
    tc = min(max(t, 2 * dt), 1.0 - 2 * dt)
    return tc, [tc + m * dt for m in (-2, -1, 1, 2)]


def _require_conformal(iso: CoIsotopy):
    if iso.reeb is None:
        raise KindMismatch("conformal checks need an explicit Reeb component")


def inverse_transit(iso: CoIsotopy, y: np.ndarray, s: float):
    """Backward transport from time s with the conformal exponent integral.

    Returns (q, f) with q = phi_s^{-1}(y) and f = f_s(q) = integral of
    mu_r along the trajectory r -> phi_r(q) over [0, s] (so that
    f_s o phi_s^{-1} evaluated at y equals f).
    """
    y = np.atleast_2d(np.asarray(y, float))
    if s == 0.0 or iso.reeb is None:
        return y.copy(), np.zeros(y.shape[0])
    fwd = iso.field()
    rev = lambda p, u: -fwd(p, s - u)
    mu = lambda p, v, u: iso.reeb.mu_at(p[:, -1], s - u)
    n_steps = max(2, int(np.ceil(s * iso.steps)))
    states, integrals = flow_states(rev, y, [s], n_steps / s, integrands=(mu,))
    return states[0], integrals[0][0]


def inverse_points_fd(iso: CoIsotopy, y: np.ndarray, times):
    """phi_s^{-1}(y) for each stencil time s (independent backward runs)."""
    return [iso.inverse_point(y, s) for s in times]


def verify_inverse_conformal_factor(iso: CoIsotopy, samples: int = 16,
                                    times=(0.3, 0.6, 0.9), rng=None,
                                    tol: float = 1e-5) -> VerificationReport:
    """Fact: L_{V_t} eta = theta_t eta for the inverse isotopy, with
    theta_t = -(d/ds [f_s o phi_s^{-1}]) o phi_t.

    V_t is the velocity field of t -> phi_t^{-1}; the left side is the
    z-derivative of eta(V_t), measured on the flow.
    """
    _require_conformal(iso)
    rng = rng or np.random.default_rng(0)
    pts = rng.uniform(0.0, TWO_PI, size=(samples, iso.model.dim))
    dt = 1.0 / (DT_FACTOR * iso.steps)
    worst = 0.0
    for t in np.atleast_1d(times):
        tc, st = _stencil_times(float(t), dt)
        # spatial stencil in z around each sample
        ez = np.zeros(iso.model.dim)
        ez[-1] = HZ
        stack = np.concatenate([pts + m * ez for m in (-2, -1, 1, 2)])
        y = iso.point(stack, tc)                       # phi_t of the z-stencil
        # eta(V_t)(x) = z-component of d/ds [phi_s^{-1}(phi_t(x))] at s = t
        back = inverse_points_fd(iso, y, st)
        vz = _fd4([b[:, -1] for b in back], dt)        # (4*samples,)
        groups = vz.reshape(4, samples)
        lhs = _fd4(list(groups), HZ)
        # theta_t(x) = -(d/ds [f_s(phi_s^{-1}(y))]) with y = phi_t(x)
        y0 = iso.point(pts, tc)
        u = [inverse_transit(iso, y0, s)[1] for s in st]
        rhs = -_fd4(u, dt)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return VerificationReport(name="inverse_conformal_factor",
                              residuals={"max_residual": worst},
                              tolerances={"max_residual": tol}, passed=worst <= tol)


def verify_composed_conformal_factor(a: CoIsotopy, b: CoIsotopy, samples: int = 16,
                                     times=(0.3, 0.6, 0.9), rng=None,
                                     tol: float = 1e-5) -> VerificationReport:
    """Fact: the composed isotopy t -> phi_t o psi_t satisfies
    L_{W_t} eta = rho_t eta with
    rho_t = (d/dt [f_t o psi_t] + dq_t/dt) o (phi_t o psi_t)^{-1}.
    """
    _require_conformal(a)
    _require_conformal(b)
    rng = rng or np.random.default_rng(0)
    dim = a.model.dim
    pts = rng.uniform(0.0, TWO_PI, size=(samples, dim))
    steps = max(a.steps, b.steps)
    dt = 1.0 / (DT_FACTOR * steps)
    ez = np.zeros(dim)
    ez[-1] = HZ
    worst = 0.0
    for t in np.atleast_1d(times):
        tc, st = _stencil_times(float(t), dt)
        x = a.point(b.point(pts, tc), tc)              # moving sample points
        # left side: d/dz of eta(W_t) at x; W_t(x') needs the seed point
        # p' = (phi psi)_t^{-1}(x') for each z-stencil node
        stack = np.concatenate([x + m * ez for m in (-2, -1, 1, 2)])
        seeds = b.inverse_point(a.inverse_point(stack, tc), tc)
        inner, _ = b.points_at(seeds, st)
        comp_states = [a.point(s, float(ts)) for s, ts in zip(inner, st)]
        wz = _fd4([c[:, -1] for c in comp_states], dt)
        lhs = _fd4(list(wz.reshape(4, samples)), HZ)
        # right side at x: seed p = (phi psi)_t^{-1}(x)
        p = b.inverse_point(a.inverse_point(x, tc), tc)
        # u1(s) = f^a_s(psi_s(p)): exponent of a integrated from psi_s(p)
        mu_a = lambda q, v, s: a.reeb.mu_at(q[:, -1], s)
        u1 = []
        inner_p, _ = b.points_at(p, st)
        for s, q in zip(st, inner_p):
            _, integ = a.points_at(q, [s], integrands=(mu_a,))
            u1.append(integ[0][0])
        # u2(s) = q^b_s(p): exponent of b from p
        u2 = b.f_exponent(p, st)
        rhs = _fd4(u1, dt) + _fd4(u2, dt)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return VerificationReport(name="composed_conformal_factor",
                              residuals={"max_residual": worst},
                              tolerances={"max_residual": tol}, passed=worst <= tol)


def verify_conjugated_conformal_factor(iso: CoIsotopy, rho: Translation,
                                       samples: int = 16, times=(0.3, 0.6, 0.9),
                                       rng=None, tol: float = 1e-5) -> VerificationReport:
    """Fact: conjugation by a strict cosymplectomorphism rho transforms the
    conformal factor to (df_t/dt) o (rho^{-1} o phi_t o rho)^{-1}.

    For flat translations rho^* eta = eta (the exponent f^rho vanishes), so
    the general formula loses its df^rho term.
    """
    _require_conformal(iso)
    rng = rng or np.random.default_rng(0)
    dim = iso.model.dim
    pts = rng.uniform(0.0, TWO_PI, size=(samples, dim))
    conj = conjugate_isotopy(iso, rho)
    dt = 1.0 / (DT_FACTOR * iso.steps)
    worst = 0.0
    for t in np.atleast_1d(times):
        tc, st = _stencil_times(float(t), dt)
        # left side: conformal factor of the conjugated velocity field at the
        # sample, measured as d/dz of eta(V-bar_t)
        ez = np.zeros(dim)
        ez[-1] = HZ
        stack = np.concatenate([pts + m * ez for m in (-2, -1, 1, 2)])
        seeds = conj.inverse_point(stack, tc)
        states, _ = conj.points_at(seeds, st)
        vz = _fd4([s[:, -1] for s in states], dt)
        lhs = _fd4(list(vz.reshape(4, samples)), HZ)
        # right side: (d/dt f_t) o rho o conj_t^{-1}; chasing the conjugation
        # through shows the exponent derivative must be read at
        # rho(conj_t^{-1}(x)) = phi_t^{-1}(rho(x))
        p = iso.inverse_point(rho(pts), tc)
        u = iso.f_exponent(p, st)
        rhs = _fd4(u, dt)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return VerificationReport(name="conjugated_conformal_factor",
                              residuals={"max_residual": worst},
                              tolerances={"max_residual": tol}, passed=worst <= tol)


def verify_reeb_pairing_composition(a: CoIsotopy, b: CoIsotopy, samples: int = 16,
                                    times=(0.3, 0.6, 0.9), rng=None,
                                    tol: float = 1e-5) -> VerificationReport:
    """Fact: C(Phi o Psi, eta)^t = C(Phi, eta)^t o psi_t + e^{f_t o psi_t} C(Psi, eta)^t."""
    _require_conformal(a)
    _require_conformal(b)
    rng = rng or np.random.default_rng(0)
    dim = a.model.dim
    pts = rng.uniform(0.0, TWO_PI, size=(samples, dim))
    steps = max(a.steps, b.steps)
    dt = 1.0 / (DT_FACTOR * steps)
    mu_a = lambda q, v, s: a.reeb.mu_at(q[:, -1], s)
    worst = 0.0
    for t in np.atleast_1d(times):
        tc, st = _stencil_times(float(t), dt)
        inner, _ = b.points_at(pts, st + [tc])
        comp = [a.point(s, float(ts)) for s, ts in zip(inner[:4], st)]
        lhs = _fd4([c[:, -1] for c in comp], dt)
        q = inner[4]                                   # psi_t(p)
        x_states, x_integrals = a.points_at(q, [tc], integrands=(mu_a,))
        z_comp = x_states[0][:, -1]                    # z of phi_t(psi_t(p))
        f_at_q = x_integrals[0][0]                     # f^a_t(psi_t(p))
        c_a = a._c_of_z(z_comp, tc)
        c_b = b.c_values(pts, tc)
        rhs = c_a + np.exp(f_at_q) * c_b
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return VerificationReport(name="reeb_pairing_composition",
                              residuals={"max_residual": worst},
                              tolerances={"max_residual": tol}, passed=worst <= tol)


def verify_reeb_pairing_inverse(iso: CoIsotopy, samples: int = 16,
                                times=(0.3, 0.6, 0.9), rng=None,
                                tol: float = 1e-5) -> VerificationReport:
    """Fact: the Reeb pairing of the inverse isotopy.

    Setting Psi = Phi^{-1} in the composition rule and using C(id) = 0 gives
    C(Phi^{-1}, eta)^t = -e^{-f_t o phi_t^{-1}} C(Phi, eta)^t o phi_t^{-1};
    the whole right side is composed with phi_t^{-1} and the exponent enters
    with a minus sign (it is the inverse isotopy's own conformal exponent).
    """
    _require_conformal(iso)
    rng = rng or np.random.default_rng(0)
    dim = iso.model.dim
    pts = rng.uniform(0.0, TWO_PI, size=(samples, dim))
    dt = 1.0 / (DT_FACTOR * iso.steps)
    worst = 0.0
    for t in np.atleast_1d(times):
        tc, st = _stencil_times(float(t), dt)
        back = inverse_points_fd(iso, pts, st)
        lhs = _fd4([b[:, -1] for b in back], dt)       # eta of inverse velocity
        _, f_at_inv = inverse_transit(iso, pts, tc)    # f_t(phi_t^{-1}(x))
        # C(Phi,eta)^t o phi_t^{-1}(x) = c(z(phi_t(phi_t^{-1} x)), t) = c(z_x, t)
        rhs = -np.exp(-f_at_inv) * iso._c_of_z(pts[:, -1], tc)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return VerificationReport(name="reeb_pairing_inverse",
                              residuals={"max_residual": worst},
                              tolerances={"max_residual": tol}, passed=worst <= tol)
