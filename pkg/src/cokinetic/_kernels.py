"""Fixed-step RK4 transport kernels.

The numpy implementation is always available; when numba is importable the
same loop is compiled for a large speedup on the many small batches the
verification suites produce.  Both paths use identical segmentation (equal
steps per segment) so switching between them only perturbs results at
floating-point noise level.
"""

from __future__ import annotations

import os

import numpy as np

try:  # pragma: no cover - environment dependent
    if os.environ.get("COKINETIC_NO_NUMBA"):
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn
        return wrap


@njit(cache=True)
def _horner(coeffs, t, out):
    K, D = coeffs.shape
    for r in range(K):
        acc = 0.0
        for d in range(D - 1, -1, -1):
            acc = acc * t + coeffs[r, d]
        out[r] = acc


@njit(cache=True)
def _field_eval(out, pts, k, a_t, b_t, zslope, rkz, ra_t, rb_t, n):
    N, d = pts.shape
    K = k.shape[0]
    R = rkz.shape[0]
    for i in range(N):
        for j in range(d):
            out[i, j] = 0.0
        for r in range(K):
            ph = 0.0
            for j in range(d):
                ph += k[r, j] * pts[i, j]
            g = np.cos(ph) * b_t[r] - np.sin(ph) * a_t[r]
            for j in range(n):
                out[i, j] += g * k[r, n + j]
                out[i, n + j] -= g * k[r, j]
        cz = zslope
        for r in range(R):
            phz = rkz[r] * pts[i, d - 1]
            cz += np.cos(phz) * ra_t[r] + np.sin(phz) * rb_t[r]
        out[i, d - 1] += cz


@njit(cache=True)
def _rk4_numba(pts, k, ap, bp, zslope, rkz, rap, rbp, t0, t1, nsteps, n):
    y = pts.copy()
    N, d = y.shape
    h = (t1 - t0) / nsteps
    a_t = np.empty(k.shape[0])
    b_t = np.empty(k.shape[0])
    ra_t = np.empty(rkz.shape[0])
    rb_t = np.empty(rkz.shape[0])
    k1 = np.empty((N, d))
    k2 = np.empty((N, d))
    k3 = np.empty((N, d))
    k4 = np.empty((N, d))
    tmp = np.empty((N, d))
    for step in range(nsteps):
        t = t0 + step * h
        _horner(ap, t, a_t)
        _horner(bp, t, b_t)
        _horner(rap, t, ra_t)
        _horner(rbp, t, rb_t)
        _field_eval(k1, y, k, a_t, b_t, zslope, rkz, ra_t, rb_t, n)
        tm = t + 0.5 * h
        _horner(ap, tm, a_t)
        _horner(bp, tm, b_t)
        _horner(rap, tm, ra_t)
        _horner(rbp, tm, rb_t)
        for i in range(N):
            for j in range(d):
                tmp[i, j] = y[i, j] + 0.5 * h * k1[i, j]
        _field_eval(k2, tmp, k, a_t, b_t, zslope, rkz, ra_t, rb_t, n)
        for i in range(N):
            for j in range(d):
                tmp[i, j] = y[i, j] + 0.5 * h * k2[i, j]
        _field_eval(k3, tmp, k, a_t, b_t, zslope, rkz, ra_t, rb_t, n)
        te = t + h
        _horner(ap, te, a_t)
        _horner(bp, te, b_t)
        _horner(rap, te, ra_t)
        _horner(rbp, te, rb_t)
        for i in range(N):
            for j in range(d):
                tmp[i, j] = y[i, j] + h * k3[i, j]
        _field_eval(k4, tmp, k, a_t, b_t, zslope, rkz, ra_t, rb_t, n)
        for i in range(N):
            for j in range(d):
                y[i, j] += (h / 6.0) * (k1[i, j] + 2.0 * k2[i, j] + 2.0 * k3[i, j] + k4[i, j])
    return y


@njit(cache=True)
def _jac_field_eval(outA, pts, k, a_t, b_t, rkz, ra_t, rb_t, n):
    """A = dX/dx at each point: Hessian blocks of F plus the Reeb z-derivative."""
    N, d = pts.shape
    K = k.shape[0]
    R = rkz.shape[0]
    for i in range(N):
        for p in range(d):
            for q in range(d):
                outA[i, p, q] = 0.0
        for r in range(K):
            ph = 0.0
            for j in range(d):
                ph += k[r, j] * pts[i, j]
            hh = -(np.cos(ph) * a_t[r] + np.sin(ph) * b_t[r])
            for j in range(n):
                for q in range(d):
                    outA[i, j, q] += k[r, n + j] * k[r, q] * hh
                    outA[i, n + j, q] -= k[r, j] * k[r, q] * hh
        mu = 0.0
        for r in range(R):
            phz = rkz[r] * pts[i, d - 1]
            mu += rkz[r] * (np.cos(phz) * rb_t[r] - np.sin(phz) * ra_t[r])
        outA[i, d - 1, d - 1] += mu


@njit(cache=True)
def _rk4_jac_numba(pts, k, ap, bp, zslope, rkz, rap, rbp, t0, t1, nsteps, n):
    y = pts.copy()
    N, d = y.shape
    J = np.zeros((N, d, d))
    for i in range(N):
        for p in range(d):
            J[i, p, p] = 1.0
    h = (t1 - t0) / nsteps
    a_t = np.empty(k.shape[0])
    b_t = np.empty(k.shape[0])
    ra_t = np.empty(rkz.shape[0])
    rb_t = np.empty(rkz.shape[0])
    ky = np.empty((4, N, d))
    kJ = np.empty((4, N, d, d))
    A = np.empty((N, d, d))
    ytmp = np.empty((N, d))
    Jtmp = np.empty((N, d, d))
    coef = np.array([0.0, 0.5, 0.5, 1.0])
    for step in range(nsteps):
        t = t0 + step * h
        for stage in range(4):
            ts = t + coef[stage] * h
            _horner(ap, ts, a_t)
            _horner(bp, ts, b_t)
            _horner(rap, ts, ra_t)
            _horner(rbp, ts, rb_t)
            if stage == 0:
                ycur, Jcur = y, J
            else:
                c = coef[stage]
                for i in range(N):
                    for p in range(d):
                        ytmp[i, p] = y[i, p] + c * h * ky[stage - 1, i, p]
                        for q in range(d):
                            Jtmp[i, p, q] = J[i, p, q] + c * h * kJ[stage - 1, i, p, q]
                ycur, Jcur = ytmp, Jtmp
            _field_eval(ky[stage], ycur, k, a_t, b_t, zslope, rkz, ra_t, rb_t, n)
            _jac_field_eval(A, ycur, k, a_t, b_t, rkz, ra_t, rb_t, n)
            for i in range(N):
                for p in range(d):
                    for q in range(d):
                        acc = 0.0
                        for m in range(d):
                            acc += A[i, p, m] * Jcur[i, m, q]
                        kJ[stage, i, p, q] = acc
        for i in range(N):
            for p in range(d):
                y[i, p] += (h / 6.0) * (ky[0, i, p] + 2.0 * ky[1, i, p] +
                                        2.0 * ky[2, i, p] + ky[3, i, p])
                for q in range(d):
                    J[i, p, q] += (h / 6.0) * (kJ[0, i, p, q] + 2.0 * kJ[1, i, p, q] +
                                               2.0 * kJ[2, i, p, q] + kJ[3, i, p, q])
    return y, J


def _field_pack(field):
    gen = field.generator
    reeb = field.reeb
    kz = reeb.kz.astype(np.float64) if reeb is not None else np.zeros(0)
    rap = reeb.a if reeb is not None else np.zeros((0, 1))
    rbp = reeb.b if reeb is not None else np.zeros((0, 1))
    return (gen.k.astype(np.float64), np.ascontiguousarray(gen.a),
            np.ascontiguousarray(gen.b), float(gen.z_slope),
            kz, np.ascontiguousarray(rap), np.ascontiguousarray(rbp))


def _jacobian_matrix_numpy(field, pts, t):
    """dX/dx batched via the analytic Hessian of the generator."""
    gen = field.generator
    n = field.n
    N, d = pts.shape
    A = np.zeros((N, d, d))
    a_t, b_t = gen.amplitudes_at(t)
    if gen.k.shape[0]:
        kf = gen.k.astype(float)
        ph = pts @ gen.k.T
        hh = -(np.cos(ph) * a_t + np.sin(ph) * b_t)  # (N, K)
        # Hess[p, q] = sum_r hh_r k_p k_q; rows of A mix Hessian rows
        hess = np.einsum("nr,rp,rq->npq", hh, kf, kf)
        A[:, :n, :] = hess[:, n:2 * n, :]
        A[:, n:2 * n, :] = -hess[:, :n, :]
    if field.reeb is not None:
        A[:, d - 1, d - 1] += field.reeb.mu_at(pts[:, -1], t)
    return A


def transport_with_jacobian(field, pts: np.ndarray, t0: float, t1: float, nsteps: int):
    """RK4 on the flow and its variational equation; returns (points, J)."""
    pts = np.ascontiguousarray(np.atleast_2d(np.asarray(pts, float)))
    N, d = pts.shape
    if t1 == t0 or nsteps == 0:
        return pts.copy(), np.broadcast_to(np.eye(d), (N, d, d)).copy()
    if HAVE_NUMBA:
        k, ap, bp, zslope, kz, rap, rbp = _field_pack(field)
        return _rk4_jac_numba(pts, k, ap, bp, zslope, kz, rap, rbp,
                              float(t0), float(t1), int(nsteps), field.n)
    h = (t1 - t0) / nsteps
    y = pts
    J = np.broadcast_to(np.eye(d), (N, d, d)).copy()
    t = t0
    for _ in range(nsteps):
        k1 = field(y, t)
        A1 = _jacobian_matrix_numpy(field, y, t)
        kJ1 = A1 @ J
        y2 = y + 0.5 * h * k1
        k2 = field(y2, t + 0.5 * h)
        kJ2 = _jacobian_matrix_numpy(field, y2, t + 0.5 * h) @ (J + 0.5 * h * kJ1)
        y3 = y + 0.5 * h * k2
        k3 = field(y3, t + 0.5 * h)
        kJ3 = _jacobian_matrix_numpy(field, y3, t + 0.5 * h) @ (J + 0.5 * h * kJ2)
        y4 = y + h * k3
        k4 = field(y4, t + h)
        kJ4 = _jacobian_matrix_numpy(field, y4, t + h) @ (J + h * kJ3)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        J = J + (h / 6.0) * (kJ1 + 2 * kJ2 + 2 * kJ3 + kJ4)
        t += h
    return y, J


def transport(field, pts: np.ndarray, t0: float, t1: float, nsteps: int) -> np.ndarray:
    """Equal-step RK4 from t0 to t1 (either direction) for a VelocityField."""
    pts = np.ascontiguousarray(np.atleast_2d(np.asarray(pts, float)))
    if t1 == t0 or nsteps == 0:
        return pts.copy()
    if HAVE_NUMBA:
        gen = field.generator
        reeb = field.reeb
        kz = reeb.kz.astype(np.float64) if reeb is not None else np.zeros(0)
        rap = reeb.a if reeb is not None else np.zeros((0, 1))
        rbp = reeb.b if reeb is not None else np.zeros((0, 1))
        return _rk4_numba(pts, gen.k.astype(np.float64),
                          np.ascontiguousarray(gen.a), np.ascontiguousarray(gen.b),
                          float(gen.z_slope), kz,
                          np.ascontiguousarray(rap), np.ascontiguousarray(rbp),
                          float(t0), float(t1), int(nsteps), field.n)
    h = (t1 - t0) / nsteps
    y = pts
    t = t0
    for _ in range(nsteps):
        k1 = field(y, t)
        k2 = field(y + 0.5 * h * k1, t + 0.5 * h)
        k3 = field(y + 0.5 * h * k2, t + 0.5 * h)
        k4 = field(y + h * k3, t + h)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += h
    return y
