"""Symplectization of the closed flat model: M~ = M x S^1.

The product carries the symplectic form omega~ = p^*(omega) + p^*(eta) ^ dtheta.
An isotopy of M lifts to M~ by rotating the extra circle against the
accumulated Reeb pairing:

    phi~_t(x, theta) = (phi_t(x), theta - int_0^t C(Phi, eta)^s o phi_s(x) ds).

The rotation integrand follows the statement form C(...)^s o phi_s; for the
kinds with spatially constant C (co-Hamiltonian, cosymplectic) this coincides
with evaluating at x, and for z-dependent Reeb components the inner flow is
resolved on the z-marginal dynamics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import KindMismatch, NotAFixedPoint, UnsupportedModel
from .manifold import TWO_PI, ModelSpec, Point, exterior_derivative
from .isotopy import CoIsotopy
from .reports import VerificationReport

FD_SPACE = 1e-5


@dataclass(frozen=True)
class LiftedPoint:
    base: Point
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", float(self.theta) % TWO_PI)

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.base.as_array(), [self.theta]])


def _z_transport(iso: CoIsotopy, z0: np.ndarray, t: float, steps: int) -> np.ndarray:
    """RK4 for the self-contained z-marginal dynamics dz/ds = c(z, s)."""
    reeb = iso.reeb
    if reeb is None:
        return np.asarray(z0, float) + iso.generator.z_slope * t
    z = np.asarray(z0, float).copy()
    n_steps = max(1, int(np.ceil(t * steps)))
    h = t / n_steps
    s = 0.0
    for _ in range(n_steps):
        k1 = reeb.c_at(z, s)
        k2 = reeb.c_at(z + 0.5 * h * k1, s + 0.5 * h)
        k3 = reeb.c_at(z + 0.5 * h * k2, s + 0.5 * h)
        k4 = reeb.c_at(z + h * k3, s + h)
        z = z + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        s += h
    return z


class LiftedIsotopy:
    """phi~_t on M x S^1 with the rotation correction R_{Lambda t}."""

    def __init__(self, base: CoIsotopy, rotation_nodes: int = 129):
        if base.model.z_topology != "circle":
            raise UnsupportedModel("the symplectization lift requires the closed model")
        self.base = base
        self.model = base.model
        self.steps = base.steps
        if rotation_nodes % 2 == 0:
            rotation_nodes += 1
        self.rotation_nodes = rotation_nodes

    # -- rotation --------------------------------------------------------------

    def rotation_integral(self, pts: np.ndarray, t: float) -> np.ndarray:
        """Lambda_t(x) = int_0^t C(Phi, eta)^s o phi_s(x) ds."""
        pts = np.atleast_2d(np.asarray(pts, float))
        if t == 0.0:
            return np.zeros(pts.shape[0])
        if self.base._z_invariant_flow():
            return np.zeros(pts.shape[0])
        if self.base.reeb is None or self.base.reeb.constant_in_z:
            # C is spatially constant; composite Simpson in time alone
            nodes = np.linspace(0.0, t, self.rotation_nodes)
            vals = self.base.c_profile(nodes)
            return np.full(pts.shape[0], _simpson(vals, nodes[1] - nodes[0]))
        # z-dependent Reeb part: resolve the doubled flow on the z-marginal
        nodes = np.linspace(0.0, t, self.rotation_nodes)
        states, _ = self.base.points_at(pts, nodes)
        vals = np.empty((self.rotation_nodes, pts.shape[0]))
        for i, (s, st) in enumerate(zip(nodes, states)):
            z_inner = _z_transport(self.base, st[:, -1], float(s), self.steps)
            vals[i] = self.base.reeb.c_at(z_inner, float(s))
        h = nodes[1] - nodes[0]
        return np.array([_simpson(vals[:, j], h) for j in range(pts.shape[0])])

    # -- evaluation ------------------------------------------------------------

    def point(self, lpts: np.ndarray, t: float) -> np.ndarray:
        """Transport (N, dim+1) lifted coordinates; theta left unwrapped."""
        lpts = np.atleast_2d(np.asarray(lpts, float))
        base = self.base.point(lpts[:, :-1], t)
        theta = lpts[:, -1] - self.rotation_integral(lpts[:, :-1], t)
        return np.concatenate([base, theta[:, None]], axis=1)

    def lifted_point(self, lp: LiftedPoint, t: float) -> LiftedPoint:
        out = self.point(lp.as_array()[None, :], t)[0]
        return LiftedPoint(base=Point.from_array(self.model.wrap(out[:-1]), self.model),
                           theta=out[-1])

    def time1(self, lpts: np.ndarray) -> np.ndarray:
        return self.point(lpts, 1.0)


def _simpson(vals: np.ndarray, h: float) -> float:
    n = len(vals)
    return float(h / 3.0 * (vals[0] + vals[-1] + 4.0 * vals[1:-1:2].sum()
                            + 2.0 * vals[2:-1:2].sum()))


def lift_isotopy(iso: CoIsotopy, rotation_nodes: int = 129) -> LiftedIsotopy:
    return LiftedIsotopy(iso, rotation_nodes)


def lifted_hamiltonian(iso: CoIsotopy, t: float, lp: LiftedPoint) -> float:
    """H~_t = F_t o p + eta(phidot_t)(base) * theta.

    The theta coefficient makes the expression multivalued unless it
    vanishes; it is returned literally (on the closed model co-Hamiltonian
    kinds force it to 0).
    """
    if iso.kind != "coHamiltonian":
        raise KindMismatch("the lifted Hamiltonian is stated for co-Hamiltonian isotopies")
    base = lp.base.as_array()
    val = float(iso.generator.value(base[None, :], t)[0])
    coeff = float(iso._c_of_z(np.array([base[-1]]), t)[0])
    return val + coeff * lp.theta


def theta_coefficient(iso: CoIsotopy, t: float, p: Point) -> float:
    """Coefficient of theta in the lifted Hamiltonian: eta(X_t)(p)."""
    return float(iso._c_of_z(np.array([p.as_array()[-1]]), t)[0])


def lifted_form_matrix(model: ModelSpec) -> np.ndarray:
    """Constant matrix of omega~ in flat coordinates (x, y, z, theta)."""
    n = model.n
    d = model.dim + 1
    O = np.zeros((d, d))
    for i in range(n):
        O[i, n + i] = 1.0
        O[n + i, i] = -1.0
    O[d - 2, d - 1] = 1.0
    O[d - 1, d - 2] = -1.0
    return O


def check_symplectic(li: LiftedIsotopy, samples: int = 32,
                     t_grid=(0.25, 0.5, 0.75, 1.0), rng=None,
                     tol: float = 1e-5) -> VerificationReport:
    """max over samples/times of || J^T Omega~ J - Omega~ ||_max with J the
    central-difference Jacobian of the lifted map."""
    rng = rng or np.random.default_rng(0)
    model = li.model
    d = model.dim + 1
    pts = rng.uniform(0.0, TWO_PI, size=(samples, d))
    Om = lifted_form_matrix(model)
    worst = 0.0
    per_time = {}
    for t in np.atleast_1d(t_grid):
        stack = []
        for j in range(d):
            e = np.zeros(d)
            e[j] = FD_SPACE
            stack.append(pts + e)
            stack.append(pts - e)
        images = li.point(np.concatenate(stack), float(t))
        J = np.empty((samples, d, d))
        for j in range(d):
            plus = images[2 * j * samples:(2 * j + 1) * samples]
            minus = images[(2 * j + 1) * samples:(2 * j + 2) * samples]
            J[:, :, j] = (plus - minus) / (2 * FD_SPACE)
        res = np.einsum("nij,ik,nkl->njl", J, Om, J) - Om
        worst_t = float(np.max(np.abs(res)))
        per_time[f"t={float(t):g}"] = worst_t
        worst = max(worst, worst_t)
    return VerificationReport(name="lifted_symplecticity",
                              residuals={"max_symplectic_residual": worst},
                              tolerances={"max_symplectic_residual": tol},
                              passed=worst <= tol,
                              details={"per_time_breakdown": per_time,
                                       "samples": samples})


def fixed_point_correspondence(li: LiftedIsotopy, z: Point,
                               tol: float = 1e-8) -> VerificationReport:
    """Fixed points of the base time-1 map with vanishing rotation lift to
    circles of fixed points (x, theta) of the lifted time-1 map."""
    base_arr = z.as_array()[None, :]
    image = li.base.point(base_arr, 1.0)
    disp = float(li.model.circular_distance(image, base_arr)[0])
    if disp > 10 * tol:
        raise NotAFixedPoint(f"base displacement {disp:.3e} exceeds {10 * tol:.1e}")
    thetas = np.arange(16) * (TWO_PI / 16)
    lpts = np.concatenate([np.repeat(base_arr, 16, axis=0), thetas[:, None]], axis=1)
    images = li.point(lpts, 1.0)
    dtheta = np.abs(images[:, -1] - thetas) % TWO_PI
    dtheta = np.minimum(dtheta, TWO_PI - dtheta)
    base_disp = li.model.circular_distance(images[:, :-1], lpts[:, :-1])
    worst = float(max(np.max(dtheta), np.max(base_disp)))
    return VerificationReport(name="fixed_point_correspondence",
                              residuals={"max_displacement": worst},
                              tolerances={"max_displacement": tol},
                              passed=worst <= tol)


def section_differential(iso: CoIsotopy, t: float, level: float):
    """d(H~_t o S_level) for the section S_level: x -> (x, level).

    H~_t o S_l = F_t + l * c(z, t), so the differential is dF_t + l * dc_t;
    the level-dependence drops exactly when c vanishes.
    """
    F = iso.generator.at_time(t)
    if iso.reeb is not None:
        F = F + float(level) * iso.reeb.at_time(t, iso.model.dim)
    return exterior_derivative(F)


def section_differentials_agree(iso: CoIsotopy, t: float, levels=(0.0, 1.0, 2.5),
                                tol: float = 0.0) -> bool:
    """Cor.-style check: the restricted differentials coincide across sections."""
    forms = [section_differential(iso, t, l) for l in levels]
    for other in forms[1:]:
        for c0, c1 in zip(forms[0].components, other.components):
            if not c0.allclose(c1, max(tol, 1e-13)):
                return False
    return True
