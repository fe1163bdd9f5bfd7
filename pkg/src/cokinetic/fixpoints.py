"""Fixed points of time-1 maps and orbit winding invariants.

On the flat closed model the fixed set of a co-Hamiltonian time-1 map is a
union of circles over the z-direction, so components are counted after
collapsing z.  The Gamma bound gives the guaranteed minimum number of such
components; the winding checks verify that orbits through fixed points are
contractible and that the mean winding of any closed 1-form vanishes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import KindMismatch, UnsupportedModel
from .manifold import TWO_PI, FourierScalar, ModelSpec, OneFormField, Point
from .isotopy import CoIsotopy, quadrature_grid, winding
from .reports import VerificationReport

DEFAULT_GRID = 32
DEFAULT_NEWTON_TOL = 1e-10
NEWTON_MAX_ITERS = 40
FD_STEP = 1e-6


@dataclass
class FixedPointSet:
    """Clustered representatives of Fix(psi) for the time-1 map psi."""

    components: list
    grid_resolution: int
    newton_tol: float
    identity_map: bool = False
    details: dict = field(default_factory=dict)

    @property
    def count(self) -> int:
        return len(self.components)

    def to_dict(self) -> dict:
        return {
            "type": "fixed_points",
            "identity_map": bool(self.identity_map),
            "grid_resolution": int(self.grid_resolution),
            "newton_tol": float(self.newton_tol),
            "components": [
                {"representative": [float(v) for v in c["representative"]],
                 "cluster_size": int(c["cluster_size"]),
                 "residual": float(c["residual"])}
                for c in self.components
            ],
        }


@dataclass(frozen=True)
class GammaBound:
    lower: int
    upper: int | None
    model: str

    def __post_init__(self):
        if self.lower < 1:
            raise ValueError("the guaranteed lower bound is at least 1")
        if self.upper is not None and self.upper < self.lower:
            raise ValueError("upper bound below lower bound")


def _is_identity(iso: CoIsotopy) -> bool:
    gen = iso.generator
    no_fourier = gen.k.shape[0] == 0 or (not np.any(gen.a) and not np.any(gen.b))
    no_reeb = iso.reeb is None or (not np.any(iso.reeb.a) and not np.any(iso.reeb.b))
    return no_fourier and gen.z_slope == 0.0 and no_reeb


def _wrap_pi(d: np.ndarray) -> np.ndarray:
    return (d + np.pi) % TWO_PI - np.pi


def _displacement(iso: CoIsotopy, pts: np.ndarray, active) -> np.ndarray:
    image = iso.time1(pts)
    return _wrap_pi(image - pts)[:, active]


def find_fixed_points(iso: CoIsotopy, grid_resolution: int = DEFAULT_GRID,
                      newton_tol: float = DEFAULT_NEWTON_TOL) -> FixedPointSet:
    """Grid-seeded Newton search on the wrapped displacement of the time-1 map.

    Seeds are clustered at merge_radius = 4 sqrt(newton_tol); for z-invariant
    flows the search runs on the (x, y) torus and each hit stands for a circle
    of fixed points over z."""
    if grid_resolution < 16:
        raise ValueError("grid_resolution must be at least 16 per dimension")
    model = iso.model
    if _is_identity(iso):
        rep = np.zeros(model.dim)
        comp = [{"representative": rep, "cluster_size": grid_resolution ** model.dim,
                 "residual": 0.0}]
        return FixedPointSet(components=comp, grid_resolution=grid_resolution,
                             newton_tol=newton_tol, identity_map=True,
                             details={"note": "identity map: every point is fixed"})

    collapse_z = iso._z_invariant_flow() and model.z_topology == "circle"
    active = list(range(2 * model.n)) if collapse_z else list(range(model.dim))
    d_active = len(active)

    axes = [np.arange(grid_resolution) * (TWO_PI / grid_resolution)] * d_active
    mesh = np.meshgrid(*axes, indexing="ij")
    grid = np.zeros((mesh[0].size, model.dim))
    for j, m_ax in enumerate(mesh):
        grid[:, active[j]] = m_ax.ravel()

    disp = _displacement(iso, grid, active)
    norms = np.linalg.norm(disp, axis=1)
    threshold = 10.0 * np.quantile(norms, 0.05)
    mask = norms <= max(threshold, newton_tol)
    # when the displacement field is small everywhere the quantile rule keeps
    # the whole grid; cap the Newton batch to the best candidates
    cap = 128
    if mask.sum() > cap:
        order = np.argsort(norms)
        keep = np.zeros_like(mask)
        keep[order[:cap]] = True
        mask &= keep
    seeds = grid[mask]
    if seeds.shape[0] == 0:
        seeds = grid[np.argsort(norms)[: 2 * d_active + 2]]

    converged = []
    residuals = []
    current = seeds.copy()
    last_ratio = np.full(current.shape[0], np.inf)
    prev_norm = np.linalg.norm(_displacement(iso, current, active), axis=1)
    alive = np.ones(current.shape[0], bool)
    for _ in range(NEWTON_MAX_ITERS):
        if not np.any(alive):
            break
        pts = current[alive]
        # batch the center and the 2*d FD stencil points into one flow pass
        stack = [pts]
        for j in range(d_active):
            e = np.zeros(model.dim)
            e[active[j]] = FD_STEP
            stack.append(pts + e)
            stack.append(pts - e)
        disp_all = _displacement(iso, np.concatenate(stack), active)
        m = pts.shape[0]
        d0 = disp_all[:m]
        J = np.empty((m, d_active, d_active))
        for j in range(d_active):
            plus = disp_all[(1 + 2 * j) * m:(2 + 2 * j) * m]
            minus = disp_all[(2 + 2 * j) * m:(3 + 2 * j) * m]
            J[:, :, j] = (plus - minus) / (2 * FD_STEP)
        # least-squares step: fixed sets can be whole tori, where the
        # displacement Jacobian is singular along the degenerate directions
        step = np.empty_like(d0)
        for i in range(m):
            step[i] = np.linalg.lstsq(J[i], d0[i], rcond=1e-8)[0]
        moved = pts.copy()
        moved[:, active] = moved[:, active] - step
        moved = iso.model.wrap(moved)
        new_norm = np.linalg.norm(_displacement(iso, moved, active), axis=1)
        idx = np.nonzero(alive)[0]
        old = prev_norm[idx]
        ratio = np.where(old > 0, new_norm / np.maximum(old, 1e-300), 0.0)
        current[idx] = moved
        prev_norm[idx] = new_norm
        last_ratio[idx] = ratio
        done = new_norm <= newton_tol
        # require a quadratic tail: the last contraction must be sharp,
        # otherwise the seed is drifting along a slow manifold
        for i_local, i_global in enumerate(idx):
            if done[i_local] and (ratio[i_local] <= 0.1 or old[i_local] <= newton_tol):
                converged.append(current[i_global].copy())
                residuals.append(float(new_norm[i_local]))
                alive[i_global] = False
            elif not np.isfinite(new_norm[i_local]):
                alive[i_global] = False

    merge_radius = 4.0 * np.sqrt(newton_tol)
    # a second, coarser linking radius chains hits along continuum components
    # (whole fixed tori leave converged points one seed-cell apart)
    link_radius = max(merge_radius, 1.25 * TWO_PI / grid_resolution)
    components = _cluster(np.array(converged), residuals, merge_radius,
                          active, model, link_radius) if converged else []
    return FixedPointSet(components=components, grid_resolution=grid_resolution,
                         newton_tol=newton_tol,
                         details={"seeds": int(seeds.shape[0]),
                                  "collapsed_z": bool(collapse_z),
                                  "merge_radius": float(merge_radius)})


def _cluster(points: np.ndarray, residuals, merge_radius, active, model,
             link_radius=None) -> list:
    """Single-pass union-find over circular distances in the active coords."""
    m = points.shape[0]
    parent = list(range(m))
    radius = link_radius if link_radius is not None else merge_radius

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    act = points[:, active]
    for i in range(m):
        for j in range(i + 1, m):
            gap = np.abs(_wrap_pi(act[i] - act[j]))
            if np.linalg.norm(gap) <= radius:
                parent[find(j)] = find(i)
    clusters = {}
    for i in range(m):
        clusters.setdefault(find(i), []).append(i)
    components = []
    for members in clusters.values():
        best = min(members, key=lambda i: residuals[i])
        components.append({"representative": model.wrap(points[best]),
                           "cluster_size": len(members),
                           "residual": residuals[best]})
    components.sort(key=lambda c: tuple(c["representative"]))
    return components


def gamma_lower_bound(model: ModelSpec, second_factor: str = "circle",
                      k: int | None = None) -> GammaBound:
    """The certified bracket for Gamma of the product with the second factor.

    Only the lower bound 1 is unconditional; the upper bound depends on the
    factor: 2 for a circle, 1 for an interval, 2k+1 for a 2k-torus."""
    desc = f"T^{2 * model.n} x {model.z_topology}"
    if second_factor == "circle":
        return GammaBound(lower=1, upper=2, model=f"{desc} x S^1")
    if second_factor == "interval":
        return GammaBound(lower=1, upper=1, model=f"{desc} x [-1,1]")
    if second_factor == "torus":
        if k is None or k < 1:
            raise ValueError("the torus factor needs its half-dimension k")
        return GammaBound(lower=1, upper=2 * k + 1, model=f"{desc} x T^{2 * k}")
    raise UnsupportedModel(f"no Gamma bracket for factor {second_factor!r}")


def check_fix_lower_bound(iso: CoIsotopy, grid_resolution: int = DEFAULT_GRID,
                          newton_tol: float = DEFAULT_NEWTON_TOL) -> VerificationReport:
    """Component count of Fix(time-1 map) against the Gamma lower bound."""
    if iso.kind != "coHamiltonian" or iso.model.z_topology != "circle":
        raise KindMismatch("the fixed-point bound is for closed-model "
                           "co-Hamiltonian isotopies")
    bound = gamma_lower_bound(iso.model)
    fps = find_fixed_points(iso, grid_resolution, newton_tol)
    count = fps.count if not fps.identity_map else grid_resolution ** iso.model.dim
    passed = count >= bound.lower
    return VerificationReport(
        name="fixed_point_lower_bound",
        residuals={"component_count": float(count)},
        tolerances={"component_count": float(bound.lower)},
        passed=passed,
        details={"gamma_lower": bound.lower, "gamma_upper": bound.upper,
                 "identity_map": fps.identity_map,
                 "fixed_points": fps.to_dict()})


def basis_forms(model: ModelSpec) -> list:
    """The constant closed 1-forms dx_i, dy_i, dz."""
    dim = model.dim
    forms = []
    for j in range(dim):
        comps = [FourierScalar.constant(dim, 1.0 if i == j else 0.0)
                 for i in range(dim)]
        forms.append(OneFormField.of(*comps))
    return forms


def winding_at_fixed_points(iso: CoIsotopy, fps: FixedPointSet | None = None,
                            tol: float = 1e-6,
                            grid_resolution: int = DEFAULT_GRID) -> VerificationReport:
    """Orbits through fixed points of the time-1 map are contractible: every
    basis period integral vanishes."""
    if fps is None:
        fps = find_fixed_points(iso, grid_resolution)
    reps = np.array([c["representative"] for c in fps.components]) \
        if fps.components else np.zeros((0, iso.model.dim))
    if fps.identity_map:
        reps = np.zeros((1, iso.model.dim))
    worst = 0.0
    per_form = {}
    for j, alpha in enumerate(basis_forms(iso.model)):
        if reps.shape[0]:
            vals = np.abs(np.atleast_1d(winding(iso, alpha, reps)))
            per_form[f"form_{j}"] = float(np.max(vals))
            worst = max(worst, float(np.max(vals)))
        else:
            per_form[f"form_{j}"] = 0.0
    return VerificationReport(
        name="winding_at_fixed_points",
        residuals={"max_winding": worst},
        tolerances={"max_winding": tol},
        passed=worst <= tol and reps.shape[0] > 0,
        details={"per_form": per_form, "representatives": int(reps.shape[0])})


def mean_winding_integral(iso: CoIsotopy, alpha: OneFormField,
                          resolution: int = 32, tol_quad: float = 1e-6,
                          loop: bool = False) -> VerificationReport:
    """int_M Delta(Phi, alpha) eta ^ omega^n = 0 and min <= 0 <= max.

    For loop isotopies (time-1 map = identity) Delta is additionally required
    to vanish pointwise."""
    if iso.kind != "coHamiltonian":
        raise KindMismatch("the mean winding identity is for co-Hamiltonian kind")
    pts, weight = quadrature_grid(iso, resolution)
    delta = np.atleast_1d(winding(iso, alpha, pts))
    volume = pts.shape[0] * weight
    mean = float(np.sum(delta) * weight / volume)
    lo, hi = float(np.min(delta)), float(np.max(delta))
    slack = 1e-8
    passed = abs(mean) <= tol_quad and lo <= slack and hi >= -slack
    residuals = {"abs_mean": abs(mean), "min_delta": lo, "max_delta": hi}
    tolerances = {"abs_mean": tol_quad, "min_delta": slack, "max_delta": -slack}
    if loop:
        spread = float(np.max(np.abs(delta)))
        residuals["loop_sup"] = spread
        tolerances["loop_sup"] = tol_quad
        passed = passed and spread <= tol_quad
    return VerificationReport(
        name="mean_winding",
        residuals=residuals, tolerances=tolerances, passed=passed,
        details={"resolution": resolution, "nodes": int(pts.shape[0])})


def fixed_point_points(fps: FixedPointSet, model: ModelSpec) -> list:
    return [Point.from_array(np.asarray(c["representative"]), model)
            for c in fps.components]
