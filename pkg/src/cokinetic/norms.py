"""Hofer-type lengths and distances for generator-driven isotopies.

The co-Hofer length of a co-Hamiltonian isotopy integrates (or maximizes)
osc(F_t) + |C(Phi, eta)^t| over time; the almost variants replace the sup of
the Reeb pairing by its normalized mean vartheta_t, and the Aco norm works at
the level of a single cosymplectic field through the Hodge split of i(X)omega.
C0 distances are grid lower estimates over forward and inverse maps.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    KindMismatch,
    ModelMismatch,
    NotCosymplectic,
    NoValidCandidate,
)
from .manifold import (
    TWO_PI,
    FourierScalar,
    ModelSpec,
    OneFormField,
    exterior_derivative,
    hodge_split,
    l2_norm_harmonic,
    osc,
)
from .isotopy import CoIsotopy, InverseIsotopy

DEFAULT_TIME_NODES = 65
DEFAULT_OSC_RESOLUTION = 256
DEFAULT_C0_RESOLUTION = 12

FLAVORS = ("L1inf", "Linf")


def _time_nodes(count: int) -> np.ndarray:
    if count % 2 == 0:
        count += 1
    return np.linspace(0.0, 1.0, count)


def _simpson_weights(count: int) -> np.ndarray:
    w = np.ones(count)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (1.0 / (count - 1) / 3.0)


def _kind_of(path) -> str:
    kind = getattr(path, "kind", None)
    if kind is None:
        kind = getattr(path, "base").kind
    return kind


def _check_flavor(flavor: str):
    if flavor not in FLAVORS:
        raise ValueError(f"flavor must be one of {FLAVORS}, got {flavor!r}")


def _fourier_at(path, t: float) -> FourierScalar:
    """The generator F_t as Fourier data, for plain and reparametrized paths."""
    fn = getattr(path, "generator_at_time", None)
    if fn is not None:
        return fn(t)
    return path.generator.at_time(t)


def _length_from_terms(nodes, osc_encs, reeb_terms, flavor, rule) -> "LengthReport":
    from .reports import LengthReport

    mids = np.array([e.value for e in osc_encs])
    los = np.array([e.lo for e in osc_encs])
    his = np.array([e.hi for e in osc_encs])
    reeb = np.asarray(reeb_terms, float)
    if flavor == "L1inf":
        w = _simpson_weights(nodes.size)
        value = float(np.dot(w, mids + reeb))
        bracket = (float(np.dot(w, los + reeb)), float(np.dot(w, his + reeb)))
    else:
        value = float(np.max(mids + reeb))
        bracket = (float(np.max(los + reeb)), float(np.max(his + reeb)))
    breakdown = [
        {"t": float(t), "osc_lo": float(lo), "osc_hi": float(hi),
         "osc_mid": float(mid), "reeb_term": float(r)}
        for t, lo, hi, mid, r in zip(nodes, los, his, mids, reeb)
    ]
    return LengthReport(value=value, flavor=flavor, breakdown=breakdown,
                        quadrature=rule, enclosure=bracket)


def _osc_profile(path, nodes, resolution):
    gen = getattr(path, "generator", None)
    if gen is None and isinstance(path, InverseIsotopy):
        # osc is invariant under the inverse flip -F_t o phi_t
        gen = path.base.generator
    if gen is not None and gen.is_autonomous:
        enc = path.osc_enclosure_at(0.0, resolution)
        return [enc] * nodes.size
    return [path.osc_enclosure_at(float(t), resolution) for t in nodes]


def length_L1inf(iso, resolution: int = DEFAULT_OSC_RESOLUTION,
                 time_nodes: int = DEFAULT_TIME_NODES):
    """l_CH^{(1,inf)}: composite Simpson of osc(F_t) + sup|C(Phi,eta)^t|."""
    return _co_hofer_length(iso, "L1inf", resolution, time_nodes)


def length_Linf(iso, resolution: int = DEFAULT_OSC_RESOLUTION,
                time_nodes: int = DEFAULT_TIME_NODES):
    """l_CH^inf: max over time nodes of osc(F_t) + sup|C(Phi,eta)^t|."""
    return _co_hofer_length(iso, "Linf", resolution, time_nodes)


def _co_hofer_length(iso, flavor, resolution, time_nodes):
    _check_flavor(flavor)
    if _kind_of(iso) != "coHamiltonian":
        raise KindMismatch("co-Hofer lengths are defined for co-Hamiltonian isotopies")
    curve = getattr(iso, "curve", None)
    if curve is not None and curve.is_monotone():
        return _reparam_length(iso, flavor, resolution, time_nodes)
    nodes = _time_nodes(time_nodes)
    encs = _osc_profile(iso, nodes, resolution)
    # C(Phi, eta)^t is spatially constant for this kind; |.| is its sup norm
    reeb = np.abs(iso.c_profile(nodes))
    rule = f"composite-simpson/{nodes.size} nodes, osc grid {resolution}"
    return _length_from_terms(nodes, encs, reeb, flavor, rule)


def _reparam_length(path, flavor, resolution, time_nodes):
    """Length of t -> phi_{zeta(t)} for monotone zeta.

    The L1inf quadrature substitutes s = zeta(t), which removes the
    (possibly very steep) zetadot factor from the integrand; Linf samples
    zetadot on a grid fine enough to resolve plateau ramps."""
    from .reports import LengthReport

    base = path.base
    curve = path.curve
    if flavor == "L1inf":
        s0, s1 = float(curve.value(0.0)), float(curve.value(1.0))
        nodes = np.linspace(s0, s1, _time_nodes(time_nodes).size)
        encs = _osc_profile(base, nodes, resolution)
        reeb = np.abs(base.c_profile(nodes))
        mids = np.array([e.value for e in encs])
        los = np.array([e.lo for e in encs])
        his = np.array([e.hi for e in encs])
        w = _simpson_weights(nodes.size) * (s1 - s0)
        breakdown = [
            {"t": float(t), "osc_lo": float(lo), "osc_hi": float(hi),
             "osc_mid": float(mid), "reeb_term": float(r)}
            for t, lo, hi, mid, r in zip(nodes, los, his, mids, reeb)
        ]
        rule = (f"composite-simpson/{nodes.size} nodes in s = zeta(t), "
                f"osc grid {resolution}")
        return LengthReport(
            value=float(np.dot(w, mids + reeb)), flavor=flavor,
            breakdown=breakdown, quadrature=rule,
            enclosure=(float(np.dot(w, los + reeb)), float(np.dot(w, his + reeb))))
    fine = np.linspace(0.0, 1.0, 4097)
    speeds = np.abs(curve.derivative(fine))
    if base.generator.is_autonomous:
        enc = base.osc_enclosure_at(0.0, resolution)
        encs = [enc] * fine.size
        reeb = np.abs(base.c_profile(curve.value(fine)))
        nodes, sub = fine, np.arange(fine.size)
    else:
        # keep the osc evaluations affordable on a coarser subsample
        sub = np.arange(0, fine.size, 16)
        nodes = fine[sub]
        encs = [base.osc_enclosure_at(float(curve.value(t)), resolution)
                for t in nodes]
        reeb = np.abs(base.c_profile(curve.value(nodes)))
        speeds = speeds[sub]
    terms = np.array([w * (e.value + r) for w, e, r in zip(speeds, encs, reeb)])
    los = np.array([w * (e.lo + r) for w, e, r in zip(speeds, encs, reeb)])
    his = np.array([w * (e.hi + r) for w, e, r in zip(speeds, encs, reeb)])
    i = int(np.argmax(terms))
    breakdown = [{"t": float(nodes[i]), "osc_lo": float(encs[i].lo),
                  "osc_hi": float(encs[i].hi), "osc_mid": float(encs[i].value),
                  "reeb_term": float(reeb[i])}]
    return LengthReport(value=float(terms[i]), flavor=flavor,
                        breakdown=breakdown,
                        quadrature=f"max over {nodes.size} nodes, osc grid {resolution}",
                        enclosure=(float(np.max(los)), float(np.max(his))))


def _plateau_cuts(paths):
    """Quadrature breakpoints of any smooth-plateau reparametrized operands.

    Uniform time nodes cannot see plateaus narrower than the node spacing,
    so the integrand is split at the plateau/ramp boundaries instead."""
    cuts = {0.0, 1.0}
    for p in paths:
        curve = getattr(p, "curve", None)
        if curve is not None and getattr(curve, "kind", None) == "smooth-plateau":
            d = curve.delta
            cuts.update((d, 2.0 * d, 1.0 - 2.0 * d, 1.0 - d))
    return sorted(c for c in cuts if 0.0 <= c <= 1.0)


def _aggregate_profile(g, cuts, flavor, nodes_per_segment: int = 17) -> float:
    """Simpson per segment for L1inf, max over all segment nodes for Linf."""
    total = 0.0
    worst = 0.0
    for t0, t1 in zip(cuts[:-1], cuts[1:]):
        if t1 - t0 <= 1e-15:
            continue
        nodes = np.linspace(t0, t1, nodes_per_segment)
        vals = np.array([g(float(t)) for t in nodes])
        total += float(np.dot(_simpson_weights(nodes.size), vals)) * (t1 - t0)
        worst = max(worst, float(vals.max()))
    return total if flavor == "L1inf" else worst


def distance_CH(a: CoIsotopy, b: CoIsotopy, flavor: str = "L1inf",
                resolution: int = DEFAULT_OSC_RESOLUTION,
                time_nodes: int = DEFAULT_TIME_NODES) -> float:
    """D_CH: the co-Hofer length functional applied to the generator difference."""
    _check_flavor(flavor)
    if a.model != b.model:
        raise ModelMismatch("distance requires isotopies on the same model")
    if _kind_of(a) != "coHamiltonian" or _kind_of(b) != "coHamiltonian":
        raise KindMismatch("D_CH is defined for co-Hamiltonian isotopies")
    cuts = _plateau_cuts((a, b))

    def gap(t: float) -> float:
        diff = _fourier_at(a, t) - _fourier_at(b, t)
        reeb = abs(float(a.c_profile([t])[0]) - float(b.c_profile([t])[0]))
        return osc(diff, resolution).value + reeb

    if len(cuts) > 2:
        return _aggregate_profile(gap, cuts, flavor)
    nodes = _time_nodes(time_nodes)
    reeb = np.abs(a.c_profile(nodes) - b.c_profile(nodes))
    vals = np.empty(nodes.size)
    for i, t in enumerate(nodes):
        diff = _fourier_at(a, float(t)) - _fourier_at(b, float(t))
        vals[i] = osc(diff, resolution).value + reeb[i]
    if flavor == "L1inf":
        return float(np.dot(_simpson_weights(nodes.size), vals))
    return float(np.max(vals))


# -- the Aco norm of a single cosymplectic field --------------------------------


def theta_of_field(model: ModelSpec, eta_of_X: FourierScalar) -> float:
    """Theta(X) = (1/Vol) |int_M eta(X) eta ^ omega^n| = |mean of eta(X)|."""
    return abs(eta_of_X.mean())


def aco_norm(model: ModelSpec, iota_omega: OneFormField, eta_of_X: FourierScalar,
             resolution: int = DEFAULT_OSC_RESOLUTION) -> float:
    """nu_Aco(X) = ||H||_L2 + osc(U) + Theta(X) for i(X)omega = H + dU.

    The input form must be closed (equivalently L_X omega = 0)."""
    try:
        harmonic, primitive = hodge_split(iota_omega)
    except Exception as exc:
        raise NotCosymplectic(f"i(X)omega is not closed: {exc}") from exc
    return (l2_norm_harmonic(harmonic, model)
            + osc(primitive.zero_mean(), resolution).value
            + theta_of_field(model, eta_of_X))


def field_data_at(iso: CoIsotopy, t: float):
    """(i(X_t)omega, eta(X_t)) of the velocity field as exact Fourier data."""
    alpha = exterior_derivative(iso.generator.at_time(t))
    eta_part = FourierScalar.constant(iso.model.dim, float(iso.generator.z_slope))
    if iso.reeb is not None:
        eta_part = eta_part + iso.reeb.at_time(t, iso.model.dim)
    return alpha, eta_part


def _inverse_theta_profile(base: CoIsotopy, nodes, grid: int = 256) -> np.ndarray:
    """vartheta_t of an inverse path from the Reeb-pairing inverse identity:
    C(Phi^{-1}, eta)^t = -e^{-f_t o phi_t^{-1}} C(Phi, eta)^t o phi_t^{-1}."""
    from .conformal import inverse_transit

    zgrid = np.linspace(0.0, TWO_PI, grid, endpoint=False)
    pts = np.zeros((grid, base.model.dim))
    pts[:, -1] = zgrid
    out = np.empty(len(nodes))
    for i, t in enumerate(nodes):
        if t == 0.0:
            out[i] = abs(np.mean(base._c_of_z(zgrid, 0.0)))
            continue
        _, f_inv = inverse_transit(base, pts, float(t))
        vals = -np.exp(-f_inv) * base._c_of_z(zgrid, float(t))
        out[i] = abs(np.mean(vals))
    return out


def almost_length(iso, flavor: str = "L1inf",
                  resolution: int = DEFAULT_OSC_RESOLUTION,
                  time_nodes: int = DEFAULT_TIME_NODES):
    """l_AH (almost co-Hamiltonian kind) or l_Aco (cosymplectic kind).

    Both replace the sup of the Reeb pairing by the normalized mean
    vartheta_t; the Aco variant additionally carries the (here vanishing)
    harmonic term through aco_norm."""
    _check_flavor(flavor)
    kind = _kind_of(iso)
    nodes = _time_nodes(time_nodes)
    if kind == "almostCoHamiltonian":
        encs = _osc_profile(iso, nodes, resolution)
        theta = iso.theta_profile(nodes)
        rule = f"composite-simpson/{nodes.size} nodes, osc grid {resolution}"
        return _length_from_terms(nodes, encs, theta, flavor, rule)
    if kind == "cosymplectic":
        encs = _osc_profile(iso, nodes, resolution)
        theta = np.empty(nodes.size)
        harm = np.empty(nodes.size)
        for i, t in enumerate(nodes):
            alpha, eta_part = field_data_at(iso, float(t))
            harmonic, _ = hodge_split(alpha)
            harm[i] = l2_norm_harmonic(harmonic, iso.model)
            theta[i] = theta_of_field(iso.model, eta_part)
        rule = f"composite-simpson/{nodes.size} nodes, osc grid {resolution} (Aco)"
        return _length_from_terms(nodes, encs, theta + harm, flavor, rule)
    raise KindMismatch(
        "almost lengths apply to almostCoHamiltonian or cosymplectic isotopies")


def almost_length_of_inverse(iso: CoIsotopy, flavor: str = "L1inf",
                             resolution: int = DEFAULT_OSC_RESOLUTION,
                             time_nodes: int = DEFAULT_TIME_NODES):
    """l_AH of t -> phi_t^{-1}.

    The oscillation term is unchanged (osc(-F_t o phi_t) = osc(F_t) since
    phi_t is a bijection); the vartheta term follows the inverse identity for
    the Reeb pairing."""
    _check_flavor(flavor)
    if _kind_of(iso) != "almostCoHamiltonian":
        raise KindMismatch("the inverse almost length is for almostCoHamiltonian kind")
    nodes = _time_nodes(time_nodes)
    encs = _osc_profile(iso, nodes, resolution)
    theta = _inverse_theta_profile(iso, nodes)
    rule = f"composite-simpson/{nodes.size} nodes, osc grid {resolution} (inverse)"
    return _length_from_terms(nodes, encs, theta, flavor, rule)


def distance_AH(a: CoIsotopy, b: CoIsotopy, flavor: str = "L1inf",
                resolution: int = DEFAULT_OSC_RESOLUTION,
                time_nodes: int = DEFAULT_TIME_NODES,
                grid: int = 256) -> float:
    """D_AH: osc of the generator difference plus the normalized mean of the
    Reeb-pairing difference."""
    _check_flavor(flavor)
    if a.model != b.model:
        raise ModelMismatch("distance requires isotopies on the same model")
    cuts = _plateau_cuts((a, b))

    def gap(t: float) -> float:
        diff = _fourier_at(a, t) - _fourier_at(b, t)
        drift = abs(float(_signed_mean_c(a, [t], grid)[0]) -
                    float(_signed_mean_c(b, [t], grid)[0]))
        return osc(diff, resolution).value + drift

    if len(cuts) > 2:
        return _aggregate_profile(gap, cuts, flavor)
    nodes = _time_nodes(time_nodes)
    mean_a = _signed_mean_c(a, nodes, grid)
    mean_b = _signed_mean_c(b, nodes, grid)
    vals = np.empty(nodes.size)
    for i, t in enumerate(nodes):
        diff = _fourier_at(a, float(t)) - _fourier_at(b, float(t))
        vals[i] = osc(diff, resolution).value + abs(mean_a[i] - mean_b[i])
    if flavor == "L1inf":
        return float(np.dot(_simpson_weights(nodes.size), vals))
    return float(np.max(vals))


def _signed_mean_c(iso, nodes, grid: int = 256) -> np.ndarray:
    """(1/Vol) int_M C(Phi, eta)^t per node, with sign."""
    fn = getattr(iso, "signed_mean_c", None)
    if fn is not None:
        return fn(nodes)
    if iso.reeb is None or iso.reeb.constant_in_z:
        return iso.c_profile(nodes)
    zgrid = np.linspace(0.0, TWO_PI, grid, endpoint=False)
    pts = np.zeros((zgrid.size, iso.model.dim))
    pts[:, -1] = zgrid
    states, _ = iso.points_at(pts, nodes)
    return np.array([np.mean(iso._c_of_z(s[:, -1], float(t)))
                     for s, t in zip(states, nodes)])


# -- C0 distances ----------------------------------------------------------------


def _sample_grid(model: ModelSpec, resolution: int) -> np.ndarray:
    axes = [np.linspace(0.0, TWO_PI, resolution, endpoint=False)] * model.dim
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def c0_distance(f, g, model: ModelSpec, f_inverse=None, g_inverse=None,
                resolution: int = DEFAULT_C0_RESOLUTION) -> float:
    """d0(f, g): grid sup of the flat-torus distance between images, maximized
    over the forward maps and (when supplied) their inverses.

    This is a lower estimate of the true sup at the given grid resolution."""
    pts = _sample_grid(model, resolution)
    value = float(np.max(model.circular_distance(f(pts), g(pts))))
    if f_inverse is not None and g_inverse is not None:
        value = max(value, float(np.max(
            model.circular_distance(f_inverse(pts), g_inverse(pts)))))
    return value


def path_distance(a, b, time_nodes: int = 9,
                  resolution: int = DEFAULT_C0_RESOLUTION) -> float:
    """dbar(a, b) = max_t d0(phi_t^a, phi_t^b), on a uniform time grid."""
    model = getattr(a, "model", None) or a.base.model
    pts = _sample_grid(model, resolution)
    nodes = np.linspace(0.0, 1.0, time_nodes)
    states_a, _ = a.points_at(pts, nodes)
    states_b, _ = b.points_at(pts, nodes)
    value = 0.0
    for sa, sb in zip(states_a, states_b):
        value = max(value, float(np.max(model.circular_distance(sa, sb))))
    inv_a = getattr(a, "inverse_point", None)
    inv_b = getattr(b, "inverse_point", None)
    if inv_a is not None and inv_b is not None:
        for t in nodes:
            if t == 0.0:
                continue
            value = max(value, float(np.max(
                model.circular_distance(inv_a(pts, float(t)), inv_b(pts, float(t))))))
    return value


def energy_upper_bound(target, candidates, flavor: str = "L1inf",
                       c0_tol: float = 1e-6,
                       resolution: int = DEFAULT_C0_RESOLUTION) -> float:
    """Minimum length over candidate isotopies whose time-1 map matches the
    target's; an upper bound for the energy of the time-1 map, never tight."""
    _check_flavor(flavor)
    model = getattr(target, "model", None) or target.base.model
    best = None
    for cand in candidates:
        gap = c0_distance(cand.time1, target.time1, model, resolution=resolution)
        if gap > c0_tol:
            continue
        if _kind_of(cand) == "coHamiltonian":
            value = _co_hofer_length(cand, flavor, DEFAULT_OSC_RESOLUTION,
                                     DEFAULT_TIME_NODES).value
        else:
            value = almost_length(cand, flavor).value
        best = value if best is None else min(best, value)
    if best is None:
        raise NoValidCandidate("no candidate matches the target time-1 map")
    return float(best)


def cauchy_report(seq, flavor: str = "L1inf",
                  resolution: int = DEFAULT_C0_RESOLUTION,
                  time_nodes: int = DEFAULT_TIME_NODES):
    """Pairwise D and dbar matrices plus the Cauchy margin of the tail."""
    from .reports import SequenceDiagnostics

    _check_flavor(flavor)
    if len(seq) < 2:
        raise ValueError("a sequence diagnostic needs at least two isotopies")
    m = len(seq)
    D = np.zeros((m, m))
    C = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            if _kind_of(seq[i]) == "coHamiltonian" and _kind_of(seq[j]) == "coHamiltonian":
                D[i, j] = distance_CH(seq[i], seq[j], flavor, time_nodes=time_nodes)
            else:
                D[i, j] = distance_AH(seq[i], seq[j], flavor, time_nodes=time_nodes)
            D[j, i] = D[i, j]
            C[i, j] = C[j, i] = path_distance(seq[i], seq[j], resolution=resolution)
    tail = range(max(0, m - 3), m)
    margin = max(D[i, j] for i in tail for j in tail if i != j)
    return SequenceDiagnostics(pairwise_D=D, pairwise_c0=C,
                               cauchy_margin=float(margin), flavor=flavor)
