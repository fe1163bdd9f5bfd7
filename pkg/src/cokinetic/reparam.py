"""Time reparameterization of isotopies and boundary flattening.

A monotone curve zeta: [0,1] -> [0,1] turns an isotopy t -> phi_t into
t -> phi_{zeta(t)}, generated by zetadot(t) * F_{zeta(t)}.  The smooth-plateau
family chi_delta freezes the path near t = 0 and t = 1, which is the
construction behind the flattening lemmas; the verification ops here measure
the resulting distance bounds against Lipschitz-type constants estimated from
sampled difference quotients.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    ConstructionFailed,
    InvalidEpsilon,
    KindMismatch,
    NotCauchy,
    NotNormalized,
    RangeViolation,
)
from .manifold import FourierScalar, OscEnclosure
from .isotopy import CoIsotopy, identity_isotopy, translate_generator
from .reports import VerificationReport

HAM_NODES = 4096
MONOTONE_NODES = 1024
QUOTIENT_PAIRS = 512
SAFETY = 1.25
FLAT_TOL = 1e-12


# -- curves ----------------------------------------------------------------------


def _bump_ratio(u: np.ndarray) -> np.ndarray:
    """The standard C-infinity step: 0 at u<=0, 1 at u>=1, symmetric."""
    u = np.asarray(u, float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        g = np.where(u > 0.0, np.exp(-1.0 / np.clip(u, 1e-300, None)), 0.0)
        h = np.where(u < 1.0, np.exp(-1.0 / np.clip(1.0 - u, 1e-300, None)), 0.0)
    out = np.zeros_like(u)
    pos = (g + h) > 0.0
    out[pos] = g[pos] / (g[pos] + h[pos])
    out[u >= 1.0] = 1.0
    return out


@lru_cache(maxsize=8)
def _ramp_table(nodes: int = 4097):
    """Cumulative integral S(u) = int_0^u step, tabulated once."""
    u = np.linspace(0.0, 1.0, nodes)
    s = _bump_ratio(u)
    h = u[1] - u[0]
    cum = np.concatenate([[0.0], np.cumsum((s[1:] + s[:-1]) * 0.5 * h)])
    # by symmetry S(1) = 1/2 exactly; rescale the table to pin it
    cum *= 0.5 / cum[-1]
    return u, cum


def _ramp_integral(v: np.ndarray) -> np.ndarray:
    u, cum = _ramp_table()
    return np.interp(np.clip(v, 0.0, 1.0), u, cum)


@dataclass(frozen=True)
class ReparamCurve:
    """zeta(t) with derivative, one of identity / polynomial / smooth-plateau."""

    kind: str
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in ("identity", "polynomial", "smooth-plateau", "difference"):
            raise ValueError(f"unknown curve kind {self.kind!r}")
        if self.kind == "smooth-plateau":
            delta = float(self.params[0])
            if not 0.0 < delta < 1.0 / 6.0:
                raise InvalidEpsilon("plateau delta must lie in (0, 1/6)")

    @classmethod
    def identity(cls) -> "ReparamCurve":
        return cls(kind="identity")

    @classmethod
    def polynomial(cls, coeffs) -> "ReparamCurve":
        return cls(kind="polynomial", params=tuple(float(c) for c in coeffs))

    @property
    def delta(self) -> float:
        if self.kind != "smooth-plateau":
            raise ValueError("delta is defined for smooth-plateau curves")
        return float(self.params[0])

    def value(self, t):
        t = np.asarray(t, float)
        if self.kind == "identity":
            return t.copy() if t.ndim else float(t)
        if self.kind == "polynomial":
            return np.polynomial.polynomial.polyval(t, np.asarray(self.params))
        if self.kind == "difference":
            a, b = self.params
            return a.value(t) - b.value(t)
        d = self.delta
        scale = 1.0 / (1.0 - 3.0 * d)
        t_arr = np.atleast_1d(t)
        out = np.empty_like(t_arr)
        lo = t_arr <= d
        ramp_in = (t_arr > d) & (t_arr < 2 * d)
        plateau = (t_arr >= 2 * d) & (t_arr <= 1 - 2 * d)
        ramp_out = (t_arr > 1 - 2 * d) & (t_arr < 1 - d)
        hi = t_arr >= 1 - d
        out[lo] = 0.0
        out[ramp_in] = d * _ramp_integral((t_arr[ramp_in] - d) / d)
        out[plateau] = 0.5 * d + (t_arr[plateau] - 2 * d)
        v = (1 - d - t_arr[ramp_out]) / d
        out[ramp_out] = 0.5 * d + (1 - 4 * d) + d * (0.5 - _ramp_integral(v))
        out[hi] = 1.0 - 3.0 * d
        out *= scale
        return out if np.ndim(t) else float(out[0])

    def derivative(self, t):
        t = np.asarray(t, float)
        if self.kind == "identity":
            return np.ones_like(t) if t.ndim else 1.0
        if self.kind == "polynomial":
            dcoef = np.polynomial.polynomial.polyder(np.asarray(self.params))
            return np.polynomial.polynomial.polyval(t, dcoef)
        if self.kind == "difference":
            a, b = self.params
            return a.derivative(t) - b.derivative(t)
        d = self.delta
        t_arr = np.atleast_1d(t)
        rho = np.zeros_like(t_arr)
        ramp_in = (t_arr > d) & (t_arr < 2 * d)
        plateau = (t_arr >= 2 * d) & (t_arr <= 1 - 2 * d)
        ramp_out = (t_arr > 1 - 2 * d) & (t_arr < 1 - d)
        rho[ramp_in] = _bump_ratio((t_arr[ramp_in] - d) / d)
        rho[plateau] = 1.0
        rho[ramp_out] = _bump_ratio((1 - d - t_arr[ramp_out]) / d)
        rho /= (1.0 - 3.0 * d)
        return rho if np.ndim(t) else float(rho[0])

    def __sub__(self, other: "ReparamCurve") -> "ReparamCurve":
        return ReparamCurve(kind="difference", params=(self, other))

    def is_monotone(self, tol: float = 1e-12) -> bool:
        t = np.linspace(0.0, 1.0, MONOTONE_NODES + 1)
        return bool(np.min(self.derivative(t)) >= -tol)

    def maps_into_unit(self, tol: float = 1e-12) -> bool:
        t = np.linspace(0.0, 1.0, MONOTONE_NODES + 1)
        v = self.value(t)
        return bool(np.min(v) >= -tol and np.max(v) <= 1.0 + tol)

    def to_dict(self) -> dict:
        if self.kind == "difference":
            raise ValueError("difference curves do not serialize")
        return {"kind": self.kind, "params": list(self.params)}


def identity_curve() -> ReparamCurve:
    return ReparamCurve.identity()


def _plateau_breaks(xi: ReparamCurve):
    """Plateau/ramp boundaries of every smooth-plateau curve in the tree."""
    cuts = set()
    stack = [xi]
    while stack:
        c = stack.pop()
        if c.kind == "difference":
            stack.extend(c.params)
        elif c.kind == "smooth-plateau":
            d = c.delta
            cuts.update((d, 2.0 * d, 1.0 - 2.0 * d, 1.0 - d))
    return sorted(c for c in cuts if 0.0 < c < 1.0)


def _simpson_l1(fn, t0: float, t1: float, nodes: int) -> float:
    if nodes % 2 == 1:
        nodes += 1
    t = np.linspace(t0, t1, nodes + 1)
    v = np.abs(fn(t))
    h = t[1] - t[0]
    return float(h / 3.0 * (v[0] + v[-1] + 4 * v[1:-1:2].sum()
                            + 2 * v[2:-1:2].sum()))


def ham_norm(xi: ReparamCurve, nodes: int = HAM_NODES) -> float:
    """||xi||_ham = ||xi||_C0 + ||xidot||_L1 (composite Simpson).

    Smooth-plateau constituents narrower than the node spacing would be
    invisible to a uniform rule, so the L1 quadrature splits at their
    plateau/ramp boundaries."""
    t = np.linspace(0.0, 1.0, nodes + 1)
    sup = float(np.max(np.abs(xi.value(t))))
    breaks = _plateau_breaks(xi)
    if not breaks:
        return sup + _simpson_l1(xi.derivative, 0.0, 1.0, nodes)
    cuts = [0.0] + breaks + [1.0]
    integral = sum(_simpson_l1(xi.derivative, a, b, 256)
                   for a, b in zip(cuts[:-1], cuts[1:]) if b - a > 1e-15)
    return sup + integral


def flatten_curve(epsilon: float) -> ReparamCurve:
    """The smooth-plateau curve chi_delta with delta = min(eps/6, 1/13).

    Guarantees chi(0) = 0, chi(1) = 1, 0 <= chi' <= 1/(1-3 delta) <= 2,
    ||chi - id||_C0 <= 3 delta < eps, and flat ends on [0, delta], [1-delta, 1].
    """
    if not 0.0 < epsilon < 1.0:
        raise InvalidEpsilon("flatten_curve needs 0 < epsilon < 1")
    delta = min(epsilon / 6.0, 1.0 / 13.0)
    return ReparamCurve(kind="smooth-plateau", params=(delta,))


# -- reparametrized paths ----------------------------------------------------------


class ReparamIsotopy:
    """t -> phi_{zeta(t)}; generated by zetadot(t) * F_{zeta(t)}."""

    def __init__(self, base: CoIsotopy, curve: ReparamCurve):
        self.base = base
        self.curve = curve
        self.model = base.model
        self.kind = base.kind
        self.steps = base.steps

    # generator protocol

    def generator_at_time(self, t: float) -> FourierScalar:
        w = float(self.curve.derivative(t))
        return self.base.generator.at_time(float(self.curve.value(t))) * w

    def generator_eval(self, pts: np.ndarray, t: float) -> np.ndarray:
        w = float(self.curve.derivative(t))
        return w * self.base.generator.value(pts, float(self.curve.value(t)))

    def claimed_differential(self, pts: np.ndarray, t: float) -> np.ndarray:
        w = float(self.curve.derivative(t))
        return w * self.base.generator.gradient_value(pts, float(self.curve.value(t)))

    def osc_enclosure_at(self, t: float, resolution: int = 256) -> OscEnclosure:
        w = abs(float(self.curve.derivative(t)))
        enc = self.base.osc_enclosure_at(float(self.curve.value(t)), resolution)
        return OscEnclosure(lo=w * enc.lo, hi=w * enc.hi, resolution=resolution)

    def c_profile(self, times) -> np.ndarray:
        times = np.atleast_1d(np.asarray(times, float))
        return self.curve.derivative(times) * self.base.c_profile(self.curve.value(times))

    def theta_profile(self, times) -> np.ndarray:
        times = np.atleast_1d(np.asarray(times, float))
        return np.abs(self.curve.derivative(times)) * \
            self.base.theta_profile(self.curve.value(times))

    def signed_mean_c(self, times) -> np.ndarray:
        from .norms import _signed_mean_c

        times = np.atleast_1d(np.asarray(times, float))
        return self.curve.derivative(times) * \
            _signed_mean_c(self.base, self.curve.value(times))

    # flow protocol: phi^zeta_t = phi_{zeta(t)} exactly

    def point(self, pts: np.ndarray, t: float) -> np.ndarray:
        return self.base.point(pts, float(self.curve.value(t)))

    def points_at(self, pts: np.ndarray, times, integrands=()):
        if integrands:
            raise NotImplementedError("integrand capture is not reparametrized")
        mapped = self.curve.value(np.atleast_1d(np.asarray(times, float)))
        return self.base.points_at(pts, mapped)

    def inverse_point(self, pts: np.ndarray, t: float) -> np.ndarray:
        return self.base.inverse_point(pts, float(self.curve.value(t)))

    def time1(self, pts: np.ndarray) -> np.ndarray:
        return self.point(pts, 1.0)


def reparametrize(iso: CoIsotopy, zeta: ReparamCurve) -> ReparamIsotopy:
    if not zeta.maps_into_unit():
        raise RangeViolation("the curve must map [0,1] into [0,1]")
    return ReparamIsotopy(iso, zeta)


# -- boundary flatness ---------------------------------------------------------------


def _flat_sup_bound(path, t: float) -> float:
    """A cheap certified upper bound for osc(F_t): twice the coefficient sum."""
    from .norms import _fourier_at

    F = _fourier_at(path, float(t))
    return 2.0 * F.zero_mean().sup_bound()


def _mu_sup_bound(path, t: float) -> float:
    base = path if isinstance(path, CoIsotopy) else getattr(path, "base", None)
    reeb = getattr(base, "reeb", None)
    if reeb is None:
        return 0.0
    w = 1.0
    if hasattr(path, "curve"):
        w = abs(float(path.curve.derivative(t)))
        t = float(path.curve.value(t))
    mu = reeb.at_time(float(t), base.model.dim)
    grad = mu.partial(base.model.dim - 1)
    return w * grad.sup_bound()


def is_boundary_flat(iso, delta: float, nodes: int = 64) -> bool:
    """True when the generator (and mu for the almost kind) vanishes on
    [0, delta) and (1-delta, 1]."""
    if not 0.0 < delta < 1.0:
        raise InvalidEpsilon("delta must lie in (0, 1)")
    boundary = np.concatenate([
        np.linspace(0.0, delta, nodes, endpoint=False),
        1.0 - np.linspace(0.0, delta, nodes, endpoint=False),
    ])
    kind = getattr(iso, "kind", "coHamiltonian")
    for t in boundary:
        if _flat_sup_bound(iso, float(t)) > FLAT_TOL:
            return False
        if kind != "coHamiltonian" and _mu_sup_bound(iso, float(t)) > FLAT_TOL:
            return False
    return True


# -- Lipschitz-type constants --------------------------------------------------------


@dataclass(frozen=True)
class LipschitzData:
    """Sampled-difference-quotient estimates entering the RL2 constant."""

    k0: float
    c0: float
    maxosc: float
    maxC: float

    @property
    def C_of_F_eta(self) -> float:
        return 4.0 * max(max(self.c0, self.maxC), 2.0 * max(self.k0, self.maxosc))


def lipschitz_constants(iso, pairs: int = QUOTIENT_PAIRS) -> LipschitzData:
    """k0, c0 from max difference quotients on a uniform grid (x SAFETY);
    maxosc and maxC as grid maxima of the per-time terms."""
    from .norms import _fourier_at

    t = np.linspace(0.0, 1.0, pairs + 1)
    dt = t[1] - t[0]
    gens = [_fourier_at(iso, float(s)) for s in t]
    quot = [(gens[i + 1] - gens[i]).sup_bound() / dt for i in range(pairs)]
    k0 = SAFETY * max(quot) if quot else 0.0
    if k0 < 1e-14:
        k0 = 0.0
    c = iso.c_profile(t)
    cq = np.abs(np.diff(c)) / dt
    c0 = SAFETY * float(np.max(cq)) if cq.size else 0.0
    if c0 < 1e-14:
        c0 = 0.0
    maxosc = max(2.0 * g.zero_mean().sup_bound() for g in gens)
    maxC = float(np.max(np.abs(c)))
    return LipschitzData(k0=float(k0), c0=float(c0),
                         maxosc=float(maxosc), maxC=maxC)


# -- lemma verification ----------------------------------------------------------------


def verify_rl2(iso, xi1: ReparamCurve, xi2: ReparamCurve,
               flavor: str = "L1inf", tol_slack: float = 0.0) -> VerificationReport:
    """D(Phi^{xi1}, Phi^{xi2}) <= C(F, eta) * ||xi1 - xi2||_ham."""
    from .norms import distance_AH, distance_CH

    for xi in (xi1, xi2):
        if not (xi.is_monotone() and xi.maps_into_unit()):
            raise RangeViolation("curves must be monotone into [0,1]")
    a = reparametrize(iso, xi1)
    b = reparametrize(iso, xi2)
    if getattr(iso, "kind", "coHamiltonian") == "coHamiltonian":
        lhs = distance_CH(a, b, flavor)
    else:
        lhs = distance_AH(a, b, flavor)
    constant = lipschitz_constants(iso).C_of_F_eta
    rhs = constant * ham_norm(xi1 - xi2)
    passed = lhs <= rhs + tol_slack
    return VerificationReport(
        name="reparam_distance_bound",
        residuals={"lhs": float(lhs), "rhs": float(rhs)},
        tolerances={"lhs": float(rhs)},
        passed=passed,
        details={"C_of_F_eta": float(constant),
                 "ham_norm_diff": float(ham_norm(xi1 - xi2)),
                 "flavor": flavor})


def verify_rl3(seq, epsilon: float, test_curves=None,
               flavor: str = "L1inf") -> VerificationReport:
    """The stability step of the Cauchy-sequence argument: past the tail index
    j0, reparameterizations within delta = eps / (3 C) and conjugating
    translations within tau keep all pairwise distances below eps."""
    from .norms import c0_distance, distance_CH

    if epsilon <= 0:
        raise InvalidEpsilon("epsilon must be positive")
    m = len(seq)
    if m < 2:
        raise NotCauchy("a sequence argument needs at least two isotopies")
    # locate the tail index where pairwise distances drop below eps/3
    j0 = None
    for j in range(m - 1):
        gaps = [distance_CH(seq[i], seq[k], flavor)
                for i in range(j, m) for k in range(i + 1, m)]
        if max(gaps) < epsilon / 3.0:
            j0 = j
            break
    if j0 is None:
        raise NotCauchy(f"no tail index reaches pairwise distance < {epsilon / 3.0:g}")
    constant = lipschitz_constants(seq[j0]).C_of_F_eta
    delta = epsilon / (3.0 * max(constant, 1e-12))
    if test_curves is None:
        # a default perturbation of the identity with ham norm ~ delta/2
        amp = delta / 8.0
        test_curves = [ReparamCurve.polynomial((0.0, 1.0 + amp * 2, -amp * 3, amp))]
    worst = 0.0
    rows = []
    for xi in test_curves:
        if ham_norm(xi - ReparamCurve.identity()) > delta:
            raise RangeViolation("test curve leaves the delta-ball around the identity")
        for i in range(j0, m):
            d = distance_CH(reparametrize(seq[i], xi), seq[j0], flavor)
            rows.append({"i": i, "distance": float(d)})
            worst = max(worst, d)
    # item 2: nearby translations move the tail generator uniformly little
    tau = delta
    gen = seq[j0].generator
    shift = np.zeros(seq[j0].model.dim)
    shift[0] = tau / 2.0
    moved = translate_generator(gen, shift)
    sup_gap = max((moved.at_time(float(t)) - gen.at_time(float(t))).sup_bound()
                  for t in np.linspace(0, 1, 9))
    passed = worst < epsilon and sup_gap < epsilon
    return VerificationReport(
        name="cauchy_stability",
        residuals={"max_tail_distance": float(worst),
                   "translation_sup_gap": float(sup_gap)},
        tolerances={"max_tail_distance": float(epsilon),
                    "translation_sup_gap": float(epsilon)},
        passed=passed,
        details={"j0": j0, "delta": float(delta), "tau": float(tau),
                 "C_of_F_eta": float(constant), "window": rows})


# -- flattening constructions ----------------------------------------------------------


def _flow_speed_bound(iso: CoIsotopy) -> float:
    """Crude sup bound for |phidot_t| from the generator's gradient."""
    t = np.linspace(0.0, 1.0, 17)
    bound = 0.0
    for s in t:
        F = iso.generator.at_time(float(s))
        grad = np.sqrt(sum(F.partial(j).sup_bound() ** 2 for j in range(iso.model.dim)))
        reeb = float(np.abs(iso.c_profile([s])[0])) if iso.reeb is None or \
            iso.reeb.constant_in_z else iso.reeb.at_time(float(s), iso.model.dim).sup_bound()
        bound = max(bound, grad + abs(iso.generator.z_slope) + reeb)
    return bound


def boundary_flatten(iso: CoIsotopy, epsilon: float,
                     max_rounds: int = 8) -> tuple:
    """A boundary flat path epsilon-close to iso with the same endpoints.

    Reparametrizes by flatten_curve with the curve budget
    min(eps/C(F,eta), eps/l0, eps) and shrinks until the measured
    certificates (D < eps, dbar < eps, flat ends, equal endpoints) pass.
    """
    from .norms import distance_AH, distance_CH, path_distance

    if epsilon <= 0:
        raise InvalidEpsilon("epsilon must be positive")
    constant = lipschitz_constants(iso).C_of_F_eta
    l0 = _flow_speed_bound(iso)
    budget = min(epsilon / max(constant, 1e-12), epsilon / max(l0, 1e-12), epsilon)
    eps_c = min(budget, 0.999)
    for _ in range(max_rounds):
        curve = flatten_curve(eps_c)
        flat = reparametrize(iso, curve)
        if ham_norm(curve - ReparamCurve.identity()) > budget:
            eps_c *= 0.5
            continue
        if iso.kind == "coHamiltonian":
            dist = distance_CH(iso, flat)
        else:
            dist = distance_AH(iso, flat)
        dbar = path_distance(iso, flat)
        endpoint = _endpoint_gap(iso, flat)
        ok = (dist < epsilon and dbar < epsilon and endpoint <= 1e-8
              and is_boundary_flat(flat, curve.delta))
        if ok:
            report = VerificationReport(
                name="boundary_flatten",
                residuals={"distance": float(dist), "path_distance": float(dbar),
                           "endpoint_gap": float(endpoint)},
                tolerances={"distance": float(epsilon),
                            "path_distance": float(epsilon),
                            "endpoint_gap": 1e-8},
                passed=True,
                details={"delta": curve.delta, "curve_epsilon": float(eps_c),
                         "C_of_F_eta": float(constant), "flow_speed_bound": float(l0)})
            return flat, report
        eps_c *= 0.5
    raise ConstructionFailed(
        f"no flattening certified within {max_rounds} shrink rounds")


def _endpoint_gap(a, b, samples: int = 16, rng=None) -> float:
    rng = rng or np.random.default_rng(7)
    model = getattr(a, "model", None) or a.base.model
    pts = rng.uniform(0.0, 2 * np.pi, size=(samples, model.dim))
    return float(np.max(model.circular_distance(a.time1(pts), b.time1(pts))))


def normalized_flatten(iso: CoIsotopy, epsilon: float) -> tuple:
    """Boundary flattening of a zero-mean generator, with the distance
    inflation bounds measured against C = 4 (K0 + L0)."""
    from .norms import distance_CH

    if iso.generator.normalization != "zero-mean":
        raise NotNormalized("normalized flattening needs a zero-mean generator")
    if not 0.0 < epsilon < 1.0:
        raise InvalidEpsilon("normalized_flatten needs 0 < epsilon < 1")
    curve = flatten_curve(epsilon)
    flat = reparametrize(iso, curve)
    lip = lipschitz_constants(flat)
    C = 4.0 * (lip.k0 + lip.c0)
    ident = identity_isotopy(iso.model, steps=iso.steps)
    d_f_id = distance_CH(iso, ident, "Linf")
    d_f_h = distance_CH(iso, flat, "Linf")
    d_h_id = distance_CH(flat, ident, "Linf")
    endpoint = _endpoint_gap(iso, flat)
    # zero mean is preserved exactly: the reparametrized generator is a scalar
    # multiple of a zero-mean field at each time
    mean_sup = max(abs(flat.generator_at_time(float(t)).mean())
                   for t in np.linspace(0, 1, 33))
    checks = {
        "boundary_flat": is_boundary_flat(flat, curve.delta),
        "zero_mean": mean_sup <= 1e-13,
        "endpoint": endpoint <= 1e-8,
        "bound_4": d_f_h < 2.0 * d_f_id + C * epsilon + 1e-9,
        "bound_5": d_h_id < 3.0 * d_f_id + C * epsilon + 1e-9,
    }
    report = VerificationReport(
        name="normalized_flatten",
        residuals={"D_F_H": float(d_f_h), "D_H_Id": float(d_h_id),
                   "endpoint_gap": float(endpoint), "mean_sup": float(mean_sup)},
        tolerances={"D_F_H": float(2.0 * d_f_id + C * epsilon),
                    "D_H_Id": float(3.0 * d_f_id + C * epsilon),
                    "endpoint_gap": 1e-8, "mean_sup": 1e-13},
        passed=all(checks.values()),
        details={"checks": {k: bool(v) for k, v in checks.items()},
                 "C": float(C), "delta": curve.delta,
                 "D_F_Id": float(d_f_id)})
    return flat, report
