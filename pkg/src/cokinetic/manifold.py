"""Flat model manifolds T^{2n} x S^1 (or x R) and truncated Fourier fields.

Coordinates are ordered (x_1..x_n, y_1..y_n, z); every circle has
circumference 2*pi.  The structure forms are eta = dz and
omega = sum dx_i ^ dy_i, with Reeb field d/dz.  All scalar fields are finite
real Fourier series, so derivatives, means and closedness tests are exact on
coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidDimension, NonConstantForm, NotClosed, UnboundedDomain

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ModelSpec:
    n: int
    z_topology: str = "circle"  # "circle" | "line"

    def __post_init__(self):
        if self.n < 1:
            raise InvalidDimension(f"n must be >= 1, got {self.n}")
        if self.z_topology not in ("circle", "line"):
            raise InvalidDimension(f"unknown z topology {self.z_topology!r}")

    @property
    def dim(self) -> int:
        return 2 * self.n + 1

    @property
    def volume(self) -> float:
        if self.z_topology != "circle":
            raise UnboundedDomain("volume is only defined for the closed model")
        return TWO_PI ** self.dim

    def wrap(self, pts: np.ndarray) -> np.ndarray:
        """Reduce circle coordinates to [0, 2*pi); z only when it is a circle."""
        pts = np.array(pts, dtype=float, copy=True)
        if self.z_topology == "circle":
            pts %= TWO_PI
        else:
            pts[..., :-1] %= TWO_PI
        return pts

    def circular_distance(self, p: np.ndarray, q: np.ndarray) -> np.ndarray:
        """Pointwise flat distance; per-coordinate circular, Euclidean combined."""
        d = np.abs(np.asarray(p, float) - np.asarray(q, float))
        if self.z_topology == "circle":
            d %= TWO_PI
            d = np.minimum(d, TWO_PI - d)
        else:
            dz = d[..., -1:]
            d = d % TWO_PI
            d = np.minimum(d, TWO_PI - d)
            d[..., -1:] = dz
        return np.sqrt(np.sum(d * d, axis=-1))


@dataclass(frozen=True)
class Point:
    x: np.ndarray
    y: np.ndarray
    z: float
    spec: ModelSpec

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, float)) % TWO_PI
        y = np.atleast_1d(np.asarray(self.y, float)) % TWO_PI
        z = float(self.z)
        if self.spec.z_topology == "circle":
            z %= TWO_PI
        if x.shape != (self.spec.n,) or y.shape != (self.spec.n,):
            raise InvalidDimension("x and y must each have length n")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "z", z)

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.x, self.y, [self.z]])

    @classmethod
    def from_array(cls, arr: np.ndarray, spec: ModelSpec) -> "Point":
        arr = np.asarray(arr, float)
        n = spec.n
        return cls(x=arr[:n], y=arr[n:2 * n], z=arr[2 * n], spec=spec)


def _canonicalize(dim, k, a, b):
    """Sign-normalize frequencies, merge duplicates, drop zero terms.

    Convention: the first nonzero entry of every stored frequency is positive;
    cos(-k.t) = cos(k.t) and sin(-k.t) = -sin(k.t) fold the rest in.
    """
    k = np.atleast_2d(np.asarray(k, dtype=np.int64))
    a = np.atleast_1d(np.asarray(a, dtype=float)).copy()
    b = np.atleast_1d(np.asarray(b, dtype=float)).copy()
    if k.size == 0:
        return np.zeros((0, dim), np.int64), np.zeros(0), np.zeros(0)
    if k.shape[1] != dim:
        raise InvalidDimension(f"frequency vectors have length {k.shape[1]}, expected {dim}")
    k = k.copy()
    for i in range(k.shape[0]):
        nz = np.nonzero(k[i])[0]
        if nz.size == 0:
            b[i] = 0.0
        elif k[i, nz[0]] < 0:
            k[i] = -k[i]
            b[i] = -b[i]
    order = np.lexsort(k.T[::-1])
    k, a, b = k[order], a[order], b[order]
    uk, inv = np.unique(k, axis=0, return_inverse=True)
    ua = np.zeros(len(uk))
    ub = np.zeros(len(uk))
    np.add.at(ua, inv, a)
    np.add.at(ub, inv, b)
    keep = (ua != 0.0) | (ub != 0.0)
    return uk[keep], ua[keep], ub[keep]


@dataclass(frozen=True)
class FourierScalar:
    """f(t) = sum_k a_k cos(k.t) + b_k sin(k.t) on the flat model."""

    dim: int
    k: np.ndarray = field(default=None)
    a: np.ndarray = field(default=None)
    b: np.ndarray = field(default=None)

    def __post_init__(self):
        k = self.k if self.k is not None else np.zeros((0, self.dim), np.int64)
        a = self.a if self.a is not None else np.zeros(0)
        b = self.b if self.b is not None else np.zeros(0)
        k, a, b = _canonicalize(self.dim, k, a, b)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    # -- constructors --------------------------------------------------------

    @classmethod
    def zero(cls, dim: int) -> "FourierScalar":
        return cls(dim=dim)

    @classmethod
    def constant(cls, dim: int, value: float) -> "FourierScalar":
        return cls(dim=dim, k=np.zeros((1, dim), np.int64), a=[value], b=[0.0])

    @classmethod
    def from_terms(cls, dim: int, terms) -> "FourierScalar":
        """terms: iterable of (k_vector, a, b)."""
        terms = list(terms)
        if not terms:
            return cls.zero(dim)
        k = np.array([t[0] for t in terms], np.int64)
        a = np.array([t[1] for t in terms], float)
        b = np.array([t[2] for t in terms], float)
        return cls(dim=dim, k=k, a=a, b=b)

    # -- evaluation ----------------------------------------------------------

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, float)
        scalar = pts.ndim == 1
        pts = np.atleast_2d(pts)
        if self.k.shape[0] == 0:
            out = np.zeros(pts.shape[0])
        else:
            ph = pts @ self.k.T
            out = np.cos(ph) @ self.a + np.sin(ph) @ self.b
        return out[0] if scalar else out

    def gradient_at(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, float)
        scalar = pts.ndim == 1
        pts = np.atleast_2d(pts)
        if self.k.shape[0] == 0:
            out = np.zeros((pts.shape[0], self.dim))
        else:
            ph = pts @ self.k.T
            kf = self.k.astype(float)
            out = np.cos(ph) @ (self.b[:, None] * kf) - np.sin(ph) @ (self.a[:, None] * kf)
        return out[0] if scalar else out

    def partial(self, j: int) -> "FourierScalar":
        """Exact partial derivative; same frequency support."""
        kj = self.k[:, j].astype(float)
        return FourierScalar(dim=self.dim, k=self.k, a=self.b * kj, b=-self.a * kj)

    # -- structure -----------------------------------------------------------

    def mean(self) -> float:
        zero_rows = ~self.k.any(axis=1)
        return float(self.a[zero_rows].sum())

    def zero_mean(self) -> "FourierScalar":
        return self - FourierScalar.constant(self.dim, self.mean())

    def active_dims(self) -> np.ndarray:
        if self.k.shape[0] == 0:
            return np.zeros(0, dtype=int)
        return np.nonzero(self.k.any(axis=0))[0]

    def depends_on(self, j: int) -> bool:
        return self.k.shape[0] > 0 and bool(self.k[:, j].any())

    def lipschitz_bound(self) -> float:
        if self.k.shape[0] == 0:
            return 0.0
        return float(np.sum(np.linalg.norm(self.k, axis=1) * (np.abs(self.a) + np.abs(self.b))))

    def hessian_bound(self) -> float:
        if self.k.shape[0] == 0:
            return 0.0
        return float(np.sum(np.sum(self.k.astype(float) ** 2, axis=1) * (np.abs(self.a) + np.abs(self.b))))

    def sup_bound(self) -> float:
        """Coefficient bound on sup |f|."""
        return float(np.sum(np.hypot(self.a, self.b)))

    # -- algebra ---------------------------------------------------------------

    def __add__(self, other: "FourierScalar") -> "FourierScalar":
        return FourierScalar(dim=self.dim,
                             k=np.vstack([self.k, other.k]),
                             a=np.concatenate([self.a, other.a]),
                             b=np.concatenate([self.b, other.b]))

    def __sub__(self, other: "FourierScalar") -> "FourierScalar":
        return self + (-other)

    def __neg__(self) -> "FourierScalar":
        return FourierScalar(dim=self.dim, k=self.k, a=-self.a, b=-self.b)

    def __mul__(self, scalar: float) -> "FourierScalar":
        return FourierScalar(dim=self.dim, k=self.k, a=self.a * scalar, b=self.b * scalar)

    __rmul__ = __mul__

    def allclose(self, other: "FourierScalar", tol: float = 1e-13) -> bool:
        diff = self - other
        if diff.k.shape[0] == 0:
            return True
        return float(np.max(np.abs(diff.a)) + np.max(np.abs(diff.b))) <= tol

    def is_zero(self, tol: float = 0.0) -> bool:
        if self.k.shape[0] == 0:
            return True
        return float(max(np.max(np.abs(self.a)), np.max(np.abs(self.b)))) <= tol


@dataclass(frozen=True)
class OneFormField:
    """2n+1 Fourier coefficients: dx_1..dx_n, dy_1..dy_n, dz."""

    components: tuple
    dim: int

    @classmethod
    def zero(cls, dim: int) -> "OneFormField":
        return cls(components=tuple(FourierScalar.zero(dim) for _ in range(dim)), dim=dim)

    @classmethod
    def of(cls, *components: FourierScalar) -> "OneFormField":
        return cls(components=tuple(components), dim=len(components))

    def closedness_defect(self) -> float:
        """Max coefficient magnitude of d(alpha); exact on the representation."""
        worst = 0.0
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                diff = self.components[j].partial(i) - self.components[i].partial(j)
                if diff.k.shape[0]:
                    worst = max(worst, float(np.max(np.abs(diff.a))), float(np.max(np.abs(diff.b))))
        return worst

    def is_closed(self, tol: float = 1e-13) -> bool:
        return self.closedness_defect() <= tol

    def evaluate(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, float))
        return np.stack([c(pts) for c in self.components], axis=-1)

    def pair_vector(self, vec: np.ndarray, pts: np.ndarray) -> np.ndarray:
        """alpha(X) at pts for vector components vec (N, dim)."""
        return np.sum(self.evaluate(pts) * vec, axis=-1)

    def constant_part(self) -> np.ndarray:
        return np.array([c.mean() for c in self.components])

    def is_constant(self) -> bool:
        return all(c.k.shape[0] == 0 or not c.k.any() for c in self.components)


def exterior_derivative(F: FourierScalar) -> OneFormField:
    return OneFormField(components=tuple(F.partial(j) for j in range(F.dim)), dim=F.dim)


def pairing_matrix(spec: ModelSpec) -> np.ndarray:
    """Matrix of X -> i(X)omega + eta(X) eta in flat coordinates.

    Row r gives the coefficient of the r-th coordinate 1-form; columns index
    vector components.
    """
    n, d = spec.n, spec.dim
    A = np.zeros((d, d))
    for i in range(n):
        A[i, n + i] = -1.0   # dx_i picks up -b_i
        A[n + i, i] = 1.0    # dy_i picks up  a_i
    A[d - 1, d - 1] = 1.0    # dz picks up the Reeb component
    return A


def pairing_I(X: np.ndarray, spec: ModelSpec) -> np.ndarray:
    """Covector of the vector X: sum a_i dy_i - b_i dx_i + c dz."""
    X = np.asarray(X, float)
    return X @ pairing_matrix(spec).T


def pairing_I_inverse(cov: np.ndarray, spec: ModelSpec) -> np.ndarray:
    cov = np.asarray(cov, float)
    return cov @ np.linalg.inv(pairing_matrix(spec)).T


@dataclass(frozen=True)
class OscEnclosure:
    lo: float
    hi: float
    resolution: int

    @property
    def value(self) -> float:
        return self.lo

    @property
    def width(self) -> float:
        return self.hi - self.lo


def _active_grid(active: np.ndarray, resolution: int):
    axes = [np.arange(resolution) * (TWO_PI / resolution) for _ in active]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


_OSC_CHUNK = 1 << 18


def _refine_extremum(kf, a, b, x0, sign, iters=24):
    """Polish a grid extremum of the reduced trig polynomial with Newton steps.

    Maximizes sign * F from x0; any point reached keeps the bound valid, so
    steps that fail to improve are simply backtracked and the best value wins.
    """
    def value(x):
        ph = kf @ x
        return sign * float(np.cos(ph) @ a + np.sin(ph) @ b)

    x = np.asarray(x0, float).copy()
    best = value(x)
    for _ in range(iters):
        ph = kf @ x
        c, s = np.cos(ph), np.sin(ph)
        g = sign * ((c * b - s * a) @ kf)
        gn = np.linalg.norm(g)
        if gn < 1e-14:
            break
        w = -sign * (c * a + s * b)
        H = (kf * w[:, None]).T @ kf
        try:
            step = np.linalg.solve(H, -g)
        except np.linalg.LinAlgError:
            step = g / max(gn, 1e-14)
        if not np.all(np.isfinite(step)) or np.linalg.norm(step) > 1.0:
            step = g / max(gn, 1e-14) * 0.1
        improved = False
        for _ in range(8):
            cand = value(x + step)
            if cand > best:
                x = x + step
                best = cand
                improved = True
                break
            step *= 0.5
        if not improved:
            break
    return sign * best


def osc(F: FourierScalar, resolution: int = 256) -> OscEnclosure:
    """Certified enclosure of max(F) - min(F).

    Grid extrema polished by a few Newton iterations give the lower bound
    (reported as the value: tight and invariant under translations); a
    second-order Taylor envelope (gradient at each grid node plus a global
    Hessian bound over the half-cell radius) gives the upper bound.
    """
    if resolution < 8:
        raise ValueError("resolution must be >= 8")
    active = F.active_dims()
    if active.size == 0:
        return OscEnclosure(lo=0.0, hi=0.0, resolution=resolution)
    k_act = F.k[:, active]
    rho = (np.pi / resolution) * np.sqrt(active.size)
    hess = F.hessian_bound()
    pad = 0.5 * hess * rho * rho

    gmax = -np.inf
    gmin = np.inf
    upper = -np.inf
    lower = np.inf
    arg_max = arg_min = None
    grid = _active_grid(active, resolution)
    kf = k_act.astype(float)
    for start in range(0, grid.shape[0], _OSC_CHUNK):
        pts = grid[start:start + _OSC_CHUNK]
        ph = pts @ k_act.T
        C, S = np.cos(ph), np.sin(ph)
        vals = C @ F.a + S @ F.b
        grads = C @ (F.b[:, None] * kf) - S @ (F.a[:, None] * kf)
        gn = np.linalg.norm(grads, axis=1)
        i_max = int(np.argmax(vals))
        i_min = int(np.argmin(vals))
        if vals[i_max] > gmax:
            gmax = float(vals[i_max])
            arg_max = pts[i_max]
        if vals[i_min] < gmin:
            gmin = float(vals[i_min])
            arg_min = pts[i_min]
        upper = max(upper, float((vals + gn * rho).max()))
        lower = min(lower, float((vals - gn * rho).min()))
    gmax = _refine_extremum(kf, F.a, F.b, arg_max, 1.0)
    gmin = _refine_extremum(kf, F.a, F.b, arg_min, -1.0)
    lo = gmax - gmin
    hi = (upper + pad) - (lower - pad)
    return OscEnclosure(lo=lo, hi=max(hi, lo), resolution=resolution)


def osc_grid_sup(values: np.ndarray) -> float:
    """Plain grid max - min; used for scalars with no Fourier representation."""
    return float(np.max(values) - np.min(values))


def integrate(F: FourierScalar, spec: ModelSpec) -> float:
    """Integral of F against eta ^ omega^n; exact from the zero mode."""
    if spec.z_topology != "circle":
        raise UnboundedDomain("integration requires the closed model")
    return F.mean() * spec.volume


def hodge_split(alpha: OneFormField, tol: float = 1e-13):
    """Split a closed 1-form into its constant (harmonic) part and dU.

    U is the unique zero-mean primitive, read off by dividing Fourier
    coefficients by one nonzero frequency entry.
    """
    if not alpha.is_closed(tol):
        raise NotClosed(f"closedness defect {alpha.closedness_defect():.3e}")
    dim = alpha.dim
    harmonic = OneFormField(
        components=tuple(FourierScalar.constant(dim, c.mean()) for c in alpha.components),
        dim=dim,
    )
    # every nonzero frequency is recovered from the first component it moves
    terms = []
    seen = set()
    for comp in alpha.components:
        for row in range(comp.k.shape[0]):
            kvec = comp.k[row]
            if not kvec.any():
                continue
            key = tuple(int(v) for v in kvec)
            if key in seen:
                continue
            seen.add(key)
            j = int(np.nonzero(kvec)[0][0])
            src = alpha.components[j]
            match = np.nonzero((src.k == kvec).all(axis=1))[0]
            if match.size == 0:
                raise NotClosed("component mismatch across frequencies")
            r = int(match[0])
            kj = float(kvec[j])
            # dU/dt_j = a cos + b sin  =>  U gets (-b/kj) cos + (a/kj) sin
            terms.append((kvec, -src.b[r] / kj, src.a[r] / kj))
    U = FourierScalar.from_terms(dim, terms)
    # verify the reconstruction exactly on coefficients
    recon = exterior_derivative(U)
    for j in range(dim):
        expect = alpha.components[j] - harmonic.components[j]
        if not recon.components[j].allclose(expect, tol):
            raise NotClosed("primitive reconstruction failed; form is not closed")
    return harmonic, U


def l2_norm_harmonic(h: OneFormField, spec: ModelSpec) -> float:
    """L2 norm of a constant-coefficient form in the flat product metric."""
    if not h.is_constant():
        raise NonConstantForm("harmonic part must have constant coefficients")
    c = h.constant_part()
    return float(np.sqrt(spec.volume * np.sum(c * c)))
