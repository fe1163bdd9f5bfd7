"""Finite-dimensional cosymplectic linear algebra.

A couple is an antisymmetric bilinear form ``b`` together with a nonzero
covector ``L``.  The pairing matrix ``A = b + L^T L`` represents the map
``Y -> i(Y)b + L(Y) L``; the couple is cosymplectic when that map is a
bijection.  The Reeb vector, when it exists, solves ``b @ xi = 0`` and
``L @ xi = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidDimension, NoReebVector, NotCosymplectic, SingularChangeOfBasis

ANTISYM_TOL = 1e-12
REEB_TOL = 1e-9
DET_SCALE = 1e-10


@dataclass(frozen=True)
class CosymplecticCouple:
    b: np.ndarray  # (dim, dim), antisymmetric
    L: np.ndarray  # (dim,), nonzero

    def __post_init__(self):
        b = np.asarray(self.b, dtype=float)
        L = np.asarray(self.L, dtype=float)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise InvalidDimension(f"b must be square, got shape {b.shape}")
        if L.shape != (b.shape[0],):
            raise InvalidDimension(f"L has shape {L.shape}, expected ({b.shape[0]},)")
        if not np.array_equal(b, -b.T):
            # allow tiny asymmetry from construction arithmetic, then resymmetrize
            if np.max(np.abs(b + b.T)) > ANTISYM_TOL * max(1.0, np.max(np.abs(b))):
                raise InvalidDimension("b is not antisymmetric")
            b = 0.5 * (b - b.T)
        if not np.any(L):
            raise InvalidDimension("L must be a nonzero covector")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "L", L)

    @property
    def dim(self) -> int:
        return self.b.shape[0]


@dataclass(frozen=True)
class PairingMatrix:
    A: np.ndarray

    @property
    def dim(self) -> int:
        return self.A.shape[0]


def canonical_couple(n: int) -> CosymplecticCouple:
    """Canonical couple on dimension 2n+1: b = blockdiag(J_2n, 0), L = e_{2n}."""
    if n < 1:
        raise InvalidDimension(f"n must be >= 1, got {n}")
    dim = 2 * n + 1
    b = np.zeros((dim, dim))
    for i in range(n):
        b[2 * i, 2 * i + 1] = 1.0
        b[2 * i + 1, 2 * i] = -1.0
    L = np.zeros(dim)
    L[-1] = 1.0
    return CosymplecticCouple(b=b, L=L)


def build_pairing(c: CosymplecticCouple) -> PairingMatrix:
    return PairingMatrix(A=c.b + np.outer(c.L, c.L))


def is_cosymplectic(c: CosymplecticCouple) -> bool:
    """Scale-aware invertibility test of the pairing matrix."""
    A = build_pairing(c).A
    norm = np.linalg.norm(A, 2)
    if norm == 0.0:
        return False
    return abs(np.linalg.det(A)) > DET_SCALE * norm ** c.dim


def reeb_vector(c: CosymplecticCouple, tol: float = REEB_TOL) -> np.ndarray:
    """Solve [b; L] xi = [0; 1] in least squares and validate the residual."""
    if not is_cosymplectic(c):
        raise NotCosymplectic("couple has a singular pairing matrix")
    M = np.vstack([c.b, c.L[None, :]])
    rhs = np.zeros(c.dim + 1)
    rhs[-1] = 1.0
    xi, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    residual = np.linalg.norm(M @ xi - rhs)
    if residual > tol:
        raise NoReebVector(f"stacked-system residual {residual:.3e} exceeds {tol:.1e}")
    return xi


def pullback_couple(c: CosymplecticCouple, P: np.ndarray, tol: float = 1e-12) -> CosymplecticCouple:
    """Change of basis: b'(u, v) = b(Pu, Pv), L' = L o P."""
    P = np.asarray(P, dtype=float)
    if abs(np.linalg.det(P)) <= tol:
        raise SingularChangeOfBasis("change-of-basis matrix is singular")
    return CosymplecticCouple(b=P.T @ c.b @ P, L=c.L @ P)
