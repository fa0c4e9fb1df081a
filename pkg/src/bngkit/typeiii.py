"""Finite-spectrum stand-ins for the constructive type III steps.

A nonzero projection splitting into two nonzero subprojections is modeled
by an eigenspace of multiplicity at least two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .certify import Certificate, _checked
from .core import (
    UNITARY_TOL,
    chord,
    check_unitary,
    ell,
    ell_unitary,
    normalize_phase,
)
from .errors import PreconditionError, VerificationError


@dataclass(frozen=True)
class FiniteSpectrumUnitary:
    """basis @ diag(phases expanded by multiplicity) @ basis*; basis None means canonical."""

    eigenphases: tuple  # ((phase, multiplicity), ...)
    basis: Optional[np.ndarray] = None

    def __post_init__(self):
        eig = tuple((normalize_phase(p), int(k)) for p, k in self.eigenphases)
        if not eig:
            raise PreconditionError("need at least one eigenphase")
        if any(k < 1 for _, k in eig):
            raise PreconditionError("multiplicities must be positive")
        object.__setattr__(self, "eigenphases", eig)
        if self.basis is not None:
            b = check_unitary(self.basis, UNITARY_TOL)
            if b.shape[0] != self.dim:
                raise PreconditionError(f"basis has dimension {b.shape[0]}, spectrum has {self.dim}")
            object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return sum(k for _, k in self.eigenphases)

    def __eq__(self, other):
        if not isinstance(other, FiniteSpectrumUnitary):
            return NotImplemented
        if self.eigenphases != other.eigenphases or (self.basis is None) != (other.basis is None):
            return False
        return self.basis is None or bool(np.array_equal(self.basis, other.basis))

    __hash__ = None

    def expanded(self) -> np.ndarray:
        return np.concatenate([np.full(k, p) for p, k in self.eigenphases])

    def matrix(self) -> np.ndarray:
        d = np.diag(np.exp(1j * self.expanded()))
        if self.basis is None:
            return d
        return self.basis @ d @ self.basis.conj().T


def _extreme_pair(eig) -> tuple[int, int]:
    best, pair = -1.0, (0, 0)
    for i in range(len(eig)):
        for j in range(i + 1, len(eig)):
            c = chord(eig[i][0], eig[j][0])
            if c > best + 1e-15:
                best, pair = c, (i, j)
    return pair


def commutator(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return u @ v @ u.conj().T @ v.conj().T


def commutator_witness(u: FiniteSpectrumUnitary) -> tuple[np.ndarray, float]:
    """A unitary v with ell(u) <= 4 ell([u, v]); returns (v, ell(u) / ell([u, v])).

    v swaps a piece of the eigenspace of lambda_0 with an equal-sized piece of
    the eigenspace of lambda_1, where |lambda_0 - lambda_1| is the largest
    eigenvalue difference. Both eigenspaces keep a nonzero remainder.
    """
    eig = u.eigenphases
    if len(eig) < 2:
        raise PreconditionError("central input: u is a scalar, the claim is trivial")
    i, j = _extreme_pair(eig)
    if eig[i][1] < 2 or eig[j][1] < 2:
        raise PreconditionError(
            f"eigenphases {eig[i][0]:.6g} and {eig[j][0]:.6g} need multiplicity >= 2, "
            f"got {eig[i][1]} and {eig[j][1]}"
        )
    offsets = np.cumsum([0] + [k for _, k in eig])
    half = min(eig[i][1], eig[j][1]) // 2
    perm = np.arange(u.dim)
    a, b = offsets[i], offsets[j]
    perm[a : a + half], perm[b : b + half] = np.arange(b, b + half), np.arange(a, a + half)
    w = np.zeros((u.dim, u.dim), dtype=complex)
    w[perm, np.arange(u.dim)] = 1.0
    if u.basis is not None:
        w = u.basis @ w @ u.basis.conj().T
    lu = ell(u.expanded())
    lc = ell_unitary(commutator(u.matrix(), w))
    ratio = lu / lc if lc > 0.0 else (0.0 if lu == 0.0 else math.inf)
    if lu > 4.0 * lc + 1e-9:
        raise VerificationError(f"witness violates ell(u) <= 4 ell([u,v]): {lu:.6g} vs {lc:.6g}")
    return w, ratio


def doubled_commutator(v0: np.ndarray, w0: np.ndarray, tol: float = 1e-8):
    """([v0,w0] + [v0,w0]^{-1} as a block diagonal, 4-factor certificate over v0 + v0)."""
    v0 = check_unitary(v0)
    w0 = check_unitary(w0)
    if v0.shape != w0.shape:
        raise PreconditionError(f"dimension mismatch: {v0.shape[0]} vs {w0.shape[0]}")
    n = v0.shape[0]
    eye = np.eye(n, dtype=complex)
    zero = np.zeros((n, n), dtype=complex)

    def block(a, b):
        return np.block([[a, zero], [zero, b]])

    c = commutator(v0, w0)
    target = block(c, c.conj().T)
    factors = [
        (1, block(eye, eye)),  # v0 + v0
        (-1, block(w0, eye)),  # w0 v0* w0* + v0*  -> product so far c + 1
        (1, block(eye, w0)),  # v0 + w0 v0 w0*
        (-1, block(eye, eye)),  # v0* + v0*       -> adds 1 + c^{-1}
    ]
    cert = Certificate(block(v0, v0), target, factors, 4, mode="typeiii", meta={"pipeline": "doubled"})
    return target, _checked(cert, tol)


def ng_bound_typeiii(v) -> int:
    """ceil(2048 / ell(v)); ``v`` is a length or anything ng_bound accepts."""
    from .certify import ng_bound

    return ng_bound(v, mode="typeiii")
