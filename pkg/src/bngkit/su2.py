"""Diagonal SU(2) targets as products of conjugates of a diagonal SU(2) element."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import PreconditionError

FLIP = np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=complex)
I2 = np.eye(2, dtype=complex)

# bracket width at which bisection stops; the bracketed quantity is sin(psi/2)
BISECT_WIDTH = 1e-15
BISECT_MAX_ITER = 200
_ANGLE_SLACK = 1e-12


def su2_diag(angle: float) -> np.ndarray:
    return np.diag([np.exp(1j * angle), np.exp(-1j * angle)])


def rotation(t: float) -> np.ndarray:
    c, s = math.cos(t), math.sin(t)
    return np.array([[c, -s], [s, c]], dtype=complex)


def eigenphase(g: np.ndarray, tol: float = 1e-8) -> float:
    """psi in [0, pi] with eigenvalues e^{+-i psi}.

    Uses atan2 of |g - g*| against Re tr / 2, which equals arccos(Re tr / 2)
    but keeps full accuracy near 0 and pi.
    """
    g = np.asarray(g, dtype=complex)
    half_trace = float(np.real(np.trace(g))) / 2.0
    if abs(half_trace) > 1.0 + tol:
        raise PreconditionError(f"Re(trace)/2 = {half_trace:.6g} is outside [-1, 1]")
    sin_psi = float(np.linalg.norm(g - g.conj().T)) / (2.0 * math.sqrt(2.0))
    return math.atan2(sin_psi, half_trace)


def _half_chord(p: np.ndarray) -> float:
    # sin(psi/2) for p in SU(2), read off |p - 1| to stay accurate near psi = 0
    return float(np.linalg.norm(p - I2)) / (2.0 * math.sqrt(2.0))


def _check_theta(theta: float):
    if theta == 0.0:
        raise PreconditionError("base angle theta must be nonzero")
    if abs(theta) > math.pi / 2 + _ANGLE_SLACK:
        raise PreconditionError(f"|theta| = {abs(theta):.6g} exceeds pi/2")


def _align(p: np.ndarray, phi: float) -> np.ndarray:
    """q in SU(2) with q* p q = diag(e^{i phi}, e^{-i phi}) for p of eigenphase |phi|."""
    t, q = scipy.linalg.schur(p, output="complex")
    if abs(t[0, 0] - np.exp(1j * phi)) > abs(t[0, 0] - np.exp(-1j * phi)):
        q = q @ FLIP
    return q / np.sqrt(np.linalg.det(q))


def su2_pair_solve(theta: float, phi: float) -> tuple[np.ndarray, np.ndarray]:
    """(g1, g2) with g1 v g1* g2 v g2* = diag(e^{i phi}, e^{-i phi}), v = diag(e^{i theta}, e^{-i theta}).

    Walks g(t) = rotation(t) from t = 0, where v g v g* = v^2 has eigenphase
    2|theta|, to t = pi/2, where it is the identity, and bisects for
    eigenphase |phi|. No monotonicity is assumed beyond the bracket.
    """
    _check_theta(theta)
    if abs(phi) > 2.0 * abs(theta) + _ANGLE_SLACK:
        raise PreconditionError(f"|phi| = {abs(phi):.6g} exceeds 2|theta| = {2 * abs(theta):.6g}")
    if phi == 0.0:
        return I2.copy(), FLIP.copy()
    v = su2_diag(theta)
    want = math.sin(min(abs(phi), 2.0 * abs(theta)) / 2.0)

    def excess(t):
        g = rotation(t)
        return _half_chord(v @ g @ v @ g.conj().T) - want

    lo, hi = 0.0, math.pi / 2
    if excess(lo) <= 0.0:
        hi = lo
    else:
        for _ in range(BISECT_MAX_ITER):
            mid = 0.5 * (lo + hi)
            if excess(mid) > 0.0:
                lo = mid
            else:
                hi = mid
            if hi - lo < BISECT_WIDTH:
                break
    g = rotation(hi)
    q = _align(v @ g @ v @ g.conj().T, phi)
    return q.conj().T, q.conj().T @ g


@dataclass(frozen=True)
class ConjugateChain:
    theta: float
    phi: float
    conjugators: tuple

    @property
    def m(self) -> int:
        return len(self.conjugators)

    def factors(self) -> list:
        v = su2_diag(self.theta)
        return [g @ v @ g.conj().T for g in self.conjugators]

    def product(self) -> np.ndarray:
        out = I2.copy()
        for f in self.factors():
            out = out @ f
        return out


def su2_chain(theta: float, phi: float, m: int) -> ConjugateChain:
    """Exactly ``m`` conjugates of diag(e^{i theta}, e^{-i theta}) multiplying to diag(e^{i phi}, e^{-i phi})."""
    if m < 2 or m % 2:
        raise PreconditionError(f"chain length m must be a positive even integer, got {m}")
    _check_theta(theta)
    if abs(phi) > m * abs(theta) + _ANGLE_SLACK:
        raise PreconditionError(f"|phi| = {abs(phi):.6g} exceeds m|theta| = {m * abs(theta):.6g}")
    step = phi / (m // 2)
    g1, g2 = su2_pair_solve(theta, step)
    return ConjugateChain(float(theta), float(phi), (g1, g2) * (m // 2))


def embed_block(g: np.ndarray, j: int, dim: int) -> np.ndarray:
    """Identity of size ``dim`` with ``g`` on rows/columns (j, j+1)."""
    if not 0 <= j <= dim - 2:
        raise PreconditionError(f"block position {j} out of range for dimension {dim}")
    out = np.eye(dim, dtype=complex)
    out[j : j + 2, j : j + 2] = g
    return out
