"""Product and torus decompositions of diagonal unitaries, greedy angle balancing."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from ._kernels import greedy_order_kernel
from .core import DiagonalUnitary, centering_rotations, ell, normalize_phase, normalize_phases
from .errors import InfeasibleError, PreconditionError

ZERO_SUM_TOL = 1e-10


@dataclass(frozen=True)
class FactorSequence:
    """Ordered diagonal factors whose product is the decomposed unitary.

    For ``kind == "product"``, ``block_angles[j]`` is the unreduced real
    angle s_j carried by factor j at positions (j, j+1) as (s_j, -s_j).
    """

    kind: str
    factors: tuple
    block_angles: tuple = field(default=())

    @property
    def dim(self) -> int:
        return self.factors[0].dim if self.factors else 0

    def partial_product(self, n: int) -> np.ndarray:
        """Eigenvalues of factors[0] * ... * factors[n]."""
        if not self.factors:
            return np.ones(0, dtype=complex)
        phases = np.stack([f.phases for f in self.factors[: n + 1]])
        return np.prod(np.exp(1j * phases), axis=0)

    def partial_products(self) -> np.ndarray:
        """Row n holds partial_product(n), for every n at once."""
        if not self.factors:
            return np.ones((0, 0), dtype=complex)
        phases = np.stack([f.phases for f in self.factors])
        return np.cumprod(np.exp(1j * phases), axis=0)


def _angles(u) -> np.ndarray:
    if isinstance(u, DiagonalUnitary):
        return np.array(u.phases)
    return np.asarray(u, dtype=np.float64)


def product_decomposition(u) -> FactorSequence:
    """Split a det-1 diagonal into D-1 two-entry blocks carrying prefix sums.

    ``u`` is a DiagonalUnitary or a real angle sequence; either way the angles
    must sum to zero as reals.
    """
    theta = _angles(u)
    d = theta.size
    total = float(np.sum(theta))
    if abs(total) > ZERO_SUM_TOL * max(1.0, float(np.sum(np.abs(theta)))):
        raise PreconditionError(
            f"product decomposition needs zero angle sum, got {total:.3e}; normalize first"
        )
    s = np.cumsum(theta)[:-1]
    factors = []
    for j, sj in enumerate(s):
        ph = np.zeros(d)
        ph[j], ph[j + 1] = sj, -sj
        factors.append(DiagonalUnitary(ph))
    return FactorSequence("product", tuple(factors), tuple(float(x) for x in s))


def torus_decomposition(v) -> FactorSequence:
    """v = prod_j t_j with t_0 constant and t_j stepping by the next phase difference."""
    gamma = _angles(v)
    d = gamma.size
    factors = [DiagonalUnitary(np.full(d, gamma[0]))]
    for j in range(1, d):
        ph = np.zeros(d)
        ph[j:] = gamma[j] - gamma[j - 1]
        factors.append(DiagonalUnitary(ph))
    return FactorSequence("torus", tuple(factors))


def greedy_order(alphas: Sequence[float]) -> np.ndarray:
    """Balancing permutation for a zero-sum sequence.

    While the running sum is positive take the next unused entry <= 0,
    otherwise the next unused entry >= 0 (order of first appearance). Every
    prefix sum then stays within max |alpha_j|.
    """
    a = np.asarray(alphas, dtype=np.float64)
    if a.size == 0:
        return np.zeros(0, dtype=np.int64)
    total = float(np.sum(a))
    if abs(total) > ZERO_SUM_TOL * max(1.0, float(np.sum(np.abs(a)))):
        raise PreconditionError(f"greedy ordering needs a zero-sum sequence, got sum {total:.3e}")
    perm, _ = greedy_order_kernel(a)
    return perm


class AngleNormalization(NamedTuple):
    rotation: float  # phase of the unit scalar applied to u
    order: np.ndarray  # sigma: position n of the result holds entry order[n] of u
    angles: np.ndarray  # zero-sum real angles of the rotated, reordered u
    prefix_bound: float  # max |prefix sum| actually achieved
    limit: float  # 2 ell(u) + pi / D


def _zero_sum_reps(phases: np.ndarray, alpha: float) -> tuple[float, np.ndarray]:
    reps = normalize_phases(phases + alpha)
    shift = -float(np.mean(reps))
    angles = reps + shift
    angles[-1] = -float(np.sum(angles[:-1]))
    return shift, angles


def angle_normalize(u: DiagonalUnitary, check: bool = True) -> AngleNormalization:
    """Rotate and reorder ``u`` into zero-sum, angle-sum ordered form.

    Tries the two largest-gap centering rotations, each followed by the
    uniform zero-sum correction, and keeps the one with the smaller prefix
    bound. With ``check`` the achieved bound must not exceed 2 ell(u) + pi/D.
    """
    if not isinstance(u, DiagonalUnitary):
        u = DiagonalUnitary(u)
    lu = ell(u.phases)
    if lu <= 1e-14:
        raise PreconditionError("scalar input: ell(u) = 0, nothing to normalize")
    limit = 2.0 * lu + math.pi / u.dim
    best = None
    for alpha in dict.fromkeys(centering_rotations(u.phases, 2)):
        shift, angles = _zero_sum_reps(u.phases, alpha)
        order = greedy_order(angles)
        ordered = angles[order]
        bound = float(np.max(np.abs(np.cumsum(ordered))))
        if best is None or bound < best.prefix_bound:
            best = AngleNormalization(normalize_phase(alpha + shift), order, ordered, bound, limit)
    if check and best.prefix_bound > limit + 1e-12:
        raise InfeasibleError(
            f"prefix bound {best.prefix_bound:.6g} exceeds 2*ell(u) + pi/D = {limit:.6g}"
        )
    return best


def split_angles(thetas: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """theta = theta' + theta'' with alternating signs and |theta'|, |theta''| <= 1.5 |theta|."""
    t = np.asarray(thetas, dtype=np.float64)
    sign = np.where(np.arange(t.size) % 2 == 0, 1.0, -1.0)
    a = np.abs(t)
    return t / 2.0 + sign * a, t / 2.0 - sign * a
