"""Phases, diagonal and clustered unitaries, length functions and distances.

Dense unitaries are plain complex ``numpy`` arrays throughout; the helpers
here check and manipulate them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from ._kernels import TWO_PI, max_gap_kernel
from .errors import PreconditionError

UNITARY_TOL = 1e-10
RESIDUAL_TOL = 1e-8
VERIFY_TOL = 1e-6

# values this close above -pi are snapped to the canonical antipode +pi
_ANTIPODE_SNAP = 1e-12


def normalize_phase(x: float) -> float:
    """Reduce ``x`` modulo 2*pi into (-pi, pi]."""
    x = float(x)
    if not math.isfinite(x):
        raise PreconditionError(f"phase must be finite, got {x!r}")
    y = math.remainder(x, TWO_PI)
    if y <= -math.pi + _ANTIPODE_SNAP:
        return math.pi
    return y


def normalize_phases(xs) -> np.ndarray:
    a = np.asarray(xs, dtype=np.float64)
    if not np.all(np.isfinite(a)):
        raise PreconditionError("phases must be finite")
    # in-range values are kept bit-for-bit so normalization is idempotent
    inside = (a > -math.pi) & (a <= math.pi)
    y = np.where(inside, a, np.remainder(a + math.pi, TWO_PI) - math.pi)
    y[y <= -math.pi + _ANTIPODE_SNAP] = math.pi
    return y


def chord(a: float, b: float) -> float:
    """|e^{ia} - e^{ib}|."""
    return abs(2.0 * math.sin((a - b) / 2.0))


class DiagonalUnitary:
    """diag(e^{i theta_0}, ..., e^{i theta_{D-1}}) with normalized phases."""

    __slots__ = ("_phases",)

    def __init__(self, phases: Iterable[float]):
        if not isinstance(phases, np.ndarray):
            phases = list(phases)
        p = normalize_phases(np.array(phases, dtype=np.float64, ndmin=1))
        if p.ndim != 1 or p.size == 0:
            raise PreconditionError("a diagonal unitary needs at least one phase")
        p.setflags(write=False)
        self._phases = p

    @property
    def phases(self) -> np.ndarray:
        return self._phases

    @property
    def dim(self) -> int:
        return int(self._phases.size)

    def eigenvalues(self) -> np.ndarray:
        return np.exp(1j * self._phases)

    def matrix(self) -> np.ndarray:
        return np.diag(self.eigenvalues())

    def inverse(self) -> "DiagonalUnitary":
        return DiagonalUnitary(-self._phases)

    def rotated(self, alpha: float) -> "DiagonalUnitary":
        return DiagonalUnitary(self._phases + alpha)

    def permuted(self, order: Sequence[int]) -> "DiagonalUnitary":
        return DiagonalUnitary(self._phases[np.asarray(order, dtype=np.int64)])

    def __len__(self):
        return self.dim

    def __eq__(self, other):
        if not isinstance(other, DiagonalUnitary):
            return NotImplemented
        return self.dim == other.dim and bool(np.array_equal(self._phases, other._phases))

    def __repr__(self):
        return f"DiagonalUnitary({self._phases.tolist()!r})"


@dataclass(frozen=True)
class ClusteredModel:
    """Spectral model: infinite-multiplicity clusters plus finite exceptional phases."""

    clusters: tuple
    exceptional: tuple = ()

    def __post_init__(self):
        clusters = tuple(normalize_phase(c) for c in self.clusters)
        exceptional = tuple((normalize_phase(p), int(k)) for p, k in self.exceptional)
        if not clusters:
            raise PreconditionError("a clustered model needs at least one cluster phase")
        for _, k in exceptional:
            if k < 1:
                raise PreconditionError("exceptional multiplicities must be positive")
        every = list(clusters) + [p for p, _ in exceptional]
        if len(set(every)) != len(every):
            raise PreconditionError("cluster and exceptional phases must be pairwise distinct")
        object.__setattr__(self, "clusters", clusters)
        object.__setattr__(self, "exceptional", exceptional)

    @property
    def finite_rank(self) -> int:
        return sum(k for _, k in self.exceptional)

    def all_phases(self) -> list:
        return list(self.clusters) + [p for p, _ in self.exceptional]

    def rotated(self, alpha: float) -> "ClusteredModel":
        return ClusteredModel(
            tuple(c + alpha for c in self.clusters),
            tuple((p + alpha, k) for p, k in self.exceptional),
        )


# -- length functions ----------------------------------------------------------


def _max_gap(phases) -> tuple[float, int, np.ndarray]:
    p = np.sort(normalize_phases(phases))
    if p.size == 0:
        raise PreconditionError("ell of an empty phase set is undefined")
    gap, idx = max_gap_kernel(p)
    return gap, idx, p


def ell(phases) -> float:
    """inf over unit scalars lambda of max_j |1 - lambda e^{i theta_j}|.

    Closed form 2 sin((2 pi - g)/4), g the largest circular gap.
    """
    if isinstance(phases, DiagonalUnitary):
        phases = phases.phases
    gap, _, _ = _max_gap(np.atleast_1d(phases))
    return max(0.0, 2.0 * math.sin((TWO_PI - gap) / 4.0))


def ell_ess(model: ClusteredModel) -> float:
    return ell(model.clusters)


def centering_rotations(phases, count: int = 1) -> list:
    """Rotations moving the midpoint of the ``count`` largest gaps to the antipode.

    The first entry is the ell-optimal rotation: it centers the arc that carries
    the spectrum at 1. Gaps are ranked by length, ties by lowest start phase.
    """
    p = np.sort(normalize_phases(np.atleast_1d(phases)))
    n = p.size
    gaps = np.empty(n)
    gaps[:-1] = np.diff(p)
    gaps[-1] = TWO_PI - (p[-1] - p[0])
    order = sorted(range(n), key=lambda i: (-gaps[i], i))
    out = []
    for i in order[:count]:
        mid = p[i] + gaps[i] / 2.0
        out.append(normalize_phase(math.pi - mid))
    return out


def ell_unitary(u: np.ndarray) -> float:
    """ell of a dense unitary, through its eigenphases."""
    return ell(np.angle(np.linalg.eigvals(np.asarray(u, dtype=complex))))


# -- distances -------------------------------------------------------------------


def as_matrix(u) -> np.ndarray:
    if isinstance(u, DiagonalUnitary):
        return u.matrix()
    a = np.asarray(u, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise PreconditionError(f"expected a square matrix, got shape {a.shape}")
    return a


def unitarity_defect(u: np.ndarray) -> float:
    u = np.asarray(u, dtype=complex)
    return float(np.linalg.norm(u @ u.conj().T - np.eye(u.shape[0]), 2))


def check_unitary(u, tol: float = UNITARY_TOL) -> np.ndarray:
    m = as_matrix(u)
    defect = unitarity_defect(m)
    if defect > tol:
        raise PreconditionError(f"matrix is not unitary: |UU* - I| = {defect:.3e} > {tol:.1e}")
    return m


def proj_dist(u, v) -> float:
    """ell of u v*: zero iff u is a unit scalar multiple of v."""
    a, b = as_matrix(u), as_matrix(v)
    if a.shape != b.shape:
        raise PreconditionError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    if isinstance(u, DiagonalUnitary) and isinstance(v, DiagonalUnitary):
        return ell(u.phases - v.phases)
    return ell_unitary(a @ b.conj().T)


def hs_norm_diff(u: DiagonalUnitary, v: DiagonalUnitary) -> float:
    """||1 - u v^{-1}||_HS before capping."""
    if u.dim != v.dim:
        raise PreconditionError(f"dimension mismatch: {u.dim} vs {v.dim}")
    d = u.phases - v.phases
    return float(np.sqrt(np.sum(np.abs(1.0 - np.exp(1j * d)) ** 2)))


def hs_dist(u: DiagonalUnitary, v: DiagonalUnitary) -> float:
    return min(1.0, hs_norm_diff(u, v))


# -- diagonalization and materialization -------------------------------------------------


def diagonalize(u, tol: float = UNITARY_TOL) -> tuple[np.ndarray, DiagonalUnitary]:
    """Return (g, d) with u = g diag(d) g*, g unitary, phases of d ascending."""
    m = check_unitary(u, tol)
    t, z = scipy.linalg.schur(m, output="complex")
    phases = normalize_phases(np.angle(np.diag(t)))
    order = np.argsort(phases, kind="stable")
    phases, z = phases[order], z[:, order]
    d = DiagonalUnitary(phases)
    resid = float(np.linalg.norm(m - z @ d.matrix() @ z.conj().T, 2))
    if resid > RESIDUAL_TOL:
        raise PreconditionError(f"eigendecomposition residual {resid:.3e} exceeds {RESIDUAL_TOL:.0e}")
    return z, d


def materialize(model: ClusteredModel, n: int) -> DiagonalUnitary:
    """Truncate a model: clusters round-robin ``n`` times, then exceptional phases."""
    if n < 1:
        raise PreconditionError("truncation N must be at least 1")
    phases = list(model.clusters) * n
    for p, k in model.exceptional:
        phases.extend([p] * k)
    return DiagonalUnitary(phases)


def truncation_for(model: ClusteredModel, dim: int) -> int:
    """The N with dim(materialize(model, N)) == dim."""
    free = dim - model.finite_rank
    k = len(model.clusters)
    if free < k or free % k:
        raise PreconditionError(
            f"dimension {dim} is not reachable: need {model.finite_rank} + N*{k} with N >= 1"
        )
    return free // k


def permutation_matrix(perm: Sequence[int]) -> np.ndarray:
    """P with P e_j = e_{perm[j]}."""
    perm = np.asarray(perm, dtype=np.int64)
    n = perm.size
    p = np.zeros((n, n), dtype=complex)
    p[perm, np.arange(n)] = 1.0
    return p


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR with phase correction."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
