"""Certificates of membership in (v^G u v^{-G})^k, their generation and verification.

A certificate lists signed conjugators (s_i, g_i). It claims that
prod_i g_i base^{s_i} g_i* equals the target up to a unit scalar, with at most
``claimed_bound`` factors. ``verify`` checks this from the matrices alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import (
    VERIFY_TOL,
    ClusteredModel,
    DiagonalUnitary,
    as_matrix,
    centering_rotations,
    chord,
    diagonalize,
    ell,
    ell_ess,
    ell_unitary,
    materialize,
    normalize_phases,
    permutation_matrix,
    proj_dist,
    truncation_for,
    unitarity_defect,
)
from .decomp import (
    FactorSequence,
    angle_normalize,
    greedy_order,
    product_decomposition,
    split_angles,
)
from .errors import InfeasibleError, PreconditionError, VerificationError
from .su2 import FLIP, su2_chain

_E1_SLACK = 1e-12
_ZERO_BLOCK = 1e-14
MAX_GROUPS = 8


@dataclass
class Certificate:
    base: object  # DiagonalUnitary or dense matrix
    target: object  # DiagonalUnitary or dense matrix
    factors: list  # [(sign, conjugator), ...]
    claimed_bound: int
    mode: str = "matrix"
    meta: dict = field(default_factory=dict)

    @property
    def count(self) -> int:
        return len(self.factors)

    @property
    def dim(self) -> int:
        return as_matrix(self.base).shape[0]

    def product(self) -> np.ndarray:
        b = as_matrix(self.base)
        b_inv = b.conj().T
        out = np.eye(b.shape[0], dtype=complex)
        for sign, g in self.factors:
            out = out @ g @ (b if sign > 0 else b_inv) @ g.conj().T
        return out


@dataclass
class Report:
    passed: bool
    product_residual: float
    worst_index: int
    worst_residual: float
    count_ok: bool
    failures: list

    def to_json(self) -> dict:
        return {
            "pass": self.passed,
            "product_residual": _finite_or_none(self.product_residual),
            "worst_factor": {"index": self.worst_index, "residual": _finite_or_none(self.worst_residual)},
            "count_ok": self.count_ok,
            "failures": list(self.failures),
        }


def _finite_or_none(x: float):
    # JSON has no infinity; a malformed factor reports its residual as null
    return float(x) if math.isfinite(x) else None


def _spectrum_mismatch(eigs: np.ndarray, expected: np.ndarray) -> float:
    cost = np.abs(eigs[:, None] - expected[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def verify(cert: Certificate, tol: float = VERIFY_TOL) -> Report:
    """Recompute every factor and the product; never trusts how ``cert`` was made."""
    b = as_matrix(cert.base)
    if isinstance(cert.base, DiagonalUnitary):
        base_eigs = cert.base.eigenvalues()
    else:
        base_eigs = np.linalg.eigvals(b)
    b_inv = b.conj().T
    worst_i, worst_r = -1, 0.0
    out = np.eye(b.shape[0], dtype=complex)
    for i, (sign, g) in enumerate(cert.factors):
        g = np.asarray(g, dtype=complex)
        if sign not in (1, -1) or g.shape != b.shape:
            resid = math.inf
        else:
            f = g @ (b if sign > 0 else b_inv) @ g.conj().T
            expected = base_eigs if sign > 0 else base_eigs.conj()
            resid = max(unitarity_defect(g), _spectrum_mismatch(np.linalg.eigvals(f), expected))
            out = out @ f
        if resid > worst_r or worst_i < 0:
            worst_i, worst_r = i, resid
    try:
        prod_resid = proj_dist(out, as_matrix(cert.target))
    except PreconditionError:
        prod_resid = math.inf
    count_ok = cert.count <= cert.claimed_bound
    failures = []
    if worst_r > tol:
        failures.append("factor")
    if not prod_resid <= tol:
        failures.append("product")
    if not count_ok:
        failures.append("count")
    return Report(not failures, float(prod_resid), worst_i, float(worst_r), count_ok, failures)


def _checked(cert: Certificate, tol: float) -> Certificate:
    report = verify(cert, tol)
    if not report.passed:
        raise VerificationError(f"generated certificate failed verification: {report.failures}", report)
    return cert


# -- block arrangement ----------------------------------------------------------------


@dataclass
class BlockPlan:
    positions: list  # block starts in the arranged base, spacing 2
    pairs: list  # (gamma_plus, gamma_minus) hosted by each block
    chords: list
    host: np.ndarray  # w with arranged = w base w*
    base: DiagonalUnitary  # canonical materialization


def _pool(base: DiagonalUnitary) -> tuple[list, list]:
    values, counts = [], []
    for p in base.phases:
        p = float(p)
        if p in values:
            counts[values.index(p)] += 1
        else:
            values.append(p)
            counts.append(1)
    return values, counts


def _best_pairs(values: list, counts: list, wanted: int) -> list:
    """Greedily take ``wanted`` disjoint pairs of distinct phases, largest chord first."""
    k = len(values)
    counts = list(counts)
    if k < 2 or wanted <= 0:
        return []
    vals = np.asarray(values)
    chords = np.abs(2.0 * np.sin((vals[:, None] - vals[None, :]) / 2.0))
    chords[np.tril_indices(k)] = -1.0
    pairs = []
    while len(pairs) < wanted:
        avail = np.asarray(counts) > 0
        masked = np.where(avail[:, None] & avail[None, :], chords, -1.0)
        flat = int(np.argmax(masked))
        a, b = divmod(flat, k)
        if masked[a, b] <= 0.0:
            break
        take = min(counts[a], counts[b], wanted - len(pairs))
        pairs.extend([(values[a], values[b])] * take)
        counts[a] -= take
        counts[b] -= take
    return pairs


def _host_permutation(arranged: Sequence[float], base: DiagonalUnitary) -> np.ndarray:
    """Index map src with arranged[i] == base[src[i]], earliest unused index first."""
    free = {}
    for idx, p in enumerate(base.phases):
        free.setdefault(float(p), []).append(idx)
    src = np.empty(len(arranged), dtype=np.int64)
    for i, p in enumerate(arranged):
        src[i] = free[float(p)].pop(0)
    return src


def arrange_gap_blocks(v: ClusteredModel, required_gap, block_count: int, dim: int):
    """Rearrange the materialized base so blocks (0,1), (2,3), ... host wide phase pairs.

    ``required_gap`` is a scalar or one value per block (blocks are ordered by
    decreasing chord). Returns (arranged DiagonalUnitary, BlockPlan).
    """
    base = materialize(v, truncation_for(v, dim))
    if block_count < 0:
        raise PreconditionError("block_count must be nonnegative")
    if 2 * block_count > dim:
        raise InfeasibleError(
            f"dimension {dim} cannot host {block_count} blocks", suggested_dim=2 * block_count
        )
    values, counts = _pool(base)
    pairs = _best_pairs(values, counts, block_count)
    req = np.broadcast_to(np.asarray(required_gap, dtype=np.float64), (block_count,))
    if len(pairs) < block_count:
        have = chord(*pairs[0]) if pairs else 0.0
        raise InfeasibleError(
            f"only {len(pairs)} phase pairs with positive chord for {block_count} blocks "
            f"(max chord {have:.6g}, required {float(req.max()) if block_count else 0.0:.6g})"
        )
    chords = [chord(a, b) for a, b in pairs]
    for k, (c, r) in enumerate(zip(chords, req)):
        if c < r * (1.0 - 1e-12):
            raise InfeasibleError(f"block {k}: chord {c:.6g} is below the required gap {r:.6g}")
    arranged = [p for ab in pairs for p in ab]
    used = _host_permutation(arranged, base)
    rest = [i for i in range(dim) if i not in set(used.tolist())]
    src = np.concatenate([used, np.asarray(rest, dtype=np.int64)])
    host = np.zeros((dim, dim), dtype=complex)
    host[np.arange(dim), src] = 1.0
    plan = BlockPlan(list(range(0, 2 * block_count, 2)), pairs, chords, host, base)
    return base.permuted(src), plan


# -- block-parallel generation -------------------------------------------------------


def _block_su2(a: float, b: float) -> tuple[float, float]:
    """(theta, c) with (e^{ia}, e^{ib}) = e^{ic} (e^{i theta}, e^{-i theta}), theta in (-pi/2, pi/2]."""
    theta = (a - b) / 2.0
    if theta > math.pi / 2:
        theta -= math.pi
    elif theta <= -math.pi / 2:
        theta += math.pi
    return theta, a - theta


def infsim_generate(
    u_factors: FactorSequence,
    indices: Sequence[int],
    arranged: DiagonalUnitary,
    plan: BlockPlan,
    m: int,
    tol: float = VERIFY_TOL,
    check: bool = True,
) -> Certificate:
    """Generate prod_{i in indices} u_i from 4m signed conjugates of the base.

    All blocks are driven in parallel: round r conjugates every block by its
    own r-th SU(2) chain element, so the count does not depend on how many
    blocks there are. The 2m inverse factors cancel the off-block part and the
    per-block scalar.
    """
    if m < 2 or m % 2:
        raise PreconditionError(f"m must be a positive even integer, got {m}")
    if u_factors.kind != "product":
        raise PreconditionError("infsim_generate needs a product decomposition")
    dim = arranged.dim
    idx = list(indices)
    srt = sorted(idx)
    if any(b - a <= 1 for a, b in zip(srt, srt[1:])):
        raise PreconditionError("target blocks must be pairwise more than one index apart")
    if len(idx) > len(plan.pairs):
        raise PreconditionError(f"{len(idx)} target blocks but the plan hosts {len(plan.pairs)}")
    s_all = u_factors.block_angles
    order = sorted(idx, key=lambda i: -abs(s_all[i]))
    target = np.zeros(dim)
    for i in idx:
        target[i], target[i + 1] = s_all[i], -s_all[i]
    target = DiagonalUnitary(target)
    if not idx:
        return Certificate(plan.base, target, [], 4 * m, meta={"m": m, "blocks": 0})

    chains = []
    for k, i in enumerate(order):
        s = s_all[i]
        c = plan.chords[k]
        if abs(s) > m * c + _E1_SLACK:
            raise PreconditionError(
                f"block {k} (target index {i}): |s| = {abs(s):.6g} > m * chord = {m * c:.6g}"
            )
        theta, _ = _block_su2(*plan.pairs[k])
        chains.append(su2_chain(theta, s, 2 * m))

    host_map = np.full(dim, -1, dtype=np.int64)
    for k, i in enumerate(order):
        host_map[2 * k], host_map[2 * k + 1] = i, i + 1
    taken = set(host_map[host_map >= 0].tolist())
    free_targets = iter(p for p in range(dim) if p not in taken)
    for j in range(dim):
        if host_map[j] < 0:
            host_map[j] = next(free_targets)
    p = permutation_matrix(host_map)

    factors = []
    nb = len(order)
    for r in range(2 * m):
        x = np.eye(dim, dtype=complex)
        for k in range(nb):
            x[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = chains[k].conjugators[r]
        factors.append((1, p @ x @ plan.host))
    for r in range(2 * m):
        f = np.eye(dim, dtype=complex)
        if r % 2:
            for k in range(nb):
                f[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = FLIP
        factors.append((-1, p @ f @ plan.host))
    cert = Certificate(plan.base, target, factors, 4 * m, meta={"m": m, "blocks": nb})
    return _checked(cert, tol) if check else cert


# -- planning ---------------------------------------------------------------------------


@dataclass
class _Group:
    indices: list  # target block indices, by decreasing |s|
    m: int
    required: list


@dataclass
class _Half:
    order: np.ndarray
    seq: FactorSequence
    groups: list


def _even_ceil(x: float) -> int:
    return max(2, 2 * math.ceil(x / 2.0))


def _plan_group(blocks: list, s_all, values, counts) -> Optional[_Group]:
    pairs = _best_pairs(values, counts, len(blocks))
    if len(pairs) < len(blocks):
        return None
    ratio = max(abs(s_all[i]) / chord(*p) for i, p in zip(blocks, pairs))
    m = _even_ceil(ratio)
    return _Group(list(blocks), m, [abs(s_all[i]) / m for i in blocks])


def _plan_part(blocks: list, s_all, values, counts) -> Optional[list]:
    """Split one parity class into groups minimizing the total 4 m_g."""
    if not blocks:
        return []
    blocks = sorted(blocks, key=lambda i: -abs(s_all[i]))
    best, best_cost = None, math.inf
    for g in range(1, min(len(blocks), MAX_GROUPS) + 1):
        groups = [_plan_group(blocks[t::g], s_all, values, counts) for t in range(g)]
        if any(gr is None for gr in groups):
            continue
        cost = sum(4 * gr.m for gr in groups)
        if cost < best_cost:
            best, best_cost = groups, cost
    return best


def _plan_half(order, angles, values, counts, dim) -> Optional[_Half]:
    seq = product_decomposition(angles)
    s_all = seq.block_angles
    groups = []
    for parity in (0, 1):
        blocks = [j for j in range(parity, dim - 1, 2) if abs(s_all[j]) > _ZERO_BLOCK]
        part = _plan_part(blocks, s_all, values, counts)
        if part is None:
            return None
        groups.extend(part)
    return _Half(np.asarray(order), seq, groups)


def _zero_sum_order(reps: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = reps - float(np.mean(reps))
    a[-1] = -float(np.sum(a[:-1]))
    order = greedy_order(a)
    return order, a[order]


@dataclass
class _Plan:
    pipeline: str
    bound: int
    halves: list

    @property
    def count(self) -> int:
        return sum(4 * g.m for h in self.halves for g in h.groups)


def _plan(u: DiagonalUnitary, v: ClusteredModel, m: int, mode: str) -> _Plan:
    dim = u.dim
    values, counts = _pool(materialize(v, truncation_for(v, dim)))
    try:
        norm = angle_normalize(u)
        pipeline, raw = "balanced", [(norm.order, norm.angles)]
    except InfeasibleError:
        if mode == "calkin":
            norm = angle_normalize(u, check=False)
            pipeline, raw = "balanced", [(norm.order, norm.angles)]
        else:
            alpha = centering_rotations(u.phases)[0]
            first, second = split_angles(normalize_phases(u.phases + alpha))
            pipeline, raw = "split", [_zero_sum_order(first), _zero_sum_order(second)]
    bound = (32 if pipeline == "balanced" else 128) * m
    halves = []
    for order, angles in raw:
        h = _plan_half(order, angles, values, counts, dim)
        if h is None:
            raise InfeasibleError(
                f"not enough phase pairs in the base to host the target blocks at dimension {dim}"
            )
        halves.append(h)
    plan = _Plan(pipeline, bound, halves)
    if plan.count > bound:
        raise InfeasibleError(
            f"{pipeline} pipeline needs {plan.count} factors, above the bound {bound} at dimension {dim}"
        )
    return plan


# -- pipelines ----------------------------------------------------------------------------


def _conjugate_match(u: DiagonalUnitary, base: DiagonalUnitary) -> Optional[tuple[int, np.ndarray]]:
    """(sign, q) with q base^sign q* a unit multiple of u, if such a permutation q exists."""
    ue = u.eigenvalues()
    for sign in (1, -1):
        b = sign * base.phases
        for beta in dict.fromkeys(b.tolist()):
            rotated = np.exp(1j * (b + (u.phases[0] - beta)))
            cost = np.abs(ue[:, None] - rotated[None, :])
            rows, cols = linear_sum_assignment(cost)
            if cost[rows, cols].max() <= 1e-9:
                q = np.zeros((u.dim, u.dim), dtype=complex)
                q[rows, cols] = 1.0
                return sign, q
    return None


def _check_m(m) -> int:
    if int(m) != m or m < 1:
        raise PreconditionError(f"m must be a positive integer, got {m!r}")
    return int(m)


def certify_diag(
    u, v: ClusteredModel, m: int, tol: float = VERIFY_TOL, mode: str = "matrix"
) -> Certificate:
    """Certificate that the diagonal ``u`` lies in (v^G u v^{-G})^k, k <= 32m or 128m.

    The balanced pipeline (zero-sum, angle-sum ordered normalization) claims
    32m; targets without such a normalization go through the split pipeline,
    which claims 128m.
    """
    if not isinstance(u, DiagonalUnitary):
        u = DiagonalUnitary(u)
    m = _check_m(m)
    dim = u.dim
    base = materialize(v, truncation_for(v, dim))
    lu, lv = ell(u.phases), ell_ess(v)
    if lu > m * lv + 1e-9:
        raise PreconditionError(f"ell(u) = {lu:.6g} exceeds m * ell_ess(v) = {m} * {lv:.6g}")
    meta = {"m": m, "dim": dim}
    if lu <= 1e-12:
        cert = Certificate(base, u, [], 32 * m, mode, {**meta, "pipeline": "scalar"})
        return _checked(cert, tol)
    match = _conjugate_match(u, base)
    if match is not None:
        cert = Certificate(base, u, [match], 32 * m, mode, {**meta, "pipeline": "conjugate"})
        return _checked(cert, tol)

    plan = _plan(u, v, m, mode)
    factors = []
    for half in plan.halves:
        frame = permutation_matrix(half.order)
        for group in half.groups:
            arranged, bp = arrange_gap_blocks(v, group.required, len(group.indices), dim)
            sub = infsim_generate(half.seq, group.indices, arranged, bp, group.m, tol, check=False)
            factors.extend((s, frame @ g) for s, g in sub.factors)
    cert = Certificate(base, u, factors, plan.bound, mode, {**meta, "pipeline": plan.pipeline})
    return _checked(cert, tol)


def calkin_m(u: ClusteredModel, v: ClusteredModel) -> int:
    """Smallest integer m with ell_ess(u) <= m ell_ess(v)."""
    lu, lv = ell_ess(u), ell_ess(v)
    if lv <= 1e-14:
        if lu <= 1e-14:
            return 1
        raise PreconditionError("v is a scalar model (ell_ess(v) = 0) but u is not")
    return max(1, math.ceil(lu / lv - 1e-9))


def calkin_dim(u: ClusteredModel, v: ClusteredModel, min_dim: int = 64) -> int:
    step = math.lcm(len(u.clusters), len(v.clusters))
    return step * max(1, math.ceil(min_dim / step))


def certify_calkin(
    u: ClusteredModel, v: ClusteredModel, dim: Optional[int] = None, tol: float = VERIFY_TOL
) -> Certificate:
    """Calkin-mode certificate with at most 32m factors for cluster-only models."""
    if u.exceptional or v.exceptional:
        raise PreconditionError("calkin mode takes cluster-only models (empty exceptional part)")
    m = calkin_m(u, v)
    step = math.lcm(len(u.clusters), len(v.clusters))
    if dim is None:
        dim = calkin_dim(u, v)
    if dim % step:
        raise PreconditionError(f"dimension {dim} must be a multiple of {step}")
    target = materialize(u, dim // len(u.clusters))
    try:
        cert = certify_diag(target, v, m, tol, mode="calkin")
    except InfeasibleError as exc:
        exc.suggested_dim = _scan_dims(u, v, m, dim, step)
        raise
    cert.meta.update({"base_model": v, "target_model": u})
    return cert


def _scan_dims(u, v, m, dim, step) -> Optional[int]:
    for d in range(dim + step, 4 * dim + 1, step):
        try:
            _plan(materialize(u, d // len(u.clusters)), v, m, "calkin")
            return d
        except InfeasibleError:
            continue
    return None


# -- normal generation functions ------------------------------------------------------------


def _length_of(v, mode: str) -> float:
    if isinstance(v, (int, float)):
        return float(v)
    if isinstance(v, ClusteredModel):
        return ell_ess(v) if mode == "calkin" else ell(v.all_phases())
    if isinstance(v, DiagonalUnitary):
        return ell(v.phases)
    return ell_unitary(as_matrix(v))


def ng_bound(v, mode: str = "calkin") -> int:
    """ceil(64 / ell_ess(v)) in calkin mode, ceil(2048 / ell(v)) in typeiii mode.

    ``v`` is a length value, a ClusteredModel, a DiagonalUnitary or a dense unitary.
    """
    if mode not in ("calkin", "typeiii"):
        raise PreconditionError(f"unknown mode {mode!r}")
    length = _length_of(v, mode)
    if length <= 1e-14:
        raise PreconditionError("v is projectively trivial: its length is zero")
    numerator = 64.0 if mode == "calkin" else 2048.0
    return math.ceil(round(numerator / length, 9))


def certify_matrix(u, v: ClusteredModel, m: Optional[int] = None, tol: float = VERIFY_TOL) -> Certificate:
    """Certificate for a dense unitary target: diagonalize, certify, fold the eigenbasis back in."""
    if isinstance(u, DiagonalUnitary):
        g, d = None, u
    else:
        g, d = diagonalize(u)
    if m is None:
        lv = ell_ess(v)
        if lv <= 1e-14:
            raise PreconditionError("v is a scalar model (ell_ess(v) = 0)")
        m = max(1, math.ceil(ell(d.phases) / lv - 1e-9))
    cert = certify_diag(d, v, m, tol)
    if g is None:
        return cert
    cert.factors = [(s, g @ c) for s, c in cert.factors]
    cert.target = as_matrix(u)
    return _checked(cert, tol)
