"""Acceptance suite: randomized property checks with hard numeric bounds.

Each criterion is a function ``(seed) -> Outcome``. ``run_all`` evaluates them,
optionally across a process pool; the result is deterministic for a fixed
seed because every criterion draws from its own seeded generator.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._kernels import ell_grid_kernel, greedy_order_kernel
from .certify import (
    Certificate,
    arrange_gap_blocks,
    calkin_dim,
    calkin_m,
    certify_calkin,
    certify_diag,
    infsim_generate,
    ng_bound,
    verify,
)
from .core import (
    ClusteredModel,
    DiagonalUnitary,
    as_matrix,
    ell,
    ell_ess,
    ell_unitary,
    random_unitary,
)
from .decomp import product_decomposition, torus_decomposition
from .su2 import eigenphase, su2_chain
from .typeiii import FiniteSpectrumUnitary, commutator, commutator_witness, doubled_commutator


@dataclass
class Outcome:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0
    certificates: list = field(default_factory=list, repr=False)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:2d} {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _rng(seed: int, number: int) -> np.random.Generator:
    return np.random.default_rng([seed, number])


def _length(x) -> float:
    if isinstance(x, DiagonalUnitary):
        return ell(x.phases)
    return ell_unitary(as_matrix(x))


# -- 1 --------------------------------------------------------------------------------


def length_oracle(seed: int = 0, cases: int = 500, grid: int = 100_000) -> Outcome:
    rng = _rng(seed, 1)
    worst = 0.0
    for _ in range(cases):
        d = int(rng.integers(1, 65))
        if rng.random() < 0.3:
            # clumped spectra exercise gaps that wrap around -pi/pi
            phases = rng.normal(rng.uniform(-np.pi, np.pi), rng.uniform(0.01, 1.0), d)
        else:
            phases = rng.uniform(-np.pi, np.pi, d)
        worst = max(worst, abs(ell(phases) - ell_grid_kernel(phases, grid)))
    fixed = max(abs(ell([0.0]) - 0.0), abs(ell([0.0, math.pi]) - math.sqrt(2.0)))
    ok = worst <= 1e-4 and fixed <= 1e-12
    return Outcome(1, "length oracle", ok, f"max grid gap {worst:.2e} <= 1e-4, fixed points {fixed:.1e} <= 1e-12")


# -- 2 --------------------------------------------------------------------------------


def greedy_balance(seed: int = 0, cases: int = 1000) -> Outcome:
    rng = _rng(seed, 2)
    scale = 2.0**-20
    bad, stalls = 0, 0
    for _ in range(cases):
        n = int(rng.integers(1, 101))
        # dyadic entries keep every partial sum exact in floating point
        k = rng.integers(-(2**20), 2**20 + 1, n).astype(np.float64)
        k[-1] = -np.sum(k[:-1])
        a = k * scale
        perm, st = greedy_order_kernel(a)
        stalls += int(st)
        if sorted(perm.tolist()) != list(range(n)):
            bad += 1
            continue
        prefix = np.cumsum(a[perm])
        if np.max(np.abs(prefix)) > np.max(np.abs(a)):
            bad += 1
    ok = bad == 0 and stalls == 0
    return Outcome(2, "greedy ordering", ok, f"{bad} prefix violations, {stalls} stalls in {cases} sequences")


# -- 3 --------------------------------------------------------------------------------


def decomposition_identities(seed: int = 0, cases: int = 500) -> Outcome:
    rng = _rng(seed, 3)
    worst = 0.0
    for _ in range(cases):
        d = int(rng.integers(2, 129))
        theta = rng.uniform(-np.pi, np.pi, d)
        theta -= theta.mean()
        theta[-1] = -np.sum(theta[:-1])
        seq = product_decomposition(theta)
        s = np.cumsum(theta)
        got = seq.partial_products()
        for n in range(d - 1):
            want = np.ones(d, dtype=complex)
            want[: n + 1] = np.exp(1j * theta[: n + 1])
            want[n + 1] = np.exp(-1j * s[n])
            worst = max(worst, float(np.max(np.abs(got[n] - want))))
        gamma = rng.uniform(-np.pi, np.pi, d)
        got = torus_decomposition(DiagonalUnitary(gamma)).partial_products()
        for n in range(d):
            want = np.exp(1j * gamma[np.minimum(np.arange(d), n)])
            worst = max(worst, float(np.max(np.abs(got[n] - want))))
    return Outcome(3, "decomposition identities", worst <= 1e-12, f"max prefix error {worst:.2e} <= 1e-12")


# -- 4 --------------------------------------------------------------------------------


def su2_chains(seed: int = 0, cases: int = 200) -> Outcome:
    rng = _rng(seed, 4)
    worst_phase, worst_prod, wrong_count = 0.0, 0.0, 0
    for m in (2, 4, 6, 8):
        for _ in range(cases):
            theta = rng.uniform(-math.pi / 2, math.pi / 2)
            while theta == 0.0:
                theta = rng.uniform(-math.pi / 2, math.pi / 2)
            phi = rng.uniform(-m * abs(theta), m * abs(theta))
            chain = su2_chain(theta, phi, m)
            factors = chain.factors()
            wrong_count += len(factors) != m
            for f in factors:
                worst_phase = max(worst_phase, abs(eigenphase(f) - abs(theta)))
            want = np.diag([np.exp(1j * phi), np.exp(-1j * phi)])
            worst_prod = max(worst_prod, float(np.max(np.abs(chain.product() - want))))
    ok = wrong_count == 0 and worst_phase <= 1e-8 and worst_prod <= 1e-8
    return Outcome(
        4,
        "SU(2) chains",
        ok,
        f"eigenphase err {worst_phase:.1e}, product err {worst_prod:.1e} (<= 1e-8), {wrong_count} wrong counts",
    )


# -- 5 --------------------------------------------------------------------------------


def block_parallel(seed: int = 0, cases: int = 40) -> Outcome:
    rng = _rng(seed, 5)
    v = ClusteredModel((0.0, math.pi))
    bad, worst, certs = 0, 0.0, []
    for _ in range(cases):
        d = 2 * int(rng.integers(4, 17))
        m = int(rng.choice([2, 4, 6, 8]))
        # zero-sum angles with every prefix inside the m * chord = 2m budget
        theta = rng.uniform(-1.0, 1.0, d)
        theta -= theta.mean()
        theta[-1] = -np.sum(theta[:-1])
        theta *= min(1.0, 1.9 * m / np.max(np.abs(np.cumsum(theta))))
        seq = product_decomposition(theta)
        many = list(range(0, 2 * (d // 4), 2))
        counts = []
        for idx in ([0], many):
            required = [abs(seq.block_angles[i]) / m for i in idx]
            arranged, plan = arrange_gap_blocks(v, sorted(required, reverse=True), len(idx), d)
            cert = infsim_generate(seq, idx, arranged, plan, m)
            rep = verify(cert, 1e-6)
            worst = max(worst, rep.product_residual, rep.worst_residual)
            counts.append(cert.count)
            bad += (not rep.passed) or cert.count > 4 * m
            certs.append(cert)
        bad += counts[0] != counts[1]
    return Outcome(
        5,
        "block-parallel generation",
        bad == 0,
        f"{bad} failures, residual {worst:.1e} <= 1e-6, counts equal for 1 and D/4 blocks",
        certificates=certs,
    )


# -- 6 --------------------------------------------------------------------------------


def _random_clusters(rng, k: int) -> ClusteredModel:
    while True:
        phases = rng.uniform(-math.pi, math.pi, k)
        if len(set(phases.tolist())) == k:
            return ClusteredModel(tuple(phases))


def _one_sided(rng, d: int) -> DiagonalUnitary:
    # a tight cluster plus one or two far outliers: no balanced normalization exists
    phases = rng.uniform(0.0, 0.01, d)
    outliers = int(rng.integers(1, 3))
    phases[:outliers] = rng.uniform(2.6, 3.1, outliers)
    return DiagonalUnitary(phases)


def generation_constants(seed: int = 0, calkin_runs: int = 100, split_runs: int = 40) -> Outcome:
    rng = _rng(seed, 6)
    failures, certs = [], []
    worst_ratio = 0.0
    done = 0
    while done < calkin_runs:
        u = _random_clusters(rng, int(rng.integers(2, 7)))
        v = _random_clusters(rng, int(rng.integers(2, 7)))
        if calkin_m(u, v) > 8:
            continue
        step = math.lcm(len(u.clusters), len(v.clusters))
        dim = calkin_dim(u, v, int(rng.integers(step, 65)))
        if dim > 64:
            dim -= step
        if dim < step:
            continue
        done += 1
        try:
            cert = certify_calkin(u, v, dim)
        except Exception as exc:  # any failure to certify counts against the criterion
            failures.append(f"calkin {type(exc).__name__}: {exc}")
            continue
        m = cert.meta["m"]
        worst_ratio = max(worst_ratio, cert.count / (32 * m))
        if cert.count > 32 * m or not verify(cert).passed:
            failures.append(f"calkin count {cert.count} vs 32m = {32 * m}")
        certs.append(cert)
    split = 0
    worst_split = 0.0
    while split < split_runs:
        d = int(rng.choice([32, 48, 64]))
        k = int(rng.choice([k for k in range(2, 7) if d % k == 0]))
        v = _random_clusters(rng, k)
        u = _one_sided(rng, d)
        m = max(1, math.ceil(ell(u) / ell_ess(v) - 1e-9))
        if m > 8:
            continue
        try:
            cert = certify_diag(u, v, m)
        except Exception as exc:
            failures.append(f"split {type(exc).__name__}: {exc}")
            split += 1
            continue
        if cert.meta["pipeline"] != "split":
            continue
        split += 1
        worst_split = max(worst_split, cert.count / (128 * m))
        if cert.count > 128 * m or not verify(cert).passed:
            failures.append(f"split count {cert.count} vs 128m = {128 * m}")
        certs.append(cert)
    detail = (
        f"{calkin_runs} calkin runs max count/32m = {worst_ratio:.3f}, "
        f"{split_runs} split runs max count/128m = {worst_split:.3f}, {len(failures)} failures"
    )
    if failures:
        detail += f"; first: {failures[0]}"
    return Outcome(6, "generation constants", not failures, detail, certificates=certs)


# -- 7 --------------------------------------------------------------------------------


def converse_bound(certificates: list) -> Outcome:
    worst, bad = -math.inf, 0
    for cert in certificates:
        if not verify(cert).passed:
            continue
        slack = _length(cert.target) - cert.count * _length(cert.base)
        worst = max(worst, slack)
        bad += slack > 1e-6
    return Outcome(
        7,
        "converse bound",
        bad == 0 and bool(certificates),
        f"{len(certificates)} certificates, max ell(target) - k ell(base) = {worst:.2e} <= 1e-6",
    )


# -- 8 --------------------------------------------------------------------------------


def _random_finite_spectrum(rng) -> FiniteSpectrumUnitary:
    while True:
        k = int(rng.integers(2, 7))
        phases = rng.uniform(-math.pi, math.pi, k)
        mults = rng.integers(1, 6, k)
        # the extreme pair needs multiplicity >= 2 on both sides
        best, pair = -1.0, (0, 1)
        for i in range(k):
            for j in range(i + 1, k):
                c = abs(2.0 * math.sin((phases[i] - phases[j]) / 2.0))
                if c > best:
                    best, pair = c, (i, j)
        for i in pair:
            mults[i] = max(mults[i], 2)
        if mults.sum() <= 32:
            break
    basis = random_unitary(int(mults.sum()), rng) if rng.random() < 0.5 else None
    return FiniteSpectrumUnitary(tuple(zip(phases.tolist(), mults.tolist())), basis)


def commutator_witnesses(seed: int = 0, cases: int = 200) -> Outcome:
    rng = _rng(seed, 8)
    worst, bad = 0.0, 0
    for _ in range(cases):
        u = _random_finite_spectrum(rng)
        w, _ = commutator_witness(u)
        lu = ell(u.expanded())
        lc = ell_unitary(commutator(u.matrix(), w))
        worst = max(worst, lu / lc)
        bad += lu > 4.0 * lc + 1e-9
    u = FiniteSpectrumUnitary(((0.0, 2), (math.pi, 2)))
    w, _ = commutator_witness(u)
    example = float(np.max(np.abs(commutator(u.matrix(), w) - np.diag([-1, 1, -1, 1]))))
    ok = bad == 0 and example <= 1e-15
    return Outcome(
        8,
        "commutator witness",
        ok,
        f"max ell(u)/ell([u,v]) = {worst:.3f} <= 4, worked example error {example:.1e}",
    )


# -- 9 --------------------------------------------------------------------------------


def doubled_commutators(seed: int = 0, cases: int = 100) -> Outcome:
    rng = _rng(seed, 9)
    bad, worst, certs = 0, 0.0, []
    for t in range(cases):
        n = int(rng.integers(1, 9))
        v0 = random_unitary(n, rng)
        # every tenth pair commutes, so [v0, w0] = 1 and the target collapses
        w0 = v0 @ v0 if t % 10 == 0 else random_unitary(n, rng)
        _, cert = doubled_commutator(v0, w0, tol=1e-8)
        rep = verify(cert, 1e-8)
        worst = max(worst, rep.product_residual)
        bad += (not rep.passed) or cert.count != 4
        certs.append(cert)
    return Outcome(
        9,
        "doubled commutator",
        bad == 0,
        f"{bad} failures in {cases} pairs (incl. collapse), residual {worst:.1e} <= 1e-8",
        certificates=certs,
    )


# -- 10 -------------------------------------------------------------------------------


def bound_fixed_points(seed: int = 0) -> Outcome:
    got = (ng_bound(2.0, "calkin"), ng_bound(2.0, "typeiii"))
    return Outcome(10, "ng_bound fixed points", got == (32, 1024), f"calkin {got[0]} (want 32), typeiii {got[1]} (want 1024)")


# -- 11 -------------------------------------------------------------------------------


def _tamper_pool(rng) -> list:
    pool = []
    while len(pool) < 10:
        d = 2 * int(rng.integers(4, 9))
        # base phases not closed under negation, so a flipped sign shows up in the product
        v = ClusteredModel((0.0, float(rng.uniform(1.0, 2.5))))
        u = DiagonalUnitary(rng.uniform(-1.0, 1.0, d))
        m = max(1, math.ceil(ell(u) / ell_ess(v) - 1e-9))
        cert = certify_diag(u, v, m)
        if cert.count >= 2:
            pool.append(cert)
    return pool


def _copy(cert: Certificate, factors: list) -> Certificate:
    return Certificate(cert.base, cert.target, factors, cert.claimed_bound, cert.mode, dict(cert.meta))


def adversarial_verifier(seed: int = 0, cases: int = 100) -> Outcome:
    rng = _rng(seed, 11)
    pool = _tamper_pool(rng)
    wrong = []
    for t in range(cases):
        cert = pool[t % len(pool)]
        kind = ("factor", "product", "count")[t % 3]
        factors = list(cert.factors)
        i = int(rng.integers(len(factors)))
        if kind == "factor":
            s, g = factors[i]
            noise = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
            factors[i] = (s, g + 1e-3 * noise)
        elif kind == "product":
            s, g = factors[i]
            factors[i] = (-s, g)
        else:
            s, g = factors[i]
            extra = (cert.claimed_bound - cert.count) // 2 + 1
            factors.extend([(1, g), (-1, g)] * extra)
        rep = verify(_copy(cert, factors))
        ok = (kind in rep.failures) if kind == "factor" else rep.failures == [kind]
        if rep.passed or not ok:
            wrong.append(f"{kind}: got {rep.failures}")
    detail = f"{cases - len(wrong)}/{cases} tampered certificates rejected with the right class"
    if wrong:
        detail += f"; first miss {wrong[0]}"
    return Outcome(11, "adversarial verifier", not wrong, detail)


# -- driver ---------------------------------------------------------------------------

INDEPENDENT = (
    length_oracle,
    greedy_balance,
    decomposition_identities,
    su2_chains,
    block_parallel,
    generation_constants,
    commutator_witnesses,
    doubled_commutators,
    bound_fixed_points,
    adversarial_verifier,
)


def _timed(fn, seed: int) -> Outcome:
    start = time.perf_counter()
    out = fn(seed)
    out.seconds = time.perf_counter() - start
    return out


def run_all(seed: int = 0, jobs: int = 1) -> list:
    """Evaluate every criterion; criterion 7 reuses the certificates from 5, 6 and 9."""
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_timed, fn, seed) for fn in INDEPENDENT]
            outcomes = [f.result() for f in futures]
    else:
        outcomes = [_timed(fn, seed) for fn in INDEPENDENT]
    certs = [c for o in outcomes for c in o.certificates]
    start = time.perf_counter()
    converse = converse_bound(certs)
    converse.seconds = time.perf_counter() - start
    outcomes.append(converse)
    outcomes.sort(key=lambda o: o.number)
    return outcomes
