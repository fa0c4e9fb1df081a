import math

import numpy as np
import pytest

from bngkit.certify import (
    Certificate,
    arrange_gap_blocks,
    calkin_dim,
    calkin_m,
    certify_calkin,
    certify_diag,
    certify_matrix,
    infsim_generate,
    ng_bound,
    verify,
)
from bngkit.core import ClusteredModel, DiagonalUnitary, ell, ell_ess, materialize, random_unitary
from bngkit.decomp import product_decomposition
from bngkit.errors import InfeasibleError, PreconditionError, VerificationError

ANTIPODAL = ClusteredModel((math.pi / 2, -math.pi / 2))


def test_arrange_gap_blocks_example():
    arranged, plan = arrange_gap_blocks(ANTIPODAL, math.sqrt(2), 2, 8)
    assert arranged.phases[:4].tolist() == [math.pi / 2, -math.pi / 2] * 2
    assert plan.chords == [2.0, 2.0]
    base = materialize(ANTIPODAL, 4)
    assert np.allclose(plan.host @ base.matrix() @ plan.host.conj().T, arranged.matrix())


def test_arrange_gap_blocks_single_cluster_fails():
    with pytest.raises(InfeasibleError, match="chord"):
        arrange_gap_blocks(ClusteredModel((0.0,)), 0.1, 1, 4)


def test_arrange_gap_blocks_zero_blocks():
    arranged, plan = arrange_gap_blocks(ANTIPODAL, 0.0, 0, 6)
    assert arranged == materialize(ANTIPODAL, 3)
    assert plan.positions == []


def test_infsim_empty_index_set():
    seq = product_decomposition([0.3, -0.3, 0.0, 0.0])
    arranged, plan = arrange_gap_blocks(ANTIPODAL, 0.0, 0, 4)
    cert = infsim_generate(seq, [], arranged, plan, 2)
    assert cert.count == 0
    assert np.array_equal(cert.target.phases, np.zeros(4))


def test_infsim_count_does_not_grow_with_blocks(rng):
    d, m = 16, 2
    theta = rng.uniform(-0.5, 0.5, d)
    theta[-1] = -np.sum(theta[:-1])
    seq = product_decomposition(theta)
    counts = []
    for idx in ([0], [0, 2, 4, 6]):
        arranged, plan = arrange_gap_blocks(ANTIPODAL, 0.0, len(idx), d)
        cert = infsim_generate(seq, idx, arranged, plan, m)
        assert verify(cert).passed
        counts.append(cert.count)
    assert counts == [4 * m, 4 * m]


def test_infsim_rejects_adjacent_blocks():
    seq = product_decomposition([0.3, -0.3, 0.0, 0.0])
    arranged, plan = arrange_gap_blocks(ANTIPODAL, 0.0, 2, 4)
    with pytest.raises(PreconditionError, match="apart"):
        infsim_generate(seq, [0, 1], arranged, plan, 2)


def test_infsim_budget_check():
    seq = product_decomposition([3.0, -3.0])
    arranged, plan = arrange_gap_blocks(ClusteredModel((0.0, 0.1)), 0.0, 1, 2)
    with pytest.raises(PreconditionError, match="chord"):
        infsim_generate(seq, [0], arranged, plan, 2)


def test_certify_shortcut_for_conjugate():
    base = materialize(ANTIPODAL, 4)
    cert = certify_diag(base.permuted([3, 1, 0, 2, 5, 4, 7, 6]).rotated(0.4), ANTIPODAL, 1)
    assert cert.count == 1 and verify(cert).passed


def test_certify_alternating_example():
    u = DiagonalUnitary([math.pi / 2, -math.pi / 2] * 8)
    cert = certify_diag(u, ANTIPODAL, 1)
    assert cert.count <= 32 and verify(cert).passed


def test_certify_length_gate():
    v = ClusteredModel((0.0, 0.5))
    u = DiagonalUnitary(np.linspace(0.0, 2 * ell_ess(v) + 0.1, 8))
    assert ell(u) > ell_ess(v)
    with pytest.raises(PreconditionError, match="exceeds"):
        certify_diag(u, v, 1)


def test_certify_balanced_random(rng):
    v = ClusteredModel((0.0, 1.0, 2.5))
    for _ in range(10):
        u = DiagonalUnitary(rng.uniform(-np.pi, np.pi, 24))
        m = calkin_m(ClusteredModel(tuple(u.phases)), v)
        cert = certify_diag(u, v, m)
        assert verify(cert).passed
        assert cert.count <= cert.claimed_bound <= 128 * m


def test_certify_split_path():
    rng = np.random.default_rng(5)
    phases = rng.uniform(0.0, 0.01, 32)
    phases[0] = 3.0
    v = ClusteredModel((0.0, 2.0))
    m = math.ceil(ell(phases) / ell_ess(v) - 1e-9)
    cert = certify_diag(DiagonalUnitary(phases), v, m)
    assert cert.meta["pipeline"] == "split"
    assert cert.claimed_bound == 128 * m and cert.count <= 128 * m
    assert verify(cert).passed


def test_certify_matrix_dense_target(rng):
    v = ClusteredModel((0.0, 2.0))
    q = random_unitary(8, rng)
    u = q @ np.diag(np.exp(1j * rng.uniform(-1, 1, 8))) @ q.conj().T
    cert = certify_matrix(u, v)
    assert verify(cert).passed


def test_calkin_examples():
    u = ClusteredModel((0.0, math.pi))
    cert = certify_calkin(u, u)
    assert cert.count == 1
    cert = certify_calkin(u, ANTIPODAL)
    assert cert.meta["m"] == 1 and cert.count <= 32 and verify(cert).passed
    slim = ClusteredModel((0.0, 0.2))
    assert calkin_m(u, slim) == 15
    cert = certify_calkin(u, slim)
    assert cert.count <= 480 and verify(cert).passed


def test_calkin_rejects_exceptional():
    with pytest.raises(PreconditionError, match="cluster-only"):
        certify_calkin(ClusteredModel((0.0, 1.0), ((2.0, 1),)), ANTIPODAL)


def test_calkin_dim_is_common_multiple():
    assert calkin_dim(ClusteredModel((0.0, 1.0, 2.0)), ClusteredModel((0.0, 1.0)), 64) == 66


def test_verify_detects_tampering():
    u = DiagonalUnitary([0.9, -0.4, 0.3, -0.8, 0.2, -0.2])
    cert = certify_diag(u, ClusteredModel((0.0, 2.0)), 1)
    factors = list(cert.factors)
    s, g = factors[2]
    bumped = g.copy()
    bumped[0, 0] += 1e-2
    factors[2] = (s, bumped)
    rep = verify(Certificate(cert.base, cert.target, factors, cert.claimed_bound))
    assert not rep.passed and "factor" in rep.failures and rep.worst_index == 2
    low = Certificate(cert.base, cert.target, cert.factors, cert.count - 1)
    assert verify(low).failures == ["count"]


def test_verify_bad_sign_is_a_factor_failure():
    cert = Certificate(DiagonalUnitary([0.0, 1.0]), DiagonalUnitary([0.0, 1.0]), [(2, np.eye(2))], 1)
    rep = verify(cert)
    assert "factor" in rep.failures and rep.to_json()["worst_factor"]["residual"] is None


def test_ng_bound_values():
    assert ng_bound(2.0, "calkin") == 32
    assert ng_bound(1.0, "calkin") == 64
    assert ng_bound(2.0, "typeiii") == 1024
    assert ng_bound(ClusteredModel((0.0, math.pi), ((1.0, 3),)), "calkin") == math.ceil(64 / math.sqrt(2))
    with pytest.raises(PreconditionError):
        ng_bound(ClusteredModel((0.3,)), "calkin")
    with pytest.raises(PreconditionError):
        ng_bound(1.0, "other")


def test_verification_error_carries_report():
    err = VerificationError("x", report="r")
    assert err.report == "r" and err.exit_code == 2
