import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from bngkit.certify import verify
from bngkit.core import ell, ell_unitary, normalize_phases, random_unitary
from bngkit.errors import PreconditionError
from bngkit.su2 import FLIP
from bngkit.typeiii import (
    FiniteSpectrumUnitary,
    commutator,
    commutator_witness,
    doubled_commutator,
    ng_bound_typeiii,
)


def test_witness_worked_example():
    u = FiniteSpectrumUnitary(((0.0, 2), (math.pi, 2)))
    w, ratio = commutator_witness(u)
    c = commutator(u.matrix(), w)
    assert np.max(np.abs(c - np.diag([-1, 1, -1, 1]))) <= 1e-15
    assert ell(u.expanded()) == pytest.approx(math.sqrt(2))
    assert ratio == pytest.approx(1.0)


def test_witness_quarter_turn():
    u = FiniteSpectrumUnitary(((0.0, 2), (math.pi / 2, 2)))
    w, ratio = commutator_witness(u)
    phases = np.sort(np.angle(np.linalg.eigvals(commutator(u.matrix(), w))))
    assert np.allclose(phases, [-math.pi / 2, 0, 0, math.pi / 2], atol=1e-12)
    assert ratio <= 4


def test_witness_rejects_central_and_thin():
    with pytest.raises(PreconditionError, match="central"):
        commutator_witness(FiniteSpectrumUnitary(((0.3, 4),)))
    with pytest.raises(PreconditionError, match="multiplicity"):
        commutator_witness(FiniteSpectrumUnitary(((0.0, 1), (math.pi, 3))))


@given(st.integers(0, 2**32 - 1))
def test_witness_bound_with_random_basis(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(2, 5))
    eig = tuple((float(p), 2 + int(rng.integers(0, 3))) for p in rng.uniform(-np.pi, np.pi, k))
    u = FiniteSpectrumUnitary(eig, random_unitary(sum(m for _, m in eig), rng))
    w, _ = commutator_witness(u)
    assert np.allclose(w @ w.conj().T, np.eye(u.dim), atol=1e-10)
    assert ell(u.expanded()) <= 4 * ell_unitary(commutator(u.matrix(), w)) + 1e-9


def test_finite_spectrum_validation():
    with pytest.raises(PreconditionError):
        FiniteSpectrumUnitary(())
    with pytest.raises(PreconditionError):
        FiniteSpectrumUnitary(((0.0, 0),))
    with pytest.raises(PreconditionError):
        FiniteSpectrumUnitary(((0.0, 2),), np.eye(3))
    u = FiniteSpectrumUnitary(((0.0, 1), (1.0, 1)), np.eye(2))
    assert u == FiniteSpectrumUnitary(((0.0, 1), (1.0, 1)), np.eye(2))
    assert u != FiniteSpectrumUnitary(((0.0, 1), (1.0, 1)))


def test_doubled_commutator_example():
    target, cert = doubled_commutator(np.diag([1j, -1j]), FLIP)
    assert np.allclose(target, -np.eye(4), atol=1e-15)
    assert cert.count == 4 and verify(cert, 1e-8).passed


def test_doubled_commutator_collapse():
    v0 = np.diag(np.exp(1j * np.array([0.3, -1.1, 2.0])))
    target, cert = doubled_commutator(v0, v0.conj())
    assert np.allclose(target, np.eye(6), atol=1e-14)
    assert cert.count == 4 and verify(cert, 1e-8).passed


@pytest.mark.parametrize("n", [1, 3, 8])
def test_doubled_commutator_random(n, rng):
    v0, w0 = random_unitary(n, rng), random_unitary(n, rng)
    target, cert = doubled_commutator(v0, w0)
    c = commutator(v0, w0)
    assert np.allclose(target[:n, :n], c) and np.allclose(target[n:, n:], c.conj().T)
    assert verify(cert, 1e-8).passed


def test_doubled_commutator_shape_mismatch():
    with pytest.raises(PreconditionError, match="mismatch"):
        doubled_commutator(np.eye(2), np.eye(3))


def test_ng_bound_typeiii():
    assert ng_bound_typeiii(2.0) == 1024
    assert ng_bound_typeiii(1.0) == 2048


phase = st.floats(-math.pi, math.pi, allow_nan=False)


@given(st.lists(phase, min_size=2, max_size=10), st.floats(0.0, 0.05))
def test_commutator_perturbation_bound(xs, delta):
    # ell(u_delta) <= 4 ell([u_delta, v]) + 9 delta for a slightly perturbed finite-spectrum u
    eig = tuple((p, 2) for p in dict.fromkeys(normalize_phases(np.array(xs)).tolist()))
    assume(len(eig) >= 2)
    assume(ell([p for p, _ in eig]) > 1e-6)
    u = FiniteSpectrumUnitary(eig)
    w, _ = commutator_witness(u)
    rng = np.random.default_rng(len(xs))
    noise = rng.uniform(-delta, delta, u.dim)
    u_delta = np.diag(np.exp(1j * (u.expanded() + noise)))
    lhs = ell(u.expanded() + noise)
    assert lhs <= 4 * ell_unitary(commutator(u_delta, w)) + 9 * delta + 1e-9
