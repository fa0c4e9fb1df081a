import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bngkit.core import DiagonalUnitary, ell
from bngkit.decomp import (
    angle_normalize,
    greedy_order,
    product_decomposition,
    split_angles,
    torus_decomposition,
)
from bngkit.errors import PreconditionError


def phases_of(seq):
    return [f.phases.tolist() for f in seq.factors]


def test_product_decomposition_examples():
    assert phases_of(product_decomposition([0.4, -0.4])) == [[0.4, -0.4]]
    got = phases_of(product_decomposition([math.pi / 2, -math.pi / 2, 0.0]))
    assert np.allclose(got, [[math.pi / 2, -math.pi / 2, 0], [0, 0, 0]], atol=1e-15)
    got = phases_of(product_decomposition([math.pi / 3, math.pi / 3, -2 * math.pi / 3]))
    assert np.allclose(got, [[math.pi / 3, -math.pi / 3, 0], [0, 2 * math.pi / 3, -2 * math.pi / 3]], atol=1e-15)


def test_product_decomposition_needs_zero_sum():
    with pytest.raises(PreconditionError, match="zero angle sum"):
        product_decomposition([0.1, 0.2])


def test_torus_decomposition_examples():
    assert all(np.array_equal(f.phases, np.zeros(3)) for f in torus_decomposition([0.0, 0.0, 0.0]).factors)
    got = phases_of(torus_decomposition([math.pi / 2, -math.pi / 2]))
    assert np.allclose(got, [[math.pi / 2, math.pi / 2], [0, math.pi]], atol=1e-15)
    a, b, c = 0.3, -1.2, 2.0
    got = torus_decomposition([a, b, c])
    want = [[a, a, a], [0, b - a, b - a], [0, 0, c - b]]
    assert [DiagonalUnitary(w) for w in want] == list(got.factors)


@given(st.lists(st.floats(-3, 3), min_size=2, max_size=40))
def test_product_decomposition_reconstructs(xs):
    theta = np.array(xs) - np.mean(xs)
    theta[-1] = -np.sum(theta[:-1])
    seq = product_decomposition(theta)
    assert np.allclose(seq.partial_product(len(seq.factors) - 1), np.exp(1j * theta), atol=1e-12)
    assert np.allclose(seq.partial_products()[-1], np.exp(1j * theta), atol=1e-12)


@given(st.lists(st.floats(-3, 3), min_size=1, max_size=40))
def test_torus_decomposition_reconstructs(xs):
    seq = torus_decomposition(DiagonalUnitary(xs))
    assert np.allclose(seq.partial_products()[-1], np.exp(1j * np.array(xs)), atol=1e-12)


@pytest.mark.parametrize(
    "alphas, order, sums",
    [([1.0, -1.0], [0, 1], [1, 0]), ([1.0, 1.0, -2.0], [0, 2, 1], [1, -1, 0]), ([0.0] * 4, [0, 1, 2, 3], [0] * 4)],
)
def test_greedy_traces(alphas, order, sums):
    perm = greedy_order(alphas)
    assert perm.tolist() == order
    assert np.cumsum(np.array(alphas)[perm]).tolist() == sums


def test_greedy_rejects_nonzero_sum():
    with pytest.raises(PreconditionError):
        greedy_order([1.0, 1.0])


@given(st.lists(st.integers(-(2**20), 2**20), min_size=1, max_size=100))
def test_greedy_prefix_bound_exact(ks):
    a = np.array(ks, dtype=float)
    a[-1] = -np.sum(a[:-1])
    a *= 2.0**-20
    perm = greedy_order(a)
    assert sorted(perm.tolist()) == list(range(a.size))
    assert np.max(np.abs(np.cumsum(a[perm]))) <= np.max(np.abs(a))


def test_angle_normalize_antipodal():
    res = angle_normalize(DiagonalUnitary([0.0, math.pi]))
    assert sorted(np.abs(res.angles).tolist()) == pytest.approx([math.pi / 2] * 2)
    assert res.prefix_bound == pytest.approx(math.pi / 2)
    assert res.prefix_bound <= 2 * math.sqrt(2)


def test_angle_normalize_rejects_scalar():
    with pytest.raises(PreconditionError, match="scalar"):
        angle_normalize(DiagonalUnitary([0.4, 0.4, 0.4]))


def test_angle_normalize_reproduces_u_projectively(rng):
    for _ in range(20):
        u = DiagonalUnitary(rng.uniform(-1.0, 1.0, 32))
        res = angle_normalize(u)
        assert abs(np.sum(res.angles)) < 1e-12
        back = np.exp(1j * (u.phases[res.order] + res.rotation))
        assert np.allclose(back, np.exp(1j * res.angles), atol=1e-12)
        assert res.prefix_bound <= np.max(np.abs(res.angles)) + 1e-12
        assert res.prefix_bound <= 2 * ell(u) + math.pi / u.dim


def test_split_angles_examples():
    a, b = split_angles([0.1, 0.1])
    assert np.allclose(a, [0.15, -0.05]) and np.allclose(b, [-0.05, 0.15])
    a, b = split_angles([-0.2])
    assert np.allclose(a, [0.1]) and np.allclose(b, [-0.3])
    a, b = split_angles(np.zeros(3))
    assert not a.any() and not b.any()


@given(st.lists(st.floats(-1.5, 1.5), min_size=1, max_size=30))
def test_split_angles_properties(xs):
    t = np.array(xs)
    a, b = split_angles(t)
    assert np.allclose(a + b, t, atol=1e-14)
    assert np.all(np.abs(a) <= 1.5 * np.abs(t) + 1e-14)
    assert np.all(np.abs(b) <= 1.5 * np.abs(t) + 1e-14)
