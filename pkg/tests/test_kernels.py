import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bngkit import _kernels as k

needs_numba = pytest.mark.skipif(not k.HAVE_NUMBA, reason="numba not installed")


@given(st.lists(st.integers(-50, 50), min_size=1, max_size=60))
def test_greedy_numpy_matches_reference_loop(xs):
    a = np.array(xs, dtype=float)
    a[-1] = -np.sum(a[:-1])
    perm, stalls = k.greedy_order_numpy(a)
    ref_perm, ref_stalls = k._greedy_order_loop(a)
    assert perm.tolist() == ref_perm.tolist() and stalls == ref_stalls == 0


@needs_numba
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=60))
def test_greedy_backends_agree_even_off_zero_sum(xs):
    a = np.array(xs)
    p1, s1 = k.greedy_order_numpy(a)
    p2, s2 = k.greedy_order_numba(a)
    assert p1.tolist() == p2.tolist() and s1 == s2


@needs_numba
@given(st.lists(st.floats(-np.pi, np.pi), min_size=1, max_size=30))
def test_max_gap_backends_agree(xs):
    p = np.sort(np.array(xs))
    assert k.max_gap_numpy(p) == k.max_gap_numba(p)


def test_max_gap_tie_goes_to_lowest_index():
    p = np.array([-np.pi / 2, 0.0, np.pi / 2, np.pi])
    gap, idx = k.max_gap_kernel(p)
    assert idx == 0 and gap == pytest.approx(np.pi / 2)


@needs_numba
def test_grid_backends_agree(rng):
    for _ in range(10):
        th = rng.uniform(-np.pi, np.pi, int(rng.integers(1, 20)))
        assert k.ell_grid_numpy(th, 5000) == pytest.approx(k.ell_grid_numba(th, 5000), abs=1e-12)


def test_grid_numpy_spans_several_chunks():
    th = np.array([0.0, np.pi / 2])
    # 20000 points run through three chunks of 8192
    assert k.ell_grid_numpy(th, 20_000, chunk=8192) == pytest.approx(2 * np.sin(np.pi / 8), abs=1e-4)


def test_disable_flag_selects_numpy():
    env = dict(os.environ, BNGKIT_DISABLE_NUMBA="1")
    code = "from bngkit import _kernels as k; print(k.USE_NUMBA, k.greedy_order_kernel is k.greedy_order_numpy)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["False", "True"]
