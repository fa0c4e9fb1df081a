import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bngkit import io
from bngkit.certify import certify_calkin, certify_diag, verify
from bngkit.core import ClusteredModel, DiagonalUnitary, random_unitary
from bngkit.decomp import product_decomposition, torus_decomposition
from bngkit.errors import SchemaError
from bngkit.typeiii import FiniteSpectrumUnitary, doubled_commutator

phase = st.floats(-math.pi, math.pi, allow_nan=False).filter(lambda x: x > -math.pi)


def reparse(doc):
    return json.loads(io.dumps(doc))


@given(st.lists(phase, min_size=1, max_size=20))
def test_diagonal_round_trip(xs):
    u = DiagonalUnitary(xs)
    assert io.diagonal_from_json(reparse(io.diagonal_to_json(u))) == u


@given(st.lists(phase, min_size=1, max_size=6, unique=True), st.integers(1, 4))
def test_model_round_trip(xs, k):
    m = ClusteredModel(tuple(xs[:-1] or xs), ((xs[-1], k),) if len(xs) > 1 else ())
    assert io.model_from_json(reparse(io.model_to_json(m))) == m


def test_matrix_round_trip_is_bit_exact(rng):
    a = random_unitary(5, rng)
    assert np.array_equal(io.matrix_from_json(reparse(io.matrix_to_json(a))), a)


def test_finite_spectrum_round_trip(rng):
    for basis in (None, random_unitary(3, rng)):
        u = FiniteSpectrumUnitary(((0.1, 1), (2.0, 2)), basis)
        assert io.finite_spectrum_from_json(reparse(io.finite_spectrum_to_json(u))) == u


def test_factor_sequence_round_trip():
    for seq in (product_decomposition([0.5, -0.2, -0.3]), torus_decomposition([0.1, 0.7])):
        back = io.factor_sequence_from_json(reparse(io.factor_sequence_to_json(seq)))
        assert back == seq


def test_certificate_round_trip_verifies():
    cert = certify_calkin(ClusteredModel((0.0, math.pi)), ClusteredModel((0.0, 1.5)), 8)
    doc = reparse(io.certificate_to_json(cert))
    back = io.certificate_from_json(doc)
    assert back.meta["base_model"] == ClusteredModel((0.0, 1.5))
    assert io.certificate_to_json(back) == doc
    assert verify(back).passed


def test_dense_certificate_round_trip():
    _, cert = doubled_commutator(np.diag([1j, -1j]), np.array([[0, 1], [-1, 0]], dtype=complex))
    back = io.certificate_from_json(reparse(io.certificate_to_json(cert)))
    assert np.array_equal(back.base, cert.base) and verify(back, 1e-8).passed


def test_report_round_trip():
    cert = certify_diag(DiagonalUnitary([0.5, -0.5, 0.2, -0.2]), ClusteredModel((0.0, 2.0)), 1)
    rep = verify(cert)
    doc = reparse(io.report_to_json(rep))
    assert io.report_from_json(doc) == rep


@pytest.mark.parametrize(
    "doc, field",
    [
        ({"phases": [0.0, "a"]}, "input.phases[1]"),
        ({"clusters": [0.0], "exceptional": [[1.0]]}, "input.exceptional[0]"),
        ({"dim": 2, "re": [[1, 0]], "im": [[0, 0], [0, 0]]}, "input.re"),
        ({"eigenphases": [[0.0, 1.5]]}, "input.eigenphases[0][1]"),
        ({"what": 1}, "input"),
    ],
)
def test_schema_errors_name_the_field(doc, field):
    with pytest.raises(SchemaError) as info:
        io.operator_from_json(doc)
    assert info.value.field == field


def test_certificate_schema_errors():
    with pytest.raises(SchemaError) as info:
        io.certificate_from_json({"mode": "matrix", "base": {"phases": [0]}, "target": {"phases": [0]},
                                  "claimed_bound": 1, "factors": [{"sign": 3, "conjugator": {}}]})
    assert info.value.field == "cert.factors[0].sign"
    with pytest.raises(SchemaError, match="malformed"):
        io.loads("{not json")


def test_dumps_rejects_nan():
    with pytest.raises(ValueError):
        io.dumps({"x": float("nan")})
