import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from timegrain.errors import ShapeError
from timegrain.numerics import (
    as_matrix,
    dot,
    matmul,
    matrix_from_json,
    matrix_to_json,
    mean_over_stack,
    softmax_rows,
)

finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)


def test_matmul_identity():
    m = np.arange(6.0).reshape(2, 3)
    assert np.array_equal(matmul(np.eye(2), m), m)


def test_matmul_hand_case():
    assert matmul([[1, 2], [3, 4]], [[1], [1]]).tolist() == [[3.0], [7.0]]


def test_matmul_zeros():
    m = np.random.default_rng(0).standard_normal((3, 4))
    assert np.array_equal(matmul(np.zeros((2, 3)), m), np.zeros((2, 4)))


def test_matmul_shape_error():
    with pytest.raises(ShapeError):
        matmul(np.zeros((2, 3)), np.zeros((2, 3)))


def test_matmul_associative():
    rng = np.random.default_rng(1)
    for _ in range(50):
        a, b, c = (rng.standard_normal((4, 4)) for _ in range(3))
        assert np.allclose(matmul(matmul(a, b), c), matmul(a, matmul(b, c)), atol=1e-9, rtol=0)


def test_softmax_uniform_row():
    assert np.allclose(softmax_rows([[0.0, 0.0, 0.0]]), [[1 / 3] * 3], atol=1e-15)


def test_softmax_log_ratio():
    out = softmax_rows([[math.log(1), math.log(3)]])
    assert out[0, 0] == pytest.approx(0.25, abs=1e-15)
    assert out[0, 1] == pytest.approx(0.75, abs=1e-15)


def test_softmax_large_logits_do_not_overflow():
    out = softmax_rows([[1000.0, 0.0]])
    assert np.all(np.isfinite(out))
    assert out[0, 0] == pytest.approx(1.0)
    assert out[0, 1] == pytest.approx(0.0, abs=1e-300)


def test_softmax_empty_passes_through():
    assert softmax_rows(np.zeros((0, 3))).shape == (0, 3)


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 6)), elements=finite), finite)
def test_softmax_rows_stochastic_and_shift_invariant(a, c):
    out = softmax_rows(a)
    assert np.allclose(out.sum(axis=1), 1.0, atol=1e-9, rtol=0)
    assert np.allclose(softmax_rows(a + c), out, atol=1e-9, rtol=0)


def test_mean_over_stack_cases():
    m = np.random.default_rng(2).standard_normal((3, 3))
    assert np.array_equal(mean_over_stack([m]), m)
    assert np.array_equal(mean_over_stack([m, -m]), np.zeros_like(m))
    assert mean_over_stack([np.array([[1.0]]), np.array([[3.0]])]).tolist() == [[2.0]]


@pytest.mark.parametrize("k", [1, 2, 3, 5, 7, 10])
def test_mean_of_copies_is_exact(k):
    m = np.random.default_rng(k).standard_normal((4, 5)) * 1e3
    assert mean_over_stack([m] * k).tobytes() == m.tobytes()


def test_mean_over_stack_errors():
    with pytest.raises(ValueError):
        mean_over_stack([])
    with pytest.raises(ShapeError):
        mean_over_stack([np.zeros((2, 2)), np.zeros((2, 3))])


def test_dot():
    u = np.array([0.6, 0.8])
    assert dot(u, u) == pytest.approx(1.0, abs=1e-15)
    assert dot([1, 0, 0], [0, 1, 0]) == 0.0
    assert dot([1, 2, 3], [4, 5, 6]) == 32.0
    with pytest.raises(ShapeError):
        dot([1, 2], [1, 2, 3])


def test_matrix_json_round_trip():
    m = np.random.default_rng(3).standard_normal((3, 2))
    obj = matrix_to_json(m)
    assert obj["rows"] == 3 and obj["cols"] == 2 and len(obj["values"]) == 6
    # row-major layout
    assert obj["values"][:2] == m[0].tolist()
    back = matrix_from_json(json.loads(json.dumps(obj)))
    assert back.tobytes() == m.tobytes()


def test_as_matrix_rejects_bad_input():
    with pytest.raises(ShapeError):
        as_matrix([1, 2, 3], rows=2, cols=2)
    with pytest.raises(ValueError):
        as_matrix([[1.0, float("nan")]])
    assert as_matrix([], rows=0, cols=4).shape == (0, 4)
