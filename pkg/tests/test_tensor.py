import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ttr1svd.errors import ArgumentError
from ttr1svd.tensor import (
    DenseTensor,
    RankOneTerm,
    check_permutation,
    dumps_tensor,
    frobenius_norm,
    from_function,
    inner_product,
    inverse_permutation,
    inverse_sum_tensor,
    loads_tensor,
    matrix_to_tensor,
    mode_product,
    outer_product,
    permute_indices,
    reshape_to_matrix,
    tensor_from_dict,
    vectorize,
)

small_shapes = st.lists(st.integers(1, 4), min_size=2, max_size=4).map(tuple)
finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def _flat_index(idx, shape):
    # column-major position of a 0-based multi-index, written out by hand
    pos, stride = 0, 1
    for i, n in zip(idx, shape):
        pos += i * stride
        stride *= n
    return pos


def test_running_example_entries(A):
    for i1, i2, i3 in itertools.product(range(1, 4), range(1, 5), range(1, 3)):
        assert A.entry(i1, i2, i3) == i1 + 3 * (i2 - 1) + 12 * (i3 - 1)
    assert A.shape == (3, 4, 2)
    assert frobenius_norm(A) == pytest.approx(70.0)


def test_from_data_is_column_major():
    t = DenseTensor.from_data([2, 3], [1, 2, 3, 4, 5, 6])
    assert t.entry(2, 1) == 2.0
    assert t.entry(1, 2) == 3.0
    assert t.data.tolist() == [1, 2, 3, 4, 5, 6]


def test_tensor_is_immutable():
    t = DenseTensor.zeros([2, 2])
    with pytest.raises(ValueError):
        t.array[0, 0] = 1.0


def test_entry_out_of_range():
    t = DenseTensor.zeros([2, 2])
    with pytest.raises(ArgumentError):
        t.entry(3, 1)
    with pytest.raises(ArgumentError):
        t.entry(1)


def test_from_data_length_mismatch():
    with pytest.raises(ArgumentError):
        DenseTensor.from_data([2, 2], [1, 2, 3])


@given(arrays(np.float64, small_shapes, elements=finite))
def test_vectorize_matches_hand_written_index(a):
    t = DenseTensor(a)
    v = vectorize(t)
    for idx in itertools.product(*(range(n) for n in a.shape)):
        assert v[_flat_index(idx, a.shape)] == a[idx]


@given(arrays(np.float64, small_shapes, elements=finite), st.data())
def test_reshape_round_trip(a, data):
    t = DenseTensor(a)
    k = data.draw(st.integers(1, a.ndim - 1))
    m = reshape_to_matrix(t, k)
    rows = int(np.prod(a.shape[:k]))
    assert m.shape == (rows, a.size // rows)
    for idx in itertools.product(*(range(n) for n in a.shape)):
        r = _flat_index(idx[:k], a.shape[:k])
        c = _flat_index(idx[k:], a.shape[k:])
        assert m[r, c] == a[idx]
    assert matrix_to_tensor(m, a.shape) == t


def test_reshape_split_range():
    t = DenseTensor.zeros([2, 3])
    with pytest.raises(ArgumentError):
        reshape_to_matrix(t, 2)
    with pytest.raises(ArgumentError):
        reshape_to_matrix(t, 0)


@given(arrays(np.float64, (3, 2, 4), elements=finite), st.integers(1, 3), st.integers(1, 3))
@settings(max_examples=30)
def test_mode_product_against_loops(a, k, p):
    rng = np.random.default_rng(p)
    m = rng.standard_normal((p, a.shape[k - 1]))
    out = mode_product(DenseTensor(a), m, k).array
    shape = list(a.shape)
    shape[k - 1] = p
    expect = np.zeros(shape)
    for idx in itertools.product(*(range(n) for n in shape)):
        for j in range(a.shape[k - 1]):
            src = list(idx)
            src[k - 1] = j
            expect[idx] += m[idx[k - 1], j] * a[tuple(src)]
    np.testing.assert_allclose(out, expect, atol=1e-12)


def test_mode_product_dimension_mismatch(A):
    with pytest.raises(ArgumentError):
        mode_product(A, np.ones((2, 5)), 2)
    with pytest.raises(ArgumentError):
        mode_product(A, np.ones((2, 3)), 4)


def test_outer_product_entries():
    a, b, c = np.array([1.0, 2]), np.array([3.0, -1, 2]), np.array([0.5, 4])
    t = outer_product(2.0, [a, b, c])
    for i, j, k in itertools.product(range(2), range(3), range(2)):
        assert t.array[i, j, k] == pytest.approx(2 * a[i] * b[j] * c[k])


def test_rank_one_from_vectors_normalizes():
    r = RankOneTerm.from_vectors([np.array([3.0, 4]), np.array([0.0, 2])])
    assert r.weight == pytest.approx(10.0)
    assert all(np.linalg.norm(v) == pytest.approx(1.0) for v in r.mode_vectors)
    assert r.to_tensor().array[1, 1] == pytest.approx(8.0)


def test_inner_product_and_norm(A):
    assert inner_product(A, A) == pytest.approx(frobenius_norm(A) ** 2)
    with pytest.raises(ArgumentError):
        inner_product(A, DenseTensor.zeros([3, 4]))


def test_permute_indices(A):
    p = permute_indices(A, (2, 3, 1))
    assert p.shape == (4, 2, 3)
    for i1, i2, i3 in itertools.product(range(1, 4), range(1, 5), range(1, 3)):
        assert p.entry(i2, i3, i1) == A.entry(i1, i2, i3)
    assert permute_indices(p, inverse_permutation((2, 3, 1))) == A


def test_check_permutation_rejects():
    with pytest.raises(ArgumentError):
        check_permutation((1, 1, 2), 3)
    with pytest.raises(ArgumentError):
        check_permutation((0, 1, 2), 3)
    with pytest.raises(ArgumentError):
        check_permutation((1, 2), 3)


def test_from_function_and_inverse_sum():
    t = inverse_sum_tensor(5)
    assert t.entry(1, 1, 1) == pytest.approx(1 / 3)
    assert t.entry(5, 4, 3) == pytest.approx(1 / 12)
    f = from_function([2, 3], lambda i, j: 10 * i + j)
    assert f.entry(2, 3) == 23


def test_json_round_trip(A):
    text = dumps_tensor(A)
    obj = json.loads(text)
    assert obj["dims"] == [3, 4, 2] and obj["order"] == "column-major"
    assert obj["data"][:4] == [1, 2, 3, 4]
    assert loads_tensor(text) == A


@pytest.mark.parametrize(
    "obj, field",
    [
        ({"order": "column-major", "data": [1]}, "dims"),
        ({"dims": [1], "data": [1]}, "order"),
        ({"dims": [1], "order": "row-major", "data": [1]}, "order"),
        ({"dims": [2, 2], "order": "column-major", "data": [1, 2]}, "data"),
        ({"dims": [2], "order": "column-major", "data": [1, "x"]}, "data"),
        ({"dims": [0], "order": "column-major", "data": []}, "dimension"),
    ],
)
def test_malformed_json_names_field(obj, field):
    with pytest.raises(ArgumentError, match=field):
        tensor_from_dict(obj)


def test_loads_rejects_garbage():
    with pytest.raises(ArgumentError):
        loads_tensor("{not json")
