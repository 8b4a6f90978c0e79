import numpy as np
import pytest

from ttr1svd.decomposition import decompose, reconstruct, select_branches
from ttr1svd.errors import ArgumentError
from ttr1svd.tensor import frobenius_norm, gaussian_tensor
from ttr1svd.tucker import core_sparsity, orthonormal_range, to_tucker, tucker_to_dict


def test_orthonormal_range_drops_duplicates():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((5, 2))
    m = np.column_stack([a[:, 0], a[:, 0], a[:, 1], a[:, 0] + a[:, 1], rng.standard_normal(5)])
    q = orthonormal_range(m)
    assert q.shape == (5, 3)
    np.testing.assert_allclose(q @ (q.T @ m), m, atol=1e-12)


@pytest.mark.parametrize("shape", [(2, 2, 2), (3, 4, 2), (5, 5, 5), (2, 3, 2, 2)])
def test_reconstruction_all_R(shape):
    t = gaussian_tensor(shape, 2)
    dec = decompose(t)
    for R in range(1, len(dec) + 1):
        td = to_tucker(dec, R)
        ref = reconstruct(dec, R)
        assert frobenius_norm(td.to_tensor() - ref) <= 1e-11 * frobenius_norm(ref)
        for q, n in zip(td.factors, shape):
            np.testing.assert_allclose(q.T @ q, np.eye(q.shape[1]), atol=1e-12)
            assert q.shape[1] <= min(n, R)
        assert td.nnz == core_sparsity(td) <= int(np.prod(td.ranks))


def test_alternate_terms_of_running_example(A):
    sub = select_branches(decompose(A), [(1, 1), (2, 1), (3, 1)])
    td = to_tucker(sub, 3)
    assert td.ranks == (3, 3, 2)


def test_rank_one(A):
    dec = decompose(A)
    td = to_tucker(dec, 1)
    assert td.ranks == (1, 1, 1) and td.nnz == 1
    assert abs(td.core.array.ravel()[0]) == pytest.approx(dec.sigmas[0])


def test_random_4x3x15_ranks():
    dec = decompose(gaussian_tensor((4, 3, 15), 0))
    td = to_tucker(dec, 12)
    assert td.ranks == (4, 3, 12)
    assert td.nnz < 144


def test_errors_and_export(A):
    dec = decompose(A)
    with pytest.raises(ArgumentError):
        to_tucker(dec, 0)
    with pytest.raises(ArgumentError):
        to_tucker(dec, 7)
    obj = tucker_to_dict(to_tucker(dec, 2))
    assert obj["core_dims"] == list(to_tucker(dec, 2).ranks)
    assert len(obj["factors"]) == 3
