import numpy as np
import pytest

from ttr1svd.complement import build_table, complement_basis, verify_complement
from ttr1svd.decomposition import decompose
from ttr1svd.errors import ArgumentError
from ttr1svd.tensor import DenseTensor, gaussian_tensor, inner_product


def test_table_layout(A):
    table = build_table(A)
    assert len(table.columns) == 3 * 4 * 2
    assert len(table.active) == 6 and len(table.zero_weight) == 18
    assert len(table.numerically_active) == 4
    assert [(c.j, c.k) for c in table.branch_columns(1)][:3] == [(1, 1), (1, 2), (2, 1)]


def test_active_weights_are_the_decomposition(A):
    table = build_table(A)
    got = sorted((c.weight for c in table.active), reverse=True)
    np.testing.assert_allclose(got, decompose(A).sigmas, atol=1e-12)


def test_table_is_orthonormal_basis(A):
    B = np.column_stack([c.term.to_tensor().data for c in build_table(A).columns])
    np.testing.assert_allclose(B.T @ B, np.eye(24), atol=1e-12)
    # A is recovered from the weighted active columns alone
    total = sum(c.weight * c.term.to_tensor().array for c in build_table(A).active)
    np.testing.assert_allclose(total, A.array, atol=1e-12)


def test_zero_weight_columns_orthogonal_to_A(A):
    for c in build_table(A).zero_weight:
        assert abs(inner_product(A, c.term.to_tensor())) < 1e-12


def test_running_example_complement(A):
    basis = complement_basis(A)
    assert len(basis.zero_weight_terms) == 18 and len(basis.mixing_terms) == 5
    assert basis.kinds().count("mixing") == 5
    rep = verify_complement(A, basis)
    assert rep.ok and rep.count == 23 == rep.expected_count
    assert rep.max_inner <= 1e-10 and rep.max_gram_offdiag <= 1e-10


@pytest.mark.parametrize("shape", [(2, 2, 2), (2, 3, 4), (3, 3, 3), (1, 2, 3), (4, 2, 2)])
def test_random_complements(shape):
    t = gaussian_tensor(shape, 5)
    rep = verify_complement(t, complement_basis(t))
    assert rep.ok, rep


def test_verify_flags_bad_element(A):
    elems = complement_basis(A).elements()
    elems[3] = A * (1 / 70.0)
    rep = verify_complement(A, elems)
    assert not rep.ok and 3 in rep.violations


def test_errors():
    with pytest.raises(ArgumentError, match="3-way"):
        build_table(gaussian_tensor((2, 2), 0))
    with pytest.raises(ArgumentError, match="permute"):
        build_table(gaussian_tensor((5, 2, 2), 0))
    with pytest.raises(ArgumentError):
        complement_basis(DenseTensor.zeros([2, 2, 2]))
