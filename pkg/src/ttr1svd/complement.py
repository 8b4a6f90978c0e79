"""Outer product column table and an orthonormal basis of span(A)-perp.

Only 3-way tensors are handled. The level-1 economy SVD of the
``n_1 x (n_2 n_3)`` unfolding gives branches ``u_i``; a *full* SVD of each
reshaped ``v_i`` (``n_2 x n_3``) then gives ``n_2`` left and ``n_3`` right
vectors per branch. Every pairing ``u_i o u_ij o v_ik`` is a unit rank-1
tensor, and together they form an orthonormal basis of the whole space when
``n_1 <= n_2 n_3``. Pairings with ``j == k`` carry the decomposition's
weights (the *active* columns); the rest are orthogonal to ``A`` outright.
The remaining complement directions are mixtures of active columns taken
from the null space of the weight vector.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError
from .svd import svd_econ, svd_full
from .tensor import DenseTensor, RankOneTerm, as_tensor, frobenius_norm, reshape_to_matrix

__all__ = [
    "TableColumn",
    "OuterProductTable",
    "ComplementBasis",
    "ComplementReport",
    "build_table",
    "complement_basis",
    "verify_complement",
]


@dataclass(frozen=True)
class TableColumn:
    """One pairing ``u_i o u_ij o v_ik`` (1-based ``branch``, ``j``, ``k``)."""

    branch: int
    j: int
    k: int
    weight: float
    term: RankOneTerm

    @property
    def structural(self) -> bool:
        """True for the diagonal pairings that the economy decomposition computes."""
        return self.j == self.k


@dataclass(frozen=True)
class OuterProductTable:
    shape: tuple[int, int, int]
    columns: tuple[TableColumn, ...]
    threshold: float

    @property
    def active(self) -> tuple[TableColumn, ...]:
        return tuple(c for c in self.columns if c.structural)

    @property
    def zero_weight(self) -> tuple[TableColumn, ...]:
        return tuple(c for c in self.columns if not c.structural)

    @property
    def numerically_active(self) -> tuple[TableColumn, ...]:
        """Active columns whose weight exceeds the numerical-rank threshold."""
        return tuple(c for c in self.active if c.weight > self.threshold)

    def branch_columns(self, branch: int) -> tuple[TableColumn, ...]:
        return tuple(c for c in self.columns if c.branch == branch)


@dataclass(frozen=True)
class ComplementBasis:
    zero_weight_terms: tuple[RankOneTerm, ...]
    mixing_terms: tuple[DenseTensor, ...]
    mixing_coefficients: np.ndarray

    def __len__(self) -> int:
        return len(self.zero_weight_terms) + len(self.mixing_terms)

    def elements(self) -> list[DenseTensor]:
        """All basis elements as dense tensors, zero-weight ones first."""
        return [t.to_tensor() for t in self.zero_weight_terms] + list(self.mixing_terms)

    def kinds(self) -> list[str]:
        return ["zero-weight"] * len(self.zero_weight_terms) + ["mixing"] * len(self.mixing_terms)


@dataclass(frozen=True)
class ComplementReport:
    max_inner: float
    max_gram_offdiag: float
    max_norm_deviation: float
    count: int
    expected_count: int
    violations: tuple[int, ...]

    @property
    def ok(self) -> bool:
        return not self.violations and self.count == self.expected_count


def _check_3way(t: DenseTensor) -> None:
    if t.ndim != 3:
        raise ArgumentError(f"orthogonal complement is only supported for 3-way tensors, got d={t.ndim}")
    n1, n2, n3 = t.shape
    if n1 > n2 * n3:
        raise ArgumentError(
            f"n1={n1} exceeds n2*n3={n2 * n3}; permute the indices so the first "
            "dimension is the smallest before building the table"
        )


def build_table(t) -> OuterProductTable:
    """All ``r_1 * n_2 * n_3`` orthogonal rank-1 pairings, branch-major.

    Within a branch the columns run over ``j`` (left vectors) then ``k``
    (right vectors), the layout of the printed tables.
    """
    t = as_tensor(t)
    _check_3way(t)
    n1, n2, n3 = t.shape
    top = svd_econ(reshape_to_matrix(t, 1))
    n_eps = np.finfo(np.float64).eps / 2
    columns = []
    weights = []
    for i in range(top.S.size):
        inner = svd_full(top.V[:, i].reshape((n2, n3), order="F"))
        for j in range(n2):
            for k in range(n3):
                w = top.S[i] * inner.S[j] if j == k and j < inner.S.size else 0.0
                term = RankOneTerm(1.0, (top.U[:, i], inner.U[:, j], inner.V[:, k]))
                columns.append(TableColumn(i + 1, j + 1, k + 1, float(w), term))
                if j == k:
                    weights.append(w)
    threshold = max(n1, n2 * n3) * n_eps * (max(weights) if weights else 0.0)
    return OuterProductTable((n1, n2, n3), tuple(columns), threshold)


def complement_basis(t) -> ComplementBasis:
    """Orthonormal basis of the tensors orthogonal to ``t``.

    Zero-weight columns of the table are used as they are. The ``K`` active
    columns are mixed by the ``K x (K-1)`` orthonormal null-space basis of
    the weight row vector, obtained from a full SVD of that ``1 x K`` matrix.
    """
    t = as_tensor(t)
    _check_3way(t)
    if frobenius_norm(t) == 0:
        raise ArgumentError("complement of the zero tensor is the whole space")
    table = build_table(t)
    active = table.active
    sigma = np.array([[c.weight for c in active]])
    null = svd_full(sigma).V[:, 1:]
    mats = np.column_stack([c.term.to_tensor().data for c in active])
    mixed = mats @ null
    mixing = tuple(DenseTensor.from_data(t.shape, mixed[:, m]) for m in range(mixed.shape[1]))
    null.setflags(write=False)
    return ComplementBasis(tuple(c.term for c in table.zero_weight), mixing, null)


def verify_complement(t, basis, tol: float = 1e-10) -> ComplementReport:
    """Check orthogonality to ``t``, mutual orthonormality and dimension.

    ``basis`` may be a :class:`ComplementBasis` or any sequence of tensors.
    An element is flagged when its normalized inner product with ``t``, its
    norm deviation from 1, or any Gram entry it takes part in exceeds ``tol``.
    """
    t = as_tensor(t)
    elems = basis.elements() if isinstance(basis, ComplementBasis) else [as_tensor(b) for b in basis]
    if any(e.shape != t.shape for e in elems):
        raise ArgumentError("basis element shapes must match the tensor")
    norm = frobenius_norm(t)
    if not elems:
        return ComplementReport(0.0, 0.0, 0.0, 0, t.size - 1, ())
    B = np.column_stack([e.data for e in elems])
    inner = np.abs(B.T @ t.data) / (norm if norm > 0 else 1.0)
    gram = B.T @ B
    off = np.abs(gram - np.diag(np.diag(gram)))
    dev = np.abs(np.diag(gram) - 1.0)
    bad = (inner > tol) | (dev > tol) | (off.max(axis=1) > tol)
    return ComplementReport(
        float(inner.max()),
        float(off.max()),
        float(dev.max()),
        len(elems),
        t.size - 1,
        tuple(int(i) for i in np.flatnonzero(bad)),
    )
