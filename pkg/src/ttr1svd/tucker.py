"""Tucker form of a (truncated) TTr1 decomposition.

The mode-k vectors of the kept terms are orthogonalized into a factor
``U_k``; each term then becomes an outer product of coefficient columns
``U_k^T x_k`` inside a small core. Sibling leaves share their upper-level
vectors, so the matrices are rank deficient and the core ends up sparse.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .decomposition import TTr1Decomposition
from .errors import ArgumentError
from .tensor import DenseTensor, mode_product, outer_product

__all__ = ["TuckerDecomposition", "to_tucker", "core_sparsity", "tucker_to_dict", "orthonormal_range"]

RANK_TOL = 1e-12
NNZ_TOL = 1e-12


@dataclass(frozen=True)
class TuckerDecomposition:
    """``core x_1 U_1 x_2 ... x_d U_d``.

    Attributes
    ----------
    core : DenseTensor
    factors : tuple of ndarray
        ``n_k x r_k`` with orthonormal columns.
    nnz : int
        Core entries above ``1e-12 * max|core|``.
    """

    core: DenseTensor
    factors: tuple[np.ndarray, ...]
    nnz: int

    @property
    def ranks(self) -> tuple[int, ...]:
        return self.core.shape

    def to_tensor(self) -> DenseTensor:
        out = self.core
        for k, u in enumerate(self.factors, start=1):
            out = mode_product(out, u, k)
        return out


def orthonormal_range(m: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis of the column space, scanning columns in order.

    Gram-Schmidt with one reorthogonalization pass. A column whose residual
    (its R-factor diagonal) falls below ``tol`` times the largest column
    norm is dependent on the earlier ones and is skipped. Unlike an
    unpivoted Householder QR, skipping never leaves a later column partly
    outside the kept span.
    """
    m = np.asarray(m, dtype=np.float64)
    n, c = m.shape
    scale = float(np.max(np.linalg.norm(m, axis=0))) if c else 0.0
    basis: list[np.ndarray] = []
    if scale == 0:
        return np.zeros((n, 0))
    for j in range(c):
        w = m[:, j].copy()
        for _ in range(2):
            for q in basis:
                w -= np.dot(q, w) * q
        nrm = np.linalg.norm(w)
        if nrm >= tol * scale:
            basis.append(w / nrm)
    return np.column_stack(basis) if basis else np.zeros((n, 0))


def _count_nnz(core: np.ndarray) -> int:
    peak = float(np.max(np.abs(core))) if core.size else 0.0
    if peak == 0:
        return 0
    return int(np.count_nonzero(np.abs(core) > NNZ_TOL * peak))


def to_tucker(dec: TTr1Decomposition, R: Optional[int] = None) -> TuckerDecomposition:
    """Tucker form of the first ``R`` terms (all by default).

    The factors live in the decomposed (permuted) index order. Mode-vector
    columns are taken in sorted term order, which fixes the coefficient
    pattern and hence the sparsity of the core.
    """
    n_terms = len(dec.terms)
    R = n_terms if R is None else int(R)
    if not 1 <= R <= n_terms:
        raise ArgumentError(f"R={R} out of range 1..{n_terms}")
    terms = dec.terms[:R]
    d = dec.ndim
    factors, coeffs = [], []
    for k in range(d):
        cols = np.column_stack([t.mode_vectors[k] for t in terms])
        q = orthonormal_range(cols)
        factors.append(q)
        coeffs.append(q.T @ cols)
    core = np.zeros(tuple(q.shape[1] for q in factors))
    for i, t in enumerate(terms):
        core += outer_product(t.sigma_tilde, [c[:, i] for c in coeffs]).array
    for q in factors:
        q.setflags(write=False)
    return TuckerDecomposition(DenseTensor(core), tuple(factors), _count_nnz(core))


def core_sparsity(td: TuckerDecomposition) -> int:
    return _count_nnz(td.core.array)


def tucker_to_dict(td: TuckerDecomposition) -> dict:
    return {
        "format": "tucker",
        "core_dims": list(td.core.shape),
        "core": td.core.data.tolist(),
        "order": "column-major",
        "factors": [{"rows": int(q.shape[0]), "cols": int(q.shape[1]), "data": q.ravel(order="F").tolist()} for q in td.factors],
        "nnz": td.nnz,
    }
