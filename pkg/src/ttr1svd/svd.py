"""Deterministic dense SVD with a canonical sign convention.

The factorization itself is LAPACK's (through numpy). This module owns the
sign canon that makes repeated decompositions reproducible: in every column
of ``U`` the entry of largest magnitude is positive (first such row wins a
tie), and the matching column of ``V`` is flipped with it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, NumericalError

__all__ = ["MatrixSVD", "svd_econ", "svd_full", "canonicalize_signs", "complete_basis"]


@dataclass(frozen=True)
class MatrixSVD:
    """``m = U @ diag(S) @ V.T`` (``S`` zero-padded in the full variant).

    Attributes
    ----------
    U : (m, r) or (m, m) ndarray
    S : (min(m, n),) ndarray, descending, non-negative
    V : (n, r) or (n, n) ndarray
    full : bool
        True when ``U`` and ``V`` are square.
    """

    U: np.ndarray
    S: np.ndarray
    V: np.ndarray
    full: bool = False

    def __post_init__(self):
        for name in ("U", "S", "V"):
            a = np.array(getattr(self, name), dtype=np.float64)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    def reconstruct(self) -> np.ndarray:
        k = self.S.size
        return (self.U[:, :k] * self.S) @ self.V[:, :k].T


def _check_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2 or a.size == 0:
        raise ArgumentError(f"expected a nonempty matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ArgumentError("matrix contains non-finite entries")
    return a


def _lapack_svd(a: np.ndarray):
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"SVD did not converge for a {a.shape[0]}x{a.shape[1]} matrix "
            f"(frobenius norm {np.linalg.norm(a):.3e}): {exc}"
        ) from exc
    return u, s, vt.T


def _sign_flips(U: np.ndarray) -> np.ndarray:
    if U.shape[1] == 0:
        return np.ones(0)
    pivots = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[pivots, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return signs


def canonicalize_signs(s: MatrixSVD) -> MatrixSVD:
    """Apply the sign canon to ``U`` with compensating flips on ``V``.

    Columns of ``U`` beyond ``len(S)`` (full variant) carry no singular value
    and are flipped on their own; the same holds for surplus ``V`` columns.
    """
    U = np.array(s.U)
    V = np.array(s.V)
    k = s.S.size
    signs = _sign_flips(U)
    U *= signs
    V[:, :k] *= signs[:k]
    if V.shape[1] > k:
        V[:, k:] *= _sign_flips(V[:, k:])
    return MatrixSVD(U, s.S, V, s.full)


def complete_basis(Q: np.ndarray, n: int) -> np.ndarray:
    """Extend orthonormal columns ``Q`` (n x k) to an n x n orthonormal basis.

    Candidates are the standard basis vectors e_1, ..., e_n in order, each
    orthogonalized twice against the current basis and kept when its
    residual norm exceeds ``0.5 / sqrt(n)``. A single sweep always reaches
    full dimension at that threshold: if it did not, the squared residuals of
    all n candidates would sum to less than 1, yet they sum to n minus the
    basis size.
    """
    basis = [q for q in np.asarray(Q, dtype=np.float64).T]
    tol = 0.5 / np.sqrt(n)
    for i in range(n):
        if len(basis) == n:
            break
        w = np.zeros(n)
        w[i] = 1.0
        for _ in range(2):
            for q in basis:
                w -= np.dot(q, w) * q
        nrm = np.linalg.norm(w)
        if nrm > tol:
            basis.append(w / nrm)
    if len(basis) != n:
        raise NumericalError("basis completion failed to reach full dimension")
    return np.column_stack(basis) if basis else np.zeros((n, 0))


def svd_econ(m) -> MatrixSVD:
    """Economy SVD: ``r = min(rows, cols)`` singular triplets, sign-canonical."""
    a = _check_matrix(m)
    u, s, v = _lapack_svd(a)
    return canonicalize_signs(MatrixSVD(u, s, v, full=False))


def svd_full(m) -> MatrixSVD:
    """Full SVD: square ``U`` and ``V``, singular values padded to ``min(m, n)``.

    The economy factors are kept as the leading columns; the remaining
    columns come from :func:`complete_basis`, so they are deterministic even
    though LAPACK leaves them arbitrary.
    """
    a = _check_matrix(m)
    u, s, v = _lapack_svd(a)
    econ = canonicalize_signs(MatrixSVD(u, s, v, full=False))
    U = complete_basis(econ.U, a.shape[0])
    V = complete_basis(econ.V, a.shape[1])
    return canonicalize_signs(MatrixSVD(U, econ.S, V, full=True))
