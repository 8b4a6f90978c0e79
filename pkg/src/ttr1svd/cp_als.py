"""Plain CP alternating least squares, used only as a comparison baseline."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError
from .tensor import DenseTensor, as_tensor, frobenius_norm

__all__ = ["CPDecomposition", "cp_als", "cp_error", "cp_to_tensor", "khatri_rao"]

_LETTERS = "abcdefghijklmnopqrstuvwxyz"
RIDGE = 1e-12


@dataclass(frozen=True)
class CPDecomposition:
    weights: np.ndarray
    factors: tuple[np.ndarray, ...]
    fit_history: tuple[float, ...]
    iterations: int

    @property
    def rank(self) -> int:
        return self.weights.size


def khatri_rao(mats) -> np.ndarray:
    """Column-wise Kronecker product, first matrix varying slowest.

    Mirrors ``kron(a_r, b_r)`` column by column, so with factors listed in
    reverse mode order it matches column-major unfoldings.
    """
    mats = [np.atleast_2d(m) for m in mats]
    r = mats[0].shape[1]
    out = mats[0]
    for m in mats[1:]:
        out = (out[:, None, :] * m[None, :, :]).reshape(-1, r)
    return out


def cp_to_tensor(weights, factors) -> DenseTensor:
    d = len(factors)
    subs = ",".join(_LETTERS[k] + "z" for k in range(d)) + ",z->" + _LETTERS[:d]
    return DenseTensor(np.einsum(subs, *factors, np.asarray(weights)))


def _mttkrp(x: np.ndarray, factors, mode: int) -> np.ndarray:
    d = x.ndim
    idx = _LETTERS[:d]
    operands, subs = [x], [idx]
    for k in range(d):
        if k != mode:
            operands.append(factors[k])
            subs.append(idx[k] + "z")
    return np.einsum(",".join(subs) + "->" + idx[mode] + "z", *operands)


def _normalize(f: np.ndarray):
    norms = np.linalg.norm(f, axis=0)
    safe = np.where(norms > 0, norms, 1.0)
    return f / safe, norms


def cp_als(t, R: int, seed: int = 0, max_iters: int = 500, tol: float = 1e-10) -> CPDecomposition:
    """Rank-``R`` CP fit by alternating least squares.

    Each sweep solves, for every mode in turn, the normal equations
    ``F_k (H) = MTTKRP_k`` where ``H`` is the Hadamard product of the other
    factors' Gram matrices. Columns are normalized after each solve with the
    norms collected in the weights. Iteration stops once the relative error
    changes by less than ``tol`` or after ``max_iters`` sweeps.

    Parameters
    ----------
    t : DenseTensor or array_like
    R : int
        Number of rank-1 terms.
    seed : int
        Seed for the standard-normal initial factors.
    max_iters : int
    tol : float

    Returns
    -------
    CPDecomposition
        ``fit_history`` holds the relative error after every sweep.
    """
    t = as_tensor(t)
    R = int(R)
    if R < 1:
        raise ArgumentError(f"rank must be >= 1, got {R}")
    x = t.array
    d = t.ndim
    norm_x = frobenius_norm(t)
    rng = np.random.default_rng(seed)
    factors = [_normalize(rng.standard_normal((n, R)))[0] for n in t.shape]
    weights = np.ones(R)
    history: list[float] = []
    it = 0
    for it in range(1, max_iters + 1):
        for k in range(d):
            gram = np.ones((R, R))
            for j in range(d):
                if j != k:
                    gram *= factors[j].T @ factors[j]
            rhs = _mttkrp(x, factors, k)
            try:
                sol = np.linalg.solve(gram, rhs.T).T
                if not np.all(np.isfinite(sol)):
                    raise np.linalg.LinAlgError("non-finite solution")
            except np.linalg.LinAlgError:
                sol = np.linalg.solve(gram + RIDGE * np.eye(R), rhs.T).T
            factors[k], weights = _normalize(sol)
        err = frobenius_norm(t - cp_to_tensor(weights, factors))
        history.append(err / norm_x if norm_x > 0 else err)
        if len(history) > 1 and abs(history[-2] - history[-1]) < tol:
            break
    for f in factors:
        f.setflags(write=False)
    weights.setflags(write=False)
    return CPDecomposition(weights, tuple(factors), tuple(history), it)


def cp_error(t, cp: CPDecomposition) -> float:
    """Frobenius norm of ``t`` minus the materialized CP model."""
    t = as_tensor(t)
    return frobenius_norm(t - cp_to_tensor(cp.weights, cp.factors))
