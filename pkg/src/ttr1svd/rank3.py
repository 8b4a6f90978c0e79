"""At most three real rank-1 terms for any real 2 x 2 x 2 tensor.

The TTr1 decomposition of a 2 x 2 x 2 tensor has four active columns::

    s1 u1 o u11 o v11 + s2 u1 o u12 o v12 + s3 u2 o u21 o v21 + s4 u2 o u22 o v22

Adding ``alpha * u1 o u12 o v11`` to the first column and subtracting it
from the second leaves the sum unchanged; with ``alpha`` chosen so that
``s1 u11 + alpha u12 = beta u21`` the first column's mode-2 vector lines up
with the third column's. The same trick with ``gamma * u2 o u21 o v22``
lines up the mode-3 vectors (``s3 v21 + gamma v22 = delta v11``), after
which those two columns differ in mode 1 only and merge into
``(beta u1 + delta u2) o u21 o v11``.

The alternate order aligns mode 3 of the first column and mode 2 of the
third instead, merging into ``(beta u1 + delta u2) o u11 o v21``.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .cp_als import cp_als, cp_error
from .decomposition import decompose
from .errors import ArgumentError
from .tensor import DenseTensor, RankOneTerm, as_tensor, frobenius_norm, gaussian_tensor, outer_product

__all__ = [
    "MergePlan",
    "Rank3Result",
    "Rank3Report",
    "ttr1_columns",
    "merge_plan",
    "intermediate_terms",
    "construct_rank3",
    "rank3_report",
]

DET_TOL = 1e-12


@dataclass(frozen=True)
class MergePlan:
    alpha: float
    beta: float
    gamma: float
    delta: float
    merge_order: str  # "mode2-first" or "mode3-first"


@dataclass(frozen=True)
class Rank3Result:
    terms: tuple[RankOneTerm, ...]
    status: str  # "merged", "reduced" or "merge-degenerate"
    plan: Optional[MergePlan] = None

    def to_tensor(self, shape=(2, 2, 2)) -> DenseTensor:
        total = np.zeros(shape)
        for t in self.terms:
            total += t.to_tensor().array
        return DenseTensor(total)


@dataclass
class _Columns:
    s: np.ndarray  # s1..s4 in branch order
    u1: np.ndarray
    u2: np.ndarray
    u11: np.ndarray
    u12: np.ndarray
    u21: np.ndarray
    u22: np.ndarray
    v11: np.ndarray
    v12: np.ndarray
    v21: np.ndarray
    v22: np.ndarray


def _check_222(t: DenseTensor) -> None:
    if t.shape != (2, 2, 2):
        raise ArgumentError(f"rank-3 construction needs a 2x2x2 tensor, got {t.shape}")


def ttr1_columns(t) -> _Columns:
    """The four active table columns of a 2 x 2 x 2 tensor, in branch order."""
    t = as_tensor(t)
    _check_222(t)
    by_path = {term.branch_path: term for term in decompose(t).terms}
    u, vec = {}, {}
    s = np.zeros(4)
    for n, (i, j) in enumerate([(1, 1), (1, 2), (2, 1), (2, 2)]):
        term = by_path[(i, j)]
        s[n] = term.sigma_tilde
        u[i] = term.mode_vectors[0]
        u[(i, j)] = term.mode_vectors[1]
        vec[(i, j)] = term.mode_vectors[2]
    return _Columns(
        s, u[1], u[2], u[(1, 1)], u[(1, 2)], u[(2, 1)], u[(2, 2)],
        vec[(1, 1)], vec[(1, 2)], vec[(2, 1)], vec[(2, 2)],
    )


def _solve2(a: np.ndarray, b: np.ndarray, rhs: np.ndarray) -> Optional[np.ndarray]:
    m = np.column_stack([a, b])
    scale = max(np.linalg.norm(a) * np.linalg.norm(b), np.finfo(float).tiny)
    if abs(np.linalg.det(m)) < DET_TOL * scale:
        return None
    return np.linalg.solve(m, rhs)


def merge_plan(cols: _Columns, merge_order: str = "mode2-first") -> Optional[MergePlan]:
    """Solve the two 2x2 alignment systems; ``None`` when either is singular."""
    s1, _, s3, _ = cols.s
    if merge_order == "mode2-first":
        # [-u12 u21] (alpha, beta) = s1 u11 ; [-v22 v11] (gamma, delta) = s3 v21
        ab = _solve2(-cols.u12, cols.u21, s1 * cols.u11)
        gd = _solve2(-cols.v22, cols.v11, s3 * cols.v21)
    elif merge_order == "mode3-first":
        # [-v12 v21] (alpha, beta) = s1 v11 ; [-u22 u11] (gamma, delta) = s3 u21
        ab = _solve2(-cols.v12, cols.v21, s1 * cols.v11)
        gd = _solve2(-cols.u22, cols.u11, s3 * cols.u21)
    else:
        raise ArgumentError(f"unknown merge order {merge_order!r}")
    if ab is None or gd is None:
        return None
    return MergePlan(float(ab[0]), float(ab[1]), float(gd[0]), float(gd[1]), merge_order)


def intermediate_terms(cols: _Columns, plan: MergePlan) -> list[list[np.ndarray]]:
    """The four offset columns, weights absorbed into the mode vectors.

    Their sum equals the tensor; the first and third share two mode
    directions and are merged by :func:`construct_rank3`.
    """
    s1, s2, s3, s4 = cols.s
    a, g = plan.alpha, plan.gamma
    if plan.merge_order == "mode2-first":
        return [
            [cols.u1, s1 * cols.u11 + a * cols.u12, cols.v11],
            [cols.u1, cols.u12, s2 * cols.v12 - a * cols.v11],
            [cols.u2, cols.u21, s3 * cols.v21 + g * cols.v22],
            [cols.u2, s4 * cols.u22 - g * cols.u21, cols.v22],
        ]
    return [
        [cols.u1, cols.u11, s1 * cols.v11 + a * cols.v12],
        [cols.u1, s2 * cols.u12 - a * cols.u11, cols.v12],
        [cols.u2, s3 * cols.u21 + g * cols.u22, cols.v21],
        [cols.u2, cols.u22, s4 * cols.v22 - g * cols.v21],
    ]


def _merged(cols: _Columns, plan: MergePlan) -> list[RankOneTerm]:
    inter = intermediate_terms(cols, plan)
    b, dlt = plan.beta, plan.delta
    if plan.merge_order == "mode2-first":
        first = [b * cols.u1 + dlt * cols.u2, cols.u21, cols.v11]
    else:
        first = [b * cols.u1 + dlt * cols.u2, cols.u11, cols.v21]
    return [RankOneTerm.from_vectors(v) for v in (first, inter[1], inter[3])]


def construct_rank3(t, threshold: Optional[float] = None) -> Rank3Result:
    """Express a 2 x 2 x 2 tensor as at most three real rank-1 terms.

    Weights at or below ``threshold`` (default: the numerical-rank threshold
    ``4 * u * s_max``) are treated as exact zeros. With three or fewer
    weights left the surviving TTr1 terms are returned as they are
    (status ``"reduced"``). Otherwise the columns are merged, trying the
    mode-2-first order and then mode-3-first; if both alignment systems are
    singular the four TTr1 terms are returned with status
    ``"merge-degenerate"``.
    """
    t = as_tensor(t)
    _check_222(t)
    cols = ttr1_columns(t)
    if threshold is None:
        threshold = 4 * (np.finfo(float).eps / 2) * float(cols.s.max())
    s = np.where(cols.s > threshold, cols.s, 0.0)
    cols.s = s
    plain = [
        RankOneTerm(s[0], (cols.u1, cols.u11, cols.v11)),
        RankOneTerm(s[1], (cols.u1, cols.u12, cols.v12)),
        RankOneTerm(s[2], (cols.u2, cols.u21, cols.v21)),
        RankOneTerm(s[3], (cols.u2, cols.u22, cols.v22)),
    ]
    if np.count_nonzero(s) <= 3:
        return Rank3Result(tuple(p for p in plain if p.weight != 0), "reduced")
    for order in ("mode2-first", "mode3-first"):
        plan = merge_plan(cols, order)
        if plan is not None:
            return Rank3Result(tuple(_merged(cols, plan)), "merged", plan)
    return Rank3Result(tuple(plain), "merge-degenerate")


@dataclass(frozen=True)
class Rank3Report:
    trials: int
    seed: int
    construction_errors: tuple[float, ...]
    cp_errors: tuple[float, ...]
    statuses: tuple[str, ...]
    median_construction_error: float
    median_cp_error: float
    max_terms: int

    @property
    def degenerate_count(self) -> int:
        return sum(s == "merge-degenerate" for s in self.statuses)

    def to_dict(self) -> dict:
        return asdict(self)


def rank3_report(trials: int = 100, seed: int = 0, cp_iters: int = 500, cp_tol: float = 1e-10) -> Rank3Report:
    """Relative errors of the construction versus rank-3 CP-ALS on Gaussian tensors.

    Trial ``i`` uses tensor seed ``seed + i`` and CP-ALS initialization seed
    ``seed + i`` as well, so the report is a pure function of its arguments.
    """
    rel, cp_rel, statuses = [], [], []
    max_terms = 0
    for i in range(trials):
        t = gaussian_tensor((2, 2, 2), seed + i)
        nrm = frobenius_norm(t)
        res = construct_rank3(t)
        err = frobenius_norm(t - res.to_tensor())
        rel.append(err / nrm if nrm > 0 else err)
        statuses.append(res.status)
        max_terms = max(max_terms, len(res.terms))
        cp = cp_als(t, 3, seed=seed + i, max_iters=cp_iters, tol=cp_tol)
        e = cp_error(t, cp)
        cp_rel.append(e / nrm if nrm > 0 else e)
    return Rank3Report(
        trials,
        seed,
        tuple(rel),
        tuple(cp_rel),
        tuple(statuses),
        float(np.median(rel)) if rel else 0.0,
        float(np.median(cp_rel)) if cp_rel else 0.0,
        max_terms,
    )
