"""Experiment drivers: permutation scans, deflation, perturbation, traces.

Every driver is a deterministic function of its arguments; random draws
go through ``numpy.random.default_rng`` with an explicit seed.
"""
from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .cp_als import cp_als, cp_error
from .decomposition import (
    TTr1Decomposition,
    decompose,
    default_rank_threshold,
    numerical_rank,
    term_count_bound,
)
from .errors import ArgumentError
from .svd import svd_econ
from .tensor import DenseTensor, as_tensor, frobenius_norm, permute_indices, reshape_to_matrix

__all__ = [
    "PermutationRow",
    "PermutationScan",
    "permutation_scan",
    "DeflationStep",
    "deflation_experiment",
    "cp_numerical_rank",
    "PerturbationReport",
    "perturbation_report",
    "PerturbationTrials",
    "perturbation_trials",
    "BranchTrace",
    "intermediate_product_trace",
    "sv_curve",
    "curve_csv",
    "curves_csv",
    "deflation_csv",
    "permutation_csv",
]

MAX_SCAN_ORDER = 6
CP_RANK_THRESHOLD = 1e-10


# -- permutations ----------------------------------------------------------


@dataclass(frozen=True)
class PermutationRow:
    order: tuple[int, ...]
    term_count: int
    sigmas: tuple[float, ...]
    numerical_rank: int


@dataclass(frozen=True)
class PermutationScan:
    rows: tuple[PermutationRow, ...]
    min_term_bound: int
    best_orders: tuple[tuple[int, ...], ...]

    def row(self, order: Sequence[int]) -> PermutationRow:
        order = tuple(order)
        for r in self.rows:
            if r.order == order:
                return r
        raise KeyError(order)


def permutation_scan(t) -> PermutationScan:
    """Decompose ``t`` under every index permutation (lexicographic order).

    Also reports the smallest term-count bound over all permutations, an
    upper bound on the orthogonal rank, and the orders attaining it.
    """
    t = as_tensor(t)
    d = t.ndim
    if d > MAX_SCAN_ORDER:
        raise ArgumentError(f"a permutation scan of a {d}-way tensor needs {d}! decompositions; refusing d > {MAX_SCAN_ORDER}")
    rows = []
    for perm in itertools.permutations(range(1, d + 1)):
        dec = decompose(t, perm)
        rows.append(PermutationRow(perm, len(dec), tuple(float(s) for s in dec.sigmas), numerical_rank(dec)))
    bounds = {r.order: term_count_bound(permute_indices(t, r.order).shape) for r in rows}
    low = min(bounds.values())
    best = tuple(o for o, b in bounds.items() if b == low)
    return PermutationScan(tuple(rows), low, best)


# -- deflation -------------------------------------------------------------


@dataclass(frozen=True)
class DeflationStep:
    iteration: int
    sigmas: tuple[float, ...]
    ttr1_rank: int
    residual_norm: float
    cp_rank: Optional[int] = None


def cp_numerical_rank(
    t, max_rank: int, seeds: Sequence[int] = (0, 1, 2), max_iters: int = 500, tol: float = 1e-10,
    threshold: float = CP_RANK_THRESHOLD,
) -> Optional[int]:
    """Smallest ``R`` whose best CP-ALS fit over ``seeds`` has absolute error below ``threshold``.

    ``0`` for the zero tensor; ``None`` when no rank up to ``max_rank`` fits.
    """
    t = as_tensor(t)
    if frobenius_norm(t) <= threshold:
        return 0
    for R in range(1, max_rank + 1):
        best = min(cp_error(t, cp_als(t, R, seed=s, max_iters=max_iters, tol=tol)) for s in seeds)
        if best < threshold:
            return R
    return None


def deflation_experiment(
    t,
    iterations: int,
    *,
    threshold: Optional[float] = None,
    cp_rank: bool = False,
    cp_seeds: Sequence[int] = (0, 1, 2),
    cp_max_rank: Optional[int] = None,
) -> list[DeflationStep]:
    """Repeatedly subtract the largest TTr1 term.

    Returns ``iterations + 1`` steps, the first for ``t`` itself. The
    numerical-rank threshold is fixed once, from the decomposition of the
    original tensor (``max(n_1, n_2 ... n_d) * u * sigma_1``), and reused for
    every iteration; ``threshold`` overrides it.
    """
    iterations = int(iterations)
    if iterations < 1:
        raise ArgumentError(f"iterations must be >= 1, got {iterations}")
    cur = as_tensor(t)
    dec = decompose(cur)
    if threshold is None:
        threshold = default_rank_threshold(dec)
    if cp_max_rank is None:
        cp_max_rank = term_count_bound(cur.shape) + 2
    steps = []
    for it in range(iterations + 1):
        if it > 0:
            cur = cur - dec.terms[0].to_tensor()
            dec = decompose(cur)
        cpr = cp_numerical_rank(cur, cp_max_rank, cp_seeds) if cp_rank else None
        steps.append(
            DeflationStep(it, tuple(float(s) for s in dec.sigmas), numerical_rank(dec, threshold), frobenius_norm(cur), cpr)
        )
    return steps


# -- perturbation ----------------------------------------------------------


@dataclass(frozen=True)
class PerturbationReport:
    """Deviation of the TTr1 weights of ``t + e`` from those of ``t``.

    ``per_index_dev`` and ``rss_dev`` compare weights in sorted order.
    ``weyl_bound`` and ``delta_v_norms`` are keyed by branch path:
    ``delta_v_norms[p][k-1]`` is ``||v_hat - v||_2`` at level ``k`` of
    branch ``p`` (levels 1 .. d-2, after sign alignment), and the bound is
    ``e_spec + sigma_1 * sum_k delta_v``, with ``sigma_1`` that branch's
    level-1 singular value.
    """

    e_frob: float
    e_spec: float
    per_index_dev: tuple[float, ...]
    rss_dev: float
    weyl_bound: dict
    delta_v_norms: dict

    @property
    def mirsky_holds(self) -> bool:
        return self.rss_dev < self.e_frob or self.e_frob == 0

    @property
    def weyl_holds(self) -> bool:
        return all(dv <= self.e_spec for dv in self.per_index_dev)


def _node_index(dec: TTr1Decomposition) -> dict:
    return {n.path: n for n in dec.nodes}


def perturbation_report(t, e) -> PerturbationReport:
    t, e = as_tensor(t), as_tensor(e)
    if t.shape != e.shape:
        raise ArgumentError(f"perturbation shape {e.shape} does not match tensor shape {t.shape}")
    d = t.ndim
    dec = decompose(t, keep_vectors=True)
    pdec = decompose(t + e, keep_vectors=True)
    e_frob = frobenius_norm(e)
    e_spec = float(svd_econ(reshape_to_matrix(e, 1)).S[0]) if e_frob > 0 else 0.0
    s, sh = dec.sigmas, pdec.sigmas
    m = min(s.size, sh.size)
    dev = np.abs(sh[:m] - s[:m])
    nodes, pnodes = _node_index(dec), _node_index(pdec)
    weyl, dvs = {}, {}
    for term in dec.terms:
        path = term.branch_path
        norms = []
        for level in range(1, d - 1):
            a = nodes[path[:level]].v_vector
            b = pnodes[path[:level]].v_vector
            if np.dot(a, b) < 0:
                b = -b
            norms.append(float(np.linalg.norm(b - a)))
        dvs[path] = tuple(norms)
        weyl[path] = e_spec + term.level_sigmas[0] * sum(norms)
    return PerturbationReport(e_frob, e_spec, tuple(float(x) for x in dev), float(np.sqrt(np.sum(dev**2))), weyl, dvs)


@dataclass(frozen=True)
class PerturbationTrials:
    trials: int
    mirsky_violations: int
    weyl_violations: int
    max_rss_ratio: float
    max_dev_ratio: float


def perturbation_trials(t, trials: int = 200, std: float = 1e-6, seed: int = 0) -> PerturbationTrials:
    """Monte Carlo check of the two sorted-weight inequalities.

    Trial ``i`` draws ``e`` with i.i.d. ``N(0, std**2)`` entries from seed
    ``seed + i``.
    """
    t = as_tensor(t)
    mv = wv = 0
    rss_ratio = dev_ratio = 0.0
    for i in range(trials):
        rng = np.random.default_rng(seed + i)
        e = DenseTensor(std * rng.standard_normal(t.shape))
        rep = perturbation_report(t, e)
        mv += not rep.mirsky_holds
        wv += not rep.weyl_holds
        rss_ratio = max(rss_ratio, rep.rss_dev / rep.e_frob)
        dev_ratio = max(dev_ratio, max(rep.per_index_dev) / rep.e_spec)
    return PerturbationTrials(trials, mv, wv, rss_ratio, dev_ratio)


# -- traces and curves -----------------------------------------------------


@dataclass(frozen=True)
class BranchTrace:
    branch_path: tuple[int, ...]
    products: tuple[float, ...]

    @property
    def non_increasing(self) -> bool:
        """Each level past the first multiplies by a factor of at most one."""
        p = self.products
        return all(p[k] <= p[k - 1] * (1 + 1e-12) for k in range(1, len(p)))


def intermediate_product_trace(t) -> list[BranchTrace]:
    """Running products ``sigma_i, sigma_i sigma_ij, ...`` per leaf, in sorted term order."""
    t = as_tensor(t)
    if t.ndim < 3:
        raise ArgumentError(f"intermediate products need a tensor of order >= 3, got d={t.ndim}")
    dec = decompose(t)
    return [
        BranchTrace(term.branch_path, tuple(float(x) for x in np.cumprod(term.level_sigmas)))
        for term in dec.terms
    ]


def sv_curve(dec: TTr1Decomposition) -> list[float]:
    return [float(t.sigma_tilde) for t in dec.terms]


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def curve_csv(values: Sequence[float]) -> str:
    """``index,sigma_tilde`` with 1-based indices."""
    return _csv(["index", "sigma_tilde"], [(i, repr(float(v))) for i, v in enumerate(values, start=1)])


def curves_csv(curves: dict) -> str:
    """Long format ``curve,index,sigma_tilde`` for several labelled curves."""
    rows = [(label, i, repr(float(v))) for label, vals in curves.items() for i, v in enumerate(vals, start=1)]
    return _csv(["curve", "index", "sigma_tilde"], rows)


def deflation_csv(steps: Sequence[DeflationStep]) -> str:
    rows = [
        (s.iteration, s.ttr1_rank, "" if s.cp_rank is None else s.cp_rank, repr(s.residual_norm), " ".join(repr(x) for x in s.sigmas))
        for s in steps
    ]
    return _csv(["iteration", "ttr1_rank", "cp_rank", "residual_norm", "sigmas"], rows)


def permutation_csv(scan: PermutationScan) -> str:
    rows = [
        ("-".join(str(i) for i in r.order), r.term_count, r.numerical_rank, " ".join(repr(x) for x in r.sigmas))
        for r in scan.rows
    ]
    return _csv(["order", "term_count", "numerical_rank", "sigmas"], rows)
