"""TTr1SVD: a tree of SVDs giving a sorted sum of orthogonal rank-1 terms.

The input is reshaped to an ``n_1 x (n_2 ... n_d)`` matrix and factored by a
(sign-canonical) economy SVD. Every right singular vector is then reshaped
to ``n_2 x (n_3 ... n_d)`` and factored again, and so on until the last
level, whose right singular vectors become the mode-d vectors of the terms.
The weight of a term is the product of the singular values along its branch.

Tree levels follow the usual convention: the root SVD sits at level 0 and
produces the level-1 nodes; leaves live at level ``d - 1``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ArgumentError
from .svd import svd_econ
from .tensor import (
    DenseTensor,
    as_tensor,
    check_permutation,
    check_shape,
    inverse_permutation,
    outer_product,
    permute_indices,
)

__all__ = [
    "TTr1Node",
    "SigmaTerm",
    "TTr1Decomposition",
    "decompose",
    "decompose_pruned",
    "reconstruct",
    "approximation_error",
    "truncate_to_tolerance",
    "approxi_rank_gap",
    "numerical_rank",
    "default_rank_threshold",
    "branching_ranks",
    "term_count_bound",
    "svd_count_bound",
    "select_branches",
    "decomposition_to_dict",
    "decomposition_from_dict",
    "dumps_decomposition",
    "loads_decomposition",
]

UNIT_ROUNDOFF = np.finfo(np.float64).eps / 2


def _frozen(v) -> np.ndarray:
    a = np.array(v, dtype=np.float64).ravel()
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TTr1Node:
    """One node of the SVD tree.

    ``path`` holds the 1-based child index at each level from the root, so
    its length equals ``level`` and the parent is the node at ``path[:-1]``
    (the empty path is the root SVD). ``v_vector`` is only kept for leaves
    unless the decomposition was asked to retain internal vectors.
    """

    level: int
    sigma: float
    u_vector: np.ndarray
    path: tuple[int, ...]
    v_vector: Optional[np.ndarray] = None

    @property
    def parent_path(self) -> tuple[int, ...]:
        return self.path[:-1]


@dataclass(frozen=True)
class SigmaTerm:
    """``sigma_tilde * u_1 o ... o u_{d-1} o v`` with unit mode vectors."""

    sigma_tilde: float
    mode_vectors: tuple[np.ndarray, ...]
    branch_path: tuple[int, ...]
    level_sigmas: tuple[float, ...]

    @property
    def weight(self) -> float:
        return self.sigma_tilde

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(v.size for v in self.mode_vectors)

    def to_tensor(self, weighted: bool = True) -> DenseTensor:
        return outer_product(self.sigma_tilde if weighted else 1.0, self.mode_vectors)


@dataclass(frozen=True)
class TTr1Decomposition:
    """Result of :func:`decompose` or :func:`decompose_pruned`.

    Attributes
    ----------
    shape : tuple of int
        Shape of the decomposed tensor, i.e. *after* applying ``index_order``.
    index_order : tuple of int
        1-based permutation that was applied to the input before decomposing.
    terms : tuple of SigmaTerm
        Sorted by descending ``sigma_tilde``; ties by branch path.
    svd_count : int
        Number of SVDs actually computed.
    prune_tolerance : float or None
    pruned_leaf_count : int
        Leaves of the full tree that were never computed because pruning
        removed one of their ancestors.
    pruned_energy : float
        Exact squared Frobenius norm of the removed subtrees.
    nodes : tuple of TTr1Node
        All computed tree nodes, level-major order (not serialized).
    """

    shape: tuple[int, ...]
    index_order: tuple[int, ...]
    terms: tuple[SigmaTerm, ...]
    svd_count: int
    prune_tolerance: Optional[float] = None
    pruned_leaf_count: int = 0
    pruned_energy: float = 0.0
    nodes: tuple[TTr1Node, ...] = field(default=(), repr=False, compare=False)

    @property
    def ndim(self) -> int:
        return len(self.shape)

    @property
    def original_shape(self) -> tuple[int, ...]:
        inv = inverse_permutation(self.index_order)
        return tuple(self.shape[i - 1] for i in inv)

    @property
    def sigmas(self) -> np.ndarray:
        return np.array([t.sigma_tilde for t in self.terms])

    def __len__(self) -> int:
        return len(self.terms)


# -- counting --------------------------------------------------------------


def branching_ranks(shape: Sequence[int]) -> list[int]:
    """``r_k = min(n_{k+1}, n_{k+2} ... n_d)`` for ``k = 0 .. d-2``."""
    shape = check_shape(shape)
    d = len(shape)
    if d < 2:
        raise ArgumentError("branching ranks need a tensor of order >= 2")
    return [min(shape[k], int(np.prod(shape[k + 1 :]))) for k in range(d - 1)]


def term_count_bound(shape: Sequence[int]) -> int:
    """Number of leaves of the full tree, an upper bound on the orthogonal rank."""
    return int(np.prod(branching_ranks(shape)))


def svd_count_bound(shape: Sequence[int]) -> int:
    """Number of SVDs in a full decomposition: ``1 + sum_{i<d-2} prod_{k<=i} r_k``."""
    r = branching_ranks(shape)
    return 1 + sum(int(np.prod(r[: i + 1])) for i in range(len(r) - 1))


# -- expansion -------------------------------------------------------------


@dataclass
class _Pending:
    path: tuple[int, ...]
    sigmas: tuple[float, ...]
    u_vectors: tuple[np.ndarray, ...]
    v: np.ndarray

    @property
    def level(self) -> int:
        return len(self.path)

    @property
    def ancestor_product(self) -> float:
        return float(np.prod(self.sigmas[:-1]))

    @property
    def product(self) -> float:
        return float(np.prod(self.sigmas))


def _children(parent_path, parent_sigmas, parent_us, v, rows) -> list[_Pending]:
    s = svd_econ(np.asarray(v).reshape((rows, -1), order="F"))
    return [
        _Pending(
            parent_path + (j + 1,),
            parent_sigmas + (float(s.S[j]),),
            parent_us + (s.U[:, j].copy(),),
            s.V[:, j].copy(),
        )
        for j in range(s.S.size)
    ]


def _prune_charge(node: _Pending, ranks: list[int], d: int) -> float:
    # Leaf-count heuristic, floored by the subtree's exact energy so that
    # the accumulated charge always bounds the true truncation error.
    level = node.level
    sigma_k = node.sigmas[-1]
    leaves_below = int(np.prod(ranks[level : d - 1]))
    heuristic = leaves_below * (node.ancestor_product * sigma_k ** (d - level - 1)) ** 2
    exact = node.product**2
    return max(heuristic, exact)


def _expand(t: DenseTensor, eps: Optional[float], keep_vectors: bool):
    shape = t.shape
    d = len(shape)
    ranks = branching_ranks(shape)
    budget = None if eps is None else eps**2
    spent = 0.0
    pruned_leaves = 0
    pruned_energy = 0.0

    frontier = _children((), (), (), t.data, shape[0])
    svd_count = 1
    nodes: list[TTr1Node] = []
    terms: list[SigmaTerm] = []

    for level in range(1, d):
        is_leaf_level = level == d - 1
        if budget is not None and not is_leaf_level:
            charges = sorted(
                ((_prune_charge(p, ranks, d), p.path, p) for p in frontier),
                key=lambda c: (c[0], c[1]),
            )
            dropped = set()
            for charge, path, p in charges:
                if spent + charge > budget:
                    break
                spent += charge
                pruned_energy += p.product**2
                pruned_leaves += int(np.prod(ranks[level : d - 1]))
                dropped.add(path)
            frontier = [p for p in frontier if p.path not in dropped]

        for p in frontier:
            keep_v = is_leaf_level or keep_vectors
            nodes.append(
                TTr1Node(
                    level,
                    p.sigmas[-1],
                    _frozen(p.u_vectors[-1]),
                    p.path,
                    _frozen(p.v) if keep_v else None,
                )
            )

        if is_leaf_level:
            for p in frontier:
                terms.append(
                    SigmaTerm(
                        p.product,
                        tuple(_frozen(u) for u in p.u_vectors) + (_frozen(p.v),),
                        p.path,
                        p.sigmas,
                    )
                )
        else:
            nxt = []
            for p in frontier:
                nxt.extend(_children(p.path, p.sigmas, p.u_vectors, p.v, shape[level]))
                svd_count += 1
            frontier = nxt

    terms.sort(key=lambda term: (-term.sigma_tilde, term.branch_path))
    return tuple(terms), svd_count, tuple(nodes), pruned_leaves, pruned_energy


def _prepare(t, order) -> tuple[DenseTensor, tuple[int, ...]]:
    t = as_tensor(t)
    if t.ndim < 2:
        raise ArgumentError("decomposition needs a tensor of order >= 2")
    if order is None:
        order = tuple(range(1, t.ndim + 1))
    order = check_permutation(order, t.ndim)
    return permute_indices(t, order), order


def decompose(
    t, order: Optional[Sequence[int]] = None, *, keep_vectors: bool = False
) -> TTr1Decomposition:
    """Full TTr1 decomposition.

    Parameters
    ----------
    t : DenseTensor or array_like
        Tensor of order ``d >= 2``.
    order : sequence of int, optional
        1-based index permutation applied before decomposing.
    keep_vectors : bool
        Retain the right singular vectors of internal nodes in ``nodes``.

    Returns
    -------
    TTr1Decomposition
        ``prod_k r_k`` terms, zero-weight branches included.
    """
    tp, order = _prepare(t, order)
    terms, svd_count, nodes, _, _ = _expand(tp, None, keep_vectors)
    return TTr1Decomposition(tp.shape, order, terms, svd_count, nodes=nodes)


def decompose_pruned(
    t, eps: float, order: Optional[Sequence[int]] = None, *, keep_vectors: bool = False
) -> TTr1Decomposition:
    """Decomposition that skips subtrees whose removal fits an error budget ``eps``.

    Nodes at levels 1 .. d-2 (the ones that would need another SVD) are
    examined level by level. Each is charged ``e^2 = L * (p * s**(d-l-1))**2``
    where ``L`` is the number of leaves below it, ``p`` the product of its
    ancestors' singular values and ``s`` its own, but never less than its
    exact subtree energy ``(p * s)**2``. The cheapest nodes are dropped
    while the running total over the whole tree stays within ``eps**2``, so
    the kept terms reconstruct ``t`` to within ``eps``.
    """
    eps = float(eps)
    if not eps > 0:
        raise ArgumentError(f"eps must be positive, got {eps}")
    tp, order = _prepare(t, order)
    terms, svd_count, nodes, pruned, energy = _expand(tp, eps, keep_vectors)
    return TTr1Decomposition(tp.shape, order, terms, svd_count, eps, pruned, energy, nodes)


# -- using a decomposition -------------------------------------------------


def _check_rank(dec: TTr1Decomposition, R: Optional[int]) -> int:
    if R is None:
        return len(dec.terms)
    R = int(R)
    if not 0 <= R <= len(dec.terms):
        raise ArgumentError(f"R={R} out of range 0..{len(dec.terms)}")
    return R


def reconstruct(dec: TTr1Decomposition, R: Optional[int] = None) -> DenseTensor:
    """Sum of the first ``R`` terms (all by default), in the input's index order."""
    R = _check_rank(dec, R)
    total = np.zeros(dec.shape)
    for term in dec.terms[:R]:
        total += term.to_tensor().array
    return permute_indices(DenseTensor(total), inverse_permutation(dec.index_order))


def approximation_error(dec: TTr1Decomposition, R: int) -> float:
    """Frobenius error of the ``R``-term truncation, from the discarded weights alone."""
    R = _check_rank(dec, R)
    tail = dec.sigmas[R:]
    return float(np.sqrt(np.sum(tail**2) + dec.pruned_energy))


def truncate_to_tolerance(dec: TTr1Decomposition, eps: float) -> int:
    """Smallest ``R`` whose truncation error is at most ``eps``."""
    eps = float(eps)
    if not eps > 0:
        raise ArgumentError(f"eps must be positive, got {eps}")
    s2 = dec.sigmas**2
    # tails[R] = sum_{i >= R} s2[i]
    tails = np.concatenate([np.cumsum(s2[::-1])[::-1], [0.0]]) + dec.pruned_energy
    for R, tail in enumerate(tails):
        if np.sqrt(tail) <= eps:
            return R
    raise ArgumentError(
        f"pruned energy {np.sqrt(dec.pruned_energy):.3e} already exceeds eps={eps:.3e}"
    )


def approxi_rank_gap(dec: TTr1Decomposition, R: int) -> float:
    """``sigma_R / sigma_{R+1}`` (1-based); infinite when the denominator is zero."""
    R = int(R)
    if not 1 <= R < len(dec.terms):
        raise ArgumentError(f"R={R} out of range 1..{len(dec.terms) - 1}")
    num, den = dec.terms[R - 1].sigma_tilde, dec.terms[R].sigma_tilde
    if den == 0:
        return float("inf")
    return num / den


def default_rank_threshold(dec: TTr1Decomposition) -> float:
    """``max(n_1, n_2 ... n_d) * u * sigma_1`` with ``u`` the unit roundoff."""
    if not dec.terms:
        return 0.0
    n1 = dec.shape[0]
    rest = int(np.prod(dec.shape[1:]))
    return max(n1, rest) * UNIT_ROUNDOFF * dec.terms[0].sigma_tilde


def numerical_rank(dec: TTr1Decomposition, threshold: Optional[float] = None) -> int:
    """Count of ``sigma_tilde`` strictly above ``threshold``."""
    if threshold is None:
        threshold = default_rank_threshold(dec)
    return int(np.sum(dec.sigmas > threshold))


def select_branches(
    dec: TTr1Decomposition, paths: Iterable[Sequence[int]]
) -> TTr1Decomposition:
    """Sub-decomposition keeping only the terms at the given 1-based branch paths."""
    wanted = [tuple(int(i) for i in p) for p in paths]
    by_path = {t.branch_path: t for t in dec.terms}
    missing = [p for p in wanted if p not in by_path]
    if missing:
        raise ArgumentError(f"no terms at branch paths {missing}")
    kept = sorted((by_path[p] for p in set(wanted)), key=lambda t: (-t.sigma_tilde, t.branch_path))
    dropped = [t for t in dec.terms if t.branch_path not in set(wanted)]
    energy = dec.pruned_energy + float(sum(t.sigma_tilde**2 for t in dropped))
    return replace(dec, terms=tuple(kept), pruned_energy=energy)


# -- JSON ------------------------------------------------------------------

FORMAT_TAG = "ttr1-decomposition"


def decomposition_to_dict(dec: TTr1Decomposition) -> dict:
    return {
        "format": FORMAT_TAG,
        "dims": list(dec.shape),
        "index_order": list(dec.index_order),
        "svd_count": dec.svd_count,
        "prune_tolerance": dec.prune_tolerance,
        "pruned_leaf_count": dec.pruned_leaf_count,
        "pruned_energy": dec.pruned_energy,
        "terms": [
            {
                "sigma_tilde": t.sigma_tilde,
                "branch_path": list(t.branch_path),
                "level_sigmas": list(t.level_sigmas),
                "mode_vectors": [v.tolist() for v in t.mode_vectors],
            }
            for t in dec.terms
        ],
    }


def decomposition_from_dict(obj) -> TTr1Decomposition:
    if not isinstance(obj, dict) or obj.get("format") != FORMAT_TAG:
        raise ArgumentError(f"not a decomposition file (expected \"format\": \"{FORMAT_TAG}\")")
    for key in ("dims", "index_order", "terms", "svd_count"):
        if key not in obj:
            raise ArgumentError(f"decomposition file is missing the '{key}' field")
    shape = check_shape(obj["dims"])
    order = check_permutation(obj["index_order"], len(shape))
    terms = []
    for i, raw in enumerate(obj["terms"], start=1):
        try:
            vecs = tuple(_frozen(v) for v in raw["mode_vectors"])
            term = SigmaTerm(
                float(raw["sigma_tilde"]),
                vecs,
                tuple(int(j) for j in raw["branch_path"]),
                tuple(float(s) for s in raw["level_sigmas"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ArgumentError(f"term {i} is malformed: {exc}") from exc
        if term.shape != shape:
            raise ArgumentError(f"term {i} has mode vector lengths {term.shape}, expected {shape}")
        terms.append(term)
    tol = obj.get("prune_tolerance")
    return TTr1Decomposition(
        shape,
        order,
        tuple(terms),
        int(obj["svd_count"]),
        None if tol is None else float(tol),
        int(obj.get("pruned_leaf_count", 0)),
        float(obj.get("pruned_energy", 0.0)),
    )


def dumps_decomposition(dec: TTr1Decomposition) -> str:
    return json.dumps(decomposition_to_dict(dec))


def loads_decomposition(text: str) -> TTr1Decomposition:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ArgumentError(f"could not parse decomposition JSON: {exc}") from exc
    return decomposition_from_dict(obj)
