"""Dense real tensors and the multilinear primitives built on them.

All linearizations are column-major: the first index varies fastest, so
``A[i1, ..., id]`` (1-based) sits at flat position
``sum_k (i_k - 1) * prod_{j<k} n_j``.  This matches ``order='F'`` in numpy
and is the layout used by every file format in the package.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import reduce
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ArgumentError

__all__ = [
    "DenseTensor",
    "RankOneTerm",
    "as_tensor",
    "check_shape",
    "check_permutation",
    "inverse_permutation",
    "reshape_to_matrix",
    "matrix_to_tensor",
    "vectorize",
    "inner_product",
    "frobenius_norm",
    "mode_product",
    "outer_product",
    "permute_indices",
    "from_function",
    "running_example",
    "inverse_sum_tensor",
    "gaussian_tensor",
    "tensor_to_dict",
    "tensor_from_dict",
    "dumps_tensor",
    "loads_tensor",
]


def check_shape(dims: Iterable[int]) -> tuple[int, ...]:
    """Validate a dimension list and return it as a tuple of ints."""
    try:
        shape = tuple(int(n) for n in dims)
    except (TypeError, ValueError) as exc:
        raise ArgumentError(f"dims must be a list of integers, got {dims!r}") from exc
    if len(shape) < 1:
        raise ArgumentError("a tensor needs at least one dimension")
    if any(n < 1 for n in shape):
        raise ArgumentError(f"every dimension must be >= 1, got {list(shape)}")
    return shape


class DenseTensor:
    """Immutable dense real d-way array.

    Parameters
    ----------
    array : array_like
        Values indexed ``array[i1-1, ..., id-1]``. A copy is taken and
        stored read-only as float64.

    Examples
    --------
    >>> t = DenseTensor.from_data([2, 2], [1, 2, 3, 4])
    >>> t.entry(1, 2)
    3.0
    >>> t.data.tolist()
    [1.0, 2.0, 3.0, 4.0]
    """

    __slots__ = ("_array",)

    def __init__(self, array):
        arr = np.array(array, dtype=np.float64, copy=True)
        if arr.ndim == 0:
            raise ArgumentError("a tensor needs at least one dimension")
        check_shape(arr.shape)
        arr.setflags(write=False)
        self._array = arr

    @classmethod
    def from_data(cls, dims: Sequence[int], data: Sequence[float]) -> "DenseTensor":
        """Build a tensor from its dimensions and column-major flat data."""
        shape = check_shape(dims)
        flat = np.asarray(data, dtype=np.float64).ravel()
        if flat.size != int(np.prod(shape)):
            raise ArgumentError(
                f"data length {flat.size} does not match prod(dims) = {int(np.prod(shape))}"
            )
        return cls(flat.reshape(shape, order="F"))

    @classmethod
    def zeros(cls, dims: Sequence[int]) -> "DenseTensor":
        return cls(np.zeros(check_shape(dims)))

    @property
    def array(self) -> np.ndarray:
        """Read-only ndarray view, 0-based indexing."""
        return self._array

    @property
    def shape(self) -> tuple[int, ...]:
        return self._array.shape

    @property
    def ndim(self) -> int:
        return self._array.ndim

    @property
    def size(self) -> int:
        return self._array.size

    @property
    def data(self) -> np.ndarray:
        """Flat column-major data (a fresh array)."""
        return self._array.ravel(order="F")

    def entry(self, *index: int) -> float:
        """Element at a 1-based multi-index."""
        if len(index) != self.ndim:
            raise ArgumentError(f"expected {self.ndim} indices, got {len(index)}")
        for i, n in zip(index, self.shape):
            if not 1 <= i <= n:
                raise ArgumentError(f"index {tuple(index)} out of range for shape {self.shape}")
        return float(self._array[tuple(i - 1 for i in index)])

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._array
        return self._array.astype(dtype)

    def __add__(self, other):
        return DenseTensor(self._array + as_tensor(other).array)

    def __sub__(self, other):
        return DenseTensor(self._array - as_tensor(other).array)

    def __mul__(self, scalar):
        return DenseTensor(self._array * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return DenseTensor(-self._array)

    def __eq__(self, other):
        if not isinstance(other, DenseTensor):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._array, other._array))

    def __hash__(self):
        return hash((self.shape, self._array.tobytes()))

    def __repr__(self):
        dims = " x ".join(str(n) for n in self.shape)
        return f"DenseTensor({dims})"


def as_tensor(t) -> DenseTensor:
    if isinstance(t, DenseTensor):
        return t
    return DenseTensor(t)


@dataclass(frozen=True)
class RankOneTerm:
    """``weight * v_1 o v_2 o ... o v_d`` with (nominally) unit mode vectors."""

    weight: float
    mode_vectors: tuple[np.ndarray, ...]

    def __post_init__(self):
        vecs = []
        for v in self.mode_vectors:
            a = np.array(v, dtype=np.float64).ravel()
            a.setflags(write=False)
            vecs.append(a)
        object.__setattr__(self, "mode_vectors", tuple(vecs))
        object.__setattr__(self, "weight", float(self.weight))

    @classmethod
    def from_vectors(cls, vectors: Sequence[np.ndarray], weight: float = 1.0) -> "RankOneTerm":
        """Normalize arbitrary vectors, moving their norms into the weight."""
        w = float(weight)
        unit = []
        for v in vectors:
            v = np.asarray(v, dtype=np.float64).ravel()
            nrm = float(np.linalg.norm(v))
            w *= nrm
            unit.append(v / nrm if nrm > 0 else v)
        return cls(w, tuple(unit))

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(v.size for v in self.mode_vectors)

    def to_tensor(self) -> DenseTensor:
        return outer_product(self.weight, self.mode_vectors)


def reshape_to_matrix(t, k: int) -> np.ndarray:
    """Group the first ``k`` indices into rows and the rest into columns.

    Both row and column indices are linearized column-major.
    """
    t = as_tensor(t)
    d = t.ndim
    if not 1 <= k < d:
        raise ArgumentError(f"split k={k} out of range for a {d}-way tensor")
    rows = int(np.prod(t.shape[:k]))
    return t.array.reshape((rows, -1), order="F")


def matrix_to_tensor(m: np.ndarray, dims: Sequence[int]) -> DenseTensor:
    """Inverse of :func:`reshape_to_matrix` for any split."""
    shape = check_shape(dims)
    m = np.asarray(m, dtype=np.float64)
    if m.size != int(np.prod(shape)):
        raise ArgumentError(f"matrix with {m.size} entries cannot fill shape {shape}")
    return DenseTensor(m.reshape(shape, order="F"))


def vectorize(t) -> np.ndarray:
    return as_tensor(t).data


def inner_product(a, b) -> float:
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape:
        raise ArgumentError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.dot(a.data, b.data))


def frobenius_norm(t) -> float:
    return float(np.linalg.norm(as_tensor(t).data))


def mode_product(t, m, k: int) -> DenseTensor:
    """k-mode product ``t x_k m`` with ``m`` of shape ``p x n_k`` (k is 1-based)."""
    t = as_tensor(t)
    m = np.atleast_2d(np.asarray(m, dtype=np.float64))
    if not 1 <= k <= t.ndim:
        raise ArgumentError(f"mode {k} out of range for a {t.ndim}-way tensor")
    if m.shape[1] != t.shape[k - 1]:
        raise ArgumentError(
            f"matrix has {m.shape[1]} columns but mode {k} has dimension {t.shape[k - 1]}"
        )
    out = np.tensordot(m, t.array, axes=([1], [k - 1]))
    return DenseTensor(np.moveaxis(out, 0, k - 1))


def outer_product(weight: float, vectors: Sequence) -> DenseTensor:
    """``weight * v_1 o ... o v_d``; entry ``weight * prod_k v_k[i_k]``."""
    vecs = [np.asarray(v, dtype=np.float64).ravel() for v in vectors]
    if not vecs:
        raise ArgumentError("outer product needs at least one vector")
    return DenseTensor(float(weight) * reduce(np.multiply.outer, vecs))


def check_permutation(order: Sequence[int], d: int) -> tuple[int, ...]:
    """Validate a 1-based permutation of ``(1, ..., d)``."""
    try:
        p = tuple(int(i) for i in order)
    except (TypeError, ValueError) as exc:
        raise ArgumentError(f"permutation must be a list of integers, got {order!r}") from exc
    if sorted(p) != list(range(1, d + 1)):
        raise ArgumentError(f"{list(p)} is not a permutation of 1..{d}")
    return p


def inverse_permutation(order: Sequence[int]) -> tuple[int, ...]:
    p = check_permutation(order, len(order))
    inv = [0] * len(p)
    for new_pos, old_axis in enumerate(p, start=1):
        inv[old_axis - 1] = new_pos
    return tuple(inv)


def permute_indices(t, order: Sequence[int]) -> DenseTensor:
    """Reorder indices so that new mode ``k`` is old mode ``order[k]`` (1-based).

    Permuting the 3 x 4 x 2 running example by ``(2, 3, 1)`` gives a
    4 x 2 x 3 tensor.
    """
    t = as_tensor(t)
    p = check_permutation(order, t.ndim)
    if p == tuple(range(1, t.ndim + 1)):
        return t
    return DenseTensor(np.transpose(t.array, [i - 1 for i in p]))


def from_function(dims: Sequence[int], f: Callable[..., float]) -> DenseTensor:
    """Fill a tensor by evaluating ``f(i1, ..., id)`` on 1-based indices."""
    shape = check_shape(dims)
    arr = np.empty(shape)
    for idx in itertools.product(*(range(n) for n in shape)):
        arr[idx] = f(*(i + 1 for i in idx))
    return DenseTensor(arr)


def running_example() -> DenseTensor:
    """The 3 x 4 x 2 tensor with entries 1..24 in column-major order."""
    return DenseTensor.from_data([3, 4, 2], np.arange(1, 25))


def inverse_sum_tensor(n: int, d: int = 3) -> DenseTensor:
    """Cubical tensor with entries ``1 / (i1 + ... + id)``."""
    return from_function([n] * d, lambda *idx: 1.0 / sum(idx))


def gaussian_tensor(dims: Sequence[int], seed: int, scale: float = 1.0) -> DenseTensor:
    rng = np.random.default_rng(seed)
    return DenseTensor(scale * rng.standard_normal(check_shape(dims)))


# -- JSON ------------------------------------------------------------------


def tensor_to_dict(t) -> dict:
    t = as_tensor(t)
    return {"dims": list(t.shape), "order": "column-major", "data": t.data.tolist()}


def tensor_from_dict(obj) -> DenseTensor:
    if not isinstance(obj, dict):
        raise ArgumentError("tensor file must hold a JSON object")
    for key in ("dims", "order", "data"):
        if key not in obj:
            raise ArgumentError(f"tensor file is missing the '{key}' field")
    if obj["order"] != "column-major":
        raise ArgumentError(f"field 'order' must be \"column-major\", got {obj['order']!r}")
    dims = obj["dims"]
    data = obj["data"]
    if not isinstance(dims, list):
        raise ArgumentError("field 'dims' must be a list")
    if not isinstance(data, list):
        raise ArgumentError("field 'data' must be a list")
    shape = check_shape(dims)
    if len(data) != int(np.prod(shape)):
        raise ArgumentError(
            f"field 'data' has {len(data)} values but prod(dims) = {int(np.prod(shape))}"
        )
    try:
        values = np.array(data, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ArgumentError("field 'data' must contain only numbers") from exc
    return DenseTensor.from_data(shape, values)


def dumps_tensor(t) -> str:
    return json.dumps(tensor_to_dict(t))


def loads_tensor(text: str) -> DenseTensor:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ArgumentError(f"could not parse tensor JSON: {exc}") from exc
    return tensor_from_dict(obj)
