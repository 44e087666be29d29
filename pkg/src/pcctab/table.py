"""Sparse multi-way contingency tables, category schemes, and partitions.

A table over K categorical variables is stored as coordinate/count pairs
plus a shape vector; zero cells are never stored and cells are kept in
lexicographic coordinate order, so every reduction over cells is
deterministic.  Tables and partitions are immutable values: all operations
return new objects and are safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError

NOMINAL = "nominal"
ORDINAL = "ordinal"
FIXED = "fixed"
TREATMENTS = (NOMINAL, ORDINAL, FIXED)


@dataclass(frozen=True)
class VariableDef:
    """One categorical variable: a name, ordered category labels, and how the
    collapsing engine may treat it (``nominal``, ``ordinal`` or ``fixed``).

    For an ordinal variable the stored label order is the ordinal order.
    """

    name: str
    categories: tuple[str, ...]
    treatment: str = NOMINAL

    def __post_init__(self):
        object.__setattr__(self, "categories", tuple(self.categories))
        if not self.name:
            raise InputError("variable name must be non-empty")
        if len(self.categories) < 1:
            raise InputError(f"variable {self.name!r} must have at least one category")
        if len(set(self.categories)) != len(self.categories):
            raise InputError(f"variable {self.name!r} has duplicate category labels")
        if self.treatment not in TREATMENTS:
            raise InputError(
                f"variable {self.name!r}: treatment must be one of {TREATMENTS}, "
                f"got {self.treatment!r}"
            )


@dataclass(frozen=True)
class CategoryScheme:
    """An ordered collection of :class:`VariableDef` describing a table's axes."""

    variables: tuple[VariableDef, ...]

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        if not self.variables:
            raise InputError("a scheme needs at least one variable")
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise InputError(f"duplicate variable names: {names}")

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(v.categories) for v in self.variables)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def treatments(self) -> tuple[str, ...]:
        return tuple(v.treatment for v in self.variables)


class SparseTable:
    """Immutable sparse array of nonnegative real counts over a K-way grid.

    ``coords`` is an ``(nnz, K)`` integer array in lexicographic order and
    ``counts`` the matching positive values.  Duplicate coordinates passed to
    the constructor are summed; zero cells are dropped.  ``total`` is the sum
    of all stored counts (``n``).
    """

    __slots__ = ("shape", "coords", "counts", "total")

    def __init__(self, shape: Sequence[int], coords=None, counts=None):
        shape = tuple(int(s) for s in shape)
        if len(shape) == 0:
            raise InputError("table must have at least one dimension")
        if any(s < 0 for s in shape):
            raise InputError(f"invalid shape {shape}")
        K = len(shape)
        coords = np.zeros((0, K), dtype=np.intp) if coords is None else np.asarray(coords, dtype=np.intp)
        counts = np.zeros(0) if counts is None else np.asarray(counts, dtype=np.float64)
        if coords.ndim == 1 and K == 1:
            coords = coords.reshape(-1, 1)
        if coords.ndim != 2 or coords.shape[1] != K:
            raise InputError(f"coords must be (nnz, {K}), got {coords.shape}")
        counts = counts.ravel()
        if counts.shape[0] != coords.shape[0]:
            raise InputError("coords and counts length mismatch")
        if counts.size:
            if np.min(counts) < 0:
                raise InputError("negative count")
            if any(s == 0 for s in shape):
                raise InputError(f"cannot store cells in empty shape {shape}")
            lo = coords.min(axis=0)
            hi = coords.max(axis=0)
            if np.any(lo < 0) or np.any(hi >= np.asarray(shape)):
                raise InputError(f"coordinate out of bounds for shape {shape}")
            flat = np.ravel_multi_index(tuple(coords.T), shape)
            order = np.argsort(flat, kind="stable")
            flat = flat[order]
            vals = counts[order]
            uniq, starts = np.unique(flat, return_index=True)
            merged = np.add.reduceat(vals, starts)
            keep = merged > 0
            coords = np.stack(np.unravel_index(uniq[keep], shape), axis=1).astype(np.intp)
            counts = merged[keep]
        else:
            coords = np.zeros((0, K), dtype=np.intp)
            counts = np.zeros(0)
        coords.setflags(write=False)
        counts.setflags(write=False)
        self.shape = shape
        self.coords = coords
        self.counts = counts
        self.total = float(counts.sum())

    def __setattr__(self, name, value):
        if hasattr(self, "total"):
            raise AttributeError("SparseTable is immutable")
        super().__setattr__(name, value)

    @classmethod
    def from_dense(cls, array) -> "SparseTable":
        arr = np.asarray(array, dtype=np.float64)
        if arr.ndim == 0:
            raise InputError("dense array must have at least one dimension")
        idx = np.nonzero(arr)
        return cls(arr.shape, np.stack(idx, axis=1), arr[idx])

    @property
    def ndim(self) -> int:
        return len(self.shape)

    @property
    def nnz(self) -> int:
        return self.coords.shape[0]

    def todense(self) -> np.ndarray:
        out = np.zeros(self.shape)
        if self.nnz:
            out[tuple(self.coords.T)] = self.counts
        return out

    def one_way_marginals(self) -> list[np.ndarray]:
        """Per-variable one-way count vectors, each of length shape[k]."""
        out = []
        for k, s in enumerate(self.shape):
            out.append(np.bincount(self.coords[:, k], weights=self.counts, minlength=s))
        return out

    def scale(self, c: float) -> "SparseTable":
        if c <= 0:
            raise InputError("scale factor must be positive")
        return SparseTable(self.shape, self.coords, self.counts * c)

    def __repr__(self):
        return f"SparseTable(shape={self.shape}, nnz={self.nnz}, total={self.total:g})"


def _canonical_key(key: Sequence[int]) -> tuple[int, ...]:
    # renumber group ids by order of first occurrence: 2 2 3 2 5 -> 0 0 1 0 2
    seen: dict[int, int] = {}
    return tuple(seen.setdefault(int(g), len(seen)) for g in key)


@dataclass(frozen=True)
class Partition:
    """Per-variable key vectors mapping original categories to merged groups.

    Group ids are canonical: renumbered 0..G-1 by order of first occurrence
    within each key vector.  Arbitrary ids passed in are renumbered.
    """

    keys: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        keys = tuple(_canonical_key(k) for k in self.keys)
        if not keys or any(len(k) == 0 for k in keys):
            raise InputError("each key vector must be non-empty")
        object.__setattr__(self, "keys", keys)

    @classmethod
    def identity(cls, shape: Sequence[int]) -> "Partition":
        return cls(tuple(tuple(range(int(s))) for s in shape))

    @property
    def group_counts(self) -> tuple[int, ...]:
        return tuple(max(k) + 1 for k in self.keys)

    @property
    def source_shape(self) -> tuple[int, ...]:
        return tuple(len(k) for k in self.keys)

    def groups(self, dim: int) -> list[list[int]]:
        """Member category indices of each group on one variable."""
        out: list[list[int]] = [[] for _ in range(self.group_counts[dim])]
        for cat, g in enumerate(self.keys[dim]):
            out[g].append(cat)
        return out

    def is_identity(self) -> bool:
        return all(k == tuple(range(len(k))) for k in self.keys)


def compose_partitions(first: Partition, second: Partition) -> Partition:
    """Partition equivalent to applying ``first`` and then ``second``."""
    if second.source_shape != first.group_counts:
        raise InputError(
            f"cannot compose: second partition expects shape {second.source_shape}, "
            f"first produces {first.group_counts}"
        )
    keys = []
    for k in range(len(first.keys)):
        keys.append(tuple(second.keys[k][g] for g in first.keys[k]))
    return Partition(tuple(keys))


def build_table(scheme: CategoryScheme, entries: Iterable[tuple[Sequence[int], float]]) -> SparseTable:
    """Build a table from (coordinates, count) pairs.

    Duplicate coordinates are summed and zero counts dropped.  Out-of-bounds
    coordinates and negative counts raise :class:`InputError`.
    """
    shape = scheme.shape
    coord_rows = []
    count_rows = []
    for coords, count in entries:
        coords = tuple(int(c) for c in coords)
        if len(coords) != len(shape):
            raise InputError(f"coordinate {coords} has wrong arity for shape {shape}")
        if any(c < 0 or c >= s for c, s in zip(coords, shape)):
            raise InputError(f"coordinate {coords} out of bounds for shape {shape}")
        if count < 0:
            raise InputError(f"negative count {count} at {coords}")
        coord_rows.append(coords)
        count_rows.append(float(count))
    if not coord_rows:
        return SparseTable(shape)
    return SparseTable(shape, np.asarray(coord_rows, dtype=np.intp), np.asarray(count_rows))


def marginal(table: SparseTable, dims: Sequence[int]) -> SparseTable:
    """Sum the table onto a subset of its variables (ascending index order)."""
    dims = sorted(set(int(d) for d in dims))
    if not dims:
        raise InputError("dims must be non-empty")
    if dims[0] < 0 or dims[-1] >= table.ndim:
        raise InputError(f"dims {dims} out of range for {table.ndim} variables")
    sub_shape = tuple(table.shape[d] for d in dims)
    return SparseTable(sub_shape, table.coords[:, dims], table.counts)


def apply_partition(table: SparseTable, partition: Partition) -> SparseTable:
    """Collapse the table by summing all categories within each group."""
    if partition.source_shape != table.shape:
        raise InputError(
            f"partition keys are for shape {partition.source_shape}, table is {table.shape}"
        )
    if table.nnz == 0:
        return SparseTable(partition.group_counts)
    cols = [np.asarray(partition.keys[k], dtype=np.intp)[table.coords[:, k]]
            for k in range(table.ndim)]
    return SparseTable(partition.group_counts, np.stack(cols, axis=1), table.counts)


def pair_slice(table: SparseTable, dim: int, u: int, v: int) -> SparseTable:
    """The 2 x (product of the other dims) subtable holding only categories
    ``u`` and ``v`` on ``dim``; ``dim`` becomes the first axis, the remaining
    axes are flattened in their original order."""
    if dim < 0 or dim >= table.ndim:
        raise InputError(f"dim {dim} out of range")
    r = table.shape[dim]
    if u == v:
        raise InputError("u and v must differ")
    if not (0 <= u < r and 0 <= v < r):
        raise InputError(f"categories ({u}, {v}) out of range for size {r}")
    other = [k for k in range(table.ndim) if k != dim]
    width = int(np.prod([table.shape[k] for k in other], dtype=np.int64)) if other else 1
    cats = table.coords[:, dim]
    mask = (cats == u) | (cats == v)
    rows = (cats[mask] == v).astype(np.intp)
    if other:
        cols = np.ravel_multi_index(
            tuple(table.coords[mask][:, k] for k in other),
            tuple(table.shape[k] for k in other),
        ).astype(np.intp)
    else:
        cols = np.zeros(rows.shape[0], dtype=np.intp)
    return SparseTable((2, width), np.stack([rows, cols], axis=1), table.counts[mask])


def group_weights(partition: Partition, original_marginals: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Per-variable weight of each original category within its group:
    ``m_k(c) / M_k(group of c)``, zero where the group has no mass."""
    if len(original_marginals) != len(partition.keys):
        raise InputError("one marginal vector per variable is required")
    weights = []
    for k, key in enumerate(partition.keys):
        m = np.asarray(original_marginals[k], dtype=np.float64)
        if m.shape[0] != len(key):
            raise InputError(
                f"marginal for variable {k} has length {m.shape[0]}, key has {len(key)}"
            )
        if m.size and np.min(m) < 0:
            raise InputError("marginals must be nonnegative")
        key_arr = np.asarray(key, dtype=np.intp)
        mass = np.bincount(key_arr, weights=m, minlength=max(key) + 1)
        denom = mass[key_arr]
        w = np.divide(m, denom, out=np.zeros_like(m), where=denom > 0)
        weights.append(w)
    return weights


def expand_model(collapsed: SparseTable, partition: Partition,
                 original_marginals: Sequence[np.ndarray]) -> SparseTable:
    """Expand collapsed cell probabilities back to the original table shape.

    Each collapsed cell's probability is spread over its member cells in
    proportion to the original one-way marginals, so every one-way marginal
    of the expansion matches the original distribution and re-collapsing
    recovers the input.  Groups with zero marginal mass receive probability
    zero on all member cells.
    """
    if collapsed.shape != partition.group_counts:
        raise InputError(
            f"collapsed shape {collapsed.shape} does not match partition group "
            f"counts {partition.group_counts}"
        )
    totals = [float(np.sum(m)) for m in original_marginals]
    if totals:
        ref = max(totals)
        if ref > 0 and any(abs(t - ref) > 1e-9 * ref for t in totals):
            raise InputError(f"marginal totals are inconsistent: {totals}")
    weights = group_weights(partition, original_marginals)
    dense = collapsed.todense()
    grids = np.ix_(*[np.asarray(k, dtype=np.intp) for k in partition.keys])
    expanded = dense[grids].astype(np.float64)
    for k, w in enumerate(weights):
        shape_k = [1] * len(partition.keys)
        shape_k[k] = w.shape[0]
        expanded = expanded * w.reshape(shape_k)
    return SparseTable.from_dense(expanded)
