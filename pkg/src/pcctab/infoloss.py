"""Likelihood-ratio information loss statistics.

G^2 here is the likelihood-ratio statistic in natural-log units: twice the
sum over observed cells of ``n_i * ln(n_i / e_i)``, i.e. 2n times the
Kullback-Leibler distance between observed proportions and a model.  All
logs are guarded so that 0 * ln(0) contributes zero, and degrees of freedom
are never reduced for empty rows or columns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import InputError
from .table import FIXED, NOMINAL, ORDINAL, Partition, SparseTable, apply_partition, group_weights, pair_slice

__all__ = [
    "PairLoss",
    "LossMatrix",
    "guarded_plogp",
    "g2_independence",
    "pair_loss",
    "loss_matrix",
    "partition_deviance",
]


def guarded_plogp(p: float) -> float:
    """``p * ln(p)`` with the 0 * ln(0) = 0 guard."""
    if p < 0:
        raise InputError(f"p must be nonnegative, got {p}")
    if p == 0:
        return 0.0
    return p * math.log(p)


def _sum_nlogn(values: np.ndarray) -> float:
    # values are strictly positive by table construction
    if values.size == 0:
        return 0.0
    return float(np.dot(values, np.log(values)))


def g2_independence(table: SparseTable) -> tuple[float, int]:
    """Independence deviance of a two-way R x C table.

    Returns ``(g2, df)`` with ``df = (R-1)(C-1)`` taken from the full shape,
    with no adjustment for empty rows or columns.  An all-zero table is
    degenerate and returns ``(0.0, df)``.
    """
    if table.ndim != 2:
        raise InputError(f"need a 2-way table, got {table.ndim} dims (flatten first)")
    R, C = table.shape
    df = (R - 1) * (C - 1)
    if table.total <= 0:
        return 0.0, df
    n = table.total
    rows = np.bincount(table.coords[:, 0], weights=table.counts, minlength=R)
    cols = np.bincount(table.coords[:, 1], weights=table.counts, minlength=C)
    # 2 * sum n_ij ln(n_ij n / (R_i C_j)), expanded into entropy terms so
    # zero rows/columns drop out of the sums naturally
    g2 = 2.0 * (
        _sum_nlogn(table.counts)
        + n * math.log(n)
        - _sum_nlogn(rows[rows > 0])
        - _sum_nlogn(cols[cols > 0])
    )
    return max(g2, 0.0), df


@dataclass(frozen=True)
class PairLoss:
    """Information loss from aggregating categories ``u`` and ``v`` of one
    variable, with its degrees of freedom ``df`` and gradient ``g2 / df``."""

    dim: int
    u: int
    v: int
    g2: float
    df: int

    @property
    def quotient(self) -> float:
        if self.df == 0:
            return 0.0 if self.g2 == 0 else math.inf
        return self.g2 / self.df


def pair_loss(table: SparseTable, dim: int, u: int, v: int) -> PairLoss:
    """Loss from merging categories ``u`` and ``v`` on ``dim``: the
    independence deviance of the 2 x (everything else) subtable."""
    sub = pair_slice(table, dim, u, v)
    g2, df = g2_independence(sub)
    return PairLoss(dim=dim, u=u, v=v, g2=g2, df=df)


class _DimPairs:
    """Shared per-dimension machinery for evaluating many category pairs.

    Nonzero cells are grouped by their category on ``dim``; each pair
    evaluation then merges two short sorted runs instead of re-slicing the
    whole table.  Results are identical to :func:`pair_loss`.
    """

    def __init__(self, table: SparseTable, dim: int):
        self.dim = dim
        self.size = table.shape[dim]
        other = [k for k in range(table.ndim) if k != dim]
        self.df = int(np.prod([table.shape[k] for k in other], dtype=np.int64)) - 1 if other else 0
        cats = table.coords[:, dim]
        if other:
            flat = np.ravel_multi_index(
                tuple(table.coords[:, k] for k in other),
                tuple(table.shape[k] for k in other),
            )
        else:
            flat = np.zeros(table.nnz, dtype=np.int64)
        order = np.lexsort((flat, cats))
        self._cats = cats[order]
        self._flat = flat[order]
        self._vals = table.counts[order]
        self._starts = np.searchsorted(self._cats, np.arange(self.size + 1))
        self._row_tot = np.bincount(cats, weights=table.counts, minlength=self.size)
        self._row_nlogn = np.zeros(self.size)
        for c in range(self.size):
            s, e = self._starts[c], self._starts[c + 1]
            self._row_nlogn[c] = _sum_nlogn(self._vals[s:e])

    def _run(self, c: int) -> tuple[np.ndarray, np.ndarray]:
        s, e = self._starts[c], self._starts[c + 1]
        return self._flat[s:e], self._vals[s:e]

    def g2(self, u: int, v: int) -> float:
        ku, wu = self._run(u)
        kv, wv = self._run(v)
        ru, rv = self._row_tot[u], self._row_tot[v]
        n = ru + rv
        if n <= 0:
            return 0.0
        keys = np.concatenate([ku, kv])
        vals = np.concatenate([wu, wv])
        _, inv = np.unique(keys, return_inverse=True)
        colsums = np.bincount(inv, weights=vals)
        g2 = 2.0 * (
            self._row_nlogn[u]
            + self._row_nlogn[v]
            + n * math.log(n)
            - (ru * math.log(ru) if ru > 0 else 0.0)
            - (rv * math.log(rv) if rv > 0 else 0.0)
            - _sum_nlogn(colsums)
        )
        return max(g2, 0.0)

    def loss(self, u: int, v: int) -> PairLoss:
        return PairLoss(dim=self.dim, u=u, v=v, g2=self.g2(u, v), df=self.df)


@dataclass(frozen=True)
class LossMatrix:
    """All pairwise aggregation losses for one variable.

    ``entries`` holds one :class:`PairLoss` per ``u < v`` pair; in
    ``adjacent-only`` mode only ``v = u + 1`` pairs are present.
    """

    dim: int
    size: int
    mode: str
    entries: tuple[PairLoss, ...]

    def get(self, u: int, v: int) -> PairLoss:
        if u > v:
            u, v = v, u
        for e in self.entries:
            if (e.u, e.v) == (u, v):
                return e
        raise KeyError((u, v))

    def g2(self, u: int, v: int) -> float:
        return self.get(u, v).g2


def loss_matrix(table: SparseTable, dim: int, treatment: str = NOMINAL) -> LossMatrix:
    """Pairwise loss matrix for one variable on the current table.

    ``nominal`` evaluates all C(r, 2) pairs, ``ordinal`` only the r - 1
    adjacent pairs.  Fixed variables have no matrix.
    """
    if dim < 0 or dim >= table.ndim:
        raise InputError(f"dim {dim} out of range")
    if treatment == FIXED:
        raise InputError("fixed variables have no loss matrix")
    if treatment not in (NOMINAL, ORDINAL):
        raise InputError(f"unknown treatment {treatment!r}")
    r = table.shape[dim]
    engine = _DimPairs(table, dim)
    if treatment == ORDINAL:
        pairs = [(u, u + 1) for u in range(r - 1)]
    else:
        pairs = list(combinations(range(r), 2))
    entries = tuple(engine.loss(u, v) for u, v in pairs)
    return LossMatrix(dim=dim, size=r, mode="adjacent-only" if treatment == ORDINAL else "all-pairs",
                      entries=entries)


def partition_deviance(table: SparseTable, partition: Partition) -> float:
    """Deviance of the expanded partition model against the table.

    The model is the collapsed table's probabilities expanded back to the
    original shape in proportion to the original one-way marginals; this is
    evaluated directly on the nonzero cells without materialising the
    expansion.
    """
    if partition.source_shape != table.shape:
        raise InputError(
            f"partition is for shape {partition.source_shape}, table is {table.shape}"
        )
    if table.total <= 0:
        return 0.0
    n = table.total
    collapsed = apply_partition(table, partition)
    dense_col = collapsed.todense()
    weights = group_weights(partition, table.one_way_marginals())
    # model probability of each nonzero original cell
    group_coords = tuple(
        np.asarray(partition.keys[k], dtype=np.intp)[table.coords[:, k]]
        for k in range(table.ndim)
    )
    pi = dense_col[group_coords] / n
    for k, w in enumerate(weights):
        pi = pi * w[table.coords[:, k]]
    # observed cells always sit in groups with positive mass, so pi > 0 here
    dev = 2.0 * float(np.dot(table.counts, np.log(table.counts / (n * pi))))
    return max(dev, 0.0)
