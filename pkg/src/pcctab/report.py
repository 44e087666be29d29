"""Deterministic text renderers for traces, matrices, ratios, and curves.

All numbers use fixed decimal precision (deviances default to 2 places,
adjusted R^2 and ratios to 3), so a report is byte-identical across runs.
Composite cells such as key vectors and shapes are space-separated inside a
single tab-separated column.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .hllm import BackwardTrace, FitResult
from .infoloss import LossMatrix
from .pcc import PccTrace
from .table import CategoryScheme, Partition

__all__ = [
    "render_pcc_trace",
    "render_loss_matrix",
    "render_backward_trace",
    "render_fit",
    "render_ratios",
    "render_curve",
    "render_oracle",
]


def _dev(x: float, precision: int) -> str:
    return f"{x:.{precision}f}"


def _rsq(x: float, precision: int) -> str:
    return f"{x:.{precision + 1}f}"


def render_pcc_trace(trace: PccTrace, precision: int = 2) -> str:
    lines = ["\t".join(["r", "d", "key", "dim", "dev", "dfmod", "dfres",
                        "dev_term", "df_term", "adj_rsq"])]
    for s in trace.steps:
        lines.append("\t".join([
            str(s.r),
            "" if s.d is None else str(s.d),
            "" if s.key is None else " ".join(str(g) for g in s.key),
            " ".join(str(x) for x in s.shape),
            _dev(s.dev, precision),
            str(s.dfmod),
            str(s.dfres),
            _dev(s.dev_term, precision),
            str(s.df_term),
            _rsq(s.adj_rsq, precision),
        ]))
    return "\n".join(lines) + "\n"


def render_loss_matrix(matrix: LossMatrix, labels: Sequence[str], precision: int = 2) -> str:
    """Upper-triangular grid of pairwise losses; all pairs of one variable
    share the same df, noted on the comment line."""
    by_pair = {(e.u, e.v): e for e in matrix.entries}
    lines = [f"# mode={matrix.mode} df={matrix.entries[0].df if matrix.entries else 0}"]
    lines.append("\t".join([""] + [labels[v] for v in range(matrix.size)]))
    for u in range(matrix.size):
        row = [labels[u]]
        for v in range(matrix.size):
            e = by_pair.get((u, v))
            row.append("" if e is None else _dev(e.g2, precision))
        lines.append("\t".join(row))
    return "\n".join(lines) + "\n"


def render_backward_trace(trace: BackwardTrace, names: Sequence[str], precision: int = 2) -> str:
    lines = ["\t".join(["r", "generators", "dev", "dfmod", "dfres",
                        "dev_term", "df_term", "adj_rsq"])]
    for s in trace.steps:
        lines.append("\t".join([
            str(s.r),
            s.spec.brackets(names),
            _dev(s.dev, precision),
            str(s.dfmod),
            str(s.dfres),
            _dev(s.dev_term, precision),
            str(s.df_term),
            _rsq(s.adj_rsq, precision),
        ]))
    return "\n".join(lines) + "\n"


def render_fit(fit: FitResult, names: Sequence[str], precision: int = 2) -> str:
    header = "\t".join(["generators", "dev", "dfmod", "dfres", "iterations", "converged"])
    row = "\t".join([
        fit.spec.brackets(names),
        _dev(fit.dev, precision),
        str(fit.dfmod),
        str(fit.dfres),
        str(fit.iterations),
        str(fit.converged).lower(),
    ])
    return header + "\n" + row + "\n"


def render_ratios(ratios: np.ndarray, scheme: CategoryScheme, precision: int = 2) -> str:
    """Two-way tables render as a labelled grid; higher-way tables in long
    format with one labelled row per cell."""
    ratios = np.asarray(ratios)
    rp = precision + 1
    if ratios.ndim == 2:
        rows_v, cols_v = scheme.variables[0], scheme.variables[1]
        lines = ["\t".join([""] + list(cols_v.categories))]
        for i, label in enumerate(rows_v.categories):
            lines.append("\t".join([label] + [f"{ratios[i, j]:.{rp}f}"
                                              for j in range(ratios.shape[1])]))
        return "\n".join(lines) + "\n"
    lines = ["\t".join(list(scheme.names) + ["ratio"])]
    for idx in np.ndindex(*ratios.shape):
        labels = [scheme.variables[k].categories[c] for k, c in enumerate(idx)]
        lines.append("\t".join(labels + [f"{ratios[idx]:.{rp}f}"]))
    return "\n".join(lines) + "\n"


def render_curve(series: Sequence[tuple[str, Sequence[tuple[int, float]]]],
                 precision: int = 2) -> str:
    """CSV of deviance-versus-parameters series, header ``series,dfmod,dev``."""
    lines = ["series,dfmod,dev"]
    for name, points in series:
        for dfmod, dev in points:
            lines.append(f"{name},{dfmod},{dev:.{precision}f}")
    return "\n".join(lines) + "\n"


def render_oracle(results: dict[tuple[int, ...], tuple[Partition, float]],
                  precision: int = 2) -> str:
    """One row per collapsed shape: the minimal-loss partition and its loss,
    largest shapes first."""
    lines = ["\t".join(["shape", "loss", "keys"])]
    def cells(shape):
        p = 1
        for s in shape:
            p *= s
        return p
    for shape in sorted(results, key=lambda sh: (-cells(sh), tuple(-s for s in sh))):
        part, loss = results[shape]
        keys = "; ".join(" ".join(str(g) for g in key) for key in part.keys)
        lines.append("\t".join([
            " ".join(str(s) for s in shape),
            _dev(loss, precision),
            keys,
        ]))
    return "\n".join(lines) + "\n"
