"""Hierarchical log-linear models: IPF fitting, backward selection by
information gradient, partition-model fits, and Pearson ratios.

A model is named by its maximal interaction terms (generators); the
hierarchical closure adds every subset.  Each non-empty closure term ``m``
contributes ``prod_{k in m} (r_k - 1)`` parameters, so the saturated model
has one parameter per cell (minus one).  Expected counts are computed by
cyclic iterative proportional scaling against the generator marginals.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .errors import DegeneracyError, InputError
from .pcc import adjusted_rsq
from .table import Partition, SparseTable, apply_partition, expand_model

__all__ = [
    "ModelSpec",
    "FitResult",
    "BackwardStep",
    "BackwardTrace",
    "model_df",
    "ipf_fit",
    "backward_select",
    "fit_hllpm",
    "independence_expected",
    "pearson_ratios",
]

IPF_TOL = 1e-8
IPF_MAX_ITER = 1000


def _canonical_terms(terms) -> tuple[tuple[int, ...], ...]:
    cleaned = {tuple(sorted(set(int(k) for k in t))) for t in terms}
    cleaned.discard(())
    maximal = [t for t in cleaned
               if not any(t != o and set(t) <= set(o) for o in cleaned)]
    return tuple(sorted(maximal))


@dataclass(frozen=True)
class ModelSpec:
    """A hierarchical model named by its maximal terms.

    Dominated terms are dropped and terms are stored sorted, so two specs
    describing the same model compare equal.  The empty generator tuple is
    the grand-mean-only model.
    """

    generators: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "generators", _canonical_terms(self.generators))

    @classmethod
    def saturated(cls, ndim: int) -> "ModelSpec":
        return cls((tuple(range(ndim)),))

    @classmethod
    def main_effects(cls, ndim: int) -> "ModelSpec":
        return cls(tuple((k,) for k in range(ndim)))

    def closure(self) -> tuple[tuple[int, ...], ...]:
        """All non-empty terms implied by the generators, sorted."""
        out: set[tuple[int, ...]] = set()
        for g in self.generators:
            for size in range(1, len(g) + 1):
                out.update(combinations(g, size))
        return tuple(sorted(out))

    def variables(self) -> tuple[int, ...]:
        seen: set[int] = set()
        for g in self.generators:
            seen.update(g)
        return tuple(sorted(seen))

    def remove(self, term: tuple[int, ...]) -> "ModelSpec":
        """Drop one maximal term, keeping the family hierarchical (the
        term's maximal proper subsets become generators where needed)."""
        term = tuple(sorted(term))
        if term not in self.generators:
            raise InputError(f"{term} is not a generator")
        rest = [g for g in self.generators if g != term]
        if len(term) > 1:
            rest.extend(combinations(term, len(term) - 1))
        return ModelSpec(tuple(rest))

    def brackets(self, names: Sequence[str]) -> str:
        """Render as bracket notation, e.g. ``[oa][ro][s]``."""
        letters = _letter_map(names)
        parts = []
        for g in self.generators:
            if letters is not None:
                parts.append("".join(letters[k] for k in g))
            else:
                parts.append(",".join(names[k] for k in g))
        return "".join(f"[{p}]" for p in parts) if parts else "[]"

    @classmethod
    def from_brackets(cls, text: str, names: Sequence[str]) -> "ModelSpec":
        """Parse bracket notation; tokens may be variable names or their
        unique first letters, e.g. ``[oa][ro][s]`` or ``[opinion,age]``."""
        text = text.strip()
        if not text:
            return cls(())
        if text.count("[") != text.count("]") or not text.startswith("["):
            raise InputError(f"malformed generator list {text!r}")
        letters = _letter_map(names)
        by_name = {n.lower(): k for k, n in enumerate(names)}
        terms = []
        for chunk in text.strip("[]").split("]["):
            chunk = chunk.strip()
            if not chunk:
                continue
            tokens = [t for t in chunk.replace(",", " ").split() if t]
            indices: list[int] = []
            for tok in tokens:
                low = tok.lower()
                if low in by_name:
                    indices.append(by_name[low])
                elif letters is not None and all(c in _invert(letters) for c in low):
                    indices.extend(_invert(letters)[c] for c in low)
                else:
                    raise InputError(f"unknown variable token {tok!r} in {text!r}")
            terms.append(tuple(indices))
        return cls(tuple(terms))


def _letter_map(names: Sequence[str]) -> dict[int, str] | None:
    letters = {k: n[0].lower() for k, n in enumerate(names)}
    if len(set(letters.values())) != len(names):
        return None
    return letters


def _invert(letters: dict[int, str]) -> dict[str, int]:
    return {v: k for k, v in letters.items()}


def model_df(spec: ModelSpec, shape: Sequence[int]) -> int:
    """Parameter count: sum over all non-empty closure terms of
    ``prod (r_k - 1)``."""
    shape = tuple(int(s) for s in shape)
    total = 0
    for term in spec.closure():
        if any(k < 0 or k >= len(shape) for k in term):
            raise InputError(f"term {term} out of range for shape {shape}")
        d = 1
        for k in term:
            d *= shape[k] - 1
        total += d
    return total


@dataclass(frozen=True)
class FitResult:
    """A fitted model: expected counts, deviance against the saturated
    model, and the model/residual df split over the fit's reference shape."""

    spec: ModelSpec
    shape: tuple[int, ...]
    fitted: SparseTable
    dev: float
    dfmod: int
    dfres: int
    iterations: int
    converged: bool


def _deviance(observed: SparseTable, fitted: np.ndarray) -> float:
    if observed.nnz == 0:
        return 0.0
    e = fitted[tuple(observed.coords.T)]
    if np.any(e <= 0):
        raise DegeneracyError("fitted value is zero on an observed cell")
    dev = 2.0 * float(np.dot(observed.counts, np.log(observed.counts / e)))
    return max(dev, 0.0)


def ipf_fit(table: SparseTable, spec: ModelSpec, tol: float = IPF_TOL,
            max_iter: int = IPF_MAX_ITER) -> FitResult:
    """Fit a hierarchical model by iterative proportional scaling.

    Starting from the uniform table, each cycle rescales the fit to match
    every generator marginal; the fit converges when the largest absolute
    marginal discrepancy (in count units) is at most ``tol``.  A
    non-converged fit is still returned, flagged.
    """
    if table.total <= 0:
        raise InputError("cannot fit an empty table")
    if tol <= 0:
        raise InputError("tol must be positive")
    shape = table.shape
    K = table.ndim
    obs = table.todense()
    n = table.total
    fitted = np.full(shape, n / obs.size)
    iterations = 0
    converged = True
    if spec.generators:
        targets = []
        for g in spec.generators:
            axes = tuple(k for k in range(K) if k not in g)
            targets.append((axes, obs.sum(axis=axes, keepdims=True)))
        converged = False
        for cycle in range(1, max_iter + 1):
            worst = 0.0
            for axes, target in targets:
                cur = fitted.sum(axis=axes, keepdims=True)
                worst = max(worst, float(np.max(np.abs(cur - target))))
                ratio = np.divide(target, cur, out=np.zeros_like(target), where=cur > 0)
                fitted = fitted * ratio
            iterations = cycle
            if worst <= tol:
                converged = True
                break
    dev = _deviance(table, fitted)
    dfmod = model_df(spec, shape)
    dfres = int(np.prod(shape, dtype=np.int64)) - 1 - dfmod
    return FitResult(spec=spec, shape=shape, fitted=SparseTable.from_dense(fitted),
                     dev=dev, dfmod=dfmod, dfres=dfres,
                     iterations=iterations, converged=converged)


@dataclass(frozen=True)
class BackwardStep:
    r: int
    spec: ModelSpec
    dev: float
    dfmod: int
    dfres: int
    dev_term: float
    df_term: int
    adj_rsq: float
    converged: bool


@dataclass(frozen=True)
class BackwardTrace:
    """Rows of a backward elimination run, saturated model first."""

    steps: tuple[BackwardStep, ...]
    shape: tuple[int, ...]

    def curve(self) -> list[tuple[int, float]]:
        return [(s.dfmod, s.dev) for s in self.steps]

    def find(self, spec: ModelSpec) -> BackwardStep:
        for s in self.steps:
            if s.spec == spec:
                return s
        raise KeyError(spec.generators)


def _term_df(term: tuple[int, ...], shape: Sequence[int]) -> int:
    d = 1
    for k in term:
        d *= shape[k] - 1
    return d


def backward_select(table: SparseTable, start: ModelSpec | None = None,
                    tol: float = IPF_TOL, max_iter: int = IPF_MAX_ITER) -> BackwardTrace:
    """Backward elimination driven by information gradients.

    From the starting model (saturated by default), each step refits the
    model without each removable maximal term (size >= 2) and removes the
    one with the smallest deviance increase per parameter; zero-parameter
    terms are free and removed first.  Main effects are never removed, so
    the trace ends at the mutual-independence model.  Ties go to the
    lexicographically smallest term.
    """
    spec = ModelSpec.saturated(table.ndim) if start is None else start
    fit = ipf_fit(table, spec, tol=tol, max_iter=max_iter)
    rows = [dict(spec=spec, dev=fit.dev, dfmod=fit.dfmod, dfres=fit.dfres,
                 dev_term=0.0, df_term=0, converged=fit.converged)]
    while True:
        removable = [g for g in spec.generators if len(g) >= 2]
        if not removable:
            break
        best = None
        for term in removable:
            cand_spec = spec.remove(term)
            cand_fit = ipf_fit(table, cand_spec, tol=tol, max_iter=max_iter)
            ddev = cand_fit.dev - rows[-1]["dev"]
            ddf = _term_df(term, table.shape)
            quotient = 0.0 if ddf == 0 else ddev / ddf
            if best is None or (quotient < best[0]
                                and abs(quotient - best[0]) > 1e-12 * max(1.0, abs(quotient), abs(best[0]))):
                best = (quotient, term, cand_spec, cand_fit, ddev, ddf)
        _, term, spec, fit, ddev, ddf = best
        rows.append(dict(spec=spec, dev=fit.dev, dfmod=fit.dfmod, dfres=fit.dfres,
                         dev_term=ddev, df_term=ddf, converged=fit.converged))
    dev_last = rows[-1]["dev"]
    dfres_last = rows[-1]["dfres"]
    steps = tuple(
        BackwardStep(r=i, spec=row["spec"], dev=row["dev"], dfmod=row["dfmod"],
                     dfres=row["dfres"], dev_term=row["dev_term"], df_term=row["df_term"],
                     adj_rsq=adjusted_rsq(row["dev"], row["dfres"], dev_last, dfres_last),
                     converged=row["converged"])
        for i, row in enumerate(rows)
    )
    return BackwardTrace(steps=steps, shape=table.shape)


def fit_hllpm(original: SparseTable, partition: Partition, spec: ModelSpec,
              tol: float = IPF_TOL, max_iter: int = IPF_MAX_ITER) -> FitResult:
    """Fit a model on the collapsed table and score it against the original.

    The model is fitted on ``apply_partition(original, partition)``, its
    probabilities expanded back to the original shape in proportion to the
    original one-way marginals, and the deviance taken against the original
    table.  The parameter count is the model's on the collapsed shape;
    expansion adds none.
    """
    collapsed = apply_partition(original, partition)
    inner = ipf_fit(collapsed, spec, tol=tol, max_iter=max_iter)
    n = original.total
    probs = SparseTable(inner.fitted.shape, inner.fitted.coords, inner.fitted.counts / n)
    expansion = expand_model(probs, partition, original.one_way_marginals())
    fitted_dense = expansion.todense() * n
    dev = _deviance(original, fitted_dense)
    dfmod = model_df(spec, collapsed.shape)
    dfres = int(np.prod(original.shape, dtype=np.int64)) - 1 - dfmod
    return FitResult(spec=spec, shape=original.shape,
                     fitted=SparseTable.from_dense(fitted_dense), dev=dev,
                     dfmod=dfmod, dfres=dfres, iterations=inner.iterations,
                     converged=inner.converged)


def independence_expected(table: SparseTable) -> np.ndarray:
    """Dense expected counts under mutual independence of all variables."""
    if table.total <= 0:
        return np.zeros(table.shape)
    n = table.total
    expected = np.full(table.shape, n)
    for k, m in enumerate(table.one_way_marginals()):
        sh = [1] * table.ndim
        sh[k] = table.shape[k]
        expected = expected * (m / n).reshape(sh)
    return expected


def pearson_ratios(observed: SparseTable, reference=None) -> np.ndarray:
    """Cell-wise ratio of observed to expected counts.

    ``reference`` may be a :class:`FitResult`, a table/array of expected
    counts, or None for the mutual-independence model of ``observed``.
    Cells where both observed and expected are zero report 1; a positive
    observed count over a zero expectation raises
    :class:`DegeneracyError`.
    """
    if reference is None:
        expected = independence_expected(observed)
    elif isinstance(reference, FitResult):
        expected = reference.fitted.todense()
    elif isinstance(reference, SparseTable):
        expected = reference.todense()
    else:
        expected = np.asarray(reference, dtype=np.float64)
    if expected.shape != observed.shape:
        raise InputError(
            f"reference shape {expected.shape} does not match observed {observed.shape}"
        )
    obs = observed.todense()
    zero_e = expected == 0
    if np.any(obs[zero_e] > 0):
        raise DegeneracyError("positive observed count over zero expected count")
    out = np.ones_like(obs)
    np.divide(obs, expected, out=out, where=~zero_e)
    return out
