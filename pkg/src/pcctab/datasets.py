"""Bundled example datasets.

Two small survey cross-tabulations ship with the package: a 5x5
schooling-by-age table from a West German social survey, and a 2x2x3x6
race/sex/opinion/age table on abortion opinions.  Both load with all
variables nominal; pass different treatments through the scheme if needed.
"""

from __future__ import annotations

from importlib import resources

from .io import load_table
from .table import CategoryScheme, SparseTable

__all__ = ["dataset_path", "wermuth_cox", "christensen_abortion"]


def dataset_path(name: str):
    """Filesystem path of a bundled CSV (``wermuth_cox`` or
    ``christensen_abortion``)."""
    ref = resources.files("pcctab.data").joinpath(f"{name}.csv")
    if not ref.is_file():
        raise FileNotFoundError(f"no bundled dataset {name!r}")
    return ref


def wermuth_cox() -> tuple[CategoryScheme, SparseTable]:
    """Schooling (5) x age group (5), n = 3673."""
    return load_table(dataset_path("wermuth_cox"))


def christensen_abortion() -> tuple[CategoryScheme, SparseTable]:
    """Race (2) x sex (2) x opinion on abortion (3) x age (6), n = 2385."""
    return load_table(dataset_path("christensen_abortion"))
