"""Correspondence analysis of a burgers x attributes contingency table.

The table is centred on its independence model and scaled to standardized
residuals; a thin SVD of those residuals gives the principal axes. Row and
column principal coordinates are returned for a symmetric biplot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .errors import DegenerateTable, LengthMismatch, ZeroVariance
from .stats import pearson_r, weighted_pearson_r
from .survey import ContingencyTable

# singular values below this fraction of the largest are numerical noise
RANK_TOLERANCE = 1e-12
# a largest singular value below this is rounding noise of an independent table
NULL_INERTIA = 1e-12


def _frozen(a):
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class CaModel:
    rows: tuple[str, ...]
    columns: tuple[str, ...]
    counts: np.ndarray
    P: np.ndarray
    row_masses: np.ndarray
    col_masses: np.ndarray
    residuals: np.ndarray
    U: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray
    row_coordinates: np.ndarray
    column_coordinates: np.ndarray
    total_inertia: float

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.singular_values**2

    @property
    def inertia_shares(self) -> np.ndarray:
        if self.total_inertia == 0:
            return np.zeros_like(self.singular_values)
        return self.eigenvalues / self.total_inertia

    @property
    def n_dims(self) -> int:
        return len(self.singular_values)

    @property
    def D_r(self) -> np.ndarray:
        return np.diag(self.row_masses)

    @property
    def D_c(self) -> np.ndarray:
        return np.diag(self.col_masses)

    @property
    def row_profiles(self) -> np.ndarray:
        return self.P / self.row_masses[:, None]


def fit_ca(table, rows=None, columns=None) -> CaModel:
    """Fit correspondence analysis to a contingency table.

    ``table`` is a :class:`ContingencyTable` or a non-negative 2-D array with
    no all-zero rows or columns.
    """
    if isinstance(table, ContingencyTable):
        rows, columns, N = table.rows, table.columns, table.counts
    else:
        N = table
    N = np.asarray(N, dtype=float)
    if N.ndim != 2 or not np.all(np.isfinite(N)) or np.any(N < 0):
        raise DegenerateTable("contingency table must be a finite, non-negative 2-D array")
    n_rows, n_cols = N.shape
    rows = tuple(rows) if rows is not None else tuple(str(i) for i in range(n_rows))
    columns = tuple(columns) if columns is not None else tuple(str(j) for j in range(n_cols))
    if len(rows) != n_rows or len(columns) != n_cols:
        raise LengthMismatch("row/column labels do not match the table shape")
    if min(n_rows, n_cols) < 2:
        raise DegenerateTable(f"a {n_rows}x{n_cols} table has no dimensions after centring")
    if np.any(N.sum(axis=1) == 0) or np.any(N.sum(axis=0) == 0):
        raise DegenerateTable("table has all-zero rows or columns; prune them first")

    P = N / N.sum()
    r = P.sum(axis=1)
    c = P.sum(axis=0)
    expected = np.outer(r, c)
    Z = (P - expected) / np.sqrt(expected)

    U, s, Vt = np.linalg.svd(Z, full_matrices=False)
    k = min(n_rows, n_cols) - 1
    U, s, V = U[:, :k], s[:k], Vt[:k].T
    if s[0] <= NULL_INERTIA:
        raise DegenerateTable("rows and columns are independent; the centred table has rank 0")
    keep = s >= RANK_TOLERANCE * s[0]
    U, s, V = U[:, keep], s[keep], V[:, keep]

    F = U * s / np.sqrt(r)[:, None]
    G = V * s / np.sqrt(c)[:, None]
    # deterministic signs: largest-magnitude column coordinate is positive
    flip = np.sign(G[np.argmax(np.abs(G), axis=0), np.arange(G.shape[1])])
    flip[flip == 0] = 1.0
    U, V, F, G = U * flip, V * flip, F * flip, G * flip

    return CaModel(
        rows=rows,
        columns=columns,
        counts=_frozen(N),
        P=_frozen(P),
        row_masses=_frozen(r),
        col_masses=_frozen(c),
        residuals=_frozen(Z),
        U=_frozen(U),
        singular_values=_frozen(s),
        V=_frozen(V),
        row_coordinates=_frozen(F),
        column_coordinates=_frozen(G),
        total_inertia=float(np.sum(Z * Z)),
    )


def chi2_distance(model: CaModel, i: int, i2: int) -> float:
    """Chi-square distance between the profiles of rows ``i`` and ``i2``."""
    n = len(model.rows)
    for idx in (i, i2):
        if not -n <= idx < n:
            raise IndexError(f"row index {idx} out of range for {n} rows")
    profiles = model.row_profiles
    diff = profiles[i] - profiles[i2]
    return math.sqrt(float(np.sum(diff * diff / model.col_masses)))


@dataclass(frozen=True, eq=False)
class SupplementaryProjection:
    names: tuple[str, ...]
    loadings: np.ndarray  # variables x dimensions
    weighted: bool = True

    def __getitem__(self, name) -> np.ndarray:
        return self.loadings[self.names.index(name)]


def project_supplementary(
    model: CaModel, variables: Mapping[str, object], *, weighted: bool = True
) -> SupplementaryProjection:
    """Correlate external per-row variables with each principal dimension.

    With ``weighted=True`` (default) correlations use the row masses as
    weights; the principal axes are orthogonal in that metric, so loadings
    behave as coordinates in a unit correlation circle. ``weighted=False``
    gives the ordinary Pearson coefficient.
    """
    F = model.row_coordinates
    names, loadings = [], []
    for name, values in variables.items():
        values = np.asarray(values, dtype=float).ravel()
        if values.size != len(model.rows):
            raise LengthMismatch(f"{name}: {values.size} values for {len(model.rows)} rows")
        if np.ptp(values) == 0:
            raise ZeroVariance(f"supplementary variable {name!r} is constant")
        row = []
        for k in range(model.n_dims):
            if np.ptp(F[:, k]) == 0:
                row.append(math.nan)
            elif weighted:
                row.append(weighted_pearson_r(values, F[:, k], model.row_masses))
            else:
                row.append(pearson_r(values, F[:, k]))
        names.append(str(name))
        loadings.append(row)
    return SupplementaryProjection(tuple(names), np.array(loadings).reshape(len(names), model.n_dims), weighted)


class CorrespondenceAnalysis(TransformerMixin, BaseEstimator):
    """Scikit-learn style wrapper around :func:`fit_ca`.

    ``fit`` accepts an array, a DataFrame (labels taken from its index and
    columns) or a :class:`ContingencyTable`. ``transform`` maps (possibly
    supplementary) rows of counts to row principal coordinates.
    """

    def __init__(self, n_components=2):
        self.n_components = n_components

    def fit(self, X, y=None):
        if isinstance(X, ContingencyTable):
            rows, cols, counts = X.rows, X.columns, X.counts
        else:
            rows = getattr(X, "index", None)
            cols = getattr(X, "columns", None)
            counts = check_array(X, ensure_min_samples=2, ensure_min_features=2)
            rows = None if rows is None else [str(v) for v in rows]
            cols = None if cols is None else [str(v) for v in cols]
        self.model_ = fit_ca(counts, rows, cols)
        k = min(self.n_components, self.model_.n_dims)
        self.n_components_ = k
        self.eigenvalues_ = self.model_.eigenvalues[:k]
        self.explained_inertia_ = self.model_.inertia_shares[:k]
        self.total_inertia_ = self.model_.total_inertia
        self.row_coordinates_ = self.model_.row_coordinates[:, :k]
        self.column_coordinates_ = self.model_.column_coordinates[:, :k]
        self.n_features_in_ = counts.shape[1] if hasattr(counts, "shape") else len(cols)
        return self

    def transform(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X.counts if isinstance(X, ContingencyTable) else X)
        if X.shape[1] != self.n_features_in_:
            raise LengthMismatch(f"expected {self.n_features_in_} columns, got {X.shape[1]}")
        profiles = X / X.sum(axis=1, keepdims=True)
        m = self.model_
        return profiles @ (m.V[:, : self.n_components_] / np.sqrt(m.col_masses)[:, None])

    def supplementary(self, variables, weighted=True):
        check_is_fitted(self, "model_")
        return project_supplementary(self.model_, variables, weighted=weighted)
