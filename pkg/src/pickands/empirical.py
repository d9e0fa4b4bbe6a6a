"""Rank-based pseudo-observations and the empirical copula.

Ranks are divided by n+1 so pseudo-observations stay strictly inside the
unit cube.  Ties are a hard error: the estimators downstream assume
continuous margins, and silently breaking ties would corrupt their
guarantees.  Callers that must handle ties should jitter the data first.
"""

import csv

import numpy as np


class TiesPresent(ValueError):
    """Raised when a data column contains tied values."""

    def __init__(self, column: int):
        self.column = column
        super().__init__(f"ties detected in column {column}")


def as_data_matrix(x) -> np.ndarray:
    """Validate a raw observation matrix (n rows, p >= 2 columns)."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError("data must be a 2-d matrix")
    n, p = x.shape
    if n < 1 or p < 2:
        raise ValueError("data needs n >= 1 rows and p >= 2 columns")
    if not np.all(np.isfinite(x)):
        raise ValueError("data contains non-finite values")
    return x


def find_tied_columns(x) -> list[int]:
    x = as_data_matrix(x)
    tied = []
    for j in range(x.shape[1]):
        col = np.sort(x[:, j], kind="stable")
        if np.any(col[1:] == col[:-1]):
            tied.append(j)
    return tied


def pseudo_observations(x) -> np.ndarray:
    """Column ranks divided by n+1.

    Invariant under strictly increasing transformations of each column.
    Raises TiesPresent (with the offending column) when a column has
    duplicate values.
    """
    x = as_data_matrix(x)
    tied = find_tied_columns(x)
    if tied:
        raise TiesPresent(tied[0])
    n = x.shape[0]
    order = np.argsort(x, axis=0, kind="stable")
    ranks = np.empty_like(order)
    rows = np.arange(1, n + 1)[:, None]
    np.put_along_axis(ranks, order, np.broadcast_to(rows, x.shape), axis=0)
    return ranks / (n + 1.0)


def empirical_copula(u_hat, u) -> float:
    """Empirical copula of a pseudo-sample at one point u."""
    return float(empirical_copula_batch(u_hat, np.asarray(u, dtype=float)[None, :])[0])


def empirical_copula_batch(u_hat, points) -> np.ndarray:
    """Empirical copula evaluated at each row of ``points``."""
    u_hat = np.asarray(u_hat, dtype=float)
    points = np.asarray(points, dtype=float)
    n, p = u_hat.shape
    if points.ndim != 2 or points.shape[1] != p:
        raise ValueError(f"evaluation points must have {p} columns")
    out = np.empty(points.shape[0])
    chunk = max(1, 2_000_000 // max(n, 1))
    for s in range(0, points.shape[0], chunk):
        block = points[s : s + chunk]
        inside = np.all(u_hat[:, None, :] <= block[None, :, :], axis=2)
        out[s : s + chunk] = inside.mean(axis=0)
    return out


def empirical_copula_df_variant(x, u) -> float:
    """Empirical copula built from marginal quantile inversion.

    Plugs the generalized inverses of the n+1-scaled marginal empirical
    distribution functions into the joint empirical distribution function.
    Differs from the rank version by at most 2p/n in the sup norm when
    there are no ties.
    """
    x = as_data_matrix(x)
    tied = find_tied_columns(x)
    if tied:
        raise TiesPresent(tied[0])
    u = np.asarray(u, dtype=float)
    n, p = x.shape
    if u.shape != (p,):
        raise ValueError(f"expected a vector of length {p}")
    # rank thresholds: F_{n,j} jumps to i/(n+1) at the i-th order statistic
    k = np.ceil(u * (n + 1.0) - 1e-9).astype(np.int64)
    if np.any(k <= 0):
        return 0.0
    ranks = pseudo_observations(x) * (n + 1.0)
    counted = np.all(ranks <= np.minimum(k, n + 1)[None, :] + 1e-9, axis=1)
    return float(counted.mean())


def read_data_csv(path) -> np.ndarray:
    """Load a data matrix from CSV, tolerating one optional header row."""
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise ValueError(f"{path} is empty")
    start = 0
    try:
        [float(x) for x in rows[0]]
    except ValueError:
        start = 1
    data = np.array([[float(x) for x in row] for row in rows[start:]])
    return as_data_matrix(data)


def write_data_csv(x, path) -> None:
    x = as_data_matrix(x)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in x:
            writer.writerow([repr(float(v)) for v in row])
