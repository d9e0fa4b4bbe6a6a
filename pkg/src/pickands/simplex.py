"""Geometry of the unit simplex: atom grids, partition cells, quadrature.

The simplex of dimension p is identified with its first p-1 coordinates,
so integrals are taken with respect to (p-1)-dimensional Lebesgue measure
on {w in [0,1]^{p-1} : sum(w) <= 1}, whose total volume is 1/(p-1)!.
"""

import csv
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

#: absolute tolerance on the coordinate sum of a simplex point
SUM_TOL = 1e-12

#: snap guard when locating the cell of a point: coordinates within this
#: distance below a grid line are treated as lying on it
CELL_SNAP = 1e-9


def as_simplex_point(w, p: int | None = None) -> np.ndarray:
    """Validate and renormalize a barycentric coordinate vector.

    Coordinates must be nonnegative (values above -1e-15 are clamped to
    zero) and sum to one within ``SUM_TOL``; the returned copy is rescaled
    to sum to one exactly up to rounding.
    """
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.size < 2:
        raise ValueError("simplex point must be a 1-d vector of length >= 2")
    if p is not None and w.size != p:
        raise ValueError(f"expected dimension {p}, got {w.size}")
    if np.any(w < -1e-15):
        raise ValueError("simplex point has negative coordinates")
    w = np.maximum(w, 0.0)
    total = float(w.sum())
    if abs(total - 1.0) > SUM_TOL:
        raise ValueError(f"coordinates sum to {total!r}, not 1 within {SUM_TOL}")
    return w / total


@dataclass(frozen=True)
class AtomGrid:
    """All points of the simplex whose coordinates are multiples of 1/m.

    Points are ordered lexicographically by (k_1, ..., k_{p-1}) with the
    first coordinate decreasing, so the vertex e_1 comes first and e_p
    last.  ``k`` holds the integer numerators, ``points`` the coordinates.
    """

    p: int
    m: int
    k: np.ndarray
    points: np.ndarray

    def __len__(self) -> int:
        return self.points.shape[0]

    def vertex_indices(self) -> np.ndarray:
        """Row indices of the p vertices e_1, ..., e_p."""
        idx = np.flatnonzero((self.k == self.m).any(axis=1))
        order = np.argmax(self.k[idx] == self.m, axis=1)
        return idx[np.argsort(order)]

    def index_of(self, kvec) -> int:
        kvec = np.asarray(kvec, dtype=np.int64)
        hits = np.flatnonzero((self.k == kvec).all(axis=1))
        if hits.size != 1:
            raise KeyError(f"{kvec} is not a grid atom")
        return int(hits[0])


def _compositions_desc(total: int, parts: int):
    """Compositions of ``total`` into ``parts`` nonnegative integers, with
    (k_1, ..., k_{parts-1}) in decreasing lexicographic order."""
    if parts == 1:
        yield (total,)
        return
    for k in range(total, -1, -1):
        for rest in _compositions_desc(total - k, parts - 1):
            yield (k,) + rest


def enumerate_grid(p: int, m: int) -> AtomGrid:
    """The grid of simplex points with all coordinates multiples of 1/m.

    Contains binomial(m+p-1, p-1) points; the count grows like m^(p-1),
    which is the practical limit on the dimension (intended for p <= 8).
    """
    if p < 2:
        raise ValueError("dimension p must be >= 2")
    if m < 1:
        raise ValueError("resolution m must be >= 1")
    k = np.array(list(_compositions_desc(m, p)), dtype=np.int64)
    return AtomGrid(p=p, m=m, k=k, points=k / float(m))


def cell_of(t, m: int) -> np.ndarray:
    """Lower-left grid corner of the partition cell containing ``t``.

    The cells {v_j <= t_j < v_j + 1/m for j < p} tile the simplex; the
    returned v has coordinates floor(m*t_j)/m for j < p and the remainder
    in the last coordinate.  A snap guard of ``CELL_SNAP`` absorbs points
    a rounding error below a grid line.
    """
    if m < 1:
        raise ValueError("resolution m must be >= 1")
    t = as_simplex_point(t)
    p = t.size
    k = np.empty(p, dtype=np.int64)
    for j in range(p - 1):
        k[j] = min(int(math.floor(m * t[j] + CELL_SNAP)), m)
    # the floored numerators sum to at most m, so the remainder is a
    # valid nonnegative last coordinate
    k[p - 1] = m - int(k[: p - 1].sum())
    return k / float(m)


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights for integrals over the simplex.

    Weights are exact cell volumes in the (p-1)-dimensional representation
    and sum to 1/(p-1)!.
    """

    p: int
    n_subdiv: int
    nodes: np.ndarray
    weights: np.ndarray

    def __len__(self) -> int:
        return self.nodes.shape[0]


def _box_simplex_volume(d: int, r: int) -> Fraction:
    """Volume fraction of {y in [0,1]^d : sum(y) <= r} within the unit box."""
    if r >= d:
        return Fraction(1)
    acc = Fraction(0)
    for i in range(r + 1):
        acc += (-1) ** i * math.comb(d, i) * Fraction((r - i) ** d)
    return acc / math.factorial(d)


def _box_simplex_centroid(d: int, r: int) -> Fraction:
    """Common centroid coordinate of {y in [0,1]^d : sum(y) <= r}."""
    if r >= d:
        return Fraction(1, 2)
    first_moment = Fraction(0)
    for i in range(r):
        cc = r - i
        term = Fraction(cc ** (d + 1) - (cc - 1) ** (d + 1), d * (d + 1)) - Fraction(
            (cc - 1) ** d, d
        )
        first_moment += (-1) ** i * math.comb(d - 1, i) * term
    first_moment /= math.factorial(d - 1)
    return first_moment / _box_simplex_volume(d, r)


def midpoint_rule(p: int, n_subdiv: int) -> QuadratureRule:
    """Barycenter rule on the 1/n_subdiv partition of the simplex.

    One node per cell with nonempty interior, placed at the exact cell
    centroid and weighted by the exact cell volume, so the rule integrates
    affine functions exactly.
    """
    if p < 2:
        raise ValueError("dimension p must be >= 2")
    if n_subdiv < 1:
        raise ValueError("subdivision count must be >= 1")
    d = p - 1
    n = n_subdiv
    grid = enumerate_grid(p, n)
    keep = grid.k[:, p - 1] >= 1  # cells on the far face have zero volume
    kmat = grid.k[keep]
    centroid = np.array([float(_box_simplex_centroid(d, r)) for r in range(1, d + 1)])
    volume = np.array([float(_box_simplex_volume(d, r)) for r in range(1, d + 1)])
    r = np.minimum(kmat[:, p - 1], d)
    mu = centroid[r - 1]
    nodes = np.empty((kmat.shape[0], p))
    nodes[:, : p - 1] = (kmat[:, : p - 1] + mu[:, None]) / n
    nodes[:, p - 1] = (kmat[:, p - 1] - d * mu) / n
    weights = volume[r - 1] / float(n**d)
    return QuadratureRule(p=p, n_subdiv=n, nodes=nodes, weights=weights)


def l2_inner(f, g, rule: QuadratureRule) -> float:
    """Quadrature approximation of the L2 inner product of f and g.

    f and g are value arrays on the rule nodes.  Computed as
    sum(w * (f*g)), which is exactly symmetric in its arguments.
    """
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != (len(rule),) or g.shape != (len(rule),):
        raise ValueError("value arrays must have one entry per rule node")
    return float(np.dot(rule.weights, f * g))


def l2_norm(f, rule: QuadratureRule) -> float:
    return math.sqrt(max(l2_inner(f, f, rule), 0.0))


# ---------------------------------------------------------------------------
# CSV serialization


def write_grid_csv(grid: AtomGrid, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"p={grid.p}", f"m={grid.m}"])
        writer.writerow([f"v{j + 1}" for j in range(grid.p)])
        for row in grid.points:
            writer.writerow([repr(float(x)) for x in row])


def read_grid_csv(path) -> AtomGrid:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    p = int(rows[0][0].split("=")[1])
    m = int(rows[0][1].split("=")[1])
    pts = np.array([[float(x) for x in row] for row in rows[2:]])
    k = np.rint(pts * m).astype(np.int64)
    grid = enumerate_grid(p, m)
    if not np.array_equal(k, grid.k):
        raise ValueError("grid file does not match the canonical atom order")
    return grid


def write_rule_csv(rule: QuadratureRule, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"p={rule.p}", f"N={rule.n_subdiv}"])
        writer.writerow([f"w{j + 1}" for j in range(rule.p)] + ["weight"])
        for node, wt in zip(rule.nodes, rule.weights):
            writer.writerow([repr(float(x)) for x in node] + [repr(float(wt))])


def read_rule_csv(path) -> QuadratureRule:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    p = int(rows[0][0].split("=")[1])
    n = int(rows[0][1].split("=")[1])
    data = np.array([[float(x) for x in row] for row in rows[2:]])
    return QuadratureRule(p=p, n_subdiv=n, nodes=data[:, :p], weights=data[:, p])
