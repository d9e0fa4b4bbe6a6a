"""Discrete spectral measures and the dependence functions they induce.

A spectral measure is a finite collection of simplex atoms with
nonnegative masses whose first moments all equal one; it generates a
stable tail dependence function, a Pickands dependence function and an
extreme-value copula by integration against max-linear kernels.
"""

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .simplex import QuadratureRule, as_simplex_point, cell_of, enumerate_grid

#: atoms lighter than this are dropped on construction
MASS_PRUNE_TOL = 1e-12

#: absolute tolerance on the moment constraints sum_v h_v v_j = 1
MOMENT_TOL = 1e-8


@dataclass(frozen=True)
class SpectralMeasure:
    """Finite discrete measure sum_v h_v * delta_v on the simplex."""

    p: int
    points: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        points = np.atleast_2d(np.asarray(self.points, dtype=float))
        masses = np.asarray(self.masses, dtype=float).ravel()
        if points.shape[0] != masses.size:
            raise ValueError("one mass per atom required")
        if points.shape[1] != self.p:
            raise ValueError(f"atoms must have {self.p} coordinates")
        if masses.size == 0:
            raise ValueError("measure needs at least one atom")
        if np.any(masses < 0):
            raise ValueError("masses must be nonnegative")
        keep = masses >= MASS_PRUNE_TOL
        if not keep.any():
            raise ValueError("all atoms below the pruning tolerance")
        points = np.vstack([as_simplex_point(v, self.p) for v in points[keep]])
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "masses", masses[keep].copy())

    def __len__(self) -> int:
        return self.masses.size

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    def moments(self) -> np.ndarray:
        """First moments sum_v h_v v_j, one per margin."""
        return self.masses @ self.points


@dataclass(frozen=True)
class MomentReport:
    residuals: np.ndarray
    min_mass: float
    total_mass: float
    passed: bool


@dataclass(frozen=True)
class DependenceSurface:
    """A dependence function evaluated on the nodes of a quadrature rule."""

    rule: QuadratureRule
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).ravel()
        if values.size != len(self.rule):
            raise ValueError("one value per rule node required")
        object.__setattr__(self, "values", values)


def validate(measure: SpectralMeasure) -> MomentReport:
    """Report how far a measure is from satisfying the moment constraints."""
    residuals = measure.moments() - 1.0
    min_mass = float(measure.masses.min())
    passed = bool(np.abs(residuals).max() <= MOMENT_TOL and min_mass >= 0.0)
    return MomentReport(
        residuals=residuals,
        min_mass=min_mass,
        total_mass=measure.total_mass,
        passed=passed,
    )


def eval_pickands(measure: SpectralMeasure, w) -> float:
    """Dependence function value sum_v h_v max_j(w_j v_j) at one point."""
    w = as_simplex_point(w, measure.p)
    return float(measure.masses @ np.max(measure.points * w, axis=1))


def pickands_values(measure: SpectralMeasure, nodes: np.ndarray) -> np.ndarray:
    """Vectorized ``eval_pickands`` over the rows of ``nodes``."""
    nodes = np.asarray(nodes, dtype=float)
    out = np.empty(nodes.shape[0])
    chunk = max(1, 2_000_000 // max(len(measure), 1))
    for s in range(0, nodes.shape[0], chunk):
        block = np.max(
            measure.points[None, :, :] * nodes[s : s + chunk, None, :], axis=2
        )
        out[s : s + chunk] = block @ measure.masses
    return out


def pickands_surface(measure: SpectralMeasure, rule: QuadratureRule) -> DependenceSurface:
    return DependenceSurface(rule=rule, values=pickands_values(measure, rule.nodes))


def eval_tail_dependence(measure: SpectralMeasure, x) -> float:
    """Stable tail dependence function sum_v h_v max_j(v_j x_j)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (measure.p,):
        raise ValueError(f"expected a vector of length {measure.p}")
    if np.any(x < 0):
        raise ValueError("tail dependence arguments must be nonnegative")
    return float(measure.masses @ np.max(measure.points * x, axis=1))


def eval_copula(measure: SpectralMeasure, u) -> float:
    """Extreme-value copula exp(-l(-log u_1, ..., -log u_p))."""
    u = np.asarray(u, dtype=float)
    if u.shape != (measure.p,):
        raise ValueError(f"expected a vector of length {measure.p}")
    if np.any(u <= 0) or np.any(u > 1):
        raise ValueError("copula arguments must lie in (0, 1]")
    return math.exp(-eval_tail_dependence(measure, -np.log(u)))


@dataclass(frozen=True)
class DiscretizationReport:
    """Pieces of the grid-relocation construction.

    ``c`` are the per-margin moment deficits of the relocated measure in
    units of 1/m; ``a0`` scales it down and ``a`` is the extra mass put on
    the first p-1 vertices.  All corrections lie in [0, p/m)."""

    c: np.ndarray
    a0: float
    a: np.ndarray


def discretize(measure: SpectralMeasure, m: int) -> SpectralMeasure:
    """Relocate a measure onto the 1/m grid, then repair its moments.

    Each atom moves to the corner of its partition cell; the moment
    deficits of the relocated measure are absorbed by a global rescaling
    and extra mass on the first p-1 vertices.  The result satisfies the
    moment constraints and its dependence function deviates from the
    input's by at most p^2/m in the sup norm.
    """
    return discretize_with_report(measure, m)[0]


def discretize_with_report(
    measure: SpectralMeasure, m: int
) -> tuple[SpectralMeasure, DiscretizationReport]:
    """``discretize`` plus the correction masses it used."""
    if m < 1:
        raise ValueError("resolution m must be >= 1")
    p = measure.p
    relocated: dict[tuple, float] = {}
    for atom, mass in zip(measure.points, measure.masses):
        v = cell_of(atom, m)
        key = tuple(int(round(x * m)) for x in v)
        relocated[key] = relocated.get(key, 0.0) + float(mass)
    keys = sorted(relocated.keys(), key=lambda kk: kk[: p - 1], reverse=True)
    points = np.array(keys, dtype=float) / m
    masses = np.array([relocated[kk] for kk in keys])

    moments = masses @ points
    c = np.clip(m * (1.0 - moments[: p - 1]), 0.0, None)
    s = float(c.sum())
    a0 = s / (m + s)
    a = (c + s) / (m + s)

    scaled = {kk: (1.0 - a0) * relocated[kk] for kk in keys}
    for j in range(p - 1):
        if a[j] > 0.0:
            ej = tuple(m if i == j else 0 for i in range(p))
            scaled[ej] = scaled.get(ej, 0.0) + float(a[j])
    keys = sorted(scaled.keys(), key=lambda kk: kk[: p - 1], reverse=True)
    out_points = np.array(keys, dtype=float) / m
    out_masses = np.array([scaled[kk] for kk in keys])
    out = SpectralMeasure(p=p, points=out_points, masses=out_masses)
    return out, DiscretizationReport(c=c, a0=a0, a=a)


@dataclass(frozen=True)
class ShapeReport:
    max_lower_violation: float
    max_upper_violation: float
    max_convexity_violation: float
    n_pairs: int

    @property
    def passed(self) -> bool:
        worst = max(
            self.max_lower_violation,
            self.max_upper_violation,
            self.max_convexity_violation,
        )
        return worst <= 1e-9


def check_shape(surface: DependenceSurface, max_pairs: int = 2000, seed: int = 0) -> ShapeReport:
    """Check the bounds max(w) <= A(w) <= 1 and midpoint convexity.

    Bounds are checked at every node.  Convexity is checked on a seeded
    random sample of node pairs whose coordinate midpoint is itself a node
    (up to ``max_pairs`` pairs); violations are positive numbers, zero
    when the constraint holds.
    """
    nodes = surface.rule.nodes
    values = surface.values
    lower = float(np.max(nodes.max(axis=1) - values))
    upper = float(np.max(values - 1.0))

    lookup = {tuple(np.round(row, 12)): i for i, row in enumerate(nodes)}
    rng = np.random.default_rng(seed)
    n = nodes.shape[0]
    worst_convex = -np.inf
    found = 0
    attempts = 0
    max_attempts = 50 * max_pairs
    while found < max_pairs and attempts < max_attempts:
        attempts += 1
        i, j = rng.integers(0, n, size=2)
        if i == j:
            continue
        mid = tuple(np.round((nodes[i] + nodes[j]) / 2.0, 12))
        k = lookup.get(mid)
        if k is None:
            continue
        found += 1
        gap = values[k] - 0.5 * (values[i] + values[j])
        if gap > worst_convex:
            worst_convex = float(gap)
    if found == 0:
        worst_convex = 0.0
    return ShapeReport(
        max_lower_violation=max(lower, 0.0),
        max_upper_violation=max(upper, 0.0),
        max_convexity_violation=max(worst_convex, 0.0),
        n_pairs=found,
    )


def independence_measure(p: int) -> SpectralMeasure:
    """Unit mass at every vertex: the product copula."""
    return SpectralMeasure(p=p, points=np.eye(p), masses=np.ones(p))


def comonotone_measure(p: int) -> SpectralMeasure:
    """Mass p at the barycenter: the minimum copula."""
    return SpectralMeasure(
        p=p, points=np.full((1, p), 1.0 / p), masses=np.array([float(p)])
    )


def grid_measure(p: int, m: int, masses) -> SpectralMeasure:
    """Measure supported on the canonical atom grid with the given masses."""
    grid = enumerate_grid(p, m)
    masses = np.asarray(masses, dtype=float)
    if masses.shape != (len(grid),):
        raise ValueError("one mass per grid atom required")
    return SpectralMeasure(p=p, points=grid.points, masses=masses)


# ---------------------------------------------------------------------------
# serialization


def write_measure_csv(measure: SpectralMeasure, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"v{j + 1}" for j in range(measure.p)] + ["mass"])
        for atom, mass in zip(measure.points, measure.masses):
            writer.writerow([repr(float(x)) for x in atom] + [repr(float(mass))])


def read_measure_csv(path) -> SpectralMeasure:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    p = len(header) - 1
    data = np.array([[float(x) for x in row] for row in rows[1:]])
    return SpectralMeasure(p=p, points=data[:, :p], masses=data[:, p])


def measure_to_json(measure: SpectralMeasure) -> dict:
    return {
        "p": measure.p,
        "atoms": [
            {"v": [float(x) for x in atom], "h": float(mass)}
            for atom, mass in zip(measure.points, measure.masses)
        ],
    }


def measure_from_json(obj: dict) -> SpectralMeasure:
    points = np.array([atom["v"] for atom in obj["atoms"]], dtype=float)
    masses = np.array([atom["h"] for atom in obj["atoms"]], dtype=float)
    return SpectralMeasure(p=int(obj["p"]), points=points, masses=masses)


def write_measure_json(measure: SpectralMeasure, path) -> None:
    with open(path, "w") as fh:
        json.dump(measure_to_json(measure), fh, indent=2)


def read_measure_json(path) -> SpectralMeasure:
    with open(path) as fh:
        return measure_from_json(json.load(fh))
