"""Least-squares projection of a pilot surface onto valid dependence
functions with grid-supported spectral measures.

The projection is a dense quadratic program: minimize the squared L2
distance between the pilot and the max-linear surface of a mass vector h
on the atom grid, subject to the moment equalities and h >= 0.  Gram matrix
and linear term are assembled by Riemann sums on one shared fine grid,
which keeps the Gram positive semidefinite by construction.
"""

import json
from dataclasses import dataclass

import numpy as np

from . import kernels
from .simplex import AtomGrid, QuadratureRule, enumerate_grid, l2_inner, midpoint_rule
from .spectral import DependenceSurface, SpectralMeasure

#: relative ridge added to the Gram before factorization
RIDGE_SCALE = 1e-10

#: regularization of the equality block of the KKT systems
KKT_DELTA = 1e-12

#: masses below this are clamped to exactly zero on output
MASS_CLAMP = 1e-10


class Infeasible(RuntimeError):
    """No feasible starting point could be constructed."""


class QpMaxIterations(RuntimeError):
    """Active-set iteration limit hit; carries the best iterate found."""

    def __init__(self, h, diagnostics):
        self.h = h
        self.diagnostics = diagnostics
        super().__init__(f"QP did not converge: {diagnostics}")


@dataclass(frozen=True)
class QuadraticProgram:
    """min 1/2 h'Dh - d'h subject to Ceq h = ceq and h >= 0."""

    D: np.ndarray
    d: np.ndarray
    Ceq: np.ndarray
    ceq: np.ndarray

    def __post_init__(self):
        D = np.asarray(self.D, dtype=float)
        d = np.asarray(self.d, dtype=float).ravel()
        C = np.atleast_2d(np.asarray(self.Ceq, dtype=float))
        c = np.asarray(self.ceq, dtype=float).ravel()
        k = d.size
        if D.shape != (k, k) or C.shape[1] != k or c.size != C.shape[0]:
            raise ValueError("inconsistent QP dimensions")
        if np.abs(D - D.T).max() > 1e-12 * max(1.0, np.abs(D).max()):
            raise ValueError("D must be symmetric")
        object.__setattr__(self, "D", 0.5 * (D + D.T))
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "Ceq", C)
        object.__setattr__(self, "ceq", c)

    @property
    def size(self) -> int:
        return self.d.size

    def objective(self, h) -> float:
        h = np.asarray(h, dtype=float)
        return float(0.5 * h @ self.D @ h - self.d @ h)


@dataclass(frozen=True)
class QpDiagnostics:
    objective: float
    stationarity: float
    primal: float
    complementarity: float
    iterations: int
    status: str
    ridge: float


@dataclass(frozen=True)
class ProjectionResult:
    """Projected measure, its surface on the shared rule, and QP evidence."""

    measure: SpectralMeasure
    surface: DependenceSurface
    objective: float  # squared L2 distance between pilot and projection
    grid: AtomGrid
    masses: np.ndarray  # one entry per grid atom, zeros kept
    diagnostics: QpDiagnostics

    @property
    def kkt_residuals(self) -> tuple[float, float, float]:
        diag = self.diagnostics
        return (diag.stationarity, diag.primal, diag.complementarity)

    @property
    def iterations(self) -> int:
        return self.diagnostics.iterations


def basis_matrix(grid: AtomGrid, rule: QuadratureRule) -> np.ndarray:
    """Values of the atom kernels g_v(w) = max_j(w_j v_j) on the rule nodes.

    Shape (K, M): one row per atom, one column per node.
    """
    if grid.p != rule.p:
        raise ValueError("grid and rule dimensions differ")
    k, m = len(grid), len(rule)
    out = np.empty((k, m))
    chunk = max(1, 4_000_000 // max(m, 1))
    for s in range(0, k, chunk):
        out[s : s + chunk] = np.max(
            grid.points[s : s + chunk, None, :] * rule.nodes[None, :, :], axis=2
        )
    return out


def gram_matrix(grid: AtomGrid, rule: QuadratureRule, basis: np.ndarray | None = None) -> np.ndarray:
    """Riemann-sum Gram matrix of the atom kernels on the shared rule."""
    if basis is None:
        basis = basis_matrix(grid, rule)
    d = (basis * rule.weights) @ basis.T
    return 0.5 * (d + d.T)


def moment_constraints(grid: AtomGrid) -> tuple[np.ndarray, np.ndarray]:
    """Equality system encoding sum_v h_v v_j = 1 for every margin."""
    return grid.points.T.copy(), np.ones(grid.p)


def assemble(pilot: DependenceSurface, grid: AtomGrid, rule: QuadratureRule) -> QuadraticProgram:
    """Gram matrix, linear term and constraints for one pilot surface.

    The pilot must be evaluated on the same rule used for the Riemann
    sums.  The rule must carry at least as many nodes as the grid has
    atoms, otherwise the Gram is structurally singular.
    """
    if pilot.rule is not rule and (
        pilot.rule.p != rule.p
        or pilot.rule.n_subdiv != rule.n_subdiv
        or len(pilot.rule) != len(rule)
    ):
        raise ValueError("pilot surface is not evaluated on the shared rule")
    if len(rule) < len(grid):
        raise ValueError(
            f"rule has {len(rule)} nodes for {len(grid)} atoms; "
            "use a finer rule (default is 4x the atom resolution)"
        )
    basis = basis_matrix(grid, rule)
    D = gram_matrix(grid, rule, basis)
    d = basis @ (rule.weights * pilot.values)
    Ceq, ceq = moment_constraints(grid)
    return QuadraticProgram(D=D, d=d, Ceq=Ceq, ceq=ceq)


def vertex_start(grid: AtomGrid) -> np.ndarray:
    """Unit mass at every vertex atom: always feasible, so the projection
    QP can never be infeasible."""
    h = np.zeros(len(grid))
    h[grid.vertex_indices()] = 1.0
    return h


def _generic_start(qp: QuadraticProgram) -> np.ndarray:
    h = np.linalg.lstsq(qp.Ceq, qp.ceq, rcond=None)[0]
    if h.min() < -1e-12:
        from scipy.optimize import nnls

        h, residual = nnls(qp.Ceq, qp.ceq)
        if residual > 1e-8 * max(1.0, float(np.abs(qp.ceq).max())):
            raise Infeasible("no nonnegative solution of the equality system")
    h = np.maximum(h, 0.0)
    resid = np.abs(qp.Ceq @ h - qp.ceq).max()
    if resid > 1e-6 * max(1.0, float(np.abs(qp.ceq).max())):
        raise Infeasible(f"start violates equalities by {resid!r}")
    return h


def solve_qp(
    qp: QuadraticProgram,
    start: np.ndarray | None = None,
    max_iter: int | None = None,
) -> tuple[np.ndarray, QpDiagnostics]:
    """Solve the QP by a primal active-set method on the sign constraints.

    The equality constraints stay in a reduced KKT system throughout.  A
    ridge of RIDGE_SCALE * trace(D)/K makes the Gram positive definite,
    so the reported solution is the unique optimum of the ridged problem
    (minimum-norm-biased when the original Gram is singular).  ``start``
    must be feasible; exact zeros in it seed the initial working set.

    Raises QpMaxIterations (carrying the best iterate) if the iteration
    limit is hit, and Infeasible if no starting point can be built.
    """
    k = qp.size
    if start is None:
        start = _generic_start(qp)
    else:
        start = np.asarray(start, dtype=float).copy()
        if start.shape != (k,) or start.min() < 0:
            raise Infeasible("start must be a nonnegative K-vector")
    if max_iter is None:
        max_iter = 30 * k + 100
    ridge = RIDGE_SCALE * float(np.trace(qp.D)) / k
    D_r = qp.D + ridge * np.eye(k)
    pinned = start == 0.0
    h, mu, iterations, status = kernels.qp_active_set(
        np.ascontiguousarray(D_r),
        np.ascontiguousarray(qp.d),
        np.ascontiguousarray(qp.Ceq),
        np.ascontiguousarray(qp.ceq),
        start,
        pinned,
        KKT_DELTA,
        max_iter,
    )
    lam = (D_r @ h - qp.d) - qp.Ceq.T @ mu
    lam[h > 0] = 0.0
    lam = np.maximum(lam, 0.0)
    stationarity = float(np.abs((D_r @ h - qp.d) - qp.Ceq.T @ mu - lam).max())
    primal = float(np.abs(qp.Ceq @ h - qp.ceq).max())
    complementarity = float(np.abs(h * lam).max())
    diag = QpDiagnostics(
        objective=qp.objective(h),
        stationarity=stationarity,
        primal=primal,
        complementarity=complementarity,
        iterations=int(iterations),
        status="optimal" if status == kernels.QP_OPTIMAL else "max_iterations",
        ridge=ridge,
    )
    if status != kernels.QP_OPTIMAL:
        raise QpMaxIterations(h, diag)
    return h, diag


def project(
    pilot: DependenceSurface,
    m: int,
    rule: QuadratureRule | None = None,
    grid: AtomGrid | None = None,
    start: np.ndarray | None = None,
) -> ProjectionResult:
    """Project a pilot surface onto the valid class at atom resolution m.

    The default rule is the pilot's own; pass ``rule`` to override (it
    must match the pilot).  Masses below MASS_CLAMP are zeroed before the
    spectral measure is built.
    """
    if rule is None:
        rule = pilot.rule
    if grid is None:
        grid = enumerate_grid(rule.p, m)
    qp = assemble(pilot, grid, rule)
    if start is None:
        start = vertex_start(grid)
    h, diag = solve_qp(qp, start=start)
    h = np.where(h < MASS_CLAMP, 0.0, h)
    measure = SpectralMeasure(p=grid.p, points=grid.points, masses=h)
    basis = basis_matrix(grid, rule)
    values = h @ basis
    surface = DependenceSurface(rule=rule, values=values)
    distance_sq = max(
        float(h @ qp.D @ h - 2.0 * qp.d @ h + l2_inner(pilot.values, pilot.values, rule)),
        0.0,
    )
    return ProjectionResult(
        measure=measure,
        surface=surface,
        objective=distance_sq,
        grid=grid,
        masses=h,
        diagnostics=diag,
    )


def default_rule(p: int, m: int) -> QuadratureRule:
    """Shared fine grid with cells 4x finer than the atom spacing."""
    return midpoint_rule(p, 4 * m)


def write_diagnostics_json(result: ProjectionResult, m: int, n_subdiv: int, path) -> None:
    diag = result.diagnostics
    payload = {
        "objective": result.objective,
        "qp_objective": diag.objective,
        "kkt": {
            "stationarity": diag.stationarity,
            "primal": diag.primal,
            "complementarity": diag.complementarity,
        },
        "iterations": diag.iterations,
        "status": diag.status,
        "ridge": diag.ridge,
        "m": m,
        "N": n_subdiv,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
