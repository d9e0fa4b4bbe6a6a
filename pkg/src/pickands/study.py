"""Monte Carlo experiment: simulate, estimate, project, integrate squared
errors over the simplex, and aggregate replicate means into a table.

Replicates are independent given their stream ids, so they can run in
worker processes; replicates are grouped into fixed-size blocks (QP warm
starts reset at block boundaries) so results are bitwise identical for
any worker count.
"""

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .empirical import pseudo_observations
from .estimators import EstimateInvalid, EstimatorSpec, _surface_from_raw
from .projection import (
    KKT_DELTA,
    RIDGE_SCALE,
    basis_matrix,
    gram_matrix,
    moment_constraints,
    vertex_start,
)
from .sampling import (
    AsymmetricLogisticParams,
    RngStream,
    asy_logistic_pickands_batch,
    sample_asy_logistic,
)
from .simplex import enumerate_grid, midpoint_rule
from .spectral import DependenceSurface

ESTIMATOR_NAMES = ("PD", "PD-pr", "CFG", "CFG-pr")

#: replicates per warm-start block; fixed so tables do not depend on the
#: worker count
BLOCK_SIZE = 25

WORKERS_ENV = "PICKANDS_WORKERS"


@dataclass(frozen=True)
class StudyConfig:
    """One cell of the experiment: a model, a sample size, a replicate count."""

    params: AsymmetricLogisticParams
    n: int
    reps: int
    m: int = 20
    fine_n: int | None = None
    estimators: tuple[str, ...] = ESTIMATOR_NAMES
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "estimators", tuple(self.estimators))
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.n < 2:
            raise ValueError("sample size must be >= 2")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        unknown = set(self.estimators) - set(ESTIMATOR_NAMES)
        if unknown:
            raise ValueError(f"unknown estimators: {sorted(unknown)}")
        if self.fine_n is not None and self.fine_n < self.m:
            raise ValueError("fine grid must be at least as fine as the atom grid")

    @property
    def rule_subdiv(self) -> int:
        return self.fine_n if self.fine_n is not None else 4 * self.m


@dataclass(frozen=True)
class MiseRow:
    estimator: str
    n: int
    alpha: float
    mise: float
    stderr: float
    reps_used: int
    failures: int


@dataclass
class MiseTable:
    rows: list[MiseRow] = field(default_factory=list)

    def get(self, estimator: str, n: int, alpha: float) -> MiseRow:
        for row in self.rows:
            if (
                row.estimator == estimator
                and row.n == n
                and math.isclose(row.alpha, alpha)
            ):
                return row
        raise KeyError(f"no row for ({estimator}, n={n}, alpha={alpha})")

    def merged(self, other: "MiseTable") -> "MiseTable":
        return MiseTable(rows=self.rows + other.rows)

    def to_csv(self, path) -> None:
        alphas = sorted({row.alpha for row in self.rows})
        ns = sorted({row.n for row in self.rows})
        names = [e for e in ESTIMATOR_NAMES if any(r.estimator == e for r in self.rows)]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n", "estimator"] + [f"alpha={a:g}" for a in alphas])
            for n in ns:
                for name in names:
                    cells = []
                    for a in alphas:
                        try:
                            cells.append(repr(self.get(name, n, a).mise))
                        except KeyError:
                            cells.append("")
                    writer.writerow([n, name] + cells)

    def to_json(self, path) -> None:
        payload = {
            "rows": [
                {
                    "estimator": r.estimator,
                    "n": r.n,
                    "alpha": r.alpha,
                    "mise": r.mise,
                    "stderr": r.stderr,
                    "reps_used": r.reps_used,
                    "failures": r.failures,
                }
                for r in self.rows
            ]
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2)


def ise(estimate: DependenceSurface, truth: DependenceSurface) -> float:
    """Integrated squared error of one estimate against the truth."""
    if estimate.rule is not truth.rule and (
        estimate.rule.p != truth.rule.p
        or estimate.rule.n_subdiv != truth.rule.n_subdiv
    ):
        raise ValueError("surfaces live on different rules")
    diff = estimate.values - truth.values
    return float(np.dot(truth.rule.weights, diff * diff))


class _Context:
    """Everything shared across the replicates of one study cell."""

    def __init__(self, config: StudyConfig):
        self.config = config
        self.rule = midpoint_rule(3, config.rule_subdiv)
        self.nodes = np.ascontiguousarray(self.rule.nodes)
        self.log_nodes = np.log(self.nodes)
        self.weights = self.rule.weights
        self.truth = asy_logistic_pickands_batch(config.params, self.nodes)
        self.needs_projection = any(e.endswith("-pr") for e in config.estimators)
        if self.needs_projection:
            grid = enumerate_grid(3, config.m)
            self.basis = basis_matrix(grid, self.rule)
            D = gram_matrix(grid, self.rule, self.basis)
            ridge = RIDGE_SCALE * float(np.trace(D)) / len(grid)
            self.D_ridged = np.ascontiguousarray(D + ridge * np.eye(len(grid)))
            Ceq, ceq = moment_constraints(grid)
            self.Ceq = np.ascontiguousarray(Ceq)
            self.ceq = np.ascontiguousarray(ceq)
            self.start0 = vertex_start(grid)
            self.max_iter = 30 * len(grid) + 100
            self.weighted_basis = self.basis * self.weights

    def _project_values(self, values, warm):
        d = self.weighted_basis @ values
        start = self.start0 if warm is None else warm
        h, _mu, _it, status = kernels.qp_active_set(
            self.D_ridged,
            np.ascontiguousarray(d),
            self.Ceq,
            self.ceq,
            start.copy(),
            start == 0.0,
            KKT_DELTA,
            self.max_iter,
        )
        if status != kernels.QP_OPTIMAL:
            raise EstimateInvalid("projection QP hit its iteration limit")
        return h @ self.basis, h

    def replicate(self, r: int, warm: dict) -> np.ndarray:
        config = self.config
        rng = RngStream(config.seed, r)
        x = sample_asy_logistic(config.params, config.n, rng)
        u_hat = pseudo_observations(x)
        neglogu = -np.log(u_hat)
        xi_mean, logxi_mean = kernels.raw_surfaces(
            neglogu, np.log(neglogu), self.nodes, self.log_nodes
        )
        out = np.full(len(config.estimators), np.nan)
        wanted = {name.split("-")[0] for name in config.estimators}
        raw: dict[str, np.ndarray | None] = {}
        for kind, label in (("pickands", "PD"), ("cfg", "CFG")):
            if label not in wanted:
                continue
            try:
                raw[label] = _surface_from_raw(
                    EstimatorSpec(kind, "linear"), u_hat, self.nodes, xi_mean, logxi_mean
                )
            except EstimateInvalid:
                raw[label] = None
        for slot, name in enumerate(config.estimators):
            values = raw.get(name.split("-")[0])
            if values is None:
                continue
            if name.endswith("-pr"):
                try:
                    values, h = self._project_values(values, warm.get(name))
                    warm[name] = h
                except EstimateInvalid:
                    continue
            diff = values - self.truth
            out[slot] = float(np.dot(self.weights, diff * diff))
        return out


def _run_block(ctx: _Context, lo: int, hi: int) -> np.ndarray:
    warm: dict = {}
    out = np.empty((hi - lo, len(ctx.config.estimators)))
    for r in range(lo, hi):
        out[r - lo] = ctx.replicate(r, warm)
    return out


# worker processes keep the assembled context between blocks
_CTX_CACHE: dict = {}


def _worker(args):
    config, lo, hi = args
    ctx = _CTX_CACHE.get(config)
    if ctx is None:
        if len(_CTX_CACHE) > 4:
            _CTX_CACHE.clear()
        ctx = _Context(config)
        _CTX_CACHE[config] = ctx
    return lo, _run_block(ctx, lo, hi)


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV, "").strip()
    if env:
        return max(1, int(env))
    return 1


def run_study(config: StudyConfig, workers: int | None = None) -> MiseTable:
    """Run every replicate of one study cell and aggregate the ISEs.

    Deterministic given config.seed: replicate r always uses stream id r,
    blocks are fixed, and the final reduction is an ordered mean, so the
    table does not depend on the worker count.  Replicates whose QP or
    estimator fails are excluded and counted in the ``failures`` column.
    """
    if workers is None:
        workers = default_workers()
    blocks = [
        (config, lo, min(lo + BLOCK_SIZE, config.reps))
        for lo in range(0, config.reps, BLOCK_SIZE)
    ]
    ise_matrix = np.empty((config.reps, len(config.estimators)))
    if workers > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for lo, block in pool.map(_worker, blocks):
                ise_matrix[lo : lo + block.shape[0]] = block
    else:
        ctx = _Context(config)
        for _cfg, lo, hi in blocks:
            ise_matrix[lo:hi] = _run_block(ctx, lo, hi)
    rows = []
    alpha = config.params.alpha
    for slot, name in enumerate(config.estimators):
        col = ise_matrix[:, slot]
        used = int(np.sum(~np.isnan(col)))
        mise = float(np.nanmean(col)) if used else float("nan")
        stderr = (
            float(np.nanstd(col, ddof=1) / math.sqrt(used)) if used > 1 else float("nan")
        )
        rows.append(
            MiseRow(
                estimator=name,
                n=config.n,
                alpha=alpha,
                mise=mise,
                stderr=stderr,
                reps_used=used,
                failures=config.reps - used,
            )
        )
    return MiseTable(rows=rows)


def run_grid(
    base: StudyConfig, alphas, ns, workers: int | None = None
) -> MiseTable:
    """Run a study cell for every (alpha, n) pair and merge the tables."""
    table = MiseTable()
    for alpha in alphas:
        params = replace(base.params, alpha=float(alpha))
        for n in ns:
            config = replace(base, params=params, n=int(n))
            table = table.merged(run_study(config, workers=workers))
    return table
