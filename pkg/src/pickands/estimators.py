"""Rank-based estimators of the Pickands dependence function.

All estimators are functions of the pseudo-observations only, hence
invariant under strictly increasing marginal transformations.  Raw
estimates need not satisfy the shape constraints; enforcing them is the
projection module's job.
"""

import csv
import json
from dataclasses import dataclass

import numpy as np

from . import kernels
from .simplex import QuadratureRule, as_simplex_point
from .spectral import DependenceSurface

#: Euler-Mascheroni constant, 20 significant digits
EULER_GAMMA = 0.57721566490153286061

KINDS = ("pickands", "cfg", "ht")
CORRECTIONS = ("none", "linear")


class EstimateInvalid(ValueError):
    """Corrected reciprocal went nonpositive; the estimate is unusable here."""


@dataclass(frozen=True)
class EstimatorSpec:
    """Which estimator to evaluate and whether to endpoint-correct it.

    The linear correction uses the weights lambda_j(w) = w_j, which pin
    the estimate to 1 at every vertex.  The Hall-Tajvidi variant is
    already a rescaling and admits no further correction.
    """

    kind: str
    correction: str = "none"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.correction not in CORRECTIONS:
            raise ValueError(f"correction must be one of {CORRECTIONS}")
        if self.kind == "ht" and self.correction != "none":
            raise ValueError("the ht estimator admits no endpoint correction")


def _check_sample(u_hat) -> np.ndarray:
    u_hat = np.asarray(u_hat, dtype=float)
    if u_hat.ndim != 2 or u_hat.shape[1] < 2:
        raise ValueError("pseudo-sample must be an (n, p) matrix with p >= 2")
    if np.any(u_hat <= 0) or np.any(u_hat >= 1):
        raise ValueError("pseudo-observations must lie strictly inside (0, 1)")
    return u_hat


def xi_values(u_hat, w) -> np.ndarray:
    """The n min-ratio statistics min_j (-log U_ij) / w_j at one w.

    Coordinates with w_j = 0 are excluded from the minimum (their ratio
    tends to +inf), so vertex evaluations reduce to single coordinates.
    """
    u_hat = _check_sample(u_hat)
    w = as_simplex_point(w, u_hat.shape[1])
    active = w > 0
    return np.min(-np.log(u_hat[:, active]) / w[active], axis=1)


def xi(u_hat, i: int, w) -> float:
    """Min-ratio statistic of row ``i`` (0-based) of the pseudo-sample."""
    u_hat = _check_sample(u_hat)
    n = u_hat.shape[0]
    if not 0 <= i < n:
        raise IndexError(f"row index {i} out of range for n={n}")
    return float(xi_values(u_hat[i : i + 1], w)[0])


def pickands_estimate(u_hat, w) -> float:
    """Reciprocal of the mean min-ratio statistic."""
    return 1.0 / float(np.mean(xi_values(u_hat, w)))


def cfg_estimate(u_hat, w) -> float:
    """exp(-mean(log xi) - gamma), the log-based rank estimator."""
    return float(np.exp(-np.mean(np.log(xi_values(u_hat, w))) - EULER_GAMMA))


def ht_estimate(u_hat, w) -> float:
    """Pickands estimate rescaled by its first-vertex value.

    Under rank margins the vertex value is the same for every j, so the
    first vertex is used as the canonical normalizer.
    """
    u_hat = _check_sample(u_hat)
    e1 = np.zeros(u_hat.shape[1])
    e1[0] = 1.0
    return pickands_estimate(u_hat, w) / pickands_estimate(u_hat, e1)


def _vertex_inverse_means(u_hat) -> np.ndarray:
    """1 / (Pickands estimate at e_j) for each j: mean of -log U_.j."""
    return -np.log(u_hat).mean(axis=0)


def _vertex_log_cfg(u_hat) -> np.ndarray:
    """log of the CFG estimate at each vertex."""
    return -np.log(-np.log(u_hat)).mean(axis=0) - EULER_GAMMA


def corrected_estimate(spec: EstimatorSpec, u_hat, w) -> float:
    """Endpoint-corrected estimate with weights lambda_j(w) = w_j.

    Exact (to the last bit) at the vertices.  Raises EstimateInvalid when
    the corrected Pickands reciprocal is nonpositive, which can happen
    for pathological tiny samples.
    """
    if spec.correction != "linear":
        raise ValueError("corrected_estimate requires correction='linear'")
    u_hat = _check_sample(u_hat)
    w = as_simplex_point(w, u_hat.shape[1])
    if spec.kind == "pickands":
        inv = 1.0 / pickands_estimate(u_hat, w)
        inv -= float(w @ (_vertex_inverse_means(u_hat) - 1.0))
        if inv <= 0:
            raise EstimateInvalid(f"corrected reciprocal {inv!r} at w={w}")
        return 1.0 / inv
    log_a = float(np.log(cfg_estimate(u_hat, w)))
    log_a -= float(w @ _vertex_log_cfg(u_hat))
    return float(np.exp(log_a))


def estimate(spec: EstimatorSpec, u_hat, w) -> float:
    """Evaluate the estimator described by ``spec`` at one point."""
    if spec.correction == "linear":
        return corrected_estimate(spec, u_hat, w)
    if spec.kind == "pickands":
        return pickands_estimate(u_hat, w)
    if spec.kind == "cfg":
        return cfg_estimate(u_hat, w)
    return ht_estimate(u_hat, w)


def estimate_surface(spec: EstimatorSpec, u_hat, rule: QuadratureRule) -> DependenceSurface:
    """Evaluate the chosen estimator at every node of a quadrature rule.

    Node evaluations are independent of each other, so the result does
    not depend on evaluation order.
    """
    u_hat = _check_sample(u_hat)
    if u_hat.shape[1] != rule.p:
        raise ValueError("sample dimension does not match the rule")
    neglogu = -np.log(u_hat)
    nodes = np.ascontiguousarray(rule.nodes)
    with np.errstate(divide="ignore"):
        log_nodes = np.log(nodes)
    xi_mean, logxi_mean = kernels.raw_surfaces(
        neglogu, np.log(neglogu), nodes, log_nodes
    )
    values = _surface_from_raw(spec, u_hat, rule.nodes, xi_mean, logxi_mean)
    return DependenceSurface(rule=rule, values=values)


def _surface_from_raw(spec, u_hat, nodes, xi_mean, logxi_mean) -> np.ndarray:
    if spec.kind == "pickands":
        if spec.correction == "linear":
            inv = xi_mean - nodes @ (_vertex_inverse_means(u_hat) - 1.0)
            if np.any(inv <= 0):
                k = int(np.argmax(inv <= 0))
                raise EstimateInvalid(f"corrected reciprocal nonpositive at node {k}")
            return 1.0 / inv
        return 1.0 / xi_mean
    if spec.kind == "cfg":
        log_a = -logxi_mean - EULER_GAMMA
        if spec.correction == "linear":
            log_a = log_a - nodes @ _vertex_log_cfg(u_hat)
        return np.exp(log_a)
    # ht: rescale by the first vertex value
    return _vertex_inverse_means(u_hat)[0] / xi_mean


# ---------------------------------------------------------------------------
# the integral identity linking the Pickands estimator to the empirical
# copula, used as a numerical cross-check between modules


def pickands_reciprocal_by_quadrature(u_hat, w, n_points: int = 100_000) -> float:
    """Integrate C_n(u^w)/u over (0, 1] by composite midpoint quadrature.

    Substituting u = exp(-s) maps the integral to int_0^inf C_n(e^{-sw}) ds.
    Below s = 1/(n+1) the integrand is exactly 1 and above p*log(n+1) it
    is exactly 0, so only the middle range is integrated numerically.
    Agrees with 1/pickands_estimate(u_hat, w) up to quadrature error.
    """
    from .empirical import empirical_copula_batch

    u_hat = _check_sample(u_hat)
    w = as_simplex_point(w, u_hat.shape[1])
    n = u_hat.shape[0]
    lo = 1.0 / (n + 1.0)
    hi = u_hat.shape[1] * np.log(n + 1.0)
    step = (hi - lo) / n_points
    s = lo + (np.arange(n_points) + 0.5) * step
    points = np.exp(-s[:, None] * w[None, :])
    vals = empirical_copula_batch(u_hat, points)
    return lo + float(vals.sum() * step)


# ---------------------------------------------------------------------------
# serialization


def write_surface_csv(surface: DependenceSurface, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"w{j + 1}" for j in range(surface.rule.p)] + ["value"])
        for node, val in zip(surface.rule.nodes, surface.values):
            writer.writerow([repr(float(x)) for x in node] + [repr(float(val))])


def write_surface_meta(spec: EstimatorSpec | None, n: int, p: int, path) -> None:
    meta = {
        "kind": spec.kind if spec else None,
        "correction": spec.correction if spec else None,
        "n": n,
        "p": p,
    }
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2)
