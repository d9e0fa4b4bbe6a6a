"""Exact simulation of max-stable random vectors with unit Frechet margins.

Margins are unit Frechet rather than uniform because the estimation
pipeline consumes ranks only, so the marginal scale is immaterial
downstream.  All samplers are pure functions of an RngStream: calling a
sampler twice with the same stream reproduces the same draws bit for bit,
and distinct stream ids give independent streams.
"""

import math
from dataclasses import dataclass

import numpy as np

from .simplex import as_simplex_point
from .spectral import SpectralMeasure


@dataclass(frozen=True)
class RngStream:
    """Seed plus replicate index, mapped to an independent PRNG stream."""

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        return np.random.default_rng([int(self.seed), int(self.stream)])


@dataclass(frozen=True)
class AsymmetricLogisticParams:
    """Parameters (alpha, theta, phi, psi) of the trivariate model.

    alpha in (0, 1] controls dependence (1 = independence); theta and phi
    weight the three cyclic pairs {1,2}, {2,3}, {3,1}; psi weights the
    triple.  Each margin keeps 1 - theta - phi - psi on its singleton, so
    the weights per margin sum to one.
    """

    alpha: float
    theta: float = 0.0
    phi: float = 0.0
    psi: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")
        for name in ("theta", "phi", "psi"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.theta + self.phi + self.psi > 1.0 + 1e-12:
            raise ValueError("theta + phi + psi must not exceed 1")

    @property
    def singleton(self) -> float:
        return max(1.0 - self.theta - self.phi - self.psi, 0.0)


def asy_logistic_pickands(params: AsymmetricLogisticParams, w) -> float:
    """Dependence function of the trivariate asymmetric logistic model."""
    w = as_simplex_point(w, 3)
    return float(asy_logistic_pickands_batch(params, w[None, :])[0])


def asy_logistic_pickands_batch(params: AsymmetricLogisticParams, nodes) -> np.ndarray:
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 2 or nodes.shape[1] != 3:
        raise ValueError("the asymmetric logistic model is trivariate")
    a = 1.0 / params.alpha
    th = params.theta**a
    ph = params.phi**a
    wa = nodes**a
    pairs = (
        (th * wa[:, 0] + ph * wa[:, 1]) ** params.alpha
        + (th * wa[:, 1] + ph * wa[:, 2]) ** params.alpha
        + (th * wa[:, 2] + ph * wa[:, 0]) ** params.alpha
    )
    triple = params.psi * wa.sum(axis=1) ** params.alpha
    return pairs + triple + params.singleton


def sample_positive_stable(alpha: float, rng: RngStream, size: int | None = None):
    """Positive stable draws with Laplace transform exp(-t^alpha).

    Uses the single-uniform-plus-exponential transformation; alpha = 1 is
    the degenerate point mass at 1.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    gen = rng.generator()
    return _positive_stable(alpha, gen, size)


def _positive_stable(alpha: float, gen: np.random.Generator, size):
    shape = () if size is None else (size,)
    if alpha == 1.0:
        out = np.ones(shape)
        return float(out) if size is None else out
    u = gen.uniform(0.0, math.pi, size=shape)
    w = gen.standard_exponential(size=shape)
    s = (np.sin((1.0 - alpha) * u) / w) ** ((1.0 - alpha) / alpha) * np.sin(
        alpha * u
    ) / np.sin(u) ** (1.0 / alpha)
    return float(s) if size is None else s


def sample_symmetric_logistic_frechet(
    alpha: float, k: int, rng: RngStream, size: int = 1
) -> np.ndarray:
    """(size, k) symmetric-logistic max-stable draws, unit Frechet margins.

    One stable mixing variable per row, shared across components:
    Z_j = (S / E_j)^alpha with E_j iid unit exponential.
    """
    if k < 1:
        raise ValueError("component count must be >= 1")
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    gen = rng.generator()
    return _symmetric_logistic(alpha, k, gen, size)


def _symmetric_logistic(alpha, k, gen, size) -> np.ndarray:
    e = gen.standard_exponential(size=(size, k))
    if alpha == 1.0:
        return 1.0 / e
    s = _positive_stable(alpha, gen, size)
    return (s[:, None] / e) ** alpha


# subset decomposition of the trivariate model: (members, per-margin weights)
_PAIR_SUBSETS = (((0, 1), ("theta", "phi")), ((1, 2), ("theta", "phi")), ((2, 0), ("theta", "phi")))


def sample_asy_logistic(
    params: AsymmetricLogisticParams, n: int, rng: RngStream
) -> np.ndarray:
    """(n, 3) draws from the trivariate asymmetric logistic model.

    Max-mixture construction: each subset with positive weight draws an
    independent symmetric-logistic vector over its members, scaled by the
    per-margin weights; the components are componentwise maxima.  The
    resulting dependence function is ``asy_logistic_pickands``.  Subsets
    with zero weight are skipped (no random numbers are consumed for
    them).
    """
    if n < 1:
        raise ValueError("sample size must be >= 1")
    gen = rng.generator()
    x = np.zeros((n, 3))
    for (members, weight_names) in _PAIR_SUBSETS:
        weights = [getattr(params, nm) for nm in weight_names]
        if all(wt == 0.0 for wt in weights):
            continue
        z = _symmetric_logistic(params.alpha, 2, gen, n)
        for pos, (j, wt) in enumerate(zip(members, weights)):
            if wt > 0.0:
                np.maximum(x[:, j], wt * z[:, pos], out=x[:, j])
    if params.psi > 0.0:
        z = _symmetric_logistic(params.alpha, 3, gen, n)
        np.maximum(x, params.psi * z, out=x)
    if params.singleton > 0.0:
        f = 1.0 / gen.standard_exponential(size=(n, 3))
        np.maximum(x, params.singleton * f, out=x)
    return x


def sample_max_linear(measure: SpectralMeasure, n: int, rng: RngStream) -> np.ndarray:
    """(n, p) max-linear draws realizing a discrete spectral measure.

    X_j = max_v h_v * v_j * F_v with one independent unit Frechet F_v per
    atom; the tail dependence function is exactly the measure's and the
    moment constraints make every margin unit Frechet.
    """
    if n < 1:
        raise ValueError("sample size must be >= 1")
    gen = rng.generator()
    scale = measure.masses[:, None] * measure.points  # (K, p)
    k = len(measure)
    out = np.empty((n, measure.p))
    chunk = max(1, 2_000_000 // max(k, 1))
    for s in range(0, n, chunk):
        rows = min(chunk, n - s)
        f = 1.0 / gen.standard_exponential(size=(rows, k))
        out[s : s + rows] = np.max(f[:, :, None] * scale[None, :, :], axis=1)
    return out
