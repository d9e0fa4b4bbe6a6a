import numpy as np
import pytest

from pickands.spectral import SpectralMeasure


def random_spectral_measure(p, rng, n_atoms=8) -> SpectralMeasure:
    """Random discrete measure satisfying the moment constraints exactly.

    Random interior atoms are scaled until every moment is <= 1 and the
    deficits are absorbed by vertex masses, the standard way of making an
    arbitrary nonnegative atom cloud into a valid measure.
    """
    points = rng.dirichlet(np.ones(p), size=n_atoms)
    masses = rng.uniform(0.1, 1.0, n_atoms)
    moments = masses @ points
    masses = masses / moments.max()
    vertex_mass = np.maximum(1.0 - masses @ points, 0.0)
    return SpectralMeasure(
        p=p,
        points=np.vstack([points, np.eye(p)]),
        masses=np.concatenate([masses, vertex_mass]),
    )


def random_feasible_masses(grid, rng) -> np.ndarray:
    """Random feasible point of the projection polytope on ``grid``."""
    masses = rng.uniform(0.0, 1.0, len(grid))
    moments = masses @ grid.points
    masses = masses / max(moments.max(), 1e-12)
    h = masses.copy()
    deficits = 1.0 - h @ grid.points
    h[grid.vertex_indices()] += np.maximum(deficits, 0.0)
    return h


@pytest.fixture
def rng():
    return np.random.default_rng(20240814)
