"""Active kernel backend (numba by default, numpy via env flag)."""

from . import _accel
from ._accel import backend_name
from ._kernels_numpy import QP_MAX_ITER, QP_OPTIMAL

if _accel.USE_NUMBA:
    from ._kernels_numba import qp_active_set, raw_surfaces
else:
    from ._kernels_numpy import qp_active_set, raw_surfaces

__all__ = [
    "QP_MAX_ITER",
    "QP_OPTIMAL",
    "backend_name",
    "qp_active_set",
    "raw_surfaces",
]
