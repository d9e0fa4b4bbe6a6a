"""Backend selection for the hot numeric kernels.

The package ships two implementations of its inner loops: numba-jitted
loops (default) and a vectorized pure-numpy path.  Set the environment
variable ``PICKANDS_DISABLE_NUMBA=1`` before import to force the numpy
path; it is also used automatically when numba is not importable.
"""

import os

ENV_FLAG = "PICKANDS_DISABLE_NUMBA"


def _env_disabled() -> bool:
    return os.environ.get(ENV_FLAG, "").strip().lower() in {"1", "true", "yes", "on"}


try:
    import numba  # noqa: F401

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    NUMBA_AVAILABLE = False

USE_NUMBA = NUMBA_AVAILABLE and not _env_disabled()


def backend_name() -> str:
    """Name of the kernel backend active in this process."""
    return "numba" if USE_NUMBA else "numpy"
