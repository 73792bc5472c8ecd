"""Backend selection for the hot loops.

The compiled ``_kernels`` extension is used when it was built; otherwise (or
when ``ELO_ARENA_PURE_PYTHON=1``) the numpy fallback in ``_kernels_py`` is.
"""

import os

from . import _kernels_py as python_backend

compiled_backend = None
if os.environ.get("ELO_ARENA_PURE_PYTHON") != "1":
    try:
        from . import _kernels as compiled_backend
    except ImportError:
        compiled_backend = None

_impl = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "cython" if compiled_backend is not None else "python"

elo_walk = _impl.elo_walk
elo_batch_delta = _impl.elo_batch_delta
group_advantages = _impl.group_advantages
clipped_surrogate = _impl.clipped_surrogate
inverse_cdf_sample = _impl.inverse_cdf_sample
