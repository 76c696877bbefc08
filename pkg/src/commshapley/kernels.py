"""Backend selection for the dispatch and rainflow kernels.

The compiled ``_core`` extension is preferred. Setting the environment variable
``COMMSHAPLEY_PURE_PYTHON=1`` before import forces the Python fallback.
"""

import os

from . import _pycore

python_dispatch = _pycore.dispatch
python_rainflow = _pycore.rainflow

try:
    if os.environ.get("COMMSHAPLEY_PURE_PYTHON"):
        raise ImportError("pure-Python backend requested")
    from . import _core
except ImportError:
    _core = None

if _core is not None:
    BACKEND = "compiled"
    compiled_dispatch = _core.dispatch
    compiled_rainflow = _core.rainflow
    dispatch = _core.dispatch
    rainflow = _core.rainflow
else:
    BACKEND = "python"
    compiled_dispatch = None
    compiled_rainflow = None
    dispatch = _pycore.dispatch
    rainflow = _pycore.rainflow

__all__ = ["BACKEND", "dispatch", "rainflow"]
