"""Select the compiled kernels when available, else the numpy fallback.

Set ``QHGEO_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py as python_kernels

compiled_kernels = None
if os.environ.get("QHGEO_PURE_PYTHON", "") in ("", "0"):
    try:
        from . import _kernels as compiled_kernels
    except ImportError:  # extension not built
        compiled_kernels = None

kernels = compiled_kernels if compiled_kernels is not None else python_kernels
BACKEND = "cython" if compiled_kernels is not None else "python"

BALL = python_kernels.BALL
HALFSPACE = python_kernels.HALFSPACE


def model_code(model: str) -> int:
    if model == "ball":
        return BALL
    if model == "halfspace":
        return HALFSPACE
    raise ValueError(f"unknown model {model!r}; expected 'ball' or 'halfspace'")
