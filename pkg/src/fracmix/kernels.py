"""Kernel selection.

The compiled ``_kernels`` extension is used when importable; otherwise the
pure-Python ``_kernels_py`` module. Set ``FRACMIX_PURE_PYTHON=1`` to force the
fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("FRACMIX_PURE_PYTHON"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

ml_eval = _impl.ml_eval
ml_eval_array = _impl.ml_eval_array
ml_series = _impl.ml_series
ml_contour = _impl.ml_contour
contour_params = _impl.contour_params
caputo_l1 = _impl.caputo_l1
l1_weights = _impl.l1_weights

__all__ = [
    "BACKEND",
    "caputo_l1",
    "contour_params",
    "l1_weights",
    "ml_contour",
    "ml_eval",
    "ml_eval_array",
    "ml_series",
]
