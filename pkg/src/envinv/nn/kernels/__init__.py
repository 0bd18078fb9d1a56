"""Conv kernel backend selection.

The compiled extension is used when importable; set ENVINV_FORCE_NUMPY=1 to
pin the numpy path (used by tests and the benchmark to compare both).  Both
backends implement the identical contract and are cross-checked in tests.
"""
from __future__ import annotations

import os

import numpy as np

from . import numpy_backend

BACKEND = "numpy"
_fwd = numpy_backend.conv1d_forward
_bwd = numpy_backend.conv1d_backward

if os.environ.get("ENVINV_FORCE_NUMPY") != "1":
    try:
        from . import _ckernels  # type: ignore[attr-defined]
    except ImportError:
        pass
    else:
        BACKEND = "compiled"
        _fwd = _ckernels.conv1d_forward
        _bwd = _ckernels.conv1d_backward


def conv1d_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray, dilation: int) -> np.ndarray:
    return np.asarray(
        _fwd(
            np.ascontiguousarray(x, dtype=np.float64),
            np.ascontiguousarray(w, dtype=np.float64),
            np.ascontiguousarray(b, dtype=np.float64),
            dilation,
        )
    )


def conv1d_backward(
    x: np.ndarray, w: np.ndarray, gy: np.ndarray, dilation: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    gx, gw, gb = _bwd(
        np.ascontiguousarray(x, dtype=np.float64),
        np.ascontiguousarray(w, dtype=np.float64),
        np.ascontiguousarray(gy, dtype=np.float64),
        dilation,
    )
    return np.asarray(gx), np.asarray(gw), np.asarray(gb)
