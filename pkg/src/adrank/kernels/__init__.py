"""Backend selection for the triplet backprop kernel.

Prefers the compiled Cython extension; falls back to the NumPy
implementation when the extension is missing or ADRANK_FORCE_PYTHON=1.
"""

import os

import numpy as np

from . import numpy_backend

_impl = numpy_backend
BACKEND = "numpy"

if os.environ.get("ADRANK_FORCE_PYTHON", "") != "1":
    try:
        from . import _ckern as _compiled

        _impl = _compiled
        BACKEND = "cython"
    except ImportError:
        pass


def backend_name() -> str:
    return BACKEND


def triplet_linear_grad(W, C, P, negs, offsets, beta):
    """See kernels.numpy_backend.triplet_linear_grad for the contract."""
    W = np.ascontiguousarray(W, dtype=np.float64)
    C = np.ascontiguousarray(C, dtype=np.float64)
    P = np.ascontiguousarray(P, dtype=np.float64)
    negs = np.ascontiguousarray(negs, dtype=np.float64).reshape(-1, W.shape[0])
    offsets = np.ascontiguousarray(offsets, dtype=np.int64)
    return _impl.triplet_linear_grad(W, C, P, negs, offsets, float(beta))
