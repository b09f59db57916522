"""Kernel backend selection.

The compiled extension is used when it was built and importable; otherwise
the numpy implementations take over. Setting ``QSURFACE_PURE_PYTHON=1``
forces the fallback.
"""
import os

from . import _kernels_py

if os.environ.get("QSURFACE_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels_c as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND
qsnn_loss_grad = _impl.qsnn_loss_grad
adam_update = _impl.adam_update
crps_piecewise = _impl.crps_piecewise


def backends():
    """Every importable backend module, fallback first."""
    found = [_kernels_py]
    try:
        from . import _kernels_c
    except ImportError:
        pass
    else:
        found.append(_kernels_c)
    return found
