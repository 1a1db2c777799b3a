"""Backend selection for the batched small-matrix kernels.

The compiled extension (:mod:`slocc3._ckernels`) is preferred when it is
importable; setting the environment variable ``SLOCC3_PURE`` (to anything
non-empty) forces the vectorized numpy fallback.  Both backends expose the
same four functions; ``benchmarks/bench_kernels.py`` compares them.
"""

import os

from slocc3 import _pykernels

if os.environ.get("SLOCC3_PURE"):
    _impl = _pykernels
else:
    try:
        from slocc3 import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = _impl.BACKEND
batch_det3 = _impl.batch_det3
batch_singvals3 = _impl.batch_singvals3
batch_eigvals3 = _impl.batch_eigvals3
batch_cubic_roots = _impl.batch_cubic_roots


def kernel_backend():
    """Name of the active kernel backend: ``"compiled"`` or ``"python"``."""
    return BACKEND
