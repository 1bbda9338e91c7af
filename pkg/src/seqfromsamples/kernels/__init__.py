"""Bulk kernels, compiled when available.

``BACKEND`` is ``"cython"`` or ``"python"``.  Set ``SEQFS_PURE_PYTHON=1`` to
force the numpy fallback.
"""
import os

from . import _pykernels

pykernels = _pykernels
ckernels = None
if not os.environ.get("SEQFS_PURE_PYTHON"):
    try:
        from . import _ckernels as ckernels
    except ImportError:
        ckernels = None

import numpy as np

_impl = ckernels if ckernels is not None else _pykernels
BACKEND = "cython" if ckernels is not None else "python"


def eval_affinity_batch(A, scales, seqs, lengths):
    """F for every padded sequence row, given stacked affinities ``(k, C, n)``."""
    return _impl.eval_affinity_batch(
        np.ascontiguousarray(A, dtype=np.float64),
        np.ascontiguousarray(scales, dtype=np.float64),
        np.ascontiguousarray(seqs, dtype=np.int64),
        np.ascontiguousarray(lengths, dtype=np.int64))


def accumulate_buckets(seqs, lengths, phi, n, k):
    """Per-bucket sums and counts, accumulated in record order."""
    return _impl.accumulate_buckets(
        np.ascontiguousarray(seqs, dtype=np.int64),
        np.ascontiguousarray(lengths, dtype=np.int64),
        np.ascontiguousarray(phi, dtype=np.float64), int(n), int(k))

__all__ = ["BACKEND", "eval_affinity_batch", "accumulate_buckets", "ckernels", "pykernels"]
