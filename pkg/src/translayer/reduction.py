"""Deterministic reductions.

Every energy total in the package is reduced with :func:`tree_sum`, a strict
balanced binary tree evaluated with vectorized passes. The tree shape depends
only on the element count, never on threading or BLAS blocking, so totals are
bit-stable run to run and across ``--threads`` settings.
"""

from __future__ import annotations

import numpy as np


def tree_sum(values: np.ndarray) -> float:
    """Sum a float array in a fixed balanced-tree order.

    The array is zero-padded to the next power of two (adding 0.0 is exact)
    and adjacent pairs are combined until one value remains.
    """
    a = np.asarray(values, dtype=np.float64).ravel()
    n = a.size
    if n == 0:
        return 0.0
    if n == 1:
        return float(a[0])
    p = 1 << (n - 1).bit_length()
    buf = np.zeros(p, dtype=np.float64)
    buf[:n] = a
    while buf.size > 1:
        buf = buf[0::2] + buf[1::2]
    return float(buf[0])
