"""Hot kernel: weighted size of a union of precomputed cell-index lists.

Coverage values are evaluated millions of times per experiment, so the
union-and-sum loop is JIT-compiled with numba when available. Setting the
environment variable ``RESCOVER_NO_NUMBA=1`` (or anything non-empty other
than ``0``) forces the pure-numpy fallback. Both paths are deterministic
for equal inputs; they are not guaranteed bit-identical to *each other*
(different accumulation orders), so a process should stick to one backend.

See ``benchmarks/bench_kernels.py`` for a numba-vs-numpy comparison.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - image always ships numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap


def numba_disabled_by_env() -> bool:
    return os.environ.get("RESCOVER_NO_NUMBA", "") not in ("", "0")


USE_NUMBA = HAVE_NUMBA and not numba_disabled_by_env()


@njit(cache=True)
def _union_value_jit(starts, cells, weights, ids, scratch):
    # scratch is a zeroed uint8 buffer of length len(weights); it is
    # restored to all-zero before returning.
    total = 0.0
    for t in range(ids.shape[0]):
        a = ids[t]
        for k in range(starts[a], starts[a + 1]):
            c = cells[k]
            if scratch[c] == 0:
                scratch[c] = 1
                total += weights[c]
    for t in range(ids.shape[0]):
        a = ids[t]
        for k in range(starts[a], starts[a + 1]):
            scratch[cells[k]] = 0
    return total


def _union_value_numpy(starts, cells, weights, ids, scratch):
    parts = [cells[starts[a] : starts[a + 1]] for a in ids]
    covered = np.unique(np.concatenate(parts))
    return float(weights[covered].sum())


def union_value(starts, cells, weights, ids, scratch, use_numba: bool | None = None) -> float:
    """Sum of ``weights`` over the union of the cell lists selected by ``ids``.

    ``starts``/``cells`` form a concatenated (CSR-style) layout: the cells of
    list ``a`` are ``cells[starts[a]:starts[a+1]]``.
    """
    if ids.shape[0] == 0:
        return 0.0
    if use_numba is None:
        use_numba = USE_NUMBA
    if use_numba:
        return float(_union_value_jit(starts, cells, weights, ids, scratch))
    return _union_value_numpy(starts, cells, weights, ids, scratch)
