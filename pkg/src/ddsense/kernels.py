"""OS-CFAR window scan with a compiled core and a pure-numpy fallback.

The compiled extension is picked at import when available; callers can
force either path with ``backend=``.  Both produce bit-identical output
(the order statistic of a window is the same value either way), which
``tests/test_kernels.py`` asserts and ``scripts/benchmark_kernels.py``
times.
"""

import numpy as np

from .exceptions import WindowTooLarge

try:
    from . import _cfar_core
except ImportError:  # pragma: no cover - build without a compiler
    _cfar_core = None

HAVE_COMPILED = _cfar_core is not None
DEFAULT_BACKEND = "compiled" if HAVE_COMPILED else "numpy"


def _validate(power, g_l, g_k, t_l, t_k, order_k):
    m, n = power.shape
    if 2 * (g_l + t_l) + 1 > m or 2 * (g_k + t_k) + 1 > n:
        raise WindowTooLarge(
            f"window {2*(g_l+t_l)+1}x{2*(g_k+t_k)+1} exceeds map {m}x{n}")
    nwin = (2 * (g_l + t_l) + 1) * (2 * (g_k + t_k) + 1) \
        - (2 * g_l + 1) * (2 * g_k + 1)
    if not 1 <= order_k <= nwin:
        raise ValueError(f"order statistic rank {order_k} outside [1, {nwin}]")


def _cfar_scan_numpy(power, g_l, g_k, t_l, t_k, order_k, alpha):
    m, n = power.shape
    train_offsets = [(dl, dk)
                     for dl in range(-(g_l + t_l), g_l + t_l + 1)
                     for dk in range(-(g_k + t_k), g_k + t_k + 1)
                     if abs(dl) > g_l or abs(dk) > g_k]
    stack = np.empty((len(train_offsets), m, n))
    for w, (dl, dk) in enumerate(train_offsets):
        stack[w] = np.roll(power, (-dl, -dk), axis=(0, 1))
    noise = np.partition(stack, order_k - 1, axis=0)[order_k - 1]
    guard_offsets = [(dl, dk)
                     for dl in range(-g_l, g_l + 1)
                     for dk in range(-g_k, g_k + 1)
                     if (dl, dk) != (0, 0)]
    if guard_offsets:
        neigh = np.stack([np.roll(power, (-dl, -dk), axis=(0, 1))
                          for dl, dk in guard_offsets])
        local_max = np.all(power >= neigh, axis=0)
    else:
        local_max = np.ones((m, n), dtype=bool)
    return alpha * noise, local_max.astype(np.uint8)


def cfar_scan(power, g_l, g_k, t_l, t_k, order_k, alpha, backend="auto"):
    """Return ``(threshold, local_max)`` for a real power map.

    ``threshold[l, k]`` is alpha times the ``order_k``-th smallest power
    in the training ring around (l, k) (guard box excluded, circular
    wrap); ``local_max[l, k]`` is 1 when the cell is >= every neighbour
    inside its guard box.
    """
    power = np.ascontiguousarray(power, dtype=np.float64)
    if power.ndim != 2:
        raise ValueError("power map must be 2-D")
    _validate(power, g_l, g_k, t_l, t_k, order_k)
    if backend == "auto":
        backend = DEFAULT_BACKEND
    if backend == "compiled":
        if not HAVE_COMPILED:
            raise RuntimeError("compiled CFAR kernel is not available")
        return _cfar_core.cfar_scan(power, g_l, g_k, t_l, t_k, order_k, alpha)
    if backend == "numpy":
        return _cfar_scan_numpy(power, g_l, g_k, t_l, t_k, order_k, alpha)
    raise ValueError(f"unknown backend {backend!r}")
