# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled 2-D OS-CFAR window scan (hot kernel of the Monte-Carlo runs)."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef double _kth_smallest(double* a, Py_ssize_t n, Py_ssize_t k) noexcept nogil:
    """k-th (0-based) order statistic of a[:n] via in-place quickselect."""
    cdef Py_ssize_t lo = 0, hi = n - 1, i, j, mid
    cdef double pivot, t
    while lo < hi:
        mid = lo + (hi - lo) // 2
        # median-of-three pivot, sorted into place
        if a[mid] < a[lo]:
            t = a[lo]; a[lo] = a[mid]; a[mid] = t
        if a[hi] < a[lo]:
            t = a[lo]; a[lo] = a[hi]; a[hi] = t
        if a[hi] < a[mid]:
            t = a[mid]; a[mid] = a[hi]; a[hi] = t
        pivot = a[mid]
        i = lo
        j = hi
        while i <= j:
            while a[i] < pivot:
                i += 1
            while a[j] > pivot:
                j -= 1
            if i <= j:
                t = a[i]; a[i] = a[j]; a[j] = t
                i += 1
                j -= 1
        if k <= j:
            hi = j
        elif k >= i:
            lo = i
        else:
            return a[k]
    return a[k]


def cfar_scan(double[:, ::1] power, int g_l, int g_k, int t_l, int t_k,
              Py_ssize_t order_k, double alpha):
    """OS-CFAR threshold map and guard-region local-max flags.

    Per cell: threshold = alpha * (order_k-th smallest training power in
    the 2-D window excluding the guard box), circular wrap at map edges;
    the flag marks cells >= every neighbour inside the guard box.
    Returns (threshold, local_max) as float64 / uint8 arrays.
    """
    cdef Py_ssize_t m = power.shape[0]
    cdef Py_ssize_t n = power.shape[1]
    cdef Py_ssize_t wl = g_l + t_l
    cdef Py_ssize_t wk = g_k + t_k
    cdef Py_ssize_t nwin = (2 * wl + 1) * (2 * wk + 1) - (2 * g_l + 1) * (2 * g_k + 1)
    cdef Py_ssize_t nguard = (2 * g_l + 1) * (2 * g_k + 1) - 1

    # training and guard offsets enumerated once
    train_np = np.array([(dl, dk)
                         for dl in range(-wl, wl + 1)
                         for dk in range(-wk, wk + 1)
                         if abs(dl) > g_l or abs(dk) > g_k], dtype=np.intp)
    guard_np = np.array([(dl, dk)
                         for dl in range(-g_l, g_l + 1)
                         for dk in range(-g_k, g_k + 1)
                         if (dl, dk) != (0, 0)], dtype=np.intp).reshape(nguard, 2)
    # wrap lookup tables avoid per-element modulo; numpy keeps the
    # Python (non-negative) modulo semantics that cdivision would break
    row_np = np.mod(np.arange(m + 2 * wl) - wl, m).astype(np.intp)
    col_np = np.mod(np.arange(n + 2 * wk) - wk, n).astype(np.intp)

    cdef Py_ssize_t[:, ::1] train = train_np
    cdef Py_ssize_t[:, ::1] guard = guard_np
    cdef Py_ssize_t[::1] row_map = row_np
    cdef Py_ssize_t[::1] col_map = col_np

    thr_arr = np.empty((m, n), dtype=np.float64)
    max_arr = np.empty((m, n), dtype=np.uint8)
    scratch_arr = np.empty(nwin, dtype=np.float64)
    cdef double[:, ::1] thr = thr_arr
    cdef unsigned char[:, ::1] ismax = max_arr
    cdef double[::1] scratch = scratch_arr
    cdef Py_ssize_t l, k, w, ll, kk
    cdef double cut
    cdef bint flag
    with nogil:
        for l in range(m):
            for k in range(n):
                cut = power[l, k]
                for w in range(nwin):
                    ll = row_map[l + train[w, 0] + wl]
                    kk = col_map[k + train[w, 1] + wk]
                    scratch[w] = power[ll, kk]
                thr[l, k] = alpha * _kth_smallest(&scratch[0], nwin, order_k - 1)
                flag = 1
                for w in range(nguard):
                    ll = row_map[l + guard[w, 0] + wl]
                    kk = col_map[k + guard[w, 1] + wk]
                    if power[ll, kk] > cut:
                        flag = 0
                        break
                ismax[l, k] = flag
    return thr_arr, max_arr
