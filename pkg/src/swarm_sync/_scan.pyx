# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-tick swarm scan; semantics match ``_scan_py.swarm_scan``."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef inline Py_ssize_t _find(Py_ssize_t[::1] parent, Py_ssize_t i) noexcept nogil:
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


def swarm_scan(const double[:, :, ::1] pos,
               const cnp.uint8_t[:, ::1] in_sync,
               const cnp.int64_t[:, ::1] number,
               const cnp.int64_t[:, ::1] phase,
               double radius, cnp.int64_t period, bint check_address):
    cdef Py_ssize_t T = in_sync.shape[0]
    cdef Py_ssize_t n = in_sync.shape[1]
    labels_arr = np.full((T, n), -1, dtype=np.int32)
    disp_arr = np.full((T, n), -1, dtype=np.int64)
    count_arr = np.zeros(T, dtype=np.int32)
    pending_arr = np.zeros((T, n), dtype=np.uint8)
    cdef cnp.int32_t[:, ::1] labels = labels_arr
    cdef cnp.int64_t[:, ::1] disp = disp_arr
    cdef cnp.int32_t[::1] count = count_arr
    cdef cnp.uint8_t[:, ::1] pending = pending_arr
    cdef Py_ssize_t[::1] parent = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t[::1] size = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t[::1] root_label = np.empty(n, dtype=np.intp)
    cdef double r2 = radius * radius
    cdef double dx, dy
    cdef Py_ssize_t t, i, j, a, b, c
    cdef cnp.int64_t d
    cdef bint near, audible

    with nogil:
        for t in range(T):
            for i in range(n):
                parent[i] = i
                size[i] = 1
                root_label[i] = -1
            for i in range(n):
                for j in range(i + 1, n):
                    dx = pos[t, j, 0] - pos[t, i, 0]
                    dy = pos[t, j, 1] - pos[t, i, 1]
                    near = dx * dx + dy * dy <= r2
                    if not near:
                        continue
                    audible = (not check_address) or number[t, i] != number[t, j]
                    if not audible:
                        continue
                    if in_sync[t, i] and in_sync[t, j]:
                        a = _find(parent, i)
                        b = _find(parent, j)
                        if a != b:
                            if a < b:
                                parent[b] = a
                                size[a] += size[b]
                            else:
                                parent[a] = b
                                size[b] += size[a]
                    elif in_sync[t, i]:
                        pending[t, j] = 1
                    elif in_sync[t, j]:
                        pending[t, i] = 1
            c = 0
            for i in range(n):
                a = _find(parent, i)
                if size[a] < 2:
                    continue
                if root_label[a] < 0:
                    root_label[a] = c
                    c += 1
                labels[t, i] = <cnp.int32_t>root_label[a]
            count[t] = <cnp.int32_t>c
            for i in range(n):
                if labels[t, i] < 0:
                    continue
                for j in range(i + 1, n):
                    if labels[t, j] != labels[t, i]:
                        continue
                    d = phase[t, i] - phase[t, j]
                    if d < 0:
                        d = -d
                    d = d % period
                    if period - d < d:
                        d = period - d
                    if d > disp[t, labels[t, i]]:
                        disp[t, labels[t, i]] = d
    return labels_arr, disp_arr, count_arr, pending_arr
