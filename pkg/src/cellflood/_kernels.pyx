# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled flooding kernels: regional-minima labeling and priority-queue
watershed flooding.  Semantics are pinned to ``_kernels_py.py``; keep the
two in lockstep.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

ctypedef cnp.float64_t f64
ctypedef cnp.int64_t i64
ctypedef cnp.int32_t i32


cdef struct Heap:
    f64* prio
    i64* seq
    i64* pos
    i32* lab
    i64 size


cdef inline bint _less(Heap* h, i64 a, i64 b) noexcept nogil:
    if h.prio[a] != h.prio[b]:
        return h.prio[a] < h.prio[b]
    return h.seq[a] < h.seq[b]


cdef inline void _swap(Heap* h, i64 a, i64 b) noexcept nogil:
    cdef f64 tp = h.prio[a]
    cdef i64 ts = h.seq[a]
    cdef i64 tq = h.pos[a]
    cdef i32 tl = h.lab[a]
    h.prio[a] = h.prio[b]; h.seq[a] = h.seq[b]; h.pos[a] = h.pos[b]; h.lab[a] = h.lab[b]
    h.prio[b] = tp; h.seq[b] = ts; h.pos[b] = tq; h.lab[b] = tl


cdef inline void _heap_push(Heap* h, f64 prio, i64 seq, i64 pos, i32 lab) noexcept nogil:
    cdef i64 i = h.size
    cdef i64 parent
    h.prio[i] = prio; h.seq[i] = seq; h.pos[i] = pos; h.lab[i] = lab
    h.size += 1
    while i > 0:
        parent = (i - 1) >> 1
        if _less(h, i, parent):
            _swap(h, i, parent)
            i = parent
        else:
            break


cdef inline void _heap_pop(Heap* h) noexcept nogil:
    # root must already have been read out
    cdef i64 i = 0, child
    h.size -= 1
    if h.size == 0:
        return
    _swap(h, 0, h.size)
    while True:
        child = 2 * i + 1
        if child >= h.size:
            break
        if child + 1 < h.size and _less(h, child + 1, child):
            child += 1
        if _less(h, child, i):
            _swap(h, i, child)
            i = child
        else:
            break


def regional_minima(cnp.ndarray[f64, ndim=2] elev):
    """Label 8-connected minima plateaus 1..n in raster order of first pixel."""
    cdef i64 h = elev.shape[0]
    cdef i64 w = elev.shape[1]
    cdef i64 wp = w + 2
    if h == 0 or w == 0:
        return np.zeros((h, w), dtype=np.int32), 0

    padded = np.pad(np.asarray(elev, dtype=np.float64), 1, constant_values=np.inf)
    cdef f64[::1] flat = padded.ravel()
    labels_arr = np.zeros((h + 2) * wp, dtype=np.int32)
    cdef i32[::1] labels = labels_arr
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] non_min = np.zeros((h + 2) * wp, dtype=np.uint8)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] is_min = np.zeros((h + 2) * wp, dtype=np.uint8)
    cdef cnp.ndarray[i64, ndim=1] queue = np.empty(h * w, dtype=np.int64)

    cdef i64[8] off
    off[0] = -wp - 1; off[1] = -wp; off[2] = -wp + 1; off[3] = -1
    off[4] = 1; off[5] = wp - 1; off[6] = wp; off[7] = wp + 1

    cdef i64 y, x, p, q, k, head, tail
    cdef f64 v
    cdef bint lower
    cdef i32 n = 0

    with nogil:
        # seed the plateau spread with pixels that have a lower neighbor
        head = 0
        tail = 0
        for y in range(1, h + 1):
            for x in range(1, w + 1):
                p = y * wp + x
                v = flat[p]
                lower = False
                for k in range(8):
                    if flat[p + off[k]] < v:
                        lower = True
                        break
                if lower:
                    non_min[p] = 1
                    queue[tail] = p
                    tail += 1
        while head < tail:
            p = queue[head]
            head += 1
            v = flat[p]
            for k in range(8):
                q = p + off[k]
                if non_min[q] == 0 and flat[q] == v:
                    non_min[q] = 1
                    queue[tail] = q
                    tail += 1
        for y in range(1, h + 1):
            for x in range(1, w + 1):
                p = y * wp + x
                if non_min[p] == 0:
                    is_min[p] = 1

        # connected components over minima pixels
        for y in range(1, h + 1):
            for x in range(1, w + 1):
                p = y * wp + x
                if is_min[p] == 1 and labels[p] == 0:
                    n += 1
                    labels[p] = n
                    head = 0
                    tail = 0
                    queue[tail] = p
                    tail += 1
                    while head < tail:
                        q = queue[head]
                        head += 1
                        for k in range(8):
                            if is_min[q + off[k]] == 1 and labels[q + off[k]] == 0:
                                labels[q + off[k]] = n
                                queue[tail] = q + off[k]
                                tail += 1

    out = labels_arr.reshape(h + 2, wp)[1:-1, 1:-1].copy()
    return out, int(n)


def flood(cnp.ndarray[f64, ndim=2] elev, cnp.ndarray[i32, ndim=2] seeds):
    """Priority-queue flood from seeds; contested pixels become ridges (0)."""
    cdef i64 h = elev.shape[0]
    cdef i64 w = elev.shape[1]
    cdef i64 wp = w + 2
    cdef i64 n_flat = (h + 2) * wp
    if h == 0 or w == 0:
        return np.zeros((h, w), dtype=np.int32)

    padded = np.pad(np.asarray(elev, dtype=np.float64), 1, constant_values=np.inf)
    cdef f64[::1] flat = padded.ravel()
    labels_pad = np.zeros((h + 2, wp), dtype=np.int32)
    labels_pad[1:-1, 1:-1] = seeds
    labels_arr = labels_pad.ravel()
    cdef i32[::1] labels = labels_arr
    in_queue_arr = np.ones(n_flat, dtype=np.uint8)
    in_queue_arr.reshape(h + 2, wp)[1:-1, 1:-1] = 0
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] in_queue = in_queue_arr
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] ridge = np.zeros(n_flat, dtype=np.uint8)

    cdef cnp.ndarray[f64, ndim=1] hp = np.empty(h * w, dtype=np.float64)
    cdef cnp.ndarray[i64, ndim=1] hs = np.empty(h * w, dtype=np.int64)
    cdef cnp.ndarray[i64, ndim=1] hq = np.empty(h * w, dtype=np.int64)
    cdef cnp.ndarray[i32, ndim=1] hl = np.empty(h * w, dtype=np.int32)
    cdef Heap heap
    heap.prio = &hp[0]
    heap.seq = &hs[0]
    heap.pos = &hq[0]
    heap.lab = &hl[0]
    heap.size = 0

    cdef i64[8] off
    off[0] = -wp - 1; off[1] = -wp; off[2] = -wp + 1; off[3] = -1
    off[4] = 1; off[5] = wp - 1; off[6] = wp; off[7] = wp + 1

    cdef i64 y, x, p, q, k, seq = 0
    cdef i32 lab, first, l2
    cdef bint contested

    with nogil:
        for y in range(1, h + 1):
            for x in range(1, w + 1):
                p = y * wp + x
                lab = labels[p]
                if lab > 0:
                    in_queue[p] = 1
                    for k in range(8):
                        q = p + off[k]
                        if labels[q] == 0 and in_queue[q] == 0:
                            in_queue[q] = 1
                            _heap_push(&heap, flat[q], seq, q, lab)
                            seq += 1

        while heap.size > 0:
            p = heap.pos[0]
            lab = heap.lab[0]
            _heap_pop(&heap)

            first = 0
            contested = False
            for k in range(8):
                l2 = labels[p + off[k]]
                if l2 > 0:
                    if first == 0:
                        first = l2
                    elif l2 != first:
                        contested = True
                        break
            if contested:
                ridge[p] = 1
                continue
            labels[p] = lab
            for k in range(8):
                q = p + off[k]
                if labels[q] == 0 and in_queue[q] == 0 and ridge[q] == 0:
                    in_queue[q] = 1
                    _heap_push(&heap, flat[q], seq, q, lab)
                    seq += 1

    return labels_arr.reshape(h + 2, wp)[1:-1, 1:-1].copy()
