"""Pure-Python flooding kernels; fallback when the compiled extension is
unavailable.  Must stay behaviorally identical to ``_kernels.pyx`` (the
equivalence is pinned by tests/test_kernels.py).

Both kernels work on a border-padded copy of the elevation map so neighbor
arithmetic never needs bounds checks: the one-pixel border has elevation
+inf and is flagged as already queued.
"""

from __future__ import annotations

import heapq
from collections import deque

import numpy as np

# 8-neighborhood in raster (row-major) order; determinism depends on it.
_NEIGHBOR_STEPS = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))


def _padded(elev: np.ndarray) -> tuple[np.ndarray, np.ndarray, int]:
    ep = np.pad(elev.astype(np.float64, copy=False), 1, constant_values=np.inf)
    offsets = np.array([dy * ep.shape[1] + dx for dy, dx in _NEIGHBOR_STEPS],
                       dtype=np.int64)
    return ep.ravel(), offsets, ep.shape[1]


def _interior_indices(h: int, w: int, wp: int) -> np.ndarray:
    rows = np.arange(1, h + 1, dtype=np.int64) * wp
    cols = np.arange(1, w + 1, dtype=np.int64)
    return (rows[:, None] + cols).ravel()


def regional_minima(elev: np.ndarray) -> tuple[np.ndarray, int]:
    """Label the regional minima of ``elev``.

    A regional minimum is an 8-connected plateau of equal values with no
    strictly lower 8-neighbor.  Plateaus are numbered 1..n in raster order
    of their first pixel; all other pixels get 0.
    """
    elev = np.asarray(elev, dtype=np.float64)
    h, w = elev.shape
    flat, offsets, wp = _padded(elev)
    interior = _interior_indices(h, w, wp)

    neigh = interior[:, None] + offsets[None, :]
    neigh_vals = flat[neigh]
    vals = flat[interior]
    has_lower = (neigh_vals < vals[:, None]).any(axis=1)

    # spread "not a minimum" across equal-valued plateaus
    non_min = np.zeros(flat.size, dtype=bool)
    non_min[interior[has_lower]] = True
    queue = deque(interior[has_lower].tolist())
    while queue:
        p = queue.popleft()
        v = flat[p]
        for off in offsets:
            q = p + off
            if not non_min[q] and flat[q] == v:
                non_min[q] = True
                queue.append(q)

    is_min = np.zeros(flat.size, dtype=bool)
    is_min[interior] = True
    is_min &= ~non_min

    # connected components over the minima, raster order of first pixel
    labels = np.zeros(flat.size, dtype=np.int32)
    n = 0
    for p in interior:
        if is_min[p] and labels[p] == 0:
            n += 1
            labels[p] = n
            queue = deque((p,))
            while queue:
                u = queue.popleft()
                for off in offsets:
                    q = u + off
                    if is_min[q] and labels[q] == 0:
                        labels[q] = n
                        queue.append(q)
    return labels.reshape(h + 2, w + 2)[1:-1, 1:-1].copy(), n


def flood(elev: np.ndarray, seeds: np.ndarray) -> np.ndarray:
    """Priority-flood ``elev`` from labeled ``seeds`` (0 = unseeded).

    The queue is ordered by (elevation, insertion sequence), so equal
    elevations drain FIFO.  A popped pixel adjacent to two different labels
    becomes a ridge pixel and keeps label 0; otherwise it takes the label of
    the front that enqueued it and extends that front.
    """
    elev = np.asarray(elev, dtype=np.float64)
    h, w = elev.shape
    flat, offsets, wp = _padded(elev)
    offs = offsets.tolist()

    labels = np.zeros(flat.size, dtype=np.int32)
    labels.reshape(h + 2, w + 2)[1:-1, 1:-1] = seeds
    in_queue = np.ones(flat.size, dtype=bool)
    in_queue.reshape(h + 2, w + 2)[1:-1, 1:-1] = False
    ridge = np.zeros(flat.size, dtype=bool)

    heap: list[tuple[float, int, int, int]] = []
    seq = 0
    for p in _interior_indices(h, w, wp):
        lab = labels[p]
        if lab > 0:
            in_queue[p] = True
            for off in offs:
                q = p + off
                if labels[q] == 0 and not in_queue[q]:
                    in_queue[q] = True
                    heapq.heappush(heap, (flat[q], seq, q, lab))
                    seq += 1

    while heap:
        _, _, p, lab = heapq.heappop(heap)
        first = 0
        contested = False
        for off in offs:
            l2 = labels[p + off]
            if l2 > 0:
                if first == 0:
                    first = l2
                elif l2 != first:
                    contested = True
                    break
        if contested:
            ridge[p] = True
            continue
        labels[p] = lab
        for off in offs:
            q = p + off
            if labels[q] == 0 and not in_queue[q] and not ridge[q]:
                in_queue[q] = True
                heapq.heappush(heap, (flat[q], seq, q, lab))
                seq += 1

    return labels.reshape(h + 2, w + 2)[1:-1, 1:-1].copy()
