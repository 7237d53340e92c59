"""Compiled event loop shared by all latency schemes.

Worker ``w``'s ``j``-th subtask (0-based) finishes at ``T[w] * (j + 1) / R``.
Events are processed in ``(time, worker, j)`` order and the decodability
state is updated one event at a time.
"""

import numpy as np
from numba import njit

COUNT = 0    # decodable once `need` events have arrived
COLUMNS = 1  # every column code needs `kr` symbols
PEELING = 2  # iterative row/column peeling on a square grid


@njit(cache=True, nogil=True)
def sorted_events(T, R):
    """Event ids ``e = w * R + j`` in ``(time, w, j)`` order, and the sorted times.

    Bucket sort on time followed by insertion sort inside each bucket;
    comparing ``(time, e)`` is the same as comparing ``(time, w, j)``.
    """
    W = T.shape[0]
    E = W * R
    times = np.empty(E)
    hi = 0.0
    for w in range(W):
        for j in range(R):
            t = T[w] * (j + 1) / R
            times[w * R + j] = t
            if t > hi:
                hi = t
    order = np.empty(E, np.int64)
    keys = np.empty(E)
    if E == 0:
        return order, keys
    nb = E
    scale = nb / hi if hi > 0 else 0.0
    start = np.zeros(nb + 1, np.int64)
    bucket = np.empty(E, np.int64)
    for e in range(E):
        bi = int(times[e] * scale)
        if bi >= nb:
            bi = nb - 1
        bucket[e] = bi
        start[bi + 1] += 1
    for bi in range(nb):
        start[bi + 1] += start[bi]
    fill = start[:-1].copy()
    for e in range(E):
        bi = bucket[e]
        order[fill[bi]] = e
        keys[fill[bi]] = times[e]
        fill[bi] += 1
    for bi in range(nb):
        lo = start[bi]
        for x in range(lo + 1, start[bi + 1]):
            cur = order[x]
            tc = keys[x]
            y = x - 1
            while y >= lo and (keys[y] > tc or (keys[y] == tc and order[y] > cur)):
                order[y + 1] = order[y]
                keys[y + 1] = keys[y]
                y -= 1
            order[y + 1] = cur
            keys[y + 1] = tc
    return order, keys


@njit(cache=True, nogil=True)
def run_events(T, R, cell_row, cell_col, mode, n_rows, n_cols, kr, need, record, out_w, out_j):
    """Replay one trial.

    Returns ``(finish_event, finish_time, n_recorded)``.  ``finish_event`` is
    the 0-based position in the merged stream of the event that made the
    received set decodable, or -1.  With ``record`` the whole stream is
    written to ``out_w``/``out_j``; otherwise the loop stops at the finish.
    """
    order, times = sorted_events(T, R)
    count = 0
    col_count = np.zeros(n_cols, np.int64)
    satisfied = 0
    known = np.zeros((n_rows, n_cols), np.bool_)
    rc = np.zeros(n_rows, np.int64)
    cc = np.zeros(n_cols, np.int64)
    rdone = np.zeros(n_rows, np.bool_)
    cdone = np.zeros(n_cols, np.bool_)
    stack_r = np.empty(n_rows + 1, np.int64)
    stack_c = np.empty(n_cols + 1, np.int64)
    nr = 0
    nc = 0
    full_rows = 0

    finish_event = -1
    finish_time = np.inf
    for e in range(order.shape[0]):
        ev = order[e]
        w = ev // R
        j = ev - w * R
        t = times[e]
        if record:
            out_w[e] = w
            out_j[e] = j

        if finish_event < 0:
            done = False
            if mode == COUNT:
                count += 1
                done = count >= need
            elif mode == COLUMNS:
                c = cell_col[w, j]
                col_count[c] += 1
                if col_count[c] == kr:
                    satisfied += 1
                done = satisfied == n_cols
            else:
                # local scalars only: helper calls here cost ~20x in numba
                u = cell_row[w, j]
                v = cell_col[w, j]
                if not known[u, v]:
                    known[u, v] = True
                    rc[u] += 1
                    cc[v] += 1
                    if rc[u] == n_cols:
                        full_rows += 1
                    if rc[u] >= kr and not rdone[u]:
                        rdone[u] = True
                        stack_r[nr] = u
                        nr += 1
                    if cc[v] >= kr and not cdone[v]:
                        cdone[v] = True
                        stack_c[nc] = v
                        nc += 1
                    while nr > 0 or nc > 0:
                        if nr > 0:
                            nr -= 1
                            uu = stack_r[nr]
                            for vv in range(n_cols):
                                if not known[uu, vv]:
                                    known[uu, vv] = True
                                    rc[uu] += 1
                                    cc[vv] += 1
                                    if rc[uu] == n_cols:
                                        full_rows += 1
                                    if cc[vv] >= kr and not cdone[vv]:
                                        cdone[vv] = True
                                        stack_c[nc] = vv
                                        nc += 1
                        else:
                            nc -= 1
                            vv = stack_c[nc]
                            for uu in range(n_rows):
                                if not known[uu, vv]:
                                    known[uu, vv] = True
                                    rc[uu] += 1
                                    cc[vv] += 1
                                    if rc[uu] == n_cols:
                                        full_rows += 1
                                    if rc[uu] >= kr and not rdone[uu]:
                                        rdone[uu] = True
                                        stack_r[nr] = uu
                                        nr += 1
                done = full_rows == n_rows
            if done:
                finish_event = e
                finish_time = t
                if not record:
                    return finish_event, finish_time, e + 1
    return finish_event, finish_time, order.shape[0]
