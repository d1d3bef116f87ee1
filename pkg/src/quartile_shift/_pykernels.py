"""Pure-Python kernels; reference implementations for ``_kernels.pyx``.

Every function here has a twin with the same name and signature in the
compiled module.  Both must return identical arrays.
"""
import numpy as np


def sweep_counts(treated, offsets, n, m, q):
    """Cell counts on every segment by adjacent transpositions.

    ``treated[p]`` is the rank (0-based, among sorted treated values) of the
    treated member of the p-th pair in breakpoint order; pairs belonging to
    breakpoint ``t`` occupy ``treated[offsets[t]:offsets[t + 1]]``.

    Each pair crossing moves one treated value one place down the pooled
    order.  Returns an int64 array with one row per segment, the first row
    being the Delta -> -inf table.
    """
    q1, q2, q3 = int(q[0]), int(q[1]), int(q[2])
    nbp = len(offsets) - 1
    out = np.zeros((nbp + 1, 4), dtype=np.int64)
    pos = [m + r + 1 for r in range(n)]
    a = [0, 0, 0, 0]
    for p in pos:
        if p <= q1:
            a[0] += 1
        elif p <= q2:
            a[1] += 1
        elif p <= q3:
            a[2] += 1
        else:
            a[3] += 1
    out[0] = a
    offsets = [int(o) for o in offsets]
    treated = [int(t) for t in treated]
    for t in range(nbp):
        for p in range(offsets[t], offsets[t + 1]):
            r = treated[p]
            pos[r] -= 1
            new = pos[r]
            if new == q1:
                a[0] += 1
                a[1] -= 1
            elif new == q2:
                a[1] += 1
                a[2] -= 1
            elif new == q3:
                a[2] += 1
                a[3] -= 1
        out[t + 1] = a
    return out


def enumerate_tables(k, n, logc, log_total):
    """All tables with margins ``k`` and treated total ``n``, with pmf.

    ``logc[j][a]`` holds log C(k_j, a).  Rows are ordered lexicographically
    in (a2, a3, a4).
    """
    k1, k2, k3, k4 = (int(v) for v in k)
    a2, a3, a4 = np.meshgrid(
        np.arange(k2 + 1), np.arange(k3 + 1), np.arange(k4 + 1), indexing="ij"
    )
    a2, a3, a4 = a2.ravel(), a3.ravel(), a4.ravel()
    a1 = n - a2 - a3 - a4
    ok = (a1 >= 0) & (a1 <= k1)
    tables = np.column_stack([a1[ok], a2[ok], a3[ok], a4[ok]]).astype(np.int64)
    lp = (
        np.asarray(logc[0])[tables[:, 0]]
        + np.asarray(logc[1])[tables[:, 1]]
        + np.asarray(logc[2])[tables[:, 2]]
        + np.asarray(logc[3])[tables[:, 3]]
    )
    return tables, np.exp(lp - log_total)


def mw_frequencies(n, m):
    """Null pmf of the Mann-Whitney count for sample sizes n and m.

    Builds the Gaussian binomial [n+m choose n]_q one factor pair at a time,
    (1 - q^(l+j)) / (1 - q^j), computing only the lower half of each
    symmetric intermediate and mirroring it.  The lower half is increasing,
    so neither step cancels.
    """
    s, l = min(n, m), max(n, m)
    c = np.ones(1)
    for j in range(1, s + 1):
        deg = l * j
        half = deg // 2
        prev = np.zeros(half + 1)
        take = min(half + 1, c.size)
        prev[:take] = c[:take]
        shift = l + j
        if shift <= half:
            prev[shift:] -= c[: half + 1 - shift]
        pad = (-prev.size) % j
        block = np.concatenate([prev, np.zeros(pad)]).reshape(-1, j)
        low = np.cumsum(block, axis=0).ravel()[: half + 1]
        full = np.empty(deg + 1)
        full[: half + 1] = low
        full[deg - half :] = low[::-1]
        c = full / full[half]
    return c / c.sum()
