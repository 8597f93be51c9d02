"""Pure-numpy counterparts of the numba kernels.

Same array conventions as ``_kernels_numba``; loops run over gaps and are
vectorised over evaluation points.
"""

import numpy as np

_INF = np.inf


def power_integral(a: float, u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    e = a + 1.0
    out = np.full(np.broadcast(u, v).shape, _INF)
    u, v = np.broadcast_arrays(u, v)
    tail = v == _INF
    if e < 0.0:
        sel = tail & (u > 0.0)
        out[sel] = u[sel] ** e / (-e)
    finite = ~tail
    zero = finite & (u == 0.0)
    if e > 0.0:
        out[zero] = v[zero] ** e / e
    body = finite & (u > 0.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        if e == 0.0:
            out[body] = np.log(v[body] / u[body])
        else:
            ub, vb = u[body], v[body]
            out[body] = vb**e * (-np.expm1(e * np.log(ub / vb))) / e
    return out


def piece_integral(c: float, a: float, lo, hi):
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    lo, hi = np.broadcast_arrays(lo, hi)
    out = np.zeros(lo.shape)
    live = hi > lo
    if c == 0.0 or not live.any():
        return out
    if a == 0.0:
        out[live] = c * (hi[live] - lo[live])
        return out
    neg = live & (hi <= 0.0)
    pos = live & ~neg
    if neg.any():
        out[neg] = c * power_integral(a, -hi[neg], -lo[neg])
    if pos.any():
        out[pos] = c * power_integral(a, lo[pos], hi[pos])
    return out


def piece_value(c: float, a: float, x):
    x = np.asarray(x, dtype=float)
    if c == 0.0:
        return np.zeros(x.shape)
    if a == 0.0:
        return np.full(x.shape, c)
    t = np.abs(x)
    with np.errstate(divide="ignore", over="ignore"):
        out = np.asarray(c * t**a)
    return np.where(t == 0.0, _INF if a < 0.0 else 0.0, out)


def _piece_values_at(c, a, x):
    # per-element coefficients and exponents
    out = np.zeros(x.shape)
    t = np.abs(x)
    const = (c != 0.0) & (a == 0.0)
    out[const] = c[const]
    pw = (c != 0.0) & (a != 0.0)
    with np.errstate(divide="ignore", over="ignore"):
        out[pw] = c[pw] * t[pw] ** a[pw]
    out[pw & (t == 0.0) & (a < 0.0)] = _INF
    return out


def interval_integrals(bp, c, a, lo, hi):
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    total = np.zeros(lo.shape)
    for k in range(c.shape[0]):
        left = np.maximum(lo, bp[k])
        right = np.minimum(hi, bp[k + 1])
        total += piece_integral(c[k], a[k], left, right)
    return total


def _gap(c, a, lo, F, b, x):
    return piece_value(c, a, b) * (b - x) - (F + piece_integral(c, a, lo, b))


def _peak(c, a, lo, hi, F, x):
    left = lo.copy()
    right = hi.copy()
    for _ in range(600):
        mid = 0.5 * (left + right)
        geo_pos = (left > 0.0) & (right > 4.0 * left)
        geo_neg = (right < 0.0) & (left < 4.0 * right)
        mid = np.where(geo_pos | geo_neg, np.sign(right) * np.sqrt(np.abs(left * right)), mid)
        mid = np.where(left == 0.0, right / 16.0, mid)
        mid = np.where(right == 0.0, left / 16.0, mid)
        moving = (mid > left) & (mid < right)
        if not moving.any():
            break
        up = _gap(c, a, lo, F, mid, x) > 0.0
        left = np.where(moving & up, mid, left)
        right = np.where(moving & ~up, mid, right)
    best = np.zeros(lo.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        for b in (left, right):
            val = (F + piece_integral(c, a, lo, b)) / (b - x)
            best = np.where((b > x) & (val > best), val, best)
    return best


def right_sup(bp, c, a, xs):
    m = c.shape[0]
    k = np.clip(np.searchsorted(bp, xs, side="right") - 1, 0, m - 1)
    best = _piece_values_at(c[k], a[k], xs)
    done = best == _INF
    F = np.zeros(xs.shape)
    for j in range(m):
        act = (k <= j) & ~done
        if not act.any():
            if done.all():
                break
            continue
        cj = c[j]
        aj = a[j]
        hi = bp[j + 1]
        lo = np.where(k == j, xs, bp[j])
        later = act & (k < j)
        if hi == _INF:
            if cj > 0.0:
                if aj == 0.0:
                    best = np.where(act, np.maximum(best, cj), best)
                elif aj > 0.0:
                    best = np.where(act, _INF, best)
                elif later.any():
                    idx = np.flatnonzero(later)
                    lo_i, F_i, x_i = lo[idx], F[idx], xs[idx]
                    rising = piece_value(cj, aj, lo_i) * (lo_i - x_i) - F_i > 0.0
                    idx, lo_i, F_i, x_i = idx[rising], lo_i[rising], F_i[rising], x_i[rising]
                    if idx.size:
                        h = np.maximum.reduce([2.0 * lo_i, lo_i + 2.0 * (lo_i - x_i), np.ones(idx.size)])
                        for _ in range(2000):
                            grow = _gap(cj, aj, lo_i, F_i, h, x_i) > 0.0
                            if not grow.any():
                                break
                            h = np.where(grow, 2.0 * h, h)
                        val = _peak(cj, aj, lo_i, h, F_i, x_i)
                        best[idx] = np.maximum(best[idx], val)
            break
        seg = piece_integral(cj, aj, lo, hi)
        blown = act & (seg == _INF)
        best[blown] = _INF
        done |= blown
        act &= ~blown
        later &= ~blown
        decreasing = cj > 0.0 and ((bp[j] >= 0.0 and aj < 0.0) or (hi <= 0.0 and aj > 0.0))
        if decreasing and later.any():
            idx = np.flatnonzero(later)
            lo_i, F_i, x_i = lo[idx], F[idx], xs[idx]
            glo = piece_value(cj, aj, lo_i) * (lo_i - x_i) - F_i
            ghi = piece_value(cj, aj, hi) * (hi - x_i) - (F_i + seg[idx])
            inner = (glo > 0.0) & (ghi < 0.0)
            if inner.any():
                sel = idx[inner]
                val = _peak(cj, aj, lo_i[inner], np.full(sel.size, hi), F_i[inner], x_i[inner])
                best[sel] = np.maximum(best[sel], val)
        F = np.where(act, F + seg, F)
        with np.errstate(divide="ignore", invalid="ignore"):
            avg = F / (hi - xs)
        best = np.where(act & (avg > best), avg, best)
    return best


def maximal_values(bp, c, a, xs):
    xs = np.asarray(xs, dtype=float)
    right = right_sup(bp, c, a, xs)
    left = right_sup(-bp[::-1].copy(), c[::-1].copy(), a[::-1].copy(), -xs)
    out = np.maximum(right, left)
    out[right == _INF] = _INF
    return out


def step_bruteforce(edges, values, xs):
    xs = np.asarray(xs, dtype=float)
    out = np.empty(xs.shape[0])
    for t, x in enumerate(xs):
        pts = np.sort(np.append(edges, x))
        mids = 0.5 * (pts[:-1] + pts[1:])
        inside = (mids > edges[0]) & (mids < edges[-1])
        idx = np.clip(np.searchsorted(edges, mids, side="right") - 1, 0, values.size - 1)
        vals = np.where(inside, values[idx], 0.0)
        prefix = np.concatenate([[0.0], np.cumsum(vals * np.diff(pts))])
        li = np.flatnonzero(pts <= x)
        ri = np.flatnonzero(pts >= x)
        length = pts[ri][None, :] - pts[li][:, None]
        mass = prefix[ri][None, :] - prefix[li][:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            avg = np.where(length > 0.0, mass / length, 0.0)
        out[t] = max(avg.max(), 0.0)
    return out


def pair_integrals(bp, c, a, z):
    z = np.asarray(z, dtype=float)
    cells = interval_integrals(bp, c, a, z[:-1], z[1:])
    run = np.concatenate([[0.0], np.cumsum(cells)])
    out = run[None, :] - run[:, None]
    return np.triu(out, k=1)
