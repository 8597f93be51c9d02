"""numba implementations of the hot kernels.

Piecewise-power functions are passed as three arrays: breakpoints ``bp``
(length m+1, may start at -inf and end at +inf), coefficients ``c`` and
exponents ``a`` (length m).  A piece never has 0 strictly inside its gap
unless its exponent is 0.
"""

import math

import numpy as np

from ._accel import njit

_INF = np.inf


@njit(cache=True, nogil=True)
def power_integral(a, u, v):
    """Integral of t**a over [u, v] with 0 <= u < v <= inf."""
    e = a + 1.0
    if v == _INF:
        if e < 0.0 and u > 0.0:
            return u**e / (-e)
        return _INF
    if u == 0.0:
        if e > 0.0:
            return v**e / e
        return _INF
    if e == 0.0:
        return math.log(v / u)
    return v**e * (-math.expm1(e * math.log(u / v))) / e


@njit(cache=True, nogil=True)
def piece_integral(c, a, lo, hi):
    if c == 0.0 or hi <= lo:
        return 0.0
    if a == 0.0:
        return c * (hi - lo)
    if hi <= 0.0:
        return c * power_integral(a, -hi, -lo)
    return c * power_integral(a, lo, hi)


@njit(cache=True, nogil=True)
def piece_value(c, a, x):
    if c == 0.0:
        return 0.0
    if a == 0.0:
        return c
    t = abs(x)
    if t == 0.0:
        return _INF if a < 0.0 else 0.0
    if t == _INF:
        return _INF if a > 0.0 else 0.0
    return c * t**a


@njit(cache=True, nogil=True)
def integrate(bp, c, a, lo, hi):
    m = c.shape[0]
    k = np.searchsorted(bp, lo, side="right") - 1
    if k < 0:
        k = 0
    total = 0.0
    while k < m and bp[k] < hi:
        left = max(lo, bp[k])
        right = min(hi, bp[k + 1])
        if right > left:
            total += piece_integral(c[k], a[k], left, right)
        k += 1
    return total


@njit(cache=True, nogil=True)
def interval_integrals(bp, c, a, lo, hi):
    n = lo.shape[0]
    out = np.empty(n)
    for i in range(n):
        out[i] = integrate(bp, c, a, lo[i], hi[i])
    return out


@njit(cache=True, nogil=True)
def _gap(c, a, lo, F, b, x):
    # d/db of the running average has the sign of this quantity
    return piece_value(c, a, b) * (b - x) - (F + piece_integral(c, a, lo, b))


@njit(cache=True, nogil=True)
def _peak(c, a, lo, hi, F, x):
    left = lo
    right = hi
    for _ in range(600):
        if left > 0.0 and right > 4.0 * left:
            mid = math.sqrt(left * right)
        elif right < 0.0 and left < 4.0 * right:
            mid = -math.sqrt(left * right)
        elif left == 0.0:
            mid = right / 16.0
        elif right == 0.0:
            mid = left / 16.0
        else:
            mid = 0.5 * (left + right)
        if mid <= left or mid >= right:
            break
        if _gap(c, a, lo, F, mid, x) > 0.0:
            left = mid
        else:
            right = mid
    best = 0.0
    for b in (left, right):
        if b > x:
            val = (F + piece_integral(c, a, lo, b)) / (b - x)
            if val > best:
                best = val
    return best


@njit(cache=True, nogil=True)
def right_sup(bp, c, a, x):
    """sup over b > x of the average of f over [x, b]."""
    m = c.shape[0]
    k = np.searchsorted(bp, x, side="right") - 1
    if k < 0:
        k = 0
    if k > m - 1:
        k = m - 1
    best = piece_value(c[k], a[k], x)
    if best == _INF:
        return _INF
    F = 0.0
    lo = x
    for j in range(k, m):
        cj = c[j]
        aj = a[j]
        hi = bp[j + 1]
        if hi == _INF:
            if cj > 0.0:
                if aj == 0.0:
                    if cj > best:
                        best = cj
                elif aj > 0.0:
                    return _INF
                elif j > k:
                    if piece_value(cj, aj, lo) * (lo - x) - F > 0.0:
                        h = max(2.0 * lo, lo + 2.0 * (lo - x), 1.0)
                        count = 0
                        while _gap(cj, aj, lo, F, h, x) > 0.0 and count < 2000:
                            h *= 2.0
                            count += 1
                        val = _peak(cj, aj, lo, h, F, x)
                        if val > best:
                            best = val
            break
        seg = piece_integral(cj, aj, lo, hi)
        if seg == _INF:
            return _INF
        if j > k and cj > 0.0 and ((lo >= 0.0 and aj < 0.0) or (hi <= 0.0 and aj > 0.0)):
            glo = piece_value(cj, aj, lo) * (lo - x) - F
            ghi = piece_value(cj, aj, hi) * (hi - x) - (F + seg)
            if glo > 0.0 and ghi < 0.0:
                val = _peak(cj, aj, lo, hi, F, x)
                if val > best:
                    best = val
        F += seg
        val = F / (hi - x)
        if val > best:
            best = val
        lo = hi
    return best


@njit(cache=True, nogil=True)
def maximal_values(bp, c, a, xs):
    rbp = -bp[::-1].copy()
    rc = c[::-1].copy()
    ra = a[::-1].copy()
    n = xs.shape[0]
    out = np.empty(n)
    for i in range(n):
        x = xs[i]
        r = right_sup(bp, c, a, x)
        if r == _INF:
            out[i] = _INF
            continue
        left = right_sup(rbp, rc, ra, -x)
        out[i] = max(r, left)
    return out


@njit(cache=True, nogil=True)
def step_bruteforce(edges, values, xs):
    """Maximal function of a compactly supported step function by
    enumerating every pair of candidate endpoints (edges and x)."""
    n = xs.shape[0]
    out = np.empty(n)
    ne = edges.shape[0]
    for t in range(n):
        x = xs[t]
        pts = np.empty(ne + 1)
        pts[:ne] = edges
        pts[ne] = x
        pts = np.sort(pts)
        npt = pts.shape[0]
        prefix = np.zeros(npt)
        for i in range(1, npt):
            mid = 0.5 * (pts[i - 1] + pts[i])
            val = 0.0
            if edges[0] < mid < edges[ne - 1]:
                idx = np.searchsorted(edges, mid, side="right") - 1
                val = values[idx]
            prefix[i] = prefix[i - 1] + val * (pts[i] - pts[i - 1])
        best = 0.0
        for i in range(npt):
            if pts[i] > x:
                break
            for j in range(npt - 1, i, -1):
                if pts[j] < x:
                    break
                length = pts[j] - pts[i]
                if length > 0.0:
                    avg = (prefix[j] - prefix[i]) / length
                    if avg > best:
                        best = avg
        out[t] = best
    return out


@njit(cache=True, nogil=True)
def pair_integrals(bp, c, a, z):
    n = z.shape[0]
    cells = np.empty(n - 1)
    for k in range(n - 1):
        cells[k] = integrate(bp, c, a, z[k], z[k + 1])
    out = np.zeros((n, n))
    for i in range(n):
        acc = 0.0
        for j in range(i + 1, n):
            acc += cells[j - 1]
            out[i, j] = acc
    return out
