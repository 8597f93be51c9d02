"""Distribution functions and weighted Lorentz quasi-norms.

Everything runs in the level variable ``y = log s``.  ``f`` and ``w`` are
merged into cells carrying one piece of each; the finite values of ``f`` at
cell ends cut the level axis into bands.  Inside a band every cell is either
fully inside ``{f > s}``, fully outside, or *active* (its superlevel part is
an interval ending at ``tau(s) = (s/c)**(1/a)``).  Bands without active cells
have constant ``lambda`` and integrate in closed form; the rest use adaptive
quadrature, and the two unbounded bands add an analytic exponential tail once
the log-slope of the integrand settles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar
from scipy.special import logsumexp

from .errors import Divergent, InsufficientPoints, NonIntegrable
from .funcspace import INF, PiecewisePower, _merge, integrate_range, superlevel
from .maximal import MaximalResult

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class LorentzParams:
    """Exponents of ``L^{p,q}``; ``q=None`` means ``q = p``, ``q = inf`` is weak type."""

    p: float
    q: Optional[float] = None

    def __post_init__(self):
        p = float(self.p)
        q = p if self.q is None else float(self.q)
        if not (1.0 < p < INF):
            raise ValueError("need 1 < p < inf")
        if not q > 0.0:
            raise ValueError("need q > 0")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def is_weak(self) -> bool:
        return math.isinf(self.q)


def _log_pint(a, logu, logv):
    """log of the integral of t**a over (u, v), vectorised, ends in log form."""
    a = np.asarray(a, dtype=float)
    logu = np.asarray(logu, dtype=float)
    logv = np.asarray(logv, dtype=float)
    a, logu, logv = np.broadcast_arrays(a, logu, logv)
    e = a + 1.0
    out = np.full(a.shape, np.inf)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        pos = (e > 0) & np.isfinite(logv)
        ep = e[pos]
        out[pos] = ep * logv[pos] + np.log(-np.expm1(ep * (logu[pos] - logv[pos]))) - np.log(ep)
        neg = (e < 0) & np.isfinite(logu)
        en = e[neg]
        out[neg] = en * logu[neg] + np.log(-np.expm1(en * (logv[neg] - logu[neg]))) - np.log(-en)
        zero = (e == 0) & np.isfinite(logu) & np.isfinite(logv)
        out[zero] = np.log(logv[zero] - logu[zero])
    out[logv <= logu] = -np.inf
    return out


class _Engine:
    """Band structure of ``lambda(s) = w({f > s})``."""

    def __init__(self, f: PiecewisePower, w: PiecewisePower):
        bp, ia, ib = _merge(f, w)
        cf, af = f.coefs[ia], f.exps[ia]
        cw, aw = w.coefs[ib], w.exps[ib]
        keep = (cf > 0.0) & (cw > 0.0)
        lo, hi = bp[:-1][keep], bp[1:][keep]
        cf, af, cw, aw = cf[keep], af[keep], cw[keep], aw[keep]
        straddle = (lo < 0.0) & (hi > 0.0)
        tl = np.where(hi <= 0.0, -hi, lo)
        th = np.where(hi <= 0.0, -lo, hi)
        with np.errstate(divide="ignore"):
            ltl = np.log(np.where(straddle, 1.0, tl))
            lth = np.log(np.where(straddle, 1.0, th))
            lcf = np.log(cf)
            lcw = np.log(cw)
        with np.errstate(invalid="ignore"):
            fa = np.where(af == 0.0, lcf, lcf + af * ltl)
            fb = np.where(af == 0.0, lcf, lcf + af * lth)
        self.lmin = np.minimum(fa, fb)
        self.lmax = np.maximum(fa, fb)
        with np.errstate(divide="ignore"):
            lfm = np.where(straddle, lcw + np.log(hi - lo), lcw + _log_pint(aw, ltl, lth))
        self.lfm = lfm
        self.cf, self.af, self.lcf, self.lcw, self.aw = cf, af, lcf, lcw, aw
        self.ltl, self.lth = ltl, lth
        edges = np.concatenate([self.lmin, self.lmax])
        self.E = np.unique(edges[np.isfinite(edges)])
        nb = self.E.size + 1
        self.bottom = np.concatenate([[-np.inf], self.E])
        self.top = np.concatenate([self.E, [np.inf]])
        # constant part per band: cells with lmin >= band top
        order = np.argsort(self.lmin)
        sorted_min = self.lmin[order]
        fm = np.exp(lfm[order])
        suffix = np.concatenate([np.cumsum(fm[::-1])[::-1], [0.0]])
        start = np.searchsorted(sorted_min, self.top, side="left")
        self.C = suffix[start]
        self.C[np.isinf(self.top)] = 0.0
        # active power cells per band
        self.active: dict[int, np.ndarray] = {}
        pw = np.flatnonzero(af != 0.0)
        if pw.size:
            k0 = np.searchsorted(self.E, self.lmin[pw], side="right")
            k1 = np.searchsorted(self.E, self.lmax[pw], side="left")
            lists: dict[int, list] = {}
            for cell, a0, a1 in zip(pw, k0, k1):
                for k in range(a0, a1 + 1):
                    lists.setdefault(int(k), []).append(cell)
            self.active = {k: np.array(v) for k, v in lists.items()}
        self.nbands = nb

    @property
    def empty(self) -> bool:
        return self.cf.size == 0

    def band_of(self, y: float) -> int:
        return int(np.searchsorted(self.E, y, side="left"))

    def log_lambda(self, y: float, k: Optional[int] = None) -> float:
        if k is None:
            k = self.band_of(y)
            # on an edge the band above holds the strict superlevel set
            if k < self.E.size and self.E[k] == y:
                k += 1
        C = self.C[k]
        terms = [math.log(C)] if C > 0.0 else []
        cells = self.active.get(k)
        if cells is not None:
            af = self.af[cells]
            ltau = (y - self.lcf[cells]) / af
            lo = np.where(af > 0, np.maximum(ltau, self.ltl[cells]), self.ltl[cells])
            hi = np.where(af > 0, self.lth[cells], np.minimum(ltau, self.lth[cells]))
            vals = self.lcw[cells] + _log_pint(self.aw[cells], lo, hi)
            if np.any(vals == np.inf):
                return math.inf
            terms.extend(vals.tolist())
        if not terms:
            return -math.inf
        return float(logsumexp(terms))

    def check_finite(self) -> None:
        if np.any(np.isinf(self.C)):
            raise Divergent("level sets have infinite weight for small s", end="s->0")


class DistributionFunction:
    """``s -> w({f > s})`` with the band thresholds exposed."""

    def __init__(self, f: PiecewisePower, w: PiecewisePower):
        self._eng = _Engine(f, w)

    @property
    def thresholds(self) -> np.ndarray:
        return np.exp(self._eng.E)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        out = np.array([math.exp(self._eng.log_lambda(math.log(v))) if v > 0 else math.inf for v in s.ravel()])
        return out.reshape(s.shape) if s.ndim else float(out[0])

    def is_closed_form(self, s: float) -> bool:
        """True when lambda is constant on the band containing ``s``."""
        return self._eng.band_of(math.log(s)) not in self._eng.active


def distribution(f: PiecewisePower, w: PiecewisePower, s: float) -> float:
    """``w({f > s})`` from the superlevel intervals."""
    total = 0.0
    for I in superlevel(f, s):
        total += integrate_range(w, I.lo, I.hi)
    if math.isinf(total):
        raise NonIntegrable(f"level set {{f > {s}}} has infinite weight")
    return total


def distribution_function(f: PiecewisePower, w: PiecewisePower) -> DistributionFunction:
    return DistributionFunction(f, w)


# s-integral


def _log_gauss(ell, a: float, b: float) -> float:
    xs = 0.5 * (b - a) * _GL_X + 0.5 * (a + b)
    ls = np.array([ell(v) for v in xs])
    if np.all(np.isneginf(ls)):
        return -np.inf
    return float(logsumexp(ls, b=0.5 * (b - a) * _GL_W))


def _log_gauss_adaptive(ell, a: float, b: float, rtol: float = 1e-13, depth: int = 40, max_panels: int = 4000) -> float:
    """log of the integral of exp(ell) over (a, b), bisecting until halves agree.

    Errors are measured against the whole panel, so noise in tiny sub-panels
    next to an endpoint singularity does not force further splitting.
    """
    whole = _log_gauss(ell, a, b)
    stack = [(a, b, whole, depth)]
    out = []
    ref = whole
    panels = 0
    while stack:
        lo, hi, val, d = stack.pop()
        mid = 0.5 * (lo + hi)
        left, right = _log_gauss(ell, lo, mid), _log_gauss(ell, mid, hi)
        both = float(np.logaddexp(left, right))
        panels += 1
        if ref == -np.inf and both > -np.inf:
            ref = both
        err = abs(math.exp(val - ref) - math.exp(both - ref)) if both > -np.inf else 0.0
        if d == 0 or panels >= max_panels or err <= rtol:
            out.append(both)
        else:
            stack.append((lo, mid, left, d - 1))
            stack.append((mid, hi, right, d - 1))
    return float(logsumexp(out))


def _march(ell, y0: float, direction: int, end: str, max_panels: int = 20000) -> float:
    """log of the integral of exp(ell(y)) from y0 to +-inf."""
    h = 1e-2

    def rate(y, here):
        # decay rate of exp(ell) in the marching direction; one-sided so the
        # stencil never leaves the band
        ahead = ell(y + direction * h)
        r = -(ahead - here) / h
        return r if np.isfinite(r) else math.nan

    total = []
    y = y0
    rho_prev = None
    l0, l1 = ell(y), ell(y + direction * h)
    slope = (l1 - l0) / h if np.isfinite(l0) and np.isfinite(l1) else 1.0
    for _ in range(max_panels):
        width = min(1.0, 2.0 / max(abs(slope), 1e-12)) if np.isfinite(slope) else 1.0
        a, b = (y, y + width) if direction > 0 else (y - width, y)
        total.append(_log_gauss_adaptive(ell, a, b))
        y = y + direction * width
        lend = ell(y)
        if not np.isfinite(lend):
            if lend == -np.inf:
                return float(logsumexp(total))
            raise Divergent("integrand is infinite", end=end)
        rho = rate(y, lend)
        slope = abs(rho) if np.isfinite(rho) else 1.0
        acc = float(logsumexp(total))
        if not np.isfinite(rho):
            rho_prev = None
            continue
        if rho > 0 and rho_prev is not None and abs(rho - rho_prev) <= 1e-11 * rho + 1e-14:
            return float(np.logaddexp(acc, lend - math.log(rho)))
        if rho > 0 and lend - math.log(rho) < acc - 40.0:
            return acc
        if rho_prev is not None and abs(rho - rho_prev) <= 1e-12 and rho <= 1e-12:
            raise Divergent("integrand does not decay", end=end)
        rho_prev = rho
    raise Divergent("integrand did not settle while marching", end=end)


def _band_integral(eng: _Engine, k: int, q: float, theta: float) -> float:
    """log of the integral over band k of exp(q y + theta L(y))."""
    a, b = eng.bottom[k], eng.top[k]
    if k not in eng.active:
        C = eng.C[k]
        if C == 0.0:
            return -np.inf
        if np.isinf(b):
            raise Divergent("constant level set weight up to s = inf", end="s->inf")
        lc = theta * math.log(C) + q * b - math.log(q)
        if np.isinf(a):
            return lc
        return lc + math.log(-math.expm1(-q * (b - a)))

    def ell(y):
        return q * y + theta * eng.log_lambda(y, k)

    if np.isfinite(a) and np.isfinite(b):
        probe = np.linspace(a, b, 11)[1:-1]
        shift = max(ell(v) for v in probe)
        if shift == -np.inf:
            return -np.inf
        if shift == np.inf:
            raise Divergent("infinite level set weight", end="s->0")
        val, _ = quad(lambda y: math.exp(ell(y) - shift), a, b, epsabs=0.0, epsrel=1e-11, limit=400)
        return math.log(val) + shift if val > 0 else -np.inf
    if np.isfinite(a):
        return _march(ell, a, +1, "s->inf")
    if np.isfinite(b):
        return _march(ell, b, -1, "s->0")
    cells = eng.active[k]
    y0 = float(np.median(eng.lcf[cells]))
    return float(np.logaddexp(_march(ell, y0, +1, "s->inf"), _march(ell, y0, -1, "s->0")))


def lorentz_norm(f: PiecewisePower, w: PiecewisePower, params: LorentzParams) -> float:
    """``( p * int_0^inf s^q lambda(s)^(q/p) ds/s )^(1/q)``; q = inf gives the weak norm."""
    if not isinstance(params, LorentzParams):
        params = LorentzParams(*params)
    if params.is_weak:
        return weak_norm(f, w, params.p)
    p, q = params.p, params.q
    eng = _Engine(f, w)
    if eng.empty:
        return 0.0
    eng.check_finite()
    theta = q / p
    logs = [_band_integral(eng, k, q, theta) for k in range(eng.nbands)]
    total = float(logsumexp(logs))
    if total == -np.inf:
        return 0.0
    return math.exp((math.log(p) + total) / q)


def _sup_on(ell, lo: float, hi: float, n: int = 65) -> float:
    """sup of ell on [lo, hi]: dense samples, then a bounded refinement."""
    ys = np.linspace(lo, hi, n)
    vals = np.array([ell(v) for v in ys])
    if np.all(np.isneginf(vals)):
        return -np.inf
    i = int(np.argmax(vals))
    best = float(vals[i])
    a, b = ys[max(i - 1, 0)], ys[min(i + 1, ys.size - 1)]
    if b > a:
        res = minimize_scalar(lambda y: -ell(y), bounds=(a, b), method="bounded", options={"xatol": 1e-13})
        best = max(best, -float(res.fun))
    return best


def _weak_scan(ell, y0: float, direction: int, end: str, max_steps: int = 20000) -> float:
    """sup of ell on the half-line from y0 in the given direction."""
    y = y0
    prev = None
    eps = 1e-6
    for _ in range(max_steps):
        y += direction
        cur = ell(y)
        if cur == np.inf:
            raise Divergent("weak norm is infinite", end=end)
        # rate of change of ell along the scan direction
        slope = (ell(y + direction * eps) - cur) / eps
        if prev is not None and abs(slope - prev) <= 1e-9 * max(1.0, abs(slope)):
            if slope > 1e-10:
                raise Divergent("weak norm is infinite", end=end)
            if slope <= 0:
                # settled and non-increasing from y on
                return _sup_on(ell, min(y0, y), max(y0, y), n=max(65, 16 * int(abs(y - y0)) + 1))
        prev = slope
    raise Divergent("weak norm scan did not settle", end=end)


def weak_norm(f: PiecewisePower, w: PiecewisePower, p: float) -> float:
    """``sup_s s * lambda(s)**(1/p)``."""
    p = float(p)
    eng = _Engine(f, w)
    if eng.empty:
        return 0.0
    eng.check_finite()
    best = -np.inf
    for k in range(eng.nbands):
        a, b = eng.bottom[k], eng.top[k]
        if k not in eng.active:
            C = eng.C[k]
            if C > 0.0:
                best = max(best, b + math.log(C) / p)
            continue

        def ell(y, k=k):
            return y + eng.log_lambda(y, k) / p

        if np.isfinite(a) and np.isfinite(b):
            best = max(best, _sup_on(ell, a, b))
            continue
        if np.isfinite(a):
            best = max(best, _weak_scan(ell, a, +1, "s->inf"))
        elif np.isfinite(b):
            best = max(best, _weak_scan(ell, b, -1, "s->0"))
        else:
            y0 = float(np.median(eng.lcf[eng.active[k]]))
            best = max(best, _weak_scan(ell, y0, +1, "s->inf"), _weak_scan(ell, y0, -1, "s->0"))
    return 0.0 if best == -np.inf else math.exp(best)


# sampled profiles


def _local_exponents(x: np.ndarray, v: np.ndarray) -> tuple[float, float]:
    b1 = math.log(v[0] / v[1]) / math.log(x[0] / x[1])
    b2 = math.log(v[1] / v[2]) / math.log(x[1] / x[2])
    return b1, b2


def profile_envelopes(result: MaximalResult) -> tuple[PiecewisePower, PiecewisePower]:
    """Lower and upper piecewise envelopes of a sampled profile.

    Between nodes: min / max of the two endpoint values (the profile is taken
    to be monotone between consecutive nodes).  Next to the origin: power
    extrapolation from the three innermost nodes, using the local exponent
    that gives the smaller (lower) or larger (upper) envelope.  Beyond the
    node range: the tail brackets attached to the result, or extrapolation.
    """
    z = np.asarray(result.nodes, dtype=float)
    v = np.asarray(result.values, dtype=float)
    if z.size < 2:
        raise InsufficientPoints("profile needs at least two nodes")
    lo_p: list[tuple] = []
    hi_p: list[tuple] = []
    pos = np.flatnonzero(z > 0.0)
    neg = np.flatnonzero(z < 0.0)
    has_zero = np.any(z == 0.0)
    for i in range(z.size - 1):
        a, b = z[i], z[i + 1]
        if has_zero and (a == 0.0 or b == 0.0):
            side = pos if b > 0.0 else neg[::-1]
            if side.size < 3:
                raise InsufficientPoints("need three nodes on each side of the origin")
            xs = np.abs(z[side[:3]])
            vs = v[side[:3]]
            if np.any(vs <= 0.0):
                # profile vanishes near the origin
                lo_p.append((a, b, 0.0, 0.0))
                hi_p.append((a, b, float(vs.max()), 0.0))
                continue
            b1, b2 = _local_exponents(xs, vs)
            for out, beta in ((lo_p, max(b1, b2)), (hi_p, min(b1, b2))):
                beta = 0.0 if abs(beta) < 1e-12 else beta
                out.append((a, b, float(vs[0] * xs[0] ** (-beta)), beta))
            continue
        va, vb = v[i], v[i + 1]
        if not (np.isfinite(va) and np.isfinite(vb)):
            raise InsufficientPoints(f"profile is infinite at a node in [{a}, {b}]")
        lo_p.append((a, b, min(va, vb), 0.0))
        hi_p.append((a, b, max(va, vb), 0.0))
    for side, idx in (("left", np.arange(3)), ("right", np.arange(z.size - 1, z.size - 4, -1))):
        edge = z[idx[0]]
        span = (-INF, edge) if side == "left" else (edge, INF)
        tail = result.tails.get(side)
        if tail is not None:
            lo_p.append((*span, tail.coef_lo, tail.exponent))
            hi_p.append((*span, tail.coef_hi, tail.exponent))
            continue
        if (side == "left" and edge >= 0.0) or (side == "right" and edge <= 0.0) or z.size < 3:
            raise InsufficientPoints(f"no tail model on the {side} and the nodes do not allow extrapolation")
        xs, vs = np.abs(z[idx]), v[idx]
        if np.any(vs <= 0.0):
            continue
        b1, b2 = _local_exponents(xs, vs)
        for out, beta in ((lo_p, min(b1, b2)), (hi_p, max(b1, b2))):
            out.append((*span, float(vs[0] * xs[0] ** (-beta)), beta))
    return PiecewisePower.from_pieces(lo_p), PiecewisePower.from_pieces(hi_p)


def profile_norm(result: MaximalResult, w: PiecewisePower, params: LorentzParams) -> tuple[float, float]:
    """(lower, upper) bracket of the Lorentz norm of a sampled profile."""
    lo, hi = profile_envelopes(result)
    return lorentz_norm(lo, w, params), lorentz_norm(hi, w, params)


def profile_distribution(result: MaximalResult, w: PiecewisePower, s: float) -> tuple[float, float]:
    lo, hi = profile_envelopes(result)
    return distribution(lo, w, s), distribution(hi, w, s)
