"""Weight constants by supremum search over interval families.

Every constant is a sup over intervals.  The candidate family is all
intervals with endpoints in a geometric node set around the origin (plus the
breakpoints of the weights); the best candidate is then polished by a local
search inside the neighbouring node cells.  Values are therefore certified
lower bounds: each one is attained by the reported ``argmax``.

With ``adaptive=True`` the search is repeated with the number of geometric
levels doubled until two successive doublings each move the value by less
than 1e-4 relative.  Values above ``threshold`` are reported as non-finite
with the growth trace kept, instead of raising.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from . import _kernels
from .errors import DegenerateExponent, ExponentOrder, NonIntegrable, ZeroWeightAtPoint
from .funcspace import Interval, PiecewisePower, Rect, as_interval, average, integrate, power, restrict
from .maximal import GridSpec, maximal_many

CONVERGENCE_RTOL = 1e-4


@dataclass(frozen=True)
class SearchConfig:
    domain: Interval = Interval(-1.0, 1.0)
    levels: int = 8
    density: int = 1
    rtol: float = 1e-6
    refine: bool = True
    adaptive: bool = True
    max_levels: int = 128
    threshold: float = 1e12

    def __post_init__(self):
        object.__setattr__(self, "domain", as_interval(self.domain))
        if self.levels < 4:
            raise ValueError("need at least 4 geometric levels")

    def grid(self, levels: Optional[int] = None) -> GridSpec:
        return GridSpec(self.domain, self.levels if levels is None else levels, self.density)


@dataclass(frozen=True)
class ConstantEstimate:
    value: float
    argmax: Union[Interval, Rect, None]
    searched: int
    refined: bool
    levels: int = 0
    converged: bool = True
    finite: bool = True
    trace: tuple = ()
    point: Optional[float] = None

    def __float__(self):
        return float(self.value)


def dual_weight(w: PiecewisePower, p: float, domain=None) -> PiecewisePower:
    """``sigma = w**(1 - p')``, restricted to ``domain`` when given."""
    pp = p / (p - 1.0)
    return power(w, 1.0 - pp, where=domain)


# generic machinery


def _refine_pair(fun: Callable[[float, float], float], z: np.ndarray, i: int, j: int, maxfev: int = 400):
    lo_b = (z[max(i - 1, 0)], z[min(i + 1, z.size - 1)])
    hi_b = (z[max(j - 1, 0)], z[min(j + 1, z.size - 1)])
    scale = z[j] - z[i]

    def obj(u):
        a, b = u
        if not b - a > 1e-14 * scale:
            return 1e300
        val = fun(a, b)
        return -math.log(val) if val > 0 else 1e300

    start = np.array((z[i], z[j]), dtype=float)
    res = minimize(
        obj,
        start,
        method="Nelder-Mead",
        bounds=[lo_b, hi_b],
        options={"xatol": 1e-12 * max(scale, 1e-300), "fatol": 1e-15, "maxfev": maxfev},
    )
    return res.x


def _adaptive(run: Callable[[int], tuple], cfg: SearchConfig, cap: Optional[int] = None) -> ConstantEstimate:
    """Repeat ``run(levels)`` with doubling levels until the value settles."""
    cap = cfg.max_levels if cap is None else min(cap, cfg.max_levels)
    K = cfg.levels
    est = run(K)
    trace = [(K, est.value)]
    if not cfg.adaptive:
        return replace(est, levels=K, trace=tuple(trace), finite=bool(est.value <= cfg.threshold))
    calm = 0
    while True:
        if est.value > cfg.threshold:
            return replace(est, levels=K, trace=tuple(trace), finite=False, converged=False)
        if calm >= 2:
            return replace(est, levels=K, trace=tuple(trace), converged=True)
        if 2 * K > cap:
            return replace(est, levels=K, trace=tuple(trace), converged=False)
        K *= 2
        nxt = run(K)
        trace.append((K, nxt.value))
        change = abs(nxt.value - est.value) / max(abs(nxt.value), 1e-300)
        calm = calm + 1 if change < CONVERGENCE_RTOL else 0
        est = nxt


def _pair_lengths(z: np.ndarray) -> np.ndarray:
    L = z[None, :] - z[:, None]
    return np.where(L > 0.0, L, np.nan)


def _best_pair(vals: np.ndarray) -> tuple[int, int]:
    flat = np.where(np.isnan(vals), -np.inf, vals)
    k = int(np.argmax(flat))
    return divmod(k, vals.shape[1])


def _ap_functional(v: PiecewisePower, sigma: PiecewisePower, p: float):
    def fun(a: float, b: float) -> float:
        L = b - a
        V = _kernels.interval_integrals(*v.arrays, [a], [b])[0] / L
        S = _kernels.interval_integrals(*sigma.arrays, [a], [b])[0] / L
        return float(V * S ** (p - 1.0))

    return fun


def _ap_search(v: PiecewisePower, w: PiecewisePower, p: float, cfg: SearchConfig, K: int) -> ConstantEstimate:
    if not p > 1.0:
        raise ValueError("need p > 1")
    sigma = dual_weight(w, p, cfg.domain)
    if not sigma.locally_integrable:
        raise NonIntegrable("w**(1-p') is not locally integrable")
    z = cfg.grid(K).nodes(v, w)
    L = _pair_lengths(z)
    V = _kernels.pair_integrals(*v.arrays, z)
    S = _kernels.pair_integrals(*sigma.arrays, z)
    if np.any(np.isinf(S)) or np.any(np.isinf(V)):
        raise NonIntegrable("a weight is not integrable on some candidate interval")
    with np.errstate(invalid="ignore"):
        vals = (V / L) * (S / L) ** (p - 1.0)
    i, j = _best_pair(vals)
    fun = _ap_functional(v, sigma, p)
    a, b = z[i], z[j]
    best = fun(a, b)
    refined = False
    if cfg.refine and best > 0.0:
        ra, rb = _refine_pair(fun, z, i, j)
        cand = fun(ra, rb)
        if cand > best:
            a, b, best, refined = ra, rb, cand, True
    n = z.size
    return ConstantEstimate(float(best), Interval(float(a), float(b)), n * (n - 1) // 2, refined)


def ap_two_weight(v: PiecewisePower, w: PiecewisePower, p: float, cfg: SearchConfig = SearchConfig()) -> ConstantEstimate:
    """``sup_Q (avg_Q v) (avg_Q w^(1-p'))^(p-1)``."""
    return _adaptive(lambda K: _ap_search(v, w, p, cfg, K), cfg)


def ap_constant(w: PiecewisePower, p: float, cfg: SearchConfig = SearchConfig()) -> ConstantEstimate:
    """Muckenhoupt constant of ``w`` (one-weight case of :func:`ap_two_weight`)."""
    return ap_two_weight(w, w, p, cfg)


def ap_local(w: PiecewisePower, p: float, Q) -> float:
    """The A_p functional on a single interval."""
    Q = as_interval(Q)
    sigma = dual_weight(w, p, Q)
    return average(w, Q) * average(sigma, Q) ** (p - 1.0)


def a1_two_weight(v: PiecewisePower, w: PiecewisePower, cfg: SearchConfig = SearchConfig()) -> ConstantEstimate:
    """``sup_x Mv(x) / w(x)`` over the node set, polished between nodes."""

    def run(K: int) -> ConstantEstimate:
        z = cfg.grid(K).nodes(v, w)
        wz = np.asarray(w(z), dtype=float)
        if np.any(wz == 0.0):
            raise ZeroWeightAtPoint(f"w vanishes at x = {z[np.flatnonzero(wz == 0.0)[0]]}")
        ok = np.isfinite(wz)
        zs, ws = z[ok], wz[ok]
        ratio = maximal_many(v, zs) / ws
        k = int(np.argmax(ratio))
        x, best = float(zs[k]), float(ratio[k])
        refined = False
        if cfg.refine and zs.size > 1:
            for lo, hi in ((zs[max(k - 1, 0)], zs[k]), (zs[k], zs[min(k + 1, zs.size - 1)])):
                if not hi > lo:
                    continue

                def neg(t):
                    wt = float(w(t))
                    if not (0.0 < wt < math.inf):
                        return 0.0
                    return -float(maximal_many(v, [t])[0]) / wt

                res = minimize_scalar(neg, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12 * (hi - lo)})
                if -res.fun > best:
                    x, best, refined = float(res.x), -float(res.fun), True
        return ConstantEstimate(best, None, int(zs.size), refined, point=x)

    return _adaptive(run, cfg)


# Fujii-Wilson A_infinity


def _gl_panels(fun, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    x, wts = _GL
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    pts = mid[:, None] + half[:, None] * x[None, :]
    vals = fun(pts.ravel()).reshape(pts.shape)
    return half * (vals @ wts)


_GL = np.polynomial.legendre.leggauss(12)


def _adaptive_gl(fun, cells: list[tuple[float, float]], tol_abs: float, rtol: float, max_rounds: int = 60) -> float:
    """Adaptive Gauss-Legendre with bisection, all pending panels at once."""
    a = np.array([c[0] for c in cells], dtype=float)
    b = np.array([c[1] for c in cells], dtype=float)
    total_len = float(np.sum(b - a))
    acc = 0.0
    for _ in range(max_rounds):
        if a.size == 0:
            break
        m = 0.5 * (a + b)
        whole = _gl_panels(fun, a, b)
        halves = _gl_panels(fun, np.concatenate([a, m]), np.concatenate([m, b]))
        halves = halves[: a.size] + halves[a.size :]
        err = np.abs(whole - halves)
        ok = (err <= tol_abs * (b - a) / total_len) | (err <= rtol * np.abs(halves))
        if a.size > 50000:
            ok[:] = True
        acc += float(np.sum(halves[ok]))
        a, b = np.concatenate([a[~ok], m[~ok]]), np.concatenate([m[~ok], b[~ok]])
    if a.size:
        acc += float(np.sum(_gl_panels(fun, a, b)))
    return acc


def fujii_wilson_cube(w: PiecewisePower, Q, rtol: float = 1e-9, octaves: int = 48) -> float:
    """``(1/w(Q)) * int_Q M(w chi_Q)``.

    The integrand is smooth between the breakpoints of ``w`` except for kinks
    that the adaptive rule resolves.  Next to a singularity of ``w`` at the
    origin the cell is graded geometrically over ``octaves`` octaves and the
    remaining sliver is integrated using the local power law of the integrand.
    """
    Q = as_interval(Q)
    if not Q.is_bounded:
        raise ValueError("cube must be bounded")
    g = restrict(w, Q)
    if not g.locally_integrable:
        raise NonIntegrable("weight is not integrable on the cube")
    mass = integrate(w, Q)
    if mass == 0.0:
        raise ZeroDivisionError("weight has no mass on the cube")

    def Mg(x):
        return _kernels.maximal_values(*g.arrays, x)

    cuts = np.unique(np.concatenate([[Q.lo, Q.hi], g.finite_breakpoints, [0.0] if Q.lo < 0.0 < Q.hi else []]))
    cuts = cuts[(cuts >= Q.lo) & (cuts <= Q.hi)]
    regular: list[tuple[float, float]] = []
    sliver = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        touches = (lo == 0.0 and float(g(0.5 * hi)) > 0 and _exp_at(g, 0.5 * hi) < 0.0) or (
            hi == 0.0 and _exp_at(g, 0.5 * lo) < 0.0 and float(g(0.5 * lo)) > 0
        )
        if not touches:
            regular.extend(_graded(lo, hi))
            continue
        span = hi - lo
        sgn = 1.0 if lo == 0.0 else -1.0
        edges = span * np.exp2(-np.arange(octaves + 1))
        for k in range(octaves):
            u, v = edges[k + 1], edges[k]
            regular.append((u, v) if sgn > 0 else (-v, -u))
        eps = edges[-1]
        m1, m2 = Mg(np.array([sgn * eps, sgn * 2 * eps]))
        beta = math.log(m1 / m2) / math.log(0.5)
        if beta <= -1.0:
            raise NonIntegrable("maximal function is not integrable at the origin")
        sliver += eps * m1 / (beta + 1.0)
    total = _adaptive_gl(Mg, regular, rtol * mass, rtol) + sliver
    return total / mass


def _graded(lo: float, hi: float) -> list[tuple[float, float]]:
    # split a cell away from the origin into octaves of |x|
    if lo > 0.0 and hi > 2.0 * lo:
        e = np.unique(np.append(lo * np.exp2(np.arange(int(math.log2(hi / lo)) + 1)), hi))
        return list(zip(e[:-1], e[1:]))
    if hi < 0.0 and lo < 2.0 * hi:
        return [(-b, -a) for a, b in reversed(_graded(-hi, -lo))]
    return [(lo, hi)]


def _exp_at(g: PiecewisePower, x: float) -> float:
    k = int(np.clip(np.searchsorted(g.breakpoints, x, side="right") - 1, 0, g.coefs.size - 1))
    return float(g.exps[k])


def _ainfty_search(w: PiecewisePower, cfg: SearchConfig, K: int) -> ConstantEstimate:
    z = cfg.grid(K).nodes(w)
    best, bi, bj = -math.inf, 0, 1
    count = 0
    rtol = min(cfg.rtol, 1e-6)
    for i in range(z.size - 1):
        for j in range(i + 1, z.size):
            if integrate(w, (z[i], z[j])) == 0.0:
                continue
            val = fujii_wilson_cube(w, (z[i], z[j]), rtol)
            count += 1
            if val > best:
                best, bi, bj = val, i, j
    a, b = z[bi], z[bj]
    refined = False
    if cfg.refine and np.isfinite(best):

        def fun(lo, hi):
            try:
                return fujii_wilson_cube(w, (lo, hi), rtol)
            except (ZeroDivisionError, ValueError):
                return 0.0

        ra, rb = _refine_pair(fun, z, bi, bj, maxfev=60)
        cand = fun(ra, rb)
        if cand > best:
            a, b, best, refined = ra, rb, cand, True
    return ConstantEstimate(float(best), Interval(float(a), float(b)), count, refined)


def ainfty_fujii_wilson(w: PiecewisePower, cfg: SearchConfig = SearchConfig(), level_cap: int = 16) -> ConstantEstimate:
    """Fujii-Wilson constant ``sup_Q (1/w(Q)) int_Q M(w chi_Q)``.

    Each candidate costs an adaptive quadrature, so adaptive doubling stops at
    ``level_cap`` levels.
    """
    return _adaptive(lambda K: _ainfty_search(w, cfg, K), cfg, cap=level_cap)


def _product_estimate(e1: ConstantEstimate, e2: ConstantEstimate) -> ConstantEstimate:
    return ConstantEstimate(
        e1.value * e2.value,
        Rect(e1.argmax, e2.argmax),
        e1.searched * e2.searched,
        e1.refined or e2.refined,
        max(e1.levels, e2.levels),
        e1.converged and e2.converged,
        e1.finite and e2.finite,
    )


def strong_constants_separable(
    w1: PiecewisePower, w2: PiecewisePower, p: float, cfg: SearchConfig = SearchConfig()
) -> ConstantEstimate:
    """Rectangle A_p constant of ``w1(x) w2(y)``; rectangle averages factorise."""
    return _product_estimate(ap_constant(w1, p, cfg), ap_constant(w2, p, cfg))


def strong_ainfty_separable(w1: PiecewisePower, w2: PiecewisePower, cfg: SearchConfig = SearchConfig()) -> ConstantEstimate:
    """Rectangle Fujii-Wilson constant of ``w1(x) w2(y)``.

    On a rectangle ``I x J`` the strong maximal function of the product is
    at most ``M(w1 chi_I) M(w2 chi_J)``, so the product of the one-variable
    constants is reported.
    """
    return _product_estimate(ainfty_fujii_wilson(w1, cfg), ainfty_fujii_wilson(w2, cfg))


# reverse Hoelder and openness


def reverse_holder_check(w: PiecewisePower, r: float, Q) -> float:
    """``(avg_Q w^r)^(1/r) / (2 avg_Q w)``; at most 1 means the inequality holds on Q."""
    if not r > 1.0:
        raise ValueError("need r > 1")
    Q = as_interval(Q)
    wr = power(w, r)
    return average(wr, Q) ** (1.0 / r) / (2.0 * average(w, Q))


def reverse_holder_sup(w: PiecewisePower, r: float, cfg: SearchConfig = SearchConfig()) -> ConstantEstimate:
    """Largest reverse Hoelder ratio over the candidate family."""
    wr = power(w, r)
    if not wr.locally_integrable:
        raise NonIntegrable("w**r is not locally integrable")
    z = cfg.grid().nodes(w)
    L = _pair_lengths(z)
    A = _kernels.pair_integrals(*w.arrays, z)
    B = _kernels.pair_integrals(*wr.arrays, z)
    with np.errstate(invalid="ignore", divide="ignore"):
        vals = (B / L) ** (1.0 / r) / (2.0 * A / L)
    vals = np.where(A > 0.0, vals, np.nan)
    i, j = _best_pair(vals)
    n = z.size
    return ConstantEstimate(float(vals[i, j]), Interval(z[i], z[j]), n * (n - 1) // 2, False, cfg.levels)


def rh_exponent(ainfty: float, c: float = 1.0) -> float:
    """``r`` with ``r' = c * ainfty``."""
    rp = c * ainfty
    if not rp > 1.0:
        raise DegenerateExponent(f"c * [w]_Ainf = {rp} must exceed 1")
    return rp / (rp - 1.0)


def openness_exponent(ainfty_sigma: float, p: float, c: float = 1.0) -> float:
    """``r`` with ``r' = c p' [sigma]_Ainf``, the exponent of the openness bound."""
    return rh_exponent(p / (p - 1.0) * ainfty_sigma, c)


def openness_check(
    v: PiecewisePower, w: PiecewisePower, p: float, r: float, cfg: SearchConfig = SearchConfig()
) -> tuple[ConstantEstimate, ConstantEstimate]:
    """``([v,w]_{A_{p/r}}, [v,w]_{A_p})`` on the same candidate family."""
    if not r > 1.0:
        raise ValueError("need r > 1")
    if r >= p:
        raise ExponentOrder(f"need r < p, got r={r}, p={p}")
    return ap_two_weight(v, w, p / r, cfg), ap_two_weight(v, w, p, cfg)


def calibrate_rh_constant(
    weights: Sequence[PiecewisePower], cfg: SearchConfig = SearchConfig(), candidates=(1, 2, 4, 8)
) -> Optional[float]:
    """Smallest c in ``candidates`` making the reverse Hoelder ratio <= 1 for every weight."""
    ainf = [ainfty_fujii_wilson(w, replace(cfg, adaptive=False, refine=False)).value for w in weights]
    for c in candidates:
        ok = True
        for w, a in zip(weights, ainf):
            try:
                r = rh_exponent(a, c)
                ok = reverse_holder_sup(w, r, cfg).value <= 1.0
            except (NonIntegrable, DegenerateExponent):
                ok = False
            if not ok:
                break
        if ok:
            return float(c)
    return None
