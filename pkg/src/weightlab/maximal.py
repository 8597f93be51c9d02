"""Maximal operators on piecewise-power inputs.

``maximal_at`` is exact up to a bisection tolerance: on each piece the
running average over ``[x, b]`` has at most one interior critical point, and
it is located by bisection on the sign of the derivative.  The centred and
weighted-centred operators scan the half-width on a geometric grid aligned
with the distances to the breakpoints and refine the best cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from . import _kernels
from .errors import DegenerateWeight, NonIntegrable, ZeroWeightAtPoint
from .funcspace import INF, Interval, PiecewisePower, as_interval, power, product


def _check_integrable(f: PiecewisePower) -> None:
    if not f.locally_integrable:
        raise NonIntegrable("input is not locally integrable at the origin")


def maximal_at(f: PiecewisePower, x: float) -> float:
    """Uncentred Hardy-Littlewood maximal function at ``x``."""
    _check_integrable(f)
    return float(_kernels.maximal_values(*f.arrays, [float(x)])[0])


def maximal_many(f: PiecewisePower, xs) -> np.ndarray:
    _check_integrable(f)
    return _kernels.maximal_values(*f.arrays, np.asarray(xs, dtype=float))


def strong_maximal_separable(f1: PiecewisePower, f2: PiecewisePower, x: float, y: float) -> float:
    """Strong maximal function of ``f1(x) f2(y)``; rectangle averages factorise."""
    return maximal_at(f1, x) * maximal_at(f2, y)


def dual_T_at(f: PiecewisePower, v: PiecewisePower, w: PiecewisePower, x: float) -> float:
    """``M(f v)(x) / w(x)``."""
    wx = float(w(x))
    if wx == 0.0:
        raise ZeroWeightAtPoint(f"w({x}) = 0")
    return maximal_at(product(f, v), x) / wx


# centred operators


def _radii(bp: np.ndarray, x: float, per_cell: int = 24) -> np.ndarray:
    """Half-widths to probe: distances to breakpoints plus geometric fill."""
    d = np.abs(bp - x)
    d = d[d > 0.0]
    scale = max(1.0, abs(x), float(d.max()) if d.size else 1.0)
    anchors = np.unique(np.concatenate([d, [scale * 1e-9, scale * 1e6]]))
    fill = [anchors]
    for lo, hi in zip(anchors[:-1], anchors[1:]):
        fill.append(np.geomspace(lo, hi, per_cell + 2)[1:-1])
    return np.unique(np.concatenate(fill))


def _centered_sup(num: PiecewisePower, den: Optional[PiecewisePower], x: float) -> float:
    """sup over h > 0 of num([x-h, x+h]) / den([x-h, x+h]) (den=None: length)."""
    bp = num.finite_breakpoints if den is None else np.union1d(num.finite_breakpoints, den.finite_breakpoints)
    h = _radii(bp, x)

    def ratio(hs):
        hs = np.atleast_1d(hs)
        lo, hi = x - hs, x + hs
        top = _kernels.interval_integrals(*num.arrays, lo, hi)
        if den is None:
            bottom = hi - lo
        else:
            bottom = _kernels.interval_integrals(*den.arrays, lo, hi)
            if np.any(bottom == 0.0):
                raise DegenerateWeight(f"weight vanishes on a window around {x}")
        with np.errstate(invalid="ignore"):
            r = top / bottom
        return np.where(np.isnan(r), 0.0, r)

    vals = ratio(h)
    if np.any(np.isinf(vals)):
        return INF
    best = float(vals.max())
    # refine around the top few samples
    for i in np.argsort(vals)[-3:]:
        lo = h[max(i - 1, 0)]
        hi = h[min(i + 1, h.size - 1)]
        if hi <= lo:
            continue
        res = minimize_scalar(
            lambda t: -float(ratio(math.exp(t))[0]),
            bounds=(math.log(lo), math.log(hi)),
            method="bounded",
            options={"xatol": 1e-12},
        )
        best = max(best, -float(res.fun))
    return best


def maximal_centered_at(f: PiecewisePower, x: float) -> float:
    """Centred maximal function: sup over windows ``[x - r/2, x + r/2]``."""
    _check_integrable(f)
    return _centered_sup(f, None, float(x))


def weighted_centered_Mp_at(f: PiecewisePower, w: PiecewisePower, p: float, x: float) -> float:
    """``sup_r ( (1/w(Q_r)) * int_{Q_r} f^p w )^(1/p)`` over centred windows."""
    if not p > 0:
        raise ValueError("p must be positive")
    num = product(power(f, p), w)
    _check_integrable(num)
    _check_integrable(w)
    return _centered_sup(num, w, float(x)) ** (1.0 / p)


# grids and profiles


@dataclass(frozen=True)
class GridSpec:
    """Geometric node set around the origin.

    Nodes are ``±S * 2**(-j/density)`` for ``j = 0..levels*density`` with
    ``S = max(|lo|, |hi|)``, clipped to the domain, together with 0, the
    domain ends and any breakpoints of the input inside the domain.
    """

    domain: Interval
    levels: int = 12
    density: int = 1

    def __post_init__(self):
        if self.levels < 1 or self.density < 1:
            raise ValueError("levels and density must be positive")
        object.__setattr__(self, "domain", as_interval(self.domain))
        if not self.domain.is_bounded:
            raise ValueError("grid domain must be bounded")

    def nodes(self, *funcs: PiecewisePower) -> np.ndarray:
        D = self.domain
        S = max(abs(D.lo), abs(D.hi))
        j = np.arange(self.levels * self.density + 1)
        mags = S * np.exp2(-j / self.density)
        pts = [mags, -mags, [0.0, D.lo, D.hi]]
        for f in funcs:
            pts.append(f.finite_breakpoints)
        z = np.unique(np.concatenate(pts))
        return z[(z >= D.lo) & (z <= D.hi)]

    def refined(self) -> "GridSpec":
        return GridSpec(self.domain, self.levels, self.density * 2)

    def deeper(self, extra: int = 2) -> "GridSpec":
        return GridSpec(self.domain, self.levels + extra, self.density)


@dataclass(frozen=True)
class TailModel:
    """``coef * |x|**exponent`` bracket for ``|x| >= |start|`` on one side."""

    side: str  # "left" or "right"
    start: float
    exponent: float
    coef_lo: float
    coef_hi: float


@dataclass
class MaximalResult:
    nodes: np.ndarray
    values: np.ndarray
    tails: dict = field(default_factory=dict)
    grid: Optional[GridSpec] = None

    def as_rows(self) -> list[tuple[float, float]]:
        return list(zip(self.nodes.tolist(), self.values.tolist()))


def _compact_tails(f: PiecewisePower, nodes: np.ndarray) -> dict:
    """Exact brackets of Mf outside the node range for compactly supported f.

    For x >= R > sup(supp f): [lo, x] with lo = inf(supp f) gives the lower
    bound mass/(x - lo); every interval containing x and meeting the support
    has length >= x - sup(supp f), which gives the upper bound.
    """
    supp = f.support()
    if supp is None or not supp.is_bounded:
        return {}
    mass = float(_kernels.interval_integrals(*f.arrays, [supp.lo], [supp.hi])[0])
    tails = {}
    R = float(nodes[-1])
    if R > 0.0 and R > supp.hi:
        lo = mass / (1.0 + max(0.0, -supp.lo) / R)
        hi = mass / (1.0 - max(0.0, supp.hi) / R)
        tails["right"] = TailModel("right", R, -1.0, lo, hi)
    L = float(nodes[0])
    if L < 0.0 and L < supp.lo:
        A = -L
        lo = mass / (1.0 + max(0.0, supp.hi) / A)
        hi = mass / (1.0 - max(0.0, -supp.lo) / A)
        tails["left"] = TailModel("left", L, -1.0, lo, hi)
    return tails


def maximal_profile(
    f: PiecewisePower,
    grid: GridSpec,
    functional: Optional[Callable[[MaximalResult], float]] = None,
    rtol: float = 1e-4,
    max_doublings: int = 6,
) -> MaximalResult:
    """Mf at every grid node.

    With ``functional`` given, the grid density is doubled until the
    functional changes by less than ``rtol`` relative (at most
    ``max_doublings`` times).
    """
    _check_integrable(f)

    def run(g: GridSpec) -> MaximalResult:
        z = g.nodes(f)
        vals = _kernels.maximal_values(*f.arrays, z)
        return MaximalResult(z, vals, _compact_tails(f, z), g)

    res = run(grid)
    if functional is None:
        return res
    prev = functional(res)
    g = grid
    for _ in range(max_doublings):
        g = g.refined()
        nxt = run(g)
        cur = functional(nxt)
        res = nxt
        if abs(cur - prev) <= rtol * max(abs(cur), 1e-300):
            break
        prev = cur
    return res


def dual_T_profile(f: PiecewisePower, v: PiecewisePower, w: PiecewisePower, grid: GridSpec) -> MaximalResult:
    """Profile of ``T f = M(f v) / w`` with tails divided by the weight's outer pieces."""
    fv = product(f, v)
    base = maximal_profile(fv, grid)
    wv = np.asarray(w(base.nodes), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = base.values / wv
    vals = np.where(wv == np.inf, 0.0, vals)
    if np.any(wv == 0.0):
        raise ZeroWeightAtPoint("w vanishes at a grid node")
    tails = {}
    for side, t in base.tails.items():
        k = 0 if side == "left" else -1
        cw, aw = float(w.coefs[k]), float(w.exps[k])
        edge = w.breakpoints[1] if side == "left" else w.breakpoints[-2]
        covers = (side == "left" and edge >= t.start) or (side == "right" and edge <= t.start)
        if cw > 0.0 and covers:
            tails[side] = TailModel(side, t.start, t.exponent - aw, t.coef_lo / cw, t.coef_hi / cw)
    return MaximalResult(base.nodes, vals, tails, grid)


def maximal_bruteforce(f: PiecewisePower, xs: Sequence[float]) -> np.ndarray:
    """O(m^2) endpoint-pair oracle for compactly supported step functions."""
    if not f.is_step or not f.is_compact:
        raise ValueError("brute force needs a compactly supported step function")
    e = f.finite_breakpoints
    return _kernels.step_bruteforce(e, f.coefs[1 : e.size], np.asarray(xs, dtype=float))
