"""Nonnegative piecewise-power functions on the real line.

A :class:`PiecewisePower` is given by breakpoints ``b_0 < ... < b_m`` and,
on each gap ``(b_k, b_{k+1})``, a piece ``c_k * |x|**a_k``.  Every weight,
dual weight and test function used by the package is one of these, and the
class is closed under products, real powers and dilations, with integrals
available in closed form.

Construction normalises the representation so that equal functions compare
equal:

* the line is always covered: missing ends are filled with zero pieces;
* zero pieces carry exponent 0;
* a gap with 0 in its interior and a nonzero exponent is split at 0;
* adjacent gaps with identical pieces are merged (never across 0 when the
  exponent is nonzero, since ``|x|**a`` is not monotone there).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import InvalidInterval, NonIntegrable, UndefinedPower

INF = math.inf


@dataclass(frozen=True)
class Interval:
    """Interval with ``lo < hi``.

    Endpoints may be infinite (superlevel sets can be unbounded); operations
    that need a finite interval check :attr:`is_bounded` themselves.
    """

    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if math.isnan(lo) or math.isnan(hi) or not lo < hi:
            raise InvalidInterval(f"need lo < hi, got [{self.lo}, {self.hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def is_bounded(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    def contains(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi


@dataclass(frozen=True)
class Rect:
    """Axis-parallel rectangle ``x × y``."""

    x: Interval
    y: Interval

    @property
    def area(self) -> float:
        return self.x.length * self.y.length


def as_interval(I) -> Interval:
    if isinstance(I, Interval):
        return I
    lo, hi = I
    return Interval(lo, hi)


def _canonical(bp, c, a):
    bp = [float(b) for b in bp]
    c = [float(v) for v in c]
    a = [float(v) for v in a]
    if len(bp) != len(c) + 1 or len(c) != len(a):
        raise ValueError("need one more breakpoint than pieces")
    if len(c) == 0:
        return [-INF, INF], [0.0], [0.0]
    for k in range(len(c)):
        if not bp[k] < bp[k + 1]:
            raise ValueError("breakpoints must be strictly increasing")
        if not c[k] >= 0.0 or math.isnan(a[k]):
            raise ValueError("pieces must have c >= 0")
        if c[k] == 0.0:
            a[k] = 0.0
    if bp[0] > -INF:
        bp.insert(0, -INF)
        c.insert(0, 0.0)
        a.insert(0, 0.0)
    if bp[-1] < INF:
        bp.append(INF)
        c.append(0.0)
        a.append(0.0)
    # split gaps that straddle the origin
    nb, nc, na = [bp[0]], [], []
    for k in range(len(c)):
        if bp[k] < 0.0 < bp[k + 1] and a[k] != 0.0:
            nb.append(0.0)
            nc.append(c[k])
            na.append(a[k])
        nb.append(bp[k + 1])
        nc.append(c[k])
        na.append(a[k])
    # merge identical neighbours
    mb, mc, ma = [nb[0]], [nc[0]], [na[0]]
    for k in range(1, len(nc)):
        same = nc[k] == mc[-1] and na[k] == ma[-1]
        if same and not (na[k] != 0.0 and nb[k] == 0.0):
            continue
        mb.append(nb[k])
        mc.append(nc[k])
        ma.append(na[k])
    mb.append(nb[-1])
    return mb, mc, ma


class PiecewisePower:
    """Nonnegative function ``x -> c_k |x|**a_k`` on gap ``k``."""

    __slots__ = ("_bp", "_c", "_a")

    def __init__(self, breakpoints: Sequence[float], coefs: Sequence[float], exps: Sequence[float]):
        bp, c, a = _canonical(breakpoints, coefs, exps)
        self._bp = np.array(bp)
        self._c = np.array(c)
        self._a = np.array(a)
        for arr in (self._bp, self._c, self._a):
            arr.flags.writeable = False

    # construction helpers
    @classmethod
    def from_pieces(cls, pieces: Iterable[tuple]) -> "PiecewisePower":
        """Build from ``(lo, hi, c, a)`` tuples; uncovered gaps are zero."""
        pieces = sorted((float(lo), float(hi), float(c), float(a)) for lo, hi, c, a in pieces)
        bp: list[float] = []
        cs: list[float] = []
        es: list[float] = []
        for lo, hi, c, a in pieces:
            if not lo < hi:
                raise InvalidInterval(f"piece [{lo}, {hi}] is empty")
            if bp and lo < bp[-1]:
                raise ValueError("pieces overlap")
            if bp and lo > bp[-1]:
                bp.append(lo)
                cs.append(0.0)
                es.append(0.0)
            elif not bp:
                bp.append(lo)
            bp.append(hi)
            cs.append(c)
            es.append(a)
        return cls(bp, cs, es)

    @classmethod
    def constant(cls, c: float = 1.0) -> "PiecewisePower":
        return cls([-INF, INF], [c], [0.0])

    @classmethod
    def indicator(cls, lo: float, hi: float, c: float = 1.0) -> "PiecewisePower":
        return cls([lo, hi], [c], [0.0])

    @classmethod
    def monomial(cls, a: float, c: float = 1.0, lo: float = -INF, hi: float = INF) -> "PiecewisePower":
        """``c|x|**a`` on ``(lo, hi)``, zero elsewhere."""
        return cls([lo, hi], [c], [a])

    # accessors
    @property
    def breakpoints(self) -> np.ndarray:
        return self._bp

    @property
    def coefs(self) -> np.ndarray:
        return self._c

    @property
    def exps(self) -> np.ndarray:
        return self._a

    @property
    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self._bp, self._c, self._a

    def pieces(self) -> list[tuple[float, float, float, float]]:
        return [
            (float(self._bp[k]), float(self._bp[k + 1]), float(self._c[k]), float(self._a[k]))
            for k in range(self._c.size)
        ]

    @property
    def finite_breakpoints(self) -> np.ndarray:
        return self._bp[np.isfinite(self._bp)]

    def support(self) -> Interval | None:
        """Smallest interval outside which f vanishes (None if f == 0)."""
        nz = np.flatnonzero(self._c > 0.0)
        if nz.size == 0:
            return None
        return Interval(self._bp[nz[0]], self._bp[nz[-1] + 1])

    @property
    def is_compact(self) -> bool:
        s = self.support()
        return s is None or s.is_bounded

    @property
    def is_step(self) -> bool:
        return bool(np.all(self._a == 0.0))

    @property
    def is_zero(self) -> bool:
        return not np.any(self._c > 0.0)

    def singular_gaps(self) -> list[int]:
        """Gaps where a positive piece with exponent <= -1 touches 0."""
        out = []
        for k in range(self._c.size):
            if self._c[k] > 0.0 and self._a[k] <= -1.0 and (self._bp[k] == 0.0 or self._bp[k + 1] == 0.0):
                out.append(k)
        return out

    @property
    def locally_integrable(self) -> bool:
        return not self.singular_gaps()

    # evaluation
    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        k = np.clip(np.searchsorted(self._bp, x, side="right") - 1, 0, self._c.size - 1)
        c = self._c[k]
        a = self._a[k]
        t = np.abs(x)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            val = np.where(a == 0.0, c, c * t**a)
        val = np.where(c == 0.0, 0.0, val)
        return val if val.ndim else float(val)

    def sup(self) -> float:
        """Essential supremum."""
        best = 0.0
        for lo, hi, c, a in self.pieces():
            if c == 0.0:
                continue
            if a == 0.0:
                best = max(best, c)
            elif lo >= 0.0:
                if (a > 0.0 and hi == INF) or (a < 0.0 and lo == 0.0):
                    return INF
                best = max(best, c * (hi if a > 0.0 else lo) ** a)
            else:
                if (a > 0.0 and lo == -INF) or (a < 0.0 and hi == 0.0):
                    return INF
                best = max(best, c * (-lo if a > 0.0 else -hi) ** a)
        return best

    # algebra
    def scale(self, k: float) -> "PiecewisePower":
        if k < 0:
            raise ValueError("scale factor must be nonnegative")
        return PiecewisePower(self._bp, self._c * k, self._a)

    def reflect(self) -> "PiecewisePower":
        """x -> f(-x)."""
        return PiecewisePower(-self._bp[::-1], self._c[::-1], self._a[::-1])

    def dilate(self, lam: float) -> "PiecewisePower":
        """x -> f(lam * x) for lam > 0."""
        if not lam > 0:
            raise ValueError("dilation factor must be positive")
        with np.errstate(over="ignore"):
            c = np.where(self._c > 0.0, self._c * lam**self._a, 0.0)
        return PiecewisePower(self._bp / lam, c, self._a)

    def __mul__(self, other):
        if isinstance(other, PiecewisePower):
            return product(self, other)
        return self.scale(float(other))

    __rmul__ = __mul__

    def __add__(self, other: "PiecewisePower") -> "PiecewisePower":
        bp, ia, ib = _merge(self, other)
        c = np.empty(ia.size)
        a = np.empty(ia.size)
        for k, (i, j) in enumerate(zip(ia, ib)):
            c1, a1, c2, a2 = self._c[i], self._a[i], other._c[j], other._a[j]
            if c1 == 0.0:
                c[k], a[k] = c2, a2
            elif c2 == 0.0 or a1 == a2:
                c[k], a[k] = c1 + c2, a1
            else:
                raise ValueError("sum of pieces with different exponents is not a single power")
        return PiecewisePower(bp, c, a)

    def __eq__(self, other):
        if not isinstance(other, PiecewisePower):
            return NotImplemented
        return (
            np.array_equal(self._bp, other._bp)
            and np.array_equal(self._c, other._c)
            and np.array_equal(self._a, other._a)
        )

    __hash__ = None

    def __repr__(self):
        body = ", ".join(f"({lo:g},{hi:g}):{c:g}|x|^{a:g}" for lo, hi, c, a in self.pieces() if c > 0)
        return f"{type(self).__name__}[{body or '0'}]"


class StepFunction(PiecewisePower):
    """Compactly supported step function with values on ``[e_0, e_1), ...``."""

    __slots__ = ()

    def __init__(self, edges: Sequence[float], values: Sequence[float]):
        edges = [float(e) for e in edges]
        values = [float(v) for v in values]
        if len(edges) != len(values) + 1:
            raise ValueError("need len(edges) == len(values) + 1")
        if not all(math.isfinite(e) for e in edges):
            raise ValueError("step functions have finite edges")
        super().__init__(edges, values, [0.0] * len(values))

    @property
    def edges(self) -> np.ndarray:
        return self.finite_breakpoints

    @property
    def values(self) -> np.ndarray:
        return self._c[1:-1]

    @classmethod
    def random(cls, rng: np.random.Generator, m: int, span: float = 10.0) -> "StepFunction":
        edges = np.sort(rng.uniform(-span, span, m + 1))
        values = rng.exponential(1.0, m) * (rng.random(m) > 0.2)
        return cls(edges, values)


def _merge(f: PiecewisePower, g: PiecewisePower):
    """Union of breakpoints and, per merged gap, the source gap indices."""
    bp = np.union1d(f.breakpoints, g.breakpoints)
    mids = _midpoints(bp)
    ia = np.clip(np.searchsorted(f.breakpoints, mids, side="right") - 1, 0, f.coefs.size - 1)
    ib = np.clip(np.searchsorted(g.breakpoints, mids, side="right") - 1, 0, g.coefs.size - 1)
    return bp, ia, ib


def _midpoints(bp: np.ndarray) -> np.ndarray:
    lo, hi = bp[:-1], bp[1:]
    with np.errstate(invalid="ignore"):
        mid = 0.5 * (lo + hi)
    mid = np.where(np.isneginf(lo), np.minimum(hi, 0.0) - 1.0, mid)
    mid = np.where(np.isposinf(hi), np.maximum(lo, 0.0) + 1.0, mid)
    both = np.isneginf(lo) & np.isposinf(hi)
    return np.where(both, 0.0, mid)


# operations


def integrate(f: PiecewisePower, I) -> float:
    """Exact integral of f over a bounded interval."""
    I = as_interval(I)
    if not I.is_bounded:
        raise InvalidInterval("integration over an unbounded interval; truncate first")
    val = float(_kernels.interval_integrals(*f.arrays, [I.lo], [I.hi])[0])
    if math.isinf(val):
        raise NonIntegrable(f"integral over [{I.lo}, {I.hi}] diverges at the origin")
    return val


def integrate_range(f: PiecewisePower, lo: float, hi: float) -> float:
    """Integral over ``[lo, hi]`` with infinite ends allowed; may return inf."""
    if not lo < hi:
        if lo == hi:
            return 0.0
        raise InvalidInterval(f"need lo < hi, got [{lo}, {hi}]")
    return float(_kernels.interval_integrals(*f.arrays, [lo], [hi])[0])


def integrate_many(f: PiecewisePower, lo, hi) -> np.ndarray:
    return _kernels.interval_integrals(*f.arrays, lo, hi)


def average(f: PiecewisePower, I) -> float:
    I = as_interval(I)
    return integrate(f, I) / I.length


def power(f: PiecewisePower, r: float, where=None) -> PiecewisePower:
    """``f**r``; pieces map ``(c, a) -> (c**r, a*r)``.

    With ``where`` given, gaps outside that interval are set to zero rather
    than powered (used for dual weights of weights defined on a window).
    """
    r = float(r)
    bp, c, a = f.arrays
    if where is not None:
        W = as_interval(where)
        pieces = []
        for lo, hi, ck, ak in f.pieces():
            lo2, hi2 = max(lo, W.lo), min(hi, W.hi)
            if lo2 < hi2:
                pieces.append((lo2, hi2, ck, ak))
        if not pieces:
            return PiecewisePower.constant(0.0)
        f = PiecewisePower.from_pieces(pieces)
        # pieces outside the window were filled with zeros by from_pieces
        bp, c, a = f.arrays
        inside = np.array([(lo >= W.lo and hi <= W.hi) for lo, hi, _, _ in f.pieces()])
    else:
        inside = np.ones(c.size, dtype=bool)
    if r < 0 and np.any((c == 0.0) & inside):
        raise UndefinedPower("negative power of a function vanishing on a gap")
    with np.errstate(divide="ignore", over="ignore"):
        nc = np.where(c > 0.0, c**r, 0.0)
    return PiecewisePower(bp, nc, np.where(c > 0.0, a * r, 0.0))


def product(f: PiecewisePower, g: PiecewisePower) -> PiecewisePower:
    bp, ia, ib = _merge(f, g)
    c = f.coefs[ia] * g.coefs[ib]
    a = np.where(c > 0.0, f.exps[ia] + g.exps[ib], 0.0)
    return PiecewisePower(bp, c, a)


def restrict(f: PiecewisePower, I) -> PiecewisePower:
    """f on I, zero elsewhere."""
    I = as_interval(I)
    return product(f, PiecewisePower.indicator(I.lo, I.hi))


def _merge_intervals(parts: list[tuple[float, float]]) -> list[Interval]:
    out: list[list[float]] = []
    for lo, hi in sorted(parts):
        if out and lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return [Interval(lo, hi) for lo, hi in out]


def superlevel(f: PiecewisePower, s: float) -> list[Interval]:
    """The set ``{f > s}`` as disjoint intervals (open ends implied)."""
    if not s > 0:
        raise ValueError("level must be positive")
    parts = []
    for lo, hi, c, a in f.pieces():
        if c == 0.0:
            continue
        if a == 0.0:
            if c > s:
                parts.append((lo, hi))
            continue
        e = (math.log(s) - math.log(c)) / a
        t = math.exp(min(e, 709.0)) if e > -745.0 else 0.0  # |x| at which c|x|^a = s
        if e > 709.0:
            t = INF
        if lo >= 0.0:
            lo2, hi2 = (max(lo, t), hi) if a > 0 else (lo, min(hi, t))
        else:
            lo2, hi2 = (lo, min(hi, -t)) if a > 0 else (max(lo, -t), hi)
        if lo2 < hi2:
            parts.append((lo2, hi2))
    return _merge_intervals(parts)


# descriptor I/O


def parse_descriptor(text: str) -> PiecewisePower:
    """Parse ``lo hi c a`` lines (``#`` comments, ``-inf``/``inf`` allowed)."""
    pieces = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.replace(",", " ").split()
        if len(fields) != 4:
            raise ValueError(f"line {lineno}: expected 'lo hi c a', got {raw!r}")
        try:
            pieces.append(tuple(float(v) for v in fields))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if not pieces:
        raise ValueError("descriptor has no pieces")
    return PiecewisePower.from_pieces(pieces)


def format_descriptor(f: PiecewisePower, include_zero: bool = False) -> str:
    lines = []
    for lo, hi, c, a in f.pieces():
        if c == 0.0 and not include_zero:
            continue
        lines.append(f"{lo!r} {hi!r} {c!r} {a!r}")
    return "\n".join(lines) + "\n"


def load_descriptor(path) -> PiecewisePower:
    with open(path, encoding="utf-8") as fh:
        return parse_descriptor(fh.read())
