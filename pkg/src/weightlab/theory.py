"""Closed-form bound evaluators and the monotone-integral lemma checker.

Every function here is pure arithmetic on supplied constants.  Unknown
dimensional constants (``cn``) are explicit inputs and never folded in
silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import Divergent, ExponentOrder
from .funcspace import INF, PiecewisePower, integrate_range, power, product


def conjugate(p: float) -> float:
    if p == INF:
        return 1.0
    if p == 1.0:
        return INF
    return p / (p - 1.0)


@dataclass(frozen=True)
class BoundInputs:
    p: float
    q: float
    apc: float = 1.0
    ainfty_sigma: float = 1.0
    ainfty_w: float = 1.0
    a1_vw: float = 1.0
    a1_w: float = 1.0
    n: int = 1
    cn: float = 1.0
    A: float = 0.0

    def __post_init__(self):
        if not self.p > 1.0:
            raise ValueError("need p > 1")
        if not self.q > 0.0:
            raise ValueError("need q > 0")
        if self.n not in (1, 2):
            raise ValueError("dimension must be 1 or 2")
        if not self.cn > 0.0 or self.A < 0.0:
            raise ValueError("need cn > 0 and A >= 0")
        for name in ("apc", "ainfty_sigma", "ainfty_w", "a1_vw", "a1_w"):
            if getattr(self, name) < 1.0:
                raise ValueError(f"{name} must be at least 1")


def buckley_bound(p: float, apc: float) -> float:
    """Power law ``apc**(1/(p-1))``, without multiplicative constants."""
    if not p > 1.0:
        raise ValueError("need p > 1")
    return apc ** (1.0 / (p - 1.0))


def mixed_bound_lorentz(b: BoundInputs) -> float:
    """Two-weight mixed bound; the ``p <= q`` branch also covers ``q = p``."""
    pp = conjugate(b.p)
    if b.q >= b.p:
        return b.cn * pp * b.apc ** (1.0 / b.p) * b.ainfty_sigma ** (1.0 / b.p)
    return (4.0 * b.cn / b.q) ** (1.0 / b.q) * pp ** (1.0 / b.q) * b.apc ** (1.0 / b.p) * b.ainfty_sigma ** (1.0 / b.q)


def mixed_branch_ratio(p: float, cn: float = 1.0) -> float:
    """Exact ratio (upper branch / lower branch) of the mixed bound at ``q = p``."""
    pp = conjugate(p)
    return (cn * pp) ** (1.0 - 1.0 / p) * (p / 4.0) ** (1.0 / p)


def main_theorem_bound(p: float, q: float, r: float, A: float, weak_norm_pr: float) -> float:
    """Lorentz bound of a sublinear operator from its weak ``L^{p/r}`` norm ``N``."""
    if not 1.0 < r < p:
        raise ExponentOrder(f"need 1 < r < p, got r={r}, p={p}")
    rp = conjugate(r)
    N = weak_norm_pr ** (1.0 / r)
    if p <= q:
        return (1.0 + A) * rp ** (1.0 / p) * N
    return (1.0 + A) * (4.0 * rp / q) ** (1.0 / q) * N


def strong_bound(b: BoundInputs) -> float:
    """Strong-maximal bound with rectangle constants ``apc``, ``ainfty_sigma``."""
    p, q, n, A = b.p, b.q, b.n, b.apc
    pp = conjugate(p)
    ap_part = A ** (1.0 / p + (n - 1.0) / (p - 1.0))
    if p <= q:
        return pp**n * math.log(math.e + A) ** (1.0 / p) * ap_part * b.ainfty_sigma ** (1.0 / p)
    return (
        (2.0 ** (n + 3) / q) ** (1.0 / q)
        * pp ** (1.0 / q + n - 1.0)
        * math.log(math.e + A) ** (1.0 / q)
        * ap_part
        * b.ainfty_sigma ** (1.0 / q)
    )


def dual_bound(b: BoundInputs) -> float:
    """Bound for ``f -> M(fv)/w`` on ``L^{p',q'}``; needs ``p, q`` in ``(1, inf)``."""
    if not (1.0 < b.p < INF and 1.0 < b.q < INF):
        raise ValueError("need p and q in (1, inf)")
    m = min(conjugate(b.p), conjugate(b.q))
    return (
        b.p ** (1.0 / m)
        * math.log(math.e + b.a1_vw) ** (1.0 / m)
        * (1.0 + b.a1_vw)
        * b.a1_w ** (1.0 / conjugate(b.p))
    )


# monotone-integral lemma


def _positive_pieces(f: PiecewisePower):
    return [(lo, hi, c, a) for lo, hi, c, a in f.pieces() if hi > 0.0]


def _monotone(f: PiecewisePower, increasing: bool) -> bool:
    prev_right = None
    for lo, hi, c, a in _positive_pieces(f):
        if c < 0.0:
            return False
        if c > 0.0 and a != 0.0 and (a > 0.0) != increasing:
            return False
        if prev_right is not None and lo > 0.0:
            here = c * lo**a if c > 0.0 else 0.0
            if (here < prev_right) if increasing else (here > prev_right):
                return False
        if hi < INF:
            prev_right = c * hi**a if c > 0.0 else 0.0
    return True


@dataclass(frozen=True)
class Lemma5Instance:
    theta: float
    t: float
    phi: PiecewisePower
    psi: PiecewisePower

    def __post_init__(self):
        if not 0.0 < self.theta <= 1.0:
            raise ValueError("theta must lie in (0, 1]")
        if not self.t > 0.0:
            raise ValueError("t must be positive")
        if not _monotone(self.phi, True):
            raise ValueError("phi must be increasing on (0, inf)")
        if not _monotone(self.psi, False):
            raise ValueError("psi must be decreasing on (0, inf)")


_INV_S = PiecewisePower.monomial(-1.0, lo=0.0)


def _split_integral(g: PiecewisePower, lo: float, T: float, tail: bool = True) -> float:
    body = integrate_range(g, lo, max(T, lo))
    if not tail:
        if not np.isfinite(body):
            raise Divergent("integral diverges inside the window", end="s->0")
        return body
    tail = integrate_range(g, max(T, lo), INF)
    if not (np.isfinite(body) and np.isfinite(tail)):
        raise Divergent("integral diverges as s -> inf", end="s->inf")
    return body + tail


def lemma5_check(inst: Lemma5Instance, T_upper: float = INF, tail: bool = True) -> tuple[float, float]:
    """Both sides of the monotone-integral inequality.

    Integrals over ``(t, inf)`` are split at ``T_upper``; the part beyond is
    a power tail taken in closed form.  With ``tail=False`` both integrals
    stop at ``T_upper`` (the dyadic argument survives the truncation).
    """
    if not tail and not T_upper < INF:
        raise ValueError("a truncated window needs a finite T_upper")
    th = inst.theta
    g = product(product(inst.phi, inst.psi), _INV_S)
    lhs = _split_integral(g, inst.t, T_upper, tail) ** th
    h = product(product(power(inst.phi.dilate(4.0), th), power(inst.psi, th)), _INV_S)
    rhs = math.log(2.0) ** (th - 1.0) * _split_integral(h, inst.t / 2.0, T_upper, tail)
    return lhs, rhs


def random_lemma5_instance(rng: np.random.Generator) -> Lemma5Instance:
    """Random increasing ``phi`` and decreasing ``psi`` with a decaying product."""
    k = int(rng.integers(1, 4))
    cuts = np.sort(rng.uniform(0.05, 20.0, size=k - 1))
    edges = np.concatenate([[0.0], cuts, [INF]])
    pa = rng.uniform(0.0, 1.0, size=k)
    sa = rng.uniform(-3.0, -1.2, size=k)
    phi_p, psi_p = [], []
    pc, sc = rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0)
    for i in range(k):
        lo, hi = edges[i], edges[i + 1]
        if i > 0:
            # continue from the left limit with an upward / downward jump
            pc = phi_p[-1][2] * lo ** phi_p[-1][3] * rng.uniform(1.0, 2.0) / lo ** pa[i]
            sc = psi_p[-1][2] * lo ** psi_p[-1][3] * rng.uniform(0.5, 1.0) / lo ** sa[i]
        phi_p.append((lo, hi, pc, pa[i]))
        psi_p.append((lo, hi, sc, sa[i]))
    theta = float(rng.choice(np.round(np.arange(1, 11) / 10.0, 1)))
    return Lemma5Instance(theta, float(rng.uniform(0.1, 10.0)), PiecewisePower.from_pieces(phi_p), PiecewisePower.from_pieces(psi_p))
