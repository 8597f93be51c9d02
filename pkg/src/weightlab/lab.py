"""Delta sweeps, power-law fitting and persistence.

Each sweep builds a one-parameter family of weights and test functions,
measures norms (bracketed) and weight constants per delta, fits a log-log
slope and compares it with the predicted exponent.
"""

from __future__ import annotations

import csv
import io
import json
import math
import platform
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import _kernels
from .errors import BracketTooWide, InsufficientPoints, NonPositiveValue
from .funcspace import INF, Interval, PiecewisePower, as_interval
from .lorentz import LorentzParams, lorentz_norm, profile_norm
from .maximal import GridSpec, MaximalResult, dual_T_profile, maximal_profile
from .theory import BoundInputs, conjugate, dual_bound
from .weights import SearchConfig, a1_two_weight, ainfty_fujii_wilson, ap_constant, dual_weight

FAMILIES = ("buckley", "step-weight", "double-ainfty-falsification", "dual-A1")
DEFAULT_DELTAS = tuple(2.0 ** -k for k in range(1, 11))

GAP_TARGET = 1e-3
GAP_LIMIT = 1e-2


def fit_exponent(points: Sequence[tuple[float, float]]) -> tuple[float, float, float]:
    """Least squares of log(value) on log(delta): (slope, intercept, R^2)."""
    pts = list(points)
    if len(pts) < 2:
        raise InsufficientPoints("need at least two points to fit")
    d = np.array([p[0] for p in pts], dtype=float)
    v = np.array([p[1] for p in pts], dtype=float)
    if np.any(d <= 0.0) or np.any(v <= 0.0):
        raise NonPositiveValue("log-log fit needs positive deltas and values")
    x, y = np.log(d), np.log(v)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    slope = 0.0 if abs(slope) < 1e-13 else float(slope)
    return slope, float(intercept), r2


@dataclass(frozen=True)
class SweepConfig:
    family: str
    p: float = 2.0
    q: Optional[float] = None
    deltas: tuple = DEFAULT_DELTAS
    domain: Interval = Interval(-1e4, 1e4)
    grid_levels: int = 24
    cn: float = 1.0
    tolerance: float = 0.15
    out: Optional[str] = None
    density: int = 64
    max_density: int = 1024
    constants: bool = True
    workers: int = 4

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        q = self.p if self.q is None else float(self.q)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "deltas", tuple(float(d) for d in self.deltas))
        object.__setattr__(self, "domain", as_interval(self.domain))
        d = np.asarray(self.deltas)
        if d.size == 0 or np.any(d <= 0.0) or np.any(d >= 1.0):
            raise ValueError("deltas must lie in (0, 1)")
        if np.any(np.diff(d) >= 0.0):
            raise ValueError("deltas must be strictly decreasing")
        if not self.p > 1.0:
            raise ValueError("need p > 1")
        if self.family == "buckley" and not self.p <= q:
            raise ValueError("the buckley family needs p <= q")
        if self.family == "step-weight" and not q <= self.p:
            raise ValueError("the step-weight family needs q <= p")
        if self.family == "dual-A1" and not (1.0 < q < INF and self.p < INF):
            raise ValueError("the dual family needs p, q in (1, inf)")

    @classmethod
    def from_dict(cls, d: dict) -> "SweepConfig":
        d = dict(d)
        if "domain" in d and isinstance(d["domain"], dict):
            d["domain"] = Interval(float(d["domain"]["lo"]), float(d["domain"]["hi"]))
        if "deltas" in d:
            d["deltas"] = tuple(d["deltas"])
        if d.get("q") in ("inf", "Infinity"):
            d["q"] = INF
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        return cls(**d)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["domain"] = {"lo": self.domain.lo, "hi": self.domain.hi}
        d["deltas"] = list(self.deltas)
        if math.isinf(self.q):
            d["q"] = "inf"
        return d


def load_config(path) -> SweepConfig:
    return SweepConfig.from_dict(json.loads(Path(path).read_text()))


@dataclass
class SweepRow:
    delta: float
    value_lo: float
    value_hi: float
    constants: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)


@dataclass
class Fit:
    slope: float
    intercept: float
    r2: float
    predicted: Optional[float] = None
    tolerance: float = 0.15

    @property
    def ok(self) -> bool:
        return self.predicted is None or abs(self.slope - self.predicted) <= self.tolerance


@dataclass
class SweepReport:
    config: SweepConfig
    rows: list
    fits: dict
    checks: dict
    verdict: bool

    # primary fit is the measured value (conservative end included)
    @property
    def slope(self) -> float:
        return self.fits["value"].slope

    @property
    def r2(self) -> float:
        return self.fits["value"].r2

    @property
    def predicted(self) -> Optional[float]:
        return self.fits["value"].predicted

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "environment": environment(),
            "rows": [asdict(r) for r in self.rows],
            "fits": {k: asdict(f) | {"ok": f.ok} for k, f in self.fits.items()},
            "checks": self.checks,
            "verdict": self.verdict,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["delta", "value_lo", "value_hi", "constant_ap", "constant_ainfty_sigma"])
        for r in self.rows:
            wr.writerow(
                [
                    repr(r.delta),
                    repr(r.value_lo),
                    repr(r.value_hi),
                    repr(r.constants.get("ap", float("nan"))),
                    repr(r.constants.get("ainfty_sigma", float("nan"))),
                ]
            )
        return buf.getvalue()


def environment() -> dict:
    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "backend": _kernels.backend(),
        "platform": sys.platform,
    }


def write_report(report: SweepReport, out_dir) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = report.config.family
    jp, cp = out / f"{stem}.json", out / f"{stem}.csv"
    jp.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    cp.write_text(report.to_csv())
    return jp, cp


def load_report(path) -> dict:
    return json.loads(Path(path).read_text())


# families


def power_weight(p: float, delta: float) -> PiecewisePower:
    """``|x|**((p-1)(1-delta))``."""
    return PiecewisePower.monomial((p - 1.0) * (1.0 - delta))


def singular_function(delta: float) -> PiecewisePower:
    """``x**(delta-1)`` on ``(0, 1]``."""
    return PiecewisePower.monomial(delta - 1.0, lo=0.0, hi=1.0)


def step_weight(p: float, delta: float) -> PiecewisePower:
    """``delta**(p-1)`` on ``[-1, 1]`` and ``|x|**((1-delta)(p-1))`` outside."""
    a = (1.0 - delta) * (p - 1.0)
    return PiecewisePower.from_pieces([(-INF, -1.0, 1.0, a), (-1.0, 1.0, delta ** (p - 1.0), 0.0), (1.0, INF, 1.0, a)])


def _bracket(make: Callable[[GridSpec], MaximalResult], w: PiecewisePower, params: LorentzParams, cfg: SweepConfig):
    density = cfg.density
    while True:
        res = make(GridSpec(cfg.domain, cfg.grid_levels, density))
        lo, hi = profile_norm(res, w, params)
        gap = (hi - lo) / hi if hi > 0 else 0.0
        if gap < GAP_TARGET or density >= cfg.max_density:
            break
        density *= 2
    if gap > GAP_LIMIT:
        raise BracketTooWide(f"norm bracket gap {gap:.3g} after density {density}")
    return lo, hi, density, gap


_AP_CFG = SearchConfig(domain=Interval(-1.0, 1.0), levels=8)
_AINF_CFG = SearchConfig(domain=Interval(-1.0, 1.0), levels=4, adaptive=False)


def _power_constants(p: float, delta: float) -> dict:
    w = power_weight(p, delta)
    sigma = dual_weight(w, p)
    return {
        "ap": ap_constant(w, p, _AP_CFG).value,
        "ainfty_sigma": ainfty_fujii_wilson(sigma, _AINF_CFG).value,
        "ainfty_w": ainfty_fujii_wilson(w, _AINF_CFG).value,
    }


def _buckley_row(cfg: SweepConfig, delta: float) -> SweepRow:
    p = cfg.p
    params = LorentzParams(p, cfg.q)
    w, f = power_weight(p, delta), singular_function(delta)
    nf = lorentz_norm(f, w, params)
    lo, hi, dens, gap = _bracket(lambda g: maximal_profile(f, g), w, params, cfg)
    consts = _power_constants(p, delta) if cfg.constants else {}
    return SweepRow(delta, lo / nf, hi / nf, consts, {"norm_f": nf, "norm_Mf_lo": lo, "norm_Mf_hi": hi, "density": dens, "gap": gap})


def _step_row(cfg: SweepConfig, delta: float) -> SweepRow:
    p, q = cfg.p, cfg.q
    params = LorentzParams(p, q)
    w, f = step_weight(p, delta), PiecewisePower.indicator(0.0, 1.0)
    nf = lorentz_norm(f, w, params)
    closed = (p / q) ** (1.0 / q) * delta ** ((p - 1.0) / p)
    lo, hi, dens, gap = _bracket(lambda g: maximal_profile(f, g), w, params, cfg)
    consts = {}
    if cfg.constants:
        span = max(abs(cfg.domain.lo), abs(cfg.domain.hi))
        consts["ap"] = ap_constant(w, p, SearchConfig(domain=Interval(-span, span), levels=16)).value
    return SweepRow(delta, lo, hi, consts, {"norm_f": nf, "norm_f_closed": closed, "density": dens, "gap": gap})


def _double_row(cfg: SweepConfig, delta: float) -> SweepRow:
    base = _buckley_row(replace(cfg, family="buckley", out=None, constants=True), delta)
    c = base.constants
    denom = (c["ainfty_w"] * c["ainfty_sigma"]) ** (1.0 / cfg.p)
    extra = dict(base.extra, ratio_lo=base.value_lo, ratio_hi=base.value_hi)
    return SweepRow(delta, base.value_lo / denom, base.value_hi / denom, c, extra)


def dual_weights(delta: float) -> PiecewisePower:
    """``|x|**(-(1-delta))``, or the constant 1 for ``delta = 1``."""
    return PiecewisePower.constant(1.0) if delta >= 1.0 else PiecewisePower.monomial(-(1.0 - delta))


def _dual_row(cfg: SweepConfig, delta: float) -> SweepRow:
    p, q = cfg.p, cfg.q
    params = LorentzParams(conjugate(p), conjugate(q))
    v = w = dual_weights(delta)
    f = PiecewisePower.indicator(0.0, 1.0)
    nf = lorentz_norm(f, v, params)
    lo, hi, dens, gap = _bracket(lambda g: dual_T_profile(f, v, w, g), w, params, cfg)
    a1 = a1_two_weight(v, w, SearchConfig(domain=Interval(-1.0, 1.0), levels=8)).value
    bound = dual_bound(BoundInputs(p, q, a1_vw=max(a1, 1.0), a1_w=max(a1, 1.0), cn=cfg.cn))
    return SweepRow(delta, lo / nf, hi / nf, {"a1_vw": a1, "a1_w": a1}, {"bound": bound, "norm_f": nf, "density": dens, "gap": gap})


_ROWS = {"buckley": _buckley_row, "step-weight": _step_row, "double-ainfty-falsification": _double_row, "dual-A1": _dual_row}


def _rows(cfg: SweepConfig) -> list[SweepRow]:
    fn = _ROWS[cfg.family]
    if cfg.workers > 1 and len(cfg.deltas) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as ex:
            return list(ex.map(lambda d: fn(cfg, d), cfg.deltas))
    return [fn(cfg, d) for d in cfg.deltas]


def _fit_pair(rows, key_lo, key_hi, predicted, tol) -> tuple[Fit, Fit, Fit]:
    lo = fit_exponent([(r.delta, key_lo(r)) for r in rows])
    hi = fit_exponent([(r.delta, key_hi(r)) for r in rows])
    mid = fit_exponent([(r.delta, math.sqrt(key_lo(r) * key_hi(r))) for r in rows])
    return Fit(*mid, predicted, tol), Fit(*lo, predicted, tol), Fit(*hi, predicted, tol)


def _value_fits(rows, predicted, tol) -> dict:
    mid, lo, hi = _fit_pair(rows, lambda r: r.value_lo, lambda r: r.value_hi, predicted, tol)
    return {"value": mid, "value_lo": lo, "value_hi": hi}


def _constant_fit(rows, key, predicted, tol) -> Fit:
    return Fit(*fit_exponent([(r.delta, r.constants[key]) for r in rows]), predicted, tol)


def run_sweep(cfg: SweepConfig) -> SweepReport:
    rows = _rows(cfg)
    tol = cfg.tolerance
    p, q = cfg.p, cfg.q
    checks: dict = {}
    if cfg.family == "buckley":
        fits = _value_fits(rows, -1.0, tol)
        checks["ratio_at_least_inverse_delta"] = all(r.value_hi >= (1.0 - GAP_TARGET) / r.delta for r in rows)
        if cfg.constants:
            fits["ap"] = _constant_fit(rows, "ap", -(p - 1.0), tol)
            fits["ainfty_sigma"] = _constant_fit(rows, "ainfty_sigma", -1.0, tol)
    elif cfg.family == "step-weight":
        fits = _value_fits(rows, -1.0 / q, tol)
        checks["norm_f_closed_form"] = all(
            abs(r.extra["norm_f"] - r.extra["norm_f_closed"]) <= 1e-6 * r.extra["norm_f_closed"] for r in rows
        )
        if cfg.constants:
            fits["ap"] = _constant_fit(rows, "ap", -(p - 1.0), tol)
    elif cfg.family == "double-ainfty-falsification":
        fits = _value_fits(rows, -(1.0 - 1.0 / p), tol)
        fits["ainfty_w"] = _constant_fit(rows, "ainfty_w", 0.0, tol)
        fits["ainfty_sigma"] = _constant_fit(rows, "ainfty_sigma", -1.0, tol)
        fits["ap"] = _constant_fit(rows, "ap", -(p - 1.0), tol)
        checks["increasing"] = all(
            b.value_lo > a.value_hi for a, b in zip(rows[:-1], rows[1:])
        )
        limit = -(1.0 - 1.0 / p) + tol
        checks["slope_below_limit"] = max(fits["value_lo"].slope, fits["value_hi"].slope) <= limit
        # the falsification only asks for growth at least this fast
        for k in ("value", "value_lo", "value_hi"):
            fits[k].predicted = None
    else:
        fits = _value_fits(rows, None, tol)
        fits["bound"] = Fit(*fit_exponent([(r.delta, r.extra["bound"]) for r in rows]))
        checks["bounded_by_dual_bound"] = all(r.value_hi <= r.extra["bound"] for r in rows)
    verdict = all(f.ok for f in fits.values()) and all(checks.values())
    if cfg.family == "buckley":
        verdict = verdict and fits["value"].r2 >= 0.99
    report = SweepReport(cfg, rows, fits, checks, bool(verdict))
    if cfg.out:
        write_report(report, cfg.out)
    return report


def sweep_buckley(cfg: SweepConfig) -> SweepReport:
    if cfg.family != "buckley":
        raise ValueError("config family must be 'buckley'")
    return run_sweep(cfg)


def sweep_step_weight(cfg: SweepConfig) -> SweepReport:
    if cfg.family != "step-weight":
        raise ValueError("config family must be 'step-weight'")
    return run_sweep(cfg)


def falsify_double_ainfty(cfg: SweepConfig) -> SweepReport:
    if cfg.family != "double-ainfty-falsification":
        raise ValueError("config family must be 'double-ainfty-falsification'")
    return run_sweep(cfg)


def sweep_dual(cfg: SweepConfig) -> SweepReport:
    if cfg.family != "dual-A1":
        raise ValueError("config family must be 'dual-A1'")
    return run_sweep(cfg)


def stability_gap(cfg: SweepConfig, extra_levels: int = 2) -> float:
    """Change in the fitted slope when the grid gets ``extra_levels`` more levels."""
    a = run_sweep(replace(cfg, out=None, constants=False))
    b = run_sweep(replace(cfg, out=None, constants=False, grid_levels=cfg.grid_levels + extra_levels))
    return abs(a.slope - b.slope)
