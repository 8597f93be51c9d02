import json
import math

import pytest

from weightlab import PiecewisePower as P
from weightlab import lab
from weightlab.errors import Divergent, InsufficientPoints, NonPositiveValue
from weightlab.funcspace import Interval
from weightlab.lorentz import LorentzParams, lorentz_norm
from weightlab.theory import BoundInputs, dual_bound
from weightlab.weights import SearchConfig, a1_two_weight

SMALL = (0.5, 0.25, 0.125)


class TestFit:
    def test_exact_power(self):
        slope, icpt, r2 = lab.fit_exponent([(d, 3.0 / d) for d in SMALL])
        assert slope == pytest.approx(-1.0, abs=1e-12)
        assert icpt == pytest.approx(math.log(3.0), abs=1e-12)
        assert r2 == pytest.approx(1.0, abs=1e-12)

    def test_constant(self):
        slope, _, r2 = lab.fit_exponent([(d, 7.0) for d in SMALL])
        assert slope == 0.0 and r2 == 1.0

    def test_two_points(self):
        assert lab.fit_exponent([(0.5, 2.0), (0.25, 4.0)])[0] == pytest.approx(-1.0, abs=1e-12)

    def test_errors(self):
        with pytest.raises(InsufficientPoints):
            lab.fit_exponent([(0.5, 1.0)])
        with pytest.raises(NonPositiveValue):
            lab.fit_exponent([(0.5, 1.0), (0.25, 0.0)])
        with pytest.raises(NonPositiveValue):
            lab.fit_exponent([(0.5, 1.0), (-0.25, 2.0)])


class TestConfig:
    def test_defaults(self):
        cfg = lab.SweepConfig("buckley")
        assert cfg.deltas == tuple(2.0**-k for k in range(1, 11))
        assert cfg.tolerance == 0.15
        assert (cfg.domain.lo, cfg.domain.hi) == (-1e4, 1e4)

    @pytest.mark.parametrize(
        "kw",
        [
            dict(family="nope"),
            dict(family="buckley", deltas=(0.25, 0.5)),
            dict(family="buckley", deltas=(0.5, 0.5)),
            dict(family="buckley", deltas=(1.0, 0.5)),
            dict(family="buckley", p=2.0, q=1.5),
            dict(family="step-weight", p=2.0, q=3.0),
            dict(family="dual-A1", p=2.0, q=1.0),
            dict(family="dual-A1", p=2.0, q=math.inf),
            dict(family="buckley", p=1.0),
        ],
    )
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            lab.SweepConfig(**kw)

    def test_dict_round_trip(self, tmp_path):
        cfg = lab.SweepConfig("step-weight", p=2.0, q=1.5, deltas=SMALL, grid_levels=14)
        d = cfg.to_dict()
        assert d["domain"] == {"lo": -1e4, "hi": 1e4}
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(d))
        assert lab.load_config(path) == cfg

    def test_unknown_key(self):
        with pytest.raises(ValueError):
            lab.SweepConfig.from_dict({"family": "buckley", "colour": "red"})

    def test_wrappers_check_family(self):
        cfg = lab.SweepConfig("buckley", deltas=SMALL)
        for fn in (lab.sweep_step_weight, lab.falsify_double_ainfty, lab.sweep_dual):
            with pytest.raises(ValueError):
                fn(cfg)


class TestFamilies:
    def test_step_weight_norm_closed_form(self):
        # p = q = 2, delta = 1/4: (p/q)^(1/q) delta^((p-1)/p) = 1/2
        w = lab.step_weight(2.0, 0.25)
        assert lorentz_norm(P.indicator(0.0, 1.0), w, LorentzParams(2.0, 2.0)) == pytest.approx(0.5, rel=1e-12)

    def test_power_weight(self):
        w = lab.power_weight(3.0, 0.25)
        assert w(2.0) == pytest.approx(2.0**1.5, rel=1e-15)

    def test_dual_weights_unit(self):
        assert lab.dual_weights(1.0)(123.0) == 1.0

    def test_dual_unit_reduction(self):
        # v = w = 1: T is M itself and every A_1 constant is 1
        one = lab.dual_weights(1.0)
        a1 = a1_two_weight(one, one, SearchConfig()).value
        assert a1 == pytest.approx(1.0, rel=1e-12)
        bound = dual_bound(BoundInputs(2, 2, a1_vw=a1, a1_w=a1))
        assert bound == pytest.approx(3.2413, abs=1e-4)
        cfg = lab.SweepConfig("dual-A1", p=2.0, q=2.0, deltas=(0.5,), grid_levels=16)
        row = lab._dual_row(cfg, 1.0)
        assert math.isfinite(row.value_hi) and row.value_lo >= 1.0 - 1e-9
        assert row.value_hi <= row.extra["bound"]

    def test_dual_half_a1(self):
        w = lab.dual_weights(0.5)
        half = P.monomial(-0.5, lo=0.0)
        # M(x^(-1/2) on (0, inf)) = 2 x^(-1/2); the even weight picks up 1 + sqrt 2
        one_sided = a1_two_weight(half, half, SearchConfig(domain=Interval(0.0, 1.0))).value
        two_sided = a1_two_weight(w, w, SearchConfig()).value
        assert one_sided == pytest.approx(2.0, rel=1e-6)
        assert two_sided == pytest.approx(1.0 + math.sqrt(2.0), rel=1e-6)


@pytest.fixture(scope="module")
def step_report():
    return lab.run_sweep(lab.SweepConfig("step-weight", p=2.0, q=1.5, deltas=SMALL, grid_levels=16, density=32))


class TestSweeps:
    def test_step_rows(self, step_report):
        rows = step_report.rows
        assert [r.delta for r in rows] == list(SMALL)
        for r in rows:
            assert r.value_lo <= r.value_hi
            assert (r.value_hi - r.value_lo) / r.value_hi <= lab.GAP_LIMIT
        assert step_report.checks["norm_f_closed_form"]
        assert step_report.fits["value"].predicted == pytest.approx(-2 / 3)

    def test_buckley_single_delta_lower_bound(self):
        cfg = lab.SweepConfig("buckley", deltas=(0.25,), grid_levels=16, density=32, constants=False)
        row = lab._buckley_row(cfg, 0.25)
        assert row.value_hi >= (1 - lab.GAP_TARGET) * 4.0

    def test_coarse_grid_reports_divergence(self):
        # the innermost node sits near |x| = 2.4, so the inner power model is ~1/|x|
        cfg = lab.SweepConfig("step-weight", p=2.0, q=1.5, deltas=(0.25,), grid_levels=12, constants=False)
        with pytest.raises(Divergent):
            lab.run_sweep(cfg)

    def test_single_delta_cannot_fit(self):
        with pytest.raises(InsufficientPoints):
            lab.run_sweep(lab.SweepConfig("step-weight", p=2.0, q=1.5, deltas=(0.25,), grid_levels=16, constants=False))

    def test_deterministic_and_serial_equal(self, step_report):
        cfg = step_report.config
        again = lab.run_sweep(lab.SweepConfig(**{**cfg.__dict__, "workers": 1}))
        assert [(r.value_lo, r.value_hi, r.constants) for r in again.rows] == [
            (r.value_lo, r.value_hi, r.constants) for r in step_report.rows
        ]

    def test_persistence(self, step_report, tmp_path):
        jp, cp = lab.write_report(step_report, tmp_path)
        rec = lab.load_report(jp)
        assert rec["verdict"] == step_report.verdict
        assert lab.SweepConfig.from_dict(rec["config"]) == step_report.config
        assert [r["value_hi"] for r in rec["rows"]] == [r.value_hi for r in step_report.rows]
        assert set(rec) >= {"config", "environment", "rows", "fits", "checks", "verdict"}
        lines = cp.read_text().splitlines()
        assert lines[0] == "delta,value_lo,value_hi,constant_ap,constant_ainfty_sigma"
        assert len(lines) == 1 + len(SMALL)
        # rerun from the stored config reproduces the table bit for bit
        rerun = lab.run_sweep(lab.SweepConfig.from_dict(rec["config"]))
        assert rerun.to_csv() == cp.read_text()

    def test_out_writes_files(self, tmp_path):
        cfg = lab.SweepConfig("dual-A1", p=2.0, q=2.0, deltas=SMALL, grid_levels=16, out=str(tmp_path))
        rep = lab.sweep_dual(cfg)
        assert (tmp_path / "dual-A1.json").is_file() and (tmp_path / "dual-A1.csv").is_file()
        assert rep.checks["bounded_by_dual_bound"]

    def test_stability_gate(self):
        cfg = lab.SweepConfig("step-weight", p=2.0, q=1.5, deltas=SMALL, grid_levels=16, density=32)
        assert lab.stability_gap(cfg) < 0.05
