import math

import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from weightlab import PiecewisePower as P
from weightlab.errors import Divergent, ExponentOrder
from weightlab.theory import (
    BoundInputs,
    Lemma5Instance,
    buckley_bound,
    conjugate,
    dual_bound,
    lemma5_check,
    main_theorem_bound,
    mixed_bound_lorentz,
    mixed_branch_ratio,
    random_lemma5_instance,
    strong_bound,
)
from weightlab.weights import SearchConfig, ainfty_fujii_wilson, ap_constant, dual_weight

INF = math.inf


class TestPlugIn:
    @pytest.mark.parametrize("p,apc,expected", [(2, 4, 4.0), (3, 8, math.sqrt(8)), (2, 1, 1.0)])
    def test_buckley(self, p, apc, expected):
        assert buckley_bound(p, apc) == pytest.approx(expected, rel=1e-15)

    def test_mixed_unit(self):
        assert mixed_bound_lorentz(BoundInputs(2, 2)) == 2.0

    def test_mixed_lower_branch(self):
        b = BoundInputs(2, 1, apc=4, ainfty_sigma=2)
        assert mixed_bound_lorentz(b) == pytest.approx(32.0, rel=1e-14)

    def test_mixed_weak_branch(self):
        kw = dict(apc=3.0, ainfty_sigma=1.7, cn=1.3)
        assert mixed_bound_lorentz(BoundInputs(2, INF, **kw)) == mixed_bound_lorentz(BoundInputs(2, 2, **kw))

    def test_main(self):
        assert main_theorem_bound(2, 2, 4 / 3, 1, 1) == pytest.approx(4.0, rel=1e-14)
        assert main_theorem_bound(2, 1, 4 / 3, 0, 1) == pytest.approx(16.0, rel=1e-14)
        assert main_theorem_bound(2, 2, 4 / 3, 1, 0) == 0.0

    @pytest.mark.parametrize("r", [2.0, 3.0])
    def test_main_order(self, r):
        with pytest.raises(ExponentOrder):
            main_theorem_bound(2, 2, r, 0, 1)

    def test_strong_unit(self):
        assert strong_bound(BoundInputs(2, 2)) == pytest.approx(2 * math.sqrt(math.log(math.e + 1)), rel=1e-14)
        assert strong_bound(BoundInputs(2, 2)) == pytest.approx(2.29195, abs=1e-5)

    def test_strong_dimension(self):
        b1 = BoundInputs(2, 2, apc=3.0, n=1)
        b2 = BoundInputs(2, 2, apc=3.0, n=2)
        # p' picks up one more power and the A_p exponent gains (n-1)/(p-1)
        assert strong_bound(b2) / strong_bound(b1) == pytest.approx(2.0 * 3.0, rel=1e-13)

    def test_strong_lower_branch_sigma_exponent(self):
        lo = strong_bound(BoundInputs(2, 1, ainfty_sigma=1.0))
        hi = strong_bound(BoundInputs(2, 1, ainfty_sigma=5.0))
        assert hi / lo == pytest.approx(5.0, rel=1e-13)

    def test_dual_unit(self):
        expected = math.sqrt(2) * math.sqrt(math.log(math.e + 1)) * 2
        assert dual_bound(BoundInputs(2, 2)) == pytest.approx(expected, rel=1e-14)
        assert dual_bound(BoundInputs(2, 2)) == pytest.approx(3.24131, abs=1e-5)

    def test_dual_a1w(self):
        assert dual_bound(BoundInputs(2, 2, a1_w=4)) / dual_bound(BoundInputs(2, 2)) == pytest.approx(2.0, rel=1e-14)

    def test_dual_min_exponent(self):
        # p = q: the outer exponent is 1/p'
        b = BoundInputs(3, 3, a1_vw=2.0)
        pp = 1.5
        expected = 3 ** (1 / pp) * math.log(math.e + 2) ** (1 / pp) * 3.0
        assert dual_bound(b) == pytest.approx(expected, rel=1e-14)

    def test_dual_rejects_infinite_q(self):
        with pytest.raises(ValueError):
            dual_bound(BoundInputs(2, INF))

    @pytest.mark.parametrize(
        "kw", [dict(p=1.0, q=2), dict(p=2, q=0), dict(p=2, q=2, n=3), dict(p=2, q=2, cn=0), dict(p=2, q=2, apc=0.5)]
    )
    def test_inputs_validated(self, kw):
        with pytest.raises(ValueError):
            BoundInputs(**kw)


class TestContinuity:
    @pytest.mark.parametrize("p", [1.05, 1.5, 2.0, 3.0, 7.0])
    @pytest.mark.parametrize("cn", [0.5, 1.0, 3.0])
    def test_branch_ratio_pinned(self, p, cn):
        kw = dict(apc=2.5, ainfty_sigma=1.8, cn=cn)
        upper = mixed_bound_lorentz(BoundInputs(p, p, **kw))
        pp = conjugate(p)
        lower = (4 * cn / p) ** (1 / p) * pp ** (1 / p) * 2.5 ** (1 / p) * 1.8 ** (1 / p)
        assert upper / lower == pytest.approx(mixed_branch_ratio(p, cn), rel=1e-13)
        # closed form of the ratio, computed by hand
        assert mixed_branch_ratio(p, cn) == pytest.approx((cn * pp) ** (1 - 1 / p) * (p / 4) ** (1 / p), rel=1e-15)

    def test_branch_ratio_at_two(self):
        assert mixed_branch_ratio(2.0, 1.0) == pytest.approx(1.0, rel=1e-15)


_CONST = ("apc", "ainfty_sigma", "ainfty_w", "a1_vw", "a1_w")


@st.composite
def _inputs(draw):
    p = draw(st.floats(1.05, 8.0))
    q = draw(st.one_of(st.floats(0.2, 8.0), st.just(INF)))
    vals = {k: draw(st.floats(1.0, 50.0)) for k in _CONST}
    return BoundInputs(p, q, n=draw(st.sampled_from([1, 2])), cn=draw(st.floats(0.1, 5.0)), **vals)


class TestMonotone:
    @given(_inputs(), st.sampled_from(_CONST), st.floats(1.0, 10.0))
    def test_nondecreasing(self, b, name, factor):
        bigger = BoundInputs(**{**b.__dict__, name: getattr(b, name) * factor})
        fns = [mixed_bound_lorentz, strong_bound]
        if 1.0 < b.q < INF:
            fns.append(dual_bound)
        for fn in fns:
            assert fn(bigger) >= fn(b) * (1 - 1e-12)

    @given(st.floats(1.05, 8.0), st.floats(1.0, 50.0), st.floats(1.0, 10.0))
    def test_buckley_nondecreasing(self, p, apc, factor):
        assert buckley_bound(p, apc * factor) >= buckley_bound(p, apc)

    @given(st.floats(1.1, 8.0), st.floats(0.2, 8.0), st.floats(0.0, 5.0), st.floats(0.0, 5.0), st.floats(0.0, 3.0))
    def test_main_nondecreasing(self, p, q, A, N, dA):
        r = 1 + 0.5 * (p - 1)
        assert main_theorem_bound(p, q, r, A + dA, N * 1.5) >= main_theorem_bound(p, q, r, A, N)


class TestBuckleyConsistency:
    @pytest.mark.parametrize("a,p", [(0.5, 2.0), (-0.3, 2.0), (0.8, 3.0)])
    def test_mixed_at_buckley_exponent(self, a, p):
        cfg = SearchConfig(levels=6)
        w = P.monomial(a)
        sigma = dual_weight(w, p, cfg.domain)
        A = ap_constant(w, p, cfg).value
        # duality: [sigma]_{A_p'} = [w]_{A_p}^{1/(p-1)}
        assert ap_constant(sigma, conjugate(p), cfg).value == pytest.approx(A ** (1 / (p - 1)), rel=1e-6)
        S = ainfty_fujii_wilson(sigma, cfg).value
        assert (A * S) ** (1 / p) <= conjugate(p) * A ** (1 / (p - 1))


class TestLemma5:
    def test_theta_one(self, rng):
        for _ in range(50):
            inst = random_lemma5_instance(rng)
            inst = Lemma5Instance(1.0, inst.t, inst.phi, inst.psi)
            lhs, rhs = lemma5_check(inst)
            assert lhs <= rhs * (1 + 1e-9)

    def test_closed_form(self):
        inst = Lemma5Instance(0.5, 1.0, P.monomial(1.0, lo=0.0), P.monomial(-2.0, lo=0.0))
        lhs, rhs = lemma5_check(inst)
        # independent quadrature of both sides
        l_or = quad(lambda s: s * s**-2 / s, 1, INF)[0] ** 0.5
        r_or = math.log(2) ** -0.5 * quad(lambda s: (4 * s) ** 0.5 * s**-1 / s, 0.5, INF)[0]
        assert lhs == pytest.approx(l_or, rel=1e-10) and lhs == pytest.approx(1.0, rel=1e-12)
        assert rhs == pytest.approx(r_or, rel=1e-10)
        assert rhs == pytest.approx(6.7946, abs=1e-4)

    def test_constant_psi_window(self):
        inst = Lemma5Instance(0.5, 1.0, P.monomial(0.5, lo=0.0), P.constant(1.0))
        lhs, rhs = lemma5_check(inst, T_upper=10.0, tail=False)
        l_or = quad(lambda s: s**-0.5, 1, 10)[0] ** 0.5
        r_or = math.log(2) ** -0.5 * quad(lambda s: (4 * s) ** 0.25 / s, 0.5, 10)[0]
        assert lhs == pytest.approx(l_or, rel=1e-10)
        assert rhs == pytest.approx(r_or, rel=1e-10)
        assert lhs <= rhs
        with pytest.raises(Divergent):
            lemma5_check(inst, T_upper=10.0)
        with pytest.raises(ValueError):
            lemma5_check(inst, tail=False)

    def test_random_instances(self, rng):
        worst = 0.0
        for _ in range(1000):
            inst = random_lemma5_instance(rng)
            lhs, rhs = lemma5_check(inst)
            assert lhs <= rhs * (1 + 1e-9)
            worst = max(worst, lhs / rhs)
        assert worst < 1.0

    def test_divergent(self):
        inst = Lemma5Instance(0.5, 1.0, P.monomial(1.0, lo=0.0), P.monomial(-0.5, lo=0.0))
        with pytest.raises(Divergent) as exc:
            lemma5_check(inst)
        assert exc.value.end == "s->inf"

    def test_monotonicity_enforced(self):
        with pytest.raises(ValueError):
            Lemma5Instance(0.5, 1.0, P.monomial(-1.0, lo=0.0), P.monomial(-2.0, lo=0.0))
        with pytest.raises(ValueError):
            Lemma5Instance(0.5, 1.0, P.monomial(1.0, lo=0.0), P.monomial(0.5, lo=0.0))
        with pytest.raises(ValueError):
            Lemma5Instance(1.5, 1.0, P.monomial(1.0, lo=0.0), P.monomial(-2.0, lo=0.0))
