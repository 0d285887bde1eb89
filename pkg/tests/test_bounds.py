import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from steinwsum.bounds import (
    bernoulli_bound,
    bernoulli_params,
    bernoulli_series_closed_form,
    compound_poisson_bound,
    corollary_bound,
    geometric_bound_chain,
    geometric_corollary_bound,
    geometric_params,
    kumar_bound,
    limit_certificate_bernoulli,
    mean_mismatch,
    theorem_bound,
)
from steinwsum.errors import DomainError, PreconditionError
from steinwsum.experiments import random_corpus, table1_params
from steinwsum.pmf import Bernoulli, Geometric, Poisson, WeightedSumModel, poisson_pmf, tv_exact, zn_pmf

from . import oracles


def exact_tv(model, lam):
    return tv_exact(zn_pmf(model), poisson_pmf(lam))


class TestTheorem:
    def test_poisson_components_vanish(self):
        model = WeightedSumModel.of([(1, Poisson(0.3)), (1, Poisson(1.7)), (1, Poisson(4.0))])
        rep = theorem_bound(model, 6.0)
        assert rep.value <= 1e-12
        assert rep.term_mean_mismatch == 0.0

    def test_ten_fair_coins(self):
        rep = theorem_bound(WeightedSumModel.bernoulli([0.5] * 10), 5.0)
        assert rep.value == pytest.approx(0.5, abs=1e-12)

    def test_geometric_half(self):
        rep = theorem_bound(WeightedSumModel.geometric([0.5]), 1.0)
        assert rep.term_main == pytest.approx(1.0, abs=1e-12)
        assert rep.params["certified"]

    def test_value_is_sum_of_terms(self):
        rep = theorem_bound(WeightedSumModel.of([(2, Geometric(0.7)), (1, Bernoulli(0.2))]), 2.5)
        assert rep.value == rep.term_mean_mismatch + rep.term_main
        assert rep.term_mean_mismatch == pytest.approx(mean_mismatch(2.5, 2 * 0.3 / 0.7 + 0.2))

    def test_lambda_defaults_to_mean(self):
        model = WeightedSumModel.geometric([0.6, 0.8], [1, 3])
        assert theorem_bound(model).lam == pytest.approx(0.4 / 0.6 + 3 * 0.2 / 0.8)

    @pytest.mark.parametrize("lam", [0.0, -2.0])
    def test_bad_lambda(self, lam):
        with pytest.raises(DomainError):
            theorem_bound(WeightedSumModel.bernoulli([0.5]), lam)

    def test_scaled_matches_printed_for_unit_weights(self):
        model = WeightedSumModel.of([(1, Geometric(0.4)), (1, Poisson(0.9)), (1, Bernoulli(0.3))])
        a, b = theorem_bound(model, 2.0), theorem_bound(model, 2.0, form="printed")
        assert a.value == pytest.approx(b.value, rel=1e-12)

    def test_printed_form_undercuts_exact_distance(self):
        # one Bernoulli with weight 2: printed series is 0, exact TV is ~2p
        model = WeightedSumModel.bernoulli([0.01], [2])
        printed = theorem_bound(model, form="printed")
        scaled = theorem_bound(model)
        tv = exact_tv(model, 0.02)
        assert printed.term_main == 0.0
        assert not printed.params["certified"] and "not a certified bound" in printed.notes
        assert printed.value < tv.lo
        assert scaled.value >= tv.lo

    def test_dominance_on_corpus_sample(self):
        for model, lam in random_corpus(seed=7, count=40):
            assert theorem_bound(model, lam).value >= exact_tv(model, lam).lo

    def test_remainder_is_certified(self):
        model = WeightedSumModel.geometric([0.1])
        rep = theorem_bound(model, eps=1e-9)
        assert 0.0 < rep.params["remainder"] < 1e-9

    def test_scaled_series_bernoulli_closed_form(self):
        ps, cs = [0.3, 0.05, 0.6, 0.2], [1, 2, 3, 2]
        rep = theorem_bound(WeightedSumModel.bernoulli(ps, cs), 1.0)
        assert rep.term_main == pytest.approx(bernoulli_series_closed_form(ps, cs), abs=1e-12)


class TestCorollary:
    def test_equals_theorem(self):
        model = WeightedSumModel.of([(1, Bernoulli(0.3)), (1, Geometric(0.6))])
        assert corollary_bound(model, 1.5).value == theorem_bound(model, 1.5).value
        assert corollary_bound(model, 1.5).name == "corollary"

    def test_examples(self):
        assert corollary_bound(WeightedSumModel.bernoulli([0.5] * 10), 5.0).value == pytest.approx(0.5)
        assert corollary_bound(WeightedSumModel.of([(1, Poisson(1.0)), (1, Poisson(2.0))]), 3.0).value <= 1e-12

    def test_rejects_weights(self):
        with pytest.raises(PreconditionError, match="component 1"):
            corollary_bound(WeightedSumModel.bernoulli([0.5, 0.5], [1, 2]))


class TestBernoulli:
    @pytest.mark.parametrize(
        "set_id, n, expected",
        [(1, 10, 0.5), (1, 20, 0.757143), (1, 30, 0.677778), (2, 10, 0.025), (2, 20, 0.0684615)],
    )
    def test_table_values(self, set_id, n, expected):
        ps, cs = table1_params(set_id, n)
        assert bernoulli_bound(ps, cs).value == pytest.approx(expected, abs=1e-6)

    def test_set2_n30_direct_arithmetic(self):
        ps, cs = table1_params(2, 30)
        lam = math.fsum(c * p for p, c in zip(ps, cs))
        direct = math.fsum(c * c * p * p for p, c in zip(ps, cs)) / max(1.0, lam)
        assert bernoulli_bound(ps, cs).value == pytest.approx(direct, abs=1e-12)
        assert direct == pytest.approx(0.0932, abs=1e-4)

    def test_zero_probabilities(self):
        rep = bernoulli_bound([0.0, 0.0], [1, 3], lam=1.0)
        assert rep.term_main == 0.0
        assert rep.params["certified"]

    def test_weight_two_flagged(self):
        rep = bernoulli_bound([0.2], [2])
        assert rep.valid and not rep.params["certified"]
        assert "not a certified bound" in rep.notes

    def test_falls_below_exact_distance_with_weight_two(self):
        ps, cs = table1_params(2, 20)
        rep = bernoulli_bound(ps, cs)
        tv = exact_tv(WeightedSumModel.bernoulli(ps, cs), rep.lam)
        assert rep.value < tv.lo
        assert theorem_bound(WeightedSumModel.bernoulli(ps, cs), rep.lam).value >= tv.lo

    @given(
        ps=st.lists(st.floats(0, 1), min_size=1, max_size=6),
        lam=st.floats(0.1, 10),
    )
    def test_unit_weight_specialization(self, ps, lam):
        rep = bernoulli_bound(ps, lam=lam)
        thm = theorem_bound(WeightedSumModel.bernoulli(ps), lam)
        assert rep.value == pytest.approx(thm.value, abs=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError, match=r"p\[1\]"):
            bernoulli_bound([0.2, 1.2])
        with pytest.raises(DomainError, match=r"c\[0\]"):
            bernoulli_bound([0.2], [0])
        with pytest.raises(PreconditionError):
            bernoulli_bound([0.2, 0.3], [1])


class TestLimitCertificate:
    def test_unit_weights(self):
        lam, n = 2.0, 40
        rep, p_star = limit_certificate_bernoulli([lam / n] * n, lam=lam)
        assert p_star == pytest.approx(lam / n)
        assert rep.term_mean_mismatch == pytest.approx(0.0, abs=1e-15)
        assert rep.term_main == pytest.approx((lam / n) * lam / max(1, lam))

    def test_p_star_set1(self):
        ps, cs = table1_params(1, 20)
        assert limit_certificate_bernoulli(ps, cs)[1] == 0.9

    @given(ps=st.lists(st.floats(0, 1), min_size=1, max_size=6), cs=st.lists(st.integers(1, 3), min_size=6, max_size=6))
    def test_relaxation_dominates(self, ps, cs):
        cs = cs[: len(ps)]
        if math.fsum(c * p for c, p in zip(cs, ps)) == 0:
            return
        rep, _ = limit_certificate_bernoulli(ps, cs)
        assert rep.value >= bernoulli_bound(ps, cs).value - 1e-15


def kumar_reference(ps, cs):
    """Independent evaluation of the pseudo-binomial bound."""
    lam = sum(c * p for p, c in zip(ps, cs))
    q = sum(c * c * p * (1 - p) for p, c in zip(ps, cs)) / lam
    p = 1 - q
    gammas = []
    for pi, c in zip(ps, cs):
        # cY on {0, c} against cY + 1 on {1, c + 1}
        if c == 1:
            tv = 0.5 * ((1 - pi) + abs(pi - (1 - pi)) + pi)
        else:
            tv = 1.0
        gammas.append(min(0.5, 1 - tv))
    gamma = math.sqrt(2 / math.pi) * (0.25 + sum(gammas) - max(gammas)) ** -0.5
    inner = sum(c * (sum(abs(q - l * (1 - pi)) * pi for l in range(1, c)) + q * c * pi**2) for pi, c in zip(ps, cs))
    return gamma / (math.floor(lam / p) * p * q) * inner, q


class TestKumar:
    @pytest.mark.parametrize("set_id, n", [(1, 10), (1, 20), (1, 30), (2, 10)])
    def test_matches_reference(self, set_id, n):
        ps, cs = table1_params(set_id, n)
        ref, q = kumar_reference(ps, cs)
        rep = kumar_bound(ps, cs)
        assert rep.valid
        assert rep.value == pytest.approx(ref, rel=1e-12)
        assert rep.params["kumar"].q == pytest.approx(q, rel=1e-14)

    def test_set2_not_valid(self):
        for n in (20, 30):
            rep = kumar_bound(*table1_params(2, n))
            assert not rep.valid and rep.notes == "q ≥ 1"
            assert rep.value == math.inf
        q = kumar_bound(*table1_params(2, 20)).params["kumar"].q
        assert q == pytest.approx(2.011 / 1.3, abs=1e-12)

    def test_params_invariants(self):
        kp = kumar_bound(*table1_params(1, 30)).params["kumar"]
        assert kp.p + kp.q == pytest.approx(1.0)
        assert all(0 <= g <= 0.5 for g in kp.gamma_i)
        assert kp.gamma_star == max(kp.gamma_i)

    def test_all_zero(self):
        rep = kumar_bound([0.0, 0.0])
        assert not rep.valid

    def test_family_guard(self):
        with pytest.raises(PreconditionError, match="component 0 is geometric"):
            bernoulli_params(WeightedSumModel.geometric([0.5]))
        with pytest.raises(PreconditionError):
            geometric_params(WeightedSumModel.bernoulli([0.5]))


class TestGeometricCorollary:
    def test_examples(self):
        assert geometric_corollary_bound([0.5], 1.0).value == 1.0
        assert geometric_corollary_bound([1.0, 1.0], 1.0).term_main == 0.0
        assert geometric_corollary_bound([2 / 3] * 5).value == pytest.approx(0.5)

    def test_precondition_names_index(self):
        with pytest.raises(PreconditionError, match=r"q\[2\]"):
            geometric_corollary_bound([0.9, 0.6, 0.4])

    def test_equals_theorem_at_half(self):
        assert geometric_corollary_bound([0.5]).term_main == pytest.approx(
            theorem_bound(WeightedSumModel.geometric([0.5])).term_main, abs=1e-12
        )


class TestGeometricChain:
    def test_single_half(self):
        chain = geometric_bound_chain([0.5], lam=1.0)
        assert [r.name for r in chain] == ["geometric-series", "geometric-closed", "geometric-relaxed", "geometric-qstar"]
        assert chain[1].term_main == pytest.approx(3.0, abs=1e-14)
        assert chain[0].term_main == pytest.approx(3.0, abs=1e-10)

    @given(
        ps=st.lists(st.floats(0.4, 0.999), min_size=1, max_size=5),
        cs=st.lists(st.integers(1, 4), min_size=5, max_size=5),
    )
    def test_closed_form_and_monotone(self, ps, cs):
        cs = cs[: len(ps)]
        chain = geometric_bound_chain(ps, cs)
        assert abs(chain[0].value - chain[1].value) <= 1e-10
        vals = [r.value for r in chain]
        assert all(a <= b + 1e-10 for a, b in zip(vals, vals[1:]))
        assert chain[2].value <= chain[2].params["four_form"] + 1e-12

    def test_point_masses(self):
        chain = geometric_bound_chain([1.0, 1.0], [2, 3], lam=1.0)
        for rep in chain:
            assert rep.term_main == 0.0
            assert rep.value == rep.term_mean_mismatch == 1.0

    def test_domain(self):
        with pytest.raises(DomainError):
            geometric_bound_chain([0.0])

    def test_printed_theorem_below_series(self):
        # chain (1) relaxes |c - (jc+1)p| to c + (jc+1)p in the printed theorem series
        ps, cs = [0.5, 0.7], [2, 3]
        thm = theorem_bound(WeightedSumModel.geometric(ps, cs), form="printed")
        chain = geometric_bound_chain(ps, cs, lam=thm.lam)
        assert thm.term_main <= chain[0].term_main + 1e-12


class TestCompoundPoisson:
    def test_closed_example(self):
        rep = compound_poisson_bound([0.0, 0.1], lam=0.2, mode="closed")
        assert rep.term_main == pytest.approx(2 * 0.1**3 * math.exp(0.01 - 0.1), rel=1e-14)
        assert rep.term_main == pytest.approx(0.0018279, abs=1e-6)

    def test_single_rate(self):
        for mode in ("series", "closed"):
            assert compound_poisson_bound([0.7], mode=mode).term_main == 0.0

    def test_series_matches_direct_sum(self):
        lams = [0.2, 0.4, 0.3]
        rep = compound_poisson_bound(lams, mode="series")
        direct = 0.0
        for i, x in enumerate(lams, start=1):
            if i >= 2:
                direct += i * (i - 1) * math.exp(-x) * sum(j * x ** (i * j + 1) / math.factorial(i * j) for j in range(1, 30))
        assert rep.term_main * max(1.0, rep.lam) == pytest.approx(direct, rel=1e-12)

    @given(lams=st.lists(st.floats(0.0, 0.5), min_size=1, max_size=6))
    def test_series_below_closed(self, lams):
        if sum(lams) == 0:
            return
        s = compound_poisson_bound(lams, mode="series").value
        c = compound_poisson_bound(lams, mode="closed").value
        assert s <= c + 1e-12

    def test_mean_uses_weights(self):
        rep = compound_poisson_bound([0.1, 0.2, 0.3], lam=1.0)
        assert rep.term_mean_mismatch == pytest.approx(abs(1.0 - (0.1 + 0.4 + 0.9)))

    def test_errors(self):
        with pytest.raises(DomainError):
            compound_poisson_bound([-0.1])
        with pytest.raises(ValueError):
            compound_poisson_bound([0.1], mode="other")

    def test_equals_printed_theorem_series(self):
        lams = [0.3, 0.2, 0.1]
        model = WeightedSumModel.of([(i, Poisson(x)) for i, x in enumerate(lams, start=1)])
        rep = compound_poisson_bound(lams)
        assert rep.value == pytest.approx(theorem_bound(model, form="printed").value, rel=1e-11)

    def test_undercuts_exact_distance(self):
        # inherits the printed-form defect: far below the true distance, scaled form is not
        lams = [0.3, 0.2, 0.1]
        model = WeightedSumModel.of([(i, Poisson(x)) for i, x in enumerate(lams, start=1)])
        rep = compound_poisson_bound(lams)
        tv = exact_tv(model, rep.lam)
        assert rep.value < tv.lo
        assert theorem_bound(model, rep.lam).value >= tv.lo


def test_brute_force_tv_oracle_agrees_with_library():
    ps, cs = [0.1, 0.05, 0.2], [1, 2, 3]
    lam = 0.8
    ref = oracles.tv_to_poisson(oracles.enumerate_weighted_sum([(c, oracles.bernoulli_law(p)) for p, c in zip(ps, cs)]), lam)
    tv = exact_tv(WeightedSumModel.bernoulli(ps, cs), lam)
    assert tv.contains(ref, slack=1e-15)
    assert theorem_bound(WeightedSumModel.bernoulli(ps, cs), lam).value >= ref
    np.testing.assert_(bernoulli_bound(ps, cs, lam).value < ref)
