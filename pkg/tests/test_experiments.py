import math

import numpy as np
import pytest

from steinwsum.errors import PreconditionError
from steinwsum.experiments import (
    DEFAULT_NS,
    TABLE1_PRINTED,
    bernoulli_limit_sweep,
    geometric_limit_sweep,
    random_corpus,
    random_model,
    reproduce_table1,
    tightness_study,
)
from steinwsum.pmf import mean


@pytest.fixture(scope="module")
def table():
    return reproduce_table1()


class TestTable1:
    def test_rows_and_order(self, table):
        assert [(r.set_id, r.n) for r in table] == list(TABLE1_PRINTED)

    def test_printed_bernoulli_values(self, table):
        for row in table:
            if (row.set_id, row.n) == (2, 30):
                assert row.bernoulli_discrepancy
                assert row.bernoulli.value == pytest.approx(0.0932, abs=1e-4)
            else:
                assert not row.bernoulli_discrepancy
                assert row.bernoulli.value == pytest.approx(row.bernoulli_printed, abs=1e-5)

    def test_kumar_flags(self, table):
        by_key = {(r.set_id, r.n): r for r in table}
        for n in (20, 30):
            row = by_key[(2, n)]
            assert not row.kumar.valid and not row.kumar_discrepancy
        assert by_key[(2, 20)].kumar_q == pytest.approx(2.011 / 1.3, abs=1e-12)
        for key in [(1, 10), (1, 20), (1, 30), (2, 10)]:
            assert by_key[key].kumar.valid
            assert by_key[key].kumar_discrepancy

    def test_theorem_dominates_exact(self, table):
        for row in table:
            assert row.theorem.value >= row.exact_tv_lo
            assert row.exact_tv_lo <= row.exact_tv_hi

    def test_deterministic(self, table):
        again = reproduce_table1()
        assert [r.bernoulli.value for r in again] == [r.bernoulli.value for r in table]
        assert [r.exact_tv_lo for r in again] == [r.exact_tv_lo for r in table]


class TestSweeps:
    @pytest.mark.parametrize("sweep", [bernoulli_limit_sweep, geometric_limit_sweep])
    @pytest.mark.parametrize("weights", [(1,), (1, 2)])
    def test_monotone_and_rate(self, sweep, weights):
        rows = sweep(weights=weights)
        vals = [r.bound_value for r in rows]
        assert [r.n for r in rows] == list(DEFAULT_NS)
        assert all(b <= a for a, b in zip(vals, vals[1:]))
        assert vals[-1] <= vals[0] / 8

    def test_bernoulli_canonical_scheme(self):
        rows = bernoulli_limit_sweep(lam=1.0, weights=(1,))
        for r in rows:
            assert r.p_or_q_star == pytest.approx(1.0 / r.n)
            assert r.bound_value == pytest.approx(1.0 / r.n)

    @pytest.mark.parametrize("sweep", [bernoulli_limit_sweep, geometric_limit_sweep])
    def test_unit_weights_dominate(self, sweep):
        for r in sweep(weights=(1,)):
            assert r.dominates
            assert r.theorem_value >= r.exact_tv_lo

    @pytest.mark.parametrize("sweep", [bernoulli_limit_sweep, geometric_limit_sweep])
    def test_cycling_weights_do_not_converge_to_poisson(self, sweep):
        # weight-2 summands keep Z away from Poisson: exact TV stabilizes near 0.14
        rows = sweep(weights=(1, 2))
        assert all(r.exact_tv_lo > 0.12 for r in rows)
        assert not rows[-1].dominates
        # the scaled bound stays a valid upper bound throughout
        assert all(r.theorem_value >= r.exact_tv_lo for r in rows)

    def test_infeasible_scheme(self):
        with pytest.raises(PreconditionError):
            bernoulli_limit_sweep(lam=30.0, ns=(10,))
        with pytest.raises(PreconditionError):
            geometric_limit_sweep(lam=30.0, ns=(10,))


class TestCorpus:
    def test_seeded(self):
        a, b = random_corpus(3, 10), random_corpus(3, 10)
        assert a == b
        assert random_corpus(4, 10) != a

    def test_shape(self):
        corpus = random_corpus(11, 50)
        assert len(corpus) == 100
        for i in range(0, 100, 2):
            model, lam = corpus[i]
            assert lam == mean(model)
            assert corpus[i + 1][1] == pytest.approx(1.1 * lam)

    def test_model_ranges(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            model = random_model(rng)
            assert 1 <= len(model) <= 5
            for comp in model.components:
                assert 1 <= comp.weight <= 3
                if comp.dist.kind == "geometric":
                    assert 1 - comp.dist.param <= 0.6
                if comp.dist.kind == "poisson":
                    assert comp.dist.param <= 2


class TestTightness:
    def test_no_violations(self):
        study = tightness_study(seed=42, count=200)
        assert len(study.rows) == 400
        assert study.violations == 0
        q = study.quantiles
        assert q["min"] <= q["q25"] <= q["median"] <= q["q75"] <= q["max"]
        assert q["min"] >= 1.0 - 1e-9

    def test_exact_match_rows(self):
        from steinwsum.pmf import Poisson, WeightedSumModel

        model = WeightedSumModel.of([(1, Poisson(0.5)), (1, Poisson(1.0))])
        study = tightness_study(models=[(model, 1.5)])
        row = study.rows[0]
        assert row.exact_match and row.ratio == 1.0
        assert math.isfinite(study.quantiles["max"])
