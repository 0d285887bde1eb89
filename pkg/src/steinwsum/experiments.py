"""Table reproduction, limit-theorem sweeps and the tightness study."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bounds import (
    BoundReport,
    bernoulli_bound,
    geometric_bound_chain,
    kumar_bound,
    limit_certificate_bernoulli,
    theorem_bound,
)
from .errors import PreconditionError
from .pmf import (
    DEFAULT_EPSILON,
    Bernoulli,
    Component,
    Geometric,
    Poisson,
    WeightedSumModel,
    mean,
    poisson_pmf,
    tv_exact,
    zn_pmf,
)

DEFAULT_NS = (10, 20, 40, 80, 160)
DEFAULT_SEED = 42
DISCREPANCY_TOL = 1e-5

# (p, c) per component, ten of each block
TABLE1_SETS = {
    1: [(0.5, 1)] * 10 + [(0.45, 2)] * 10 + [(0.40, 1)] * 10,
    2: [(0.05, 1)] * 10 + [(0.04, 2)] * 10 + [(0.04, 3)] * 10,
}
# printed comparison values; None marks "Not Valid"
TABLE1_PRINTED = {
    (1, 10): (0.5, 0.797885),
    (1, 20): (0.757143, 1.60360),
    (1, 30): (0.677778, 1.34907),
    (2, 10): (0.025, 0.797885),
    (2, 20): (0.0684615, None),
    (2, 30): (0.0772727, None),
}


def table1_params(set_id: int, n: int) -> tuple[list[float], list[int]]:
    rows = TABLE1_SETS[set_id][:n]
    return [p for p, _ in rows], [c for _, c in rows]


@dataclass(frozen=True)
class Table1Row:
    set_id: int
    n: int
    bernoulli: BoundReport
    bernoulli_printed: float
    bernoulli_discrepancy: bool
    kumar: BoundReport
    kumar_printed: float | None
    kumar_discrepancy: bool
    theorem: BoundReport
    exact_tv_lo: float
    exact_tv_hi: float

    @property
    def kumar_q(self) -> float:
        return self.kumar.params["kumar"].q


def reproduce_table1(eps: float = DEFAULT_EPSILON) -> list[Table1Row]:
    rows = []
    for (set_id, n), (b_ref, k_ref) in TABLE1_PRINTED.items():
        ps, cs = table1_params(set_id, n)
        b = bernoulli_bound(ps, cs)
        k = kumar_bound(ps, cs)
        if k_ref is None:
            k_flag = k.valid
        else:
            k_flag = not k.valid or abs(k.value - k_ref) > DISCREPANCY_TOL
        model = WeightedSumModel.bernoulli(ps, cs)
        tv = tv_exact(zn_pmf(model, eps), poisson_pmf(b.lam, eps))
        rows.append(
            Table1Row(
                set_id,
                n,
                b,
                b_ref,
                abs(b.value - b_ref) > DISCREPANCY_TOL,
                k,
                k_ref,
                k_flag,
                theorem_bound(model, b.lam, eps),
                tv.lo,
                tv.hi,
            )
        )
    return rows


@dataclass(frozen=True)
class SweepResult:
    family: str
    n: int
    lam: float
    bound_value: float
    exact_tv_lo: float
    exact_tv_hi: float
    p_or_q_star: float
    theorem_value: float
    wall_time: float

    @property
    def dominates(self) -> bool:
        """Whether the sweep bound is at least the exact distance."""
        return self.bound_value >= self.exact_tv_lo


def _cycle(weights: Sequence[int], n: int) -> list[int]:
    return [int(weights[i % len(weights)]) for i in range(n)]


def bernoulli_limit_sweep(
    lam: float = 1.0,
    ns: Sequence[int] = DEFAULT_NS,
    weights: Sequence[int] = (1, 2),
    eps: float = DEFAULT_EPSILON,
) -> list[SweepResult]:
    """Canonical scheme p_i = lam / (n c_i): E Z = lam and p* = lam / n exactly."""
    out = []
    for n in ns:
        t0 = time.perf_counter()
        cs = _cycle(weights, n)
        ps = [lam / (n * c) for c in cs]
        if max(ps) > 1.0:
            raise PreconditionError(f"n={n} gives p = {max(ps)!r} > 1 for lambda={lam}")
        rep, p_star = limit_certificate_bernoulli(ps, cs, lam)
        model = WeightedSumModel.bernoulli(ps, cs)
        tv = tv_exact(zn_pmf(model, eps), poisson_pmf(lam, eps))
        thm = theorem_bound(model, lam, eps)
        out.append(
            SweepResult("bernoulli", n, lam, rep.value, tv.lo, tv.hi, p_star, thm.value, time.perf_counter() - t0)
        )
    return out


def geometric_limit_sweep(
    lam: float = 1.0,
    ns: Sequence[int] = DEFAULT_NS,
    weights: Sequence[int] = (1, 2),
    eps: float = DEFAULT_EPSILON,
) -> list[SweepResult]:
    """Canonical scheme q_i = lam / (n c_i), so sum c_i q_i = lam; uses the q* bound."""
    out = []
    for n in ns:
        t0 = time.perf_counter()
        cs = _cycle(weights, n)
        qs = [lam / (n * c) for c in cs]
        if max(qs) >= 1.0:
            raise PreconditionError(f"n={n} gives q = {max(qs)!r} >= 1 for lambda={lam}")
        ps = [1.0 - q for q in qs]
        chain = geometric_bound_chain(ps, cs, lam, eps)
        qstar = chain[3]
        model = WeightedSumModel.geometric(ps, cs)
        tv = tv_exact(zn_pmf(model, eps), poisson_pmf(lam, eps))
        thm = theorem_bound(model, lam, eps)
        out.append(
            SweepResult(
                "geometric",
                n,
                lam,
                qstar.value,
                tv.lo,
                tv.hi,
                qstar.params["q_star"],
                thm.value,
                time.perf_counter() - t0,
            )
        )
    return out


def random_model(rng: np.random.Generator, max_n: int = 5, max_weight: int = 3) -> WeightedSumModel:
    """Small model: Bernoulli, Geometric with q <= 0.6, or Poisson with rate <= 2."""
    comps = []
    for _ in range(int(rng.integers(1, max_n + 1))):
        c = int(rng.integers(1, max_weight + 1))
        kind = int(rng.integers(3))
        if kind == 0:
            dist = Bernoulli(float(rng.uniform(0.01, 0.99)))
        elif kind == 1:
            dist = Geometric(1.0 - float(rng.uniform(0.01, 0.6)))
        else:
            dist = Poisson(float(rng.uniform(0.01, 2.0)))
        comps.append(Component(c, dist))
    return WeightedSumModel(tuple(comps))


def random_corpus(seed: int = DEFAULT_SEED, count: int = 200) -> list[tuple[WeightedSumModel, float]]:
    """``count`` models, each paired with lam = E Z and lam = 1.1 E Z."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        model = random_model(rng)
        ez = mean(model)
        out.append((model, ez))
        out.append((model, 1.1 * ez))
    return out


@dataclass(frozen=True)
class TightnessRow:
    index: int
    n: int
    weights: tuple[int, ...]
    lam: float
    bound: float
    exact_tv_lo: float
    exact_tv_hi: float
    ratio: float
    exact_match: bool


@dataclass(frozen=True)
class TightnessStudy:
    seed: int
    rows: list[TightnessRow]
    quantiles: dict[str, float]
    violations: int


def _ratio(bound: float, tv_lo: float, tv_hi: float) -> tuple[float, bool]:
    # an interval touching 0 means the distance is zero up to truncation slack
    if tv_lo <= 0.0:
        return (1.0, True) if bound <= 1e-12 else (math.inf, False)
    return bound / tv_hi, False


def tightness_study(
    models: Sequence[tuple[WeightedSumModel, float]] | None = None,
    seed: int = DEFAULT_SEED,
    count: int = 200,
    eps: float = DEFAULT_EPSILON,
) -> TightnessStudy:
    """bound / exact-TV ratios of the general bound over a randomized corpus."""
    if models is None:
        models = random_corpus(seed, count)
    rows = []
    for i, (model, lam) in enumerate(models):
        rep = theorem_bound(model, lam, eps)
        tv = tv_exact(zn_pmf(model, eps), poisson_pmf(lam, eps))
        ratio, exact = _ratio(rep.value, tv.lo, tv.hi)
        rows.append(TightnessRow(i, len(model), model.weights, lam, rep.value, tv.lo, tv.hi, ratio, exact))
    ratios = np.array([r.ratio for r in rows if math.isfinite(r.ratio)])
    levels = {"min": 0.0, "q05": 0.05, "q25": 0.25, "median": 0.5, "q75": 0.75, "q95": 0.95, "max": 1.0}
    quantiles = {k: float(np.quantile(ratios, v)) for k, v in levels.items()} if ratios.size else {}
    violations = sum(r.bound < r.exact_tv_lo for r in rows)
    return TightnessStudy(seed, rows, quantiles, violations)
