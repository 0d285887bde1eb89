"""Total-variation bounds for Poisson approximation of weighted sums.

Every bound has the shape

    |lam - E Z| / max(1, sqrt(lam))  +  S / max(1, lam)

and is returned as a :class:`BoundReport` carrying both additive terms.
Infinite series are summed until a certified remainder drops below the
truncation budget, and that remainder is added to the reported value.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from . import kernels
from .errors import DomainError, PreconditionError
from .pmf import (
    DEFAULT_EPSILON,
    Bernoulli,
    DistSpec,
    PointMass,
    WeightedSumModel,
    convolve,
    make_pmf,
    mean,
    scaled_pmf,
    tv_exact,
)

_MAX_TERMS = 1 << 22


@dataclass(frozen=True)
class BoundReport:
    name: str
    value: float
    term_mean_mismatch: float
    term_main: float
    lam: float
    valid: bool = True
    notes: str = ""
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "value": self.value,
            "term_mean_mismatch": self.term_mean_mismatch,
            "term_main": self.term_main,
            "lambda": self.lam,
            "valid": self.valid,
            "notes": self.notes,
        }
        for key, val in self.params.items():
            out[key] = dataclasses.asdict(val) if dataclasses.is_dataclass(val) else val
        return out


@dataclass(frozen=True)
class KumarParams:
    N: float
    p: float
    q: float
    gamma: float
    gamma_i: tuple[float, ...]
    gamma_star: float


def mean_mismatch(lam: float, ez: float) -> float:
    return abs(lam - ez) / max(1.0, math.sqrt(lam))


def _check_lam(lam: float) -> float:
    lam = float(lam)
    if not (lam > 0.0 and math.isfinite(lam)):
        raise DomainError(f"lambda must be a finite positive number, got {lam!r}")
    return lam


def _report(name, lam, ez, series, notes="", **params) -> BoundReport:
    t1 = mean_mismatch(lam, ez)
    t2 = series / max(1.0, lam)
    return BoundReport(name, t1 + t2, t1, t2, lam, True, notes, params)


def _check_probs(ps, label="p", *, open_left=False) -> list[float]:
    out = []
    for i, p in enumerate(ps):
        p = float(p)
        ok = (0.0 < p <= 1.0) if open_left else (0.0 <= p <= 1.0)
        if not ok:
            rng = "(0, 1]" if open_left else "[0, 1]"
            raise DomainError(f"{label}[{i}] must lie in {rng}, got {p!r}")
        out.append(p)
    return out


def _check_weights(cs, n) -> list[int]:
    if cs is None:
        return [1] * n
    if len(cs) != n:
        raise PreconditionError(f"got {n} probabilities but {len(cs)} weights")
    out = []
    for i, c in enumerate(cs):
        if isinstance(c, bool) or int(c) != c or c < 1:
            raise DomainError(f"c[{i}] must be a positive integer, got {c!r}")
        out.append(int(c))
    return out


# -- the general bound ------------------------------------------------------


def _scaled_series(c: int, spec: DistSpec, budget: float) -> tuple[float, float]:
    """sum_k k |E[cY] w(k) - (k+1) w(k+1)| with w the pmf of cY.

    Returns (partial sum, certified remainder).
    """
    m = c * spec.mean()
    smax = spec.support_max
    ky = smax + 1 if smax is not None else spec.truncation_index(budget)
    while True:
        w = np.zeros(c * (ky + 1))
        w[::c] = spec.pmf_prefix(ky)
        partial = kernels.stein_series(w, m)
        if smax is not None:
            return partial, 0.0
        # terms with k >= c(ky+1)-1 involve only Y >= ky+1
        rem = c * m * spec.tail_moment(ky + 1, 1) + c * c * spec.tail_moment(ky + 1, 2)
        if rem < budget:
            return partial, rem
        if ky > _MAX_TERMS:
            raise DomainError(f"series for {spec} did not reach the truncation budget")
        ky = 2 * ky + 1


def _printed_series(c: int, spec: DistSpec, budget: float) -> tuple[float, float]:
    """sum_j jc |c E[Y] p(jc) - (jc+1) p(jc+1)| with p the pmf of Y itself."""
    my = spec.mean()
    smax = spec.support_max
    top = smax + 1 if smax is not None else max(spec.truncation_index(budget), c + 1)
    while True:
        y = spec.pmf_prefix(top)
        jc = np.arange(c, top, c)
        partial = math.fsum(jc * np.abs(c * my * y[jc] - (jc + 1) * y[jc + 1]))
        if smax is not None:
            return partial, 0.0
        first = (len(jc) + 1) * c
        rem = c * my * spec.tail_moment(first, 1) + spec.tail_moment(first + 1, 2)
        if rem < budget:
            return partial, rem
        if top > _MAX_TERMS:
            raise DomainError(f"series for {spec} did not reach the truncation budget")
        top = 2 * top + 1


def theorem_bound(
    model: WeightedSumModel,
    lam: float | None = None,
    eps: float = DEFAULT_EPSILON,
    form: Literal["scaled", "printed"] = "scaled",
) -> BoundReport:
    """Upper bound on d_TV(Z, Poisson(lam)) for Z = sum_i c_i Y_i.

    ``form="scaled"`` sums over the pmf of each c_i Y_i, which is what the
    Stein argument controls and is a certified bound for every weight.
    ``form="printed"`` substitutes the pmf of Y_i evaluated at multiples of
    c_i; the two agree when every weight is 1, but for weights >= 2 the
    printed form drops terms and can fall below the true distance.
    """
    ez = mean(model)
    lam = _check_lam(ez if lam is None else lam)
    if not eps > 0.0:
        raise DomainError(f"epsilon must be positive, got {eps!r}")
    series = {"scaled": _scaled_series, "printed": _printed_series}.get(form)
    if series is None:
        raise ValueError(f"unknown form {form!r}")
    budget = eps / len(model)
    partials, rems = [], []
    for comp in model.components:
        s, r = series(comp.weight, comp.dist, budget)
        partials.append(s)
        rems.append(r)
    total = math.fsum(partials) + math.fsum(rems)
    notes = "weights >= 2 in printed form: not a certified bound" if form == "printed" and any(
        w > 1 for w in model.weights
    ) else ""
    return _report(
        "theorem" if form == "scaled" else "theorem-printed",
        lam,
        ez,
        total,
        notes,
        remainder=math.fsum(rems),
        certified=form == "scaled" or all(w == 1 for w in model.weights),
    )


def corollary_bound(
    model: WeightedSumModel, lam: float | None = None, eps: float = DEFAULT_EPSILON
) -> BoundReport:
    """The general bound restricted to unit weights."""
    bad = [i for i, w in enumerate(model.weights) if w != 1]
    if bad:
        raise PreconditionError(f"corollary requires every weight to be 1; component {bad[0]} has weight {model.weights[bad[0]]}")
    return dataclasses.replace(theorem_bound(model, lam, eps), name="corollary")


# -- Bernoulli summands -----------------------------------------------------


def bernoulli_bound(
    ps: Sequence[float], cs: Sequence[int] | None = None, lam: float | None = None
) -> BoundReport:
    """Closed form sum c_i^2 p_i^2 / max(1, lam) plus the mean-mismatch term.

    Exact specialisation of :func:`theorem_bound` for unit weights. With a
    weight c >= 2 the series picks up an extra c(c-1)p term (see
    :func:`bernoulli_series_closed_form`) and this value is no longer a
    certified bound; the report says so in ``notes``.
    """
    ps = _check_probs(ps)
    cs = _check_weights(cs, len(ps))
    ez = math.fsum(c * p for c, p in zip(cs, ps))
    lam = _check_lam(ez if lam is None else lam)
    s = math.fsum(c * c * p * p for c, p in zip(cs, ps))
    certified = all(c == 1 or p == 0.0 for c, p in zip(cs, ps))
    notes = "" if certified else "omits c(c-1)p terms for weights >= 2: not a certified bound"
    return _report("bernoulli", lam, ez, s, notes, certified=certified)


def bernoulli_series_closed_form(ps: Sequence[float], cs: Sequence[int] | None = None) -> float:
    """The Bernoulli value of the scaled series: sum c^2 p^2 + c(c-1) p."""
    ps = _check_probs(ps)
    cs = _check_weights(cs, len(ps))
    return math.fsum(c * c * p * p + c * (c - 1) * p for c, p in zip(cs, ps))


def limit_certificate_bernoulli(
    ps: Sequence[float], cs: Sequence[int] | None = None, lam: float | None = None
) -> tuple[BoundReport, float]:
    """Relaxation c_i^2 p_i^2 <= p* c_i p_i with p* = max_i c_i p_i."""
    ps = _check_probs(ps)
    cs = _check_weights(cs, len(ps))
    ez = math.fsum(c * p for c, p in zip(cs, ps))
    lam = _check_lam(ez if lam is None else lam)
    p_star = max(c * p for c, p in zip(cs, ps))
    rep = _report("bernoulli-limit", lam, ez, p_star * ez, p_star=p_star)
    return rep, p_star


def kumar_bound(ps: Sequence[float], cs: Sequence[int] | None = None) -> BoundReport:
    """Competing pseudo-binomial bound, reported with its parameters."""
    ps = _check_probs(ps)
    cs = _check_weights(cs, len(ps))
    sum_cp = math.fsum(c * p for c, p in zip(cs, ps))
    if sum_cp == 0.0:
        return _invalid_kumar(0.0, "sum c_i p_i = 0", None)
    q = math.fsum(c * c * p * (1.0 - p) for c, p in zip(cs, ps)) / sum_cp
    p = 1.0 - q

    gamma_i = tuple(min(0.5, 1.0 - _shift_tv(c, pi)) for c, pi in zip(cs, ps))
    gamma_star = max(gamma_i)
    gamma = math.sqrt(2.0 / math.pi) / math.sqrt(0.25 + math.fsum(gamma_i) - gamma_star)
    n_size = sum_cp / p if p != 0.0 else math.inf
    kp = KumarParams(n_size, p, q, gamma, gamma_i, gamma_star)

    if q >= 1.0:
        return _invalid_kumar(sum_cp, "q ≥ 1", kp)
    if q <= 0.0:
        return _invalid_kumar(sum_cp, "q ≤ 0", kp)
    n_floor = math.floor(n_size)
    if n_floor == 0:
        return _invalid_kumar(sum_cp, "⌊N⌋ = 0", kp)
    inner = math.fsum(
        c * (math.fsum(abs(q - ell * (1.0 - pi)) * pi for ell in range(1, c)) + q * c * pi * pi)
        for c, pi in zip(cs, ps)
    )
    value = gamma / (n_floor * p * q) * inner
    return BoundReport("kumar", value, 0.0, value, sum_cp, True, "", {"kumar": kp})


def _shift_tv(c: int, p: float) -> float:
    """Exact d_TV(cY, cY + 1) for Y ~ Bernoulli(p)."""
    a = scaled_pmf(make_pmf(Bernoulli(p)), c)
    b = convolve(a, make_pmf(PointMass(1)))
    return tv_exact(a, b).estimate


def _invalid_kumar(lam, reason, kp) -> BoundReport:
    params = {"kumar": kp} if kp is not None else {}
    return BoundReport("kumar", math.inf, 0.0, math.inf, lam, False, reason, params)


# -- geometric summands -----------------------------------------------------


def geometric_corollary_bound(ps: Sequence[float], lam: float | None = None) -> BoundReport:
    """sum (q_i/p_i)^2 / max(1, lam) for unit-weight geometric summands, q_i <= 1/2."""
    ps = _check_probs(ps, open_left=True)
    for i, p in enumerate(ps):
        if 1.0 - p > 0.5:
            raise PreconditionError(f"q[{i}] = {1.0 - p!r} exceeds 1/2")
    ratios = [(1.0 - p) / p for p in ps]
    ez = math.fsum(ratios)
    lam = _check_lam(ez if lam is None else lam)
    return _report("geometric", lam, ez, math.fsum(r * r for r in ratios))


def _geometric_double_series(c: int, p: float, budget: float) -> tuple[float, float]:
    """sum_j jc q^(jc+1) (c + (jc+1) p), with a ratio-test remainder."""
    q = 1.0 - p
    if q == 0.0:
        return 0.0, 0.0
    x = q**c
    parts = []
    start, block = 1, 64
    while True:
        j = np.arange(start, start + block, dtype=float)
        t = j * c * np.exp((j * c + 1) * math.log(q)) * (c + (j * c + 1) * p)
        parts.append(math.fsum(t))
        jlast = j[-1]
        # t_{j+1}/t_j <= x (1 + 1/j)^2, decreasing in j
        r = x * (1.0 + 1.0 / jlast) ** 2
        if r < 1.0:
            rem = t[-1] * r / (1.0 - r)
            if rem < budget:
                return math.fsum(parts), rem
        if jlast > _MAX_TERMS:
            raise DomainError(f"geometric series with q={q!r} did not converge in budget")
        start += block
        block *= 2


def geometric_bound_chain(
    ps: Sequence[float],
    cs: Sequence[int] | None = None,
    lam: float | None = None,
    eps: float = DEFAULT_EPSILON,
) -> list[BoundReport]:
    """Four successively coarser bounds for weighted geometric summands.

    1. the double series, summed numerically;
    2. its closed form;
    3. the (3 + q^c) relaxation (the further 4-relaxation is in ``params``);
    4. the q* = max c q^c form.
    ``lam`` defaults to sum c_i q_i.
    """
    ps = _check_probs(ps, open_left=True)
    cs = _check_weights(cs, len(ps))
    qs = [1.0 - p for p in ps]
    ez = math.fsum(c * q / p for c, p, q in zip(cs, ps, qs))
    lam = _check_lam(math.fsum(c * q for c, q in zip(cs, qs)) if lam is None else lam)

    budget = eps / len(ps)
    s1, rem = 0.0, 0.0
    pieces, rems = [], []
    for c, p in zip(cs, ps):
        s, r = _geometric_double_series(c, p, budget)
        pieces.append(s)
        rems.append(r)
    s1 = math.fsum(pieces) + math.fsum(rems)
    rem = math.fsum(rems)

    closed, relax3, relax4, qstar_sum = [], [], [], []
    for c, p, q in zip(cs, ps, qs):
        x = q**c
        d3 = (1.0 - x) ** 3
        closed.append(c * q ** (c + 1) / d3 * (c * (1.0 - x) + p * ((c - 1) * x + c + 1)))
        relax3.append(c * c * q ** (c + 1) * (3.0 + x) / d3)
        relax4.append(4.0 * c * c * q ** (c + 1) / d3)
        qstar_sum.append(c * q / d3)
    q_star = max(c * q**c for c, q in zip(cs, qs))
    s4 = math.fsum(relax4)
    return [
        _report("geometric-series", lam, ez, s1, remainder=rem),
        _report("geometric-closed", lam, ez, math.fsum(closed)),
        _report(
            "geometric-relaxed",
            lam,
            ez,
            math.fsum(relax3),
            four_form=mean_mismatch(lam, ez) + s4 / max(1.0, lam),
        ),
        _report("geometric-qstar", lam, ez, 4.0 * q_star * math.fsum(qstar_sum), q_star=q_star),
    ]


# -- compound Poisson -------------------------------------------------------


def _compound_inner(i: int, lam_i: float, budget: float) -> tuple[float, float]:
    """e^{-l} sum_{j>=1} j l^(ij+1) / (ij)!, with a ratio-test remainder."""
    if lam_i == 0.0:
        return 0.0, 0.0
    log_l = math.log(lam_i)
    terms = []
    j = 1
    while True:
        t = math.exp(math.log(j) + (i * j + 1) * log_l - lam_i - math.lgamma(i * j + 1.0))
        terms.append(t)
        # t_{j+1}/t_j = (j+1)/j * l^i / prod_{s=1..i}(ij+s), decreasing in j
        log_r = math.log1p(1.0 / j) + i * log_l - (math.lgamma(i * j + i + 1.0) - math.lgamma(i * j + 1.0))
        if log_r < 0.0:
            r = math.exp(log_r)
            rem = t * r / (1.0 - r)
            if rem < budget:
                return math.fsum(terms), rem
        if j > _MAX_TERMS:
            raise DomainError(f"compound series for lambda_{i}={lam_i!r} did not converge")
        j += 1


def compound_poisson_bound(
    lams: Sequence[float],
    lam: float | None = None,
    mode: Literal["series", "closed"] = "series",
    eps: float = DEFAULT_EPSILON,
) -> BoundReport:
    """Bound for Z = sum_i i Y_i with Y_i ~ Poisson(lams[i-1])."""
    lams = [float(x) for x in lams]
    for i, x in enumerate(lams):
        if not (x >= 0.0 and math.isfinite(x)):
            raise DomainError(f"lambda_{i + 1} must be finite and >= 0, got {x!r}")
    if not lams:
        raise PreconditionError("need at least one rate")
    ez = math.fsum(i * x for i, x in enumerate(lams, start=1))
    lam = _check_lam(ez if lam is None else lam)
    if mode == "series":
        budget = eps / len(lams)
        vals, rems = [], []
        for i, x in enumerate(lams, start=1):
            if i < 2:
                continue
            s, r = _compound_inner(i, x, budget)
            vals.append(i * (i - 1) * s)
            rems.append(i * (i - 1) * r)
        total = math.fsum(vals) + math.fsum(rems)
        return _report("compound-poisson-series", lam, ez, total, remainder=math.fsum(rems))
    if mode == "closed":
        total = math.fsum(
            i * (i - 1) * x ** (i + 1) * math.exp(x**i - x) for i, x in enumerate(lams, start=1) if i >= 2
        )
        return _report("compound-poisson-closed", lam, ez, total)
    raise ValueError(f"unknown mode {mode!r}")


def bernoulli_params(model: WeightedSumModel) -> tuple[list[float], list[int]]:
    """(ps, cs) of an all-Bernoulli model."""
    for i, comp in enumerate(model.components):
        if comp.dist.kind != "bernoulli":
            raise PreconditionError(f"component {i} is {comp.dist.kind}, expected bernoulli")
    return [c.dist.param for c in model.components], list(model.weights)


def geometric_params(model: WeightedSumModel) -> tuple[list[float], list[int]]:
    for i, comp in enumerate(model.components):
        if comp.dist.kind != "geometric":
            raise PreconditionError(f"component {i} is {comp.dist.kind}, expected geometric")
    return [c.dist.param for c in model.components], list(model.weights)
