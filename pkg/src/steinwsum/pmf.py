"""Discrete distributions on the non-negative integers with certified truncation.

A :class:`Pmf` stores the masses on ``0..K`` together with ``tail_bound``, a
proven upper bound on the probability mass that is *not* represented in the
stored array. For freshly constructed pmfs that missing mass sits beyond ``K``;
after convolution it may also be spread inside the stored range, so stored
masses are lower bounds and ``tail_bound`` bounds their total deficit. Every
distance computed from truncated pmfs therefore carries an error bar.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce, singledispatch
from typing import NamedTuple, Sequence

import numpy as np

from . import kernels
from .errors import DomainError, PreconditionError

DEFAULT_EPSILON = 1e-12
MAX_EPSILON = 1e-6

_KINDS = ("bernoulli", "geometric", "poisson", "point", "custom")


@dataclass(frozen=True)
class DistSpec:
    """Parametric law of one summand ``Y``.

    Geometric is supported on {0, 1, 2, ...} with mass ``p * q**k`` and mean
    ``q / p``.
    """

    kind: str
    params: tuple

    def __post_init__(self):
        kind = self.kind
        if kind not in _KINDS:
            raise DomainError(f"dist: unknown distribution kind {kind!r}")
        if kind == "custom":
            probs = tuple(float(x) for x in self.params)
            if not probs:
                raise DomainError("Custom.probs must be non-empty")
            if any(not math.isfinite(x) or x < 0 for x in probs):
                raise DomainError("Custom.probs must be finite and non-negative")
            if abs(math.fsum(probs) - 1.0) > 1e-12:
                raise DomainError(f"Custom.probs must sum to 1 within 1e-12, got {math.fsum(probs)!r}")
            object.__setattr__(self, "params", probs)
            return
        if len(self.params) != 1:
            raise DomainError(f"{kind} takes exactly one parameter, got {len(self.params)}")
        (x,) = self.params
        if kind == "point":
            if isinstance(x, bool) or int(x) != x or x < 0:
                raise DomainError(f"PointMass.k must be a non-negative integer, got {x!r}")
            object.__setattr__(self, "params", (int(x),))
            return
        x = float(x)
        if not math.isfinite(x):
            raise DomainError(f"{_FIELD[kind]} must be finite, got {x!r}")
        if kind == "bernoulli" and not 0.0 <= x <= 1.0:
            raise DomainError(f"Bernoulli.p must lie in [0, 1], got {x!r}")
        if kind == "geometric" and not 0.0 < x <= 1.0:
            raise DomainError(f"Geometric.p must lie in (0, 1], got {x!r}")
        if kind == "poisson" and x < 0.0:
            raise DomainError(f"Poisson.lam must be >= 0, got {x!r}")
        object.__setattr__(self, "params", (x,))

    @property
    def param(self) -> float:
        return self.params[0]

    @property
    def support_max(self) -> int | None:
        """Largest point of the support, or None when the support is infinite."""
        kind = self.kind
        if kind == "bernoulli":
            return 1 if self.param > 0 else 0
        if kind == "point":
            return self.params[0]
        if kind == "custom":
            nz = [i for i, x in enumerate(self.params) if x > 0]
            return nz[-1] if nz else 0
        if kind == "geometric":
            return 0 if self.param == 1.0 else None
        return 0 if self.param == 0.0 else None

    def mean(self) -> float:
        kind = self.kind
        if kind in ("bernoulli", "poisson"):
            return self.param
        if kind == "geometric":
            return (1.0 - self.param) / self.param
        if kind == "point":
            return float(self.params[0])
        return math.fsum(k * x for k, x in enumerate(self.params))

    def pmf_prefix(self, k_max: int) -> np.ndarray:
        """Exact masses P(Y = k) for k = 0..k_max."""
        out = np.zeros(k_max + 1)
        kind = self.kind
        if kind == "bernoulli":
            out[0] = 1.0 - self.param
            if k_max >= 1:
                out[1] = self.param
        elif kind == "point":
            k = self.params[0]
            if k <= k_max:
                out[k] = 1.0
        elif kind == "custom":
            n = min(len(self.params), k_max + 1)
            out[:n] = self.params[:n]
        elif kind == "geometric":
            p = self.param
            q = 1.0 - p
            out[0] = p
            if q > 0.0:
                ks = np.arange(1, k_max + 1)
                out[1:] = p * np.exp(ks * math.log(q))
        else:
            lam = self.param
            if lam == 0.0:
                out[0] = 1.0
            else:
                ks = np.arange(k_max + 1)
                lg = np.array([math.lgamma(k + 1.0) for k in ks])
                out[:] = np.exp(ks * math.log(lam) - lam - lg)
        return out

    def tail_prob(self, m: int) -> float:
        """Certified upper bound on P(Y >= m)."""
        if m <= 0:
            return 1.0
        smax = self.support_max
        if smax is not None and m > smax:
            return 0.0
        kind = self.kind
        if kind == "geometric":
            return (1.0 - self.param) ** m
        if kind == "poisson":
            lam = self.param
            if m + 1 <= lam:
                return 1.0
            pm = _poisson_mass(lam, m)
            return min(1.0, pm / (1.0 - lam / (m + 1)))
        return math.fsum(self.pmf_prefix(smax)[m:])

    def tail_moment(self, m: int, r: int) -> float:
        """Certified upper bound on E[Y**r ; Y >= m] for r in {1, 2}."""
        if r not in (1, 2):
            raise ValueError("r must be 1 or 2")
        m = max(m, 0)
        smax = self.support_max
        if smax is not None:
            if m > smax:
                return 0.0
            ks = np.arange(m, smax + 1, dtype=float)
            return math.fsum(ks**r * self.pmf_prefix(smax)[m:])
        kind = self.kind
        if kind == "geometric":
            p = self.param
            q = 1.0 - p
            mu = q / p
            qm = q**m
            if r == 1:
                return qm * (m + mu)
            return qm * (m * m + 2 * m * mu + q * (1 + q) / (p * p))
        lam = self.param
        # E[Y; Y>=m] = lam P(Y>=m-1);  E[Y(Y-1); Y>=m] = lam^2 P(Y>=m-2)
        first = lam * self.tail_prob(m - 1)
        if r == 1:
            return first
        return lam * lam * self.tail_prob(m - 2) + first

    def truncation_index(self, eps: float) -> int:
        """Smallest K whose certified tail P(Y >= K+1) is at most eps."""
        smax = self.support_max
        if smax is not None:
            return smax
        if self.kind == "geometric":
            q = 1.0 - self.param
            k = max(0, int(math.ceil(math.log(eps) / math.log(q))) - 2)
            while k > 0 and self.tail_prob(k) <= eps:
                k -= 1
        else:
            k = int(self.param)
        while self.tail_prob(k + 1) > eps:
            k += 1
        return k


_FIELD = {"bernoulli": "Bernoulli.p", "geometric": "Geometric.p", "poisson": "Poisson.lam"}


def _poisson_mass(lam: float, k: int) -> float:
    if lam == 0.0:
        return 1.0 if k == 0 else 0.0
    return math.exp(k * math.log(lam) - lam - math.lgamma(k + 1.0))


def Bernoulli(p: float) -> DistSpec:
    return DistSpec("bernoulli", (p,))


def Geometric(p: float) -> DistSpec:
    return DistSpec("geometric", (p,))


def Poisson(lam: float) -> DistSpec:
    return DistSpec("poisson", (lam,))


def PointMass(k: int) -> DistSpec:
    return DistSpec("point", (k,))


def Custom(probs: Sequence[float]) -> DistSpec:
    return DistSpec("custom", tuple(probs))


@dataclass(frozen=True, eq=False)
class Pmf:
    probs: np.ndarray
    tail_bound: float = 0.0

    def __post_init__(self):
        probs = np.array(self.probs, dtype=np.float64).ravel()
        if probs.size == 0:
            raise DomainError("probs must be non-empty")
        if not np.all(np.isfinite(probs)):
            raise DomainError("probs must be finite")
        if probs.min() < -1e-15 or probs.max() > 1.0 + 1e-15:
            raise DomainError("every stored mass must lie in [0, 1]")
        probs = np.clip(probs, 0.0, 1.0)
        probs.setflags(write=False)
        tail = float(self.tail_bound)
        if not tail >= 0.0:
            raise DomainError(f"tail_bound must be >= 0, got {tail!r}")
        total = math.fsum(probs)
        if total > 1.0 + 1e-9 or 1.0 - total > tail + 1e-9:
            raise DomainError(f"stored mass {total!r} with tail_bound {tail!r} does not normalize")
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "tail_bound", tail)

    def __len__(self) -> int:
        return len(self.probs)

    def __getitem__(self, k: int) -> float:
        if k < 0 or k >= len(self.probs):
            return 0.0
        return float(self.probs[k])

    @property
    def support_max(self) -> int:
        return len(self.probs) - 1

    def total(self) -> float:
        return math.fsum(self.probs)

    def mean(self) -> float:
        return math.fsum(np.arange(len(self.probs)) * self.probs)

    def padded(self, length: int) -> np.ndarray:
        out = np.zeros(max(length, len(self.probs)))
        out[: len(self.probs)] = self.probs
        return out


def make_pmf(spec: DistSpec, eps: float = DEFAULT_EPSILON) -> Pmf:
    if not 0.0 < eps <= MAX_EPSILON:
        raise DomainError(f"epsilon must lie in (0, {MAX_EPSILON}], got {eps!r}")
    k = spec.truncation_index(eps)
    tail = 0.0 if spec.support_max is not None else spec.tail_prob(k + 1)
    return Pmf(spec.pmf_prefix(k), tail)


def poisson_pmf(lam: float, eps: float = DEFAULT_EPSILON) -> Pmf:
    return make_pmf(Poisson(lam), eps)


def scaled_pmf(pmf: Pmf, c: int) -> Pmf:
    """Law of ``c * Y``: mass pmf(k / c) at multiples of c, zero elsewhere."""
    if isinstance(c, bool) or int(c) != c or c < 1:
        raise PreconditionError(f"scale factor must be a positive integer, got {c!r}")
    c = int(c)
    if c == 1:
        return pmf
    out = np.zeros(c * (len(pmf) - 1) + 1)
    out[::c] = pmf.probs
    return Pmf(out, pmf.tail_bound)


def convolve(a: Pmf, b: Pmf) -> Pmf:
    out = kernels.convolve(a.probs, b.probs)
    nz = np.flatnonzero(out)
    end = nz[-1] + 1 if nz.size else 1
    return Pmf(out[:end], a.tail_bound + b.tail_bound)


@dataclass(frozen=True)
class Component:
    weight: int
    dist: DistSpec

    def __post_init__(self):
        w = self.weight
        if isinstance(w, bool) or int(w) != w or w < 1:
            raise DomainError(f"weight must be a positive integer, got {w!r}")
        object.__setattr__(self, "weight", int(w))


@dataclass(frozen=True)
class WeightedSumModel:
    """Z = sum_i c_i Y_i over independent summands."""

    components: tuple[Component, ...]
    lattice_warning: bool = field(init=False)

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise PreconditionError("a weighted-sum model needs at least one component")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "lattice_warning", all(c.weight != 1 for c in comps))

    @classmethod
    def of(cls, pairs) -> WeightedSumModel:
        """Build from ``(weight, DistSpec)`` pairs."""
        return cls(tuple(Component(w, d) for w, d in pairs))

    @classmethod
    def bernoulli(cls, ps: Sequence[float], cs: Sequence[int] | None = None) -> WeightedSumModel:
        cs = [1] * len(ps) if cs is None else cs
        if len(cs) != len(ps):
            raise PreconditionError("ps and cs must have equal length")
        return cls.of(zip(cs, (Bernoulli(p) for p in ps)))

    @classmethod
    def geometric(cls, ps: Sequence[float], cs: Sequence[int] | None = None) -> WeightedSumModel:
        cs = [1] * len(ps) if cs is None else cs
        if len(cs) != len(ps):
            raise PreconditionError("ps and cs must have equal length")
        return cls.of(zip(cs, (Geometric(p) for p in ps)))

    def __len__(self) -> int:
        return len(self.components)

    @property
    def weights(self) -> tuple[int, ...]:
        return tuple(c.weight for c in self.components)


def zn_pmf(model: WeightedSumModel, eps: float = DEFAULT_EPSILON) -> Pmf:
    """Law of the weighted sum, truncated with total tail at most eps."""
    share = eps / len(model)
    parts = (scaled_pmf(make_pmf(c.dist, share), c.weight) for c in model.components)
    return reduce(convolve, parts)


@singledispatch
def mean(obj) -> float:
    raise TypeError(f"mean() does not support {type(obj).__name__}")


@mean.register
def _(obj: Pmf) -> float:
    return obj.mean()


@mean.register
def _(obj: DistSpec) -> float:
    return obj.mean()


@mean.register
def _(obj: Component) -> float:
    return obj.weight * obj.dist.mean()


@mean.register
def _(obj: WeightedSumModel) -> float:
    return math.fsum(c.weight * c.dist.mean() for c in obj.components)


class TVInterval(NamedTuple):
    lo: float
    hi: float
    estimate: float

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x: float, slack: float = 0.0) -> bool:
        return self.lo - slack <= x <= self.hi + slack


def tv_exact(a: Pmf, b: Pmf) -> TVInterval:
    """Total variation distance between two truncated pmfs, as an interval."""
    n = max(len(a), len(b))
    d = 0.5 * math.fsum(np.abs(a.padded(n) - b.padded(n)))
    slack = 0.5 * (a.tail_bound + b.tail_bound)
    return TVInterval(max(0.0, d - slack), min(1.0, d + slack), d)
