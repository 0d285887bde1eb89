"""Poisson Stein operator, the solution of its Stein equation, and norm checks.

For f = 1_A the bounded solution of ``lam*g(k+1) - k*g(k) = f(k) - P(A)`` with
``g(0) = 0`` satisfies

    lam * p(k) * g(k+1) = P(A, X <= k) * P(X > k) - P(A, X > k) * P(X <= k)

where p is the Poisson(lam) pmf. This is algebraically the forward recursion
but never divides by a vanishing p(k): both tail terms are carried as ratios
to p(k) through positive backward recurrences.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Iterable

import numpy as np

from . import kernels
from .errors import DomainError, PreconditionError
from .pmf import Pmf, Poisson

STEIN_TAIL = 1e-12
TAIL_PAD = 10


def default_truncation(lam: float) -> int:
    """Smallest index with Poisson(lam) tail below 1e-12, plus 10."""
    return Poisson(lam).truncation_index(STEIN_TAIL) + TAIL_PAD


def norm_limits(lam: float) -> tuple[float, float]:
    """Bounds on ||g|| and ||Delta g|| valid for every indicator test function."""
    return 1.0 / max(1.0, math.sqrt(lam)), 1.0 / max(1.0, lam)


@dataclass(frozen=True, eq=False)
class SteinSolution:
    lam: float
    A: frozenset
    g: np.ndarray
    K: int
    prob_a: float

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.g)))

    @property
    def delta_sup_norm(self) -> float:
        return float(np.max(np.abs(np.diff(self.g)))) if self.K > 0 else 0.0

    def rhs(self, k: int) -> float:
        return (1.0 if k in self.A else 0.0) - self.prob_a

    def residual(self) -> float:
        """max_k |lam g(k+1) - k g(k) - (1_A(k) - P(A))| over 0 <= k < K."""
        if self.K == 0:
            return 0.0
        ks = np.arange(self.K)
        f = np.array([self.rhs(k) for k in ks])
        lhs = self.lam * self.g[1:] - ks * self.g[:-1]
        return float(np.max(np.abs(lhs - f)))


def stein_apply(g, k: int, lam: float) -> float:
    """Poisson Stein operator: lam*g(k+1) - k*g(k)."""
    if k < 0 or k + 1 >= len(g):
        raise IndexError(f"k={k} needs g up to index {k + 1}, only {len(g)} values stored")
    return lam * g[k + 1] - k * g[k]


def _check_lam(lam: float) -> float:
    lam = float(lam)
    if not (lam > 0.0 and math.isfinite(lam)):
        raise DomainError(f"lambda must be a finite positive number, got {lam!r}")
    return lam


def _solve_indicators(lam: float, ind: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    big_k = ind.shape[1] - 1
    p = Poisson(lam).pmf_prefix(big_k)
    m_ext = big_k + 50 + int(math.ceil(2 * lam))
    return kernels.stein_solve_batch(ind, p, lam, m_ext)


def stein_solve(lam: float, A: Iterable[int], K: int | None = None) -> SteinSolution:
    lam = _check_lam(lam)
    aset = frozenset(int(a) for a in A)
    if any(a < 0 for a in aset):
        raise DomainError("test set A must contain non-negative integers")
    top = max(aset, default=0)
    if K is None:
        K = max(default_truncation(lam), top + TAIL_PAD)
    elif K < top + TAIL_PAD:
        raise PreconditionError(f"K={K} must be at least max(A) + {TAIL_PAD} = {top + TAIL_PAD}")
    ind = np.zeros((1, K + 1), dtype=np.uint8)
    ind[0, sorted(aset)] = 1
    g, pa = _solve_indicators(lam, ind)
    return SteinSolution(lam, aset, g[0], K, float(pa[0]))


def stein_expectation(z: Pmf, sol: SteinSolution) -> float:
    """E[lam g(Z+1) - Z g(Z)] over the stored masses of z."""
    n = len(z)
    if n > sol.K:
        raise PreconditionError(f"z has support up to {n - 1}; solution stored only to K={sol.K}")
    ks = np.arange(n)
    vals = sol.lam * sol.g[1 : n + 1] - ks * sol.g[:n]
    return math.fsum(z.probs * vals)


def stein_identity_residual(sol: SteinSolution) -> float:
    """|E[A g(X)]| for X ~ Poisson(lam), summed over 0..K-1."""
    p = Poisson(sol.lam).pmf_prefix(sol.K - 1)
    ks = np.arange(sol.K)
    vals = sol.lam * sol.g[1:] - ks * sol.g[:-1]
    return abs(math.fsum(p * vals))


@dataclass(frozen=True)
class NormCertificate:
    lam: float
    K: int
    sup_norm: float
    delta_sup_norm: float
    sup_set: tuple[str, int]
    delta_set: tuple[str, int]

    @property
    def sup_limit(self) -> float:
        return norm_limits(self.lam)[0]

    @property
    def delta_limit(self) -> float:
        return norm_limits(self.lam)[1]

    @property
    def holds(self) -> bool:
        return self.sup_norm <= self.sup_limit + 1e-12 and self.delta_sup_norm <= self.delta_limit + 1e-12


def stein_norms(lam: float, K: int | None = None) -> NormCertificate:
    """Worst solution norms over all singletons {j} and upper sets {j, ..., K}."""
    lam = _check_lam(lam)
    if K is None:
        K = default_truncation(lam)
    n = K + 1
    ind = np.zeros((2 * n, n), dtype=np.uint8)
    ind[np.arange(n), np.arange(n)] = 1
    ind[n:] = np.triu(np.ones((n, n), dtype=np.uint8))
    g, _ = _solve_indicators(lam, ind)
    sup = np.max(np.abs(g), axis=1)
    dsup = np.max(np.abs(np.diff(g, axis=1)), axis=1)
    labels = [("singleton", j) for j in range(n)] + [("upper", j) for j in range(n)]
    i, j = int(np.argmax(sup)), int(np.argmax(dsup))
    return NormCertificate(lam, K, float(sup[i]), float(dsup[j]), labels[i], labels[j])


def _extremal_set(z: Pmf, lam: float) -> frozenset:
    p = Poisson(lam).pmf_prefix(len(z) - 1)
    return frozenset(int(k) for k in np.flatnonzero(z.probs > p))


def tv_via_stein(z: Pmf, lam: float, K: int | None = None) -> float:
    """|E[A g_{A*}(Z)]| at the extremal set A* = {k : z(k) > P(X = k)}."""
    lam = _check_lam(lam)
    if K is not None and len(z) - 1 > K:
        raise PreconditionError(f"z has support up to {len(z) - 1} > K={K}")
    K_eff = max(K or 0, default_truncation(lam), len(z) + TAIL_PAD)
    sol = stein_solve(lam, _extremal_set(z, lam), K_eff)
    return abs(stein_expectation(z, sol))


def subset_sup(z: Pmf, lam: float) -> tuple[float, frozenset]:
    """Brute force sup over every A within z's stored support of |E[A g_A(Z)]|."""
    lam = _check_lam(lam)
    n = len(z)
    if n > 12:
        raise PreconditionError(f"exhaustive search limited to 12 support points, got {n}")
    K = max(default_truncation(lam), n + TAIL_PAD)
    ind = np.zeros((2**n, K + 1), dtype=np.uint8)
    ind[:, :n] = np.array(list(product((0, 1), repeat=n)), dtype=np.uint8)[:, ::-1]
    g, _ = _solve_indicators(lam, ind)
    ks = np.arange(n)
    vals = np.abs((lam * g[:, 1 : n + 1] - ks * g[:, :n]) @ z.probs)
    best = int(np.argmax(vals))
    return float(vals[best]), frozenset(int(k) for k in np.flatnonzero(ind[best, :n]))
