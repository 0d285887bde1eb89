"""Poisson approximation of weighted sums of non-negative integer variables."""
from .bounds import (
    BoundReport,
    KumarParams,
    bernoulli_bound,
    bernoulli_series_closed_form,
    compound_poisson_bound,
    corollary_bound,
    geometric_bound_chain,
    geometric_corollary_bound,
    kumar_bound,
    limit_certificate_bernoulli,
    theorem_bound,
)
from .errors import ConfigError, DomainError, PreconditionError
from .kernels import BACKEND
from .pmf import (
    Bernoulli,
    Component,
    Custom,
    DistSpec,
    Geometric,
    Pmf,
    PointMass,
    Poisson,
    TVInterval,
    WeightedSumModel,
    convolve,
    make_pmf,
    mean,
    poisson_pmf,
    scaled_pmf,
    tv_exact,
    zn_pmf,
)
from .stein import SteinSolution, stein_apply, stein_norms, stein_solve, tv_via_stein

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Bernoulli",
    "BoundReport",
    "Component",
    "ConfigError",
    "Custom",
    "DistSpec",
    "DomainError",
    "Geometric",
    "KumarParams",
    "Pmf",
    "PointMass",
    "Poisson",
    "PreconditionError",
    "SteinSolution",
    "TVInterval",
    "WeightedSumModel",
    "bernoulli_bound",
    "bernoulli_series_closed_form",
    "compound_poisson_bound",
    "convolve",
    "corollary_bound",
    "geometric_bound_chain",
    "geometric_corollary_bound",
    "kumar_bound",
    "limit_certificate_bernoulli",
    "make_pmf",
    "mean",
    "poisson_pmf",
    "scaled_pmf",
    "stein_apply",
    "stein_norms",
    "stein_solve",
    "theorem_bound",
    "tv_exact",
    "tv_via_stein",
    "zn_pmf",
]
