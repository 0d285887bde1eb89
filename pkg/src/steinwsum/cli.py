"""Command-line interface.

Exit codes: 0 success, 1 domain or precondition error, 2 config parse error
or bad usage, 3 when ``bound`` produced a report that is not valid.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import Sequence

from . import experiments
from .bounds import (
    BoundReport,
    bernoulli_bound,
    bernoulli_params,
    compound_poisson_bound,
    corollary_bound,
    geometric_bound_chain,
    geometric_corollary_bound,
    geometric_params,
    kumar_bound,
    limit_certificate_bernoulli,
    theorem_bound,
)
from .config import load_config
from .errors import ConfigError, DomainError, PreconditionError
from .kernels import BACKEND
from .pmf import DEFAULT_EPSILON, MAX_EPSILON, mean, poisson_pmf, tv_exact, zn_pmf
from .stein import stein_identity_residual, stein_norms, stein_solve, tv_via_stein

BOUND_NAMES = (
    "theorem",
    "theorem-printed",
    "corollary",
    "bernoulli",
    "bernoulli-limit",
    "kumar",
    "geometric",
    "geometric-chain",
    "compound-poisson",
)


def _fmt_num(x) -> str:
    if x is None:
        return ""
    return f"{x:.10g}"


def _round(x):
    """10 significant digits; non-finite values become None."""
    if isinstance(x, bool) or not isinstance(x, float):
        return x
    if not math.isfinite(x):
        return None
    return float(f"{x:.10g}")


class Output:
    """Rows plus run metadata, rendered as text, CSV or JSON."""

    def __init__(self, rows: list[dict], meta: dict | None = None):
        self.rows = [{k: _round(v) for k, v in r.items()} for r in rows]
        self.meta = {k: _round(v) for k, v in (meta or {}).items()}

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return json.dumps({"meta": self.meta, "rows": self.rows}, ensure_ascii=False, indent=2) + "\n"
        if fmt == "csv":
            buf = io.StringIO()
            for k, v in self.meta.items():
                buf.write(f"# {k}: {_cell(v)}\n")
            if self.rows:
                writer = csv.DictWriter(buf, fieldnames=list(self.rows[0]), lineterminator="\n")
                writer.writeheader()
                writer.writerows({k: _cell(v) for k, v in r.items()} for r in self.rows)
            return buf.getvalue()
        return _text_table(self.rows, self.meta)


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return _fmt_num(v)
    if v is None:
        return ""
    return str(v)


def _text_table(rows: list[dict], meta: dict) -> str:
    lines = [f"{k}: {_cell(v)}" for k, v in meta.items()]
    if rows:
        cols = list(rows[0])
        cells = [[_cell(r[c]) if r[c] is not None else "-" for c in cols] for r in rows]
        widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
        if lines:
            lines.append("")
        lines.append("  ".join(c.ljust(w) for c, w in zip(cols, widths)).rstrip())
        lines.append("  ".join("-" * w for w in widths))
        for row in cells:
            lines.append("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


def _report_row(rep: BoundReport) -> dict:
    display = _fmt_num(rep.value) if rep.valid else f"Not Valid ({rep.notes})"
    return {
        "name": rep.name,
        "value": rep.value,
        "term_mean_mismatch": rep.term_mean_mismatch,
        "term_main": rep.term_main,
        "lambda": rep.lam,
        "valid": rep.valid,
        "display": display,
        "notes": rep.notes,
    }


def _default_eps() -> float:
    raw = os.environ.get("STEIN_EPSILON")
    if not raw:
        return DEFAULT_EPSILON
    try:
        eps = float(raw)
    except ValueError:
        raise DomainError(f"STEIN_EPSILON must be a number, got {raw!r}") from None
    if not 0 < eps <= MAX_EPSILON:
        raise DomainError(f"STEIN_EPSILON must lie in (0, {MAX_EPSILON}], got {raw!r}")
    return eps


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _resolve(args):
    cfg = load_config(args.config)
    if args.epsilon is not None:
        eps = args.epsilon
    elif cfg.epsilon is not None:
        eps = cfg.epsilon
    else:
        eps = _default_eps()
    lam = args.lam if args.lam is not None else cfg.lam
    return cfg, eps, lam


# -- subcommands --------------------------------------------------------------


def cmd_bound(args) -> tuple[Output, int]:
    cfg, eps, lam = _resolve(args)
    model = cfg.model
    name = args.name
    if name == "theorem":
        reps = [theorem_bound(model, lam, eps)]
    elif name == "theorem-printed":
        reps = [theorem_bound(model, lam, eps, form="printed")]
    elif name == "corollary":
        reps = [corollary_bound(model, lam, eps)]
    elif name == "bernoulli":
        reps = [bernoulli_bound(*bernoulli_params(model), lam)]
    elif name == "bernoulli-limit":
        reps = [limit_certificate_bernoulli(*bernoulli_params(model), lam)[0]]
    elif name == "kumar":
        reps = [kumar_bound(*bernoulli_params(model))]
    elif name == "geometric":
        ps, cs = geometric_params(model)
        if any(c != 1 for c in cs):
            raise PreconditionError("the geometric bound requires unit weights; use geometric-chain")
        reps = [geometric_corollary_bound(ps, lam)]
    elif name == "geometric-chain":
        reps = geometric_bound_chain(*geometric_params(model), lam, eps)
    else:
        rates = []
        for i, comp in enumerate(model.components, start=1):
            if comp.weight != i or comp.dist.kind != "poisson":
                raise PreconditionError(f"compound-poisson needs component {i} to be poisson with weight {i}")
            rates.append(comp.dist.param)
        reps = [compound_poisson_bound(rates, lam, args.mode, eps)]
    meta = {"config": cfg.source, "epsilon": eps, "lattice_warning": model.lattice_warning}
    code = 0 if all(r.valid for r in reps) else 3
    return Output([_report_row(r) for r in reps], meta), code


def cmd_tv(args) -> tuple[Output, int]:
    cfg, eps, lam = _resolve(args)
    if lam is None:
        lam = mean(cfg.model)
    z = zn_pmf(cfg.model, eps)
    tv = tv_exact(z, poisson_pmf(lam, eps))
    row = {
        "lambda": lam,
        "mean": mean(cfg.model),
        "tv_lo": tv.lo,
        "tv_hi": tv.hi,
        "tv_estimate": tv.estimate,
        "tv_via_stein": tv_via_stein(z, lam),
        "support_max": z.support_max,
        "tail_bound": z.tail_bound,
    }
    return Output([row], {"config": cfg.source, "epsilon": eps}), 0


def cmd_table1(args) -> tuple[Output, int]:
    eps = _default_eps()
    rows = []
    for r in experiments.reproduce_table1(eps):
        kp = r.kumar.params.get("kumar")
        rows.append(
            {
                "set": r.set_id,
                "n": r.n,
                "bernoulli": r.bernoulli.value,
                "bernoulli_printed": r.bernoulli_printed,
                "bernoulli_flag": "DISCREPANCY" if r.bernoulli_discrepancy else "ok",
                "kumar": r.kumar.value if r.kumar.valid else f"Not Valid ({r.kumar.notes})",
                "kumar_printed": r.kumar_printed if r.kumar_printed is not None else "Not Valid",
                "kumar_flag": "DISCREPANCY" if r.kumar_discrepancy else "ok",
                "kumar_q": kp.q if kp else None,
                "theorem": r.theorem.value,
                "exact_tv_hi": r.exact_tv_hi,
            }
        )
    return Output(rows, {"epsilon": eps, "discrepancy_tol": experiments.DISCREPANCY_TOL}), 0


def cmd_sweep(args) -> tuple[Output, int]:
    eps = _default_eps()
    fn = experiments.bernoulli_limit_sweep if args.family == "bernoulli" else experiments.geometric_limit_sweep
    results = fn(args.lam, args.ns, args.weights, eps)
    star = "p_star" if args.family == "bernoulli" else "q_star"
    rows = [
        {
            "n": r.n,
            "lambda": r.lam,
            "bound": r.bound_value,
            "exact_tv_lo": r.exact_tv_lo,
            "exact_tv_hi": r.exact_tv_hi,
            star: r.p_or_q_star,
            "theorem": r.theorem_value,
            "bound_dominates": r.dominates,
            "wall_time_s": r.wall_time,
        }
        for r in results
    ]
    meta = {"family": args.family, "weights": ",".join(map(str, args.weights)), "epsilon": eps}
    return Output(rows, meta), 0


def cmd_stein_check(args) -> tuple[Output, int]:
    rows = []
    for lam in args.lambdas:
        cert = stein_norms(lam)
        sol = stein_solve(lam, {0}, cert.K)
        rows.append(
            {
                "lambda": lam,
                "K": cert.K,
                "sup_norm": cert.sup_norm,
                "sup_limit": cert.sup_limit,
                "sup_set": f"{cert.sup_set[0]}:{cert.sup_set[1]}",
                "delta_sup_norm": cert.delta_sup_norm,
                "delta_limit": cert.delta_limit,
                "delta_set": f"{cert.delta_set[0]}:{cert.delta_set[1]}",
                "holds": cert.holds,
                "identity_residual": stein_identity_residual(sol),
                "equation_residual": sol.residual(),
            }
        )
    return Output(rows, {"backend": BACKEND}), 0


def cmd_tightness(args) -> tuple[Output, int]:
    eps = _default_eps()
    study = experiments.tightness_study(seed=args.seed, count=args.count, eps=eps)
    rows = [
        {
            "index": r.index,
            "n": r.n,
            "weights": ",".join(map(str, r.weights)),
            "lambda": r.lam,
            "bound": r.bound,
            "exact_tv_lo": r.exact_tv_lo,
            "exact_tv_hi": r.exact_tv_hi,
            "ratio": r.ratio,
            "exact_match": r.exact_match,
        }
        for r in study.rows
    ]
    meta = {"seed": study.seed, "cases": len(rows), "violations": study.violations}
    meta.update({f"ratio_{k}": v for k, v in study.quantiles.items()})
    return Output(rows, meta), 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "csv", "json"), default="text")
    common.add_argument("--out", metavar="PATH", help="write output here instead of stdout")

    model_opts = argparse.ArgumentParser(add_help=False)
    model_opts.add_argument("--config", required=True, help="YAML config path or built-in name (set1, set2_n20, ...)")
    model_opts.add_argument("--lambda", dest="lam", type=float, help="Poisson rate (default: from config, else E Z)")
    model_opts.add_argument("--epsilon", type=float, help="truncation budget (default 1e-12 or STEIN_EPSILON)")

    parser = argparse.ArgumentParser(prog="steinwsum", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", parents=[common, model_opts], help="evaluate a named bound on a model")
    p.add_argument("--name", choices=BOUND_NAMES, default="theorem")
    p.add_argument("--mode", choices=("series", "closed"), default="series", help="compound-poisson evaluation")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("tv", parents=[common, model_opts], help="exact TV distance to Poisson(lambda)")
    p.set_defaults(func=cmd_tv)

    p = sub.add_parser("table1", parents=[common], help="reproduce the Bernoulli comparison table")
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("sweep", parents=[common], help="limit-theorem sweep")
    p.add_argument("--family", choices=("bernoulli", "geometric"), default="bernoulli")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--ns", type=_int_list, default=list(experiments.DEFAULT_NS))
    p.add_argument("--weights", type=_int_list, default=[1, 2], help="weights cycled over components")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("stein-check", parents=[common], help="certify Stein solution norms")
    p.add_argument("--lambdas", type=_float_list, default=[0.5, 1.0, 2.0, 5.0, 10.0])
    p.set_defaults(func=cmd_stein_check)

    p = sub.add_parser("tightness", parents=[common], help="bound/exact ratios on a random corpus")
    p.add_argument("--seed", type=int, default=experiments.DEFAULT_SEED)
    p.add_argument("--count", type=int, default=200)
    p.set_defaults(func=cmd_tightness)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        out, code = args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, PreconditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    text = out.render(args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


def main() -> None:
    sys.exit(run())
