"""Command-line front end: fit, simulate, diagnose, risk.

Input is plain CSV (``group,value`` for grouped data, ``series,index,value``
for series data); results are written as a deterministic JSON document, with
plot data emitted as separate CSV files next to it.

Exit codes: 0 success, 1 usage error, 2 malformed data, 3 unidentifiable
configuration, 4 non-convergence, 5 numeric capacity.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import data as data_io
from .diagnostics import diagnostic_report
from .errors import (
    CapacityError,
    ConvergenceError,
    DataError,
    IdentifiabilityError,
    ParameterError,
    StableMixError,
)
from .estimation import FitResult, delta_method_interval, fit_ma1, fit_random_effects
from .mixtures import (
    HiddenArSpec,
    HiddenMaSpec,
    HierarchicalSpec,
    RandomEffectsSpec,
    SpatialMaSpec,
    build_hidden_ar,
    build_hidden_ma,
    build_random_effects,
    build_spatial_ma,
    gev_simulate,
    gev_translate,
    simulate,
)

EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_IDENTIFIABILITY = 3
EXIT_NONCONVERGENCE = 4
EXIT_CAPACITY = 5


@dataclass(frozen=True)
class RiskQuery:
    """Tail-risk query for m groups of n blocks each at threshold x."""

    m: int
    n: int
    threshold: float
    mu: float
    sigma: float
    alpha: float

    def __post_init__(self) -> None:
        if self.m < 1 or self.n < 1:
            raise ParameterError("m and n must be >= 1")
        if not self.sigma > 0:
            raise ParameterError("sigma must be positive")
        if not (0.0 < self.alpha <= 1.0):
            raise ParameterError("alpha must be in (0, 1]")


def risk_return_period(q: RiskQuery) -> tuple[float, float]:
    """(F_hat(x), return period 1/(1 - F_hat(x))).

    F_hat(x) = exp(-m * (n * exp(-(x - mu)/sigma))^alpha); the return period
    is reported as inf when F_hat reaches 1 to machine precision.
    """
    z = np.exp(-(q.threshold - q.mu) / q.sigma)
    log_f = -q.m * (q.n * z) ** q.alpha
    f = float(np.exp(log_f))
    tail = -float(np.expm1(log_f))  # 1 - F, accurate for F near 1
    period = np.inf if tail == 0.0 else 1.0 / tail
    return f, float(period)


# ---------------------------------------------------------------------------
# document serialization


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return "inf" if np.isinf(v) else v
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def write_document(path, payload: dict) -> None:
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def fit_to_document(model: str, fit: FitResult) -> dict:
    return {
        "model": model,
        "param_names": fit.param_names,
        "estimates": fit.estimates,
        "loglik": fit.loglik,
        "std_errors": None if fit.std_errors is None else fit.std_errors,
        "covariance": None if fit.covariance is None else fit.covariance,
        "converged": fit.converged,
        "n_starts_used": fit.n_starts_used,
        "best_start": fit.best_start,
        "warnings": fit.warnings,
        "derived": fit.derived,
    }


def fit_from_document(path) -> tuple[str, FitResult]:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        names = list(doc["param_names"])
        fit = FitResult(
            param_names=names,
            theta=np.array([doc["estimates"][k] for k in names], dtype=float),
            loglik=float(doc["loglik"]),
            std_errors=None if doc.get("std_errors") is None
            else np.asarray(doc["std_errors"], dtype=float),
            covariance=None if doc.get("covariance") is None
            else np.asarray(doc["covariance"], dtype=float),
            converged=bool(doc.get("converged", False)),
            warnings=list(doc.get("warnings", [])),
            derived=dict(doc.get("derived", {})),
        )
        return str(doc["model"]), fit
    except (OSError, KeyError, ValueError, TypeError) as exc:
        raise DataError(f"cannot read fit document {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# subcommands


def _require(args, *names) -> None:
    for name in names:
        if getattr(args, name.replace("-", "_")) is None:
            raise ParameterError(f"--{name} is required for this command")


def cmd_fit(args) -> int:
    if args.model_kind == "random-effects":
        sample = data_io.read_grouped_csv(args.input)
        fit = fit_random_effects(sample)
        doc = fit_to_document("random-effects", fit)
    else:
        sample = data_io.read_series_csv(args.input)
        fit = fit_ma1(sample, n_starts=args.starts, seed=args.seed or 0)
        doc = fit_to_document("ma1", fit)
    write_document(args.output, doc)
    return 0


def _check_seed(seed) -> int:
    if seed is None:
        raise ParameterError("--seed is required for simulation")
    if not (0 <= seed < 2**64):
        raise ParameterError("seed must be an unsigned 64-bit integer")
    return int(seed)


def _build_sim_spec(args):
    if args.model == "re":
        _require(args, "m", "n", "mu", "sigma", "alpha")
        return RandomEffectsSpec(args.mu, args.sigma, args.alpha,
                                 tuple([args.n] * args.m))
    if args.model == "ma1":
        _require(args, "n", "mu", "sigma", "alpha", "b")
        return HiddenMaSpec(n=args.n, mu=args.mu, sigma=args.sigma,
                            alpha=args.alpha, b=(1.0, args.b))
    if args.model == "ar1":
        _require(args, "n", "mu", "sigma", "alpha", "rho")
        return HiddenArSpec(n=args.n, mu=args.mu, sigma=args.sigma,
                            alpha=args.alpha, rho=args.rho)
    if args.model == "spatial":
        _require(args, "n", "mu", "sigma", "alpha", "delta")
        return SpatialMaSpec(n=args.n, delta=args.delta, mu=args.mu,
                             sigma=args.sigma, alpha=args.alpha)
    _require(args, "m", "n", "mu", "sigma", "alpha", "beta")
    # hierarchical: m groups, n subgroups, each innermost block of size n
    return HierarchicalSpec(mu=args.mu, sigma=args.sigma, alpha=args.alpha,
                            beta=args.beta,
                            r=tuple(tuple([args.n] * args.n) for _ in range(args.m)))


_BUILDERS = {
    "re": build_random_effects,
    "ma1": build_hidden_ma,
    "ar1": build_hidden_ar,
    "spatial": build_spatial_ma,
}


def cmd_simulate(args) -> int:
    seed = _check_seed(args.seed)
    if args.replicates is None or args.replicates < 1:
        raise ParameterError("--replicates must be a positive integer")
    spec = _build_sim_spec(args)
    if args.gamma is not None:
        if args.model == "hierarchical":
            raise ParameterError("--gamma is not supported for the hierarchical model")
        gspec = gev_translate(_BUILDERS[args.model](spec), args.gamma)
        draws = gev_simulate(gspec, args.replicates, seed)
    else:
        draws = simulate(spec, args.replicates, seed)
    _write_simulation(args, spec, draws)
    return 0


def _write_simulation(args, spec, draws) -> None:
    with open(args.output, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if args.model == "re":
            w.writerow(["group", "value"])
            for r in range(len(draws)):
                for i in range(args.m):
                    for j in range(args.n):
                        w.writerow([f"r{r + 1}g{i + 1}",
                                    repr(float(draws[r, i * args.n + j]))])
        elif args.model in ("ma1", "ar1"):
            w.writerow(["series", "index", "value"])
            for r in range(len(draws)):
                for t in range(draws.shape[1]):
                    w.writerow([f"r{r + 1}", t + 1, repr(float(draws[r, t]))])
        elif args.model == "spatial":
            w.writerow(["replicate", "i", "j", "value"])
            n = args.n
            for r in range(len(draws)):
                for i in range(n):
                    for j in range(n):
                        w.writerow([r + 1, i + 1, j + 1,
                                    repr(float(draws[r, i * n + j]))])
        else:
            w.writerow(["replicate", "i", "j", "k", "value"])
            coords = [(i + 1, j + 1, k + 1)
                      for i, ri in enumerate(spec.r)
                      for j, r_ij in enumerate(ri)
                      for k in range(r_ij)]
            for r in range(len(draws)):
                for c, (i, j, k) in enumerate(coords):
                    w.writerow([r + 1, i, j, k, repr(float(draws[r, c]))])


def cmd_diagnose(args) -> int:
    model, fit = fit_from_document(args.fit)
    if model != "random-effects":
        raise ParameterError("diagnose supports random-effects fits only")
    sample = data_io.read_grouped_csv(args.input)
    report = diagnostic_report(fit, sample)
    stem = args.output[:-5] if args.output.endswith(".json") else args.output
    qq_path = f"{stem}_qq.csv"
    with open(qq_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["theoretical", "empirical"])
        for t, e in zip(report.exps_qq_data.theoretical, report.exps_qq_data.empirical):
            w.writerow([repr(float(t)), repr(float(e))])
    plot_paths = {}
    for lab, coords in report.group_gumbel_plots.items():
        path = f"{stem}_gumbel_{lab}.csv"
        plot_paths[lab] = path
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["value", "reduced_variate"])
            for x, y in coords:
                w.writerow([repr(float(x)), repr(float(y))])
    m1, m2, m3 = report.conditional_fits
    doc = {
        "model": "random-effects-diagnostics",
        "implied_correlation": report.implied_corr,
        "empirical_correlation": report.empirical_corr,
        "qq_slope": report.exps_qq_data.slope(),
        "qq_csv": qq_path,
        "gumbel_plot_csvs": plot_paths,
        "lrt_equal_sigma": {"statistic": report.lrt_equal_sigma[0],
                            "p_value": report.lrt_equal_sigma[1]},
        "lrt_pooled": {"statistic": report.lrt_pooled[0],
                       "p_value": report.lrt_pooled[1]},
        "sigma_checks": report.sigma_checks,
        "conditional_logliks": {"per_group": m1.loglik, "common_sigma": m2.loglik,
                                "pooled": m3.loglik},
    }
    write_document(args.output, doc)
    return 0


def cmd_risk(args) -> int:
    _require(args, "m", "n", "threshold")
    if args.fit is not None:
        _, fit = fit_from_document(args.fit)
        est = fit.estimates
        try:
            mu, sigma, alpha = est["mu"], est["sigma"], est["alpha"]
        except KeyError:
            raise DataError("fit document lacks mu/sigma/alpha estimates") from None
    else:
        _require(args, "mu", "sigma", "alpha")
        mu, sigma, alpha = args.mu, args.sigma, args.alpha
        fit = None
    query = RiskQuery(m=args.m, n=args.n, threshold=args.threshold,
                      mu=mu, sigma=sigma, alpha=alpha)
    f_hat, period = risk_return_period(query)
    doc = {
        "model": "risk",
        "query": {"m": query.m, "n": query.n, "threshold": query.threshold,
                  "mu": mu, "sigma": sigma, "alpha": alpha},
        "cdf_at_threshold": f_hat,
        "return_period": period,
    }
    if fit is not None and fit.covariance is not None:
        def g(theta):
            t = dict(zip(fit.param_names, theta))
            _, p = risk_return_period(RiskQuery(
                m=args.m, n=args.n, threshold=args.threshold,
                mu=t["mu"], sigma=t["sigma"], alpha=min(t["alpha"], 1.0)))
            return p
        lo, hi = delta_method_interval(g, fit)
        doc["return_period_ci95"] = [lo, hi]
    write_document(args.output, doc)
    return 0


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stablemix",
                     description="Dependent extremes via positive-stable mixtures")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="maximum-likelihood model fitting")
    p_fit.add_argument("model_kind", choices=["random-effects", "ma1"])
    p_fit.add_argument("--input", required=True)
    p_fit.add_argument("--output", default="-")
    p_fit.add_argument("--starts", type=int, default=20)
    p_fit.add_argument("--seed", type=int, default=None)
    p_fit.set_defaults(func=cmd_fit)

    p_sim = sub.add_parser("simulate", help="exact model simulation")
    p_sim.add_argument("--model", required=True,
                       choices=["re", "ma1", "ar1", "spatial", "hierarchical"])
    p_sim.add_argument("--replicates", type=int, required=True)
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--output", required=True)
    p_sim.add_argument("--mu", type=float, default=None)
    p_sim.add_argument("--sigma", type=float, default=None)
    p_sim.add_argument("--alpha", type=float, default=None)
    p_sim.add_argument("--b", type=float, default=None)
    p_sim.add_argument("--gamma", type=float, default=None)
    p_sim.add_argument("--rho", type=float, default=None)
    p_sim.add_argument("--delta", type=float, default=None)
    p_sim.add_argument("--beta", type=float, default=None)
    p_sim.add_argument("--m", type=int, default=None)
    p_sim.add_argument("--n", type=int, default=None)
    p_sim.set_defaults(func=cmd_simulate)

    p_diag = sub.add_parser("diagnose", help="model-checking report")
    p_diag.add_argument("--fit", required=True)
    p_diag.add_argument("--input", required=True)
    p_diag.add_argument("--output", required=True)
    p_diag.set_defaults(func=cmd_diagnose)

    p_risk = sub.add_parser("risk", help="tail-risk extrapolation")
    p_risk.add_argument("--m", type=int, default=None)
    p_risk.add_argument("--n", type=int, default=None)
    p_risk.add_argument("--threshold", type=float, default=None)
    p_risk.add_argument("--mu", type=float, default=None)
    p_risk.add_argument("--sigma", type=float, default=None)
    p_risk.add_argument("--alpha", type=float, default=None)
    p_risk.add_argument("--fit", default=None)
    p_risk.add_argument("--output", default="-")
    p_risk.set_defaults(func=cmd_risk)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except IdentifiabilityError as exc:
        print(json.dumps({"error": "identifiability", "message": str(exc)}),
              file=sys.stderr)
        return EXIT_IDENTIFIABILITY
    except DataError as exc:
        print(json.dumps({"error": "data", "message": str(exc)}), file=sys.stderr)
        return EXIT_DATA
    except ConvergenceError as exc:
        print(json.dumps({"error": "non-convergence", "message": str(exc)}),
              file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except CapacityError as exc:
        print(json.dumps({"error": "capacity", "message": str(exc)}), file=sys.stderr)
        return EXIT_CAPACITY
    except (ParameterError, StableMixError) as exc:
        print(json.dumps({"error": "usage", "message": str(exc)}), file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
