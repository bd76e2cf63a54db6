"""Command-line entry point.

Exit codes: 0 success, 1 a checked bound failed, 2 usage or unsupported
parameters, 3 resource limit.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .config import ExperimentConfig, resolve_output, task_rng
from .errors import ConvergenceError, DomainError, ResourceLimitError, UnsupportedParametersError
from .ks import KsDist
from .metrics import rate_experiment, rate_fit, reports_to_csv
from .stein import (
    TestFunction,
    check_bounds,
    smoothed_indicator,
    stein_expectation,
    stein_solve,
)
from .transforms import tdsb_coupling
from .urns import UrnSpec, exact_pmf, mean_white, second_moment_white, simulate_many

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _emit(text: str, out: Optional[str]) -> None:
    path = resolve_output(out)
    if path is None:
        sys.stdout.write(text)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


# -- ks -----------------------------------------------------------------------

def _cmd_ks(args) -> int:
    d = KsDist(args.s)
    if args.what == "sample":
        rng = np.random.default_rng(args.seed)
        vals = d.sample(rng, args.n)
    else:
        inputs = {"density": args.x, "cdf": args.x, "quantile": args.p, "moment": args.r}[args.what]
        if not inputs:
            flag = {"density": "--x", "cdf": "--x", "quantile": "--p", "moment": "--r"}[args.what]
            raise DomainError(f"ks {args.what} needs {flag}")
        fn = {"density": d.density, "cdf": d.cdf, "quantile": d.quantile, "moment": d.moment}[args.what]
        vals = [fn(v) for v in inputs]
    sys.stdout.write("".join(_fmt(float(v)) + "\n" for v in vals))
    return EXIT_OK


# -- urn ----------------------------------------------------------------------

def _spec(args) -> UrnSpec:
    return UrnSpec(args.alpha, args.beta, args.gamma, args.delta, args.i, args.j)


def _cmd_urn(args) -> int:
    spec = _spec(args)
    if args.what == "simulate":
        rng = np.random.default_rng(args.seed)
        vals = simulate_many(spec, args.n, args.replicates, rng)
        _emit("".join(f"{int(v)}\n" for v in vals), args.out)
    elif args.what == "exact":
        p = exact_pmf(spec, args.n)
        _emit(p.to_json() + "\n" if args.format == "json" else p.to_csv(), args.out)
    else:
        if spec == UrnSpec.preferential(args.i, 1):
            mean, second = mean_white(args.i, args.n), second_moment_white(args.i, args.n)
        else:
            p = exact_pmf(spec, args.n)
            mean, second = p.mean, p.moment(2)
        sys.stdout.write(f"mean {_fmt(mean)}\nsecond {_fmt(second)}\n")
    return EXIT_OK


# -- rate ---------------------------------------------------------------------

def _config(args) -> ExperimentConfig:
    base = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    over = {}
    for key in ("seed", "model", "replicates", "format"):
        v = getattr(args, key, None)
        if v is not None:
            over[key] = v
    if getattr(args, "i", None) is not None:
        over["i_list"] = args.i
    if getattr(args, "n", None) is not None:
        over["n_list"] = args.n
    if getattr(args, "beta", None) is not None:
        over["beta_threshold"] = args.beta
    if getattr(args, "out", None) is not None:
        over["output_path"] = args.out
    merged = {**base.__dict__, **over}
    return ExperimentConfig(**merged)


def _rate_task(task):
    model, i, n_list = task
    return rate_experiment(model, i, n_list)


def _cmd_rate(args) -> int:
    cfg = _config(args)
    tasks = [(cfg.model, i, list(cfg.n_list)) for i in cfg.i_list]
    results = _run(_rate_task, tasks, args.workers)
    reports = [r for rep, _ in results for r in rep]
    if cfg.format == "json":
        text = json.dumps([r.__dict__ for r in reports], indent=2) + "\n"
    else:
        text = reports_to_csv(reports)
    _emit(text, cfg.output_path)
    status = EXIT_OK
    for (rep, fit), i in zip(results, cfg.i_list):
        sys.stderr.write(
            f"model={cfg.model} i={i} slope={fit.slope:.4f} "
            f"constants=[{fit.constants.min():.4f}, {fit.constants.max():.4f}]\n"
        )
        if args.check_slope and not args.check_slope[0] <= fit.slope <= args.check_slope[1]:
            status = EXIT_CHECK
    return status


# -- coupling -----------------------------------------------------------------

def _coupling_task(task):
    seed, index, i, n, reps, beta = task
    rng = task_rng(seed, index)
    c = tdsb_coupling(i, n, rng, reps)
    b = math.sqrt(second_moment_white(i, n))
    beta = 3.0 / b if beta is None else beta
    p = 1.0 - float(c.agree.mean())
    half = 1.96 * math.sqrt(max(p * (1 - p), 1e-300) / reps)
    diff = np.abs(c.w - c.w_star) / b
    return {
        "i": i, "n": n, "replicates": reps, "p_disagree": p,
        "ci_low": max(p - half, 0.0), "ci_high": min(p + half, 1.0),
        "mean_abs_diff": float(diff.mean()), "beta": beta, "tail_prob": float((diff > beta).mean()),
    }


def _cmd_coupling(args) -> int:
    cfg = _config(args)
    tasks = []
    for i in cfg.i_list:
        for n in cfg.n_list:
            tasks.append((cfg.seed, len(tasks), i, n, cfg.replicates, cfg.beta_threshold))
    rows = _run(_coupling_task, tasks, args.workers)
    cols = list(rows[0])
    if cfg.format == "json":
        text = json.dumps(rows, indent=2) + "\n"
    else:
        text = "# padegree coupling report, schema v1\n" + ",".join(cols) + "\n"
        text += "".join(",".join(repr(r[c]) if isinstance(r[c], float) else str(r[c]) for c in cols) + "\n" for r in rows)
    _emit(text, cfg.output_path)
    for i in cfg.i_list:
        sub = [(r["n"], r["p_disagree"]) for r in rows if r["i"] == i and r["p_disagree"] > 0]
        if len(sub) >= 3:
            sys.stderr.write(f"i={i} disagreement slope={rate_fit(sub).slope:.4f}\n")
    return EXIT_OK


# -- stein-check --------------------------------------------------------------

def _stein_battery():
    return {
        "x^2": TestFunction(lambda x: x * x, lambda x: 2 * x, lambda x: 2.0),
        "x^3": TestFunction(lambda x: x ** 3, lambda x: 3 * x * x, lambda x: 6 * x),
        "x^2 exp(-x)": TestFunction(
            lambda x: x * x * math.exp(-x),
            lambda x: (2 * x - x * x) * math.exp(-x),
            lambda x: (2 - 4 * x + x * x) * math.exp(-x),
        ),
    }


def _cmd_stein_check(args) -> int:
    s = args.s
    if not (s == 0.5 or s >= 1.0):
        sys.stderr.write(
            f"stein-check: s={s} lies in (1/2, 1), where the analytic bounds are not "
            "established; only s = 1/2 and s >= 1 are supported\n"
        )
        return EXIT_USAGE
    grid = np.linspace(args.xmax / args.grid, args.xmax, args.grid)
    ok = True
    for c in check_bounds(s, grid):
        ok &= c.passed
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name} worst_margin={c.worst_margin:.3e} points={c.points}")
    for name, tf in _stein_battery().items():
        v = stein_expectation(s, tf)
        passed = abs(v) <= 1e-6
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'} characterization f={name} E[Af(Z)]={v:.3e}")
    ramp, kinks = smoothed_indicator(1.0, 0.1)
    targets = {"x": (lambda x: x, ()), "ramp(1,0.1)": (ramp, kinks), "exp(-x)": (lambda x: math.exp(-x), ())}
    xs = np.linspace(0.0, 5.0, 26)
    for name, (h, kk) in targets.items():
        r = stein_solve(s, h, xs, breakpoints=kk).max_residual()
        passed = r <= 1e-6
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'} stein_solve h={name} max_residual={r:.3e}")
    return EXIT_OK if ok else EXIT_CHECK


# -- plumbing -----------------------------------------------------------------

def _run(fn, tasks, workers: int):
    if workers and workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, tasks))
    return [fn(t) for t in tasks]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="padegree", description="K_s laws, urns and preferential attachment")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    ks = sub.add_parser("ks", help="K_s density, cdf, quantile, moments, samples")
    ks.add_argument("what", choices=["density", "cdf", "quantile", "moment", "sample"])
    ks.add_argument("--s", type=float, required=True)
    ks.add_argument("--x", type=float, nargs="+")
    ks.add_argument("--p", type=float, nargs="+")
    ks.add_argument("--r", type=float, nargs="+")
    ks.add_argument("--n", type=int, default=1, help="number of samples")
    ks.add_argument("--seed", type=int, default=0)
    ks.set_defaults(func=_cmd_ks)

    urn = sub.add_parser("urn", help="simulate an urn, its exact law, or its moments")
    urn.add_argument("what", choices=["simulate", "exact", "moments"])
    for name, default in (("alpha", 2), ("beta", 0), ("gamma", 1), ("delta", 1), ("i", 1), ("j", 1)):
        urn.add_argument(f"--{name}", type=int, default=default)
    urn.add_argument("--n", type=int, required=True)
    urn.add_argument("--replicates", type=int, default=1)
    urn.add_argument("--seed", type=int, default=0)
    urn.add_argument("--format", choices=["csv", "json"], default="csv")
    urn.add_argument("--out")
    urn.set_defaults(func=_cmd_urn)

    def experiment_flags(p):
        p.add_argument("--config", help="JSON file with ExperimentConfig fields")
        p.add_argument("--i", type=int, nargs="+")
        p.add_argument("--n", type=int, nargs="+")
        p.add_argument("--seed", type=int)
        p.add_argument("--format", choices=["csv", "json"])
        p.add_argument("--out")
        p.add_argument("--workers", type=int, default=1)

    rate = sub.add_parser("rate", help="exact Kolmogorov/Wasserstein distances and fitted slope")
    experiment_flags(rate)
    rate.add_argument("--model", choices=["1", "2", "urn"])
    rate.add_argument("--check-slope", type=float, nargs=2, metavar=("LO", "HI"))
    rate.set_defaults(func=_cmd_rate)

    cp = sub.add_parser("coupling", help="Monte Carlo of the R / W'' coupling")
    experiment_flags(cp)
    cp.add_argument("--replicates", type=int)
    cp.add_argument("--beta", type=float, help="tail threshold (default 3/b)")
    cp.set_defaults(func=_cmd_coupling, model="urn")

    st = sub.add_parser("stein-check", help="verify the analytic bounds and the Stein solver")
    st.add_argument("--s", type=float, required=True)
    st.add_argument("--grid", type=int, default=100, help="number of grid points")
    st.add_argument("--xmax", type=float, default=10.0)
    st.set_defaults(func=_cmd_stein_check)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ResourceLimitError as e:
        sys.stderr.write(f"resource limit: {e}\n")
        return EXIT_RESOURCE
    except (DomainError, UnsupportedParametersError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE
    except ConvergenceError as e:
        sys.stderr.write(f"numerical failure: {e}\n")
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
