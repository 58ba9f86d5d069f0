"""Command-line entry point.

Exit codes: 0 on success, 1 for usage errors (bad flags, violated preconditions),
2 for runtime failures (unreadable files, solver failures).
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import List, Optional

from . import analytic, experiment
from .core import Algorithm, Form, MatrixFormatError, load_matrix, sample_instance
from .exact import DEFAULT_LIMIT, solve_exact
from .greedy import greedy_solve
from .spectral import DEFAULT_MAX_ITERS, DEFAULT_TOL, eigen_solve

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        kwargs.setdefault("allow_abbrev", False)
        super().__init__(*args, **kwargs)

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt6(value) -> str:
    if isinstance(value, float):
        return format(value, ".6g")
    return str(value)


def _print_text(payload: dict, out) -> None:
    for key, value in payload.items():
        if isinstance(value, list):
            value = " ".join(_fmt6(v) for v in value)
        print(f"{key}: {_fmt6(value)}", file=out)


def _emit(payload: dict, as_json: bool, out) -> None:
    if as_json:
        print(json.dumps(payload, indent=2), file=out)
    else:
        _print_text(payload, out)


# ------------------------------------------------------------------ subcommands


def _parse_sample(spec: str):
    parts = [p.strip() for p in spec.split(",")]
    if len(parts) != 4:
        raise UsageError(f"--sample expects m,n,ensemble,seed; got {spec!r}")
    try:
        m, n, seed = int(parts[0]), int(parts[1]), int(parts[3])
    except ValueError:
        raise UsageError(f"--sample expects integer m, n and seed; got {spec!r}") from None
    return sample_instance(m, n, parts[2], seed)


def solve_payload(instance, form, algo, emit_spins=False, limit=DEFAULT_LIMIT,
                  tol=DEFAULT_TOL, max_iters=DEFAULT_MAX_ITERS) -> dict:
    form = Form.parse(form)
    algo = Algorithm.parse(algo)
    extra = {}
    if algo is Algorithm.EXACT:
        sol = solve_exact(instance, form, limit)
        sigma, report = sol.sigma, sol.report
        extra["states_visited"] = sol.states_visited
    elif algo in (Algorithm.GREEDY, Algorithm.GREEDY_SORTED):
        ordering = "natural" if algo is Algorithm.GREEDY else "by_column_norm"
        sigma, report, _ = greedy_solve(instance, form, ordering)
    else:
        if form is not Form.POSITIVE:
            raise UsageError("eigenvector rounding is only defined for the positive form")
        res = eigen_solve(instance, tol, max_iters)
        sigma, report = res.sigma, res.report
        extra["lambda1"] = res.lambda1
        extra["guaranteed_floor"] = res.guaranteed_floor
    payload = {
        "algorithm": algo.value,
        "form": form.value,
        "m": instance.m,
        "n": instance.n,
        "raw_quadratic": report.raw_quadratic,
        "normalized_xi": report.normalized_xi,
        "normalized_quadratic": report.normalized_quadratic,
    }
    payload.update(extra)
    if emit_spins:
        payload["spins"] = [int(s) for s in sigma]
    return payload


def cmd_solve(args, out) -> int:
    if (args.matrix is None) == (args.sample is None):
        raise UsageError("give exactly one of --matrix or --sample")
    if args.matrix is not None:
        instance = load_matrix(args.matrix)
    else:
        instance = _parse_sample(args.sample)
    payload = solve_payload(instance, args.form, args.algo, args.emit_spins, args.limit,
                            args.tol, args.max_iters)
    _emit(payload, args.json, out)
    return EXIT_OK


def bounds_payload(alpha, xi_sk=analytic.XI_SK_DEFAULT, m=None, n=None) -> dict:
    payload = analytic.bounds(alpha, xi_sk, m, n).to_dict()
    if payload["negative_lower_finite"] is None:
        for key in ("negative_lower_finite", "m", "n"):
            del payload[key]
    return payload


def cmd_bounds(args, out) -> int:
    _emit(bounds_payload(args.alpha, args.xi_sk, args.m, args.n), args.json, out)
    return EXIT_OK


def recursion_payload(alpha, resolution, form, trace_path=None) -> dict:
    form = Form.parse(form)
    alpha = float(alpha)
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    n = int(resolution)
    m = max(1, round(alpha * n))
    trace = analytic.recursion(m, n, form)
    limit_xi = analytic.recursion_limit(alpha, form, n)
    if trace_path is not None:
        _write_trace(trace, trace_path)
    return {
        "form": form.value,
        "alpha": alpha,
        "m": m,
        "n": n,
        "phi_n_over_n2": trace.normalized_limit,
        "sqrt_phi_n_over_n": limit_xi,
    }


def _write_trace(trace, path) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("k", "phi"))
            for k, value in enumerate(trace.phi, start=1):
                writer.writerow((k, format(float(value), ".17g")))
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write trace to {path}: {exc.strerror}") from exc


def cmd_recursion(args, out) -> int:
    _emit(recursion_payload(args.alpha, args.resolution, args.form, args.trace), args.json, out)
    return EXIT_OK


_CONFIG_FLAGS = ("m", "n", "ensemble", "form", "algorithms", "trials", "seed")


def _config_from_args(args) -> experiment.ExperimentConfig:
    if args.config is not None:
        clashing = [f"--{name}" for name in _CONFIG_FLAGS if getattr(args, name) is not None]
        if clashing:
            raise UsageError(f"--config cannot be combined with {', '.join(clashing)}")
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file {args.config} is not valid json: {exc}") from None
        if not isinstance(data, dict):
            raise UsageError(f"config file {args.config} must hold a json object")
        if args.format is not None:
            data["output_format"] = args.format
        return experiment.ExperimentConfig.from_dict(data)
    if args.m is None or args.n is None:
        raise UsageError("give --config, or at least --m and --n")
    algorithms = tuple(a for a in (args.algorithms or "greedy").split(",") if a)
    return experiment.ExperimentConfig(
        m=args.m, n=args.n,
        ensemble=args.ensemble or "gaussian",
        form=args.form or "positive",
        algorithms=algorithms,
        trials=1 if args.trials is None else args.trials,
        base_seed=0 if args.seed is None else args.seed,
        output_format=args.format or "json",
    )


def cmd_experiment(args, out) -> int:
    config = _config_from_args(args)
    if args.workers is not None and args.workers < 1:
        raise UsageError("--workers must be at least 1")
    result = experiment.run_experiment(config, args.workers)
    if args.output is not None:
        for path in experiment.serialize_result(result, args.output):
            print(f"wrote {path}", file=out)
    elif config.output_format == "csv":
        out.write(experiment.result_to_csv(result))
    else:
        out.write(experiment.result_to_json(result))
    return EXIT_OK


def cmd_concentration(args, out) -> int:
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"--sizes expects a comma-separated list of integers, got {args.sizes!r}") from None
    report = experiment.concentration_sweep(args.alpha, sizes, args.algo, args.trials, args.seed,
                                            args.ensemble, args.form, args.workers)
    _emit(report.to_dict(), args.json, out)
    return EXIT_OK


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hopbound",
                     description="Ground states and bounds for positive/negative Hopfield forms.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("solve", help="solve one instance")
    p.add_argument("--matrix", help="matrix file ('m n' header, then m rows)")
    p.add_argument("--sample", help="sample an instance: m,n,ensemble,seed")
    p.add_argument("--form", choices=("pos", "neg"), default="pos")
    p.add_argument("--algo", choices=("exact", "greedy", "greedy-sorted", "eigen"), default="greedy")
    p.add_argument("--limit", type=int, default=DEFAULT_LIMIT, help="largest n for --algo exact")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--max-iters", type=int, default=DEFAULT_MAX_ITERS)
    p.add_argument("--emit-spins", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bounds", help="closed-form bounds at a given alpha")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--xi-sk", type=float, default=analytic.XI_SK_DEFAULT)
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("recursion", help="greedy performance recursion")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--resolution", type=int, default=1_000_000)
    p.add_argument("--form", choices=("pos", "neg"), default="pos")
    p.add_argument("--trace", help="write the phi sequence to this CSV file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_recursion)

    p = sub.add_parser("experiment", help="seeded Monte Carlo run")
    p.add_argument("--config", help="json file holding an experiment config")
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--ensemble", choices=("gaussian", "bernoulli"))
    p.add_argument("--form", choices=("pos", "neg"))
    p.add_argument("--algorithms", help="comma list of exact,greedy,greedy_sorted,eigen")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int, help="base seed")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--output", help="output path (stdout when omitted)")
    p.add_argument("--workers", type=int, help="worker processes (default: $HOPBOUND_THREADS or CPUs)")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("concentration", help="relative spread across growing n")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--sizes", required=True, help="comma list of n values, at least 3")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--algo", choices=("greedy", "greedy_sorted", "eigen", "exact"), default="greedy")
    p.add_argument("--form", choices=("pos", "neg"), default="pos")
    p.add_argument("--ensemble", choices=("gaussian", "bernoulli"), default="gaussian")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_concentration)
    return parser


def main(argv: Optional[List[str]] = None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"hopbound {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, MatrixFormatError) as exc:
        print(f"hopbound {args.command}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except ValueError as exc:
        print(f"hopbound {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, RuntimeError) as exc:
        print(f"hopbound {args.command}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
