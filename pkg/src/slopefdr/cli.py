"""Command line entry point: ``slopefdr {gen,lambda,solve,verify,simulate}``.

Exit codes: 0 success, 1 domain or data error, 2 usage error, 3 failed
convergence certificate.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import datagen, diagnostics, experiments, seqgen
from .errors import CertificateError, SlopeError
from .solver import Dataset, solve_slope

logger = logging.getLogger("slopefdr")

EXIT_OK, EXIT_DATA, EXIT_USAGE, EXIT_CERT = 0, 1, 2, 3


def fmt(x: float) -> str:
    return format(float(x), ".12g")


def write_vector(path, values) -> None:
    with open(path, "w") as fh:
        fh.writelines(fmt(v) + "\n" for v in values)


def write_matrix(path, matrix) -> None:
    with open(path, "w") as fh:
        for row in np.atleast_2d(matrix):
            fh.write(",".join(fmt(v) for v in row) + "\n")


def read_matrix(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2)


def read_vector(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=1).ravel()


def _lambda_from_args(args, p, n=None):
    if getattr(args, "lambda_file", None):
        return seqgen.LambdaSequence(read_vector(args.lambda_file))
    kind = args.kind
    if kind == "bh":
        return seqgen.lambda_bh(p, args.q, args.delta, args.sigma)
    if kind == "const":
        return seqgen.lambda_constant(p, args.q, args.delta, args.sigma)
    if n is None:
        raise SlopeError("--kind heur requires --n")
    return seqgen.lambda_heuristic(p, n, args.q, args.sigma)


def cmd_lambda(args) -> int:
    lam = _lambda_from_args(args, args.p, args.n)
    sys.stdout.writelines(fmt(v) + "\n" for v in lam.values)
    return EXIT_OK


def cmd_gen(args) -> int:
    spec = datagen.GeneratorSpec(args.n, args.p, args.k, args.amp, args.sigma, args.seed)
    data = datagen.generate(spec)
    write_matrix(args.out_prefix + "X.csv", data.X)
    write_vector(args.out_prefix + "y.csv", data.y)
    write_vector(args.out_prefix + "b0.csv", data.b0)
    return EXIT_OK


def _load_dataset(args, with_truth=False) -> Dataset:
    X = read_matrix(args.design)
    y = read_vector(args.response)
    b0 = read_vector(args.truth) if with_truth and args.truth else None
    sigma = getattr(args, "sigma", None) if b0 is not None else None
    return Dataset(X, y, b0, sigma)


def _solve(args, data, lam):
    sol = solve_slope(data, lam, tol=args.tol, max_iter=args.max_iter)
    logger.info("solved in %d iterations, duality gap %.3g", sol.iterations, sol.duality_gap)
    if not sol.converged:
        raise CertificateError(
            f"no convergence after {sol.iterations} iterations "
            f"(duality gap {sol.duality_gap:.3g} > {sol.tol:.3g})"
        )
    return sol


def cmd_solve(args) -> int:
    data = _load_dataset(args)
    lam = _lambda_from_args(args, data.p, data.n)
    sol = _solve(args, data, lam)
    write_vector(args.out, sol.beta)
    return EXIT_OK


def cmd_verify(args) -> int:
    data = _load_dataset(args, with_truth=True)
    lam = seqgen.LambdaSequence(read_vector(args.lambda_file))
    sol = _solve(args, data, lam)
    diag = diagnostics.verify_theorems(data, sol, lam, a=args.a, slack=args.slack)
    out = diag.to_dict()
    if data.b0 is not None:
        k = int(np.count_nonzero(data.b0))
        k_star = args.k_star if args.k_star is not None else min(data.p, max(2 * k, k + 1))
        events = diagnostics.q_events(data, sol, k_star, c_q=args.c_q, q=args.q)
        out["q_events"] = events.to_dict()
    json.dump(out, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


def cmd_simulate(args) -> int:
    with open(args.config) as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise SlopeError("config must be a JSON object")
    config = experiments.ExperimentConfig.from_dict(raw)
    report = experiments.run_grid(config, threads=args.threads)
    with open(args.out, "w", newline="") as fh:
        fh.write(report.to_csv())
    if args.plot:
        from .plotting import plot_report

        plot_report(report, config.q, args.plot)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slopefdr", description=__doc__.splitlines()[0])
    parser.add_argument("--threads", type=int, default=None,
                        help="worker processes for simulate (default: all cores)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lambda", help="print a tuning sequence")
    p.add_argument("--kind", choices=["bh", "heur", "const"], required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.set_defaults(func=cmd_lambda)

    p = sub.add_parser("gen", help="simulate a dataset")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--amp", type=float, required=True)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_gen)

    def add_data_args(p):
        p.add_argument("--design", required=True, help="X as CSV")
        p.add_argument("--response", required=True, help="y as CSV")
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--max-iter", type=int, default=100_000)

    p = sub.add_parser("solve", help="fit SLOPE")
    add_data_args(p)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--lambda-file")
    src.add_argument("--lambda", dest="kind", choices=["bh", "heur", "const"])
    p.add_argument("--q", type=float, default=0.2)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="fit SLOPE and check the support characterisation")
    add_data_args(p)
    p.add_argument("--lambda-file", required=True)
    p.add_argument("--truth")
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--slack", type=float, default=None)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--k-star", type=int, default=None)
    p.add_argument("--c-q", type=float, default=1.0)
    p.add_argument("--q", type=float, default=0.2)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="run a Monte Carlo grid")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--plot")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except CertificateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CERT
    except (SlopeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
