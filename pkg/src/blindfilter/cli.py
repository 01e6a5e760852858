"""
Command-line interface.

    blindfilter gen      --scenario NAME [--n N] [--seed S] [--snr R] --output x.csv
    blindfilter denoise  --input y.csv --sigma S [layout and penalty flags] --output xhat.csv
    blindfilter oracle   --poly "1,-1" | --roots "1,i,-1" --m M [--output q.csv]
    blindfilter bench    --plan plan.ini --out DIR

Each subcommand prints a small ``key,value`` report on stdout. ``denoise``
exits with status 2 when a solver did not converge.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import asdict
from typing import List, Optional

import numpy as np

from . import io
from .baseline import lasso_denoise
from .bench import load_plan, run, write_outputs
from .oracle import CharPoly, projector_column_filter, subspace_from_poly, unit_circle_filter
from .recovery import RecoveryConfig, recover
from .signals import SCENARIOS, ScenarioSpec, generate, observe
from .solver import SolverOptions


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _report(pairs, out=None):
    w = csv.writer(out or sys.stdout, lineterminator="\n")
    w.writerow(["key", "value"])
    for k, v in pairs:
        w.writerow([k, _fmt(v)])


def _ints(text: str):
    parts = [int(p) for p in text.split(",")]
    return parts[0] if len(parts) == 1 else tuple(parts)


def _complex_list(text: str) -> List[complex]:
    out = []
    for part in text.split(","):
        part = part.strip().replace(" ", "")
        if not part:
            raise argparse.ArgumentTypeError("empty entry in list")
        # accept i or j as the imaginary unit
        part = part.replace("i", "j")
        try:
            out.append(complex(part))
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a complex number: {part!r}") from None
    return out


def cmd_gen(args) -> int:
    spec = ScenarioSpec(
        args.scenario, n=args.n, spikes=args.spikes, separation=args.separation,
        beta=args.beta, real=args.real, seed=args.seed,
    )
    x = generate(spec)
    io.write_signal(args.output, x)
    pairs = [("scenario", spec.name), ("samples", x.values.size), ("seed", spec.seed), ("output", args.output)]
    if args.snr is not None:
        if not args.noisy_output:
            raise SystemExit("--snr needs --noisy-output")
        y, sigma = observe(x, args.snr, args.noise_seed)
        io.write_signal(args.noisy_output, y)
        pairs += [("snr", args.snr), ("sigma", sigma), ("noisy_output", args.noisy_output)]
    _report(pairs)
    return 0


def cmd_denoise(args) -> int:
    y = io.read_signal(args.input)
    opts = SolverOptions(max_iters=args.max_iters, tol_gap=args.tol_gap, time_limit=args.time_limit)
    if args.method == "lasso":
        res = lasso_denoise(y, args.sigma, args.oversample, lam=args.lam, opts=opts)
        x_hat, converged = res.x_hat, res.converged
        pairs = [("method", "lasso"), ("oversample", args.oversample), ("lambda", repr(res.lam)),
                 ("iterations", res.solver.iterations)]
    else:
        if args.mode == "constrained" and args.rho_bar is None:
            raise SystemExit("--mode constrained needs --rho-bar")
        cfg = RecoveryConfig(
            mode=args.mode, m=args.m, n=args.n, rho_bar=args.rho_bar, lam=args.lam,
            lambda_rule=args.lambda_rule, sigma=args.sigma, alpha=args.alpha,
            interpolating=args.interpolating, shift_boundary=args.shift_boundary,
            block_size=args.block_size, solver=opts, workers=args.workers,
        )
        rep = recover(y, cfg)
        x_hat, converged = rep.x_hat, rep.converged
        pairs = [("method", args.mode), ("filters", len(rep.fits)),
                 ("spectral_l1", repr(rep.spectral_l1)), ("residual", repr(rep.residual)),
                 ("iterations", max(f.solver.iterations for f in rep.fits))]
        if rep.imag_residual is not None:
            pairs.append(("imag_residual", repr(rep.imag_residual)))
    io.write_signal(args.output, x_hat)
    if args.plot:
        from .plotting import plot_recovery

        plot_recovery(y, x_hat, args.plot)
        pairs.append(("plot", args.plot))
    pairs += [("converged", converged), ("output", args.output)]
    _report(pairs)
    return 0 if converged else 2


def cmd_oracle(args) -> int:
    if (args.poly is None) == (args.roots is None):
        raise SystemExit("give exactly one of --poly or --roots")
    p = CharPoly(args.poly) if args.poly is not None else CharPoly.from_roots(args.roots)
    pairs = [("degree", p.degree)]
    if args.kind == "unit-circle":
        q, rep = unit_circle_filter(p, args.m, strict=not args.allow_small_m)
        pairs += list(asdict(rep).items())
        pairs.append(("within_bound", rep.within_bound))
    else:
        basis = subspace_from_poly(p, (0, args.m))
        q = projector_column_filter(basis, args.m)
        norm = float(np.linalg.norm(q.values))
        bound = math.sqrt(p.degree / (args.m + 1))
        pairs += [("n", args.m), ("norm", repr(norm)), ("norm_bound", repr(bound)),
                  ("within_bound", norm <= bound + 1e-10)]
    pairs.append(("sum_coeffs", repr(complex(q.values.sum()))))
    if args.output:
        io.write_signal(args.output, q)
        pairs.append(("output", args.output))
    _report(pairs)
    return 0


def cmd_bench(args) -> int:
    plan = load_plan(args.plan)
    if args.trials is not None:
        plan.trials = args.trials
    if args.workers is not None:
        plan.workers = args.workers
    result = run(plan)
    paths = write_outputs(result, args.out, plot=not args.no_plot)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["scenario", "method", "snr", "mean_error", "stderr", "failed", "not_converged"])
    for c in result.summary:
        w.writerow([c.scenario, c.method, c.snr, f"{c.mean_error:.6g}", f"{c.stderr:.3g}", c.failed, c.not_converged])
    for key, path in paths.items():
        print(f"# {key}: {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="blindfilter", description="Filter-based structure-blind denoising.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a benchmark ground truth (and noisy observations)")
    g.add_argument("--scenario", choices=SCENARIOS, required=True)
    g.add_argument("--n", type=int, default=100, help="length, or grid side for 2-D scenarios")
    g.add_argument("--spikes", type=int, default=4)
    g.add_argument("--separation", type=float, default=None)
    g.add_argument("--beta", type=float, default=2.0)
    g.add_argument("--real", action="store_true")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--snr", type=float, default=None)
    g.add_argument("--noise-seed", type=int, default=1)
    g.add_argument("--noisy-output", default=None)
    g.add_argument("--output", required=True)
    g.set_defaults(func=cmd_gen)

    d = sub.add_parser("denoise", help="denoise a signal CSV")
    d.add_argument("--input", required=True)
    d.add_argument("--output", required=True)
    d.add_argument("--method", choices=("filter", "lasso"), default="filter")
    d.add_argument("--mode", choices=("constrained", "penalized"), default="penalized")
    d.add_argument("--m", type=_ints, default=None, help="filter order (comma list per axis)")
    d.add_argument("--n", type=_ints, default=None, help="target length - 1 for causal recovery")
    d.add_argument("--rho-bar", type=float, default=None)
    lam = d.add_mutually_exclusive_group()
    lam.add_argument("--lambda", dest="lam", type=float, default=None)
    lam.add_argument("--lambda-rule", choices=("theory", "experiment"), default="experiment")
    d.add_argument("--sigma", type=float, required=True)
    d.add_argument("--alpha", type=float, default=0.1)
    d.add_argument("--block-size", type=_ints, default=None)
    d.add_argument("--interpolating", action="store_true")
    d.add_argument("--shift-boundary", action="store_true")
    d.add_argument("--oversample", type=int, default=4, help="Lasso grid oversampling L")
    d.add_argument("--max-iters", type=int, default=5000)
    d.add_argument("--tol-gap", type=float, default=1e-6)
    d.add_argument("--time-limit", type=float, default=None)
    d.add_argument("--workers", type=int, default=1)
    d.add_argument("--plot", default=None, help="write an SVG of the recovery here")
    d.set_defaults(func=cmd_denoise)

    o = sub.add_parser("oracle", help="construct a reproducing filter for a characteristic polynomial")
    src = o.add_mutually_exclusive_group()
    src.add_argument("--poly", type=_complex_list, default=None, help="coefficients p_0..p_s, e.g. '1,-1'")
    src.add_argument("--roots", type=_complex_list, default=None, help="roots, e.g. '1,i,-1'")
    o.add_argument("--m", type=int, required=True)
    o.add_argument("--kind", choices=("unit-circle", "projector"), default="unit-circle")
    o.add_argument("--allow-small-m", action="store_true",
                   help="build the unit-circle filter below the order where its norm bound is proven")
    o.add_argument("--output", default=None)
    o.set_defaults(func=cmd_oracle)

    b = sub.add_parser("bench", help="run a Monte-Carlo benchmark plan")
    b.add_argument("--plan", required=True)
    b.add_argument("--out", required=True)
    b.add_argument("--trials", type=int, default=None)
    b.add_argument("--workers", type=int, default=None)
    b.add_argument("--no-plot", action="store_true")
    b.set_defaults(func=cmd_bench)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
