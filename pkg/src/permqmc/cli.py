"""Command-line interface.

Subcommands: ``sample``, ``discrepancy``, ``estimate``, ``exact``, ``bench``,
``sweep``.  Exit codes: 0 success, 2 configuration error, 3 numerical
failure, 4 predictor protocol error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .discrepancy import WeightedSampleSet, discrepancy
from .errors import NumericalError, PredictorError
from .estimators import exact_shapley_permutations, exact_shapley_subsets
from .harness import (
    ExperimentConfig,
    estimate_once,
    open_game,
    run_convergence,
    run_discrepancy_table,
    run_sweep,
    write_plot_data,
)
from .kernels import KernelSpec
from .permutations import format_ranks
from .samplers import SAMPLERS, SamplerConfig, get_sampler

ESTIMATE_ALGORITHMS = sorted(SAMPLERS) + ["owen", "owen_halved", "stratified", "exact"]


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except PredictorError as exc:
        print(f"predictor error: {exc}", file=sys.stderr)
        return 4
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="permqmc",
        description="Permutation sampling and Shapley value estimation toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="generate a permutation sample set as CSV")
    p.add_argument("--alg", required=True, choices=sorted(SAMPLERS))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    _add_kernel_flags(p)
    p.add_argument("--pool", type=int, default=25, help="argmax candidate pool size")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("discrepancy", help="discrepancy of a permutation file")
    p.add_argument("--in", dest="infile", required=True,
                   help="CSV of 1-based ranks, optional trailing weight column")
    _add_kernel_flags(p)
    p.add_argument("--json", dest="json_out", default=None, help="write a JSON report here")
    p.set_defaults(func=_cmd_discrepancy)

    p = sub.add_parser("estimate", help="estimate Shapley values for a game")
    _add_game_flags(p)
    p.add_argument("--alg", required=True, choices=ESTIMATE_ALGORITHMS)
    p.add_argument("--n", type=int, default=100, help="permutation sample count")
    p.add_argument("--nodes", type=int, default=10, help="quadrature nodes (owen)")
    p.add_argument("--draws", type=int, default=10, help="draws per node (owen)")
    p.add_argument("--budget", type=int, default=None, help="marginal budget (stratified)")
    _add_kernel_flags(p)
    p.add_argument("--pool", type=int, default=25)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", dest="json_out", default=None)
    p.add_argument("--csv", dest="csv_out", default=None)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("exact", help="exact Shapley values by subset enumeration")
    _add_game_flags(p)
    p.add_argument("--cross-check", action="store_true",
                   help="also run the permutation-enumeration oracle (d <= 8)")
    p.add_argument("--json", dest="json_out", default=None)
    p.set_defaults(func=_cmd_exact)

    p = sub.add_parser("bench", help="run a benchmark described by a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--mode", choices=("discrepancy", "convergence"), default="discrepancy")
    p.add_argument("--out", default=None, help="override the config's output path")
    p.add_argument("--jobs", type=int, default=None, help="override the config's worker count")
    p.add_argument("--plot", default=None,
                   help="also write a gnuplot-compatible data file here")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("sweep", help="parameter sweep described by a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--plot", default=None,
                   help="also write a gnuplot-compatible data file here")
    p.set_defaults(func=_cmd_sweep)

    return parser


def _add_kernel_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kernel", choices=("kendall", "mallows", "spearman"), default="mallows")
    p.add_argument("--lambda", dest="lam", type=float, default=4.0,
                   help="Mallows decay parameter")


def _add_game_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--game", required=True,
                   choices=("glove", "linear", "interaction", "tabular"))
    p.add_argument("--coeffs", default=None, help="comma-separated linear coefficients")
    p.add_argument("--baseline", type=float, default=0.0)
    p.add_argument("--d", type=int, default=None, help="player count (interaction)")
    p.add_argument("--pairs", default=None,
                   help="interaction pairs as i-j-strength, comma separated")
    p.add_argument("--data", default=None, help="CSV data file (tabular)")
    p.add_argument("--row", type=int, default=0, help="foreground row index (tabular)")
    p.add_argument("--background", default=None,
                   help="background row span start:stop (tabular)")
    p.add_argument("--predictor-cmd", default=None,
                   help="external predictor command line (tabular)")
    p.add_argument("--predictor-timeout", type=float, default=60.0)


def _game_spec(args: argparse.Namespace) -> dict:
    if args.game == "glove":
        return {"kind": "glove"}
    if args.game == "linear":
        if not args.coeffs:
            raise ValueError("linear games need --coeffs")
        return {
            "kind": "linear",
            "coeffs": [float(tok) for tok in args.coeffs.split(",")],
            "baseline": args.baseline,
        }
    if args.game == "interaction":
        if args.d is None or not args.pairs:
            raise ValueError("interaction games need --d and --pairs")
        pairs = []
        for chunk in args.pairs.split(","):
            i, j, strength = chunk.split("-")
            pairs.append([int(i), int(j), float(strength)])
        return {"kind": "interaction", "d": args.d, "pairs": pairs}
    if not args.data or not args.predictor_cmd:
        raise ValueError("tabular games need --data and --predictor-cmd")
    spec = {
        "kind": "tabular",
        "data": args.data,
        "row": args.row,
        "predictor_cmd": args.predictor_cmd,
        "predictor_timeout": args.predictor_timeout,
    }
    if args.background:
        start, stop = args.background.split(":")
        spec["background"] = [int(start), int(stop)]
    return spec


def _kernel(args: argparse.Namespace) -> KernelSpec:
    return KernelSpec(kind=args.kernel, lam=args.lam)


def _cmd_sample(args: argparse.Namespace) -> None:
    cfg = SamplerConfig(n=args.n, d=args.d, kernel=_kernel(args),
                        pool_size=args.pool, seed=args.seed)
    sample_set = get_sampler(args.alg)(cfg)
    header = {
        "algorithm": args.alg, "n": args.n, "d": args.d, "seed": args.seed,
        "kernel": cfg.kernel.to_dict(), "pool_size": args.pool,
    }
    lines = [f"# config: {json.dumps(header, sort_keys=True)}",
             "# columns: rank_1..rank_d,weight"]
    for ranks, weight in zip(sample_set.ranks, sample_set.weights):
        lines.append(f"{format_ranks(ranks)},{float(weight)!r}")
    with open(args.out, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {sample_set.n} permutations to {args.out}")


def read_sample_file(path: str) -> WeightedSampleSet:
    """Read a permutation CSV: d rank columns, optional trailing weight column."""
    ranks_rows: list[list[int]] = []
    weights: list[float] = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split(",")
            try:
                row = [int(tok) for tok in tokens]
                has_weight = False
            except ValueError:
                row = [int(tok) for tok in tokens[:-1]]
                weights.append(float(tokens[-1]))
                has_weight = True
            ranks_rows.append(row)
            if has_weight != bool(weights):
                raise ValueError(f"inconsistent weight column in {path}")
    if not ranks_rows:
        raise ValueError(f"no permutations in {path}")
    ranks = np.asarray(ranks_rows, dtype=np.int64)
    if weights:
        if len(weights) != len(ranks_rows):
            raise ValueError(f"inconsistent weight column in {path}")
        return WeightedSampleSet(ranks, np.asarray(weights))
    return WeightedSampleSet.uniform(ranks)


def _cmd_discrepancy(args: argparse.Namespace) -> None:
    sample_set = read_sample_file(args.infile)
    spec = _kernel(args)
    value = discrepancy(sample_set, spec)
    print(f"{value:.12g}")
    if args.json_out:
        report = {
            "file": args.infile,
            "kernel": spec.to_dict(),
            "n": sample_set.n,
            "d": sample_set.d,
            "weight_sum": float(sample_set.weights.sum()),
            "discrepancy": value,
        }
        with open(args.json_out, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _cmd_estimate(args: argparse.Namespace) -> None:
    spec = _game_spec(args)
    kernel = _kernel(args)
    trials = []
    with open_game(spec) as game:
        for t in range(args.trials):
            estimate = estimate_once(
                game, args.alg, args.seed + t, n=args.n, kernel=kernel,
                pool_size=args.pool, nodes=args.nodes, draws=args.draws,
                budget=args.budget,
            )
            trials.append(estimate)
    mean_values = np.mean([e.values for e in trials], axis=0)
    report = {
        "game": spec,
        "algorithm": args.alg,
        "kernel": kernel.to_dict(),
        "seed": args.seed,
        "values": mean_values.tolist(),
        "marginal_evals": int(np.mean([e.marginal_evals for e in trials])),
        "v_evals": int(np.mean([e.v_evals for e in trials])),
        "trials": [
            {
                "seed": args.seed + t,
                "values": e.values.tolist(),
                "marginal_evals": e.marginal_evals,
                "v_evals": e.v_evals,
            }
            for t, e in enumerate(trials)
        ],
    }
    print(json.dumps(report, sort_keys=True))
    if args.json_out:
        with open(args.json_out, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    if args.csv_out:
        d = len(mean_values)
        lines = [f"# config: {json.dumps({'game': spec, 'algorithm': args.alg}, sort_keys=True)}"]
        lines.append("trial,seed," + ",".join(f"value_{i}" for i in range(d))
                     + ",marginal_evals,v_evals")
        for t, e in enumerate(trials):
            vals = ",".join(f"{v:.12g}" for v in e.values)
            lines.append(f"{t},{args.seed + t},{vals},{e.marginal_evals},{e.v_evals}")
        with open(args.csv_out, "w") as fh:
            fh.write("\n".join(lines) + "\n")


def _cmd_exact(args: argparse.Namespace) -> None:
    spec = _game_spec(args)
    with open_game(spec) as game:
        estimate = exact_shapley_subsets(game)
        report = {
            "game": spec,
            "values": estimate.values.tolist(),
            "v_evals": estimate.v_evals,
        }
        if args.cross_check:
            other = exact_shapley_permutations(game)
            report["permutation_oracle_values"] = other.values.tolist()
            report["oracle_max_abs_diff"] = float(
                np.abs(estimate.values - other.values).max()
            )
    print(json.dumps(report, sort_keys=True))
    if args.json_out:
        with open(args.json_out, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig.from_json(args.config)
    if getattr(args, "out", None):
        cfg.out = args.out
    if getattr(args, "jobs", None):
        cfg.jobs = args.jobs
    return cfg


def _cmd_bench(args: argparse.Namespace) -> None:
    cfg = _load_config(args)
    rows = run_discrepancy_table(cfg) if args.mode == "discrepancy" else run_convergence(cfg)
    for row in rows:
        print(json.dumps(row, sort_keys=True))
    if args.plot:
        write_plot_data(args.plot, cfg, rows)
    if cfg.out:
        print(f"wrote {cfg.out}", file=sys.stderr)


def _cmd_sweep(args: argparse.Namespace) -> None:
    cfg = _load_config(args)
    rows = run_sweep(cfg)
    for row in rows:
        print(json.dumps(row, sort_keys=True))
    if args.plot:
        write_plot_data(args.plot, cfg, rows)
    if cfg.out:
        print(f"wrote {cfg.out}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
