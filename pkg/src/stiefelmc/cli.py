"""``stiefel-bench`` command line interface.

Subcommands:

* ``run``: execute a benchmark grid from a JSON config, streaming records
  to ``records.csv`` in the output directory.
* ``table``: aggregate a records file into a per-problem, per-kind table.
* ``check``: run a self-check suite (gradients, jacobians, uniform-moments).
* ``synth``: generate a synthetic dataset CSV for external use.
* ``config-reference``: print the config file reference.

Exit codes: 0 success, 1 configuration or usage error, 2 completed with
failures (failed runs, failed checks), 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys

from . import bench, checks, datasets
from .errors import ConfigError

__all__ = ["main"]

CONFIG_REFERENCE = """\
stiefel-bench JSON config reference
===================================

Top-level keys
--------------
problems   (required) nonempty list of problem objects, see below.
kinds      "all" (default) or a list drawn from ["polar", "householder",
           "cayley", "givens"].  "all" silently drops cayley for square
           cases (J = K); listing cayley explicitly for a square case is a
           config error.
runs       independent repetitions per (problem, kind); default 8.
sampler    object of sampler overrides: iters_total (1000), iters_keep
           (500), target_accept (0.8), max_treedepth (10), mass_adaptation
           (true), step_size (null = auto), trajectory ("multinomial" or
           "slice"), max_energy_error (1000).  Seeds cannot be set here;
           every run's seed is derived from base_seed and the run's
           identity, so records are reproducible under resume and
           reordering.
base_seed  integer folded into every run and dataset seed; default 0.
foi        which monitored coordinates enter the ESS: "all" (default),
           "stiefel" (matrix entries only), or "aux" (auxiliary
           parameters only).
regenerate_data_per_run
           boolean; when true each run_index draws its own synthetic
           dataset instead of sharing one per problem.  Default false.
out        default output directory for `run` (overridable with --out).

Problem objects
---------------
Every object needs "problem"; unknown keys are rejected.

  {"problem": "uniform", "J": 20, "K": 3}
      J and K may be lists; the cross product is expanded.  Sizes beyond
      (100, 3) need "allow_large": true.

  {"problem": "eigenmodel", "J": 30, "K": 3}
  {"problem": "eigenmodel", "data": "graph.csv", "K": 3}
      A synthetic network of J nodes, or a 0/1 symmetric adjacency CSV.

  {"problem": "ppca", "preset": "synthetic1"}
  {"problem": "ppca", "N": 100, "J": 50, "K": 3, "lam": [5, 3, 1.5],
   "sigma2": 1.0}
  {"problem": "ppca", "data": "y.csv", "K": 3}
      Presets: synthetic1, synthetic2.  Optional booleans "ordered"
      (default true) and "with_mean" (default false).

  {"problem": "matrix_completion", "J": 14, "T": 46, "K": 3,
   "lam": [12, 8, 5], "sigma": 0.2, "mask_fraction": 0.1}
  {"problem": "matrix_completion", "data": "panel.csv", "K": 3}
      CSV data may mark missing entries with NA.  Optional "eta"
      (default 1.0) scales the loading priors.

Relative "data" paths resolve against the config file's directory.

Records CSV columns
-------------------
problem,J,K,T,kind,run_index,seed,iters_total,iters_kept,elapsed_seconds,
min_ess,min_ess_per_iter,min_ess_per_sec,divergences,stuck,failed

T is empty where not applicable (it stores N for ppca).  Failed runs keep
identity columns and leave metrics empty.
"""


class _Parser(argparse.ArgumentParser):
    # Route usage errors through the config-error exit code instead of
    # argparse's default SystemExit(2).
    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="stiefel-bench",
        description="Benchmark MCMC parameterizations of orthogonal matrices.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a benchmark grid from a JSON config")
    p_run.add_argument("--config", required=True, help="path to JSON config")
    p_run.add_argument("--out", default=None,
                       help="output directory (default: config 'out' or '.')")
    p_run.add_argument("--workers", type=int, default=1,
                       help="parallel worker processes (default 1: in-process)")
    p_run.add_argument("--resume", action="store_true",
                       help="skip runs already present in records.csv")

    p_table = sub.add_parser("table", help="aggregate records into a table")
    p_table.add_argument("--records", required=True, help="records.csv path")
    p_table.add_argument("--metric", choices=("per_iter", "per_sec"),
                         default="per_sec",
                         help="cell metric: min ESS per kept iteration or per second")
    p_table.add_argument("--format", choices=("text", "csv"), default="text")
    p_table.add_argument("--out", default=None,
                         help="write the table here instead of stdout")

    p_check = sub.add_parser("check", help="run a self-check suite")
    p_check.add_argument("--suite", required=True,
                         choices=sorted(checks.SUITES))
    p_check.add_argument("--seed", type=int, default=None,
                         help="override the suite's default seed")

    p_synth = sub.add_parser("synth", help="write a synthetic dataset CSV")
    p_synth.add_argument("--problem", required=True,
                         choices=("ppca", "eigenmodel", "matrix_completion"))
    p_synth.add_argument("--out", required=True, help="output CSV path")
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--preset", choices=sorted(datasets.PPCA_PRESETS),
                         help="ppca only: use a named preset")
    p_synth.add_argument("--N", type=int, help="ppca observation count")
    p_synth.add_argument("--J", type=int)
    p_synth.add_argument("--T", type=int, help="matrix_completion panel length")
    p_synth.add_argument("--K", type=int)
    p_synth.add_argument("--lam", type=str,
                         help="comma-separated scale parameters, one per factor")
    p_synth.add_argument("--sigma2", type=float, help="ppca noise variance")
    p_synth.add_argument("--sigma", type=float,
                         help="matrix_completion noise standard deviation")
    p_synth.add_argument("--mask-fraction", type=float, default=0.1)

    sub.add_parser("config-reference", help="print the config file reference")
    return parser


def _require(args, names):
    for n in names:
        if getattr(args, n.replace("-", "_")) is None:
            raise ConfigError(f"synth --problem {args.problem} requires --{n}")


def _parse_lam(text, K):
    try:
        lam = [float(x) for x in text.split(",")]
    except ValueError:
        raise ConfigError(f"--lam must be comma-separated numbers, got {text!r}")
    if len(lam) != K:
        raise ConfigError(f"--lam needs {K} entries, got {len(lam)}")
    return lam


def _cmd_run(args) -> int:
    cfg = bench.load_config(args.config)
    records = bench.run_experiment(
        cfg, out_dir=args.out, workers=args.workers, resume=args.resume,
    )
    failed = sum(r.failed for r in records)
    print(bench.emit_table(records, metric="per_sec", fmt="text"))
    print(f"{len(records)} records ({failed} failed)")
    return 2 if failed else 0


def _cmd_table(args) -> int:
    records = bench.read_records(args.records)
    text = bench.emit_table(records, metric=args.metric, fmt=args.format)
    if args.out is None:
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    return 0


def _cmd_check(args) -> int:
    kwargs = {} if args.seed is None else {"seed": args.seed}
    results = checks.run_suite(args.suite, **kwargs)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
    n_fail = sum(not r.passed for r in results)
    print(f"{len(results) - n_fail}/{len(results)} checks passed")
    return 2 if n_fail else 0


def _cmd_synth(args) -> int:
    if args.problem == "ppca":
        if args.preset is not None:
            p = datasets.PPCA_PRESETS[args.preset]
            data = datasets.synth_ppca(args.seed, p["N"], p["J"], p["K"],
                                       p["lam"], p["sigma2"])
        else:
            _require(args, ("N", "J", "K", "lam", "sigma2"))
            data = datasets.synth_ppca(
                args.seed, args.N, args.J, args.K,
                _parse_lam(args.lam, args.K), args.sigma2,
            )
        datasets.save_csv_matrix(args.out, data.y)
    elif args.problem == "eigenmodel":
        _require(args, ("J", "K"))
        data = datasets.synth_eigenmodel(args.seed, args.J, args.K)
        datasets.save_csv_matrix(args.out, data.y)
    else:
        _require(args, ("J", "T", "K", "lam", "sigma"))
        if not 0 <= args.mask_fraction < 1:
            raise ConfigError(
                f"--mask-fraction must be in [0, 1), got {args.mask_fraction}"
            )
        data = datasets.synth_matrix_completion(
            args.seed, args.J, args.T, args.K,
            _parse_lam(args.lam, args.K), args.sigma, args.mask_fraction,
        )
        datasets.save_csv_matrix(args.out, data.y, mask=~data.observed)
    print(f"wrote {args.out}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "table":
            return _cmd_table(args)
        if args.command == "check":
            return _cmd_check(args)
        if args.command == "synth":
            return _cmd_synth(args)
        print(CONFIG_REFERENCE, end="")
        return 0
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
