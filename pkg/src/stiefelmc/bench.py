"""Benchmark grid orchestration: config, seeded runs, records CSV, tables.

A config names problems (shape + data or synthesis fields), a set of
parameterization kinds, and a run count; the orchestrator expands that into
one task per (problem case, kind, run_index), each with a content-addressed
seed

    seed = mix_seed(base_seed, problem_id, J, K, T, kind_id, run_index)

so records are reproducible bit-for-bit regardless of scheduling or config
ordering (problem and kind ids are the fixed enums below; T slots N for the
observation-count problems and 0 where not applicable).  Synthetic datasets
are derived the same way with a fixed tag in place of kind and run, so every
run of a problem sees the same data unless per-run regeneration is switched
on.  Completed runs are flushed to the records CSV immediately; a resumed
grid skips every (problem, J, K, T, kind, run_index) already present.
"""

from __future__ import annotations

import csv
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import datasets, diagnostics, nuts, targets
from .compose import build_unconstrained
from .errors import ConfigError
from .nuts import SamplerConfig, mix_seed
from .params import KINDS, ParamSpec

__all__ = [
    "PROBLEM_IDS",
    "KIND_IDS",
    "CSV_COLUMNS",
    "RunRecord",
    "BenchConfig",
    "load_config",
    "validate_config",
    "build_plan",
    "run_experiment",
    "emit_table",
    "read_records",
]

PROBLEM_IDS = {"uniform": 1, "eigenmodel": 2, "ppca": 3, "matrix_completion": 4}
KIND_IDS = {"polar": 1, "householder": 2, "cayley": 3, "givens": 4}

# Tag mixed in place of (kind, run) when deriving a problem's dataset seed.
DATA_TAG = 0xD474

CSV_COLUMNS = (
    "problem", "J", "K", "T", "kind", "run_index", "seed",
    "iters_total", "iters_kept", "elapsed_seconds",
    "min_ess", "min_ess_per_iter", "min_ess_per_sec",
    "divergences", "stuck", "failed",
)

# Uniform problems larger than this need an explicit opt-in.
UNIFORM_CAP = (100, 3)

_SAMPLER_KEYS = (
    "iters_total", "iters_keep", "target_accept", "max_treedepth",
    "mass_adaptation", "step_size", "trajectory", "max_energy_error",
)


@dataclass(frozen=True)
class RunRecord:
    """One chain's benchmark outcome; one CSV row.

    ``T`` carries the second shape dimension where one exists (panel length
    for matrix completion, observation count N for the factor model) and is
    None otherwise.  Failed runs keep their identity fields and leave the
    metric fields None.
    """

    problem: str
    J: int
    K: int
    T: Optional[int]
    kind: str
    run_index: int
    seed: int
    iters_total: int
    iters_kept: int
    elapsed_seconds: Optional[float]
    min_ess: Optional[float]
    min_ess_per_iter: Optional[float]
    min_ess_per_sec: Optional[float]
    divergences: Optional[int]
    stuck: Optional[bool]
    failed: bool

    @property
    def key(self):
        return (self.problem, self.J, self.K, self.T, self.kind, self.run_index)


@dataclass(frozen=True)
class _Case:
    """One expanded problem instance (fixed shape, fixed data source)."""

    problem: str
    J: int
    K: int
    T: Optional[int]          # T or N; None when not applicable
    params: dict              # problem-specific fields (lam, sigma2, data path, ...)
    kinds: tuple

    @property
    def shape_T(self) -> int:
        return 0 if self.T is None else self.T


@dataclass(frozen=True)
class _Task:
    case: _Case
    kind: str
    run_index: int
    seed: int
    data_seed: int
    sampler: dict
    foi: str


@dataclass(frozen=True)
class BenchConfig:
    cases: tuple
    kinds: tuple
    runs: int
    sampler: dict
    base_seed: int
    foi: str
    regenerate_data_per_run: bool
    out: Optional[str]


def _err(where: str, msg: str) -> ConfigError:
    return ConfigError(f"{where}: {msg}")


def _require_int(entry, key, where, minimum=1):
    if key not in entry:
        raise _err(where, f'missing required key "{key}"')
    v = entry[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise _err(where, f'"{key}" must be an integer, got {v!r}')
    if v < minimum:
        raise _err(where, f'"{key}" must be >= {minimum}, got {v}')
    return v


def _int_or_list(entry, key, where):
    v = entry.get(key)
    if isinstance(v, list):
        if not v:
            raise _err(where, f'"{key}" list must be nonempty')
        return [_require_int({key: x}, key, where) for x in v]
    return [_require_int(entry, key, where)]


def _positive_real(entry, key, where):
    if key not in entry:
        raise _err(where, f'missing required key "{key}"')
    v = entry[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
        raise _err(where, f'"{key}" must be a positive number, got {v!r}')
    return float(v)


def _lam_list(entry, key, where, K):
    if key not in entry:
        raise _err(where, f'missing required key "{key}"')
    v = entry[key]
    if not isinstance(v, list) or len(v) != K:
        raise _err(where, f'"{key}" must be a list of {K} positive numbers')
    out = []
    for x in v:
        if isinstance(x, bool) or not isinstance(x, (int, float)) or not x > 0:
            raise _err(where, f'"{key}" entries must be positive numbers, got {x!r}')
        out.append(float(x))
    return out


_KNOWN_KEYS = {
    "uniform": {"problem", "J", "K", "allow_large"},
    "eigenmodel": {"problem", "J", "K", "data"},
    "ppca": {"problem", "preset", "N", "J", "K", "lam", "sigma2",
             "ordered", "with_mean", "data"},
    "matrix_completion": {"problem", "J", "T", "K", "lam", "sigma",
                          "mask_fraction", "eta", "data"},
}


def _case_kinds(problem: str, J: int, K: int, requested, where) -> tuple:
    kinds = []
    for kind in KINDS:
        if kind not in requested:
            continue
        if kind == "cayley" and J == K:
            if requested.explicit:
                raise _err(
                    where,
                    f"cayley cannot be used at J=K={J}: the square case is "
                    "excluded by the parameterization (drop cayley or use "
                    '"kinds": "all" to exclude it automatically)',
                )
            continue
        kinds.append(kind)
    return tuple(kinds)


class _KindSet:
    def __init__(self, spec, where):
        if spec == "all":
            self.names = set(KINDS)
            self.explicit = False
        elif isinstance(spec, list) and spec:
            for k in spec:
                if k not in KINDS:
                    raise _err(where, f'unknown parameterization kind {k!r} in "kinds"')
            self.names = set(spec)
            self.explicit = True
        else:
            raise _err(where, f'"kinds" must be "all" or a nonempty list, got {spec!r}')

    def __contains__(self, kind):
        return kind in self.names


def _expand_problem(entry, index, kinds: _KindSet):
    where = f"problems[{index}]"
    if not isinstance(entry, dict):
        raise _err(where, "each problem must be an object")
    problem = entry.get("problem")
    if problem not in PROBLEM_IDS:
        raise _err(
            where,
            f'"problem" must be one of {sorted(PROBLEM_IDS)}, got {problem!r}',
        )
    unknown = set(entry) - _KNOWN_KEYS[problem]
    if unknown:
        raise _err(where, f"unknown key {sorted(unknown)[0]!r} for problem {problem!r}")

    cases = []
    if problem == "uniform":
        for J in _int_or_list(entry, "J", where):
            for K in _int_or_list(entry, "K", where):
                if K > J:
                    raise _err(where, f'"K" must be <= "J", got K={K} > J={J}')
                if (J, K) > UNIFORM_CAP and not entry.get("allow_large", False):
                    raise _err(
                        where,
                        f"uniform at (J={J}, K={K}) exceeds the default cap "
                        f"{UNIFORM_CAP}; set \"allow_large\": true to opt in",
                    )
                cases.append(_Case(
                    problem, J, K, None, {},
                    _case_kinds(problem, J, K, kinds, where),
                ))
        return cases

    if problem == "eigenmodel":
        if "data" in entry:
            path = entry["data"]
            y, mask = datasets.load_csv_matrix(path)
            if mask.any():
                raise _err(where, f'"data" {path!r} has missing entries')
            K = _require_int(entry, "K", where)
            J = y.shape[0]
            try:
                targets.EigenmodelTarget(y, K)
            except ValueError as e:
                raise _err(where, f'"data" {path!r} is not a valid graph: {e}')
            params = {"data": str(path)}
        else:
            J = _require_int(entry, "J", where)
            K = _require_int(entry, "K", where)
            params = {}
        if K > J:
            raise _err(where, f'"K" must be <= "J", got K={K} > J={J}')
        return [_Case(problem, J, K, None, params,
                      _case_kinds(problem, J, K, kinds, where))]

    if problem == "ppca":
        if "preset" in entry:
            if entry["preset"] not in datasets.PPCA_PRESETS:
                raise _err(
                    where,
                    f'"preset" must be one of {sorted(datasets.PPCA_PRESETS)}, '
                    f'got {entry["preset"]!r}',
                )
            clash = {"N", "J", "K", "lam", "sigma2", "data"} & set(entry)
            if clash:
                raise _err(
                    where,
                    f'"preset" cannot be combined with {sorted(clash)[0]!r}',
                )
            p = datasets.PPCA_PRESETS[entry["preset"]]
            N, J, K = p["N"], p["J"], p["K"]
            params = {"lam": list(p["lam"]), "sigma2": p["sigma2"]}
        elif "data" in entry:
            path = entry["data"]
            y, mask = datasets.load_csv_matrix(path)
            if mask.any():
                raise _err(where, f'"data" {path!r} has missing entries')
            K = _require_int(entry, "K", where)
            N, J = y.shape
            params = {"data": str(path)}
        else:
            N = _require_int(entry, "N", where)
            J = _require_int(entry, "J", where)
            K = _require_int(entry, "K", where)
            params = {
                "lam": _lam_list(entry, "lam", where, K),
                "sigma2": _positive_real(entry, "sigma2", where),
            }
        if K > J:
            raise _err(where, f'"K" must be <= "J", got K={K} > J={J}')
        params["ordered"] = bool(entry.get("ordered", True))
        params["with_mean"] = bool(entry.get("with_mean", False))
        return [_Case(problem, J, K, N, params,
                      _case_kinds(problem, J, K, kinds, where))]

    # matrix_completion
    if "data" in entry:
        path = entry["data"]
        y, mask = datasets.load_csv_matrix(path)
        K = _require_int(entry, "K", where)
        J, T = y.shape
        params = {"data": str(path)}
    else:
        J = _require_int(entry, "J", where)
        T = _require_int(entry, "T", where)
        K = _require_int(entry, "K", where)
        mf = entry.get("mask_fraction", 0.1)
        if isinstance(mf, bool) or not isinstance(mf, (int, float)) or not 0 <= mf < 1:
            raise _err(where, f'"mask_fraction" must be in [0, 1), got {mf!r}')
        params = {
            "lam": _lam_list(entry, "lam", where, K),
            "sigma": _positive_real(entry, "sigma", where),
            "mask_fraction": float(mf),
        }
    if K > min(J, T):
        raise _err(where, f'"K" must be <= min(J, T), got K={K}, J={J}, T={T}')
    params["eta"] = _positive_real({"eta": entry.get("eta", 1.0)}, "eta", where)
    return [_Case("matrix_completion", J, K, T, params,
                  _case_kinds("matrix_completion", J, K, kinds, where))]


def validate_config(raw: dict, config_dir: Optional[Path] = None) -> BenchConfig:
    """Validate a parsed config object; errors name the offending key."""
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    unknown = set(raw) - {
        "problems", "kinds", "runs", "sampler", "base_seed", "foi",
        "regenerate_data_per_run", "out",
    }
    if unknown:
        raise ConfigError(f"unknown top-level key {sorted(unknown)[0]!r}")
    problems = raw.get("problems")
    if not isinstance(problems, list) or not problems:
        raise ConfigError('"problems" must be a nonempty list')

    if config_dir is not None:
        problems = [dict(p) if isinstance(p, dict) else p for p in problems]
        for p in problems:
            if isinstance(p, dict) and isinstance(p.get("data"), str):
                p["data"] = str((config_dir / p["data"]).resolve())

    kinds = _KindSet(raw.get("kinds", "all"), "config")
    runs = raw.get("runs", 8)
    if isinstance(runs, bool) or not isinstance(runs, int) or runs < 1:
        raise ConfigError(f'"runs" must be a positive integer, got {runs!r}')

    sampler = raw.get("sampler", {})
    if not isinstance(sampler, dict):
        raise ConfigError('"sampler" must be an object of SamplerConfig overrides')
    bad = set(sampler) - set(_SAMPLER_KEYS)
    if bad:
        hint = " (per-run seeds are derived from base_seed)" if "seed" in bad else ""
        raise ConfigError(f'unknown sampler key {sorted(bad)[0]!r}{hint}')
    try:
        SamplerConfig(**sampler)
    except ValueError as e:
        raise ConfigError(f"sampler: {e}")

    base_seed = raw.get("base_seed", 0)
    if isinstance(base_seed, bool) or not isinstance(base_seed, int):
        raise ConfigError(f'"base_seed" must be an integer, got {base_seed!r}')

    foi = raw.get("foi", "all")
    if foi not in ("all", "stiefel", "aux"):
        raise ConfigError(f'"foi" must be "all", "stiefel", or "aux", got {foi!r}')

    regen = raw.get("regenerate_data_per_run", False)
    if not isinstance(regen, bool):
        raise ConfigError('"regenerate_data_per_run" must be a boolean')

    out = raw.get("out")
    if out is not None and not isinstance(out, str):
        raise ConfigError('"out" must be a path string')

    cases = []
    for i, entry in enumerate(problems):
        cases.extend(_expand_problem(entry, i, kinds))
    return BenchConfig(
        cases=tuple(cases),
        kinds=tuple(k for k in KINDS if k in kinds),
        runs=runs,
        sampler=dict(sampler),
        base_seed=base_seed,
        foi=foi,
        regenerate_data_per_run=regen,
        out=out,
    )


def load_config(path) -> BenchConfig:
    """Parse and validate a JSON config file.

    Relative "data" paths are resolved against the config file's directory.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON: {e}")
    return validate_config(raw, config_dir=path.parent)


# --- plan and execution -------------------------------------------------------

def build_plan(cfg: BenchConfig) -> list:
    """Expand the config into one task per (case, kind, run_index)."""
    plan = []
    for case in cfg.cases:
        pid = PROBLEM_IDS[case.problem]
        data_words = (cfg.base_seed, pid, case.J, case.K, case.shape_T, DATA_TAG)
        for kind in case.kinds:
            for run_index in range(cfg.runs):
                seed = mix_seed(
                    cfg.base_seed, pid, case.J, case.K, case.shape_T,
                    KIND_IDS[kind], run_index,
                )
                if cfg.regenerate_data_per_run:
                    data_seed = mix_seed(*data_words, run_index)
                else:
                    data_seed = mix_seed(*data_words)
                plan.append(_Task(
                    case=case, kind=kind, run_index=run_index, seed=seed,
                    data_seed=data_seed, sampler=cfg.sampler, foi=cfg.foi,
                ))
    return plan


def _build_model(case: _Case, data_seed: int):
    p = case.params
    if case.problem == "uniform":
        return targets.UniformTarget(case.J, case.K)
    if case.problem == "eigenmodel":
        if "data" in p:
            y, _ = datasets.load_csv_matrix(p["data"])
        else:
            y = datasets.synth_eigenmodel(data_seed, case.J, case.K).y
        return targets.EigenmodelTarget(y, case.K)
    if case.problem == "ppca":
        if "data" in p:
            y, _ = datasets.load_csv_matrix(p["data"])
        else:
            y = datasets.synth_ppca(
                data_seed, case.T, case.J, case.K, p["lam"], p["sigma2"]
            ).y
        return targets.PpcaTarget(
            y, case.K, with_mean=p["with_mean"], ordered=p["ordered"]
        )
    if "data" in p:
        y, mask = datasets.load_csv_matrix(p["data"])
        observed = ~mask
    else:
        d = datasets.synth_matrix_completion(
            data_seed, case.J, case.T, case.K,
            p["lam"], p["sigma"], p["mask_fraction"],
        )
        y, observed = d.y, d.observed
    return targets.MatrixCompletionTarget(y, observed, case.K, eta=p["eta"])


def _foi_columns(target, foi: str):
    if foi == "stiefel":
        return slice(0, target.monitor_stiefel_dim)
    if foi == "aux":
        return slice(target.monitor_stiefel_dim, target.monitor_dim)
    return None


def execute_task(task: _Task) -> RunRecord:
    """Run one chain and diagnose it; any exception becomes a failed record."""
    case = task.case
    base = dict(
        problem=case.problem, J=case.J, K=case.K, T=case.T,
        kind=task.kind, run_index=task.run_index, seed=task.seed,
    )
    scfg = SamplerConfig(**task.sampler, seed=task.seed)
    try:
        model = _build_model(case, task.data_seed)
        target = build_unconstrained(model, task.kind)
        result = nuts.sample(target, scfg)
        report = diagnostics.min_ess_report(
            result.mapped_draws,
            result.elapsed_seconds,
            scfg.iters_keep,
            foi=_foi_columns(target, task.foi),
        )
        return RunRecord(
            **base,
            iters_total=scfg.iters_total,
            iters_kept=scfg.iters_keep,
            elapsed_seconds=result.elapsed_seconds,
            min_ess=report.min_ess,
            min_ess_per_iter=report.min_ess_per_iter,
            min_ess_per_sec=report.min_ess_per_sec,
            divergences=result.divergences,
            stuck=report.stuck,
            failed=False,
        )
    except Exception as e:
        print(
            f"run failed: {case.problem} (J={case.J}, K={case.K}) "
            f"{task.kind} run {task.run_index}: {type(e).__name__}: {e}",
            file=sys.stderr,
        )
        return RunRecord(
            **base,
            iters_total=scfg.iters_total,
            iters_kept=scfg.iters_keep,
            elapsed_seconds=None,
            min_ess=None,
            min_ess_per_iter=None,
            min_ess_per_sec=None,
            divergences=None,
            stuck=None,
            failed=True,
        )


# --- records CSV ----------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _record_row(r: RunRecord) -> list:
    return [_fmt(getattr(r, c)) for c in CSV_COLUMNS]


def _parse_record(row: dict) -> RunRecord:
    def opt(key, conv):
        s = row[key]
        return None if s == "" else conv(s)

    return RunRecord(
        problem=row["problem"],
        J=int(row["J"]),
        K=int(row["K"]),
        T=opt("T", int),
        kind=row["kind"],
        run_index=int(row["run_index"]),
        seed=int(row["seed"]),
        iters_total=int(row["iters_total"]),
        iters_kept=int(row["iters_kept"]),
        elapsed_seconds=opt("elapsed_seconds", float),
        min_ess=opt("min_ess", float),
        min_ess_per_iter=opt("min_ess_per_iter", float),
        min_ess_per_sec=opt("min_ess_per_sec", float),
        divergences=opt("divergences", int),
        stuck=opt("stuck", lambda s: s == "1"),
        failed=row["failed"] == "1",
    )


def read_records(path) -> list:
    """Load a records CSV written by :func:`run_experiment`."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != list(CSV_COLUMNS):
            raise ValueError(
                f"{path}: unexpected records header {reader.fieldnames}"
            )
        return [_parse_record(row) for row in reader]


def _pin_blas_threads():
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, "1")


def run_experiment(cfg: BenchConfig, out_dir=None, workers: int = 1,
                   resume: bool = False, records_name: str = "records.csv") -> list:
    """Run the whole grid, flushing each record as it completes.

    Returns all records in plan order (resumed ones included).  Individual
    run failures become failed records; the grid itself never aborts on one.
    """
    out = Path(out_dir if out_dir is not None else (cfg.out or "."))
    out.mkdir(parents=True, exist_ok=True)
    records_path = out / records_name

    plan = build_plan(cfg)
    done = {}
    if resume and records_path.exists():
        for r in read_records(records_path):
            done[r.key] = r
    pending = [t for t in plan if _task_key(t) not in done]

    mode = "a" if (resume and records_path.exists()) else "w"
    with open(records_path, mode, newline="") as fh:
        writer = csv.writer(fh)
        if mode == "w":
            writer.writerow(CSV_COLUMNS)
            fh.flush()

        def emit(rec: RunRecord):
            done[rec.key] = rec
            writer.writerow(_record_row(rec))
            fh.flush()

        if workers <= 1:
            for task in pending:
                emit(execute_task(task))
        else:
            _pin_blas_threads()
            import multiprocessing as mp

            ctx = mp.get_context("spawn")
            with ProcessPoolExecutor(
                max_workers=workers, mp_context=ctx,
                initializer=_pin_blas_threads,
            ) as pool:
                futures = [pool.submit(execute_task, t) for t in pending]
                for fut in as_completed(futures):
                    emit(fut.result())

    return [done[_task_key(t)] for t in plan]


def _task_key(t: _Task):
    return (t.case.problem, t.case.J, t.case.K, t.case.T, t.kind, t.run_index)


# --- tables ---------------------------------------------------------------------

_METRICS = {"per_iter": "min_ess_per_iter", "per_sec": "min_ess_per_sec"}
_TABLE_KINDS = KINDS  # column order
_KIND_LABELS = {k: k.capitalize() for k in KINDS}


def emit_table(records, metric: str = "per_sec", fmt: str = "text") -> str:
    """Render records as a comparison grid: one row per problem case, one
    column per parameterization, cells = mean over runs.

    Text format marks the best cell per row with ``*`` and missing
    combinations with ``--``.  CSV format encodes the problem as its integer
    id and missing cells as "NA" so the result parses back through
    ``load_csv_matrix``.
    """
    if metric not in _METRICS:
        raise ValueError(f"metric must be one of {sorted(_METRICS)}, got {metric!r}")
    if fmt not in ("text", "csv"):
        raise ValueError(f"format must be 'text' or 'csv', got {fmt!r}")
    records = list(records)
    if not records:
        raise ValueError("no records to tabulate")
    attr = _METRICS[metric]

    groups = {}
    order = []
    for r in records:
        gkey = (r.problem, r.J, r.K, r.T)
        if gkey not in groups:
            groups[gkey] = []
            order.append(gkey)
        groups[gkey].append(r)

    rows = []
    for gkey in order:
        cells = []
        for kind in _TABLE_KINDS:
            vals = [
                getattr(r, attr) for r in groups[gkey]
                if r.kind == kind and not r.failed and getattr(r, attr) is not None
            ]
            cells.append(float(np.mean(vals)) if vals else None)
        rows.append((gkey, cells))

    if fmt == "csv":
        lines = ["problem,J,K,T," + ",".join(_TABLE_KINDS)]
        for (problem, J, K, T), cells in rows:
            front = [str(PROBLEM_IDS[problem]), str(J), str(K),
                     "NA" if T is None else str(T)]
            body = ["NA" if c is None else repr(c) for c in cells]
            lines.append(",".join(front + body))
        return "\n".join(lines) + "\n"

    headers = ["problem", "J", "K", "T"] + [_KIND_LABELS[k] for k in _TABLE_KINDS]
    body_rows = []
    for (problem, J, K, T), cells in rows:
        present = [c for c in cells if c is not None]
        best = max(present) if present else None
        body = []
        for c in cells:
            if c is None:
                body.append("--")
            else:
                mark = "*" if c == best else ""
                body.append(f"{c:.4g}{mark}")
        body_rows.append([problem, str(J), str(K),
                          "" if T is None else str(T)] + body)

    widths = [max(len(headers[i]), *(len(r[i]) for r in body_rows))
              for i in range(len(headers))]
    fmt_row = lambda cols: "  ".join(c.ljust(w) for c, w in zip(cols, widths)).rstrip()
    lines = [fmt_row(headers), fmt_row(["-" * w for w in widths])]
    lines.extend(fmt_row(r) for r in body_rows)
    return "\n".join(lines) + "\n"
