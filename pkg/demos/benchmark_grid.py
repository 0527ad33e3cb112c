"""Run a small benchmark grid and render the comparison tables.

The same thing `stiefel-bench run` does, driven from Python: validate a
config, execute every (problem, parameterization, run) cell with derived
seeds, and print the per-iteration and per-second efficiency tables.  The
records land in ./bench_out/records.csv and rerunning with the same
base_seed reproduces every min_ess value exactly.
"""

from stiefelmc import bench

cfg = bench.validate_config({
    "problems": [
        {"problem": "uniform", "J": [8, 16], "K": 2},
        {"problem": "eigenmodel", "J": 12, "K": 2},
    ],
    "kinds": "all",
    "runs": 2,
    "base_seed": 1,
    "sampler": {"iters_total": 400, "iters_keep": 200},
})

records = bench.run_experiment(cfg, out_dir="bench_out", workers=1)
failed = sum(r.failed for r in records)
print(f"{len(records)} runs, {failed} failed\n")

print(bench.emit_table(records, metric="per_iter", fmt="text"))
print()
print(bench.emit_table(records, metric="per_sec", fmt="text"))
