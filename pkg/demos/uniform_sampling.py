"""Sample the uniform distribution on V(10, 3) and check sphere moments.

Each column of a uniformly distributed orthonormal frame is itself uniform
on the unit sphere, so every matrix entry has mean 0 and second moment 1/J.
This script runs two parameterizations of the same target side by side and
prints the worst moment deviation plus an effective-sample-size summary,
which is the quickest way to see why the polar map is the default choice.
"""

import numpy as np

from stiefelmc import diagnostics, nuts, targets
from stiefelmc.compose import build_unconstrained

J, K = 10, 3
model = targets.UniformTarget(J, K)

for kind in ("polar", "givens"):
    target = build_unconstrained(model, kind)
    res = nuts.sample(target, nuts.SamplerConfig(seed=42))

    # mapped_draws holds the flattened frame per kept draw
    entries = res.mapped_draws
    worst_mean = np.abs(entries.mean(axis=0)).max()
    worst_second = np.abs((entries**2).mean(axis=0) - 1.0 / J).max()

    report = diagnostics.min_ess_report(
        entries, res.elapsed_seconds, res.draws.shape[0]
    )
    print(f"{kind}: dim {target.dim}, step size {res.step_size:.3f}")
    print(f"  worst |mean|           {worst_mean:.4f}  (expect ~0)")
    print(f"  worst |second - 1/J|   {worst_second:.4f}  (expect ~0)")
    print(f"  min ESS {report.min_ess:.0f} of {res.draws.shape[0]} draws, "
          f"{report.min_ess_per_sec:.0f} per second")
