"""Self-contained No-U-Turn sampler over flat unconstrained targets.

A target is any object with ``dim`` and ``logdensity_and_gradient(x) ->
(float, ndarray)``; points of zero density report ``-inf`` and are treated
as divergent proposals, never as errors.  Targets may optionally provide
``origin()`` (interior point that chains perturb around; defaults to zero)
and ``monitor(x)`` (per-draw derived quantities, computed after timing
stops).

The trajectory is grown by tree doubling with the p·Δq U-turn criterion
evaluated at both ends of every merged subtree (velocity form under the
diagonal mass metric).  Candidate selection is multinomial in the trajectory
weights by default, with the original slice variant behind a config flag;
both use biased progressive sampling at the top level, so a tree capped at a
single doubling reduces exactly to one leapfrog Metropolis step.  Warmup
adapts the step size by Nesterov dual averaging and (optionally) a diagonal
mass matrix from a streaming variance over the middle of warmup.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional

import numpy as np

from .errors import SamplerError

__all__ = [
    "SamplerConfig",
    "ChainResult",
    "DualAveragingState",
    "mix_seed",
    "leapfrog",
    "nuts_draw",
    "dual_averaging_update",
    "find_reasonable_step",
    "sample",
]

_MASK64 = (1 << 64) - 1


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)

def mix_seed(*words: int) -> int:
    """Fold integer words into one 64-bit stream key (splitmix64 chain).

    Used wherever independent streams are derived from a base seed plus
    identifying indices (chain, problem, kind, run); the mixing is fixed so
    recorded seeds stay reproducible across versions.
    """
    h = 0
    for w in words:
        h = _splitmix64(h ^ (int(w) & _MASK64))
    return h


# --- configuration and results ---------------------------------------------

@dataclass(frozen=True)
class SamplerConfig:
    """Settings for one chain.

    ``iters_total - iters_keep`` iterations are warmup with adaptation; the
    final ``iters_keep`` are recorded with all adaptation frozen.
    ``step_size`` pins the initial step (otherwise a coarse doubling search
    picks it); ``trajectory`` selects multinomial or slice candidate
    selection.
    """

    iters_total: int = 1000
    iters_keep: int = 500
    target_accept: float = 0.8
    max_treedepth: int = 10
    mass_adaptation: bool = True
    seed: int = 0
    step_size: Optional[float] = None
    trajectory: str = "multinomial"
    max_energy_error: float = 1000.0

    def __post_init__(self):
        if not (1 <= self.iters_keep <= self.iters_total):
            raise ValueError(
                f"need 1 <= iters_keep <= iters_total, got "
                f"iters_keep={self.iters_keep}, iters_total={self.iters_total}"
            )
        if not (0.0 < self.target_accept < 1.0):
            raise ValueError(f"target_accept must be in (0,1), got {self.target_accept}")
        if self.max_treedepth < 0:
            raise ValueError(f"max_treedepth must be >= 0, got {self.max_treedepth}")
        if self.step_size is not None and not self.step_size > 0.0:
            raise ValueError(f"step_size must be positive, got {self.step_size}")
        if self.trajectory not in ("multinomial", "slice"):
            raise ValueError(f"trajectory must be 'multinomial' or 'slice', got {self.trajectory!r}")
        if not self.max_energy_error > 0.0:
            raise ValueError("max_energy_error must be positive")


@dataclass(frozen=True)
class ChainResult:
    """One chain's output: kept draws plus run metadata.

    ``draws`` is iters_keep x dim in unconstrained coordinates;
    ``mapped_draws`` holds the target's monitored quantities per draw (None
    when the target defines no monitor).  ``divergences`` counts divergent
    transitions among the kept draws only.
    """

    draws: np.ndarray
    mapped_draws: Optional[np.ndarray]
    divergences: int
    step_size: float
    elapsed_seconds: float
    seed: int
    mean_accept: float = float("nan")


@dataclass(frozen=True)
class DualAveragingState:
    """Nesterov dual-averaging state for log step-size adaptation."""

    log_step: float
    log_step_avg: float
    h_avg: float
    iteration: int
    mu: float
    gamma: float = 0.05
    t0: float = 10.0
    kappa: float = 0.75


def init_dual_averaging(step0: float) -> DualAveragingState:
    log_step = math.log(step0)
    return DualAveragingState(
        log_step=log_step,
        log_step_avg=log_step,
        h_avg=0.0,
        iteration=0,
        mu=math.log(10.0 * step0),
    )


def dual_averaging_update(
    state: DualAveragingState, accept_stat: float, target_accept: float
) -> DualAveragingState:
    """One adaptation step toward the target acceptance statistic."""
    t = state.iteration + 1
    eta = 1.0 / (t + state.t0)
    h_avg = (1.0 - eta) * state.h_avg + eta * (target_accept - accept_stat)
    log_step = state.mu - math.sqrt(t) / state.gamma * h_avg
    w = t ** (-state.kappa)
    log_step_avg = w * log_step + (1.0 - w) * state.log_step_avg
    return replace(
        state,
        log_step=log_step,
        log_step_avg=log_step_avg,
        h_avg=h_avg,
        iteration=t,
    )


# --- leapfrog ----------------------------------------------------------------

def _kinetic(p, inv_mass) -> float:
    return 0.5 * float(p @ (inv_mass * p))


def _step(q, p, grad, eps, target, inv_mass):
    """Position-Verlet step given the gradient at q (avoids one evaluation)."""
    p_half = p + (0.5 * eps) * grad
    q_new = q + eps * (inv_mass * p_half)
    lp_new, grad_new = target.logdensity_and_gradient(q_new)
    p_new = p_half + (0.5 * eps) * grad_new
    return q_new, p_new, lp_new, grad_new


def leapfrog(q, p, eps, target, inv_mass=None):
    """One half-kick/drift/half-kick step; returns (q', p', logdensity', gradient').

    Symplectic and time-reversible: integrating with ``-eps`` from (q', p')
    recovers (q, p).
    """
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    if inv_mass is None:
        inv_mass = np.ones_like(q)
    _, grad = target.logdensity_and_gradient(q)
    return _step(q, p, grad, float(eps), target, inv_mass)


# --- tree doubling -----------------------------------------------------------

class _Node(NamedTuple):
    q: np.ndarray
    p: np.ndarray
    lp: float
    grad: np.ndarray


class _Tree(NamedTuple):
    near: _Node        # new state adjacent to the build start
    far: _Node         # outermost new state in the build direction
    proposal: _Node
    logw: float        # log total trajectory weight of the subtree
    turning: bool
    divergent: bool
    accept_sum: float  # sum of per-step Metropolis ratios vs the initial energy
    n_steps: int


class _TreeBuilder:
    """Recursive doubling in one direction, sharing the draw's invariants.

    ``log_ref`` is -H0 for multinomial weights (node log-weight H0 - H) and
    the log slice level for the slice variant (weight 1 on the slice, 0 off
    it); divergence triggers when H + log_ref exceeds the energy-error cap
    in either scheme.
    """

    def __init__(self, target, eps, h0, log_ref, multinomial, inv_mass, rng, max_err):
        self.target = target
        self.eps = eps  # signed
        self.h0 = h0
        self.log_ref = log_ref
        self.multinomial = multinomial
        self.inv_mass = inv_mass
        self.rng = rng
        self.max_err = max_err

    def _single(self, start: _Node) -> _Tree:
        q, p, lp, grad = _step(
            start.q, start.p, start.grad, self.eps, self.target, self.inv_mass
        )
        node = _Node(q, p, lp, grad)
        h = -lp + _kinetic(p, self.inv_mass)
        excess = h + self.log_ref
        if math.isfinite(h):
            divergent = excess > self.max_err
            accept = math.exp(min(0.0, self.h0 - h))
        else:
            divergent = True
            accept = 0.0
        if divergent:
            logw = -math.inf
        elif self.multinomial:
            logw = -excess
        else:
            logw = 0.0 if excess <= 0.0 else -math.inf
        return _Tree(node, node, node, logw, False, divergent, accept, 1)

    def build(self, start: _Node, depth: int) -> _Tree:
        if depth == 0:
            return self._single(start)
        first = self.build(start, depth - 1)
        if first.divergent or first.turning:
            return first
        second = self.build(first.far, depth - 1)
        accept_sum = first.accept_sum + second.accept_sum
        n_steps = first.n_steps + second.n_steps
        logw = np.logaddexp(first.logw, second.logw)
        proposal = first.proposal
        turning = second.turning
        if not (second.divergent or turning):
            if second.logw > -math.inf and math.log1p(-self.rng.random()) < second.logw - logw:
                proposal = second.proposal
            turning = self._uturn(first.near, second.far)
        return _Tree(
            first.near, second.far, proposal, logw,
            turning, second.divergent, accept_sum, n_steps,
        )

    def _uturn(self, near: _Node, far: _Node) -> bool:
        # Time-oriented span: momenta keep their forward-time meaning even
        # when integrating with a negative step.
        dq = math.copysign(1.0, self.eps) * (far.q - near.q)
        return (
            float(dq @ (self.inv_mass * near.p)) < 0.0
            or float(dq @ (self.inv_mass * far.p)) < 0.0
        )


def _draw(state, eps, target, rng, inv_mass, mass_sd, max_treedepth, multinomial, max_err):
    """One NUTS transition from (q, lp, grad); returns the new triple + stats."""
    q, lp, grad = state
    p0 = mass_sd * rng.standard_normal(q.shape[0])
    h0 = -lp + _kinetic(p0, inv_mass)
    if multinomial:
        log_ref = -h0
    else:
        log_ref = math.log1p(-rng.random()) - h0
    start = _Node(q, p0, lp, grad)
    left = right = start
    sel = start
    logw_sel = 0.0
    accept_sum = 0.0
    n_steps = 0
    divergent = False
    depth = 0
    for d in range(max(1, max_treedepth)):
        direction = 1.0 if rng.random() < 0.5 else -1.0
        builder = _TreeBuilder(
            target, direction * eps, h0, log_ref, multinomial, inv_mass, rng, max_err
        )
        tree = builder.build(right if direction > 0 else left, d)
        accept_sum += tree.accept_sum
        n_steps += tree.n_steps
        depth = d + 1
        if tree.divergent:
            divergent = True
            break
        if direction > 0:
            right = tree.far
        else:
            left = tree.far
        if tree.turning:
            break
        if tree.logw > -math.inf and math.log1p(-rng.random()) < tree.logw - logw_sel:
            sel = tree.proposal
        logw_sel = np.logaddexp(logw_sel, tree.logw)
        dq = right.q - left.q
        if (
            float(dq @ (inv_mass * left.p)) < 0.0
            or float(dq @ (inv_mass * right.p)) < 0.0
        ):
            break
    accept_stat = accept_sum / n_steps if n_steps else 0.0
    return (sel.q, sel.lp, sel.grad), accept_stat, depth, divergent


def nuts_draw(q, step, target, rng, *, inv_mass=None, max_treedepth=10,
              trajectory="multinomial", max_energy_error=1000.0):
    """One transition from ``q``; returns (q', accept_stat, depth, divergent).

    ``depth`` counts tree doublings performed.  With ``max_treedepth=0`` the
    trajectory is a single leapfrog step accepted with the plain Metropolis
    ratio.
    """
    step = float(step)
    if not step > 0.0:
        raise ValueError(f"step must be positive, got {step}")
    q = np.asarray(q, dtype=float)
    if inv_mass is None:
        inv_mass = np.ones(q.shape[0])
        mass_sd = np.ones(q.shape[0])
    else:
        inv_mass = np.asarray(inv_mass, dtype=float)
        mass_sd = 1.0 / np.sqrt(inv_mass)
    lp, grad = target.logdensity_and_gradient(q)
    if not math.isfinite(lp):
        raise ValueError("q must be an interior point (finite log density)")
    state, accept_stat, depth, divergent = _draw(
        (q, lp, grad), step, target, rng, inv_mass, mass_sd,
        max_treedepth, trajectory == "multinomial", max_energy_error,
    )
    return state[0], accept_stat, depth, divergent


# --- step-size search --------------------------------------------------------

def find_reasonable_step(q, target, rng, *, inv_mass=None, lp=None, grad=None):
    """Coarse doubling/halving search for a step with one-step acceptance near 1/2."""
    q = np.asarray(q, dtype=float)
    if inv_mass is None:
        inv_mass = np.ones(q.shape[0])
    mass_sd = 1.0 / np.sqrt(inv_mass)
    if lp is None or grad is None:
        lp, grad = target.logdensity_and_gradient(q)
    if not math.isfinite(lp):
        raise SamplerError("cannot search for a step size from a zero-density point")
    p = mass_sd * rng.standard_normal(q.shape[0])
    h0 = -lp + _kinetic(p, inv_mass)

    def log_ratio(eps: float) -> float:
        _, p1, lp1, _ = _step(q, p, grad, eps, target, inv_mass)
        h1 = -lp1 + _kinetic(p1, inv_mass)
        return h0 - h1 if math.isfinite(h1) else -math.inf

    step = 1.0
    direction = 1.0 if log_ratio(step) > math.log(0.5) else -1.0
    log2 = math.log(2.0)
    for _ in range(100):
        if direction * log_ratio(step) <= -direction * log2:
            return step
        step *= 2.0**direction
        if not 1e-10 < step < 1e10:
            raise SamplerError(
                f"step-size search left ({1e-10:g}, {1e10:g}) without finding "
                "an acceptable step; the gradient may be wrong or the target "
                "pathologically scaled"
            )
    return step


# --- the full chain ----------------------------------------------------------

def _initial_point(target, rng, dim):
    origin = getattr(target, "origin", None)
    base = np.asarray(origin(), dtype=float) if callable(origin) else np.zeros(dim)
    for _ in range(100):
        q = base + 0.1 * rng.standard_normal(dim)
        lp, grad = target.logdensity_and_gradient(q)
        if math.isfinite(lp):
            return q, lp, grad
    raise SamplerError(
        "no finite-density starting point found in 100 attempts around the "
        "target's origin"
    )


class _Welford:
    """Streaming mean/variance accumulator."""

    def __init__(self, dim: int):
        self.n = 0
        self.mean = np.zeros(dim)
        self.m2 = np.zeros(dim)

    def add(self, x):
        self.n += 1
        delta = x - self.mean
        self.mean += delta / self.n
        self.m2 += delta * (x - self.mean)

    def variance(self):
        if self.n < 2:
            return np.ones_like(self.mean)
        return self.m2 / (self.n - 1)


def _shrunk_variance(acc: _Welford):
    # Regularize toward unit scale so short windows cannot collapse the mass.
    n = acc.n
    return acc.variance() * (n / (n + 5.0)) + 1e-3 * (5.0 / (n + 5.0))


def sample(target, cfg: SamplerConfig) -> ChainResult:
    """Run one adaptive chain and return its kept draws.

    Warmup (``iters_total - iters_keep`` iterations) adapts the step size
    throughout and, when enabled, replaces the unit diagonal mass with a
    shrunk streaming variance estimated over the middle of warmup, after
    which the step search and averaging restart.  More than 90% divergent
    warmup transitions abort the run.  Identical (target, cfg) pairs produce
    bitwise-identical results.
    """
    dim = int(target.dim)
    if dim < 1:
        raise ValueError("target.dim must be >= 1")
    rng = np.random.Generator(np.random.Philox(key=cfg.seed & _MASK64))
    multinomial = cfg.trajectory == "multinomial"
    warmup = cfg.iters_total - cfg.iters_keep

    t_start = time.perf_counter()
    state = _initial_point(target, rng, dim)
    inv_mass = np.ones(dim)
    mass_sd = np.ones(dim)

    if cfg.step_size is not None:
        step = float(cfg.step_size)
    else:
        step = find_reasonable_step(
            state[0], target, rng, inv_mass=inv_mass, lp=state[1], grad=state[2]
        )

    da = init_dual_averaging(step) if warmup > 0 else None
    mass_lo = mass_hi = -1
    acc = None
    if warmup > 0 and cfg.mass_adaptation:
        mass_lo = int(0.5 * warmup)
        mass_hi = int(0.75 * warmup)
        if mass_hi - mass_lo >= 10:
            acc = _Welford(dim)

    warm_div = 0
    for i in range(warmup):
        step = math.exp(da.log_step)
        state, astat, _, div = _draw(
            state, step, target, rng, inv_mass, mass_sd,
            cfg.max_treedepth, multinomial, cfg.max_energy_error,
        )
        warm_div += div
        da = dual_averaging_update(da, astat, cfg.target_accept)
        if acc is not None and mass_lo <= i < mass_hi:
            acc.add(state[0])
            if i == mass_hi - 1:
                inv_mass = _shrunk_variance(acc)
                mass_sd = 1.0 / np.sqrt(inv_mass)
                step = find_reasonable_step(
                    state[0], target, rng,
                    inv_mass=inv_mass, lp=state[1], grad=state[2],
                )
                da = init_dual_averaging(step)
    if warmup > 0:
        if warm_div > 0.9 * warmup:
            raise SamplerError(
                f"{warm_div} of {warmup} warmup transitions diverged (>90%); "
                "try a smaller initial step_size or a higher target_accept"
            )
        step = math.exp(da.log_step_avg)

    draws = np.empty((cfg.iters_keep, dim))
    divergences = 0
    accept_total = 0.0
    for i in range(cfg.iters_keep):
        state, astat, _, div = _draw(
            state, step, target, rng, inv_mass, mass_sd,
            cfg.max_treedepth, multinomial, cfg.max_energy_error,
        )
        divergences += div
        accept_total += astat
        draws[i] = state[0]
    elapsed = max(time.perf_counter() - t_start, 1e-12)

    mapped = None
    monitor = getattr(target, "monitor", None)
    if callable(monitor):
        mapped = np.empty((cfg.iters_keep, int(target.monitor_dim)))
        for i in range(cfg.iters_keep):
            mapped[i] = monitor(draws[i])
    return ChainResult(
        draws=draws,
        mapped_draws=mapped,
        divergences=divergences,
        step_size=step,
        elapsed_seconds=elapsed,
        seed=cfg.seed,
        mean_accept=accept_total / cfg.iters_keep,
    )
