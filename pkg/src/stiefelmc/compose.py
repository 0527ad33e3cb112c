"""Flatten a model and its parameterizations into one unconstrained density.

``build_unconstrained`` pairs each Stiefel block of a model with a
parameterization and lays the sampler's state vector out as

    [ phi_1 | phi_2 | ... | t_1 | t_2 | ... ]

with one phi block per orthonormal matrix and one t block per auxiliary
block (log-transformed where the block is constrained positive).  The
composite log density is

    model logpost + sum log_adjust(phi_b) + sum transform log-Jacobians,

with the gradient assembled from the model's constrained-space gradients via
each parameterization's pullback and each transform's chain rule.  Points
where a map or the model is undefined (rank deficiency, singular pencils,
rejected Givens regions) yield ``-inf`` with a zero gradient, which the
sampler treats as a divergence rather than an error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import params
from .errors import DomainError

__all__ = ["UnconstrainedTarget", "build_unconstrained"]


# --- auxiliary-block transforms ------------------------------------------

def _fwd_identity(t):
    return t, 0.0


def _fwd_positive(t):
    x = np.exp(t)
    return x, float(t.sum())


def _fwd_ordered_positive(t):
    # x_k = sum_{l >= k} exp(t_l): strictly descending, positive.
    e = np.exp(t)
    x = np.cumsum(e[::-1])[::-1]
    return x, float(t.sum())


def _bwd_identity(t, x, grad_x):
    return grad_x


def _bwd_positive(t, x, grad_x):
    # d/dt [ f(exp(t)) + sum t ] = f'(x) * x + 1.
    return grad_x * x + 1.0


def _bwd_ordered_positive(t, x, grad_x):
    # dx_k/dt_l = exp(t_l) for l >= k, so each t_l collects the gradient of
    # all x_k with k <= l, plus the Jacobian term.
    return np.exp(t) * np.cumsum(grad_x) + 1.0


_TRANSFORMS = {
    "identity": (_fwd_identity, _bwd_identity),
    "positive": (_fwd_positive, _bwd_positive),
    "ordered_positive": (_fwd_ordered_positive, _bwd_ordered_positive),
}


@dataclass(frozen=True)
class _Layout:
    phi_slices: tuple
    aux_slices: tuple
    dim: int


def _build_layout(specs, aux_blocks) -> _Layout:
    off = 0
    phi_slices = []
    for spec in specs:
        n = params.phi_length(spec)
        phi_slices.append(slice(off, off + n))
        off += n
    aux_slices = []
    for block in aux_blocks:
        aux_slices.append(slice(off, off + block.size))
        off += block.size
    return _Layout(tuple(phi_slices), tuple(aux_slices), off)


class UnconstrainedTarget:
    """A model made sampleable: one flat vector in, log density and gradient out.

    Attributes
    ----------
    dim : int
        Length of the unconstrained state vector.
    monitor_dim : int
        Length of :meth:`monitor` output: all mapped orthonormal-matrix
        entries (column-major per block) followed by all auxiliary blocks on
        their sampled (unconstrained) scale.
    monitor_stiefel_dim : int
        How many leading monitor entries belong to the mapped matrices.
    """

    def __init__(self, model, specs):
        specs = tuple(specs)
        shapes = tuple(model.stiefel_shapes)
        if len(specs) != len(shapes):
            raise ValueError(
                f"model has {len(shapes)} Stiefel blocks but {len(specs)} "
                "parameterizations were given"
            )
        for spec, (j, k) in zip(specs, shapes):
            if (spec.J, spec.K) != (j, k):
                raise ValueError(
                    f"parameterization is for V({spec.J}, {spec.K}) but the "
                    f"model block is V({j}, {k})"
                )
        self.model = model
        self.specs = specs
        self._layout = _build_layout(specs, model.aux_blocks)
        self.dim = self._layout.dim
        self.monitor_stiefel_dim = sum(j * k for j, k in shapes)
        self.monitor_aux_dim = sum(b.size for b in model.aux_blocks)
        self.monitor_dim = self.monitor_stiefel_dim + self.monitor_aux_dim

    def origin(self):
        """An interior point of the composite domain.

        Zero everywhere except Givens blocks, whose domain excludes the zero
        vector; those sit at their identity configuration (theta = 0, r = 1).
        Samplers start chains from small perturbations of this point.
        """
        x = np.zeros(self.dim)
        for spec, s in zip(self.specs, self._layout.phi_slices):
            x[s] = params.origin(spec)
        return x

    # -- evaluation ---------------------------------------------------------

    def _unpack(self, x):
        lay = self._layout
        phis = [x[s] for s in lay.phi_slices]
        ts = [x[s] for s in lay.aux_slices]
        return phis, ts

    def logdensity_and_gradient(self, x):
        """Composite log density and its gradient at the flat point ``x``.

        Returns ``(-inf, zeros)`` where the point is outside the domain of a
        map, a transform, or the model.
        """
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"x must have shape ({self.dim},), got {x.shape}")
        if not np.all(np.isfinite(x)):
            return -np.inf, np.zeros(self.dim)
        phis, ts = self._unpack(x)
        # Overflow while probing the domain boundary is normal sampler
        # operation; anything non-finite lands on the -inf path below.
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            return self._eval(x, phis, ts)

    def _eval(self, x, phis, ts):
        try:
            results = []
            caches = []
            total = 0.0
            for spec, phi in zip(self.specs, phis):
                res, cache = params.forward(spec, phi)
                if res.log_adjust == -np.inf:
                    return -np.inf, np.zeros(self.dim)
                results.append(res)
                caches.append(cache)
                total += res.log_adjust
            aux = []
            for block, t in zip(self.model.aux_blocks, ts):
                fwd = _TRANSFORMS[block.transform][0]
                val, jac = fwd(t)
                aux.append(val)
                total += jac
            lp, ups_bars, aux_bars = self.model.logpost(
                [r.upsilon for r in results], aux
            )
        except DomainError:
            return -np.inf, np.zeros(self.dim)
        total += lp
        if not np.isfinite(total):
            return -np.inf, np.zeros(self.dim)

        grad = np.empty(self.dim)
        try:
            for spec, cache, ubar, s in zip(
                self.specs, caches, ups_bars, self._layout.phi_slices
            ):
                grad[s] = params.backward(spec, cache, ubar, adjust_weight=1.0)
        except DomainError:
            return -np.inf, np.zeros(self.dim)
        for block, t, val, gbar, s in zip(
            self.model.aux_blocks, ts, aux, aux_bars, self._layout.aux_slices
        ):
            bwd = _TRANSFORMS[block.transform][1]
            grad[s] = bwd(t, val, np.asarray(gbar, dtype=float))
        if not np.all(np.isfinite(grad)):
            return -np.inf, np.zeros(self.dim)
        return float(total), grad

    # -- monitoring ---------------------------------------------------------

    def monitor(self, x):
        """Map a flat draw to monitored quantities: mapped matrix entries
        (column-major per block) plus auxiliary blocks on the sampled scale.

        Raises :class:`DomainError` where a map is undefined.
        """
        x = np.asarray(x, dtype=float)
        phis, ts = self._unpack(x)
        parts = []
        for spec, phi in zip(self.specs, phis):
            res = params.evaluate(spec, phi)
            parts.append(res.upsilon.ravel(order="F"))
        parts.extend(ts)
        if parts:
            return np.concatenate(parts)
        return np.empty(0)

    def monitor_names(self):
        """Column labels matching :meth:`monitor` output."""
        names = []
        for b, spec in enumerate(self.specs):
            for k in range(spec.K):
                for j in range(spec.J):
                    names.append(f"upsilon{b}[{j},{k}]")
        for block in self.model.aux_blocks:
            for i in range(block.size):
                names.append(f"{block.name}[{i}]")
        return names


def build_unconstrained(model, specs_or_kind) -> UnconstrainedTarget:
    """Pair a model with parameterizations and return the flat target.

    ``specs_or_kind`` is either one kind name (applied to every Stiefel block
    of the model) or a sequence of :class:`stiefelmc.params.ParamSpec`, one
    per block.
    """
    if isinstance(specs_or_kind, str):
        specs = [
            params.ParamSpec(specs_or_kind, j, k) for j, k in model.stiefel_shapes
        ]
    elif isinstance(specs_or_kind, params.ParamSpec):
        specs = [specs_or_kind]
    else:
        specs = list(specs_or_kind)
    return UnconstrainedTarget(model, specs)
