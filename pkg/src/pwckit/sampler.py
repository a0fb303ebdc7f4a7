"""Exact sampling of the dry-set law by top-down decomposition.

The same subtree recursion that computes Z also factorizes the measure: a
nonempty configuration inside a depth-d subtree restricts to the left child
only, the right child only, or both children with relative weights
Y_{d-1}, Y_{d-1}, e^{-h_d} Y_{d-1}^2 (first order; the second-order tables
carry the age of the governing branching ancestor along). Descending the
tree and resolving each three-way choice therefore draws A from the exact
finite-volume law, no Markov chain involved.

Choices are made by Gumbel-max over log weights, so extreme J values only
shift the logs instead of underflowing probabilities. Each sample gets its
own child stream spawned from the seed, which makes results reproducible
independent of batching, and the descent consumes its stream in a fixed
left-to-right order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .clustering import UnsupportedVariant
from .logdomain import NEG_INF
from .tree import LeafSet

LN2 = math.log(2.0)


class Sampler:
    """Prepared tables for repeated draws at fixed spec, depth, and J."""

    def __init__(self, spec, n, j):
        if spec.variant not in ("zero", "first", "second"):
            raise UnsupportedVariant(
                "sampling needs the subtree decomposition, which variant %r "
                "does not have" % (spec.variant,)
            )
        self.spec = spec
        self.depth = n
        self.j = j
        if spec.variant == "second":
            H = spec.h.array(n)
            self._const = spec.h_const_at(n)
            # levels[d][a] = ln F_d(a)
            levels = [np.full(n + 2, NEG_INF)]
            levels[0][1:] = j - H[1:, 0]
            for d in range(1, n + 1):
                prev = levels[d - 1]
                cur = np.full(n + 2, NEG_INF)
                square = 2.0 * prev[d]
                for a in range(d + 1, n + 2):
                    cur[a] = np.logaddexp(LN2 + prev[a], -H[a, d] + square)
                levels.append(cur)
            self._levels = levels
            self._H = H
            self._ln_occupied = -self._const + levels[n][n + 1]
        else:
            if spec.variant == "zero":
                h = np.zeros(n + 1)
                self._const = 0.0
            else:
                h = spec.h.array(n)
                self._const = spec.h_const_at(n)
            y = np.full(n + 1, NEG_INF)
            y[0] = j - h[0]
            for d in range(1, n + 1):
                y[d] = np.logaddexp(LN2 + y[d - 1], -h[d] + 2.0 * y[d - 1])
            self._y = y
            self._h = h
            self._ln_occupied = -self._const + y[n]
        self.ln_z = float(np.logaddexp(0.0, self._ln_occupied))

    def sample(self, rng):
        """One exact draw using the given numpy Generator."""
        g = rng.gumbel(size=2)
        if g[0] + 0.0 > g[1] + self._ln_occupied:
            return LeafSet(self.depth, ())
        leaves = []
        if self.spec.variant == "second":
            self._descend_second(rng, self.depth, self.depth + 1, 0, leaves)
        else:
            self._descend_first(rng, self.depth, 0, leaves)
        return LeafSet(self.depth, tuple(leaves))

    def _descend_first(self, rng, d, base, out):
        while d > 0:
            y = self._y[d - 1]
            logw = (y, y, -self._h[d] + 2.0 * y)
            pick = int(np.argmax(rng.gumbel(size=3) + logw))
            half = 1 << (d - 1)
            if pick == 2:
                self._descend_first(rng, d - 1, base, out)
                base += half
            elif pick == 1:
                base += half
            d -= 1
        out.append(base)

    def _descend_second(self, rng, d, a, base, out):
        while d > 0:
            prev = self._levels[d - 1]
            logw = (
                prev[a],
                prev[a],
                -self._H[a, d] + 2.0 * prev[d],
            )
            pick = int(np.argmax(rng.gumbel(size=3) + logw))
            half = 1 << (d - 1)
            if pick == 2:
                # both children now answer to the branching point at age d
                self._descend_second(rng, d - 1, d, base, out)
                a = d
                base += half
            elif pick == 1:
                base += half
            d -= 1
        out.append(base)

    def sample_many(self, num_samples, seed):
        """Independent draws on per-sample child streams of ``seed``."""
        streams = np.random.SeedSequence(seed).spawn(num_samples)
        return [self.sample(np.random.default_rng(s)) for s in streams]


def sample(spec, n, j, seed, num_samples=1):
    """Convenience wrapper: build a Sampler and draw."""
    sampler = Sampler(spec, n, j)
    return sampler.sample_many(num_samples, seed)


@dataclass(frozen=True)
class DensityEstimate:
    mean: float
    stderr: float
    num_samples: int

    def interval(self, z=3.0):
        return (self.mean - z * self.stderr, self.mean + z * self.stderr)


def empirical_density(spec, n, j, num_samples, seed):
    """Monte Carlo mean of |A| / 2^n with a normal-approximation error."""
    sampler = Sampler(spec, n, j)
    sizes = np.array(
        [len(s) for s in sampler.sample_many(num_samples, seed)], dtype=float
    )
    fractions = sizes / (1 << n)
    mean = float(fractions.mean())
    stderr = float(fractions.std(ddof=1) / math.sqrt(num_samples))
    return DensityEstimate(mean, stderr, num_samples)
