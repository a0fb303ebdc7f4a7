"""Log-domain dynamic programs over subtree levels.

Grand partition function at depth n, coupling J, clustering weights h:

    Z = sum_A exp(J |A| - Phi(A)),   zeta_n(J) = 2^-n ln Z.

The recursions exploit that a nonempty leaf set inside a depth-d subtree
either lives entirely in one child (two choices) or splits across both, in
which case the subtree root is a branching point of age d:

    first order:   Y_0 = e^{J - h_0},
                   Y_d = 2 Y_{d-1} + e^{-h_d} Y_{d-1}^2,
                   Z = 1 + e^{-h} Y_n.

    second order:  the subtree's oldest branching point remembers the age a
                   of its direct branching ancestor outside the subtree:
                   F_0(a) = e^{J - h[a][0]},
                   F_d(a) = 2 F_{d-1}(a) + e^{-h[a][d]} F_{d-1}(d)^2,
                   Z = 1 + e^{-h} F_n(n+1)   (virtual top ancestor n + 1).

Size-resolved variants replace the scalar square by a size convolution and
produce the canonical table W(a0) = sum_{|A| = a0} e^{-Phi(A)}; these are the
inputs to free-energy curves and to exact sampling. Convolutions stay in the
log domain with a per-entry max shift (no transform tricks, which would
destroy relative precision across the huge dynamic range), so dp_W costs
O(4^n) and is guarded at moderate depth.

The max-plus table (``dp_W_maxterm``) computes ln max over admissible
first-order profiles of N(b) e^{-Phi(b)} by a max-plus pass over the
level-population chain a_{k-1} = a_k + b_k. Running the subset recursion
itself in max-plus would instead maximize over embedded tree shapes, which
drops the positional binomial C(a_k, b_k); the chain form matches the
profile-level quantity exactly. No second-order analogue is provided: the
per-level multinomials couple every ancestor-descendant pair, and no
polynomial-state exact recursion is known to us.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .clustering import UnsupportedVariant
from .logdomain import LogReal, NEG_INF

LN2 = math.log(2.0)

#: default depth guards for the size-resolved tables (O(4^n) work)
W_FIRST_MAX_DEPTH = 12
W_SECOND_MAX_DEPTH = 10


@dataclass(frozen=True)
class CanonicalTable:
    """Size-indexed log table ln W(a0), a0 = 0 .. m_max.

    ``kind`` is "sum" for the canonical partition function and "max" for the
    dominant-profile table. ``omega`` rescales to the canonical free energy
    omega_n(eps) = 2^-n ln W(eps 2^n) on the dyadic grid.
    """

    depth: int
    ln_w: np.ndarray
    kind: str = "sum"
    source: str = "dp"

    @property
    def m_max(self):
        return len(self.ln_w) - 1

    @property
    def is_full(self):
        return self.m_max == 1 << self.depth

    def omega(self, a0):
        return self.ln_w[a0] / (1 << self.depth)

    def eps_grid(self):
        return np.arange(self.m_max + 1) / (1 << self.depth)

    def omega_values(self):
        return self.ln_w / (1 << self.depth)


def _first_params(spec, n):
    if spec.variant == "zero":
        return np.zeros(n + 1), 0.0
    if spec.variant == "first":
        return spec.h.array(n), spec.h_const_at(n)
    raise UnsupportedVariant(
        "first-order recursion got variant %r" % (spec.variant,)
    )


def _second_params(spec, n):
    if spec.variant != "second":
        raise UnsupportedVariant(
            "second-order recursion got variant %r" % (spec.variant,)
        )
    return spec.h.array(n), spec.h_const_at(n)


def dp_Z(spec, n, j):
    """Grand partition function as a LogReal; dispatches on the family."""
    if spec.variant in ("zero", "first"):
        return dp_Z_first(spec, n, j)
    if spec.variant == "second":
        return dp_Z_second(spec, n, j)
    raise UnsupportedVariant(
        "no dynamic program for variant %r; use the enumeration oracle at "
        "small depth" % (spec.variant,)
    )


def dp_Z_first(spec, n, j):
    h, const = _first_params(spec, n)
    y = j - h[0]
    for d in range(1, n + 1):
        y = np.logaddexp(LN2 + y, -h[d] + 2.0 * y)
    return LogReal(float(np.logaddexp(0.0, -const + y)))


def dp_Z_second(spec, n, j):
    H, const = _second_params(spec, n)
    # f[a] = ln F_d(a), valid for a = d+1 .. n+1 (index a kept absolute)
    f = np.array([j - H[a][0] if a >= 1 else NEG_INF for a in range(n + 2)])
    for d in range(1, n + 1):
        square = 2.0 * f[d]
        new = np.full(n + 2, NEG_INF)
        for a in range(d + 1, n + 2):
            new[a] = np.logaddexp(LN2 + f[a], -H[a][d] + square)
        f = new
    return LogReal(float(np.logaddexp(0.0, -const + f[n + 1])))


def zeta(spec, n, j):
    """Finite-depth free energy zeta_n(J) = 2^-n ln Z_n(J)."""
    return dp_Z(spec, n, j).ln / (1 << n)


def dp_density(spec, n, j):
    """Mean occupied fraction rho_n(J) = 2^-n d ln Z / dJ.

    Propagates the pair (value, d/dJ) through the recursion analytically;
    the ratio r = Y'/Y starts at 1 and multiplies by (Y + 2 e^{-h} Y^2) /
    (Y + e^{-h} Y^2) <= 2 per level, so it stays within float range.
    """
    if spec.variant in ("zero", "first"):
        h, const = _first_params(spec, n)
        y = j - h[0]
        r = 1.0
        for d in range(1, n + 1):
            u = LN2 + y
            v = -h[d] + 2.0 * y
            y_new = np.logaddexp(u, v)
            r = r * (1.0 + math.exp(v - y_new))
            y = y_new
        ln_z = np.logaddexp(0.0, -const + y)
        return math.exp(-const + y - ln_z) * r / (1 << n)
    if spec.variant == "second":
        H, const = _second_params(spec, n)
        f = np.array([j - H[a][0] if a >= 1 else NEG_INF for a in range(n + 2)])
        r = np.ones(n + 2)
        for d in range(1, n + 1):
            square = 2.0 * f[d]
            r_sq = r[d]
            new_f = np.full(n + 2, NEG_INF)
            new_r = np.zeros(n + 2)
            for a in range(d + 1, n + 2):
                u = LN2 + f[a]
                v = -H[a][d] + square
                val = np.logaddexp(u, v)
                new_f[a] = val
                new_r[a] = math.exp(u - val) * r[a] + 2.0 * math.exp(v - val) * r_sq
            f, r = new_f, new_r
        ln_z = np.logaddexp(0.0, -const + f[n + 1])
        return math.exp(-const + f[n + 1] - ln_z) * r[n + 1] / (1 << n)
    raise UnsupportedVariant(
        "no dynamic program for variant %r" % (spec.variant,)
    )


def _log_self_convolve(y, out_len):
    """c[m] = ln sum_{i+j=m} exp(y[i] + y[j]) for m = 0 .. out_len.

    ``y`` is indexed by size with y[0] = -inf. Direct O(out_len * len(y))
    accumulation with a per-entry max shift.
    """
    top = len(y) - 1
    c = np.full(out_len + 1, NEG_INF)
    for m in range(2, out_len + 1):
        lo = max(1, m - top)
        hi = min(top, m - 1)
        if lo > hi:
            continue
        t = y[lo : hi + 1] + y[m - hi : m - lo + 1][::-1]
        mx = t.max()
        if mx == NEG_INF:
            continue
        c[m] = mx + math.log(np.exp(t - mx).sum())
    return c


def dp_W(spec, n, m_max=None, allow_large=False):
    """Canonical table ln W(a0); dispatches on the family.

    ``m_max`` truncates the table to sizes <= m_max, which is exact (sizes
    only add in the convolution) and turns the cost into O(n * m_max^2);
    without it the full table costs O(4^n) and depth is guarded.
    """
    if spec.variant in ("zero", "first"):
        return dp_W_first(spec, n, m_max=m_max, allow_large=allow_large)
    if spec.variant == "second":
        return dp_W_second(spec, n, m_max=m_max, allow_large=allow_large)
    raise UnsupportedVariant(
        "no dynamic program for variant %r; use the enumeration oracle at "
        "small depth" % (spec.variant,)
    )


def _check_guard(n, m_max, limit, allow_large, label):
    if m_max is None and n > limit and not allow_large:
        raise ValueError(
            "%s at depth %d exceeds the default cost guard (%d); pass "
            "allow_large=True or truncate with m_max" % (label, n, limit)
        )


def dp_W_first(spec, n, m_max=None, allow_large=False):
    h, const = _first_params(spec, n)
    _check_guard(n, m_max, W_FIRST_MAX_DEPTH, allow_large, "dp_W_first")
    full = 1 << n
    cap = full if m_max is None else min(int(m_max), full)

    size = min(1, cap)
    y = np.full(size + 1, NEG_INF)
    if cap >= 1:
        y[1] = -h[0]
    for d in range(1, n + 1):
        new_size = min(1 << d, cap)
        conv = _log_self_convolve(y, new_size)
        new = np.full(new_size + 1, NEG_INF)
        m_prev = len(y) - 1
        new[1 : m_prev + 1] = LN2 + y[1:]
        new = np.logaddexp(new, -h[d] + conv)
        y = new
    ln_w = np.full(cap + 1, NEG_INF)
    ln_w[0] = 0.0
    ln_w[1:] = -const + y[1:]
    return CanonicalTable(n, ln_w, kind="sum", source="dp")


def dp_W_second(spec, n, m_max=None, allow_large=False):
    H, const = _second_params(spec, n)
    _check_guard(n, m_max, W_SECOND_MAX_DEPTH, allow_large, "dp_W_second")
    full = 1 << n
    cap = full if m_max is None else min(int(m_max), full)

    size = min(1, cap)
    f = {}
    for a in range(1, n + 2):
        arr = np.full(size + 1, NEG_INF)
        if cap >= 1:
            arr[1] = -H[a][0]
        f[a] = arr
    for d in range(1, n + 1):
        new_size = min(1 << d, cap)
        conv = _log_self_convolve(f[d], new_size)
        new = {}
        for a in range(d + 1, n + 2):
            arr = np.full(new_size + 1, NEG_INF)
            prev = f[a]
            arr[1 : len(prev)] = LN2 + prev[1:]
            arr = np.logaddexp(arr, -H[a][d] + conv)
            new[a] = arr
        f = new
    ln_w = np.full(cap + 1, NEG_INF)
    ln_w[0] = 0.0
    ln_w[1:] = -const + f[n + 1][1:]
    return CanonicalTable(n, ln_w, kind="sum", source="dp")


def dp_W_maxterm(spec, n, m_max=None, allow_large=False):
    """ln max over admissible first-order profiles of N(b) e^{-Phi(b)}.

    Max-plus pass over the level chain: starting from population 1 at the
    top age, choosing b_k branching points at age k multiplies the count by
    C(a_k, b_k) 2^{a_k - b_k} and costs h_k b_k, and grows the population to
    a_{k-1} = a_k + b_k. The canonical table dominates this entrywise, and
    the gap is at most ln of the number of admissible profiles.
    """
    h, const = _first_params(spec, n)
    _check_guard(n, m_max, W_FIRST_MAX_DEPTH, allow_large, "dp_W_maxterm")
    full = 1 << n
    cap = full if m_max is None else min(int(m_max), full)

    lg = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, full + 1)))))

    best = np.full(2, NEG_INF)
    best[1] = 0.0  # population 1 above the deepest branching age
    for k in range(n, 0, -1):
        reach = min(1 << (n - k + 1), cap)
        new = np.full(reach + 1, NEG_INF)
        top_a = min(len(best) - 1, reach)
        for a in range(1, top_a + 1):
            if best[a] == NEG_INF:
                continue
            bmax = min(a, reach - a)
            if bmax < 0:
                continue
            b = np.arange(bmax + 1)
            gain = (
                lg[a] - lg[b] - lg[a - b[::-1]][::-1]
                + (a - b) * LN2
                - h[k] * b
            )
            seg = slice(a, a + bmax + 1)
            new[seg] = np.maximum(new[seg], best[a] + gain)
        best = new
    ln_w = np.full(cap + 1, NEG_INF)
    ln_w[0] = 0.0
    top = min(len(best) - 1, cap)
    ln_w[1 : top + 1] = best[1 : top + 1] - h[0] * np.arange(1, top + 1) - const
    return CanonicalTable(n, ln_w, kind="max", source="dp")
