"""Shapley values of monotone Boolean functions.

The exact route sums boundary densities level by level; the Monte Carlo
route walks random maximal chains and records the pivotal coordinate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations

import numpy as np

from .boolfn import BoolFn, boundary_profile, require_monotone

MC_CONFIDENCE = 0.99
_MC_BATCH = 4096


@dataclass(frozen=True)
class ShapleyVector:
    """Per-coordinate values; ``values[k]`` belongs to coordinate ``k + 1``.

    ``half_width`` is None for exact vectors and the Hoeffding half-width
    (shared by every coordinate) for Monte Carlo estimates.
    """

    arity: int
    values: tuple
    half_width: float | None = None
    samples: int | None = None

    @property
    def exact(self) -> bool:
        return self.half_width is None

    def value(self, coord: int):
        return self.values[coord - 1]

    def argmax(self) -> int:
        best = max(self.values)
        return self.values.index(best) + 1

    def total(self):
        return sum(self.values, Fraction(0) if self.exact else 0.0)


def shapley_exact(f: BoolFn) -> ShapleyVector:
    """Phi_f(i) = (sum over levels j of mu_f(j)^(i)) / n, as Fractions."""
    prof = boundary_profile(f)
    n = f.arity
    vals = tuple(sum(row, Fraction(0)) / n for row in prof.mu)
    return ShapleyVector(n, vals)


def shapley_by_permutations(f: BoolFn) -> ShapleyVector:
    """Reference value from all n! orderings; only practical for n <= 8."""
    require_monotone(f)
    n = f.arity
    if n > 9:
        raise ValueError("permutation enumeration is limited to arity 9")
    t = f.table
    hits = [0] * n
    total = 0
    for order in permutations(range(n)):
        total += 1
        idx = 0
        for i in order:
            nxt = idx | (1 << i)
            if not t[idx] and t[nxt]:
                hits[i] += 1
                break
            idx = nxt
    return ShapleyVector(n, tuple(Fraction(h, total) for h in hits))


def hoeffding_half_width(samples: int, confidence: float = MC_CONFIDENCE) -> float:
    """Two-sided Hoeffding half-width for a mean of ``samples`` values in [0, 1]."""
    alpha = 1.0 - confidence
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * samples))


def pivot_counts(f: BoolFn, samples: int, seed: int) -> np.ndarray:
    """How often each coordinate is pivotal along ``samples`` random chains."""
    n = f.arity
    counts = np.zeros(n, dtype=np.int64)
    t = f.table
    if t[0] or not t[-1]:
        return counts
    rng = np.random.default_rng(seed)
    weights = np.int64(1) << np.arange(n, dtype=np.int64)
    done = 0
    while done < samples:
        b = min(_MC_BATCH, samples - done)
        order = np.argsort(rng.random((b, n)), axis=1)
        prefix = np.cumsum(weights[order], axis=1)
        vals = t[prefix]
        # f is 0 on the empty prefix and 1 on the full one: the first 1 is the pivot
        first = np.argmax(vals, axis=1)
        counts += np.bincount(order[np.arange(b), first], minlength=n)
        done += b
    return counts


def shapley_montecarlo(f: BoolFn, samples: int, seed: int) -> ShapleyVector:
    require_monotone(f)
    if samples < 1:
        raise ValueError("samples must be positive")
    counts = pivot_counts(f, samples, seed)
    vals = tuple(float(c) / samples for c in counts)
    return ShapleyVector(
        f.arity, vals, half_width=hoeffding_half_width(samples), samples=samples
    )


@dataclass(frozen=True)
class DecodeSet:
    threshold: Fraction
    coordinates: frozenset
    fallback: bool = False


def decode(f: BoolFn, lam, phi: ShapleyVector | None = None) -> DecodeSet:
    """Coordinates with exact Shapley value at least ``lam``.

    An empty result on a non-constant function falls back to the single
    argmax coordinate (smallest index on ties).
    """
    lam = Fraction(lam)
    if phi is None:
        phi = shapley_exact(f)
    chosen = frozenset(i for i in range(1, f.arity + 1) if phi.value(i) >= lam)
    if chosen or f.is_constant:
        return DecodeSet(lam, chosen)
    return DecodeSet(lam, frozenset([phi.argmax()]), fallback=True)
