"""Nested boundary pairs and the even-level boundary mass.

For a coordinate ``c`` of a monotone ``f`` on ``m`` variables,
``pair_density(i, j)`` is the fraction of nested pairs S <= T of subsets of
``[m] - {c}`` with ``|S| = i``, ``|T| = j`` such that both S and T lie in
the boundary of ``c``.  ``even_level_mass`` averages the ordinary boundary
densities over the even levels.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .boolfn import BoolFn, _halves, boundary_counts, boundary_mask, popcounts, require_monotone
from .shapley import shapley_exact


def _boundary_on_rest(f: BoolFn, coord: int) -> tuple[np.ndarray, np.ndarray]:
    """Boundary indicator and levels, re-indexed over the m-1 other coordinates."""
    n = f.arity
    mask = boundary_mask(f, coord)
    # _halves(.., b)[0].ravel() enumerates indices with bit b clear in
    # increasing order, which is exactly the compressed (m-1)-bit indexing
    levels = popcounts(n - 1)
    return mask, levels


def _subset_sums(values: np.ndarray, n: int) -> np.ndarray:
    """h(T) = sum over S <= T of values(S) (zeta transform)."""
    out = values.astype(np.int64, copy=True)
    for b in range(n):
        lo, hi = _halves(out, b)
        hi += lo
    return out


def nested_pair_count(f: BoolFn, i: int, j: int, coord: int) -> int:
    mask, levels = _boundary_on_rest(f, coord)
    r = f.arity - 1
    below = _subset_sums(mask & (levels == i), r)
    return int(below[mask & (levels == j)].sum())


def boundary_pair_density(f: BoolFn, i: int, j: int, coord: int) -> Fraction:
    require_monotone(f)
    r = f.arity - 1
    if not 0 <= i < j <= r:
        raise ValueError(f"need 0 <= i < j <= {r}, got i={i}, j={j}")
    return Fraction(nested_pair_count(f, i, j, coord), comb(r, i) * comb(r - i, j - i))


@dataclass(frozen=True)
class PairDensity:
    arity: int
    coord: int
    table: dict  # (i, j) -> Fraction, for 0 <= i < j <= arity - 1

    def __getitem__(self, key) -> Fraction:
        return self.table[key]

    def total(self) -> Fraction:
        return sum(self.table.values(), Fraction(0))


def pair_density_table(f: BoolFn, coord: int) -> PairDensity:
    require_monotone(f)
    mask, levels = _boundary_on_rest(f, coord)
    r = f.arity - 1
    out = {}
    for i in range(r + 1):
        below = _subset_sums(mask & (levels == i), r)
        for j in range(i + 1, r + 1):
            cnt = int(below[mask & (levels == j)].sum())
            out[(i, j)] = Fraction(cnt, comb(r, i) * comb(r - i, j - i))
    return PairDensity(f.arity, coord, out)


def even_level_count(arity: int) -> int:
    """Number of even levels among 0..arity-1; equals n when arity = 2n - 1."""
    return (arity + 1) // 2


def even_level_mass(f: BoolFn, coord: int = 1) -> Fraction:
    require_monotone(f)
    m = f.arity
    counts = boundary_counts(f, coord)
    total = sum((Fraction(counts[j], comb(m - 1, j)) for j in range(0, m, 2)), Fraction(0))
    return total / even_level_count(m)


@dataclass(frozen=True)
class EvenLevelReport:
    arity: int
    coord: int
    phi: Fraction
    premise_met: bool
    even_mass: Fraction
    positive: bool | None
    gamma_ratio: Fraction | None

    def line(self) -> str:
        if not self.premise_met:
            return (
                f"coord={self.coord} arity={self.arity} phi={self.phi} "
                f"premise unmet (phi < 1/{even_level_count(self.arity)})"
            )
        return (
            f"coord={self.coord} arity={self.arity} phi={self.phi} "
            f"even_mass={self.even_mass} positive={self.positive} "
            f"mass/phi^2={self.gamma_ratio} ({float(self.gamma_ratio):.6f})"
        )


def verify_lemma_even(f: BoolFn, coord: int = 1) -> EvenLevelReport:
    """Positivity of the even-level mass when Phi_f(coord) >= 1/n, n = (arity+1)/2.

    The ratio mass / Phi^2 is reported as the observed scaling; no constant
    is asserted.
    """
    require_monotone(f)
    if f.arity % 2 == 0:
        raise ValueError(f"expected odd arity 2n-1, got {f.arity}")
    n = even_level_count(f.arity)
    phi = shapley_exact(f).value(coord)
    mass = even_level_mass(f, coord)
    if phi < Fraction(1, n):
        return EvenLevelReport(f.arity, coord, phi, False, mass, None, None)
    return EvenLevelReport(f.arity, coord, phi, True, mass, mass > 0, mass / phi**2)


# chain view, used to cross-check the pair densities


def chain_hit_distribution(f: BoolFn, coord: int = 1) -> dict[int, Fraction]:
    """Distribution of X = number of boundary sets along a uniform maximal chain."""
    from itertools import permutations

    require_monotone(f)
    others = [i for i in range(f.arity) if i != coord - 1]
    bit = 1 << (coord - 1)
    t = f.table
    hist: dict[int, int] = {}
    total = 0
    for order in permutations(others):
        idx = 0
        hits = int((not t[idx]) and t[idx | bit])
        for i in order:
            idx |= 1 << i
            hits += int((not t[idx]) and t[idx | bit])
        hist[hits] = hist.get(hits, 0) + 1
        total += 1
    return {k: Fraction(v, total) for k, v in sorted(hist.items())}
