"""A 2-to-1 minor pair whose most influential coordinates disagree.

``g`` on n variables follows coordinate 1 inside a narrow window of the
weight of the other coordinates.  ``f_half`` on 2n-1 variables has ``g`` as
its diagonal minor (coordinate 1 kept, coordinates 2k-2, 2k-1 merged into
k) but hands the influence to coordinate 2.  ``f_full`` on 2n variables
inserts a dummy coordinate at position 2, so that ``g`` is its minor under
``i -> ceil(i/2)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .boolfn import BoolFn, _halves, down_closure, is_monotone, popcounts, up_closure
from .minors import VarMap, apply_minor, ceil_half_map
from .shapley import ShapleyVector, shapley_exact

UNSET = -1


class ConstructionError(AssertionError):
    pass


def window_levels(n: int) -> list[int]:
    """Integers s with 49n/100 < s < 51n/100."""
    return [s for s in range(n + 1) if 49 * n < 100 * s < 51 * n]


def build_g(n: int) -> BoolFn:
    if n < 2:
        raise ValueError("n must be at least 2")
    idx = np.arange(1 << n)
    x1 = (idx & 1).astype(bool)
    rest = popcounts(n)[idx >> 1 << 1].astype(np.int64)  # weight of x_2..x_n
    high = 100 * rest >= 51 * n
    low = 100 * rest <= 49 * n
    return BoolFn(n, np.where(high, True, np.where(low, False, x1)))


def half_map(n: int) -> VarMap:
    """[2n-1] -> [n]: 1 -> 1 and i -> ceil((i+1)/2) for i > 1."""
    return VarMap(n, (1,) + tuple((i + 2) // 2 for i in range(2, 2 * n)))


def diagonal_indices(n: int) -> np.ndarray:
    """Index in {0,1}^(2n-1) of (x1, x2, x2, ..., xn, xn) for every x in {0,1}^n."""
    ys = np.arange(1 << n, dtype=np.int64)
    out = ys & 1
    for k in range(2, n + 1):
        bit = (ys >> (k - 1)) & 1
        out |= (bit << (2 * k - 3)) | (bit << (2 * k - 2))
    return out


@dataclass(frozen=True)
class PartialBoolFn:
    """Trit table: 1, 0, or UNSET; ``step1`` marks entries fixed by the seeding step."""

    arity: int
    values: np.ndarray
    step1: np.ndarray

    def is_monotone(self) -> bool:
        ones = self.values == 1
        zeros = self.values == 0
        return not np.any(up_closure(ones, self.arity) & zeros)


@dataclass(frozen=True)
class HalfConstruction:
    g: BoolFn
    f_half: BoolFn
    after_step1: PartialBoolFn
    after_step2: PartialBoolFn


def construct_half(n: int) -> HalfConstruction:
    g = build_g(n)
    m = 2 * n - 1
    diag = diagonal_indices(n)

    # step 1: seed the diagonal with g, close 1s upward and 0s downward
    ones = np.zeros(1 << m, dtype=bool)
    zeros = np.zeros(1 << m, dtype=bool)
    ones[diag[g.table]] = True
    zeros[diag[~g.table]] = True
    ones = up_closure(ones, m)
    zeros = down_closure(zeros, m)
    if np.any(ones & zeros):
        raise ConstructionError("step 1 closures collide")
    step1 = ones | zeros
    vals = np.full(1 << m, UNSET, dtype=np.int8)
    vals[ones] = 1
    vals[zeros] = 0
    p1 = PartialBoolFn(m, vals.copy(), step1.copy())
    if not p1.is_monotone():
        raise ConstructionError("partial function not monotone after step 1")

    # step 2: copy step-1 values across coordinate 1 into unset partners
    lo_set, hi_set = _halves(step1, 0)
    lo_val, hi_val = _halves(vals, 0)
    lift = ~lo_set & hi_set & (hi_val == 1)
    drop = ~hi_set & lo_set & (lo_val == 0)
    lo_val[lift] = 1
    hi_val[drop] = 0
    p2 = PartialBoolFn(m, vals.copy(), step1.copy())
    changed = (p2.values != p1.values)
    partner = np.arange(1 << m) ^ 1
    if not np.all(step1[partner[changed]]):
        raise ConstructionError("step 2 assignment without a step-1 partner")
    if not p2.is_monotone():
        raise ConstructionError("partial function not monotone after step 2")

    # step 3: every remaining entry copies coordinate 2
    rest = vals == UNSET
    vals[rest] = ((np.arange(1 << m) >> 1) & 1)[rest]
    f_half = BoolFn(m, vals == 1)
    if not is_monotone(f_half):
        raise ConstructionError("completed function is not monotone")
    if apply_minor(f_half, half_map(n)) != g:
        raise ConstructionError("diagonal minor of f_half differs from g")
    return HalfConstruction(g, f_half, p1, p2)


def build_f_half(n: int) -> BoolFn:
    return construct_half(n).f_half


def insert_dummy(f: BoolFn, position: int = 2) -> BoolFn:
    """f'(y_1..y_{k+1}) = f(y with coordinate ``position`` removed)."""
    n = f.arity + 1
    idx = np.arange(1 << n, dtype=np.int64)
    low = idx & ((1 << (position - 1)) - 1)
    high = idx >> position
    return BoolFn(n, f.table[low | (high << (position - 1))])


def build_f_full(n: int, f_half: BoolFn | None = None) -> BoolFn:
    if f_half is None:
        f_half = build_f_half(n)
    return insert_dummy(f_half, 2)


def exact_phi_g1(n: int) -> Fraction:
    return Fraction(len(window_levels(n)), n)


@dataclass(frozen=True)
class AdversarialReport:
    n: int
    phi_g: ShapleyVector
    phi_half: ShapleyVector
    phi_full: ShapleyVector
    minor_ok: bool

    @property
    def phi_g1(self) -> Fraction:
        return self.phi_g.value(1)

    @property
    def max_phi_g_rest(self) -> Fraction:
        return max(self.phi_g.values[1:])

    @property
    def phi_full3(self) -> Fraction:
        return self.phi_full.value(3)

    @property
    def max_phi_full_rest(self) -> Fraction:
        return max(v for i, v in enumerate(self.phi_full.values, 1) if i != 3)

    @property
    def argmax_g(self) -> int:
        return self.phi_g.argmax()

    @property
    def argmax_full(self) -> int:
        return self.phi_full.argmax()

    @property
    def disagree(self) -> bool:
        pi = ceil_half_map(self.n)
        return pi(self.argmax_full) != self.argmax_g

    @property
    def phi_g1_matches_window(self) -> bool:
        return self.phi_g1 == exact_phi_g1(self.n)

    @property
    def ok(self) -> bool:
        return (
            self.minor_ok
            and self.argmax_g == 1
            and self.argmax_full == 3
            and self.disagree
            and self.phi_g1_matches_window
            and self.phi_full.value(2) == 0
            and self.phi_full.total() == 1
        )

    @property
    def argmax_g_strict(self) -> bool:
        """Whether coordinate 1 beats every other coordinate of g strictly."""
        return self.phi_g1 > self.max_phi_g_rest

    def within_pair_equal(self) -> bool:
        """Phi_full equal inside each duplicated pair (2k-1, 2k), k >= 3.

        Pair k = 2 is (3, 4): coordinate 3 carries the influence and its
        partner 4 does not, so that pair is excluded.
        """
        v = self.phi_full.values
        return all(v[2 * k - 2] == v[2 * k - 1] for k in range(3, self.n + 1))

    def across_pairs_equal(self) -> bool:
        """Phi_full equal on all coordinates >= 5."""
        return len(set(self.phi_full.values[4:])) <= 1


def verify_theorem(n: int) -> AdversarialReport:
    half = construct_half(n)
    f_full = build_f_full(n, half.f_half)
    minor_ok = apply_minor(f_full, ceil_half_map(n)) == half.g
    return AdversarialReport(
        n,
        shapley_exact(half.g),
        shapley_exact(half.f_half),
        shapley_exact(f_full),
        minor_ok,
    )
