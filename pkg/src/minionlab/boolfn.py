"""Truth-table Boolean functions and the level statistics built on them.

A function of arity ``n`` is stored as a read-only numpy bool array of
length ``2**n``.  Entry ``idx`` holds ``f(x)`` where coordinate ``i``
(1-based) is bit ``i - 1`` of ``idx``.  Coordinates in the public API are
1-based; subsets of ``[n]`` may be given either as iterables of
coordinates or as an already-encoded integer index.

All measures are exact: counts come out of numpy as integers and are
turned into :class:`fractions.Fraction` before any arithmetic.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Iterable, Sequence

import numpy as np

DEFAULT_ARITY_CAP = 24
DEFAULT_TOL = Fraction(1, 2**40)


class ArityError(ValueError):
    pass


class NotMonotoneError(ValueError):
    pass


class ConstantFunctionError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


def arity_cap() -> int:
    raw = os.environ.get("MINIONLAB_ARITY_CAP")
    return int(raw) if raw else DEFAULT_ARITY_CAP


# ---------------------------------------------------------------------------
# bit helpers

_POPCOUNT_CACHE: dict[int, np.ndarray] = {}


def popcounts(n: int) -> np.ndarray:
    """Hamming weight of every index in ``range(2**n)`` (cached, read-only)."""
    pc = _POPCOUNT_CACHE.get(n)
    if pc is None:
        pc = np.zeros(1, dtype=np.uint8)
        for _ in range(n):
            pc = np.concatenate([pc, pc + 1])
        pc.flags.writeable = False
        _POPCOUNT_CACHE[n] = pc
    return pc


def encode(coords: Iterable[int] | int, n: int) -> int:
    if isinstance(coords, (int, np.integer)):
        idx = int(coords)
        if not 0 <= idx < (1 << n):
            raise ValueError(f"index {idx} does not fit arity {n}")
        return idx
    idx = 0
    for c in coords:
        if not 1 <= c <= n:
            raise ValueError(f"coordinate {c} outside [1, {n}]")
        idx |= 1 << (c - 1)
    return idx


def decode_index(idx: int, n: int) -> frozenset[int]:
    return frozenset(i + 1 for i in range(n) if idx >> i & 1)


def _halves(arr: np.ndarray, bit: int) -> tuple[np.ndarray, np.ndarray]:
    """Views of ``arr`` split on ``bit``: (entries with bit clear, bit set)."""
    v = arr.reshape(-1, 2, 1 << bit)
    return v[:, 0, :], v[:, 1, :]


def up_closure(mask: np.ndarray, n: int) -> np.ndarray:
    """Smallest up-set containing ``mask`` (superset OR transform)."""
    out = np.array(mask, dtype=bool, copy=True)
    for b in range(n):
        lo, hi = _halves(out, b)
        hi |= lo
    return out


def down_closure(mask: np.ndarray, n: int) -> np.ndarray:
    out = np.array(mask, dtype=bool, copy=True)
    for b in range(n):
        lo, hi = _halves(out, b)
        lo |= hi
    return out


# ---------------------------------------------------------------------------
# BoolFn


@dataclass(frozen=True, eq=False)
class BoolFn:
    arity: int
    table: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = self.arity
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise ArityError(f"arity must be a positive integer, got {n!r}")
        if n > arity_cap():
            raise ArityError(f"arity {n} exceeds cap {arity_cap()}")
        t = np.asarray(self.table)
        if t.ndim != 1 or t.shape[0] != 1 << n:
            raise ValueError(f"table length must be 2**{n}, got {t.shape}")
        t = t.astype(bool, copy=True)
        t.flags.writeable = False
        object.__setattr__(self, "arity", int(n))
        object.__setattr__(self, "table", t)

    def __call__(self, x: Iterable[int] | int) -> int:
        return evaluate(self, x)

    def __eq__(self, other):
        if not isinstance(other, BoolFn):
            return NotImplemented
        return self.arity == other.arity and np.array_equal(self.table, other.table)

    def __hash__(self):
        return hash((self.arity, self.table.tobytes()))

    def __repr__(self):
        return f"BoolFn(arity={self.arity}, hex={to_hex(self)})"

    @property
    def is_constant(self) -> bool:
        return bool(self.table.all() or not self.table.any())

    @classmethod
    def from_callable(cls, n: int, fn) -> "BoolFn":
        """Build from a predicate on the frozenset of 1-based coordinates set to 1."""
        return cls(n, np.array([bool(fn(decode_index(i, n))) for i in range(1 << n)]))

    @classmethod
    def from_weight_rule(cls, n: int, rule) -> "BoolFn":
        """Build a symmetric function from a predicate on the Hamming weight."""
        pc = popcounts(n)
        lut = np.array([bool(rule(k)) for k in range(n + 1)])
        return cls(n, lut[pc])


def evaluate(f: BoolFn, x: Iterable[int] | int) -> int:
    return int(f.table[encode(x, f.arity)])


def constant(n: int, value: int) -> BoolFn:
    return BoolFn(n, np.full(1 << n, bool(value)))


def dictator(n: int, i: int = 1) -> BoolFn:
    if not 1 <= i <= n:
        raise ValueError(f"coordinate {i} outside [1, {n}]")
    idx = np.arange(1 << n)
    return BoolFn(n, (idx >> (i - 1)) & 1)


def parity(n: int) -> BoolFn:
    return BoolFn(n, popcounts(n) & 1)


def make_threshold(L: int, tau: int) -> BoolFn:
    """THR_{L,tau}: 1 iff the Hamming weight is at least ``tau``."""
    if L < 1:
        raise ValueError(f"L must be positive, got {L}")
    if not 0 <= tau <= L:
        raise ValueError(f"tau must lie in [0, {L}], got {tau}")
    return BoolFn(L, popcounts(L) >= tau)


def majority(n: int) -> BoolFn:
    if n % 2 == 0:
        raise ValueError("majority is defined here for odd arity only")
    return make_threshold(n, (n + 1) // 2)


def is_monotone(f: BoolFn) -> bool:
    cached = f.__dict__.get("_monotone")
    if cached is not None:
        return cached
    t = f.table
    result = True
    for b in range(f.arity):
        lo, hi = _halves(t, b)
        if np.any(lo & ~hi):
            result = False
            break
    object.__setattr__(f, "_monotone", result)
    return result


def require_monotone(f: BoolFn) -> None:
    if not is_monotone(f):
        raise NotMonotoneError("function is not monotone")


def dual(f: BoolFn) -> BoolFn:
    """f'(x) = 1 - f(complement of x); complementing an index reverses the table."""
    return BoolFn(f.arity, ~f.table[::-1])


# ---------------------------------------------------------------------------
# level statistics


@dataclass(frozen=True)
class LevelProfile:
    """Boundary densities ``mu[i-1][j]`` of coordinate ``i`` at level ``j``."""

    arity: int
    counts: tuple[tuple[int, ...], ...]

    @property
    def mu(self) -> tuple[tuple[Fraction, ...], ...]:
        n = self.arity
        return tuple(
            tuple(Fraction(c, comb(n - 1, j)) for j, c in enumerate(row))
            for row in self.counts
        )

    def density(self, coord: int, level: int) -> Fraction:
        return Fraction(self.counts[coord - 1][level], comb(self.arity - 1, level))

    def row(self, coord: int) -> tuple[Fraction, ...]:
        return self.mu[coord - 1]


def boundary_mask(f: BoolFn, coord: int) -> np.ndarray:
    """Boundary indicator over the 2**(n-1) sets avoiding ``coord``.

    Position k corresponds to the k-th full index with bit ``coord`` clear,
    in increasing order; ``boundary_sets`` maps positions back to indices.
    """
    lo, hi = _halves(f.table, coord - 1)
    return (~lo & hi).ravel()


def _low_indices(n: int, coord: int) -> np.ndarray:
    lo, _ = _halves(np.arange(1 << n), coord - 1)
    return lo.ravel()


def boundary_sets(f: BoolFn, coord: int) -> np.ndarray:
    """Full table indices of the sets in the boundary of ``coord``."""
    return _low_indices(f.arity, coord)[boundary_mask(f, coord)]


def boundary_counts(f: BoolFn, coord: int) -> list[int]:
    n = f.arity
    pc = popcounts(n)
    lo, _ = _halves(pc, coord - 1)
    levels = lo.ravel()[boundary_mask(f, coord)]
    return [int(c) for c in np.bincount(levels, minlength=n)[:n]]


def boundary_profile(f: BoolFn) -> LevelProfile:
    require_monotone(f)
    return LevelProfile(
        f.arity, tuple(tuple(boundary_counts(f, i)) for i in range(1, f.arity + 1))
    )


def in_boundary(f: BoolFn, coord: int, s: Iterable[int] | int) -> bool:
    idx = encode(s, f.arity)
    bit = 1 << (coord - 1)
    if idx & bit:
        return False
    return (not f.table[idx]) and bool(f.table[idx | bit])


def sandwich_check(f: BoolFn, coord: int, s1, s2) -> bool:
    """True iff every S with s1 <= S <= s2 lies in the boundary of ``coord``."""
    n = f.arity
    a, b = encode(s1, n), encode(s2, n)
    if a & ~b:
        raise PreconditionError("s1 is not a subset of s2")
    if (a | b) >> (coord - 1) & 1:
        raise PreconditionError(f"sets must avoid coordinate {coord}")
    if not (in_boundary(f, coord, a) and in_boundary(f, coord, b)):
        raise PreconditionError("s1 and s2 must both lie in the boundary")
    free = b & ~a
    sub = free
    while True:
        if not in_boundary(f, coord, a | sub):
            return False
        if sub == 0:
            return True
        sub = (sub - 1) & free


# ---------------------------------------------------------------------------
# biased measure and its crossings


def level_weights(f: BoolFn) -> list[int]:
    """W_k = number of inputs of Hamming weight k on which f is 1."""
    pc = popcounts(f.arity)
    return [int(c) for c in np.bincount(pc[f.table], minlength=f.arity + 1)]


def _check_p(p) -> Fraction:
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    return p


def _measure_from_weights(weights: Sequence[int], p: Fraction) -> Fraction:
    n = len(weights) - 1
    q = 1 - p
    return sum(
        (w * p**k * q ** (n - k) for k, w in enumerate(weights) if w), Fraction(0)
    )


def biased_measure(f: BoolFn, p) -> Fraction:
    """P_p(f): probability f = 1 when each bit is 1 independently with probability p."""
    return _measure_from_weights(level_weights(f), _check_p(p))


@dataclass(frozen=True)
class Bracket:
    """Closed interval known to contain a root; ``lo == hi`` means exact."""

    lo: Fraction
    hi: Fraction

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def exact(self) -> bool:
        return self.lo == self.hi

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi


def _require_nonconstant_monotone(f: BoolFn) -> None:
    require_monotone(f)
    if f.is_constant:
        raise ConstantFunctionError("biased measure of a constant never crosses")


def measure_root(f: BoolFn, target, tol=DEFAULT_TOL) -> Bracket:
    """Bracket the unique p in [0,1] with P_p(f) = target by dyadic bisection.

    Requires f monotone and non-constant, and 0 < target < 1 (P_p is then a
    strictly increasing bijection of [0, 1]).
    """
    _require_nonconstant_monotone(f)
    target = Fraction(target)
    if not 0 < target < 1:
        raise ValueError(f"target must lie strictly inside (0, 1), got {target}")
    tol = Fraction(tol)
    if tol <= 0:
        raise ValueError("tol must be positive")
    weights = level_weights(f)
    lo, hi = Fraction(0), Fraction(1)
    while hi - lo > tol:
        mid = (lo + hi) / 2
        val = _measure_from_weights(weights, mid)
        if val == target:
            return Bracket(mid, mid)
        if val < target:
            lo = mid
        else:
            hi = mid
    return Bracket(lo, hi)


def critical_bracket(f: BoolFn, tol=DEFAULT_TOL) -> Bracket:
    return measure_root(f, Fraction(1, 2), tol)


def critical_probability(f: BoolFn, tol=DEFAULT_TOL) -> Fraction:
    """p_c(f), returned as the midpoint of a bracket of width at most ``tol``."""
    return critical_bracket(f, tol).mid


def threshold_interval(f: BoolFn, eps, tol=DEFAULT_TOL) -> tuple[Fraction, Fraction]:
    """Midpoints of the brackets for P_p(f) = eps and P_p(f) = 1 - eps."""
    b1, b2 = threshold_brackets(f, eps, tol)
    return b1.mid, b2.mid


def threshold_brackets(f: BoolFn, eps, tol=DEFAULT_TOL) -> tuple[Bracket, Bracket]:
    eps = Fraction(eps)
    if not 0 < eps < Fraction(1, 2):
        raise ValueError(f"eps must lie in (0, 1/2), got {eps}")
    return measure_root(f, eps, tol), measure_root(f, 1 - eps, tol)


def russo_inequality_check(f: BoolFn, nu, tol=DEFAULT_TOL, max_refinements: int = 8):
    """Check P_{p1}(f) >= 1 - nu at p1 = p_c / (2 nu)^2.

    Returns True or False when the verdict holds at both ends of the p_c
    bracket, or None when the bracket straddles the decision after
    ``max_refinements`` halvings of ``tol``.  Raises PreconditionError when
    p_c > 1/2 or p1 > 1/2 (checked on the bracket; straddling also raises).
    """
    _require_nonconstant_monotone(f)
    nu = Fraction(nu)
    if nu <= 0:
        raise PreconditionError("nu must be positive")
    scale = 1 / (2 * nu) ** 2
    half = Fraction(1, 2)
    weights = level_weights(f)
    tol = Fraction(tol)
    for _ in range(max_refinements + 1):
        br = critical_bracket(f, tol)
        if br.lo > half or br.lo * scale > half:
            raise PreconditionError(
                f"precondition unmet: p_c in [{float(br.lo)}, {float(br.hi)}], "
                f"p1 = p_c * {scale}"
            )
        if br.hi > half or br.hi * scale > half:
            tol /= 2**16
            continue
        if scale == 1:
            # p1 = p_c, where P is exactly 1/2
            return half >= 1 - nu
        low_val = _measure_from_weights(weights, br.lo * scale)
        high_val = _measure_from_weights(weights, br.hi * scale)
        if low_val >= 1 - nu:
            return True
        if high_val < 1 - nu:
            return False
        tol /= 2**16
    return None


# ---------------------------------------------------------------------------
# enumeration and sampling of monotone functions


def all_monotone(n: int) -> list[BoolFn]:
    """Every monotone function of arity n (Dedekind numbers: 3, 6, 20, 168, 7581)."""
    if n < 1:
        raise ValueError("n must be positive")
    if n > 5:
        raise ArityError("exhaustive enumeration is limited to arity 5")
    tables = [np.array([False, False]), np.array([False, True]), np.array([True, True])]
    for _ in range(n - 1):
        nxt = []
        for lo in tables:
            for hi in tables:
                if not np.any(lo & ~hi):
                    nxt.append(np.concatenate([lo, hi]))
        tables = nxt
    return [BoolFn(n, t) for t in tables]


def random_monotone(n: int, rng: np.random.Generator, nonconstant: bool = True) -> BoolFn:
    """Up-closure of a few random points drawn around a random Hamming level."""
    pc = popcounts(n)
    while True:
        centre = rng.integers(0, n + 1)
        spread = rng.integers(0, n // 2 + 1)
        k = int(rng.integers(1, 2 + n))
        lvl = np.clip(rng.integers(centre - spread, centre + spread + 1, size=k), 0, n)
        seeds = np.zeros(1 << n, dtype=bool)
        for level in lvl:
            cands = np.flatnonzero(pc == level)
            seeds[rng.choice(cands)] = True
        f = BoolFn(n, up_closure(seeds, n))
        if not nonconstant or not f.is_constant:
            return f


# ---------------------------------------------------------------------------
# text file format: "arity=<n>" then the table as a hex integer, index 0 in
# the least-significant bit


class FormatError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        super().__init__(f"line {line}: {msg}" if line is not None else msg)
        self.line = line


def to_hex(f: BoolFn) -> str:
    n = f.arity
    digits = max(1, -(-(1 << n) // 4))
    bits = np.packbits(f.table, bitorder="little")
    value = int.from_bytes(bits.tobytes(), "little")
    return format(value, f"0{digits}x")


def from_hex(n: int, text: str) -> BoolFn:
    value = int(text, 16)
    if value >> (1 << n):
        raise ValueError(f"hex value has bits beyond 2**{n} entries")
    nbytes = max(1, (1 << n) // 8)
    raw = np.frombuffer(value.to_bytes(nbytes, "little"), dtype=np.uint8)
    bits = np.unpackbits(raw, bitorder="little")[: 1 << n]
    return BoolFn(n, bits.astype(bool))


def dumps(f: BoolFn) -> str:
    return f"arity={f.arity}\n{to_hex(f)}\n"


def loads(text: str) -> BoolFn:
    lines = [ln.strip() for ln in text.splitlines()]
    while lines and not lines[-1]:
        lines.pop()
    if not lines or not lines[0].startswith("arity="):
        raise FormatError("expected 'arity=<n>'", 1)
    try:
        n = int(lines[0][len("arity="):])
    except ValueError:
        raise FormatError(f"bad arity {lines[0]!r}", 1) from None
    if n < 1:
        raise FormatError("arity must be positive", 1)
    if len(lines) != 2:
        raise FormatError("expected exactly one hex line after the arity", min(len(lines), 3))
    digits = -(-(1 << n) // 4)
    hexline = lines[1]
    if len(hexline) != digits:
        raise FormatError(f"expected {digits} hex digits, got {len(hexline)}", 2)
    try:
        return from_hex(n, hexline)
    except ValueError as exc:
        raise FormatError(str(exc), 2) from None


def read_fn(path) -> BoolFn:
    with open(path) as fh:
        return loads(fh.read())


def write_fn(f: BoolFn, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(f))
