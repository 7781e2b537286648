"""Minors of Boolean functions and the random 2-to-1 maps used to take them."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Iterator, Sequence

import numpy as np

from .boolfn import BoolFn


@dataclass(frozen=True)
class VarMap:
    """A map [from_arity] -> [to_arity]; ``image[i-1]`` is the target of ``i``."""

    to_arity: int
    image: tuple[int, ...]

    def __post_init__(self):
        img = tuple(int(v) for v in self.image)
        if self.to_arity < 1:
            raise ValueError("to_arity must be positive")
        if len(img) < self.to_arity:
            raise ValueError("a minor cannot have larger arity than its source")
        bad = [v for v in img if not 1 <= v <= self.to_arity]
        if bad:
            raise ValueError(f"image entries {bad} outside [1, {self.to_arity}]")
        object.__setattr__(self, "image", img)

    @classmethod
    def of(cls, image: Sequence[int], to_arity: int | None = None) -> "VarMap":
        image = tuple(image)
        return cls(to_arity if to_arity is not None else max(image), image)

    @classmethod
    def parse(cls, text: str, to_arity: int | None = None) -> "VarMap":
        return cls.of([int(tok) for tok in text.replace(" ", "").split(",") if tok], to_arity)

    @property
    def from_arity(self) -> int:
        return len(self.image)

    def __call__(self, i: int) -> int:
        return self.image[i - 1]

    def preimage(self, j: int) -> tuple[int, ...]:
        return tuple(i for i, v in enumerate(self.image, 1) if v == j)

    @property
    def is_two_to_one(self) -> bool:
        m = self.to_arity
        if self.from_arity != 2 * m:
            return False
        counts = np.bincount(np.array(self.image), minlength=m + 1)[1:]
        return bool(np.all(counts == 2))

    def then(self, rho: "VarMap") -> "VarMap":
        """rho after self: i -> rho(self(i))."""
        if rho.from_arity != self.to_arity:
            raise ValueError("maps do not compose")
        return VarMap(rho.to_arity, tuple(rho(v) for v in self.image))

    def __str__(self):
        return ",".join(map(str, self.image))


def identity_map(n: int) -> VarMap:
    return VarMap(n, tuple(range(1, n + 1)))


def ceil_half_map(n: int) -> VarMap:
    """pi(i) = ceil(i/2) from [2n] to [n]."""
    return VarMap(n, tuple((i + 1) // 2 for i in range(1, 2 * n + 1)))


def minor_indices(pi: VarMap) -> np.ndarray:
    """Source-table index of every input of the minor."""
    m = pi.to_arity
    ys = np.arange(1 << m, dtype=np.int64)
    idx = np.zeros(1 << m, dtype=np.int64)
    for i, target in enumerate(pi.image):
        idx |= ((ys >> (target - 1)) & 1) << i
    return idx


def apply_minor(f: BoolFn, pi: VarMap) -> BoolFn:
    """g(x_1..x_m) = f(x_{pi(1)}, ..., x_{pi(n)})."""
    if pi.from_arity != f.arity:
        raise ValueError(f"map has domain [{pi.from_arity}] but f has arity {f.arity}")
    return BoolFn(pi.to_arity, f.table[minor_indices(pi)])


def sample_two_to_one(m: int, seed) -> VarMap:
    """Uniform element of F_{2->1}(m): shuffle [2m] and label consecutive pairs."""
    if m < 1:
        raise ValueError("m must be positive")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    order = rng.permutation(2 * m)
    image = [0] * (2 * m)
    for pos, elem in enumerate(order):
        image[elem] = pos // 2 + 1
    return VarMap(m, tuple(image))


def all_two_to_one(m: int) -> Iterator[VarMap]:
    """Every element of F_{2->1}(m), each once: (2m)!/2^m maps."""
    if m > 5:
        raise ValueError("exhaustive 2-to-1 enumeration is limited to m <= 5")
    for pairing in _matchings(list(range(1, 2 * m + 1))):
        for labels in permutations(range(1, m + 1)):
            image = [0] * (2 * m)
            for (a, b), lab in zip(pairing, labels):
                image[a - 1] = image[b - 1] = lab
            yield VarMap(m, tuple(image))


def _matchings(elems: list[int]) -> Iterator[list[tuple[int, int]]]:
    """Perfect matchings, pairing the smallest unpaired element first."""
    if not elems:
        yield []
        return
    first, rest = elems[0], elems[1:]
    for k, partner in enumerate(rest):
        for tail in _matchings(rest[:k] + rest[k + 1:]):
            yield [(first, partner)] + tail


def pi1_map(n2: int) -> VarMap:
    """pi_1(i) = max(i - 1, 1) from [n2] to [n2 - 1]."""
    return VarMap(n2 - 1, tuple(max(i - 1, 1) for i in range(1, n2 + 1)))


def pi1_collapse(f: BoolFn) -> BoolFn:
    """Identify coordinates 1 and 2 of a function of even arity >= 4."""
    if f.arity % 2 or f.arity < 4:
        raise ValueError(f"pi1_collapse needs even arity >= 4, got {f.arity}")
    return apply_minor(f, pi1_map(f.arity))


def _pairing_map(arity: int, pairs: list[tuple[int, int]]) -> VarMap:
    image = [0] * arity
    image[0] = 1
    for label, (a, b) in enumerate(sorted(pairs), start=2):
        image[a - 1] = image[b - 1] = label
    return VarMap((arity + 1) // 2, tuple(image))


def enumerate_pairings(n: int) -> list[VarMap]:
    """All maps [2n-1] -> [n] fixing 1 and pairing {2..2n-1} into outputs 2..n.

    Pairs are labelled in order of their smallest element.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if n > 8:
        raise ValueError("pairing enumeration is limited to n <= 8")
    arity = 2 * n - 1
    return [_pairing_map(arity, p) for p in _matchings(list(range(2, arity + 1)))]


def sample_pairing(arity: int, seed) -> VarMap:
    if arity % 2 == 0 or arity < 1:
        raise ValueError(f"pairing needs odd arity, got {arity}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    rest = [int(v) + 2 for v in rng.permutation(arity - 1)]
    pairs = [tuple(sorted(rest[k:k + 2])) for k in range(0, arity - 1, 2)]
    return _pairing_map(arity, pairs)


def pi2_pairing(fprime: BoolFn, seed) -> tuple[BoolFn, VarMap]:
    """Random minor of an odd-arity function that keeps coordinate 1 alone."""
    if fprime.arity % 2 == 0 or fprime.arity < 3:
        raise ValueError(f"pi2_pairing needs odd arity >= 3, got {fprime.arity}")
    pi = sample_pairing(fprime.arity, seed)
    return apply_minor(fprime, pi), pi


def canonical_relabel(pi: VarMap) -> VarMap:
    """Relabel outputs: the block of source coordinate 1 becomes 1, others by smallest element."""
    order: dict[int, int] = {}
    for v in pi.image:
        if v not in order:
            order[v] = len(order) + 1
    return VarMap(pi.to_arity, tuple(order[v] for v in pi.image))
