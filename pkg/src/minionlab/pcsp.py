"""Boolean promise-CSP templates, instances and polymorphisms.

Relations are explicit sets of 0/1 tuples.  Both sides of a template share
the Boolean domain and the identity homomorphism, so every pair must
satisfy A <= B.  Pair indices and instance variables are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .boolfn import BoolFn, all_monotone

MAX_RELATION_ARITY = 6
POLY_CHECK_LIMIT = 10**7
MAX_BRUTE_VARS = 24

Relation = frozenset  # of tuple[int, ...]


class TemplateError(ValueError):
    pass


def relation(tuples: Iterable) -> Relation:
    out = set()
    for t in tuples:
        if isinstance(t, str):
            t = tuple(int(c) for c in t)
        out.add(tuple(int(v) for v in t))
    return frozenset(out)


def weight_relation(k: int, weights: Iterable[int]) -> Relation:
    ws = set(weights)
    return frozenset(t for t in product((0, 1), repeat=k) if sum(t) in ws)


IMPLICATION = relation(["00", "01", "11"])
NEQ = relation(["01", "10"])
ONE_IN_THREE = weight_relation(3, [1])
NAE3 = weight_relation(3, [1, 2])
TWO_SAT_CLAUSES = (
    relation(["01", "10", "11"]),  # x or y
    relation(["00", "10", "11"]),  # x or not y
    relation(["00", "01", "10"]),  # not x or not y
)


@dataclass(frozen=True)
class RelationPair:
    A: Relation
    B: Relation
    k: int

    def __post_init__(self):
        if not 1 <= self.k <= MAX_RELATION_ARITY:
            raise TemplateError(f"relation arity {self.k} outside [1, {MAX_RELATION_ARITY}]")
        for side, rel in (("A", self.A), ("B", self.B)):
            for t in rel:
                if len(t) != self.k or any(v not in (0, 1) for v in t):
                    raise TemplateError(f"bad tuple {t} in {side} for arity {self.k}")
        if not self.A <= self.B:
            raise TemplateError(
                "A is not contained in B; only the identity homomorphism is supported"
            )

    @classmethod
    def of(cls, A, B=None) -> "RelationPair":
        A = relation(A)
        B = A if B is None else relation(B)
        k = len(next(iter(A | B))) if A | B else 0
        return cls(A, B, k)


@dataclass(frozen=True)
class Template:
    pairs: tuple[RelationPair, ...]

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(self.pairs))

    @property
    def ordered(self) -> bool:
        return validate_ordered(self)

    def with_pair(self, pair: RelationPair) -> "Template":
        return Template(self.pairs + (pair,))


def validate_ordered(t: Template) -> bool:
    return any(p.A == IMPLICATION and p.B == IMPLICATION for p in t.pairs)


def ordered_1in3_nae() -> Template:
    return Template((RelationPair.of(ONE_IN_THREE, NAE3), RelationPair.of(IMPLICATION)))


def two_sat_template() -> Template:
    return Template(tuple(RelationPair.of(r) for r in TWO_SAT_CLAUSES))


@dataclass(frozen=True)
class Instance:
    num_vars: int
    constraints: tuple[tuple[int, tuple[int, ...]], ...]

    def __post_init__(self):
        cons = tuple((int(p), tuple(int(v) for v in scope)) for p, scope in self.constraints)
        for p, scope in cons:
            for v in scope:
                if not 0 <= v < self.num_vars:
                    raise ValueError(f"variable {v} outside [0, {self.num_vars})")
        object.__setattr__(self, "constraints", cons)

    def check_against(self, t: Template) -> None:
        for p, scope in self.constraints:
            if not 0 <= p < len(t.pairs):
                raise ValueError(f"pair index {p} outside template")
            if len(scope) != t.pairs[p].k:
                raise ValueError(f"scope {scope} does not match arity {t.pairs[p].k}")

    def satisfied_by(self, t: Template, assignment: Sequence[int], side: str = "strong") -> bool:
        for p, scope in self.constraints:
            rel = t.pairs[p].A if side == "strong" else t.pairs[p].B
            if tuple(int(assignment[v]) for v in scope) not in rel:
                return False
        return True


# ---------------------------------------------------------------------------
# polymorphisms


def _row_indices(A: Relation, n: int) -> np.ndarray:
    """For every choice of n columns from A, the table index of each of the k rows.

    Shape (|A|**n, k).
    """
    tuples = np.array(sorted(A), dtype=np.int64).reshape(len(A), -1)
    k = tuples.shape[1]
    grids = np.indices((len(A),) * n).reshape(n, -1).T  # (|A|^n, n) column choices
    rows = np.zeros((grids.shape[0], k), dtype=np.int64)
    for j in range(n):
        rows |= tuples[grids[:, j]] << j
    return rows


def _membership(B: Relation, k: int) -> np.ndarray:
    lut = np.zeros(1 << k, dtype=bool)
    for t in B:
        lut[sum(v << p for p, v in enumerate(t))] = True
    return lut


def check_polymorphism(f: BoolFn, t: Template) -> bool:
    n = f.arity
    for pair in t.pairs:
        if not pair.A:
            continue
        if len(pair.A) ** n > POLY_CHECK_LIMIT:
            raise ValueError("too large, use sampling")
        rows = _row_indices(pair.A, n)
        out = f.table[rows].astype(np.int64)
        codes = (out << np.arange(pair.k)).sum(axis=1)
        if not _membership(pair.B, pair.k)[codes].all():
            return False
    return True


def enumerate_polymorphisms(t: Template, n: int, monotone_only: bool = False) -> list[BoolFn]:
    if not 1 <= n <= 4:
        raise ValueError("polymorphism enumeration is limited to arity <= 4")
    if monotone_only:
        tables = np.array([f.table for f in all_monotone(n)])
    else:
        codes = np.arange(1 << (1 << n), dtype=np.int64)
        tables = ((codes[:, None] >> np.arange(1 << n)) & 1).astype(bool)
    keep = np.ones(len(tables), dtype=bool)
    for pair in t.pairs:
        if not pair.A:
            continue
        rows = _row_indices(pair.A, n)
        lut = _membership(pair.B, pair.k)
        weights = np.int64(1) << np.arange(pair.k)
        for start in range(0, len(tables), 4096):
            block = tables[start:start + 4096]
            out = block[:, rows].astype(np.int64)  # (b, |A|^n, k)
            ok = lut[(out * weights).sum(axis=2)].all(axis=1)
            keep[start:start + 4096] &= ok
    return [BoolFn(n, tab) for tab in tables[keep]]


# ---------------------------------------------------------------------------
# brute force


def brute_force_solutions(inst: Instance, t: Template, side: str = "strong") -> np.ndarray:
    """Mask over all 2**num_vars assignments (bit v of the index is variable v)."""
    if side not in ("strong", "weak"):
        raise ValueError("side must be 'strong' or 'weak'")
    inst.check_against(t)
    N = inst.num_vars
    if N > MAX_BRUTE_VARS:
        raise ValueError(f"brute force limited to {MAX_BRUTE_VARS} variables")
    idx = np.arange(1 << N, dtype=np.int64)
    ok = np.ones(1 << N, dtype=bool)
    for p, scope in inst.constraints:
        pair = t.pairs[p]
        lut = _membership(pair.A if side == "strong" else pair.B, pair.k)
        code = np.zeros(1 << N, dtype=np.int64)
        for pos, v in enumerate(scope):
            code |= ((idx >> v) & 1) << pos
        ok &= lut[code]
    return ok


def brute_force_decide(inst: Instance, t: Template, side: str = "strong") -> bool:
    return bool(brute_force_solutions(inst, t, side).any())


# ---------------------------------------------------------------------------
# text formats


def parse_template(text: str) -> Template:
    pairs = []
    cur: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            if line.startswith("pair"):
                if cur:
                    pairs.append(_finish_pair(cur))
                k = int(line.split("k=")[1])
                cur = {"k": k, "line": lineno}
            elif line.startswith("A:") or line.startswith("B:"):
                if not cur:
                    raise ValueError("relation before 'pair'")
                cur[line[0]] = relation(line[2:].split())
            else:
                raise ValueError(f"unrecognised line {line!r}")
        except (ValueError, IndexError, TemplateError) as exc:
            raise TemplateError(f"line {lineno}: {exc}") from None
    if cur:
        pairs.append(_finish_pair(cur))
    return Template(tuple(pairs))


def _finish_pair(cur: dict) -> RelationPair:
    try:
        return RelationPair(cur.get("A", frozenset()), cur.get("B", cur.get("A", frozenset())), cur["k"])
    except TemplateError as exc:
        raise TemplateError(f"line {cur['line']}: {exc}") from None


def _bits(t) -> str:
    return "".join(map(str, t))


def format_template(t: Template) -> str:
    out = []
    for p in t.pairs:
        out.append(f"pair k={p.k}")
        out.append("A: " + " ".join(sorted(map(_bits, p.A))))
        out.append("B: " + " ".join(sorted(map(_bits, p.B))))
    return "\n".join(out) + "\n"


def parse_instance(text: str) -> Instance:
    num_vars = None
    cons = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if parts[0] == "vars":
                num_vars = int(parts[1])
            elif parts[0] == "c":
                cons.append((int(parts[1]), tuple(int(v) for v in parts[2:])))
            else:
                raise ValueError(f"unrecognised line {line!r}")
        except (ValueError, IndexError) as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if num_vars is None:
        raise ValueError("line 1: missing 'vars <N>'")
    return Instance(num_vars, tuple(cons))


def format_instance(inst: Instance) -> str:
    lines = [f"vars {inst.num_vars}"]
    lines += [f"c {p} " + " ".join(map(str, scope)) for p, scope in inst.constraints]
    return "\n".join(lines) + "\n"


def random_instance(t: Template, num_vars: int, num_constraints: int, rng) -> Instance:
    cons = []
    for _ in range(num_constraints):
        p = int(rng.integers(len(t.pairs)))
        scope = tuple(int(v) for v in rng.integers(num_vars, size=t.pairs[p].k))
        cons.append((p, scope))
    return Instance(num_vars, tuple(cons))
