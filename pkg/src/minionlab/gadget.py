"""Rich 2-to-1 Label Cover instances and their long-code reduction to a PCSP instance.

Left vertices carry labels in [2*sigma], right vertices labels in [sigma].
Every edge (u, v) carries a 2-to-1 projection pi: [2*sigma] -> [sigma]; a
labelling satisfies it when pi(label(u)) == label(v).

The reduction gives each vertex w a block of long-code nodes indexed by
x in {0,1}^{sigma_w} (encoded as integers, bit j-1 = x_j), adds one
constraint per template pair and per admissible choice of columns, and
identifies {u, x} with {v, y} whenever x_j = y_{pi(j)} for all j.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from .boolfn import BoolFn, is_monotone
from .minors import VarMap, all_two_to_one, minor_indices
from .pcsp import Instance, Template, check_polymorphism
from .shapley import DecodeSet, decode, shapley_exact

MAX_SIGMA = 3
MAX_NODES = 2**22


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    proj: VarMap


@dataclass(frozen=True)
class LabelCover:
    sigma: int
    num_left: int
    num_right: int
    edges: tuple[Edge, ...]
    planted: tuple[tuple[int, ...], tuple[int, ...]] | None = None  # (left labels, right labels)

    def left_degree(self, u: int) -> int:
        return sum(1 for e in self.edges if e.u == u)

    def satisfied_fraction(self, left: list[int], right: list[int]) -> Fraction:
        if not self.edges:
            return Fraction(1)
        good = sum(1 for e in self.edges if e.proj(left[e.u]) == right[e.v])
        return Fraction(good, len(self.edges))

    def is_rich(self) -> bool:
        maps = list(all_two_to_one(self.sigma))
        for u in range(self.num_left):
            seen: dict = {}
            for e in self.edges:
                if e.u == u:
                    seen[e.proj.image] = seen.get(e.proj.image, 0) + 1
            counts = [seen.get(m.image, 0) for m in maps]
            if len(seen) != len(maps) or len(set(counts)) != 1:
                return False
        return all(e.proj.is_two_to_one for e in self.edges)


def make_rich_instance(sigma: int, copies: int, num_left: int = 1,
                       num_right: int | None = None, seed: int = 0) -> LabelCover:
    """Every left vertex gets one edge per 2-to-1 map, ``copies`` times over.

    A labelling is planted: right endpoints are drawn among right vertices
    whose planted label agrees with the projected left label, so the
    instance is fully satisfiable.
    """
    if not 1 <= sigma <= MAX_SIGMA:
        raise ValueError(f"sigma must lie in [1, {MAX_SIGMA}]")
    if copies < 1 or num_left < 1:
        raise ValueError("copies and num_left must be positive")
    maps = list(all_two_to_one(sigma))
    rng = np.random.default_rng(seed)
    if num_right is None:
        num_right = max(sigma, len(maps) * copies * num_left // 2)
    if num_right < sigma:
        raise ValueError("need at least sigma right vertices to plant every label")
    right_labels = [i % sigma + 1 for i in range(num_right)]
    rng.shuffle(right_labels)
    by_label = {lab: [v for v, l in enumerate(right_labels) if l == lab] for lab in range(1, sigma + 1)}
    left_labels = [int(rng.integers(1, 2 * sigma + 1)) for _ in range(num_left)]
    edges = []
    for u in range(num_left):
        for _ in range(copies):
            for pi in maps:
                pool = by_label[pi(left_labels[u])]
                edges.append(Edge(u, int(pool[rng.integers(len(pool))]), pi))
    return LabelCover(sigma, num_left, num_right, tuple(edges),
                      (tuple(left_labels), tuple(right_labels)))


# ---------------------------------------------------------------------------
# union-find


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


# ---------------------------------------------------------------------------
# reduction


@dataclass
class ReducedInstance:
    lc: LabelCover
    instance: Instance
    block_offset: dict  # ("L"|"R", vertex) -> first raw node id
    node_class: list[int]  # raw node id -> instance variable
    polymorphism_constraints: int = 0
    equality_merges: int = 0

    def block_size(self, side: str) -> int:
        return 1 << (2 * self.lc.sigma if side == "L" else self.lc.sigma)

    def block_vars(self, side: str, w: int) -> list[int]:
        start = self.block_offset[(side, w)]
        return self.node_class[start:start + self.block_size(side)]

    def block_function(self, side: str, w: int, assignment) -> BoolFn:
        arity = 2 * self.lc.sigma if side == "L" else self.lc.sigma
        vals = np.array([int(assignment[c]) for c in self.block_vars(side, w)], dtype=bool)
        return BoolFn(arity, vals)

    def dictator_assignment(self, left: list[int], right: list[int]) -> list[int]:
        values = [None] * self.instance.num_vars
        for side, labels in (("L", left), ("R", right)):
            for w, lab in enumerate(labels):
                for x, var in enumerate(self.block_vars(side, w)):
                    bit = (x >> (lab - 1)) & 1
                    if values[var] is not None and values[var] != bit:
                        raise ValueError("labelling is inconsistent with the equality merges")
                    values[var] = bit
        return [0 if v is None else v for v in values]


def reduce(lc: LabelCover, t: Template) -> ReducedInstance:
    sig_l, sig_r = 2 * lc.sigma, lc.sigma
    offsets = {}
    nxt = 0
    for u in range(lc.num_left):
        offsets[("L", u)] = nxt
        nxt += 1 << sig_l
    for v in range(lc.num_right):
        offsets[("R", v)] = nxt
        nxt += 1 << sig_r
    if nxt > MAX_NODES:
        raise ValueError("reduction too large")
    uf = UnionFind(nxt)
    merges = 0
    for e in lc.edges:
        # x_j = y_{pi(j)}: x is the pi-minor index of y
        xs = minor_indices(VarMap(sig_r, e.proj.image))
        base_u, base_v = offsets[("L", e.u)], offsets[("R", e.v)]
        for y, x in enumerate(xs):
            uf.union(base_u + int(x), base_v + y)
            merges += 1
    roots = [uf.find(a) for a in range(nxt)]
    relabel: dict[int, int] = {}
    node_class = [relabel.setdefault(r, len(relabel)) for r in roots]

    cons = []
    seen = set()
    for side, count, width in (("L", lc.num_left, sig_l), ("R", lc.num_right, sig_r)):
        for w in range(count):
            base = offsets[(side, w)]
            for p, pair in enumerate(t.pairs):
                tuples = sorted(pair.A)
                for cols in product(tuples, repeat=width):
                    # row r of the chosen columns is the long-code point x^r
                    scope = tuple(
                        node_class[base + sum(col[r] << j for j, col in enumerate(cols))]
                        for r in range(pair.k)
                    )
                    key = (p, scope)
                    if key not in seen:
                        seen.add(key)
                        cons.append(key)
    inst = Instance(len(relabel), tuple(cons))
    return ReducedInstance(lc, inst, offsets, node_class, len(cons), merges)


# ---------------------------------------------------------------------------
# soundness decoding


class InvalidAssignment(ValueError):
    pass


@dataclass(frozen=True)
class SoundnessResult:
    fraction: Fraction
    left_sets: tuple[DecodeSet, ...]
    right_sets: tuple[DecodeSet, ...]
    degenerate: tuple[str, ...] = field(default_factory=tuple)

    @property
    def max_left_set(self) -> int:
        return max((len(s.coordinates) for s in self.left_sets), default=0)


def soundness_experiment(red: ReducedInstance, t: Template, assignment, lam,
                         seed: int = 0, trials: int = 200, lam_right=None) -> SoundnessResult:
    """Decode every block by Shapley value, then label uniformly from the decoded sets.

    Returns the satisfied fraction of label-cover edges averaged over trials
    (exact as a Fraction).  Empty decode sets (constant blocks) leave their
    edges unsatisfied and are listed in ``degenerate``.
    """
    lam = Fraction(lam)
    lam_right = lam if lam_right is None else Fraction(lam_right)
    if not red.instance.satisfied_by(t, assignment, "weak"):
        raise InvalidAssignment("assignment does not satisfy the reduced instance")
    lc = red.lc
    sets = {}
    degenerate = []
    for side, count, threshold in (("L", lc.num_left, lam), ("R", lc.num_right, lam_right)):
        for w in range(count):
            f = red.block_function(side, w, assignment)
            if not check_polymorphism(f, t):
                raise InvalidAssignment(f"block {side}{w} is not a polymorphism")
            if not is_monotone(f):
                raise InvalidAssignment(f"block {side}{w} is not monotone")
            ds = decode(f, threshold, shapley_exact(f))
            if not ds.coordinates:
                degenerate.append(f"{side}{w}")
            sets[(side, w)] = ds
    rng = np.random.default_rng(seed)
    total = Fraction(0)
    for _ in range(trials):
        left = [_pick(rng, sets[("L", u)]) for u in range(lc.num_left)]
        right = [_pick(rng, sets[("R", v)]) for v in range(lc.num_right)]
        total += lc.satisfied_fraction(left, right)
    return SoundnessResult(
        total / trials,
        tuple(sets[("L", u)] for u in range(lc.num_left)),
        tuple(sets[("R", v)] for v in range(lc.num_right)),
        tuple(degenerate),
    )


def _pick(rng, ds: DecodeSet) -> int:
    if not ds.coordinates:
        return 0  # matches no projection
    coords = sorted(ds.coordinates)
    return coords[int(rng.integers(len(coords)))]


# ---------------------------------------------------------------------------
# text format
#
#   sigma <S>
#   left <count>            (optional; inferred from edges)
#   right <count>           (optional)
#   edge <u> <v> <pi(1),...,pi(2S)>
#   label L <u> <l>         (optional planted labelling, 1-based labels)
#   label R <v> <l>


def format_label_cover(lc: LabelCover) -> str:
    lines = [f"sigma {lc.sigma}", f"left {lc.num_left}", f"right {lc.num_right}"]
    lines += [f"edge {e.u} {e.v} {e.proj}" for e in lc.edges]
    if lc.planted is not None:
        left, right = lc.planted
        lines += [f"label L {u} {l}" for u, l in enumerate(left)]
        lines += [f"label R {v} {l}" for v, l in enumerate(right)]
    return "\n".join(lines) + "\n"


def parse_label_cover(text: str) -> LabelCover:
    sigma = None
    num_left = num_right = 0
    edges = []
    labels: dict[str, dict[int, int]] = {"L": {}, "R": {}}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if parts[0] == "sigma":
                sigma = int(parts[1])
            elif parts[0] == "left":
                num_left = int(parts[1])
            elif parts[0] == "right":
                num_right = int(parts[1])
            elif parts[0] == "edge":
                if sigma is None:
                    raise ValueError("edge before 'sigma'")
                pi = VarMap.parse(parts[3])
                if pi.to_arity != sigma or len(pi.image) != 2 * sigma:
                    raise ValueError(f"projection must map [{2 * sigma}] onto [{sigma}]")
                if not pi.is_two_to_one:
                    raise ValueError("projection is not 2-to-1")
                edges.append(Edge(int(parts[1]), int(parts[2]), pi))
            elif parts[0] == "label":
                labels[parts[1]][int(parts[2])] = int(parts[3])
            else:
                raise ValueError(f"unrecognised line {line!r}")
        except (ValueError, IndexError, KeyError) as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if sigma is None:
        raise ValueError("line 1: missing 'sigma <S>'")
    num_left = max([num_left] + [e.u + 1 for e in edges])
    num_right = max([num_right] + [e.v + 1 for e in edges])
    planted = None
    if labels["L"] or labels["R"]:
        try:
            planted = (tuple(labels["L"][u] for u in range(num_left)),
                       tuple(labels["R"][v] for v in range(num_right)))
        except KeyError as exc:
            raise ValueError(f"planted labelling misses vertex {exc}") from None
    return LabelCover(sigma, num_left, num_right, tuple(edges), planted)
