"""BLP+AIP: basic LP relaxation, relative-interior support, then integer affine feasibility.

The relaxation has one weight per (variable, value) and one per
(constraint, allowed tuple).  A tuple is allowed for a constraint when it
lies in A and agrees with the scope's repeated variables.  Equations:

* x[v,0] + x[v,1] = 1 for every variable;
* the tuple weights of each constraint sum to 1;
* for each constraint, scope position p and value b, the tuple weights with
  t[p] = b sum to x[scope[p], b].

The LP adds nonnegativity and is solved exactly.  The affine step keeps the
same equations restricted to the LP support, drops nonnegativity, and asks
for an integer solution.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .pcsp import Instance, Template

MAX_WEIGHTS = 10**5


# ---------------------------------------------------------------------------
# relaxation system


@dataclass(frozen=True)
class RelaxationSystem:
    columns: tuple  # ("x", v, b) or ("y", c, tuple)
    rows: tuple  # (dict col -> int coefficient, rhs int)

    @property
    def num_weights(self) -> int:
        return len(self.columns)

    def matrix(self, cols: Sequence[int] | None = None) -> tuple[list[list[int]], list[int]]:
        cols = range(len(self.columns)) if cols is None else cols
        pos = {c: k for k, c in enumerate(cols)}
        A = []
        for coeffs, _ in self.rows:
            row = [0] * len(pos)
            for c, a in coeffs.items():
                if c in pos:
                    row[pos[c]] = a
            A.append(row)
        return A, [rhs for _, rhs in self.rows]

    def residual(self, x: Sequence) -> list:
        return [sum(a * x[c] for c, a in coeffs.items()) - rhs for coeffs, rhs in self.rows]

    def explain(self) -> str:
        names = [_col_name(c) for c in self.columns]
        lines = []
        for coeffs, rhs in self.rows:
            terms = " ".join(f"{'+' if a > 0 else '-'}{'' if abs(a) == 1 else abs(a)}{names[c]}"
                             for c, a in sorted(coeffs.items()))
            lines.append(f"{terms} = {rhs}")
        return "\n".join(lines)


def _col_name(col) -> str:
    if col[0] == "x":
        return f"x[{col[1]}={col[2]}]"
    return f"y[{col[1]}:{''.join(map(str, col[2]))}]"


def allowed_tuples(scope: tuple[int, ...], A) -> list[tuple[int, ...]]:
    out = []
    for t in sorted(A):
        seen: dict[int, int] = {}
        if all(seen.setdefault(v, b) == b for v, b in zip(scope, t)):
            out.append(t)
    return out


def build_system(inst: Instance, t: Template) -> RelaxationSystem:
    inst.check_against(t)
    cols: list = []
    index: dict = {}

    def col(key):
        if key not in index:
            index[key] = len(cols)
            cols.append(key)
        return index[key]

    for v in range(inst.num_vars):
        col(("x", v, 0))
        col(("x", v, 1))
    rows: list = []
    seen_rows = set()

    def add(coeffs: dict, rhs: int):
        key = (tuple(sorted(coeffs.items())), rhs)
        if key not in seen_rows:
            seen_rows.add(key)
            rows.append((dict(coeffs), rhs))

    for v in range(inst.num_vars):
        add({index[("x", v, 0)]: 1, index[("x", v, 1)]: 1}, 1)
    for c, (p, scope) in enumerate(inst.constraints):
        tuples = allowed_tuples(scope, t.pairs[p].A)
        ys = [col(("y", c, tup)) for tup in tuples]
        add({y: 1 for y in ys}, 1)
        for pos, v in enumerate(scope):
            for b in (0, 1):
                coeffs = {y: 1 for y, tup in zip(ys, tuples) if tup[pos] == b}
                coeffs[index[("x", v, b)]] = -1
                add(coeffs, 0)
        if len(cols) > MAX_WEIGHTS:
            raise ValueError(f"relaxation exceeds {MAX_WEIGHTS} weights")
    return RelaxationSystem(tuple(cols), tuple(rows))


# ---------------------------------------------------------------------------
# exact simplex over {x : Ax = b, x >= 0}, sparse rows of Fractions, Bland's rule


class Infeasible(Exception):
    pass


class ExactLP:
    """Feasible region {x >= 0 : A x = b}; optimises several objectives from a warm basis."""

    def __init__(self, A: list[list[int]], b: list[int]):
        self.n = len(A[0]) if A else 0
        rows = []
        rhs = []
        for row, bi in zip(A, b):
            sign = -1 if bi < 0 else 1
            rows.append({j: Fraction(sign * a) for j, a in enumerate(row) if a})
            rhs.append(Fraction(sign * bi))
        self.rows = rows
        self.rhs = rhs
        self.basis: list[int] = []
        self._phase_one()

    # tableau primitives

    def _pivot(self, r: int, s: int) -> None:
        row = self.rows[r]
        piv = row[s]
        if piv != 1:
            for j in row:
                row[j] /= piv
            self.rhs[r] /= piv
        for i, other in enumerate(self.rows):
            if i == r:
                continue
            a = other.get(s)
            if a is None:
                continue
            for j, v in row.items():
                nv = other.get(j, 0) - a * v
                if nv:
                    other[j] = nv
                else:
                    other.pop(j, None)
            self.rhs[i] -= a * self.rhs[r]
        if self._obj is not None:
            a = self._obj.get(s)
            if a:
                for j, v in row.items():
                    nv = self._obj.get(j, 0) - a * v
                    if nv:
                        self._obj[j] = nv
                    else:
                        self._obj.pop(j, None)
                self._obj_val -= a * self.rhs[r]
        self.basis[r] = s

    def _set_objective(self, cost: dict) -> None:
        """Minimise sum cost[j] x_j; stores reduced costs relative to the basis."""
        obj = {j: Fraction(c) for j, c in cost.items() if c}
        val = Fraction(0)
        for r, bj in enumerate(self.basis):
            cb = obj.get(bj)
            if cb:
                for j, v in self.rows[r].items():
                    nv = obj.get(j, 0) - cb * v
                    if nv:
                        obj[j] = nv
                    else:
                        obj.pop(j, None)
                val -= cb * self.rhs[r]
        self._obj = obj
        self._obj_val = val  # equals -(current objective value)

    def _run(self, allowed) -> str:
        while True:
            entering = min((j for j, c in self._obj.items() if c < 0 and allowed(j)), default=None)
            if entering is None:
                return "optimal"
            best = None
            for r, row in enumerate(self.rows):
                a = row.get(entering)
                if a is not None and a > 0:
                    key = (self.rhs[r] / a, self.basis[r])
                    if best is None or key < best[0]:
                        best = (key, r)
            if best is None:
                return "unbounded"
            self._pivot(best[1], entering)

    def _phase_one(self) -> None:
        m, n = len(self.rows), self.n
        self.basis = [n + i for i in range(m)]
        for i, row in enumerate(self.rows):
            row[n + i] = Fraction(1)
        self._obj = None
        self._set_objective({n + i: 1 for i in range(m)})
        self._run(lambda j: True)
        if self._obj_val != 0:
            raise Infeasible("relaxation is infeasible")
        # drive zero-level artificials out of the basis; drop rows that are redundant
        keep = []
        for r in range(m):
            if self.basis[r] >= n:
                col = min((j for j in self.rows[r] if j < n), default=None)
                if col is None:
                    continue
                self._pivot(r, col)
            keep.append(r)
        self.rows = [self.rows[r] for r in keep]
        self.rhs = [self.rhs[r] for r in keep]
        self.basis = [self.basis[r] for r in keep]
        for row in self.rows:
            for j in [j for j in row if j >= n]:
                del row[j]
        self._obj = None

    def point(self) -> list[Fraction]:
        x = [Fraction(0)] * self.n
        for r, bj in enumerate(self.basis):
            x[bj] = self.rhs[r]
        return x

    def maximize(self, weights: dict) -> tuple[Fraction, list[Fraction]]:
        self._set_objective({j: -w for j, w in weights.items()})
        status = self._run(lambda j: j < self.n)
        if status != "optimal":
            raise RuntimeError("unbounded objective on a bounded relaxation")
        x = self.point()
        return sum((w * x[j] for j, w in weights.items()), Fraction(0)), x


def _average(points: list[list[Fraction]]) -> list[Fraction]:
    k = len(points)
    return [sum(col, Fraction(0)) / k for col in zip(*points)]


def relative_interior(A, b, method: str = "grouped") -> tuple[list[Fraction], frozenset]:
    """A feasible point positive on every weight that is positive in some feasible point.

    ``grouped`` maximises the sum of the not-yet-positive weights until that
    sum is 0; ``per_weight`` maximises every weight on its own.  Either way
    the returned point is the average of the optima collected.
    """
    lp = ExactLP(A, b)
    points = [lp.point()]
    support = {j for j, v in enumerate(points[0]) if v > 0}
    if method == "per_weight":
        for j in range(lp.n):
            val, x = lp.maximize({j: 1})
            points.append(x)
            if val > 0:
                support.add(j)
    elif method == "grouped":
        while True:
            rest = {j: 1 for j in range(lp.n) if j not in support}
            if not rest:
                break
            val, x = lp.maximize(rest)
            if val == 0:
                break
            points.append(x)
            support |= {j for j, v in enumerate(x) if v > 0}
    else:
        raise ValueError(f"unknown method {method!r}")
    interior = _average(points)
    return interior, frozenset(support)


def solve_blp(inst: Instance, t: Template, method: str = "grouped"):
    """(feasible, interior point or None, system)."""
    system = build_system(inst, t)
    A, b = system.matrix()
    if not A:
        return True, [], system
    try:
        interior, _ = relative_interior(A, b, method)
    except Infeasible:
        return False, None, system
    return True, interior, system


# ---------------------------------------------------------------------------
# integer affine feasibility


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def integer_solve(A: list[list[int]], b: list[int]) -> list[int] | None:
    """An integer x with A x = b, or None.

    Column operations (tracked in a unimodular V) bring A to column-echelon
    form H = A V; H y = b is then solved by forward substitution and x = V y.
    """
    m = len(A)
    n = len(A[0]) if m else 0
    if n == 0:
        return [] if all(v == 0 for v in b) else None
    H = [list(map(int, row)) for row in A]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def col_combine(c1: int, c2: int, a: int, bb: int, c: int, d: int) -> None:
        # (col c1, col c2) <- (a*c1 + bb*c2, c*c1 + d*c2) with ad - bc = +-1
        for M in (H, V):
            for row in M:
                u, w = row[c1], row[c2]
                row[c1], row[c2] = a * u + bb * w, c * u + d * w

    pivots: list[tuple[int, int]] = []  # (row, col)
    c = 0
    for i in range(m):
        if c >= n:
            break
        for j in range(c + 1, n):
            if H[i][j] == 0:
                continue
            if H[i][c] == 0:
                col_combine(c, j, 0, 1, 1, 0)
                continue
            g, s, t = _ext_gcd(H[i][c], H[i][j])
            p, q = H[i][c] // g, H[i][j] // g
            col_combine(c, j, s, t, -q, p)
        if H[i][c] != 0:
            if H[i][c] < 0:
                for M in (H, V):
                    for row in M:
                        row[c] = -row[c]
            pivots.append((i, c))
            c += 1
    y = [0] * n
    piv_of_row = dict(pivots)
    for i in range(m):
        s = sum(H[i][k] * y[k] for k in range(c))
        if i in piv_of_row:
            k = piv_of_row[i]
            s -= H[i][k] * y[k]
            q, r = divmod(b[i] - s, H[i][k])
            if r:
                return None
            y[k] = q
        elif s != b[i]:
            return None
    return [sum(V[i][k] * y[k] for k in range(n)) for i in range(n)]


def solve_aip(system: RelaxationSystem, support) -> bool:
    return aip_solution(system, support) is not None


def aip_solution(system: RelaxationSystem, support) -> list[int] | None:
    cols = sorted(support)
    A, b = system.matrix(cols)
    sol = integer_solve(A, b)
    if sol is None:
        return None
    full = [0] * system.num_weights
    for c, v in zip(cols, sol):
        full[c] = v
    return full


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    accept: bool
    blp_feasible: bool
    support: frozenset
    aip_feasible: bool
    system: RelaxationSystem | None = None

    def summary(self) -> str:
        return (
            f"accept={self.accept} blp_feasible={self.blp_feasible} "
            f"aip_feasible={self.aip_feasible} support={len(self.support)}"
            + (f"/{self.system.num_weights}" if self.system is not None else "")
        )


def decide(inst: Instance, t: Template, method: str = "grouped") -> Verdict:
    """Reject only if the instance is not A-satisfiable.

    Accepts imply B-satisfiability whenever the template has symmetric
    polymorphisms of infinitely many arities.
    """
    feasible, interior, system = solve_blp(inst, t, method)
    if not feasible:
        return Verdict(False, False, frozenset(), False, system)
    support = frozenset(j for j, v in enumerate(interior) if v > 0)
    aip = solve_aip(system, support)
    return Verdict(aip, True, support, aip, system)
