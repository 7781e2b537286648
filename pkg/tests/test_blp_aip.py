import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from minionlab.blp_aip import (
    ExactLP,
    Infeasible,
    build_system,
    decide,
    integer_solve,
    relative_interior,
    solve_blp,
)
from minionlab.pcsp import (
    NEQ,
    Instance,
    RelationPair,
    Template,
    brute_force_decide,
    ordered_1in3_nae,
    random_instance,
    two_sat_template,
)


def support_oracle(A, b):
    """Weights that can be positive somewhere in {x >= 0 : Ax = b}, by floating-point LP."""
    A = np.array(A, dtype=float)
    n = A.shape[1]
    out = set()
    for j in range(n):
        c = np.zeros(n)
        c[j] = -1
        res = linprog(c, A_eq=A, b_eq=b, bounds=[(0, None)] * n, method="highs")
        if res.status == 0 and -res.fun > 1e-9:
            out.add(j)
    return out


def lp_feasible_oracle(A, b):
    A = np.array(A, dtype=float)
    res = linprog(np.zeros(A.shape[1]), A_eq=A, b_eq=b, bounds=[(0, None)] * A.shape[1],
                  method="highs")
    return res.status == 0


def _det(M):
    M = [[Fraction(v) for v in row] for row in M]
    n = len(M)
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if M[r][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            M[c], M[p] = M[p], M[c]
            det = -det
        det *= M[c][c]
        for r in range(c + 1, n):
            f = M[r][c] / M[c][c]
            M[r] = [a - f * bb for a, bb in zip(M[r], M[c])]
    return det


def _minor_gcd(M, k):
    from math import gcd

    g = 0
    for rows in itertools.combinations(range(len(M)), k):
        for cols in itertools.combinations(range(len(M[0])), k):
            g = gcd(g, int(_det([[M[r][c] for c in cols] for r in rows])))
    return g


def _rank(M):
    if not M or not M[0]:
        return 0
    return int(np.linalg.matrix_rank(np.array(M, dtype=float)))


def integer_feasible_oracle(A, b):
    """Ax = b has an integer solution iff rank A = rank [A|b] = r and the gcd of the
    r x r minors agrees for A and [A|b]."""
    aug = [row + [bi] for row, bi in zip(A, b)]
    r = _rank(A)
    if _rank(aug) != r:
        return False
    if r == 0:
        return True
    return _minor_gcd(A, r) == _minor_gcd(aug, r)


small_ints = st.integers(-4, 4)


@st.composite
def int_systems(draw):
    m = draw(st.integers(1, 3))
    n = draw(st.integers(1, 4))
    A = [draw(st.lists(small_ints, min_size=n, max_size=n)) for _ in range(m)]
    b = draw(st.lists(st.integers(-6, 6), min_size=m, max_size=m))
    return A, b


class TestIntegerSolve:
    def test_examples(self):
        assert integer_solve([[2, 4]], [3]) is None
        x = integer_solve([[6, 10, 15]], [1])
        assert 6 * x[0] + 10 * x[1] + 15 * x[2] == 1
        assert integer_solve([[1, 1], [1, -1]], [1, 0]) is None  # x = 1/2
        assert integer_solve([[0, 0]], [0]) == [0, 0]

    @given(int_systems())
    @settings(max_examples=200, deadline=None)
    def test_against_determinant_criterion(self, system):
        A, b = system
        x = integer_solve(A, b)
        if x is not None:
            assert all(sum(a * v for a, v in zip(row, x)) == bi for row, bi in zip(A, b))
        assert (x is not None) == integer_feasible_oracle(A, b)

    @given(int_systems())
    @settings(max_examples=100, deadline=None)
    def test_box_search_agrees(self, system):
        A, b = system
        n = len(A[0])
        box = next(
            (x for x in itertools.product(range(-3, 4), repeat=n)
             if all(sum(a * v for a, v in zip(row, x)) == bi for row, bi in zip(A, b))),
            None,
        )
        if box is not None:
            assert integer_solve(A, b) is not None


@st.composite
def lp_systems(draw):
    m = draw(st.integers(1, 3))
    n = draw(st.integers(2, 5))
    A = [draw(st.lists(st.integers(-2, 3), min_size=n, max_size=n)) for _ in range(m)]
    x0 = draw(st.lists(st.integers(0, 2), min_size=n, max_size=n))
    A.append([1] * n)  # keeps the region bounded, as every relaxation is
    b = [sum(a * v for a, v in zip(row, x0)) for row in A]
    return A, b


class TestExactLP:
    def test_infeasible(self):
        with pytest.raises(Infeasible):
            ExactLP([[1, 1]], [-1])

    def test_maximize(self):
        lp = ExactLP([[1, 1, 1]], [1])
        val, x = lp.maximize({0: 2, 1: 3})
        assert val == 3 and x == [0, 1, 0]

    @given(lp_systems())
    @settings(max_examples=80, deadline=None)
    def test_relative_interior(self, system):
        A, b = system
        for method in ("grouped", "per_weight"):
            x, support = relative_interior(A, b, method)
            assert all(v >= 0 for v in x)
            assert all(sum(a * v for a, v in zip(row, x)) == bi for row, bi in zip(A, b))
            assert {j for j, v in enumerate(x) if v > 0} == set(support)
        assert set(support) == support_oracle(A, b)

    @given(st.lists(st.lists(st.integers(-2, 2), min_size=3, max_size=3), min_size=1, max_size=3),
           st.lists(st.integers(-3, 3), min_size=3, max_size=3))
    @settings(max_examples=80, deadline=None)
    def test_feasibility_matches(self, A, b):
        b = b[: len(A)]
        try:
            ExactLP(A, b)
            ok = True
        except Infeasible:
            ok = False
        assert ok == lp_feasible_oracle(A, b)


class TestDecide:
    def test_repeated_scope_infeasible(self):
        # x != x leaves no tuple consistent with the repeated scope
        t = Template((RelationPair.of(NEQ),))
        inst = Instance(1, ((0, (0, 0)),))
        feasible, _, _ = solve_blp(inst, t)
        assert not feasible
        assert not decide(inst, t).accept

    def test_system_shape(self):
        t = ordered_1in3_nae()
        inst = Instance(3, ((0, (0, 1, 2)),))
        sys_ = build_system(inst, t)
        assert sys_.num_weights == 6 + 3
        assert "y[0:100]" in sys_.explain()

    def test_satisfiable_accepts(self):
        t = two_sat_template()
        inst = Instance(2, ((0, (0, 1)), (2, (0, 1))))
        assert decide(inst, t).accept

    def test_oracle_agreement(self, rng):
        t = ordered_1in3_nae()
        for _ in range(60):
            inst = random_instance(t, int(rng.integers(1, 9)), int(rng.integers(1, 8)), rng)
            v = decide(inst, t)
            if not v.accept:
                assert not brute_force_decide(inst, t, "strong")
            else:
                assert brute_force_decide(inst, t, "weak")

    def test_methods_agree(self, rng):
        t = ordered_1in3_nae()
        for _ in range(30):
            inst = random_instance(t, 5, 4, rng)
            assert decide(inst, t, "grouped").accept == decide(inst, t, "per_weight").accept
