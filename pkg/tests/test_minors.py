import itertools
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minionlab.boolfn import (
    BoolFn,
    all_monotone,
    evaluate,
    is_monotone,
    majority,
    make_threshold,
    random_monotone,
)
from minionlab.minors import (
    VarMap,
    all_two_to_one,
    apply_minor,
    canonical_relabel,
    ceil_half_map,
    enumerate_pairings,
    identity_map,
    pi1_collapse,
    pi1_map,
    pi2_pairing,
    sample_pairing,
    sample_two_to_one,
)
from minionlab.shapley import shapley_exact

from conftest import monotone_fns


def minor_oracle(f, pi):
    """g(y) = f(x) with x_i = y_{pi(i)}, evaluated point by point."""
    m = pi.to_arity
    out = []
    for y in range(1 << m):
        ys = {j for j in range(1, m + 1) if y >> (j - 1) & 1}
        out.append(evaluate(f, {i for i in range(1, f.arity + 1) if pi(i) in ys}))
    return BoolFn(m, np.array(out, dtype=bool))


@st.composite
def fn_and_map(draw, max_arity=6):
    f = draw(monotone_fns(max_arity=max_arity))
    m = draw(st.integers(1, min(4, f.arity)))
    image = draw(st.lists(st.integers(1, m), min_size=f.arity, max_size=f.arity))
    return f, VarMap(m, tuple(image))


class TestVarMap:
    def test_parse_and_str(self):
        pi = VarMap.parse("1,1,2,2")
        assert pi.to_arity == 2 and str(pi) == "1,1,2,2"
        assert pi.is_two_to_one
        assert pi.preimage(2) == (3, 4)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            VarMap(2, (1, 3))

    def test_not_two_to_one(self):
        assert not VarMap(2, (1, 1, 1, 2)).is_two_to_one


class TestApplyMinor:
    def test_examples(self):
        assert apply_minor(majority(3), identity_map(3)) == majority(3)
        assert apply_minor(make_threshold(2, 2), VarMap(1, (1, 1))) == make_threshold(1, 1)
        assert apply_minor(make_threshold(4, 2), VarMap.parse("1,1,2,2")) == make_threshold(2, 1)

    def test_arity_mismatch(self):
        with pytest.raises(ValueError):
            apply_minor(majority(3), VarMap.parse("1,1"))

    @given(fn_and_map())
    @settings(max_examples=80, deadline=None)
    def test_matches_oracle(self, case):
        f, pi = case
        assert apply_minor(f, pi) == minor_oracle(f, pi)

    @given(fn_and_map(), st.data())
    @settings(max_examples=50, deadline=None)
    def test_composition(self, case, data):
        f, pi = case
        k = data.draw(st.integers(1, min(3, pi.to_arity)))
        rho = VarMap(k, tuple(data.draw(st.lists(st.integers(1, k), min_size=pi.to_arity,
                                                 max_size=pi.to_arity))))
        assert apply_minor(apply_minor(f, pi), rho) == apply_minor(f, pi.then(rho))

    def test_preserves_monotone_exhaustive(self):
        for n in range(1, 4):
            for f in all_monotone(n):
                for m in range(1, n + 1):
                    for image in itertools.product(range(1, m + 1), repeat=n):
                        assert is_monotone(apply_minor(f, VarMap(m, image)))


class TestTwoToOne:
    def test_counts(self):
        # (2m)! / 2^m labelled pairings
        assert [len(list(all_two_to_one(m))) for m in (1, 2, 3)] == [1, 6, 90]
        assert list(all_two_to_one(1)) == [VarMap(1, (1, 1))]

    def test_sampler_invariant(self):
        for seed in range(50):
            pi = sample_two_to_one(4, seed)
            assert pi.is_two_to_one and pi.from_arity == 8

    def test_sampler_uniform_m2(self):
        draws = Counter(sample_two_to_one(2, np.random.default_rng(s)).image for s in range(6000))
        assert set(draws) == {p.image for p in all_two_to_one(2)}
        # chi-square with 5 dof; 20.5 is the 0.999 quantile
        chi = sum((c - 1000) ** 2 / 1000 for c in draws.values())
        assert chi < 20.5

    def test_ceil_half(self):
        assert ceil_half_map(3).image == (1, 1, 2, 2, 3, 3)


class TestTwoStep:
    def test_pi1(self):
        assert pi1_map(6).image == (1, 1, 2, 3, 4, 5)
        and12 = BoolFn.from_callable(4, lambda S: {1, 2} <= S)
        assert pi1_collapse(and12) == BoolFn.from_callable(3, lambda S: 1 in S)
        g = pi1_collapse(make_threshold(4, 2))
        assert g == BoolFn.from_callable(3, lambda S: 2 * (1 in S) + len(S - {1}) >= 2)
        with pytest.raises(ValueError):
            pi1_collapse(majority(3))

    def test_pairing_counts(self):
        assert [len(enumerate_pairings(n)) for n in (1, 2, 3, 4, 5)] == [1, 1, 3, 15, 105]
        pis = enumerate_pairings(4)
        assert len({p.image for p in pis}) == 15
        assert all(p(1) == 1 and p.preimage(1) == (1,) for p in pis)

    def test_pairing_labels_follow_smallest_element(self):
        for pi in enumerate_pairings(4):
            firsts = [min(pi.preimage(j)) for j in range(2, 5)]
            assert firsts == sorted(firsts)

    def test_figure_pairing(self):
        # pi_2(i) = ceil((i+1)/2) on 5 coordinates is one of the enumerated pairings
        target = tuple(-(-(i + 1) // 2) for i in range(1, 6))
        assert target == (1, 2, 2, 3, 3)
        assert target in {p.image for p in enumerate_pairings(3)}

    def test_sample_pairing_uniform(self):
        draws = Counter(sample_pairing(5, np.random.default_rng(s)).image for s in range(3000))
        assert set(draws) == {p.image for p in enumerate_pairings(3)}
        assert all(abs(c - 1000) < 150 for c in draws.values())

    def test_pi2_pairing(self):
        g, pi = pi2_pairing(majority(5), 0)
        assert g.arity == 3 and pi(1) == 1
        with pytest.raises(ValueError):
            pi2_pairing(majority(4), 0)

    def test_pair_labels_do_not_change_phi1(self, rng):
        # permuting which output 2..n each pair gets leaves coordinate 1 untouched
        for _ in range(10):
            f = random_monotone(7, rng)
            for pi in enumerate_pairings(4)[:5]:
                base = shapley_exact(apply_minor(f, pi)).value(1)
                for perm in itertools.permutations((2, 3, 4)):
                    relabel = {1: 1, **dict(zip((2, 3, 4), perm))}
                    alt = VarMap(4, tuple(relabel[v] for v in pi.image))
                    assert shapley_exact(apply_minor(f, alt)).value(1) == base

    @pytest.mark.parametrize("n", [2, 3])
    def test_equivalence_with_conditioned_uniform(self, n):
        """Uniform 2-to-1 maps with pi(1)=pi(2), relabelled, give the same multiset of minors
        as the pi1 collapse followed by every pairing."""
        if n == 2:
            fns = all_monotone(4)
        else:
            rng = np.random.default_rng(0)
            fns = [random_monotone(6, rng) for _ in range(15)]
        pairings = enumerate_pairings(n)
        for f in fns:
            cond = Counter()
            for pi in all_two_to_one(n):
                if pi(1) == pi(2):
                    cond[apply_minor(f, canonical_relabel(pi))] += 1
            two_step = Counter(apply_minor(pi1_collapse(f), p) for p in pairings)
            scale = sum(cond.values()) // sum(two_step.values())
            assert {g: c * scale for g, c in two_step.items()} == dict(cond)


class TestCollapseInequality:
    def test_exhaustive_arity4(self, monotone4):
        for f in monotone4:
            phi = shapley_exact(f).value(1)
            assert shapley_exact(pi1_collapse(f)).value(1) >= phi / 2

    @given(monotone_fns(min_arity=6, max_arity=6))
    @settings(max_examples=40, deadline=None)
    def test_sampled_arity6(self, f):
        phi = shapley_exact(f).value(1)
        assert shapley_exact(pi1_collapse(f)).value(1) >= Fraction(phi, 2)
