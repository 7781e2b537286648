"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line; conftest prints them at the end of the
run.  Running this file directly prints the same lines.
"""

import time
from fractions import Fraction

import numpy as np
import pytest

from minionlab.adversarial import build_f_full, construct_half, verify_theorem
from minionlab.blp_aip import decide
from minionlab.boolfn import (
    BoolFn,
    PreconditionError,
    all_monotone,
    is_monotone,
    majority,
    make_threshold,
    random_monotone,
    russo_inequality_check,
)
from minionlab.experiments import level_density, pairing_average
from minionlab.gadget import make_rich_instance, reduce, soundness_experiment
from minionlab.minors import apply_minor, ceil_half_map, pi1_collapse
from minionlab.pcsp import (
    NEQ,
    RelationPair,
    brute_force_decide,
    check_polymorphism,
    ordered_1in3_nae,
    random_instance,
    two_sat_template,
)
from minionlab.shapley import shapley_by_permutations, shapley_exact, shapley_montecarlo
from minionlab.threshold_extract import ExtractionError, ExtractParams, extract_threshold_minor

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script
    ACCEPTANCE_LINES = {}


def record(k: int, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {k:>2}: {detail}"
    ACCEPTANCE_LINES[k] = line
    print(line)


def brute_monotone_tables(n: int) -> np.ndarray:
    """Every truth table of arity n, filtered by comparing each point with its upper neighbours."""
    size = 1 << n
    codes = np.arange(1 << size, dtype=np.int64)
    tables = ((codes[:, None] >> np.arange(size)) & 1).astype(bool)
    ok = np.ones(len(tables), dtype=bool)
    for x in range(size):
        for b in range(n):
            if not x >> b & 1:
                ok &= ~tables[:, x] | tables[:, x | 1 << b]
    return tables[ok]


def test_c01_collapse_halves_at_most():
    t0 = time.perf_counter()
    brute = brute_monotone_tables(4)
    fns = all_monotone(4)
    same = len(brute) == 168 and {t.tobytes() for t in brute} == {f.table.tobytes() for f in fns}
    bad = 0
    for f in fns:
        phi = shapley_exact(f).value(1)
        bad += not shapley_exact(pi1_collapse(f)).value(1) >= phi / 2
    dt = time.perf_counter() - t0
    ok = same and bad == 0 and dt < 10
    record(1, ok, f"{len(fns)} monotone functions (brute filter {len(brute)}), "
                  f"{bad} counterexamples, {dt:.2f}s")
    assert ok


def test_c02_pairing_average_identity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    mismatches = checked = 0
    for arity, count in ((5, 100), (7, 20)):
        for _ in range(count):
            f = random_monotone(arity, rng)
            mu = level_density(f)
            for j, avg in enumerate(pairing_average(f)):
                checked += 1
                mismatches += avg != mu[2 * j]
    dt = time.perf_counter() - t0
    ok = mismatches == 0 and dt < 120
    record(2, ok, f"{checked} exact comparisons over 100 arity-5 and 20 arity-7 functions, "
                  f"{mismatches} mismatches, {dt:.2f}s")
    assert ok


def test_c03_level_formula_matches_permutations():
    rng = np.random.default_rng(3)
    fns = [f for n in range(1, 5) for f in all_monotone(n)]
    fns += [random_monotone(int(n), rng) for n in rng.integers(1, 8, size=50)]
    bad = sum(shapley_exact(f).values != shapley_by_permutations(f).values for f in fns)
    record(3, bad == 0, f"{len(fns)} functions compared with the n! oracle, {bad} differences")
    assert bad == 0


def test_c04_sum_rule():
    rng = np.random.default_rng(4)
    fns = [random_monotone(int(n), rng) for n in rng.integers(1, 13, size=10_000)]
    assert all(not f.is_constant for f in fns)
    bad = sum(shapley_exact(f).total() != 1 for f in fns)
    record(4, bad == 0, f"{len(fns)} non-constant functions of arity <= 12, {bad} sums != 1")
    assert bad == 0


def test_c05_monte_carlo_coverage():
    f = majority(7)
    covered = np.zeros(7, dtype=int)
    for seed in range(200):
        est = shapley_montecarlo(f, 2000, seed)
        covered += np.abs(np.array(est.values) - 1 / 7) <= est.half_width
    ok = covered.min() >= 196
    record(5, ok, f"coverage per coordinate over 200 seeds: {covered.tolist()} (need >= 196)")
    assert ok


@pytest.mark.parametrize("n", [10, 12])
def test_c06_adversarial_pair(n):
    t0 = time.perf_counter()
    half = construct_half(n)
    full = build_f_full(n, half.f_half)
    minor_ok = apply_minor(full, ceil_half_map(n)) == half.g
    rep = verify_theorem(n)
    window = sum(1 for j in range(n + 1) if Fraction(49 * n, 100) < j < Fraction(51 * n, 100))
    checks = {
        "minor": minor_ok,
        "argmax_g": rep.argmax_g == 1,
        "argmax_full": rep.argmax_full == 3,
        "pi(3)!=1": ceil_half_map(n)(3) != 1,
        "phi_g1": rep.phi_g1 == Fraction(window, n),
    }
    if n == 12:
        prev = verify_theorem(10).phi_full.value(1)
        checks["trend"] = rep.phi_full.value(1) < prev
    dt = time.perf_counter() - t0
    ok = all(checks.values()) and dt < 300
    detail = (f"n={n}: " + " ".join(f"{k}={'ok' if v else 'NO'}" for k, v in checks.items())
              + f" phi_g(1)={rep.phi_g1} ({dt:.1f}s)")
    # both sizes share one line
    prior = ACCEPTANCE_LINES.get(6)
    if prior:
        detail = prior.split(": ", 1)[1] + "; " + detail
        ok_line = ok and prior.startswith("[PASS]")
    else:
        ok_line = ok
    record(6, ok_line, detail)
    assert ok


def test_c07_threshold_extraction():
    t0 = time.perf_counter()
    rates = {}
    for K in (9, 15, 21):
        f = majority(K)
        for L in (3, 4):
            good = 0
            for seed in range(100):
                try:
                    cert = extract_threshold_minor(f, ExtractParams(L, retries=1024), seed)
                except ExtractionError:
                    continue
                good += cert.verify(f) and cert.L_prime in (L, L + 1)
            rates[(K, L)] = good
    dt = time.perf_counter() - t0
    ok = all(v >= 95 for v in rates.values())
    record(7, ok, "successes/100: " + " ".join(f"K{K}L{L}={v}" for (K, L), v in rates.items())
           + f" ({dt:.1f}s)")
    assert ok


def test_c08_polymorphism_facts():
    maj = check_polymorphism(majority(3), two_sat_template())
    thr = check_polymorphism(make_threshold(4, 2), ordered_1in3_nae())
    with_neq = ordered_1in3_nae().with_pair(RelationPair.of(NEQ))
    survivors = [(L, tau) for L in range(2, 6) for tau in range(L + 1)
                 if check_polymorphism(make_threshold(L, tau), with_neq)]
    ok = maj and thr and not survivors
    record(8, ok, f"MAJ3 in Pol(2-SAT)={maj}, THR(4,2) in Pol(1-in-3,NAE)={thr}, "
                  f"threshold polymorphisms with NEQ at arities 2-5: {survivors or 'none'}")
    assert ok


def test_c09_blp_aip_against_brute_force():
    t0 = time.perf_counter()
    t = ordered_1in3_nae()
    rng = np.random.default_rng(9)
    unsound = incomplete = accepted = 0
    for _ in range(500):
        inst = random_instance(t, int(rng.integers(1, 13)), int(rng.integers(1, 11)), rng)
        v = decide(inst, t)
        accepted += v.accept
        if not v.accept and brute_force_decide(inst, t, "strong"):
            unsound += 1
        if v.accept and not brute_force_decide(inst, t, "weak"):
            incomplete += 1
    dt = time.perf_counter() - t0
    ok = unsound == 0 and incomplete == 0 and dt < 300
    record(9, ok, f"500 instances, {accepted} accepted, reject-but-strong={unsound}, "
                  f"accept-but-not-weak={incomplete}, {dt:.1f}s")
    assert ok


def test_c10_reduction_completeness():
    t = ordered_1in3_nae()
    total = bad = 0
    fractions = set()
    for seed in range(10):
        for copies, left in ((1, 1), (2, 2), (1, 3)):
            lc = make_rich_instance(2, copies, num_left=left, seed=seed)
            assert lc.is_rich()
            red = reduce(lc, t)
            a = red.dictator_assignment(*lc.planted)
            total += 1
            if not red.instance.satisfied_by(t, a, "strong"):
                bad += 1
                continue
            res = soundness_experiment(red, t, a, Fraction(1, 2), seed=seed, trials=10)
            fractions.add(res.fraction)
    ok = bad == 0 and fractions == {1}
    record(10, ok, f"{total} rich instances at sigma=2, {bad} unsatisfied dictator assignments, "
                   f"decoded fractions {sorted(map(str, fractions))}")
    assert ok


def test_c11_russo_suite():
    checked = skipped = bad = undecided = 0
    for n in range(1, 5):
        for f in all_monotone(n):
            if f.is_constant:
                continue
            for nu in (Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)):
                try:
                    verdict = russo_inequality_check(f, nu)
                except PreconditionError:
                    skipped += 1
                    continue
                checked += 1
                bad += verdict is False
                undecided += verdict is None
    ok = bad == 0 and undecided == 0 and checked > 0
    record(11, ok, f"{checked} (function, nu) cases meeting the preconditions, {bad} counterexamples, "
                   f"{skipped} skipped by precondition")
    assert ok


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
