"""Verification sweeps behind the ``verify`` subcommand.

Each sweep returns an :class:`ExperimentResult` holding CSV-ready rows and a
pass flag.  Every quantity is exact; Fractions are written as "p/q" with an
extra decimal column next to them.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Any

import numpy as np

from .boolfn import (
    BoolFn,
    PreconditionError,
    all_monotone,
    boundary_counts,
    boundary_sets,
    random_monotone,
    russo_inequality_check,
    sandwich_check,
)
from .adversarial import verify_theorem
from .lemma_even import verify_lemma_even
from .minors import VarMap, _matchings, apply_minor, enumerate_pairings, pi1_collapse
from .shapley import shapley_exact


@dataclass
class ExperimentResult:
    name: str
    columns: list[str]
    rows: list[list[Any]] = field(default_factory=list)
    passed: bool = True
    summary: str = ""
    config: dict = field(default_factory=dict)

    def fail(self, why: str) -> None:
        self.passed = False
        self.summary = why if not self.summary else f"{self.summary}; {why}"

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("# " + " ".join(f"{k}={v}" for k, v in sorted(self.config.items())) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        frac_cols = {
            i for i, _ in enumerate(self.columns)
            if any(isinstance(r[i], Fraction) for r in self.rows)
        }
        header = []
        for i, c in enumerate(self.columns):
            header.append(c)
            if i in frac_cols:
                header.append(c + "_dec")
        w.writerow(header)
        for r in self.rows:
            out = []
            for i, v in enumerate(r):
                out.append(_cell(v))
                if i in frac_cols:
                    out.append(f"{float(v):.10g}" if isinstance(v, Fraction) else "")
            w.writerow(out)
        return buf.getvalue()


def _cell(v) -> str:
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if v is None:
        return ""
    return str(v)


def _functions(arity: int, samples: int, seed: int, exhaustive_upto: int = 4):
    """All monotone functions when arity is small, otherwise a seeded sample."""
    if arity <= exhaustive_upto:
        return all_monotone(arity)
    rng = np.random.default_rng(seed)
    return [random_monotone(arity, rng) for _ in range(samples)]


# ---------------------------------------------------------------------------


def run_lemma_3_1(max_arity: int = 4, nus=(Fraction(1, 2), Fraction(1, 4), Fraction(1, 8))) -> ExperimentResult:
    res = ExperimentResult("lemma3.1", ["arity", "index", "nu", "status"],
                           config={"verify": "lemma3.1", "max_arity": max_arity})
    checked = skipped = bad = undecided = 0
    for n in range(1, max_arity + 1):
        for idx, f in enumerate(all_monotone(n)):
            if f.is_constant:
                continue
            for nu in nus:
                try:
                    ok = russo_inequality_check(f, nu)
                except PreconditionError:
                    skipped += 1
                    res.rows.append([n, idx, Fraction(nu), "precondition"])
                    continue
                checked += 1
                status = {True: "holds", False: "violated", None: "undecided"}[ok]
                bad += ok is False
                undecided += ok is None
                res.rows.append([n, idx, Fraction(nu), status])
    res.summary = f"checked={checked} skipped={skipped} violations={bad} undecided={undecided}"
    if bad:
        res.fail(f"{bad} violations")
    return res


def run_lemma_4_1(arity: int = 4, samples: int = 200, seed: int = 0) -> ExperimentResult:
    """Phi_{f'}(1) >= Phi_f(1)/2 with f' the pi_1 collapse of f."""
    if arity % 2 or arity < 4:
        raise ValueError("arity must be even and at least 4")
    res = ExperimentResult("lemma4.1", ["index", "phi_f1", "phi_fprime1", "holds"],
                           config={"verify": "lemma4.1", "arity": arity, "samples": samples, "seed": seed})
    bad = 0
    fns = _functions(arity, samples, seed)
    for idx, f in enumerate(fns):
        phi = shapley_exact(f).value(1)
        if phi == 0:
            continue
        phi_p = shapley_exact(pi1_collapse(f)).value(1)
        ok = phi_p >= phi / 2
        bad += not ok
        res.rows.append([idx, phi, phi_p, ok])
    res.summary = f"functions={len(fns)} tested={len(res.rows)} counterexamples={bad}"
    if bad:
        res.fail(f"{bad} counterexamples")
    return res


def run_lemma_4_2(arities=(3, 5), coord: int = 1) -> ExperimentResult:
    res = ExperimentResult("lemma4.2", ["arity", "index", "phi", "even_mass", "mass_over_phi2"],
                           config={"verify": "lemma4.2", "arities": ",".join(map(str, arities))})
    met = bad = 0
    ratios = []
    for m in arities:
        for idx, f in enumerate(all_monotone(m)):
            rep = verify_lemma_even(f, coord)
            if not rep.premise_met:
                continue
            met += 1
            bad += not rep.positive
            ratios.append(rep.gamma_ratio)
            res.rows.append([m, idx, rep.phi, rep.even_mass, rep.gamma_ratio])
    low = min(ratios) if ratios else None
    res.summary = f"premise_met={met} nonpositive={bad} min_mass_over_phi2={low}"
    if bad:
        res.fail(f"{bad} functions with zero even mass")
    return res


def level_density(f: BoolFn, coord: int = 1) -> list[Fraction]:
    m = f.arity
    return [Fraction(c, comb(m - 1, j)) for j, c in enumerate(boundary_counts(f, coord))]


def pairing_average(fprime: BoolFn, coord: int = 1) -> list[Fraction]:
    """Exact mean of mu_g(j) over every pi_2 pairing of fprime."""
    n = (fprime.arity + 1) // 2
    pairings = enumerate_pairings(n)
    total = [Fraction(0)] * n
    for pi in pairings:
        for j, v in enumerate(level_density(apply_minor(fprime, pi), coord)):
            total[j] += v
    return [t / len(pairings) for t in total]


def run_lemma_4_3(counts=((5, 100), (7, 20)), seed: int = 0) -> ExperimentResult:
    """Average of mu_g(j) over all pairings equals mu'(2j), exactly."""
    res = ExperimentResult("lemma4.3", ["arity", "index", "j", "avg_mu_g", "mu_prime_2j", "equal"],
                           config={"verify": "lemma4.3", "seed": seed,
                                   "counts": ";".join(f"{a}x{c}" for a, c in counts)})
    rng = np.random.default_rng(seed)
    bad = 0
    for arity, count in counts:
        for idx in range(count):
            f = random_monotone(arity, rng)
            avg = pairing_average(f)
            mu = level_density(f)
            for j, a in enumerate(avg):
                eq = a == mu[2 * j]
                bad += not eq
                res.rows.append([arity, idx, j, a, mu[2 * j], eq])
    res.summary = f"comparisons={len(res.rows)} mismatches={bad}"
    if bad:
        res.fail(f"{bad} mismatches")
    return res


def random_minor_average(f: BoolFn) -> tuple[Fraction, dict[int, Fraction]]:
    """Exact E_pi[Phi_g(pi(1))] over a uniform 2-to-1 map, and its value given each partner of 1.

    Output labels do not change Phi_g(pi(1)), so it suffices to average
    over the unlabelled perfect matchings of [2n].
    """
    m = f.arity
    if m % 2:
        raise ValueError("arity must be even")
    by_partner: dict[int, list[Fraction]] = {}
    for pairs in _matchings(list(range(1, m + 1))):
        image = [0] * m
        for label, (a, b) in enumerate(pairs, start=1):
            image[a - 1] = image[b - 1] = label
        g = apply_minor(f, VarMap(m // 2, tuple(image)))
        partner = pairs[0][1]  # smallest-first recursion puts 1 in the first pair
        by_partner.setdefault(partner, []).append(shapley_exact(g).value(1))
    cond = {i: sum(v, Fraction(0)) / len(v) for i, v in sorted(by_partner.items())}
    return sum(cond.values(), Fraction(0)) / len(cond), cond


def run_lemma_4_4(arities=(4, 6), samples: int = 30, seed: int = 0) -> ExperimentResult:
    res = ExperimentResult("lemma4.4", ["arity", "index", "phi_f1", "expected_phi_g", "min_conditional"],
                           config={"verify": "lemma4.4", "arities": ",".join(map(str, arities)),
                                   "samples": samples, "seed": seed})
    bad = 0
    gammas = []
    for m in arities:
        n = m // 2
        for idx, f in enumerate(_functions(m, samples, seed)):
            phi = shapley_exact(f).value(1)
            if phi < Fraction(1, n):
                continue
            avg, cond = random_minor_average(f)
            bad += not avg > 0
            gammas.append(avg)
            res.rows.append([m, idx, phi, avg, min(cond.values())])
    res.summary = (f"premise_met={len(gammas)} nonpositive={bad} "
                   f"empirical_gamma={min(gammas) if gammas else None}")
    if bad:
        res.fail(f"{bad} zero expectations")
    return res


def run_prop_2_6(max_arity: int = 4, sample_arity: int = 5, samples: int = 300, seed: int = 0) -> ExperimentResult:
    """Every S between two nested boundary sets is itself in the boundary."""
    res = ExperimentResult("prop2.6", ["arity", "functions", "pairs_checked", "failures"],
                           config={"verify": "prop2.6", "max_arity": max_arity,
                                   "sample_arity": sample_arity, "samples": samples, "seed": seed})
    plan = [(n, all_monotone(n)) for n in range(1, max_arity + 1)]
    if sample_arity > max_arity:
        rng = np.random.default_rng(seed)
        plan.append((sample_arity, [random_monotone(sample_arity, rng) for _ in range(samples)]))
    total_bad = 0
    for n, fns in plan:
        pairs = bad = 0
        for f in fns:
            for coord in range(1, n + 1):
                members = [int(s) for s in boundary_sets(f, coord)]
                for a in members:
                    for b in members:
                        if a & ~b:
                            continue
                        pairs += 1
                        bad += not sandwich_check(f, coord, a, b)
        total_bad += bad
        res.rows.append([n, len(fns), pairs, bad])
    res.summary = f"failures={total_bad}"
    if total_bad:
        res.fail(f"{total_bad} failures")
    return res


def run_theorem_5_1(ns=(6, 8, 10, 12)) -> ExperimentResult:
    res = ExperimentResult(
        "thm5.1",
        ["n", "minor_ok", "argmax_g", "argmax_full", "phi_g1", "window_value", "phi_full1",
         "phi_full3", "argmax_g_strict", "ok"],
        config={"verify": "thm5.1", "ns": ",".join(map(str, ns))},
    )
    from .adversarial import exact_phi_g1

    prev = None
    for n in ns:
        rep = verify_theorem(n)
        phi1 = rep.phi_full.value(1)
        res.rows.append([n, rep.minor_ok, rep.argmax_g, rep.argmax_full, rep.phi_g1,
                         exact_phi_g1(n), phi1, rep.phi_full3, rep.argmax_g_strict, rep.ok])
        if not rep.ok:
            res.fail(f"n={n} failed")
        if prev is not None and not phi1 < prev:
            res.fail(f"phi_full(1) did not decrease at n={n}")
        prev = phi1
    if res.passed:
        res.summary = "all checks hold"
    return res


LEMMAS = {
    "3.1": run_lemma_3_1,
    "4.1": run_lemma_4_1,
    "4.2": run_lemma_4_2,
    "4.3": run_lemma_4_3,
    "4.4": run_lemma_4_4,
}
