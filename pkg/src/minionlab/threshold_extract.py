"""Extract a certified threshold minor THR_{L',tau}, L' in {L, L+1}, from a monotone function.

The case split follows the critical probability p_c of f:

* p_c < a: random maps [n] -> [L] until the minor is THR_{L,1};
* p_c > 1 - a: the same on the dual, reading the map back as THR_{L,L};
* otherwise: pick (L', tau) whose grid cell ((tau-1)/L', tau/L') contains
  the (eps, 1-eps) window of P_p(f), then random maps [n] -> [L'] until the
  minor is THR_{L',tau}.

When the window is wider than the grid gap 1/(L(L+1)) no cell is
guaranteed to work; the search then accepts any threshold minor of arity
L or L+1 (alternating) and reports ``window_fits=False``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .boolfn import (
    DEFAULT_TOL,
    BoolFn,
    Bracket,
    critical_bracket,
    dual,
    make_threshold,
    popcounts,
    require_monotone,
    threshold_brackets,
)
from .minors import VarMap, apply_minor, minor_indices
from .shapley import shapley_exact

LOW_PC = "low_pc"
HIGH_PC = "high_pc"
MID_PC = "mid_pc"
TRIVIAL = "trivial_constant"


@dataclass(frozen=True)
class ExtractParams:
    L: int
    retries: int = 1024
    tol: Fraction = DEFAULT_TOL

    def __post_init__(self):
        if self.L < 2:
            raise ValueError("L must be at least 2")
        if self.retries < 1:
            raise ValueError("retries must be positive")

    @property
    def a(self) -> Fraction:
        return Fraction(1, self.L**3)

    @property
    def eps(self) -> Fraction:
        return Fraction(1, 2 ** (self.L + 1))

    @property
    def gamma(self) -> Fraction:
        return Fraction(1, self.L**3)

    @property
    def grid_gap(self) -> Fraction:
        return Fraction(1, self.L * (self.L + 1))


@dataclass(frozen=True)
class ThresholdCertificate:
    L_prime: int
    tau: int
    map: VarMap
    case_taken: str
    attempts: int = 0
    window_fits: bool = True

    def verify(self, f: BoolFn) -> bool:
        return apply_minor(f, self.map) == make_threshold(self.L_prime, self.tau)


class ExtractionError(RuntimeError):
    def __init__(self, reason: str, diagnostics: dict, f: BoolFn | None = None):
        diagnostics = dict(diagnostics)
        if f is not None and not f.is_constant:
            # lets callers correlate failures with how far f is from small Shapley values
            diagnostics["max_phi"] = max(shapley_exact(f).values)
        super().__init__(f"{reason}: {diagnostics}")
        self.reason = reason
        self.diagnostics = diagnostics


def _threshold_tau(table: np.ndarray, k: int) -> int | None:
    """tau if ``table`` (arity k) equals THR_{k,tau}, else None."""
    pc = popcounts(k)
    ones = pc[table]
    zeros = pc[~table]
    tau = int(ones.min()) if ones.size else k + 1
    if tau > k:
        return None
    if zeros.size and int(zeros.max()) >= tau:
        return None
    return tau


def is_or_minor(g: BoolFn) -> bool:
    """g == THR_{L,1} for monotone g: g(empty) = 0 and every singleton maps to 1."""
    t = g.table
    return (not t[0]) and all(t[1 << i] for i in range(g.arity))


def choose_cell(p1: Bracket, p2: Bracket, L: int) -> tuple[int, int] | None:
    """(L', tau) with (tau-1)/L' < p1 and tau/L' > p2, trying L before L+1."""
    for Lp in (L, L + 1):
        for tau in range(1, Lp + 1):
            if Fraction(tau - 1, Lp) < p1.lo and Fraction(tau, Lp) > p2.hi:
                return Lp, tau
    return None


def _random_map(rng: np.random.Generator, n: int, k: int) -> VarMap:
    return VarMap(k, tuple(int(v) + 1 for v in rng.integers(0, k, size=n)))


def _sample_minor_table(f: BoolFn, pi: VarMap) -> np.ndarray:
    return f.table[minor_indices(pi)]


def _search(f: BoolFn, k_options, want_tau, retries: int, rng):
    """Sample iid maps until the minor is a wanted threshold; returns (Lp, tau, map, tries)."""
    for attempt in range(1, retries + 1):
        k = k_options[(attempt - 1) % len(k_options)]
        pi = _random_map(rng, f.arity, k)
        table = _sample_minor_table(f, pi)
        tau = _threshold_tau(table, k)
        if tau is not None and (want_tau is None or tau == want_tau):
            return k, tau, pi, attempt
    return None


def extract_threshold_minor(f: BoolFn, params: ExtractParams, seed: int) -> ThresholdCertificate:
    require_monotone(f)
    L = params.L
    n = f.arity
    if f.is_constant:
        if n < L:
            raise ExtractionError("arity below L", {"arity": n, "L": L})
        if not f.table[0]:
            # THR_{L',tau} with tau <= L' is 1 on the all-ones input
            raise ExtractionError("constant 0 has no threshold minor", {"L": L})
        pi = VarMap(L, tuple(min(i, L) for i in range(1, n + 1)))
        return _certified(f, ThresholdCertificate(L, 0, pi, TRIVIAL))

    rng = np.random.default_rng(seed)
    pc = critical_bracket(f, params.tol)
    a = params.a
    diag = {"p_c": (pc.lo, pc.hi)}

    if pc.hi < a:
        found = _search(f, (L,), 1, params.retries, rng)
        if found is None:
            raise ExtractionError("retries exhausted", {**diag, "case": LOW_PC}, f)
        Lp, tau, pi, tries = found
        return _certified(f, ThresholdCertificate(Lp, tau, pi, LOW_PC, tries))
    if pc.lo > 1 - a:
        found = _search(dual(f), (L,), 1, params.retries, rng)
        if found is None:
            raise ExtractionError("retries exhausted", {**diag, "case": HIGH_PC}, f)
        _, _, pi, tries = found
        return _certified(f, ThresholdCertificate(L, L, pi, HIGH_PC, tries))
    if pc.lo < a or pc.hi > 1 - a:
        raise ExtractionError("indeterminate case", {**diag, "a": a}, f)

    p1, p2 = threshold_brackets(f, params.eps, params.tol)
    diag.update(p1=(p1.lo, p1.hi), p2=(p2.lo, p2.hi), width=p2.hi - p1.lo)
    cell = choose_cell(p1, p2, L) if p2.hi - p1.lo < params.grid_gap else None
    if cell is not None:
        Lp, tau = cell
        found = _search(f, (Lp,), tau, params.retries, rng)
        if found is None:
            raise ExtractionError("retries exhausted", {**diag, "case": MID_PC, "cell": cell}, f)
        Lp, tau, pi, tries = found
        return _certified(f, ThresholdCertificate(Lp, tau, pi, MID_PC, tries))

    found = _search(f, (L, L + 1), None, params.retries, rng)
    if found is None:
        raise ExtractionError("threshold interval exceeds grid gap", {**diag, "case": MID_PC}, f)
    Lp, tau, pi, tries = found
    return _certified(f, ThresholdCertificate(Lp, tau, pi, MID_PC, tries, window_fits=False))


def _certified(f: BoolFn, cert: ThresholdCertificate) -> ThresholdCertificate:
    if not cert.verify(f):
        raise AssertionError(f"certificate failed re-verification: {cert}")
    return cert
