"""Command-line front end.

Exit status: 0 on success, 1 on usage or input errors, 2 when a
verification check fails.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

from . import experiments
from .adversarial import build_f_full, construct_half, verify_theorem
from .blp_aip import decide
from .boolfn import BoolFn, FormatError, dumps, is_monotone, read_fn, write_fn
from .gadget import (
    InvalidAssignment,
    format_label_cover,
    make_rich_instance,
    parse_label_cover,
    reduce,
    soundness_experiment,
)
from .lemma_even import verify_lemma_even
from .minors import VarMap, apply_minor, sample_two_to_one
from .pcsp import (
    TemplateError,
    brute_force_solutions,
    check_polymorphism,
    enumerate_polymorphisms,
    format_instance,
    parse_instance,
    parse_template,
)
from .shapley import shapley_exact, shapley_montecarlo
from .threshold_extract import ExtractParams, ExtractionError, extract_threshold_minor

EXIT_OK, EXIT_USAGE, EXIT_FAILED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _read(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _fn(path: str) -> BoolFn:
    try:
        return read_fn(path)
    except FormatError as exc:
        raise UsageError(f"{path}: {exc}") from None
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _template(path: str):
    try:
        return parse_template(_read(path))
    except TemplateError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _instance(path: str):
    try:
        return parse_instance(_read(path))
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _label_cover(path: str):
    try:
        return parse_label_cover(_read(path))
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# handlers


def cmd_shapley(args) -> int:
    f = _fn(args.fn)
    if not is_monotone(f):
        raise UsageError("function is not monotone")
    if args.mc:
        if args.seed is None:
            raise UsageError("--mc needs --seed")
        phi = shapley_montecarlo(f, args.mc, args.seed)
        for i, v in enumerate(phi.values, 1):
            print(f"{i} {v:.6f} +- {phi.half_width:.6f}")
    else:
        for i, v in enumerate(shapley_exact(f).values, 1):
            print(f"{i} {v} {float(v):.6f}")
    return EXIT_OK


def cmd_minor(args) -> int:
    f = _fn(args.fn)
    if args.random_2to1:
        if args.seed is None:
            raise UsageError("--random-2to1 needs --seed")
        if f.arity % 2:
            raise UsageError("a 2-to-1 minor needs even arity")
        pi = sample_two_to_one(f.arity // 2, args.seed)
        print(f"map {pi}")
    elif args.map:
        try:
            pi = VarMap.parse(args.map)
        except ValueError as exc:
            raise UsageError(f"bad map: {exc}") from None
    else:
        raise UsageError("give --map or --random-2to1")
    if pi.from_arity != f.arity:
        raise UsageError(f"map has {pi.from_arity} entries, function has arity {f.arity}")
    sys.stdout.write(dumps(apply_minor(f, pi)))
    return EXIT_OK


def cmd_extract(args) -> int:
    f = _fn(args.fn)
    if not is_monotone(f):
        raise UsageError("function is not monotone")
    try:
        cert = extract_threshold_minor(f, ExtractParams(args.L, args.retries), args.seed)
    except ExtractionError as exc:
        print(f"failed: {exc.reason}")
        for k, v in exc.diagnostics.items():
            print(f"  {k}: {v}")
        return EXIT_FAILED
    print(f"L_prime {cert.L_prime}")
    print(f"tau {cert.tau}")
    print(f"map {cert.map}")
    print(f"case {cert.case_taken} attempts {cert.attempts} window_fits {cert.window_fits}")
    return EXIT_OK


def cmd_adversarial(args) -> int:
    rep = verify_theorem(args.n)
    print(f"n {rep.n}")
    print(f"g_is_minor {rep.minor_ok}")
    print(f"argmax_phi_g {rep.argmax_g} (strict {rep.argmax_g_strict})")
    print(f"argmax_phi_full {rep.argmax_full}")
    print(f"phi_g(1) {rep.phi_g1} {float(rep.phi_g1):.6f}")
    print(f"phi_full(1) {rep.phi_full.value(1)} {float(rep.phi_full.value(1)):.6g}")
    print(f"phi_full(3) {rep.phi_full3} {float(rep.phi_full3):.6f}")
    print(f"ok {rep.ok}")
    if args.emit_fns:
        os.makedirs(args.emit_fns, exist_ok=True)
        half = construct_half(args.n)
        write_fn(half.g, os.path.join(args.emit_fns, "g.fn"))
        write_fn(half.f_half, os.path.join(args.emit_fns, "f_half.fn"))
        write_fn(build_f_full(args.n, half.f_half), os.path.join(args.emit_fns, "f_full.fn"))
    return EXIT_OK if rep.ok else EXIT_FAILED


def cmd_pcsp(args) -> int:
    t = _template(args.template)
    if args.pcsp_cmd == "check-poly":
        ok = check_polymorphism(_fn(args.fn), t)
        print("polymorphism" if ok else "not a polymorphism")
        return EXIT_OK
    if args.pcsp_cmd == "enumerate":
        if not 1 <= args.arity <= 4:
            raise UsageError("--arity must lie in [1, 4]")
        polys = enumerate_polymorphisms(t, args.arity, args.monotone)
        print(f"count {len(polys)}")
        for f in polys:
            print(dumps(f).replace("\n", " ").strip())
        return EXIT_OK
    inst = _instance(args.instance)
    try:
        inst.check_against(t)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.pcsp_cmd == "brute":
        strong = brute_force_solutions(inst, t, "strong")
        weak = brute_force_solutions(inst, t, "weak")
        print(f"strong_satisfiable {bool(strong.any())} solutions {int(strong.sum())}")
        print(f"weak_satisfiable {bool(weak.any())} solutions {int(weak.sum())}")
        return EXIT_OK
    v = decide(inst, t, args.method)
    print(v.summary())
    if args.explain and v.system is not None:
        print(v.system.explain())
    return EXIT_OK


def cmd_gadget(args) -> int:
    if args.gadget_cmd == "make":
        try:
            lc = make_rich_instance(args.sigma, args.copies, args.left, args.right, args.seed)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        _emit(format_label_cover(lc), args.out)
        return EXIT_OK
    lc = _label_cover(args.lc)
    t = _template(args.template)
    try:
        red = reduce(lc, t)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.gadget_cmd == "reduce":
        print(f"# variables {red.instance.num_vars} constraints {len(red.instance.constraints)} "
              f"merges {red.equality_merges}", file=sys.stderr)
        _emit(format_instance(red.instance), args.out)
        return EXIT_OK
    if lc.planted is None:
        raise UsageError("soundness needs a planted labelling in the label-cover file")
    try:
        assignment = red.dictator_assignment(*lc.planted)
        res = soundness_experiment(red, t, assignment, Fraction(args.lam), args.seed, args.trials)
    except (ValueError, InvalidAssignment) as exc:
        print(f"failed: {exc}")
        return EXIT_FAILED
    print(f"fraction {res.fraction} {float(res.fraction):.6f}")
    print(f"max_left_set {res.max_left_set}")
    print(f"degenerate {','.join(res.degenerate) or '-'}")
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.lemma == "even":
        if not args.fn:
            raise UsageError("--lemma even needs --fn")
        f = _fn(args.fn)
        if not is_monotone(f) or f.arity % 2 == 0:
            raise UsageError("--lemma even needs a monotone function of odd arity")
        rep = verify_lemma_even(f, args.coord)
        print(rep.line())
        return EXIT_FAILED if rep.positive is False else EXIT_OK
    if args.lemma:
        if args.lemma == "4.1":
            res = experiments.run_lemma_4_1(args.arity or 4, args.samples, args.seed)
        elif args.lemma == "4.4":
            res = experiments.run_lemma_4_4(seed=args.seed, samples=args.samples)
        elif args.lemma == "4.3":
            res = experiments.run_lemma_4_3(seed=args.seed)
        elif args.lemma == "3.1":
            res = experiments.run_lemma_3_1(args.arity or 4)
        elif args.lemma == "4.2":
            res = experiments.run_lemma_4_2()
        else:
            raise UsageError(f"unknown lemma {args.lemma}")
    elif args.thm == "5.1":
        res = experiments.run_theorem_5_1(tuple(args.n) if args.n else (6, 8, 10, 12))
    elif args.prop == "2.6":
        res = experiments.run_prop_2_6(seed=args.seed)
    else:
        raise UsageError("give one of --lemma, --thm 5.1 or --prop 2.6")
    if args.out:
        _emit(res.to_csv(), args.out)
    print(f"{res.name}: {'pass' if res.passed else 'FAIL'} {res.summary}")
    return EXIT_OK if res.passed else EXIT_FAILED


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="minionlab", description="Shapley values, minors and promise CSPs on monotone Boolean functions.")
    sub = p.add_subparsers(dest="cmd", parser_class=_Parser, required=True)

    s = sub.add_parser("shapley", help="exact or sampled Shapley values")
    s.add_argument("--fn", required=True)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--exact", action="store_true")
    g.add_argument("--mc", type=int, metavar="N")
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_shapley)

    s = sub.add_parser("minor", help="apply a coordinate map")
    s.add_argument("--fn", required=True)
    s.add_argument("--map")
    s.add_argument("--random-2to1", action="store_true")
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_minor)

    s = sub.add_parser("extract", help="find a threshold minor")
    s.add_argument("--fn", required=True)
    s.add_argument("--L", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--retries", type=int, default=1024)
    s.set_defaults(func=cmd_extract)

    s = sub.add_parser("adversarial", help="build and check the adversarial 2-to-1 pair")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--emit-fns", metavar="DIR")
    s.set_defaults(func=cmd_adversarial)

    s = sub.add_parser("pcsp", help="template and instance tools")
    psub = s.add_subparsers(dest="pcsp_cmd", parser_class=_Parser, required=True)
    c = psub.add_parser("check-poly")
    c.add_argument("--template", required=True)
    c.add_argument("--fn", required=True)
    c = psub.add_parser("enumerate")
    c.add_argument("--template", required=True)
    c.add_argument("--arity", type=int, required=True)
    c.add_argument("--monotone", action="store_true")
    for name in ("brute", "decide"):
        c = psub.add_parser(name)
        c.add_argument("--template", required=True)
        c.add_argument("--instance", required=True)
        if name == "decide":
            c.add_argument("--explain", action="store_true")
            c.add_argument("--method", choices=("grouped", "per_weight"), default="grouped")
    s.set_defaults(func=cmd_pcsp)

    s = sub.add_parser("gadget", help="label cover generation and reduction")
    gsub = s.add_subparsers(dest="gadget_cmd", parser_class=_Parser, required=True)
    c = gsub.add_parser("make")
    c.add_argument("--sigma", type=int, required=True)
    c.add_argument("--copies", type=int, default=1)
    c.add_argument("--left", type=int, default=1)
    c.add_argument("--right", type=int)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out")
    c = gsub.add_parser("reduce")
    c.add_argument("--lc", required=True)
    c.add_argument("--template", required=True)
    c.add_argument("--out")
    c = gsub.add_parser("soundness")
    c.add_argument("--lc", required=True)
    c.add_argument("--template", required=True)
    c.add_argument("--lam", default="1/2")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--trials", type=int, default=100)
    s.set_defaults(func=cmd_gadget)

    s = sub.add_parser("verify", help="run a verification sweep")
    s.add_argument("--lemma", choices=("3.1", "4.1", "4.2", "4.3", "4.4", "even"))
    s.add_argument("--thm", choices=("5.1",))
    s.add_argument("--prop", choices=("2.6",))
    s.add_argument("--arity", type=int)
    s.add_argument("--n", type=int, nargs="+")
    s.add_argument("--fn")
    s.add_argument("--coord", type=int, default=1)
    s.add_argument("--samples", type=int, default=30)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", help="CSV output path")
    s.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
