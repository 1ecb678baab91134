"""Command-line interface.

Exit codes: 0 success, 1 usage or input error, 2 budget exhausted or search
incomplete, 3 internal invariant violation, 4 a checked property does not hold.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import axioms as ax
from . import corpus
from .core import (
    FULL,
    RGT,
    InvalidAssignment,
    ParseError,
    Rule,
    format_profile,
    make_assignment,
    matrix_to_json,
    parse_profile,
)
from .mechanisms import efficient_house_vectors, rsd, rsd_rule, serial_dictatorship
from .polytope import OBJECTIVES, build_polytope, certify_vertex, random_vertex_search, resolve_active
from .rank_verifier import CANONICAL_MODE, FULL_MODE, AuditFailure, replay_audit, verify_characterization
from .symmetry import DomainTooLarge, canonical, canonical_with_images, enumerate_domain, expand_symmetric_rule

EXIT_OK, EXIT_USAGE, EXIT_INCOMPLETE, EXIT_INTERNAL, EXIT_FAILS = 0, 1, 2, 3, 4

AXIOM_NAMES = ("ete", "support", "expost", "localized", "nonperverse", "sp", "symmetric")

log = logging.getLogger("axiomlab")


class UsageError(Exception):
    pass


def _emit(args, payload: dict) -> None:
    if getattr(args, "no_timing", False):
        payload.pop("timing", None)
    text = json.dumps(payload, indent=1, sort_keys=True) + "\n"
    out = getattr(args, "output", None)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    sys.stdout.write(text)


def _matrix_payload(M, decimal: bool) -> dict:
    out = {"matrix": matrix_to_json(M)}
    if decimal:
        out["decimal"] = [[round(float(v), 6) for v in row] for row in M]
    return out


def _profile(text: str):
    try:
        return parse_profile(text)
    except ParseError as exc:
        raise UsageError(str(exc)) from None


def _parse_matrix(text: str):
    try:
        return make_assignment([[Fraction(v) for v in row.split(",")] for row in text.split(";")])
    except (ValueError, ZeroDivisionError, InvalidAssignment) as exc:
        raise UsageError(f"bad matrix {text!r}: {exc}") from None


def _parse_perm(text: str, n: int) -> tuple[int, ...]:
    try:
        p = tuple(int(v) for v in text.replace(" ", "").split(","))
    except ValueError:
        raise UsageError(f"bad order {text!r}") from None
    if sorted(p) != list(range(n)):
        raise UsageError(f"order {text!r} is not a permutation of 0..{n - 1}")
    return p


# -- commands -------------------------------------------------------------------

def cmd_verify_rank(args) -> int:
    audit = [] if args.audit else None
    start = time.monotonic()
    try:
        rep, dom, _ = verify_characterization(
            args.n, args.mode, budget=args.budget, order=args.order, audit=audit,
            checkpoint=args.checkpoint, checkpoint_every=args.checkpoint_every,
            resume=args.resume, progress_every=args.progress_every, return_state=True)
    except DomainTooLarge as exc:
        raise UsageError(str(exc)) from None
    payload = rep.to_json()
    if audit is not None:
        replayed = replay_audit(dom, audit)
        payload["audit"] = {"steps": len(audit), "cells_replayed": replayed}
    payload["timing"]["wall_seconds"] = round(time.monotonic() - start, 3)
    _emit(args, payload)
    return EXIT_OK if rep.completed else EXIT_INCOMPLETE


def _load_rule(args) -> Rule:
    if args.fixture:
        if args.fixture == "dep_vertex_n3":
            return corpus.dep_vertex_rule()
        if args.fixture == "rgt_rule_n4":
            return corpus.subdomain_rule()
        if args.fixture == "support_not_expost_n4":
            R, M = corpus.example_support_not_expost()
            return Rule(n=len(R), table={R: M}, domain="explicit")
        raise UsageError(f"unknown fixture {args.fixture!r}; known: {', '.join(corpus.FIXTURES)}")
    if not args.file:
        raise UsageError("give a rule file or --fixture")
    try:
        f = Rule.load(args.file)
    except (OSError, json.JSONDecodeError, KeyError, ParseError, InvalidAssignment) as exc:
        raise UsageError(f"cannot read rule file {args.file}: {exc}") from None
    if f.symmetric:
        doms = enumerate_domain(f.n, args.domain or f.domain)
        if args.fill_rsd:
            from .symmetry import canonical_form

            for c in {canonical_form(R) for R in doms}:
                f.table.setdefault(c, rsd(c))
        f = expand_symmetric_rule(f, doms)
    if args.domain:
        f.domain = args.domain
    return f


def cmd_check_rule(args) -> int:
    names = [a.strip() for a in args.axioms.split(",") if a.strip()] if args.axioms else list(AXIOM_NAMES)
    unknown = [a for a in names if a not in AXIOM_NAMES]
    if unknown:
        raise UsageError(f"unknown axioms {unknown}; choose from {', '.join(AXIOM_NAMES)}")
    f = _load_rule(args)
    verdicts = []
    for name in names:
        try:
            verdicts.append(ax.CHECKS[name](f).to_json())
        except ax.DomainNotClosed as exc:
            raise UsageError(f"{name}: {exc}") from None
    _emit(args, {"rule_profiles": len(f), "verdicts": verdicts})
    return EXIT_OK if all(v["holds"] for v in verdicts) else EXIT_FAILS


def cmd_rsd(args) -> int:
    R = _profile(args.profile)
    _emit(args, {"profile": format_profile(R), **_matrix_payload(rsd(R), args.decimal)})
    return EXIT_OK


def cmd_sd(args) -> int:
    R = _profile(args.profile)
    order = _parse_perm(args.order, len(R)) if args.order else tuple(range(len(R)))
    _emit(args, {"profile": format_profile(R), "order": list(order),
                 **_matrix_payload(serial_dictatorship(R, order), args.decimal)})
    return EXIT_OK


def cmd_efficient_set(args) -> int:
    R = _profile(args.profile)
    vecs = sorted(efficient_house_vectors(R))
    _emit(args, {"profile": format_profile(R), "count": len(vecs), "assignments": [list(v) for v in vecs]})
    return EXIT_OK


def cmd_decompose(args) -> int:
    R = _profile(args.profile)
    M = _parse_matrix(args.matrix)
    if len(M) != len(R):
        raise UsageError(f"matrix is {len(M)}x{len(M)}, profile has {len(R)} agents")
    d = ax.decompose_ex_post(R, M)
    if d is None:
        _emit(args, {"profile": format_profile(R), "decomposable": False, "parts": None})
        return EXIT_FAILS
    if d.matrix() != M:
        raise AssertionError("decomposition does not reproduce the matrix")
    _emit(args, {"profile": format_profile(R), "decomposable": True, "parts": d.to_json()})
    return EXIT_OK


def cmd_find_vertex(args) -> int:
    try:
        poly = build_polytope(args.n)
    except DomainTooLarge as exc:
        raise UsageError(str(exc)) from None
    start = time.monotonic()
    certs = random_vertex_search(poly, args.seed, args.max_rounds, objective=args.objective,
                                 budget=args.budget, stop_at_first=args.stop_at_first)
    out = []
    for c in certs:
        # every certificate is recomputed from scratch before it is reported
        again = certify_vertex(poly, c.point)
        if (again.active_rank, again.is_vertex, again.deterministic) != (c.active_rank, c.is_vertex, c.deterministic):
            raise AssertionError(f"round {c.round}: certificate does not re-validate")
        if c.is_vertex and resolve_active(poly, c.point) != c.point:
            raise AssertionError(f"round {c.round}: vertex is not the unique active solution")
        entry = c.to_json(poly.cells if not c.deterministic else None)
        if c.deterministic:
            entry.pop("point", None)
        out.append(entry)
    found = [c.round for c in certs if not c.deterministic]
    _emit(args, {"n": args.n, "seed": args.seed, "objective": args.objective, "rounds": len(certs),
                 "non_deterministic_rounds": found, "certificates": out,
                 "timing": {"elapsed_seconds": round(time.monotonic() - start, 3)}})
    if args.require_nondeterministic and not found:
        return EXIT_INCOMPLETE
    return EXIT_OK


def _pipeline(args, rep) -> int:
    for line in rep.lines():
        log.info(line)
    _emit(args, rep.to_json())
    return EXIT_OK if rep.ok else EXIT_FAILS


def cmd_verify_dep_vertex(args) -> int:
    return _pipeline(args, corpus.verify_dep_vertex())


def cmd_verify_subdomain(args) -> int:
    return _pipeline(args, corpus.verify_subdomain(leave_domain=args.leave_domain))


def cmd_dump_rsd(args) -> int:
    try:
        profiles = enumerate_domain(args.n, args.domain, canonical_only=args.canonical)
    except DomainTooLarge as exc:
        raise UsageError(str(exc)) from None
    f = rsd_rule(args.n, profiles, domain=args.domain)
    f.symmetric = args.canonical
    payload = f.to_json()
    if args.output:
        Path(args.output).write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n", encoding="utf-8")
        sys.stdout.write(json.dumps({"written": args.output, "profiles": len(f)}) + "\n")
    else:
        sys.stdout.write(json.dumps(payload, indent=1, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_canonicalize(args) -> int:
    R = _profile(args.profile)
    res = canonical(R)
    payload = {"profile": format_profile(R), "canonical": format_profile(res.canonical),
               "stabilizer": len(res.witnesses),
               "witness": {"pi": list(res.witnesses[0][0]), "tau": list(res.witnesses[0][1])}}
    if args.agent is not None:
        if not 0 <= args.agent < len(R):
            raise UsageError(f"agent {args.agent} out of range")
        _, imgs = canonical_with_images(R, args.agent)
        payload["agent_images"] = sorted(imgs)
    _emit(args, payload)
    return EXIT_OK


# -- parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="axiomlab", description="Exact verification tools for random assignment rules.")
    p.add_argument("--log-level", default="WARNING")
    p.add_argument("--threads", type=int, default=1, help="worker cap; every command currently runs single-threaded")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--output", "-o", help="also write the JSON result here")
        sp.add_argument("--no-timing", action="store_true", help="omit the timing field")
        return sp

    sp = common(sub.add_parser("verify-rank", help="prove the axiom matrix has full rank"))
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--mode", choices=(FULL_MODE, CANONICAL_MODE), default=FULL_MODE)
    sp.add_argument("--order", choices=("priority", "fifo", "lifo"), default="priority")
    sp.add_argument("--budget", type=float, help="seconds")
    sp.add_argument("--checkpoint")
    sp.add_argument("--checkpoint-every", type=float, default=600.0)
    sp.add_argument("--resume", action="store_true")
    sp.add_argument("--audit", action="store_true", help="log and replay every derivation step")
    sp.add_argument("--progress-every", type=float, default=30.0)
    sp.set_defaults(func=cmd_verify_rank)

    sp = common(sub.add_parser("check-rule", help="check axioms on a rule file"))
    sp.add_argument("file", nargs="?")
    sp.add_argument("--fixture")
    sp.add_argument("--axioms", help=f"comma list from {','.join(AXIOM_NAMES)}")
    sp.add_argument("--domain", choices=(FULL, RGT))
    sp.add_argument("--fill-rsd", action="store_true", help="symmetric files: RSD on unlisted classes")
    sp.set_defaults(func=cmd_check_rule)

    for name, fn in (("rsd", cmd_rsd), ("sd", cmd_sd)):
        sp = common(sub.add_parser(name))
        sp.add_argument("profile")
        sp.add_argument("--decimal", action="store_true")
        if name == "sd":
            sp.add_argument("--order", help="priority order, e.g. 1,0,2")
        sp.set_defaults(func=fn)

    sp = common(sub.add_parser("efficient-set"))
    sp.add_argument("profile")
    sp.set_defaults(func=cmd_efficient_set)

    sp = common(sub.add_parser("decompose", help="ex post decomposition of a matrix"))
    sp.add_argument("profile")
    sp.add_argument("--matrix", required=True, help="rows separated by ';', entries by ','")
    sp.set_defaults(func=cmd_decompose)

    sp = common(sub.add_parser("find-vertex", help="random-direction vertex search"))
    sp.add_argument("--n", type=int, default=3)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--max-rounds", type=int, default=100)
    sp.add_argument("--objective", choices=OBJECTIVES, default="dense")
    sp.add_argument("--budget", type=float)
    sp.add_argument("--stop-at-first", action="store_true")
    sp.add_argument("--require-nondeterministic", action="store_true",
                    help="exit 2 unless a non-deterministic vertex was found")
    sp.set_defaults(func=cmd_find_vertex)

    sp = common(sub.add_parser("verify-appendix-a", help="re-verify the n=3 non-deterministic vertex rule"))
    sp.set_defaults(func=cmd_verify_dep_vertex)

    sp = common(sub.add_parser("verify-subdomain", help="re-verify the n=4 single-odd-house rule"))
    sp.add_argument("--leave-domain", action="store_true")
    sp.set_defaults(func=cmd_verify_subdomain)

    sp = sub.add_parser("dump-rsd")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--domain", choices=(FULL, RGT), default=FULL)
    sp.add_argument("--canonical", action="store_true")
    sp.add_argument("--output", "-o")
    sp.set_defaults(func=cmd_dump_rsd)

    sp = common(sub.add_parser("canonicalize"))
    sp.add_argument("profile")
    sp.add_argument("--agent", type=int)
    sp.set_defaults(func=cmd_canonicalize)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                        format="%(asctime)s %(name)s %(levelname)s %(message)s", stream=sys.stderr)
    if args.threads < 1:
        parser.print_usage(sys.stderr)
        sys.stderr.write("error: --threads must be >= 1\n")
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except (AssertionError, AuditFailure) as exc:
        sys.stderr.write(f"internal invariant violated: {exc}\n")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
