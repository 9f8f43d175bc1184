"""Command-line interface.

Exit codes: 0 on success or a passing verdict, 1 on a failing verdict
(inequivalence, failed verification, nonconforming trace), 2 on usage or
input errors.  Identical flags and inputs produce byte-identical output;
timings are only printed on request.
"""
from __future__ import annotations

import argparse
import sys
from typing import Optional

from . import qaqp, qsim
from .equivalence import (
    accepts_trace,
    branching_bisim,
    distinguishing_trace,
    minimize,
    strong_bisim,
)
from .semantics import BudgetExceededError, DEFAULT_BUDGET, Lts, explore
from .speclang import SpecError, load, pretty
from .terms import TermError


class _CliError(Exception):
    pass


def _load(path: str):
    try:
        return load(path)
    except FileNotFoundError:
        raise _CliError(f"no such file: {path}")
    except SpecError as exc:
        raise _CliError(f"{path}: {exc}")


def _write_lts(lts: Lts, fmt: str, output: Optional[str]) -> None:
    text = lts.to_aut() if fmt == "aut" else lts.to_text()
    if output is None:
        sys.stdout.write(text)
    else:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)


def _entry_lts(doc, term: Optional[str], budget: int) -> Lts:
    entry = doc.entry_or_var(term)
    return explore(entry, doc.comm, budget)


def cmd_parse(args) -> int:
    doc = _load(args.file)
    n_eq = len(doc.spec.equations) if doc.spec else 0
    sys.stdout.write(
        f"parsed: {len(doc.actions)} actions, {len(doc.sets)} sets, "
        f"{len(doc.comm.rules)} communication rules, {n_eq} equations, "
        f"entry {'present' if doc.entry is not None else 'absent'}\n"
    )
    if not args.quiet:
        sys.stdout.write(pretty(doc))
    return 0


def cmd_explore(args) -> int:
    doc = _load(args.file)
    lts = _entry_lts(doc, args.term, args.budget)
    sys.stdout.write(
        f"explored {lts.num_states} states, {lts.num_transitions} transitions\n"
    )
    _write_lts(lts, args.format, args.output)
    return 0


def cmd_minimize(args) -> int:
    doc = _load(args.file)
    lts = _entry_lts(doc, args.term, args.budget)
    small = minimize(lts, args.equivalence)
    sys.stdout.write(
        f"minimized {lts.num_states} -> {small.num_states} states "
        f"({args.equivalence})\n"
    )
    _write_lts(small, args.format, args.output)
    return 0


def cmd_check(args) -> int:
    doc = _load(args.file)
    if doc.spec is None:
        raise _CliError("document has no equations")
    l1 = explore(doc.entry_or_var(args.lhs), doc.comm, args.budget)
    l2 = explore(doc.entry_or_var(args.rhs), doc.comm, args.budget)
    if args.equivalence == "strong":
        verdict, _ = strong_bisim(l1, l2)
    else:
        verdict, _ = branching_bisim(l1, l2, rooted=args.rooted)
    flavor = args.equivalence + (" (rooted)" if args.equivalence == "branching" and args.rooted else "")
    if verdict:
        sys.stdout.write(f"{args.lhs} and {args.rhs} are {flavor} equivalent\n")
        return 0
    sys.stdout.write(f"{args.lhs} and {args.rhs} are NOT {flavor} equivalent\n")
    cex = distinguishing_trace(l1, l2)
    if cex is None:
        sys.stdout.write(
            "no distinguishing observable sequence: the difference is in "
            "branching or deadlock structure\n"
        )
    else:
        trace, side = cex
        owner = args.lhs if side == "left" else args.rhs
        sys.stdout.write(
            f"only {owner} admits: " + " ".join(str(l) for l in trace) + "\n"
        )
    return 1


def cmd_verify_qaqp(args) -> int:
    cfg = qaqp.QaqpConfig(
        delta_size=args.delta,
        budget=args.budget,
        check_reference_tables=not args.no_tables,
        ack_after_delivery=args.ack_after_delivery,
    )
    report = qaqp.verify(cfg)
    if args.json:
        sys.stdout.write(report.render_json(include_timings=args.timings))
    else:
        sys.stdout.write(report.render_text(include_timings=args.timings))
    return 0 if report.verdict else 1


def cmd_simulate(args) -> int:
    channel = qsim.NoisyChannel(args.p, seed=args.seed, model=args.model)
    data = qsim.random_qubit_states(args.count, seed=args.seed)
    try:
        delivered, trace = qsim.run_protocol(
            data,
            channel,
            seed=args.seed + 1,
            delta_size=args.delta,
            retry_cap=args.retry_cap,
            ack_after_delivery=args.ack_after_delivery,
        )
    except qsim.RetryBudgetExceeded as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    fidelities = [qsim.fidelity(d, s) for d, s in zip(delivered, data)]
    if args.trace:
        for line in trace.lines():
            sys.stdout.write(line + "\n")
    sys.stdout.write(
        f"sessions {len(trace.sessions)}  delivered {len(delivered)}  "
        f"corruptions {trace.total_corruptions}  "
        f"retransmissions {trace.total_retransmissions}\n"
    )
    sys.stdout.write(f"worst fidelity {min(fidelities):.9f}\n")
    if args.conformance:
        cfg = qaqp.QaqpConfig(
            delta_size=args.delta, ack_after_delivery=args.ack_after_delivery
        )
        enc = explore(qaqp.build_encapsulated(cfg), qaqp.comm_function(), cfg.budget)
        ok = accepts_trace(enc, trace.labels, weak=True)
        sys.stdout.write(f"conformance: {'accepted' if ok else 'REJECTED'}\n")
        if not ok:
            return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qacp",
        description="process-calculus verification toolkit with a bundled "
        "alternating-qubit protocol model and simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse a .qacp file and print its canonical form")
    p.add_argument("file", help="path or bundled:<name> (qaqp, tiny)")
    p.add_argument("--quiet", action="store_true", help="report only, no pretty form")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("explore", help="explore the entry term into an LTS")
    p.add_argument("file")
    p.add_argument("--term", help="explore this equation instead of the entry")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--format", choices=("aut", "text"), default="text")
    p.add_argument("--output", help="write the LTS here instead of stdout")
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("minimize", help="explore and quotient by a bisimulation")
    p.add_argument("file")
    p.add_argument("--term")
    p.add_argument("--equivalence", choices=("strong", "branching"), default="branching")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--format", choices=("aut", "text"), default="text")
    p.add_argument("--output")
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("check", help="check two equations for equivalence")
    p.add_argument("file")
    p.add_argument("lhs")
    p.add_argument("rhs")
    p.add_argument("--equivalence", choices=("strong", "branching"), default="branching")
    p.add_argument("--rooted", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("verify-qaqp", help="run the protocol verification pipeline")
    p.add_argument("--delta", type=int, default=2, help="data domain size")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--no-tables", action="store_true",
                   help="skip the hand-derived table regression")
    p.add_argument("--ack-after-delivery", action="store_true",
                   help="verify the corrected acknowledgement order")
    p.add_argument("--json", action="store_true")
    p.add_argument("--timings", action="store_true")
    p.set_defaults(func=cmd_verify_qaqp)

    p = sub.add_parser("simulate", help="run the statevector simulator")
    p.add_argument("--p", type=float, default=0.0, help="corruption probability")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=10, help="number of data qubits")
    p.add_argument("--model", choices=qsim.CHANNEL_MODELS, default="detectable-flag")
    p.add_argument("--delta", type=int, default=1,
                   help="data domain size for the abstract labels")
    p.add_argument("--retry-cap", type=int, default=10_000)
    p.add_argument("--ack-after-delivery", action="store_true")
    p.add_argument("--conformance", action="store_true",
                   help="check the trace against the explored model")
    p.add_argument("--trace", action="store_true", help="print the action trace")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _CliError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except (SpecError, TermError, BudgetExceededError, qsim.SimError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
