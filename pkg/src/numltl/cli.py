"""Command-line front end.

Subcommands: ``synth`` runs the refinement loop on a specification file and
writes the resulting controller or counter-strategy artifact; ``check``
decides standalone polynomial constraints over a box; ``abstract`` prints
the pseudo-Boolean view of a specification; ``reencode`` prints the
output-compressed rewrite and its multiplexer; ``simulate`` replays a
controller artifact against randomly sampled sensor values.

Exit codes: 0 success (realizable / valid / feasible / clean simulation),
1 negative verdict (unrealizable within bound / invalid / infeasible /
monitor violations), 2 unknown, 3 input or usage error.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from . import speclang as sl
from .abstraction import AbstractionError, abstract_spec, reencode_outputs
from .bernstein import (
    ConstraintImplication,
    Feasible,
    Infeasible,
    Invalid,
    SearchStats,
    Unknown,
    Valid,
    check_feasibility,
    check_validity,
    DEFAULT_DEPTH,
)
from .cegar import (
    BUCHI,
    SAFETY,
    CegarConfig,
    Realizable,
    Transcript,
    UnrealizableWithinBound,
    bound_schedule_up_to,
    count_theory_checks,
    synthesize,
    valuation_to_constraints,
)
from .controller_file import (
    ControllerFileError,
    parse_controller_file,
    render_dot,
    render_realizable,
    render_unrealizable,
)
from .simulate import SimulationError, simulate
from .valuation import parse_valuation

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_UNKNOWN = 2
EXIT_INPUT_ERROR = 3


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_INPUT_ERROR


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _approx(value: Fraction) -> str:
    return f"{value} (~{float(value)})"


def _point_report(names: tuple[str, ...], point) -> str:
    return ", ".join(f"{n}={_approx(v)}" for n, v in zip(names, point))


# -- synth --------------------------------------------------------------------


def _artifact_path(spec_path: str, out: str | None, suffix: str) -> Path:
    if out is not None:
        return Path(out)
    return Path(Path(spec_path).name).with_suffix(suffix)


def cmd_synth(args: argparse.Namespace) -> int:
    try:
        doc = sl.parse_spec(_read(args.spec))
    except OSError as exc:
        return _fail(str(exc))
    except sl.SpecError as exc:
        return _fail(f"{args.spec}: {exc}")
    cfg = CegarConfig(
        algorithm=args.algorithm,
        bound_schedule=bound_schedule_up_to(args.max_bound),
        depth=args.depth,
        seed=args.seed,
        reencode=not args.no_reencode,
    )
    transcript = Transcript()
    verdict = synthesize(doc, cfg, transcript)
    print(f"spec: {args.spec}")
    schedule = ",".join(str(b) for b in cfg.bound_schedule)
    route = f"algorithm: {cfg.algorithm}"
    if cfg.algorithm == SAFETY:
        route += f" (bound schedule {schedule})"
    print(route)

    if args.transcript:
        Path(args.transcript).write_text(transcript.render(), encoding="utf-8")

    if isinstance(verdict, Unknown):
        print(f"verdict: unknown ({verdict.reason})")
        print(f"theory checks: {count_theory_checks(transcript)}")
        return EXIT_UNKNOWN

    spec = verdict.spec
    refinements = len(spec.input_refinements) + len(spec.output_refinements)
    if isinstance(verdict, Realizable):
        m = verdict.controller
        shown = verdict.bound if verdict.bound is not None else "none"
        print(f"verdict: realizable (bound {shown})")
        print(
            f"controller: {m.n_states} states,"
            f" inputs {','.join(m.inputs) or '-'},"
            f" outputs {','.join(m.outputs) or '-'}"
        )
        if verdict.multiplexer:
            print(f"multiplexer: {len(verdict.multiplexer.rows)} rows (outputs re-encoded)")
        print(
            f"refinements: {refinements}"
            f" ({len(spec.input_refinements)} input, {len(spec.output_refinements)} output)"
        )
        print(f"theory checks: {count_theory_checks(transcript)}")
        out_path = _artifact_path(args.spec, args.out, ".ctrl")
        out_path.write_text(render_realizable(verdict, cfg.algorithm), encoding="utf-8")
        print(f"wrote {out_path}")
        if args.dot:
            Path(args.dot).write_text(render_dot(m), encoding="utf-8")
            print(f"wrote {args.dot}")
        return EXIT_OK

    cs = verdict.counter_strategy
    shown = verdict.bound if verdict.bound is not None else "none"
    print(f"verdict: unrealizable within bound {shown}")
    print(f"counter-strategy: {len(cs.states)} states")
    if verdict.evidence:
        _, table = abstract_spec(doc)
        names = table.input_variables
        print("evidence (every counter-strategy input is feasible):")
        for valuation, witness in verdict.evidence:
            print(f"  {valuation}")
            print(f"    witness {_point_report(names, witness)}")
            for constraint in valuation_to_constraints(valuation, table):
                rendered = sl.format_constraint(constraint, names)
                value = constraint.poly.evaluate(witness)
                print(f"    {rendered}: left side {_approx(value)}")
    print(f"refinements: {refinements}")
    print(f"theory checks: {count_theory_checks(transcript)}")
    out_path = _artifact_path(args.spec, args.out, ".cs")
    out_path.write_text(render_unrealizable(verdict, cfg.algorithm), encoding="utf-8")
    print(f"wrote {out_path}")
    if args.dot:
        Path(args.dot).write_text(render_dot(cs), encoding="utf-8")
        print(f"wrote {args.dot}")
    return EXIT_NEGATIVE


# -- check --------------------------------------------------------------------


def _gather_constraint_text(args: argparse.Namespace) -> str | None:
    parts = []
    if args.file:
        parts.append(_read(args.file))
    for name, lo, hi in args.real:
        parts.append(f"REAL {name} IN [{lo}, {hi}]")
    parts.extend(args.constraint)
    return "\n".join(parts) + "\n" if parts else None


def _render_check(formula, names: tuple[str, ...]) -> str:
    if isinstance(formula, ConstraintImplication):
        return (
            f"{sl.format_constraint(formula.premise, names)}"
            f" -> {sl.format_constraint(formula.conclusion, names)}"
        )
    return sl.format_constraint(formula, names)


def cmd_check(args: argparse.Namespace) -> int:
    try:
        text = _gather_constraint_text(args)
    except OSError as exc:
        return _fail(str(exc))
    if text is None:
        return _fail("nothing to check: give a file or --real/--constraint flags")
    try:
        doc = sl.parse_constraints(text)
    except sl.SpecError as exc:
        return _fail(str(exc))

    names = doc.variables
    if args.feasibility:
        plain = [c for c in doc.checks if not isinstance(c, ConstraintImplication)]
        if len(plain) != len(doc.checks):
            return _fail("implications cannot join a feasibility conjunction")
        stats = SearchStats()
        verdict = check_feasibility(plain, doc.box, args.depth, stats)
        for c in plain:
            print(sl.format_constraint(c, names))
        if isinstance(verdict, Feasible):
            print(f"Feasible: witness {_point_report(names, verdict.witness)}")
            print(f"explored {stats.explored} subboxes")
            return EXIT_OK
        if isinstance(verdict, Infeasible):
            print("Infeasible")
            print(f"explored {stats.explored} subboxes")
            return EXIT_NEGATIVE
        print(f"Unknown ({verdict.reason})")
        print(f"explored {stats.explored} subboxes")
        return EXIT_UNKNOWN

    worst = EXIT_OK
    for formula in doc.checks:
        stats = SearchStats()
        verdict = check_validity(formula, doc.box, args.depth, stats)
        shown = _render_check(formula, names)
        if isinstance(verdict, Valid):
            print(f"{shown}: Valid (explored {stats.explored} subboxes)")
        elif isinstance(verdict, Invalid):
            report = _point_report(names, verdict.witness)
            print(f"{shown}: Invalid, counterexample {report} (explored {stats.explored} subboxes)")
            worst = max(worst, EXIT_NEGATIVE)
        else:
            print(f"{shown}: Unknown ({verdict.reason}) (explored {stats.explored} subboxes)")
            worst = max(worst, EXIT_UNKNOWN)
    return worst


# -- abstract / reencode --------------------------------------------------------


def _predicate_comments(doc: sl.SpecDocument) -> list[str]:
    lines = []
    for side in (sl.INPUT_SIDE, sl.OUTPUT_SIDE):
        names = tuple(d.name for d in doc.real_vars_of(side))
        for p in doc.predicates_of(side):
            rendered = sl.format_constraint(p.constraint, names)
            lines.append(f"## {p.atom} ({side}): {rendered}")
    return lines


def cmd_abstract(args: argparse.Namespace) -> int:
    try:
        doc = sl.parse_spec(_read(args.spec))
    except OSError as exc:
        return _fail(str(exc))
    except sl.SpecError as exc:
        return _fail(f"{args.spec}: {exc}")
    spec, _ = abstract_spec(doc)
    for line in _predicate_comments(doc):
        print(line)
    print(sl.format_spec(spec.document), end="")
    return EXIT_OK


def cmd_reencode(args: argparse.Namespace) -> int:
    try:
        doc = sl.parse_spec(_read(args.spec))
    except OSError as exc:
        return _fail(str(exc))
    except sl.SpecError as exc:
        return _fail(f"{args.spec}: {exc}")
    spec, _ = abstract_spec(doc)
    try:
        encoded, mux = reencode_outputs(spec)
    except AbstractionError as exc:
        return _fail(str(exc))
    if not mux:
        print("no re-encoding applicable")
        print(sl.format_spec(spec.document), end="")
        return EXIT_OK
    print(f"## multiplexer: {len(mux.rows)} rows over {','.join(mux.encoded_atoms)}")
    for word, original in mux.rows:
        print(f"## {word} -> {original}")
    print(sl.format_spec(encoded.document), end="")
    return EXIT_OK


# -- simulate -------------------------------------------------------------------


def cmd_simulate(args: argparse.Namespace) -> int:
    try:
        package = parse_controller_file(_read(args.controller))
    except OSError as exc:
        return _fail(str(exc))
    except ControllerFileError as exc:
        return _fail(f"{args.controller}: {exc}")
    inject = None
    if args.inject:
        try:
            inject = parse_valuation(args.inject)
        except ValueError as exc:
            return _fail(str(exc))
    try:
        trace = simulate(package, args.steps, args.seed, inject)
    except SimulationError as exc:
        return _fail(str(exc))
    print(trace.render(), end="")
    return EXIT_OK if not trace.violations else EXIT_NEGATIVE


# -- argument surface -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="numltl",
        description="Controller synthesis from LTL specifications with polynomial sensor constraints",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="synthesize a controller from a spec file")
    synth.add_argument("spec")
    synth.add_argument("--algorithm", choices=(SAFETY, BUCHI), default=SAFETY)
    synth.add_argument("--max-bound", type=int, default=16, metavar="N")
    synth.add_argument("--depth", type=int, default=DEFAULT_DEPTH, metavar="N")
    synth.add_argument("--seed", type=int, default=0, metavar="N")
    synth.add_argument("--out", metavar="PATH", help="artifact path (.ctrl or .cs)")
    synth.add_argument("--dot", metavar="PATH", help="write a graph description")
    synth.add_argument("--transcript", metavar="PATH", help="write the run transcript")
    synth.add_argument("--no-reencode", action="store_true")
    synth.set_defaults(func=cmd_synth)

    check = sub.add_parser("check", help="check polynomial constraints over a box")
    check.add_argument("file", nargs="?", help="constraint file")
    check.add_argument(
        "--real", nargs=3, action="append", default=[], metavar=("NAME", "LO", "HI")
    )
    check.add_argument("--constraint", "-c", action="append", default=[], metavar="TEXT")
    check.add_argument(
        "--feasibility",
        action="store_true",
        help="search a common satisfying point instead of proving each line valid",
    )
    check.add_argument("--depth", type=int, default=DEFAULT_DEPTH, metavar="N")
    check.set_defaults(func=cmd_check)

    abstract = sub.add_parser("abstract", help="print the pseudo-Boolean view of a spec")
    abstract.add_argument("spec")
    abstract.set_defaults(func=cmd_abstract)

    reencode = sub.add_parser("reencode", help="print the output-compressed rewrite")
    reencode.add_argument("spec")
    reencode.set_defaults(func=cmd_reencode)

    simulate_cmd = sub.add_parser("simulate", help="replay a controller artifact")
    simulate_cmd.add_argument("controller")
    simulate_cmd.add_argument("--steps", type=int, default=20, metavar="N")
    simulate_cmd.add_argument("--seed", type=int, default=0, metavar="N")
    simulate_cmd.add_argument(
        "--inject", metavar="VALUATION", help="force input atoms, e.g. req1=1,req2=1"
    )
    simulate_cmd.set_defaults(func=cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
