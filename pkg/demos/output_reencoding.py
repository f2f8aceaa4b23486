"""Shrink the output alphabet of the three-client monitor, then attack it.

The monitor's invariants allow exactly four output combinations (stop alone
or exactly one grant), so two code bits replace four output atoms and the
game shrinks from 2^4 to 2^2 controller moves per state.  The synthesized
controller carries the code book; the simulator decodes through it and the
monitor judges the original guarantees.  Keeping the error line forced and
the operator away shows the controller freezing everything on stop: the
grant obligations pile up as pending, but nothing is ever violated.
"""

from pathlib import Path

from numltl import (
    CegarConfig,
    Realizable,
    abstract_spec,
    format_spec,
    parse_controller_file,
    parse_spec,
    parse_valuation,
    reencode_outputs,
    render_realizable,
    simulate,
    synthesize,
)

SPEC = Path(__file__).resolve().parent.parent / "specs" / "error_monitor.spec"


def main() -> None:
    doc = parse_spec(SPEC.read_text())
    spec, _table = abstract_spec(doc)
    encoded, mux = reencode_outputs(spec)

    print("== code book ==")
    for word, original in mux.rows:
        print(f"  {word}  ->  {original}")
    print()
    print("== re-encoded outputs ==")
    outputs = ", ".join(encoded.document.boolean_outputs)
    print(f"  OUTPUT {outputs}  (was: {', '.join(doc.boolean_outputs)})")

    verdict = synthesize(doc, CegarConfig())
    assert isinstance(verdict, Realizable)
    package = parse_controller_file(render_realizable(verdict, "safety"))

    print()
    print("== honest environment, 200 steps ==")
    trace = simulate(package, 200, seed=7)
    tail = trace.render().splitlines()[-1]
    print(f"  {tail}")

    print()
    print("== every step forced to error=1 with operator absent ==")
    held = parse_valuation("error=1,operator=0")
    trace = simulate(package, 6, seed=7, inject=held)
    print(trace.render())


if __name__ == "__main__":
    main()
