"""Seeded closed-loop simulation of a synthesized controller.

Each step samples the declared Boolean inputs and real sensor values (dyadic
rationals with 20 fractional bits, uniform over the declared ranges),
evaluates the input predicates exactly, steps the controller, decodes the
emitted outputs through the multiplexer, and feeds the combined valuation to
a guarantee monitor.  Safety guarantees (ALWAYS over a body whose only
temporal operator is NEXT) are judged exactly on every complete window;
liveness guarantees are never judged violated on a finite trace and instead
report their unresolved obligations at the end.

An injection valuation overrides chosen input atoms after predicate
evaluation, which can force combinations the theory rules out.  Inputs the
controller has no transition for (possible only under injection, since the
loop samples within the declared ranges) leave the state unchanged and emit
all-false outputs; the monitor judges the consequences.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from . import speclang as sl
from .controller_file import KIND_CONTROLLER, ControllerPackage
from .valuation import Valuation

SAMPLE_BITS = 20

OK = "ok"
STUCK = "stuck"


class SimulationError(ValueError):
    pass


@dataclass(frozen=True)
class TraceStep:
    index: int
    samples: tuple[tuple[str, Fraction], ...]
    inputs: Valuation
    outputs: Valuation
    state_before: int
    state_after: int
    stuck: bool
    violations: tuple[str, ...]  # guarantee ids first violated at this step


@dataclass(frozen=True)
class SimulationTrace:
    seed: int
    steps: tuple[TraceStep, ...]
    violations: tuple[tuple[str, int], ...]  # (guarantee id, first violating step)
    pending: tuple[tuple[str, int], ...]  # (liveness id, unresolved obligations)
    unmonitored: tuple[str, ...]

    def render(self) -> str:
        lines = [f"SIM seed={self.seed} steps={len(self.steps)}"]
        for s in self.steps:
            samples = ",".join(f"{n}={v}" for n, v in s.samples) if s.samples else "-"
            status = f"violation({','.join(s.violations)})" if s.violations else OK
            if s.stuck:
                status += f" {STUCK}"
            lines.append(
                f"{s.index} {samples} {s.inputs if s.inputs.pairs else '-'}"
                f" {s.outputs if s.outputs.pairs else '-'}"
                f" {s.state_before}->{s.state_after} {status}"
            )
        for gid, step in self.violations:
            lines.append(f"VIOLATION {gid} step={step}")
        for gid, count in self.pending:
            lines.append(f"PENDING {gid} count={count}")
        for gid in self.unmonitored:
            lines.append(f"UNMONITORED {gid}")
        outcome = OK if not self.violations else f"violations={len(self.violations)}"
        lines.append(f"RESULT {outcome}")
        return "\n".join(lines) + "\n"


# -- guarantee monitor -------------------------------------------------------


def _next_depth(f: sl.Formula) -> int | None:
    """Max NEXT nesting when the formula is otherwise propositional."""
    if isinstance(f, (sl.Atom, sl.TrueFormula, sl.FalseFormula)):
        return 0
    if isinstance(f, sl.Not):
        return _next_depth(f.operand)
    if isinstance(f, (sl.And, sl.Or, sl.Implies)):
        left = _next_depth(f.left)
        right = _next_depth(f.right)
        if left is None or right is None:
            return None
        return max(left, right)
    if isinstance(f, sl.Next):
        inner = _next_depth(f.operand)
        return None if inner is None else inner + 1
    return None


def _eval_windowed(f: sl.Formula, trace: list[Valuation], t: int) -> bool:
    if isinstance(f, sl.Atom):
        return trace[t][f.name]
    if isinstance(f, sl.TrueFormula):
        return True
    if isinstance(f, sl.FalseFormula):
        return False
    if isinstance(f, sl.Not):
        return not _eval_windowed(f.operand, trace, t)
    if isinstance(f, sl.And):
        return _eval_windowed(f.left, trace, t) and _eval_windowed(f.right, trace, t)
    if isinstance(f, sl.Or):
        return _eval_windowed(f.left, trace, t) or _eval_windowed(f.right, trace, t)
    if isinstance(f, sl.Implies):
        return not _eval_windowed(f.left, trace, t) or _eval_windowed(f.right, trace, t)
    if isinstance(f, sl.Next):
        return _eval_windowed(f.operand, trace, t + 1)
    raise SimulationError(f"formula is not windowed-propositional: {f}")


@dataclass(frozen=True)
class MonitorReport:
    violations: tuple[tuple[str, int], ...]
    pending: tuple[tuple[str, int], ...]
    unmonitored: tuple[str, ...]


def _holds(f: sl.Formula, w: Valuation) -> bool:
    return sl.evaluate_propositional(f, w.as_dict())


def _monitor_one(g: sl.Formula, trace: list[Valuation]) -> tuple[int | None, int | None]:
    """Judge one guarantee; returns (first violating step or None, pending
    obligation count or None when the shape is not monitorable)."""
    horizon = len(trace)
    if isinstance(g, sl.Always):
        body = g.operand
        depth = _next_depth(body)
        if depth is not None:
            for t in range(horizon - depth):
                if not _eval_windowed(body, trace, t):
                    return t, 0
            return None, 0
        if isinstance(body, sl.Implies) and sl.is_propositional(body.left):
            p, rhs = body.left, body.right
            if isinstance(rhs, sl.Eventually) and sl.is_propositional(rhs.operand):
                pending = 0
                for t in range(horizon):
                    if _holds(p, trace[t]) and not any(
                        _holds(rhs.operand, w) for w in trace[t:]
                    ):
                        pending += 1
                return None, pending
            if (
                isinstance(rhs, sl.Until)
                and sl.is_propositional(rhs.left)
                and sl.is_propositional(rhs.right)
            ):
                pending = 0
                for t in range(horizon):
                    if not _holds(p, trace[t]):
                        continue
                    for u in range(t, horizon):
                        if _holds(rhs.right, trace[u]):
                            break
                        if not _holds(rhs.left, trace[u]):
                            return u, 0
                    else:
                        pending += 1
                return None, pending
        if isinstance(body, sl.Eventually) and sl.is_propositional(body.operand):
            last = max(
                (t for t in range(horizon) if _holds(body.operand, trace[t])),
                default=-1,
            )
            return None, horizon - last - 1
    if isinstance(g, sl.Eventually) and sl.is_propositional(g.operand):
        resolved = any(_holds(g.operand, w) for w in trace)
        return None, 0 if resolved else 1
    return None, None


def monitor_guarantees(doc: sl.SpecDocument, trace: list[Valuation]) -> MonitorReport:
    violations = []
    pending = []
    unmonitored = []
    for i, g in enumerate(doc.guarantees, start=1):
        gid = f"g{i}"
        violated_at, open_count = _monitor_one(g, trace)
        if violated_at is not None:
            violations.append((gid, violated_at))
        elif open_count is None:
            unmonitored.append(gid)
        elif open_count:
            pending.append((gid, open_count))
    return MonitorReport(tuple(violations), tuple(pending), tuple(unmonitored))


# -- the closed loop ---------------------------------------------------------


def _sample_real(rng: random.Random, lower: Fraction, upper: Fraction) -> Fraction:
    k = rng.randrange(2**SAMPLE_BITS + 1)
    return lower + (upper - lower) * Fraction(k, 2**SAMPLE_BITS)


def simulate(
    package: ControllerPackage,
    steps: int,
    seed: int = 0,
    inject: Valuation | None = None,
) -> SimulationTrace:
    if package.kind != KIND_CONTROLLER or package.controller is None:
        raise SimulationError("only controller artifacts can be simulated")
    doc = package.document
    m = package.controller
    mux = package.multiplexer
    rng = random.Random(seed)

    real_decls = doc.real_vars_of(sl.INPUT_SIDE)
    input_preds = doc.predicates_of(sl.INPUT_SIDE)
    decoded_atoms = mux.original_atoms if mux else m.outputs
    idle = Valuation.of({a: False for a in decoded_atoms})

    trace_steps = []
    joined: list[Valuation] = []
    state = m.initial
    for t in range(steps):
        booleans = {a: bool(rng.getrandbits(1)) for a in doc.boolean_inputs}
        samples = tuple((d.name, _sample_real(rng, d.lower, d.upper)) for d in real_decls)
        point = tuple(value for _, value in samples)
        assignment = dict(booleans)
        for pred in input_preds:
            assignment[pred.atom] = pred.constraint.holds_at(point)
        if inject is not None:
            for name, value in inject.pairs:
                if name not in assignment:
                    raise SimulationError(f"injected atom '{name}' is not an input")
                assignment[name] = value
        vin = Valuation.of(assignment)

        move = m.step.get((state, vin))
        if move is None:
            vout, nxt, stuck = idle, state, True
        else:
            raw, nxt = move
            vout = mux.decode(raw) if mux else raw
            stuck = False
        joined.append(vin.merge(vout))
        trace_steps.append((t, samples, vin, vout, state, nxt, stuck))
        state = nxt

    report = monitor_guarantees(doc, joined)
    first_violation = {gid: step for gid, step in report.violations}
    final = tuple(
        TraceStep(
            index=t,
            samples=samples,
            inputs=vin,
            outputs=vout,
            state_before=before,
            state_after=after,
            stuck=stuck,
            violations=tuple(
                gid for gid, step in first_violation.items() if step == t
            ),
        )
        for t, samples, vin, vout, before, after, stuck in trace_steps
    )
    return SimulationTrace(
        seed=seed,
        steps=final,
        violations=report.violations,
        pending=report.pending,
        unmonitored=report.unmonitored,
    )
