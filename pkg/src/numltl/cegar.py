"""Counterexample-guided synthesis driver tying the game layer to the theory.

The loop solves the pseudo-Boolean game, asks the exact feasibility checker
about the predicate valuations a counter-strategy (or a winning controller)
relies on, refines the abstraction whenever a valuation turns out infeasible,
and escalates the safety bound when a counter-strategy survives theory
scrutiny.  A per-run cache guarantees every valuation is checked at most
once; a line-oriented transcript records checks, refinements, game solves,
and the final verdict.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from . import speclang as sl
from .abstraction import (
    EMPTY_MULTIPLEXER,
    AbstractionError,
    MultiplexerTable,
    PredicateTable,
    PseudoBooleanSpec,
    abstract_spec,
    reencode_outputs,
    refine_with_assumption,
    refine_with_guarantee,
)
from .automata import negate_and_translate, translate
from .bernstein import (
    DEFAULT_DEPTH,
    Feasible,
    FeasibilityVerdict,
    Infeasible,
    Point,
    PolyConstraint,
    Unknown,
    check_feasibility,
)
from .games import (
    CounterStrategy,
    GameArena,
    MealyController,
    build_buchi_game,
    build_safety_game,
    extract_controller,
    extract_counter_strategy,
    mark_edges_absent,
    restrict_counter_strategy,
    solve,
)
from .valuation import Valuation

BUCHI = "buchi"
SAFETY = "safety"
MARK = "mark"
REBUILD = "rebuild"


class TheoryUnknownError(Exception):
    """The feasibility checker gave up on a valuation the loop depends on."""

    def __init__(self, side: str, valuation: Valuation, reason: str) -> None:
        self.side = side
        self.valuation = valuation
        self.reason = reason
        msg = f"theory check gave up on {side} valuation {valuation}: {reason}"
        super().__init__(msg)


# -- run journal --------------------------------------------------------------


def _point_str(point: Point) -> str:
    return ",".join(str(c) for c in point)


def _verdict_str(verdict: FeasibilityVerdict) -> str:
    if isinstance(verdict, Feasible):
        return f"feasible witness={_point_str(verdict.witness)}"
    if isinstance(verdict, Infeasible):
        return "infeasible"
    return f"unknown {verdict.reason}"


class Transcript:
    """Line-oriented record of one synthesis run.

    One event per line: CHECK (theory call with its verdict), REFINE
    (abstraction update), SOLVE (game solved), VERDICT (run outcome).
    """

    def __init__(self) -> None:
        self.lines: list[str] = []

    def check(self, side: str, v: Valuation, verdict: FeasibilityVerdict) -> None:
        self.lines.append(f"CHECK {side} {v} {_verdict_str(verdict)}")

    def refine(self, side: str, v: Valuation) -> None:
        self.lines.append(f"REFINE {side} {v}")

    def solve(self, arena: GameArena, bound: int | None, ctrl_wins: bool) -> None:
        where = f" bound={bound}" if bound is not None else ""
        winner = "ctrl" if ctrl_wins else "env"
        self.lines.append(
            f"SOLVE {arena.objective}{where} env={arena.n_env}"
            f" ctrl={arena.n_ctrl} winner={winner}"
        )

    def verdict(self, text: str) -> None:
        self.lines.append(f"VERDICT {text}")

    def render(self) -> str:
        return "".join(line + "\n" for line in self.lines)

    def __str__(self) -> str:
        return self.render()


def count_theory_checks(transcript: "Transcript | str") -> int:
    """Number of feasibility-checker invocations a run performed."""
    if isinstance(transcript, Transcript):
        lines = transcript.lines
    else:
        lines = transcript.splitlines()
    return sum(1 for line in lines if line.startswith("CHECK "))


# -- memoized theory checking --------------------------------------------------


@dataclass
class CheckedCache:
    """At-most-once memo of theory verdicts, keyed by predicate valuation."""

    inputs: dict[Valuation, FeasibilityVerdict] = field(default_factory=dict)
    outputs: dict[Valuation, FeasibilityVerdict] = field(default_factory=dict)

    def side(self, side: str) -> dict[Valuation, FeasibilityVerdict]:
        return self.inputs if side == sl.INPUT_SIDE else self.outputs

    def proven(self, side: str) -> set[Valuation]:
        store = self.side(side)
        return {v for v, verdict in store.items() if isinstance(verdict, Feasible)}

    def size(self) -> int:
        return len(self.inputs) + len(self.outputs)


def valuation_to_constraints(
    v: Valuation, table: PredicateTable
) -> list[PolyConstraint]:
    """Conjunction the valuation stands for: each true atom contributes its
    constraint, each false atom the relation-flipped negation."""
    constraints = []
    for atom in v.atoms:
        constraint, _ = table.entries[atom]
        constraints.append(constraint if v[atom] else constraint.negated())
    return constraints


def _checked(
    cache: CheckedCache,
    side: str,
    v: Valuation,
    table: PredicateTable,
    depth: int,
    transcript: Transcript,
) -> FeasibilityVerdict:
    """Cached verdict for a nonempty predicate valuation; checks at most once."""
    store = cache.side(side)
    verdict = store.get(v)
    if verdict is None:
        constraints = valuation_to_constraints(v, table)
        verdict = check_feasibility(constraints, table.box_of(side), depth)
        store[v] = verdict
        transcript.check(side, v, verdict)
    if isinstance(verdict, Unknown):
        raise TheoryUnknownError(side, v, verdict.reason)
    return verdict


# -- counter-strategy input selection -----------------------------------------


def select_counter_inputs(
    cs: CounterStrategy,
    checked: CheckedCache,
    predicate_atoms: tuple[str, ...],
) -> tuple[CounterStrategy, set[Valuation]]:
    """Prefer already-proven inputs; cover the rest greedily.

    Every state first keeps its candidates whose predicate projection is
    already proven feasible (an empty projection counts as proven).  States
    left without one are covered by repeatedly picking the unproven
    projection that covers the most remaining states (ties broken
    lexicographically).  Returns the narrowed counter-strategy and the
    distinct unproven projections the cover relies on.
    """
    proven = checked.proven(sl.INPUT_SIDE)

    def settled(projection: Valuation) -> bool:
        return not projection.atoms or projection in proven

    keep: dict[int, tuple[Valuation, ...]] = {}
    uncovered: list[int] = []
    for s in cs.states:
        cands = cs.candidates.get(s, ())
        if not cands:
            keep[s] = ()
            continue
        good = tuple(c for c in cands if settled(c.restrict(predicate_atoms)))
        if good:
            keep[s] = good
        else:
            uncovered.append(s)

    selected: list[Valuation] = []
    if uncovered:
        covers: dict[Valuation, set[int]] = {}
        for s in uncovered:
            for c in cs.candidates[s]:
                covers.setdefault(c.restrict(predicate_atoms), set()).add(s)
        remaining = set(uncovered)
        while remaining:
            best = min(
                covers,
                key=lambda p: (-len(covers[p] & remaining), p.sort_key()),
            )
            selected.append(best)
            remaining -= covers[best]
        chosen = set(selected)
        for s in uncovered:
            keep[s] = tuple(
                c
                for c in cs.candidates[s]
                if c.restrict(predicate_atoms) in chosen
            )
    return restrict_counter_strategy(cs, keep), set(selected)


# -- controller output duality -------------------------------------------------


def validate_controller_outputs(
    m: MealyController,
    table: PredicateTable,
    cache: CheckedCache,
    multiplexer: MultiplexerTable = EMPTY_MULTIPLEXER,
    depth: int = DEFAULT_DEPTH,
    transcript: Transcript | None = None,
) -> list[Valuation]:
    """Output predicate valuations the controller can emit but the theory
    refutes; encoded outputs are decoded through the multiplexer first."""
    atoms = table.atoms_of(sl.OUTPUT_SIDE)
    if not atoms:
        return []
    transcript = transcript if transcript is not None else Transcript()
    emitted = {vout for vout, _ in m.step.values()}
    projections = set()
    for vout in emitted:
        decoded = multiplexer.decode(vout) if multiplexer else vout
        projections.add(decoded.restrict(atoms))
    bad = []
    for p in sorted(projections):
        if not p.atoms:
            continue
        verdict = _checked(cache, sl.OUTPUT_SIDE, p, table, depth, transcript)
        if isinstance(verdict, Infeasible):
            bad.append(p)
    return bad


# -- configuration and verdicts ------------------------------------------------


def bound_schedule_up_to(max_bound: int) -> tuple[int, ...]:
    """Iterative-deepening schedule: powers of two up to and including the max."""
    if max_bound < 1:
        raise ValueError("maximum bound must be positive")
    schedule = []
    k = 1
    while k < max_bound:
        schedule.append(k)
        k *= 2
    schedule.append(max_bound)
    return tuple(schedule)


@dataclass(frozen=True)
class CegarConfig:
    """Knobs of one synthesis run.

    The loop itself is deterministic (all tie-breaks are lexicographic);
    ``seed`` exists so downstream consumers of a run share one entropy
    source.  ``refinement_mode`` picks between mutating the standing arena
    (mark) and rebuilding it from the refined abstraction (rebuild); both
    restrict the same input cubes, so verdicts agree.
    """

    algorithm: str = SAFETY
    bound_schedule: tuple[int, ...] = (1, 2, 4, 8, 16)
    depth: int = DEFAULT_DEPTH
    refinement_cap: int = 64
    seed: int = 0
    refinement_mode: str = MARK
    reencode: bool = True
    batch_refine: bool = False

    def __post_init__(self) -> None:
        if self.algorithm not in (BUCHI, SAFETY):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.refinement_mode not in (MARK, REBUILD):
            raise ValueError(f"unknown refinement mode {self.refinement_mode!r}")
        if not self.bound_schedule or any(k < 1 for k in self.bound_schedule):
            raise ValueError("bound schedule must be nonempty and positive")
        if self.refinement_cap < 1:
            raise ValueError("refinement cap must be positive")
        if self.depth < 1:
            raise ValueError("theory depth budget must be positive")


@dataclass(frozen=True)
class Realizable:
    """A controller that wins the game and passes output duality; ``spec``
    is the refined abstraction it was extracted from, ``bound`` the safety
    bound it was decided at (None on the buchi route)."""

    controller: MealyController
    multiplexer: MultiplexerTable
    table: PredicateTable
    spec: PseudoBooleanSpec
    bound: int | None


@dataclass(frozen=True)
class UnrealizableWithinBound:
    """No controller exists up to the explored bound (None on the buchi
    route, which involves no unrolling); the counter-strategy is genuine:
    every input valuation it relies on carries a feasibility witness."""

    bound: int | None
    counter_strategy: CounterStrategy
    evidence: tuple[tuple[Valuation, Point], ...]
    spec: PseudoBooleanSpec
    multiplexer: MultiplexerTable = EMPTY_MULTIPLEXER


SynthesisVerdict = Union[Realizable, UnrealizableWithinBound, Unknown]


# -- the loop -------------------------------------------------------------------


def _encoded(
    spec: PseudoBooleanSpec, cfg: CegarConfig
) -> tuple[PseudoBooleanSpec, MultiplexerTable]:
    if not cfg.reencode:
        return spec, EMPTY_MULTIPLEXER
    try:
        return reencode_outputs(spec)
    except AbstractionError:
        # unsatisfiable output constraints: leave them in the game, which
        # will honestly report that the controller cannot win
        return spec, EMPTY_MULTIPLEXER


def _build_arena(
    work: PseudoBooleanSpec, algorithm: str, bound: int | None
) -> GameArena:
    formula = work.game_formula()
    inputs = work.input_atoms()
    outputs = work.output_atoms()
    atoms = inputs + outputs
    if algorithm == BUCHI:
        arena = build_buchi_game(translate(formula, atoms), inputs, outputs)
    else:
        arena = build_safety_game(
            negate_and_translate(formula, atoms), bound, inputs, outputs
        )
    for v in work.input_refinements:
        mark_edges_absent(arena, v, v.atoms)
    return arena


def _genuineness_evidence(
    cs: CounterStrategy, cache: CheckedCache, predicate_atoms: tuple[str, ...]
) -> tuple[tuple[Valuation, Point], ...]:
    if not predicate_atoms:
        return ()
    projections = {
        c.restrict(predicate_atoms)
        for cands in cs.candidates.values()
        for c in cands
    }
    evidence = []
    for p in sorted(projections):
        if not p.atoms:
            continue
        verdict = cache.inputs[p]
        evidence.append((p, verdict.witness))
    return tuple(evidence)


def synthesize(
    doc: sl.SpecDocument,
    cfg: CegarConfig | None = None,
    transcript: Transcript | None = None,
    cache: CheckedCache | None = None,
) -> SynthesisVerdict:
    """Run the refinement loop on a specification document.

    Alternates game solving with exact theory checks: a controller win is
    kept only if every output valuation it emits is feasible (otherwise the
    offending cube becomes a guarantee refinement); an environment win is
    kept only if the counter-strategy's selected inputs are all feasible
    (otherwise the first infeasible cube becomes an assumption refinement).
    Safety-game runs escalate the bound schedule before giving up.
    """
    cfg = cfg if cfg is not None else CegarConfig()
    transcript = transcript if transcript is not None else Transcript()
    cache = cache if cache is not None else CheckedCache()

    def finish_unknown(reason: str) -> Unknown:
        transcript.verdict(f"unknown {reason}")
        return Unknown(reason)

    spec, table = abstract_spec(doc)
    input_atoms = table.atoms_of(sl.INPUT_SIDE)
    refinements = 0
    bound_index = 0
    work = spec
    mux = EMPTY_MULTIPLEXER
    arena: GameArena | None = None
    bound: int | None = None

    while True:
        if arena is None:
            work, mux = _encoded(spec, cfg)
            if cfg.algorithm == SAFETY:
                bound = cfg.bound_schedule[bound_index]
            arena = _build_arena(work, cfg.algorithm, bound)
        solution = solve(arena)
        transcript.solve(arena, bound, solution.ctrl_wins)

        if solution.ctrl_wins:
            controller = extract_controller(solution)
            try:
                bad = validate_controller_outputs(
                    controller, table, cache, mux, cfg.depth, transcript
                )
            except TheoryUnknownError as stuck:
                return finish_unknown(str(stuck))
            if not bad:
                transcript.verdict("realizable")
                return Realizable(controller, mux, table, spec, bound)
            for w in bad if cfg.batch_refine else bad[:1]:
                if refinements >= cfg.refinement_cap:
                    return finish_unknown(
                        f"refinement cap {cfg.refinement_cap} exceeded"
                    )
                spec = refine_with_guarantee(spec, w)
                transcript.refine(sl.OUTPUT_SIDE, w)
                refinements += 1
            arena = None  # the guarantees changed: re-encode and rebuild
            continue

        cs = extract_counter_strategy(solution)
        restricted, unproven = select_counter_inputs(cs, cache, input_atoms)
        culprits = []
        try:
            for v in sorted(unproven):
                verdict = _checked(
                    cache, sl.INPUT_SIDE, v, table, cfg.depth, transcript
                )
                if isinstance(verdict, Infeasible):
                    culprits.append(v)
                    if not cfg.batch_refine:
                        break
        except TheoryUnknownError as stuck:
            return finish_unknown(str(stuck))
        if culprits:
            for v in culprits:
                if refinements >= cfg.refinement_cap:
                    return finish_unknown(
                        f"refinement cap {cfg.refinement_cap} exceeded"
                    )
                spec = refine_with_assumption(spec, v)
                transcript.refine(sl.INPUT_SIDE, v)
                refinements += 1
                if cfg.refinement_mode == MARK and arena is not None:
                    mark_edges_absent(arena, v, v.atoms)
                else:
                    arena = None
            continue

        # the counter-strategy survived theory scrutiny at this bound
        if cfg.algorithm == SAFETY and bound_index + 1 < len(cfg.bound_schedule):
            bound_index += 1
            arena = None
            continue
        evidence = _genuineness_evidence(restricted, cache, input_atoms)
        shown = bound if bound is not None else "none"
        transcript.verdict(f"unrealizable-within-bound bound={shown}")
        return UnrealizableWithinBound(bound, restricted, evidence, spec, mux)
