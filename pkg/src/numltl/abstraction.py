"""Pseudo-Boolean abstraction, refinement bookkeeping, and output re-encoding.

Abstraction turns every polynomial predicate atom into a free Boolean atom of
the same side, keeping the temporal formulas untouched; the predicate table
retains what each atom meant so the theory checker can validate valuations
later.  Refinements append forbidden-cube assumptions or guarantees and are
additionally recorded as structured valuations, because the synthesis driver
enforces them by restricting game inputs rather than by re-translating
formulas (keeping the edge-marking path and the rebuild path identical by
construction).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil, log2

from . import speclang as sl
from .bernstein import Box, PolyConstraint
from .valuation import Valuation, all_valuations


class AbstractionError(ValueError):
    pass


@dataclass(frozen=True)
class PredicateTable:
    entries: dict[str, tuple[PolyConstraint, str]]  # atom -> (constraint, side)
    input_variables: tuple[str, ...]
    output_variables: tuple[str, ...]
    input_box: Box
    output_box: Box

    def atoms_of(self, side: str) -> tuple[str, ...]:
        return tuple(a for a, (_, s) in self.entries.items() if s == side)

    def box_of(self, side: str) -> Box:
        return self.input_box if side == sl.INPUT_SIDE else self.output_box

    def variables_of(self, side: str) -> tuple[str, ...]:
        if side == sl.INPUT_SIDE:
            return self.input_variables
        return self.output_variables


@dataclass(frozen=True)
class PseudoBooleanSpec:
    """Purely Boolean document plus the provenance and refinement record.

    ``document`` folds refinements in textually (printable as a spec file);
    the structured ``input_refinements``/``output_refinements`` valuations are
    what the game layer consumes.  User-written assumptions are the first
    ``len(source.assumptions)`` entries of ``document.assumptions``.
    """

    document: sl.SpecDocument
    source: sl.SpecDocument
    input_refinements: tuple[Valuation, ...] = ()
    output_refinements: tuple[Valuation, ...] = ()

    def input_atoms(self) -> tuple[str, ...]:
        return self.document.input_atoms()

    def output_atoms(self) -> tuple[str, ...]:
        return self.document.output_atoms()

    def user_assumptions(self) -> tuple[sl.Formula, ...]:
        return self.document.assumptions[: len(self.source.assumptions)]

    def game_formula(self) -> sl.Formula:
        """Formula the game is built from: user assumptions imply guarantees.

        Refinement assumptions are deliberately excluded; they act on the
        arena as input restrictions, which is both equivalent and free of
        the branch-commitment weakness a disjunctive automaton would add.
        """
        guarantee = sl.conjoin(self.document.guarantees)
        user = self.user_assumptions()
        if not user:
            return guarantee
        return sl.Implies(sl.conjoin(user), guarantee)


def _box_of(decls) -> Box:
    return Box(tuple((d.lower, d.upper) for d in decls))


def abstract_spec(doc: sl.SpecDocument) -> tuple[PseudoBooleanSpec, PredicateTable]:
    """Replace each predicate atom by a free Boolean atom of its side."""
    table = PredicateTable(
        entries={p.atom: (p.constraint, p.side) for p in doc.predicates},
        input_variables=tuple(v.name for v in doc.real_vars_of(sl.INPUT_SIDE)),
        output_variables=tuple(v.name for v in doc.real_vars_of(sl.OUTPUT_SIDE)),
        input_box=_box_of(doc.real_vars_of(sl.INPUT_SIDE)),
        output_box=_box_of(doc.real_vars_of(sl.OUTPUT_SIDE)),
    )
    abstract = sl.SpecDocument(
        boolean_inputs=doc.input_atoms(),
        boolean_outputs=doc.output_atoms(),
        real_vars=(),
        predicates=(),
        assumptions=doc.assumptions,
        guarantees=doc.guarantees,
    )
    return PseudoBooleanSpec(document=abstract, source=doc), table


def cube_formula(v: Valuation) -> sl.Formula:
    """Conjunction of literals fixing exactly the atoms of ``v``."""
    if not v.atoms:
        return sl.TrueFormula()
    literals = [
        sl.Atom(name) if value else sl.Not(sl.Atom(name)) for name, value in v.pairs
    ]
    return sl.conjoin(tuple(literals))


def _forbid(v: Valuation) -> sl.Formula:
    return sl.Always(sl.Not(cube_formula(v)))


def _check_refinement_valuation(
    spec: PseudoBooleanSpec, v: Valuation, side: str, previous: tuple[Valuation, ...]
) -> None:
    expected = tuple(
        p.atom for p in spec.source.predicates if p.side == side
    )
    if set(v.atoms) != set(expected):
        msg = (
            f"refinement valuation must assign exactly the {side}-side "
            f"predicate atoms {sorted(expected)}, got {sorted(v.atoms)}"
        )
        raise AbstractionError(msg)
    if v in previous:
        msg = f"valuation {v} was already refined away; the synthesis loop is broken"
        raise AbstractionError(msg)


def refine_with_assumption(spec: PseudoBooleanSpec, v: Valuation) -> PseudoBooleanSpec:
    """Forbid the input cube ``v`` from here on (assumption G not-cube)."""
    _check_refinement_valuation(spec, v, sl.INPUT_SIDE, spec.input_refinements)
    doc = spec.document
    refined = sl.SpecDocument(
        boolean_inputs=doc.boolean_inputs,
        boolean_outputs=doc.boolean_outputs,
        real_vars=(),
        predicates=(),
        assumptions=doc.assumptions + (_forbid(v),),
        guarantees=doc.guarantees,
    )
    return PseudoBooleanSpec(
        document=refined,
        source=spec.source,
        input_refinements=spec.input_refinements + (v,),
        output_refinements=spec.output_refinements,
    )


def refine_with_guarantee(spec: PseudoBooleanSpec, w: Valuation) -> PseudoBooleanSpec:
    """Forbid the controller output cube ``w`` (guarantee G not-cube)."""
    _check_refinement_valuation(spec, w, sl.OUTPUT_SIDE, spec.output_refinements)
    doc = spec.document
    refined = sl.SpecDocument(
        boolean_inputs=doc.boolean_inputs,
        boolean_outputs=doc.boolean_outputs,
        real_vars=(),
        predicates=(),
        assumptions=doc.assumptions,
        guarantees=doc.guarantees + (_forbid(w),),
    )
    return PseudoBooleanSpec(
        document=refined,
        source=spec.source,
        input_refinements=spec.input_refinements,
        output_refinements=spec.output_refinements + (w,),
    )


@dataclass(frozen=True)
class MultiplexerTable:
    """Decoder from code-words over fresh atoms back to original outputs."""

    encoded_atoms: tuple[str, ...]
    original_atoms: tuple[str, ...]
    rows: tuple[tuple[Valuation, Valuation], ...]  # (code-word, original valuation)

    def __bool__(self) -> bool:
        return bool(self.rows)

    def decode(self, code: Valuation) -> Valuation:
        for word, original in self.rows:
            if word == code:
                return original
        msg = f"code-word {code} has no decoding"
        raise AbstractionError(msg)


EMPTY_MULTIPLEXER = MultiplexerTable((), (), ())

_ENCODING_PREFIXES = ("sig", "enc", "code")


def _fresh_encoded_atoms(taken: set[str], m: int) -> tuple[str, ...]:
    for prefix in _ENCODING_PREFIXES:
        names = tuple(f"{prefix}{i}" for i in range(1, m + 1))
        if not taken & set(names):
            return names
    msg = "could not find fresh names for encoded output atoms"
    raise AbstractionError(msg)


def _code_valuation(atoms: tuple[str, ...], number: int) -> Valuation:
    m = len(atoms)
    bits = {atoms[i]: bool((number >> (m - 1 - i)) & 1) for i in range(m)}
    return Valuation.of(bits)


def reencode_outputs(
    spec: PseudoBooleanSpec,
) -> tuple[PseudoBooleanSpec, MultiplexerTable]:
    """Compress the output alphabet through invariant output constraints.

    Guarantees of the form ALWAYS(propositional formula over outputs only)
    restrict the reachable output combinations to a set K; when K needs
    fewer bits than there are output atoms, the outputs are replaced by
    code atoms, original atoms in the remaining formulas become code-word
    disjunctions, and the collected guarantees are dropped (their content
    lives in the code book).
    """
    doc = spec.document
    outputs = doc.boolean_outputs
    output_set = set(outputs)

    collected: list[sl.Formula] = []
    remaining_guarantees: list[sl.Formula] = []
    for g in doc.guarantees:
        if (
            isinstance(g, sl.Always)
            and sl.is_propositional(g.operand)
            and sl.atoms_of(g.operand) <= output_set
        ):
            collected.append(g.operand)
            continue
        remaining_guarantees.append(g)

    if not collected or not outputs:
        return spec, EMPTY_MULTIPLEXER

    feasible = [
        w
        for w in all_valuations(outputs)
        if all(sl.evaluate_propositional(body, w.as_dict()) for body in collected)
    ]
    if not feasible:
        msg = "output constraints are unsatisfiable; no output valuation exists"
        raise AbstractionError(msg)

    m = 0 if len(feasible) == 1 else ceil(log2(len(feasible)))
    if m >= len(outputs):
        return spec, EMPTY_MULTIPLEXER

    taken = set(doc.boolean_inputs) | output_set
    encoded = _fresh_encoded_atoms(taken, m)
    rows = tuple(
        (_code_valuation(encoded, i), original) for i, original in enumerate(feasible)
    )
    mux = MultiplexerTable(encoded_atoms=encoded, original_atoms=outputs, rows=rows)

    substitution = {
        atom: _code_word_disjunction(mux, atom) for atom in outputs
    }
    new_assumptions = tuple(
        sl.substitute_atoms(f, substitution) for f in doc.assumptions
    )
    new_guarantees = [
        sl.substitute_atoms(f, substitution) for f in remaining_guarantees
    ]
    if len(rows) < 2**m:
        # forbid the unused code-words so every emission decodes to a K member
        used = tuple(cube_formula(word) for word, _ in rows)
        new_guarantees.append(sl.Always(_disjoin(used)))

    encoded_doc = sl.SpecDocument(
        boolean_inputs=doc.boolean_inputs,
        boolean_outputs=encoded,
        real_vars=(),
        predicates=(),
        assumptions=new_assumptions,
        guarantees=tuple(new_guarantees),
    )
    encoded_spec = PseudoBooleanSpec(
        document=encoded_doc,
        source=spec.source,
        input_refinements=spec.input_refinements,
        output_refinements=spec.output_refinements,
    )
    return encoded_spec, mux


def _disjoin(formulas: tuple[sl.Formula, ...]) -> sl.Formula:
    if not formulas:
        return sl.FalseFormula()
    out = formulas[0]
    for f in formulas[1:]:
        out = sl.Or(out, f)
    return out


def _code_word_disjunction(mux: MultiplexerTable, atom: str) -> sl.Formula:
    cubes = tuple(
        cube_formula(word) for word, original in mux.rows if original[atom]
    )
    return _disjoin(cubes)
