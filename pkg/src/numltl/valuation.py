"""Total and partial assignments of Boolean atoms.

A ``Valuation`` fixes every atom of some set; a ``Cube`` fixes a subset and
matches any valuation agreeing on that subset.  Both are canonicalized by
atom name so equality and hashing are structural, and valuations order
lexicographically by name-sorted truth values with False before True.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Iterator, Mapping


@dataclass(frozen=True, order=False)
class Valuation:
    pairs: tuple[tuple[str, bool], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "pairs", tuple(sorted(self.pairs)))
        names = [name for name, _ in self.pairs]
        if len(set(names)) != len(names):
            msg = f"repeated atom in valuation: {names}"
            raise ValueError(msg)

    @staticmethod
    def of(mapping: Mapping[str, bool] | Iterable[tuple[str, bool]]) -> "Valuation":
        items = mapping.items() if isinstance(mapping, Mapping) else mapping
        return Valuation(tuple((name, bool(value)) for name, value in items))

    @property
    def atoms(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.pairs)

    def __getitem__(self, name: str) -> bool:
        for key, value in self.pairs:
            if key == name:
                return value
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(key == name for key, _ in self.pairs)

    def as_dict(self) -> dict[str, bool]:
        return dict(self.pairs)

    def restrict(self, atoms: Iterable[str]) -> "Valuation":
        keep = set(atoms)
        return Valuation(tuple(p for p in self.pairs if p[0] in keep))

    def merge(self, other: "Valuation") -> "Valuation":
        combined = dict(self.pairs)
        for name, value in other.pairs:
            if name in combined and combined[name] != value:
                msg = f"conflicting value for '{name}'"
                raise ValueError(msg)
            combined[name] = value
        return Valuation.of(combined)

    def sort_key(self) -> tuple[bool, ...]:
        """Truth values in name-sorted atom order; False sorts before True."""
        return tuple(value for _, value in self.pairs)

    def __lt__(self, other: "Valuation") -> bool:
        return (self.atoms, self.sort_key()) < (other.atoms, other.sort_key())

    def __str__(self) -> str:
        return ",".join(f"{name}={int(value)}" for name, value in self.pairs)


def all_valuations(atoms: Iterable[str]) -> Iterator[Valuation]:
    """Every valuation of ``atoms``, lexicographic in the given atom order
    with False before True; the first atom varies slowest."""
    names = tuple(atoms)
    for bits in product((False, True), repeat=len(names)):
        yield Valuation(tuple(zip(names, bits)))


def parse_valuation(text: str) -> Valuation:
    """Inverse of ``str(valuation)``; the sentinel ``-`` is the empty one."""
    if text == "-":
        return Valuation.of({})
    pairs = []
    for part in text.split(","):
        name, eq, bit = part.partition("=")
        if not name or not eq or bit not in ("0", "1"):
            msg = f"malformed valuation {text!r}"
            raise ValueError(msg)
        pairs.append((name, bit == "1"))
    return Valuation.of(pairs)


@dataclass(frozen=True)
class Cube:
    pairs: tuple[tuple[str, bool], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "pairs", tuple(sorted(self.pairs)))
        names = [name for name, _ in self.pairs]
        if len(set(names)) != len(names):
            msg = f"repeated atom in cube: {names}"
            raise ValueError(msg)

    @staticmethod
    def of(mapping: Mapping[str, bool] | Iterable[tuple[str, bool]]) -> "Cube":
        items = mapping.items() if isinstance(mapping, Mapping) else mapping
        return Cube(tuple((name, bool(value)) for name, value in items))

    @staticmethod
    def true() -> "Cube":
        return Cube(())

    @staticmethod
    def from_valuation(valuation: Valuation) -> "Cube":
        return Cube(valuation.pairs)

    @property
    def atoms(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.pairs)

    def as_dict(self) -> dict[str, bool]:
        return dict(self.pairs)

    def matches(self, valuation: Valuation) -> bool:
        mapping = valuation.as_dict()
        return all(mapping[name] == value for name, value in self.pairs)

    def restrict(self, atoms: Iterable[str]) -> "Cube":
        keep = set(atoms)
        return Cube(tuple(p for p in self.pairs if p[0] in keep))

    def conflicts(self, other: "Cube") -> bool:
        mine = dict(self.pairs)
        return any(name in mine and mine[name] != value for name, value in other.pairs)

    def merge(self, other: "Cube") -> "Cube":
        if self.conflicts(other):
            msg = f"cubes disagree: {self} vs {other}"
            raise ValueError(msg)
        return Cube(tuple({**dict(self.pairs), **dict(other.pairs)}.items()))

    def __str__(self) -> str:
        if not self.pairs:
            return "TRUE"
        return " && ".join(name if value else f"!{name}" for name, value in self.pairs)
