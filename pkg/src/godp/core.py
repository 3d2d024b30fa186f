"""Semantic model: kinded symbols, the axiom fragment, flat ontologies, morphisms.

All values are immutable; operations are pure functions, so everything here is
safe to share across threads. Flat ontologies keep their axiom sets canonical
(see canonicalize_axiom) and signature-closed: every symbol occurring in an
axiom is also in the signature.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Iterator, Mapping

from .diagnostics import KindClash, UnmappedSymbol


class SymbolKind(Enum):
    CLASS = "Class"
    OBJECT_PROPERTY = "ObjectProperty"
    INDIVIDUAL = "Individual"


_KIND_ORDER = {SymbolKind.CLASS: 0, SymbolKind.OBJECT_PROPERTY: 1, SymbolKind.INDIVIDUAL: 2}


def kind_order(kind: SymbolKind) -> int:
    return _KIND_ORDER[kind]


@dataclass(frozen=True)
class NameTerm:
    """A possibly parameterized name: a base identifier plus argument terms."""

    base: str
    args: tuple["NameTerm", ...] = ()

    def is_plain(self) -> bool:
        return not self.args

    def key(self):
        return (self.base, tuple(a.key() for a in self.args))

    def render(self) -> str:
        if not self.args:
            return self.base
        return f"{self.base}[{','.join(a.render() for a in self.args)}]"

    def bases(self) -> Iterator[str]:
        """All base identifiers occurring in this term, outermost first."""
        yield self.base
        for a in self.args:
            yield from a.bases()

    def __repr__(self) -> str:  # compact in test failures
        return f"NameTerm({self.render()!r})"


def name(base: str, *args: NameTerm | str) -> NameTerm:
    """Convenience constructor: name("p", "x", name("q", "y"))."""
    return NameTerm(base, tuple(a if isinstance(a, NameTerm) else NameTerm(a) for a in args))


@dataclass(frozen=True)
class Symbol:
    name: NameTerm
    kind: SymbolKind

    def key(self):
        return (kind_order(self.kind), self.name.key())

    def __repr__(self) -> str:
        return f"Symbol({self.kind.value} {self.name.render()})"


RenameFn = Callable[[NameTerm], NameTerm]


# ---------------------------------------------------------------------------
# Axioms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Axiom:
    """Base class; subclasses define refs() positions with their kinds."""

    def refs(self) -> tuple[tuple[NameTerm, SymbolKind], ...]:
        raise NotImplementedError

    def rename(self, fn: RenameFn) -> "Axiom":
        raise NotImplementedError

    def canonical(self) -> "Axiom":
        return self

    def dump_fields(self) -> tuple[str, ...]:
        raise NotImplementedError

    def mentions(self, names: frozenset[NameTerm]) -> bool:
        return any(n in names for n, _ in self.refs())

    def sort_key(self):
        return tuple(self.dump_fields())


@dataclass(frozen=True)
class Reflexive(Axiom):
    prop: NameTerm

    def refs(self):
        return ((self.prop, SymbolKind.OBJECT_PROPERTY),)

    def rename(self, fn):
        return Reflexive(fn(self.prop))

    def dump_fields(self):
        return ("Reflexive", self.prop.render())


@dataclass(frozen=True)
class Transitive(Axiom):
    prop: NameTerm

    def refs(self):
        return ((self.prop, SymbolKind.OBJECT_PROPERTY),)

    def rename(self, fn):
        return Transitive(fn(self.prop))

    def dump_fields(self):
        return ("Transitive", self.prop.render())


@dataclass(frozen=True)
class InverseOf(Axiom):
    prop: NameTerm
    inverse: NameTerm

    def refs(self):
        return ((self.prop, SymbolKind.OBJECT_PROPERTY), (self.inverse, SymbolKind.OBJECT_PROPERTY))

    def rename(self, fn):
        return InverseOf(fn(self.prop), fn(self.inverse))

    def dump_fields(self):
        return ("InverseOf", self.prop.render(), self.inverse.render())


@dataclass(frozen=True)
class Domain(Axiom):
    prop: NameTerm
    cls: NameTerm

    def refs(self):
        return ((self.prop, SymbolKind.OBJECT_PROPERTY), (self.cls, SymbolKind.CLASS))

    def rename(self, fn):
        return Domain(fn(self.prop), fn(self.cls))

    def dump_fields(self):
        return ("Domain", self.prop.render(), self.cls.render())


@dataclass(frozen=True)
class Range(Axiom):
    prop: NameTerm
    cls: NameTerm

    def refs(self):
        return ((self.prop, SymbolKind.OBJECT_PROPERTY), (self.cls, SymbolKind.CLASS))

    def rename(self, fn):
        return Range(fn(self.prop), fn(self.cls))

    def dump_fields(self):
        return ("Range", self.prop.render(), self.cls.render())


@dataclass(frozen=True)
class SubPropertyOf(Axiom):
    sub: NameTerm
    sup: NameTerm

    def refs(self):
        return ((self.sub, SymbolKind.OBJECT_PROPERTY), (self.sup, SymbolKind.OBJECT_PROPERTY))

    def rename(self, fn):
        return SubPropertyOf(fn(self.sub), fn(self.sup))

    def dump_fields(self):
        return ("SubPropertyOf", self.sub.render(), self.sup.render())


@dataclass(frozen=True)
class ClassAssertion(Axiom):
    cls: NameTerm
    individual: NameTerm

    def refs(self):
        return ((self.cls, SymbolKind.CLASS), (self.individual, SymbolKind.INDIVIDUAL))

    def rename(self, fn):
        return ClassAssertion(fn(self.cls), fn(self.individual))

    def dump_fields(self):
        return ("ClassAssertion", self.cls.render(), self.individual.render())


@dataclass(frozen=True)
class DifferentIndividuals(Axiom):
    individuals: tuple[NameTerm, ...]

    def refs(self):
        return tuple((i, SymbolKind.INDIVIDUAL) for i in self.individuals)

    def rename(self, fn):
        return DifferentIndividuals(tuple(fn(i) for i in self.individuals)).canonical()

    def canonical(self):
        ordered = tuple(sorted(set(self.individuals), key=NameTerm.key))
        return DifferentIndividuals(ordered)

    def dump_fields(self):
        return ("DifferentIndividuals",) + tuple(i.render() for i in self.individuals)


@dataclass(frozen=True)
class EquivalentToUnion(Axiom):
    """C EquivalentTo {i1, ..., in}: the class is exactly this set of individuals."""

    cls: NameTerm
    members: tuple[NameTerm, ...]

    def refs(self):
        return ((self.cls, SymbolKind.CLASS),) + tuple((i, SymbolKind.INDIVIDUAL) for i in self.members)

    def rename(self, fn):
        return EquivalentToUnion(fn(self.cls), tuple(fn(i) for i in self.members)).canonical()

    def canonical(self):
        ordered = tuple(sorted(set(self.members), key=NameTerm.key))
        return EquivalentToUnion(self.cls, ordered)

    def dump_fields(self):
        return ("EquivalentToUnion", self.cls.render()) + tuple(i.render() for i in self.members)


def canonicalize_axiom(a: Axiom) -> Axiom:
    """Sort order-insensitive operand sets; idempotent."""
    return a.canonical()


# ---------------------------------------------------------------------------
# Flat ontologies
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FlatOntology:
    signature: frozenset[Symbol]
    axioms: frozenset[Axiom]

    def sorted_signature(self) -> list[Symbol]:
        return sorted(self.signature, key=Symbol.key)

    def sorted_axioms(self) -> list[Axiom]:
        return sorted(self.axioms, key=Axiom.sort_key)

    def kind_of(self, n: NameTerm) -> SymbolKind | None:
        for s in self.signature:
            if s.name == n:
                return s.kind
        return None

    def is_empty(self) -> bool:
        return not self.signature and not self.axioms


EMPTY_ONTOLOGY = FlatOntology(frozenset(), frozenset())


def _check_kinds(symbols: Iterable[Symbol]) -> None:
    kinds: dict[NameTerm, SymbolKind] = {}
    for s in symbols:
        seen = kinds.get(s.name)
        if seen is not None and seen is not s.kind:
            raise KindClash(
                f"kind clash for '{s.name.render()}': {seen.value} vs {s.kind.value}"
            )
        kinds[s.name] = s.kind


def make_ontology(symbols: Iterable[Symbol], axioms: Iterable[Axiom]) -> FlatOntology:
    """Canonicalize axioms, close the signature over axiom references, check kinds."""
    sig = set(symbols)
    axs = frozenset(a.canonical() for a in axioms)
    for a in axs:
        for n, k in a.refs():
            sig.add(Symbol(n, k))
    _check_kinds(sig)
    return FlatOntology(frozenset(sig), axs)


def union_flat(a: FlatOntology, b: FlatOntology) -> FlatOntology:
    """Same Name - Same Thing union: deduplicating, kind-clash checked."""
    sig = a.signature | b.signature
    _check_kinds(sig)
    return FlatOntology(sig, a.axioms | b.axioms)


def union_all(onts: Iterable[FlatOntology]) -> FlatOntology:
    out = EMPTY_ONTOLOGY
    for o in onts:
        out = union_flat(out, o)
    return out


def axioms_mentioning(o: FlatOntology, dead: Iterable[Symbol]) -> frozenset[Axiom]:
    """Exactly the axioms referencing at least one symbol in `dead`."""
    dead_names = frozenset(s.name for s in dead)
    return frozenset(a for a in o.axioms if a.mentions(dead_names))


def rename_ontology(o: FlatOntology, fn: RenameFn) -> FlatOntology:
    """Rename every symbol and axiom occurrence; kind-clash checked on merge."""
    sig = [Symbol(fn(s.name), s.kind) for s in o.signature]
    axs = [a.rename(fn) for a in o.axioms]
    _check_kinds(sig)
    return FlatOntology(frozenset(sig), frozenset(axs))


def validate_closure(o: FlatOntology) -> bool:
    """True iff every axiom's symbols are in the signature with matching kinds."""
    have = {(s.name, s.kind) for s in o.signature}
    return all((n, k) in have for a in o.axioms for n, k in a.refs())


# ---------------------------------------------------------------------------
# Fitting morphisms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FittingMorphism:
    """A kind-preserving symbol map, total on its declared domain."""

    pairs: tuple[tuple[Symbol, Symbol], ...]

    def __post_init__(self):
        for src, dst in self.pairs:
            if src.kind is not dst.kind:
                raise KindClash(
                    f"fitting maps {src.kind.value} '{src.name.render()}' to "
                    f"{dst.kind.value} '{dst.name.render()}'"
                )

    @staticmethod
    def of(mapping: Mapping[Symbol, Symbol]) -> "FittingMorphism":
        return FittingMorphism(tuple(sorted(mapping.items(), key=lambda p: p[0].key())))

    @staticmethod
    def identity(signature: Iterable[Symbol]) -> "FittingMorphism":
        return FittingMorphism.of({s: s for s in signature})

    def as_dict(self) -> dict[Symbol, Symbol]:
        return dict(self.pairs)

    def domain(self) -> frozenset[Symbol]:
        return frozenset(src for src, _ in self.pairs)

    def compose(self, after: "FittingMorphism") -> "FittingMorphism":
        """self then after: (after . self)(s) = after(self(s)); after must cover the image."""
        table = after.as_dict()
        return FittingMorphism.of({src: table.get(dst, dst) for src, dst in self.pairs})


def apply_morphism(m: FittingMorphism, o: FlatOntology) -> FlatOntology:
    """Rename symbols and all axiom occurrences; m must be total on o.signature."""
    table = {src.name: dst.name for src, dst in m.pairs}
    dom = m.domain()
    for s in o.signature:
        if s not in dom:
            raise UnmappedSymbol(f"morphism undefined on '{s.name.render()}'")

    def fn(n: NameTerm) -> NameTerm:
        return table.get(n, n)

    return rename_ontology(o, fn)
