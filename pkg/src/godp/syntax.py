"""AST for the pattern language, plus a pretty printer for round-trip tests.

Positions are carried on every node but excluded from equality, so structural
comparison of reparsed output works directly with `==`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .core import NameTerm, SymbolKind
from .diagnostics import SourcePos

_NOPOS = SourcePos("<none>", 1, 1)


def _pos_field():
    return field(default=_NOPOS, compare=False)


# ---------------------------------------------------------------------------
# Frames (the Manchester-like basic fragment)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClassFrame:
    name: NameTerm
    equivalent: tuple[NameTerm, ...] | None = None
    pos: SourcePos = _pos_field()


@dataclass(frozen=True)
class ObjectPropertyFrame:
    name: NameTerm
    domains: tuple[NameTerm, ...] = ()
    ranges: tuple[NameTerm, ...] = ()
    characteristics: tuple[str, ...] = ()
    sub_property_of: tuple[NameTerm, ...] = ()
    inverse_of: tuple[NameTerm, ...] = ()
    pos: SourcePos = _pos_field()


@dataclass(frozen=True)
class IndividualFrame:
    name: NameTerm
    types: tuple[NameTerm, ...] = ()
    different_from: tuple[NameTerm, ...] = ()
    pos: SourcePos = _pos_field()


@dataclass(frozen=True)
class DifferentIndividualsFrame:
    items: tuple[NameTerm, ...]
    pos: SourcePos = _pos_field()


Frame = Union[ClassFrame, ObjectPropertyFrame, IndividualFrame, DifferentIndividualsFrame]


# ---------------------------------------------------------------------------
# Expressions and arguments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BlockExpr:
    frames: tuple[Frame, ...]
    pos: SourcePos = _pos_field()


@dataclass(frozen=True)
class RefExpr:
    name: str
    pos: SourcePos = _pos_field()


@dataclass(frozen=True)
class MissingArg:
    """Whitespace between semicolons: an elided optional argument."""


@dataclass(frozen=True)
class EmptyArg:
    """The literal `empty` argument."""


@dataclass(frozen=True)
class ListArgAst:
    """Comma or cons list of name terms; `tail` names the remaining list, if any."""

    items: tuple[NameTerm, ...]
    tail: NameTerm | None = None


ArgValue = Union[MissingArg, EmptyArg, ListArgAst, NameTerm, "ExprAst"]


@dataclass(frozen=True)
class ArgAst:
    value: ArgValue
    fits: tuple[tuple[NameTerm, NameTerm], ...] = ()
    pos: SourcePos = _pos_field()


@dataclass(frozen=True)
class InstExpr:
    name: str
    args: tuple[ArgAst, ...]
    pos: SourcePos = _pos_field()


@dataclass(frozen=True)
class ThenExpr:
    terms: tuple["ExprAst", ...]
    pos: SourcePos = _pos_field()


ExprAst = Union[BlockExpr, RefExpr, InstExpr, ThenExpr]


# ---------------------------------------------------------------------------
# Parameters and definitions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FramesParam:
    frames: tuple[Frame, ...]


@dataclass(frozen=True)
class ListHeaderParam:
    kind: SymbolKind
    head: str
    head2: str | None
    tail: str


@dataclass(frozen=True)
class EmptyParam:
    """The `empty` list template."""


ParamPayload = Union[FramesParam, ListHeaderParam, EmptyParam]


@dataclass(frozen=True)
class ParamClauseAst:
    optional: bool
    payload: ParamPayload
    pos: SourcePos = _pos_field()


@dataclass(frozen=True)
class PatternDefAst:
    name: str
    params: tuple[ParamClauseAst, ...]
    given: tuple[str, ...]
    locals: tuple["PatternDefAst", ...]
    body: ExprAst
    pos: SourcePos = _pos_field()
    end: SourcePos = _pos_field()


@dataclass(frozen=True)
class LibraryAst:
    items: tuple[PatternDefAst, ...]


# ---------------------------------------------------------------------------
# Pretty printer
# ---------------------------------------------------------------------------

def pp_name(n: NameTerm) -> str:
    return n.render()


def _pp_names(names: tuple[NameTerm, ...]) -> str:
    return ", ".join(pp_name(n) for n in names)


def pp_frame(f: Frame) -> str:
    if isinstance(f, ClassFrame):
        out = f"Class: {pp_name(f.name)}"
        if f.equivalent is not None:
            out += f" EquivalentTo: {{{_pp_names(f.equivalent)}}}"
        return out
    if isinstance(f, ObjectPropertyFrame):
        parts = [f"ObjectProperty: {pp_name(f.name)}"]
        for d in f.domains:
            parts.append(f"Domain: {pp_name(d)}")
        for r in f.ranges:
            parts.append(f"Range: {pp_name(r)}")
        if f.characteristics:
            parts.append("Characteristics: " + ", ".join(f.characteristics))
        for s in f.sub_property_of:
            parts.append(f"SubPropertyOf: {pp_name(s)}")
        for i in f.inverse_of:
            parts.append(f"InverseOf: {pp_name(i)}")
        return " ".join(parts)
    if isinstance(f, IndividualFrame):
        parts = [f"Individual: {pp_name(f.name)}"]
        if f.types:
            parts.append("Types: " + _pp_names(f.types))
        if f.different_from:
            parts.append("DifferentFrom: " + _pp_names(f.different_from))
        return " ".join(parts)
    if isinstance(f, DifferentIndividualsFrame):
        return "DifferentIndividuals: " + _pp_names(f.items)
    raise TypeError(f"not a frame: {f!r}")


def pp_frames(frames: tuple[Frame, ...]) -> str:
    return "  ".join(pp_frame(f) for f in frames)


def pp_arg(a: ArgAst) -> str:
    v = a.value
    if isinstance(v, MissingArg):
        body = " "
    elif isinstance(v, EmptyArg):
        body = "empty"
    elif isinstance(v, ListArgAst):
        if v.tail is not None:
            body = " :: ".join([pp_name(i) for i in v.items] + [pp_name(v.tail)])
        else:
            body = ", ".join(pp_name(i) for i in v.items)
    elif isinstance(v, NameTerm):
        body = pp_name(v)
    else:
        body = pp_expr(v)
    if a.fits:
        maps = ", ".join(f"{pp_name(s)} |-> {pp_name(t)}" for s, t in a.fits)
        body += f" fit {maps}"
    return body


def pp_expr(e: ExprAst) -> str:
    if isinstance(e, BlockExpr):
        inner = pp_frames(e.frames)
        return "{ " + inner + " }" if inner else "{ }"
    if isinstance(e, RefExpr):
        return e.name
    if isinstance(e, InstExpr):
        return f"{e.name}[{'; '.join(pp_arg(a) for a in e.args)}]"
    if isinstance(e, ThenExpr):
        return " then ".join(pp_expr(t) for t in e.terms)
    raise TypeError(f"not an expression: {e!r}")


def pp_param(p: ParamClauseAst) -> str:
    prefix = "? " if p.optional else ""
    pl = p.payload
    if isinstance(pl, FramesParam):
        return prefix + pp_frames(pl.frames)
    if isinstance(pl, ListHeaderParam):
        names = [pl.head] + ([pl.head2] if pl.head2 else []) + [pl.tail]
        return prefix + f"{pl.kind.value}: " + " :: ".join(names)
    if isinstance(pl, EmptyParam):
        return prefix + "empty"
    raise TypeError(f"not a parameter payload: {pl!r}")


def pp_def(d: PatternDefAst, indent: str = "") -> str:
    head = f"{indent}ontology {d.name}"
    if d.params:
        head += " [" + "; ".join(pp_param(p) for p in d.params) + "]"
    if d.given:
        head += " given " + ", ".join(d.given)
    head += " ="
    lines = [head]
    if d.locals:
        lines.append(f"{indent}  let")
        for loc in d.locals:
            lines.append(pp_def(loc, indent + "    "))
        lines.append(f"{indent}  in")
    lines.append(f"{indent}  {pp_expr(d.body)}")
    return "\n".join(lines)


def pretty_print(ast: LibraryAst) -> str:
    """Render a library back to parseable source."""
    return "\n\n".join(pp_def(d) for d in ast.items) + ("\n" if ast.items else "")
