"""Lexer and recursive-descent parser for pattern libraries.

Grammar (EBNF):

    library   = { patterndef } ;
    patterndef= "ontology" NAME [ "[" params "]" ] [ "given" names ] "="
                [ "let" { patterndef } "in" ] expr [ "end" ] ;
    params    = param { ";" param } ;
    param     = [ "?" ] ( "empty"
                        | KIND ":" NAME "::" NAME [ "::" NAME ]
                        | frames ) ;
    expr      = term { "then" term } ;
    term      = "{" frames "}" | frames | NAME [ "[" args "]" ] ;
    args      = arg { ";" arg } ;
    arg       = [ "empty" | listexpr | expr ] [ "fit" map { "," map } ] ;
    listexpr  = item "::" ( "empty" | NAME | listexpr ) | item { "," item } ;
    map       = NAME "|->" NAME ;

Frames are a closed Manchester-like fragment: Class (with EquivalentTo
individual enumerations), ObjectProperty (Domain / Range / Characteristics /
SubPropertyOf / InverseOf), Individual (Types / DifferentFrom), and standalone
DifferentIndividuals. Names may be parameterized (`greater[Val]`); identifiers
are made of letters, digits and underscores with at least one non-digit, so
grade names like `0Insignificant` lex as names. Comments run from `%%` to end
of line.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import NameTerm, SymbolKind
from .diagnostics import LexError, ParseError, SourcePos
from .syntax import (
    ArgAst,
    BlockExpr,
    ClassFrame,
    DifferentIndividualsFrame,
    EmptyArg,
    EmptyParam,
    ExprAst,
    Frame,
    FramesParam,
    IndividualFrame,
    InstExpr,
    LibraryAst,
    ListArgAst,
    ListHeaderParam,
    MissingArg,
    ObjectPropertyFrame,
    ParamClauseAst,
    PatternDefAst,
    RefExpr,
    ThenExpr,
)

KEYWORDS = {"ontology", "given", "let", "in", "then", "fit", "empty", "end"}

KIND_KEYWORDS = {
    "Class": SymbolKind.CLASS,
    "ObjectProperty": SymbolKind.OBJECT_PROPERTY,
    "Individual": SymbolKind.INDIVIDUAL,
}

FIELD_KEYWORDS = {
    "Domain", "Range", "Characteristics", "SubPropertyOf", "InverseOf",
    "Types", "DifferentFrom", "EquivalentTo",
}

CHARACTERISTICS = {"Transitive", "Reflexive"}


@dataclass(frozen=True)
class Token:
    kind: str
    value: str
    pos: SourcePos

    def __repr__(self):
        return f"Token({self.kind}, {self.value!r}, {self.pos.line}:{self.pos.col})"


_SINGLES = {
    "[": "LBRACKET", "]": "RBRACKET",
    "{": "LBRACE", "}": "RBRACE",
    ";": "SEMI", ",": "COMMA",
    "=": "EQUALS", "?": "QUESTION",
}


def _is_ident_char(ch: str) -> bool:
    return ch.isascii() and (ch.isalnum() or ch == "_")


def tokenize(text: str, file: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "%" and i + 1 < n and text[i + 1] == "%":
            while i < n and text[i] != "\n":
                i += 1
            continue
        pos = SourcePos(file, line, col)
        if ch == ":":
            if i + 1 < n and text[i + 1] == ":":
                tokens.append(Token("CONS", "::", pos))
                i += 2
                col += 2
            else:
                tokens.append(Token("COLON", ":", pos))
                i += 1
                col += 1
            continue
        if ch == "|":
            if text[i:i + 3] == "|->":
                tokens.append(Token("MAPSTO", "|->", pos))
                i += 3
                col += 3
                continue
            raise LexError(f"bad character {ch!r}", pos)
        if ch in _SINGLES:
            tokens.append(Token(_SINGLES[ch], ch, pos))
            i += 1
            col += 1
            continue
        if _is_ident_char(ch):
            start = i
            while i < n and _is_ident_char(text[i]):
                i += 1
            word = text[start:i]
            col += len(word)
            if word.isdigit():
                raise LexError(f"bad token {word!r}: names need at least one letter or '_'", pos)
            kind = "KEYWORD" if word in KEYWORDS else "IDENT"
            tokens.append(Token(kind, word, pos))
            continue
        raise LexError(f"bad character {ch!r}", pos)
    tokens.append(Token("EOF", "", SourcePos(file, line, col)))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    # -- token access ------------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        j = min(self.i + ahead, len(self.tokens) - 1)
        return self.tokens[j]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        if tok.kind != "EOF":
            self.i += 1
        return tok

    def at(self, kind: str, value: str | None = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (value is None or tok.value == value)

    def at_keyword(self, word: str) -> bool:
        return self.at("KEYWORD", word)

    def accept(self, kind: str, value: str | None = None) -> Token | None:
        if self.at(kind, value):
            return self.advance()
        return None

    def expect(self, kind: str, value: str | None = None, what: str | None = None) -> Token:
        tok = self.peek()
        if tok.kind == kind and (value is None or tok.value == value):
            return self.advance()
        expected = what or (repr(value) if value is not None else kind)
        got = tok.value or tok.kind
        raise ParseError(f"expected {expected}, got {got!r}", tok.pos)

    # -- names -------------------------------------------------------------

    def parse_plain_name(self) -> str:
        return self.expect("IDENT", what="a name").value

    def parse_name_term(self) -> NameTerm:
        base = self.parse_plain_name()
        args: list[NameTerm] = []
        if self.accept("LBRACKET"):
            args.append(self.parse_name_term())
            while self.accept("COMMA"):
                args.append(self.parse_name_term())
            self.expect("RBRACKET", what="']'")
        return NameTerm(base, tuple(args))

    def _name_list(self) -> tuple[NameTerm, ...]:
        names = [self.parse_name_term()]
        while self.accept("COMMA"):
            names.append(self.parse_name_term())
        return tuple(names)

    # -- frames --------------------------------------------------------------

    def at_frame_start(self) -> bool:
        tok = self.peek()
        if tok.kind != "IDENT" or self.peek(1).kind != "COLON":
            return False
        return tok.value in KIND_KEYWORDS or tok.value == "DifferentIndividuals"

    def parse_frames(self, stop_kinds: frozenset[str]) -> tuple[Frame, ...]:
        frames: list[Frame] = []
        while self.at_frame_start():
            frames.append(self.parse_frame())
            if self.peek().kind in stop_kinds:
                break
        if not frames:
            tok = self.peek()
            raise ParseError(f"expected a frame, got {tok.value or tok.kind!r}", tok.pos)
        return tuple(frames)

    def parse_frame(self) -> Frame:
        tok = self.expect("IDENT")
        self.expect("COLON", what="':'")
        if tok.value == "DifferentIndividuals":
            return DifferentIndividualsFrame(self._name_list(), pos=tok.pos)
        if tok.value == "Class":
            name = self.parse_name_term()
            equivalent = None
            if self.at("IDENT", "EquivalentTo"):
                self.advance()
                self.expect("COLON", what="':'")
                self.expect("LBRACE", what="'{'")
                equivalent = self._name_list()
                self.expect("RBRACE", what="'}'")
            return ClassFrame(name, equivalent, pos=tok.pos)
        if tok.value == "ObjectProperty":
            return self._parse_property_fields(self.parse_name_term(), tok.pos)
        if tok.value == "Individual":
            return self._parse_individual_fields(self.parse_name_term(), tok.pos)
        raise ParseError(f"unknown frame keyword {tok.value!r}", tok.pos)

    def _at_field(self, word: str) -> bool:
        return self.at("IDENT", word) and self.peek(1).kind == "COLON"

    def _parse_property_fields(self, name: NameTerm, pos: SourcePos) -> ObjectPropertyFrame:
        domains: list[NameTerm] = []
        ranges: list[NameTerm] = []
        characteristics: list[str] = []
        subs: list[NameTerm] = []
        inverses: list[NameTerm] = []
        while True:
            if self._at_field("Domain"):
                self.advance(); self.advance()
                domains.extend(self._name_list())
            elif self._at_field("Range"):
                self.advance(); self.advance()
                ranges.extend(self._name_list())
            elif self._at_field("Characteristics"):
                self.advance(); self.advance()
                while True:
                    ctok = self.expect("IDENT", what="a characteristic")
                    if ctok.value not in CHARACTERISTICS:
                        raise ParseError(
                            f"unsupported characteristic {ctok.value!r} "
                            f"(supported: {', '.join(sorted(CHARACTERISTICS))})",
                            ctok.pos,
                        )
                    characteristics.append(ctok.value)
                    if not (self.at("COMMA") and self.peek(1).kind == "IDENT"
                            and self.peek(1).value in CHARACTERISTICS
                            and self.peek(2).kind != "COLON"):
                        break
                    self.advance()
            elif self._at_field("SubPropertyOf"):
                self.advance(); self.advance()
                subs.extend(self._name_list())
            elif self._at_field("InverseOf"):
                self.advance(); self.advance()
                inverses.extend(self._name_list())
            else:
                break
        return ObjectPropertyFrame(
            name, tuple(domains), tuple(ranges), tuple(characteristics),
            tuple(subs), tuple(inverses), pos=pos,
        )

    def _parse_individual_fields(self, name: NameTerm, pos: SourcePos) -> IndividualFrame:
        types: list[NameTerm] = []
        different: list[NameTerm] = []
        while True:
            if self._at_field("Types"):
                self.advance(); self.advance()
                types.extend(self._name_list())
            elif self._at_field("DifferentFrom"):
                self.advance(); self.advance()
                different.extend(self._name_list())
            else:
                break
        return IndividualFrame(name, tuple(types), tuple(different), pos=pos)

    # -- expressions ---------------------------------------------------------

    def parse_expr(self) -> ExprAst:
        first = self.parse_term()
        terms = [first]
        while self.at_keyword("then"):
            self.advance()
            terms.append(self.parse_term())
        if len(terms) == 1:
            return first
        return ThenExpr(tuple(terms), pos=first.pos)

    def parse_term(self) -> ExprAst:
        tok = self.peek()
        if self.at("LBRACE"):
            self.advance()
            frames: tuple[Frame, ...] = ()
            if not self.at("RBRACE"):
                frames = self.parse_frames(frozenset({"RBRACE"}))
            self.expect("RBRACE", what="'}'")
            return BlockExpr(frames, pos=tok.pos)
        if self.at_frame_start():
            return BlockExpr(self.parse_frames(frozenset()), pos=tok.pos)
        if self.at("IDENT"):
            name = self.advance().value
            if self.at("LBRACKET"):
                self.advance()
                args = self.parse_args()
                self.expect("RBRACKET", what="']'")
                return InstExpr(name, args, pos=tok.pos)
            return RefExpr(name, pos=tok.pos)
        raise ParseError(f"expected an ontology expression, got {tok.value or tok.kind!r}", tok.pos)

    # -- instantiation arguments ----------------------------------------------

    def parse_args(self) -> tuple[ArgAst, ...]:
        args = [self.parse_arg()]
        while self.accept("SEMI"):
            args.append(self.parse_arg())
        return tuple(args)

    def parse_arg(self) -> ArgAst:
        tok = self.peek()
        if tok.kind in ("SEMI", "RBRACKET"):
            return ArgAst(MissingArg(), pos=tok.pos)
        if self.at_keyword("empty"):
            self.advance()
            value = EmptyArg()
        else:
            expr = self.parse_expr()
            if self.at("COMMA") or self.at("CONS"):
                value = self._parse_list_rest(expr)
            else:
                value = expr
        fits: tuple[tuple[NameTerm, NameTerm], ...] = ()
        if self.at_keyword("fit"):
            self.advance()
            fits = self._parse_fit_maps()
        return ArgAst(value, fits, pos=tok.pos)

    def _expr_as_item(self, e: ExprAst) -> NameTerm:
        t = expr_to_name_term(e)
        if t is None:
            raise ParseError("expected a name in a list argument", e.pos)
        return t

    def _parse_list_rest(self, first: ExprAst) -> ListArgAst:
        items = [self._expr_as_item(first)]
        if self.at("COMMA"):
            while self.accept("COMMA"):
                items.append(self.parse_name_term())
            return ListArgAst(tuple(items), None)
        tail: NameTerm | None = None
        while self.accept("CONS"):
            if self.at_keyword("empty"):
                self.advance()
                tail = None
                break
            term = self.parse_name_term()
            if self.at("CONS"):
                items.append(term)
                continue
            if self.at("COMMA"):
                items.append(term)
                while self.accept("COMMA"):
                    items.append(self.parse_name_term())
                tail = None
                break
            tail = term
            break
        return ListArgAst(tuple(items), tail)

    def _parse_fit_maps(self) -> tuple[tuple[NameTerm, NameTerm], ...]:
        maps = [self._parse_fit_map()]
        while self.accept("COMMA"):
            maps.append(self._parse_fit_map())
        return tuple(maps)

    def _parse_fit_map(self) -> tuple[NameTerm, NameTerm]:
        src = self.parse_name_term()
        self.expect("MAPSTO", what="'|->'")
        dst = self.parse_name_term()
        return (src, dst)

    # -- parameters ------------------------------------------------------------

    def parse_params(self) -> tuple[ParamClauseAst, ...]:
        params = [self.parse_param()]
        while self.accept("SEMI"):
            params.append(self.parse_param())
        return tuple(params)

    def parse_param(self) -> ParamClauseAst:
        tok = self.peek()
        optional = bool(self.accept("QUESTION"))
        if self.at_keyword("empty"):
            self.advance()
            return ParamClauseAst(optional, EmptyParam(), pos=tok.pos)
        if (self.at("IDENT") and self.peek().value in KIND_KEYWORDS
                and self.peek(1).kind == "COLON" and self.peek(2).kind == "IDENT"
                and self.peek(3).kind == "CONS"):
            kind = KIND_KEYWORDS[self.advance().value]
            self.advance()  # colon
            head = self.parse_plain_name()
            self.expect("CONS", what="'::'")
            second = self.parse_plain_name()
            if self.accept("CONS"):
                tail = self.parse_plain_name()
                return ParamClauseAst(optional, ListHeaderParam(kind, head, second, tail), pos=tok.pos)
            return ParamClauseAst(optional, ListHeaderParam(kind, head, None, second), pos=tok.pos)
        frames = self.parse_frames(frozenset({"SEMI", "RBRACKET"}))
        return ParamClauseAst(optional, FramesParam(frames), pos=tok.pos)

    # -- definitions -------------------------------------------------------------

    def parse_def(self) -> PatternDefAst:
        start = self.expect("KEYWORD", "ontology", what="'ontology'")
        name = self.parse_plain_name()
        params: tuple[ParamClauseAst, ...] = ()
        if self.accept("LBRACKET"):
            params = self.parse_params()
            self.expect("RBRACKET", what="']'")
        given: tuple[str, ...] = ()
        if self.at_keyword("given"):
            self.advance()
            names = [self.parse_plain_name()]
            while self.accept("COMMA"):
                names.append(self.parse_plain_name())
            given = tuple(names)
        self.expect("EQUALS", what="'='")
        locals_: tuple[PatternDefAst, ...] = ()
        if self.at_keyword("let"):
            self.advance()
            defs = []
            while self.at_keyword("ontology"):
                defs.append(self.parse_def())
            self.expect("KEYWORD", "in", what="'in'")
            locals_ = tuple(defs)
        body = self.parse_expr()
        end = self.peek().pos
        if self.at_keyword("end"):
            end = self.advance().pos
        return PatternDefAst(name, params, given, locals_, body, pos=start.pos, end=end)

    def parse_library(self) -> LibraryAst:
        items = []
        while not self.at("EOF"):
            if not self.at_keyword("ontology"):
                tok = self.peek()
                raise ParseError(f"expected 'ontology', got {tok.value or tok.kind!r}", tok.pos)
            items.append(self.parse_def())
        return LibraryAst(tuple(items))


def expr_to_name_term(e: ExprAst) -> NameTerm | None:
    """Reinterpret an expression as a parameterized name, if it has that shape.

    `greater[Val]` parses as an instantiation node; whether it denotes a
    pattern call or a name is decided during elaboration, which uses this.
    """
    if isinstance(e, RefExpr):
        return NameTerm(e.name)
    if isinstance(e, InstExpr):
        args: list[NameTerm] = []
        for a in e.args:
            if a.fits:
                return None
            v = a.value
            if isinstance(v, ListArgAst):
                if v.tail is not None:
                    return None
                args.extend(v.items)
            elif isinstance(v, NameTerm):
                args.append(v)
            elif isinstance(v, (RefExpr, InstExpr)):
                t = expr_to_name_term(v)
                if t is None:
                    return None
                args.append(t)
            else:
                return None
        if not args:
            return None
        return NameTerm(e.name, tuple(args))
    return None


def parse_library(text: str, file: str = "<input>") -> LibraryAst:
    """Parse a whole pattern library; raises LexError/ParseError with positions."""
    return _Parser(tokenize(text, file)).parse_library()


def parse_frames(text: str, file: str = "<frames>") -> tuple[Frame, ...]:
    """Parse a bare sequence of frames (the Manchester-like fragment)."""
    p = _Parser(tokenize(text, file))
    if p.at("EOF"):
        return ()
    frames = p.parse_frames(frozenset())
    p.expect("EOF", what="end of input")
    return frames
