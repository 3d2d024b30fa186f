"""Build a resolved pattern library from the AST.

Resolves references (locals shadow library names inside their defining
pattern), merges same-name definitions into ordered template clauses, computes
sequential parameter environments along the inclusion chain, and enforces the
recursion guard: a self or mutual call is only legal when it strictly shrinks
some list parameter.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable, Iterable

from .core import (
    EMPTY_ONTOLOGY,
    ClassAssertion,
    DifferentIndividuals,
    Domain,
    EquivalentToUnion,
    FlatOntology,
    InverseOf,
    NameTerm,
    Range,
    Reflexive,
    SubPropertyOf,
    Symbol,
    SymbolKind,
    Transitive,
    make_ontology,
    union_flat,
)
from .diagnostics import (
    DuplicateDefinition,
    GodpError,
    IllegalCycle,
    UnknownReference,
    UnsupportedArgument,
)
from .syntax import (
    ArgAst,
    BlockExpr,
    ClassFrame,
    DifferentIndividualsFrame,
    EmptyParam,
    ExprAst,
    Frame,
    FramesParam,
    IndividualFrame,
    InstExpr,
    LibraryAst,
    ListArgAst,
    ListHeaderParam,
    ObjectPropertyFrame,
    PatternDefAst,
    RefExpr,
    ThenExpr,
)

ResolveFn = Callable[[NameTerm], NameTerm]
SpliceFn = Callable[[NameTerm], "tuple[NameTerm, ...] | None"]


def _identity(n: NameTerm) -> NameTerm:
    return n


def _no_splice(n: NameTerm) -> tuple[NameTerm, ...] | None:
    return None


def build_block(
    frames: Iterable[Frame],
    resolve: ResolveFn = _identity,
    splice: SpliceFn = _no_splice,
) -> FlatOntology:
    """Build a flat ontology from frames, applying a name substitution.

    `splice` expands a name bound to a list (a template tail) into its items;
    it applies in every comma-list position. DifferentIndividuals axioms with
    fewer than two distinct members and empty individual enumerations are
    vacuous and dropped.
    """

    def items(names: Iterable[NameTerm]) -> tuple[NameTerm, ...]:
        out: list[NameTerm] = []
        for n in names:
            spliced = splice(n)
            if spliced is not None:
                out.extend(spliced)
            else:
                out.append(resolve(n))
        return tuple(out)

    symbols: list[Symbol] = []
    axioms: list = []
    for f in frames:
        try:
            if isinstance(f, ClassFrame):
                cls = resolve(f.name)
                symbols.append(Symbol(cls, SymbolKind.CLASS))
                if f.equivalent is not None:
                    members = items(f.equivalent)
                    if members:
                        axioms.append(EquivalentToUnion(cls, members))
            elif isinstance(f, ObjectPropertyFrame):
                prop = resolve(f.name)
                symbols.append(Symbol(prop, SymbolKind.OBJECT_PROPERTY))
                for d in items(f.domains):
                    axioms.append(Domain(prop, d))
                for r in items(f.ranges):
                    axioms.append(Range(prop, r))
                for c in f.characteristics:
                    axioms.append(Transitive(prop) if c == "Transitive" else Reflexive(prop))
                for s in items(f.sub_property_of):
                    axioms.append(SubPropertyOf(prop, s))
                for inv in items(f.inverse_of):
                    axioms.append(InverseOf(prop, inv))
            elif isinstance(f, IndividualFrame):
                ind = resolve(f.name)
                symbols.append(Symbol(ind, SymbolKind.INDIVIDUAL))
                for t in items(f.types):
                    axioms.append(ClassAssertion(t, ind))
                for other in items(f.different_from):
                    pair = DifferentIndividuals((ind, other)).canonical()
                    if len(pair.individuals) >= 2:
                        axioms.append(pair)
            elif isinstance(f, DifferentIndividualsFrame):
                di = DifferentIndividuals(items(f.items)).canonical()
                if len(di.individuals) >= 2:
                    axioms.append(di)
            else:
                raise TypeError(f"not a frame: {f!r}")
        except GodpError as e:
            e.ensure_pos(f.pos)
            raise
    try:
        return make_ontology(symbols, axioms)
    except GodpError as e:
        first = next(iter(frames), None)
        e.ensure_pos(first.pos if first is not None else None)
        raise


# ---------------------------------------------------------------------------
# Resolved model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PlainShape:
    frames: tuple[Frame, ...]
    delta: FlatOntology
    new_symbols: tuple[Symbol, ...]


@dataclass(frozen=True)
class ListTemplate:
    kind: SymbolKind | None  # None for the `empty` template
    head: str | None
    head2: str | None
    tail: str | None

    @property
    def min_len(self) -> int:
        if self.head is None:
            return 0
        return 2 if self.head2 is not None else 1

    def matches(self, n: int) -> bool:
        return n == 0 if self.head is None else n >= self.min_len

    def cons_depth(self) -> int:
        return self.min_len

    def describe(self) -> str:
        if self.head is None:
            return "empty"
        names = [self.head] + ([self.head2] if self.head2 else []) + [self.tail or "?"]
        return " :: ".join(names)


@dataclass(frozen=True)
class ParamSpec:
    index: int
    optional: bool
    shape: PlainShape | ListTemplate

    @property
    def is_list(self) -> bool:
        return isinstance(self.shape, ListTemplate)

    @property
    def shape_word(self) -> str:
        if self.is_list:
            return "list"
        return "optional" if self.optional else "plain"


@dataclass
class Clause:
    params: list[ParamSpec]
    body: ExprAst
    pos: object
    envs: list[FlatOntology] = dc_field(default_factory=list)


@dataclass
class PatternDef:
    name: str
    qual: str
    imports: tuple[str, ...]
    locals: dict[str, "PatternDef"]
    clauses: list[Clause]
    pos: object
    parent: "PatternDef | None" = None

    @property
    def arity(self) -> int:
        return len(self.clauses[0].params)

    def shape_words(self) -> list[str]:
        return [p.shape_word for p in self.clauses[0].params]

    def list_slots(self) -> list[int]:
        return [p.index for p in self.clauses[0].params if p.is_list]


@dataclass
class Library:
    defs: dict[str, PatternDef]

    def lookup(self, name: str) -> PatternDef | None:
        return self.defs.get(name)

    def require(self, name: str, pos=None) -> PatternDef:
        d = self.defs.get(name)
        if d is None:
            raise UnknownReference(f"unknown ontology or pattern '{name}'", pos)
        return d

    def zero_param_names(self) -> list[str]:
        return [n for n, d in self.defs.items() if d.arity == 0]


# ---------------------------------------------------------------------------
# Building
# ---------------------------------------------------------------------------

def _param_category(ast_param) -> str:
    if isinstance(ast_param.payload, FramesParam):
        return "plain"
    return "list"


def _check_clause_compatibility(name: str, first: PatternDefAst, other: PatternDefAst) -> None:
    if len(first.params) != len(other.params):
        raise DuplicateDefinition(
            f"clauses of '{name}' disagree on parameter count "
            f"({len(first.params)} vs {len(other.params)})",
            other.pos,
        )
    if first.given != other.given:
        raise DuplicateDefinition(f"clauses of '{name}' disagree on given imports", other.pos)
    for i, (a, b) in enumerate(zip(first.params, other.params)):
        if a.optional != b.optional:
            raise DuplicateDefinition(
                f"clauses of '{name}' disagree on optionality of parameter {i + 1}", other.pos
            )
        ca, cb = _param_category(a), _param_category(b)
        if ca != cb:
            raise DuplicateDefinition(
                f"clauses of '{name}' disagree on the shape of parameter {i + 1}", other.pos
            )
        if ca == "plain":
            if a.payload != b.payload:
                raise DuplicateDefinition(
                    f"clauses of '{name}' disagree on plain parameter {i + 1}", other.pos
                )
        else:
            ka = None if isinstance(a.payload, EmptyParam) else a.payload.kind
            kb = None if isinstance(b.payload, EmptyParam) else b.payload.kind
            if ka is not None and kb is not None and ka is not kb:
                raise DuplicateDefinition(
                    f"clauses of '{name}' disagree on the kind of list parameter {i + 1}",
                    other.pos,
                )


def _template_of(param) -> ListTemplate:
    pl = param.payload
    if isinstance(pl, EmptyParam):
        return ListTemplate(None, None, None, None)
    assert isinstance(pl, ListHeaderParam)
    return ListTemplate(pl.kind, pl.head, pl.head2, pl.tail)


def _build_def(
    name: str,
    clause_asts: list[PatternDefAst],
    qual: str,
    parent: PatternDef | None,
) -> PatternDef:
    first = clause_asts[0]
    for other in clause_asts[1:]:
        _check_clause_compatibility(name, first, other)
    has_list = any(_param_category(p) == "list" for p in first.params)
    if len(clause_asts) > 1 and not has_list:
        raise DuplicateDefinition(
            f"duplicate definition of '{name}' (only list-parameter patterns may "
            f"have several template clauses)",
            clause_asts[1].pos,
        )

    d = PatternDef(name, qual, first.given, {}, [], first.pos, parent)
    # locals from all clause defs merge; same-name local defs become clauses
    local_asts: dict[str, list[PatternDefAst]] = {}
    for ca in clause_asts:
        for loc in ca.locals:
            local_asts.setdefault(loc.name, []).append(loc)
    for lname, lasts in local_asts.items():
        d.locals[lname] = _build_def(lname, lasts, f"{qual}::{lname}", d)

    for ca in clause_asts:
        params: list[ParamSpec] = []
        for i, p in enumerate(ca.params):
            if _param_category(p) == "plain":
                shape = PlainShape(p.payload.frames, EMPTY_ONTOLOGY, ())  # delta in phase B
            else:
                shape = _template_of(p)
            params.append(ParamSpec(i, p.optional, shape))
        d.clauses.append(Clause(params, ca.body, ca.pos))
    return d


def build_library(ast: LibraryAst) -> Library:
    """Resolve an AST into an immutable Library; validates names, clause
    consistency, sequential environments, imports, and recursion legality."""
    grouped: dict[str, list[PatternDefAst]] = {}
    for item in ast.items:
        grouped.setdefault(item.name, []).append(item)

    defs: dict[str, PatternDef] = {}
    for name, clause_asts in grouped.items():
        defs[name] = _build_def(name, clause_asts, name, None)
    lib = Library(defs)

    for d in defs.values():
        _validate_imports(lib, d)
        _resolve_references(lib, d)
    _check_cycles(lib)
    for d in defs.values():
        _compute_environments(lib, d)
    return lib


def _validate_imports(lib: Library, d: PatternDef) -> None:
    for imp in d.imports:
        target = lib.lookup(imp)
        if target is None:
            raise UnknownReference(f"unknown import '{imp}' in '{d.qual}'", d.pos)
        if target.arity != 0:
            raise UnsupportedArgument(
                f"import '{imp}' in '{d.qual}' is generic; only 0-parameter "
                f"ontologies can be imported",
                d.pos,
            )
    for loc in d.locals.values():
        _validate_imports(lib, loc)


# -- reference resolution ----------------------------------------------------

def _scopes_for(d: PatternDef) -> list[dict[str, PatternDef]]:
    scopes = []
    cur: PatternDef | None = d
    while cur is not None:
        scopes.append(cur.locals)
        cur = cur.parent
    return scopes


def resolve_name(lib: Library, d: PatternDef, name: str) -> PatternDef | None:
    """Resolve a pattern/ontology name as seen from inside `d`."""
    for scope in _scopes_for(d):
        if name in scope:
            return scope[name]
    return lib.lookup(name)


def _resolve_references(lib: Library, d: PatternDef) -> None:
    for clause in d.clauses:
        _walk_expr_refs(lib, d, clause.body, strict=True)
    for loc in d.locals.values():
        _resolve_references(lib, loc)


def _walk_expr_refs(lib: Library, d: PatternDef, expr: ExprAst, strict: bool) -> None:
    if isinstance(expr, ThenExpr):
        for t in expr.terms:
            _walk_expr_refs(lib, d, t, strict)
        return
    if isinstance(expr, BlockExpr):
        return
    if isinstance(expr, RefExpr):
        if strict and resolve_name(lib, d, expr.name) is None:
            raise UnknownReference(f"unknown ontology or pattern '{expr.name}'", expr.pos)
        return
    if isinstance(expr, InstExpr):
        target = resolve_name(lib, d, expr.name)
        if strict and target is None:
            raise UnknownReference(f"unknown ontology or pattern '{expr.name}'", expr.pos)
        for a in expr.args:
            if isinstance(a.value, (RefExpr, InstExpr, ThenExpr, BlockExpr)):
                # argument names may be local symbols, so unknown heads are fine here
                _walk_expr_refs(lib, d, a.value, strict=False)
        return


# -- recursion guard -----------------------------------------------------------

def _clause_tail_depths(clause: Clause) -> dict[str, int]:
    depths: dict[str, int] = {}
    for p in clause.params:
        if p.is_list and p.shape.tail is not None:
            depths[p.shape.tail] = p.shape.cons_depth()
    return depths


def _arg_shrinks(a: ArgAst, tails: dict[str, int]) -> bool:
    v = a.value
    if isinstance(v, RefExpr):
        return v.name in tails  # bare tail: one constructor stripped
    if isinstance(v, ListArgAst) and v.tail is not None and v.tail.is_plain():
        d = tails.get(v.tail.base)
        return d is not None and len(v.items) < d
    return False


def _collect_edges(lib: Library, d: PatternDef, edges: list) -> None:
    for clause in d.clauses:
        tails = _clause_tail_depths(clause)
        _walk_calls(lib, d, clause.body, tails, edges)
    for loc in d.locals.values():
        _collect_edges(lib, loc, edges)


def _walk_calls(lib: Library, d: PatternDef, expr: ExprAst, tails, edges) -> None:
    if isinstance(expr, ThenExpr):
        for t in expr.terms:
            _walk_calls(lib, d, t, tails, edges)
        return
    if isinstance(expr, RefExpr):
        target = resolve_name(lib, d, expr.name)
        if target is not None:
            edges.append((d.qual, target.qual, False, expr.pos))
        return
    if isinstance(expr, InstExpr):
        target = resolve_name(lib, d, expr.name)
        if target is not None:
            shrinks = any(_arg_shrinks(a, tails) for a in expr.args)
            edges.append((d.qual, target.qual, shrinks, expr.pos))
        for a in expr.args:
            if isinstance(a.value, (RefExpr, InstExpr, ThenExpr)):
                _walk_calls(lib, d, a.value, tails, edges)
        return


def _all_defs(lib: Library):
    def walk(d: PatternDef):
        yield d
        for loc in d.locals.values():
            yield from walk(loc)

    for d in lib.defs.values():
        yield from walk(d)


def _check_cycles(lib: Library) -> None:
    edges: list = []
    for d in lib.defs.values():
        _collect_edges(lib, d, edges)
    for d in _all_defs(lib):
        for imp in d.imports:
            edges.append((d.qual, lib.defs[imp].qual, False, d.pos))

    nodes = {d.qual for d in _all_defs(lib)}
    adj: dict[str, set[str]] = {n: set() for n in nodes}
    for src, dst, _, _ in edges:
        adj[src].add(dst)
    comp = _tarjan_scc(nodes, adj)
    for src, dst, shrinks, pos in edges:
        same = comp[src] == comp[dst]
        if same and not shrinks:
            raise IllegalCycle(
                f"recursive call from '{src}' to '{dst}' does not strictly shrink "
                f"a list parameter",
                pos,
            )


def _tarjan_scc(nodes: set[str], adj: dict[str, set[str]]) -> dict[str, int]:
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    comp: dict[str, int] = {}
    counter = [0]
    comps = [0]

    def strongconnect(v: str) -> None:
        work = [(v, iter(sorted(adj[v])))]
        index[v] = low[v] = counter[0]
        counter[0] += 1
        stack.append(v)
        on_stack.add(v)
        while work:
            node, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(sorted(adj[w]))))
                    advanced = True
                    break
                if w in on_stack:
                    low[node] = min(low[node], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp[w] = comps[0]
                    if w == node:
                        break
                comps[0] += 1

    for v in sorted(nodes):
        if v not in index:
            strongconnect(v)
    # self-loops form their own component but comp equality already covers them
    return comp


# -- environments --------------------------------------------------------------

def _imports_ontology(lib: Library, d: PatternDef) -> FlatOntology:
    if not d.imports:
        return EMPTY_ONTOLOGY
    from .instantiate import expand_named  # circular at module level by design

    out = EMPTY_ONTOLOGY
    for imp in d.imports:
        out = union_flat(out, expand_named(lib, imp))
    return out


def _compute_environments(lib: Library, d: PatternDef, prefix: FlatOntology | None = None) -> None:
    base = prefix if prefix is not None else _imports_ontology(lib, d)
    for clause in d.clauses:
        envs = [base]
        new_params: list[ParamSpec] = []
        for p in clause.params:
            env = envs[-1]
            if p.is_list:
                tmpl: ListTemplate = p.shape
                delta_syms = []
                if tmpl.head is not None:
                    delta_syms.append(Symbol(NameTerm(tmpl.head), tmpl.kind))
                if tmpl.head2 is not None:
                    delta_syms.append(Symbol(NameTerm(tmpl.head2), tmpl.kind))
                delta = make_ontology(delta_syms, [])
                new_params.append(p)
            else:
                try:
                    delta = build_block(p.shape.frames)
                    union_flat(env, delta)  # well-formedness in this environment
                except GodpError as e:
                    e.ensure_pos(p.shape.frames[0].pos if p.shape.frames else d.pos)
                    raise
                new_syms = tuple(
                    sorted(
                        (s for s in delta.signature if s not in env.signature),
                        key=Symbol.key,
                    )
                )
                new_params.append(
                    ParamSpec(p.index, p.optional, PlainShape(p.shape.frames, delta, new_syms))
                )
            envs.append(union_flat(env, delta))
        clause.params = new_params
        clause.envs = envs
    full = d.clauses[0].envs[-1]
    for loc in d.locals.values():
        _compute_environments(lib, loc, prefix=full)


def param_environments(d: PatternDef) -> list[FlatOntology]:
    """env[i] = what parameter i sees: imports plus deltas of parameters 0..i-1.

    The final entry env[arity] is the full parameter environment. Computed
    from the first clause (clauses share plain parameters).
    """
    return list(d.clauses[0].envs)


def resolve_local_subpatterns(lib: Library, d: PatternDef) -> PatternDef:
    """Recompute local sub-pattern environments, prefixed by the enclosing
    pattern's full environment; returns the same definition."""
    full = d.clauses[0].envs[-1]
    for loc in d.locals.values():
        _compute_environments(lib, loc, prefix=full)
    return d
