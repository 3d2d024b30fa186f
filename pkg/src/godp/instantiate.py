"""The expansion engine.

Derives fitting morphisms for the three argument forms (named ontology,
anonymous ontology, local-environment symbol), checks compatibility and
parameter constraints, elides optional parameters, recurses over list
parameters with first-match template selection, and produces flat ontologies
under the Same Name - Same Thing union.

Expansion is pure over an immutable Library; every top-level call gets its own
context (depth budget, memo table for 0-parameter expansions, placeholder
registry), so independent expansions can run concurrently.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from typing import Iterable, Sequence, Union

from .core import (
    EMPTY_ONTOLOGY,
    Axiom,
    FittingMorphism,
    FlatOntology,
    NameTerm,
    Symbol,
    make_ontology,
    union_flat,
)
from .diagnostics import (
    AmbiguousFitting,
    ArityMismatch,
    DepthExceeded,
    GodpError,
    IncompatibleFittings,
    KindMismatch,
    MissingArgument,
    NoCandidate,
    NoMatch,
    SourcePos,
    UnknownReference,
    UnmetConstraint,
    UnsupportedArgument,
)
from .elaborate import (
    Clause,
    Library,
    ListTemplate,
    ParamSpec,
    PatternDef,
    PlainShape,
    build_block,
)
from .syntax import (
    ArgAst,
    BlockExpr,
    EmptyArg,
    ExprAst,
    InstExpr,
    ListArgAst,
    MissingArg,
    RefExpr,
    ThenExpr,
)
from .parser import expr_to_name_term

DEFAULT_DEPTH = 10_000

_PLACEHOLDER_PREFIX = "__elided_"


# ---------------------------------------------------------------------------
# Bindings and name substitution
# ---------------------------------------------------------------------------

@dataclass
class Bindings:
    """Parameter-name substitution plus list bindings for template tails."""

    name_map: dict[NameTerm, NameTerm] = dc_field(default_factory=dict)
    list_map: dict[str, tuple[NameTerm, ...]] = dc_field(default_factory=dict)

    def child(self) -> "Bindings":
        return Bindings(dict(self.name_map), dict(self.list_map))

    def apply(self, n: NameTerm) -> NameTerm:
        return substitute_name(n, self)

    def items_of(self, n: NameTerm) -> tuple[NameTerm, ...] | None:
        if n.is_plain() and n.base in self.list_map:
            return self.list_map[n.base]
        return None


EMPTY_BINDINGS = Bindings()


def substitute_name(n: NameTerm, b: Bindings) -> NameTerm:
    """Capture-free structural substitution of bound parameter names.

    An exact binding for the whole term wins; otherwise a bound base is
    replaced (its image's arguments are prefixed when the image is itself
    parameterized) and arguments are substituted recursively. Unbound plain
    names pass through unchanged.
    """
    exact = b.name_map.get(n)
    if exact is not None:
        return exact
    new_args = tuple(substitute_name(a, b) for a in n.args)
    base_image = b.name_map.get(NameTerm(n.base))
    if base_image is not None:
        return NameTerm(base_image.base, base_image.args + new_args)
    if new_args != n.args:
        return NameTerm(n.base, new_args)
    return n


def _contains_base(n: NameTerm, bases: frozenset[str]) -> bool:
    return any(b in bases for b in n.bases())


# ---------------------------------------------------------------------------
# Public argument forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NamedOntologyArg:
    name: str
    fits: tuple[tuple[NameTerm, NameTerm], ...] = ()


@dataclass(frozen=True)
class AnonymousArg:
    ontology: FlatOntology
    fits: tuple[tuple[NameTerm, NameTerm], ...] = ()


@dataclass(frozen=True)
class LocalSymbolArg:
    term: NameTerm
    fits: tuple[tuple[NameTerm, NameTerm], ...] = ()


@dataclass(frozen=True)
class EmptyOptArg:
    pass


@dataclass(frozen=True)
class ListArg:
    items: tuple[NameTerm, ...]


ArgumentForm = Union[NamedOntologyArg, AnonymousArg, LocalSymbolArg, EmptyOptArg, ListArg]


@dataclass(frozen=True)
class Instantiation:
    pattern: str
    args: tuple[ArgumentForm, ...]
    local_env: FlatOntology = EMPTY_ONTOLOGY


# ---------------------------------------------------------------------------
# Engine context
# ---------------------------------------------------------------------------

@dataclass
class _Ctx:
    lib: Library
    budget: int
    placeholders: set[str] = dc_field(default_factory=set)  # placeholder bases
    cache: dict[str, FlatOntology] = dc_field(default_factory=dict)
    counter: "itertools.count" = dc_field(default_factory=itertools.count)
    constraint_trace: list[tuple[Axiom, frozenset[Axiom]]] = dc_field(default_factory=list)
    fitting_trace: list[tuple[str, FittingMorphism]] = dc_field(default_factory=list)

    def tick(self, pos: SourcePos | None) -> None:
        if self.budget <= 0:
            raise DepthExceeded("expansion depth budget exceeded", pos)
        self.budget -= 1

    def fresh_placeholder(self, original: NameTerm) -> NameTerm:
        base = f"{_PLACEHOLDER_PREFIX}{original.base}_{next(self.counter)}"
        self.placeholders.add(base)
        return NameTerm(base)

    def is_placeholder(self, n: NameTerm) -> bool:
        return _contains_base(n, frozenset(self.placeholders)) if self.placeholders else False


@dataclass
class _RuntimeScope:
    """One live pattern expansion: its definition and active bindings."""

    pattern: PatternDef | None
    bindings: Bindings
    parent: "_RuntimeScope | None" = None

    def resolve(self, lib: Library, name: str) -> "tuple[PatternDef, _RuntimeScope | None] | None":
        scope: _RuntimeScope | None = self
        while scope is not None:
            if scope.pattern is not None and name in scope.pattern.locals:
                return scope.pattern.locals[name], scope
            scope = scope.parent
        d = lib.lookup(name)
        if d is not None:
            return d, None
        return None


_ROOT_SCOPE = _RuntimeScope(None, EMPTY_BINDINGS, None)


# ---------------------------------------------------------------------------
# Internal argument forms (normalized against the callee's parameter shapes)
# ---------------------------------------------------------------------------

@dataclass
class _EmptyForm:
    pos: SourcePos | None


@dataclass
class _LocalForm:
    term: NameTerm
    fits: tuple[tuple[NameTerm, NameTerm], ...]
    pos: SourcePos | None


@dataclass
class _OntForm:
    expr: ExprAst | None
    ont: FlatOntology | None
    named: str | None
    fits: tuple[tuple[NameTerm, NameTerm], ...]
    pos: SourcePos | None


@dataclass
class _ListForm:
    items: tuple[NameTerm, ...]
    pos: SourcePos | None


_Form = Union[_EmptyForm, _LocalForm, _OntForm, _ListForm]


def _resolve_items(
    raw: Iterable[NameTerm], b: Bindings, pos: SourcePos | None
) -> tuple[NameTerm, ...]:
    out: list[NameTerm] = []
    for t in raw:
        spliced = b.items_of(t)
        if spliced is not None:
            out.extend(spliced)
        else:
            out.append(b.apply(t))
    return tuple(out)


def _normalize_ast_arg(
    a: ArgAst,
    pspec: ParamSpec,
    lib: Library,
    scope: _RuntimeScope,
    b: Bindings,
) -> _Form:
    v = a.value
    if pspec.is_list:
        if a.fits:
            raise UnsupportedArgument("fit maps are not allowed on list arguments", a.pos)
        if isinstance(v, (MissingArg, EmptyArg)):
            return _ListForm((), a.pos)
        if isinstance(v, ListArgAst):
            items = list(_resolve_items(v.items, b, a.pos))
            if v.tail is not None:
                rest = b.items_of(v.tail)
                if rest is None:
                    raise UnknownReference(
                        f"'{v.tail.render()}' is not a list in scope (expected a "
                        f"list-parameter tail)",
                        a.pos,
                    )
                items.extend(rest)
            return _ListForm(tuple(items), a.pos)
        if isinstance(v, NameTerm):
            return _ListForm(_resolve_items([v], b, a.pos), a.pos)
        if isinstance(v, (RefExpr, InstExpr)):
            t = expr_to_name_term(v)
            if t is not None and (not isinstance(v, InstExpr) or scope.resolve(lib, v.name) is None):
                return _ListForm(_resolve_items([t], b, a.pos), a.pos)
        raise UnsupportedArgument(
            "a list argument must be a comma or '::' list of names", a.pos
        )

    # plain parameter
    if isinstance(v, (MissingArg, EmptyArg)):
        if a.fits:
            raise UnsupportedArgument(
                "fit maps are meaningless on an empty argument", a.pos
            )
        return _EmptyForm(a.pos)
    if isinstance(v, ListArgAst):
        raise UnsupportedArgument("list argument given for a non-list parameter", a.pos)
    if isinstance(v, NameTerm):
        return _LocalForm(b.apply(v), _subst_fits(a.fits, b), a.pos)
    if isinstance(v, RefExpr):
        hit = scope.resolve(lib, v.name)
        if hit is not None:
            target, _ = hit
            if target.arity != 0:
                raise ArityMismatch(
                    f"'{v.name}' is generic and needs arguments to be used as an argument",
                    a.pos,
                )
            return _OntForm(None, None, v.name, _subst_fits(a.fits, b), a.pos)
        return _LocalForm(b.apply(NameTerm(v.name)), _subst_fits(a.fits, b), a.pos)
    if isinstance(v, InstExpr):
        hit = scope.resolve(lib, v.name)
        if hit is not None:
            return _OntForm(v, None, None, _subst_fits(a.fits, b), a.pos)
        t = expr_to_name_term(v)
        if t is not None:
            return _LocalForm(b.apply(t), _subst_fits(a.fits, b), a.pos)
        raise UnknownReference(f"unknown ontology or pattern '{v.name}'", a.pos)
    if isinstance(v, (ThenExpr, BlockExpr)):
        return _OntForm(v, None, None, _subst_fits(a.fits, b), a.pos)
    raise UnsupportedArgument(f"unsupported argument form {type(v).__name__}", a.pos)


def _subst_fits(
    fits: tuple[tuple[NameTerm, NameTerm], ...], b: Bindings
) -> tuple[tuple[NameTerm, NameTerm], ...]:
    # sources name the callee's parameter symbols and stay as written;
    # targets live in the caller's context and get substituted
    return tuple((src, b.apply(dst)) for src, dst in fits)


def _public_to_form(arg: ArgumentForm, pos: SourcePos | None) -> _Form:
    if isinstance(arg, NamedOntologyArg):
        return _OntForm(None, None, arg.name, arg.fits, pos)
    if isinstance(arg, AnonymousArg):
        return _OntForm(None, arg.ontology, None, arg.fits, pos)
    if isinstance(arg, LocalSymbolArg):
        return _LocalForm(arg.term, arg.fits, pos)
    if isinstance(arg, EmptyOptArg):
        return _EmptyForm(pos)
    if isinstance(arg, ListArg):
        return _ListForm(arg.items, pos)
    raise UnsupportedArgument(f"unsupported argument form {type(arg).__name__}", pos)


# ---------------------------------------------------------------------------
# Template matching
# ---------------------------------------------------------------------------

def _clause_matches(clause: Clause, forms: Sequence[_Form]) -> bool:
    for p, f in zip(clause.params, forms):
        if p.is_list:
            if not isinstance(f, _ListForm):
                if isinstance(f, _EmptyForm):
                    continue  # padded trailing optional list: empty
                return False
            if not p.shape.matches(len(f.items)):
                return False
    return True


def match_template(
    clauses: Sequence[Clause], arg: ListArg
) -> tuple[Clause, Bindings]:
    """First clause (source order) whose list template matches the argument's
    length structure, with head/tail bindings; raises NoMatch otherwise."""
    for clause in clauses:
        slots = [p for p in clause.params if p.is_list]
        if len(slots) != 1:
            raise UnsupportedArgument(
                "match_template expects clauses with exactly one list parameter"
            )
        tmpl: ListTemplate = slots[0].shape
        if tmpl.matches(len(arg.items)):
            b = Bindings()
            _bind_template(tmpl, arg.items, b)
            return clause, b
    raise NoMatch(
        f"no template clause matches a list argument of length {len(arg.items)}; "
        f"the instantiation is incorrect"
    )


def _bind_template(tmpl: ListTemplate, items: tuple[NameTerm, ...], b: Bindings) -> None:
    if tmpl.head is None:
        return
    b.name_map[NameTerm(tmpl.head)] = items[0]
    rest = items[1:]
    if tmpl.head2 is not None:
        b.name_map[NameTerm(tmpl.head2)] = items[1]
        rest = items[2:]
    if tmpl.tail is not None:
        b.list_map[tmpl.tail] = rest


# ---------------------------------------------------------------------------
# Fitting derivation
# ---------------------------------------------------------------------------

def check_compatibility(fittings: Sequence[FittingMorphism]) -> None:
    """A symbol shared between parameters must map identically everywhere."""
    seen: dict[Symbol, Symbol] = {}
    for m in fittings:
        for src, dst in m.pairs:
            prior = seen.get(src)
            if prior is not None and prior != dst:
                raise IncompatibleFittings(
                    f"'{src.name.render()}' is mapped both to '{prior.name.render()}' "
                    f"and to '{dst.name.render()}'"
                )
            seen[src] = dst


def check_constraints(
    param_axioms: Iterable[Axiom], m: FittingMorphism, available: FlatOntology
) -> None:
    """Translated parameter axioms must already hold (syntactic membership
    after canonicalization) in the available environment."""
    table = {src.name: dst.name for src, dst in m.pairs}

    def fn(n: NameTerm) -> NameTerm:
        return table.get(n, n)

    for ax in sorted(param_axioms, key=Axiom.sort_key):
        translated = ax.rename(fn).canonical()
        if translated not in available.axioms:
            raise UnmetConstraint(
                f"argument does not satisfy required axiom: {' '.join(translated.dump_fields())}"
            )


def derive_fitting(
    param: ParamSpec,
    arg: ArgumentForm,
    env: FlatOntology,
    explicit: Sequence[tuple[NameTerm, NameTerm]] = (),
    lib: Library | None = None,
) -> FittingMorphism:
    """Derive the fitting morphism for one parameter.

    Candidate symbols for ontology arguments are the argument's contribution
    beyond the local environment; local-symbol arguments map the parameter's
    single new symbol to an environment symbol (or a fresh one). Resolving a
    NamedOntologyArg needs `lib`.
    """
    if param.is_list:
        raise UnsupportedArgument("derive_fitting applies to plain parameters")
    shape: PlainShape = param.shape
    explicit_map = {src: dst for src, dst in explicit}
    mapping: dict[Symbol, Symbol] = {}
    if isinstance(arg, EmptyOptArg):
        if not param.optional:
            raise MissingArgument("missing argument for a non-optional parameter")
        return FittingMorphism.of({})
    if isinstance(arg, LocalSymbolArg):
        if len(shape.new_symbols) != 1:
            raise UnsupportedArgument(
                "a bare symbol argument fits only parameters that define exactly "
                "one new symbol"
            )
        n = shape.new_symbols[0]
        target = explicit_map.get(n.name, arg.term)
        found = env.kind_of(target)
        if found is not None and found is not n.kind:
            raise KindMismatch(
                f"'{target.render()}' has kind {found.value}, parameter "
                f"'{n.name.render()}' needs {n.kind.value}"
            )
        mapping[n] = Symbol(target, n.kind)
        return FittingMorphism.of(mapping)
    if isinstance(arg, (NamedOntologyArg, AnonymousArg)):
        if isinstance(arg, NamedOntologyArg):
            if lib is None:
                raise UnsupportedArgument(
                    "resolving a named ontology argument needs the library"
                )
            ontology = expand_named(lib, arg.name)
            arg = AnonymousArg(ontology, arg.fits)
        pool = [s for s in arg.ontology.sorted_signature() if s not in env.signature]
        for n in shape.new_symbols:
            if n.name in explicit_map:
                target = explicit_map[n.name]
                k = arg.ontology.kind_of(target) or env.kind_of(target)
                if k is None:
                    raise NoCandidate(
                        f"fit target '{target.render()}' is not a symbol of the argument"
                    )
                if k is not n.kind:
                    raise KindMismatch(
                        f"fit target '{target.render()}' has kind {k.value}, parameter "
                        f"'{n.name.render()}' needs {n.kind.value}"
                    )
                mapping[n] = Symbol(target, n.kind)
                continue
            candidates = [s for s in pool if s.kind is n.kind]
            if not candidates:
                raise NoCandidate(
                    f"no {n.kind.value} symbol in the argument to fit parameter "
                    f"'{n.name.render()}'"
                )
            if len(candidates) > 1:
                raise AmbiguousFitting(
                    f"parameter '{n.name.render()}' has {len(candidates)} "
                    f"{n.kind.value} candidates "
                    f"({', '.join(c.name.render() for c in candidates)}); "
                    f"give an explicit fit map"
                )
            mapping[n] = candidates[0]
        return FittingMorphism.of(mapping)
    raise UnsupportedArgument(f"unsupported argument form {type(arg).__name__}")


# ---------------------------------------------------------------------------
# Elision
# ---------------------------------------------------------------------------

def elide_optional(body: FlatOntology, dead: Iterable[Symbol]) -> FlatOntology:
    """Remove the dead symbols and every axiom mentioning one of them."""
    dead_names = frozenset(s.name for s in dead)
    sig = frozenset(s for s in body.signature if s.name not in dead_names)
    axs = frozenset(a for a in body.axioms if not a.mentions(dead_names))
    return FlatOntology(sig, axs)


def _elide_placeholders(body: FlatOntology, bases: frozenset[str]) -> FlatOntology:
    sig = frozenset(s for s in body.signature if not _contains_base(s.name, bases))
    axs = frozenset(
        a for a in body.axioms
        if not any(_contains_base(n, bases) for n, _ in a.refs())
    )
    return FlatOntology(sig, axs)


# ---------------------------------------------------------------------------
# The expansion proper
# ---------------------------------------------------------------------------

def _imports_ontology(ctx: _Ctx, d: PatternDef, pos) -> FlatOntology:
    out = EMPTY_ONTOLOGY
    for imp in d.imports:
        out = union_flat(out, _closed_expansion(ctx, ctx.lib.defs[imp], pos))
    return out


def _closed_expansion(ctx: _Ctx, d: PatternDef, pos) -> FlatOntology:
    cached = ctx.cache.get(d.qual)
    if cached is not None:
        ctx.tick(pos)
        return cached
    if d.arity != 0:
        raise ArityMismatch(f"'{d.name}' is generic and needs arguments", pos)
    out = _instantiate(ctx, d, None, [], EMPTY_ONTOLOGY, pos)
    ctx.cache[d.qual] = out
    return out


def _eval_expr(ctx: _Ctx, expr: ExprAst, env: FlatOntology, scope: _RuntimeScope) -> FlatOntology:
    try:
        if isinstance(expr, ThenExpr):
            out = env
            for t in expr.terms:
                out = _eval_expr(ctx, t, out, scope)
            return out
        if isinstance(expr, BlockExpr):
            delta = build_block(
                expr.frames, resolve=scope.bindings.apply, splice=scope.bindings.items_of
            )
            return union_flat(env, delta)
        if isinstance(expr, RefExpr):
            hit = scope.resolve(ctx.lib, expr.name)
            if hit is None:
                raise UnknownReference(f"unknown ontology or pattern '{expr.name}'", expr.pos)
            target, found = hit
            if target.arity != 0:
                raise ArityMismatch(
                    f"'{expr.name}' is generic: {target.arity} argument(s) required",
                    expr.pos,
                )
            if found is None:
                return union_flat(env, _closed_expansion(ctx, target, expr.pos))
            # locals share the enclosing parameters, so they expand in context
            return _instantiate(ctx, target, found, [], env, expr.pos, scope)
        if isinstance(expr, InstExpr):
            hit = scope.resolve(ctx.lib, expr.name)
            if hit is None:
                raise UnknownReference(f"unknown ontology or pattern '{expr.name}'", expr.pos)
            target, found = hit
            forms = _normalize_call(ctx, target, expr.args, scope, expr.pos)
            return _instantiate(ctx, target, found, forms, env, expr.pos, scope)
        raise TypeError(f"not an expression: {expr!r}")
    except GodpError as e:
        e.ensure_pos(getattr(expr, "pos", None))
        raise


def _normalize_call(
    ctx: _Ctx,
    target: PatternDef,
    args: Sequence[ArgAst],
    scope: _RuntimeScope,
    pos: SourcePos | None,
) -> list[_Form]:
    shape = target.clauses[0].params
    arity = len(shape)
    if len(args) == 1 and arity == 0 and isinstance(args[0].value, MissingArg):
        args = []  # G[] on a 0-parameter pattern
    if len(args) > arity:
        raise ArityMismatch(
            f"'{target.name}' takes {arity} argument(s), got {len(args)}", pos
        )
    forms: list[_Form] = []
    for i, p in enumerate(shape):
        if i < len(args):
            forms.append(_normalize_ast_arg(args[i], p, ctx.lib, scope, scope.bindings))
        else:
            if p.is_list:
                raise ArityMismatch(
                    f"missing argument for list parameter {i + 1} of '{target.name}'", pos
                )
            if not p.optional:
                raise MissingArgument(
                    f"missing argument for non-optional parameter {i + 1} of "
                    f"'{target.name}'",
                    pos,
                )
            forms.append(_EmptyForm(pos))
    return forms


def _select_clause(target: PatternDef, forms: Sequence[_Form], pos) -> Clause:
    for clause in target.clauses:
        if _clause_matches(clause, forms):
            return clause
    lengths = [len(f.items) for f in forms if isinstance(f, _ListForm)]
    raise NoMatch(
        f"no template clause of '{target.name}' matches list argument length(s) "
        f"{lengths}; the instantiation is incorrect",
        pos,
    )


def _instantiate(
    ctx: _Ctx,
    target: PatternDef,
    found_scope: _RuntimeScope | None,
    forms: Sequence[_Form],
    env: FlatOntology,
    pos: SourcePos | None,
    caller_scope: _RuntimeScope = _ROOT_SCOPE,
) -> FlatOntology:
    ctx.tick(pos)
    clause = _select_clause(target, forms, pos)
    base = found_scope.bindings if found_scope is not None else EMPTY_BINDINGS
    sigma = base.child()
    imports_ont = _imports_ontology(ctx, target, pos)
    avail = union_flat(env, imports_ont)
    result = avail
    dead: list[str] = []
    fit_pairs: list[tuple[Symbol, Symbol]] = []

    for pspec, form in zip(clause.params, forms):
        try:
            if pspec.is_list:
                items = form.items if isinstance(form, _ListForm) else ()
                declared = _declare_items(ctx, pspec.shape, items, avail, form.pos)
                avail = union_flat(avail, declared)
                result = union_flat(result, declared)
                _bind_template(pspec.shape, items, sigma)
                tmpl: ListTemplate = pspec.shape
                for head in (tmpl.head, tmpl.head2):
                    if head is not None:
                        fit_pairs.append(
                            (Symbol(NameTerm(head), tmpl.kind),
                             Symbol(sigma.name_map[NameTerm(head)], tmpl.kind))
                        )
            elif isinstance(form, _EmptyForm):
                if not pspec.optional:
                    raise MissingArgument(
                        f"missing argument for non-optional parameter {pspec.index + 1} "
                        f"of '{target.name}'",
                        form.pos,
                    )
                for s in pspec.shape.new_symbols:
                    ph = ctx.fresh_placeholder(s.name)
                    _bind_checked(sigma, s.name, ph, form.pos)
                    dead.append(ph.base)
                    declared = make_ontology([Symbol(ph, s.kind)], [])
                    avail = union_flat(avail, declared)
                    result = union_flat(result, declared)
            elif isinstance(form, _LocalForm):
                added = _fit_local(ctx, target, pspec, form, sigma, avail, fit_pairs)
                avail = union_flat(avail, added)
                result = union_flat(result, added)
                _check_param_constraints(ctx, pspec, sigma, avail, form.pos)
            elif isinstance(form, _OntForm):
                arg_ont = _eval_arg_ontology(ctx, form, env, caller_scope, pos)
                _fit_ontology(ctx, target, pspec, form, arg_ont, env, sigma, fit_pairs)
                avail = union_flat(avail, arg_ont)
                result = union_flat(result, arg_ont)
                _check_param_constraints(ctx, pspec, sigma, avail, form.pos)
            else:
                raise UnsupportedArgument(
                    f"argument form {type(form).__name__} does not fit parameter "
                    f"{pspec.index + 1} of '{target.name}'",
                    getattr(form, "pos", pos),
                )
        except GodpError as e:
            e.ensure_pos(getattr(form, "pos", None) or pos)
            raise

    ctx.fitting_trace.append((target.qual, FittingMorphism.of(dict(fit_pairs))))
    body_scope = _RuntimeScope(target, sigma, found_scope)
    out = _eval_expr(ctx, clause.body, result, body_scope)
    if dead:
        out = _elide_placeholders(out, frozenset(dead))
    return out


def _declare_items(
    ctx: _Ctx,
    tmpl: ListTemplate,
    items: tuple[NameTerm, ...],
    avail: FlatOntology,
    pos,
) -> FlatOntology:
    if tmpl.kind is None and items:
        return EMPTY_ONTOLOGY
    symbols = []
    for item in items:
        if ctx.is_placeholder(item):
            continue
        found = avail.kind_of(item)
        if found is None:
            symbols.append(Symbol(item, tmpl.kind))
        elif found is not tmpl.kind:
            raise KindMismatch(
                f"list item '{item.render()}' has kind {found.value}, expected "
                f"{tmpl.kind.value}",
                pos,
            )
    return make_ontology(symbols, [])


def _bind_checked(sigma: Bindings, src: NameTerm, dst: NameTerm, pos) -> None:
    prior = sigma.name_map.get(src)
    if prior is not None and prior != dst:
        raise IncompatibleFittings(
            f"'{src.render()}' is mapped both to '{prior.render()}' and to "
            f"'{dst.render()}'",
            pos,
        )
    sigma.name_map[src] = dst


def _fit_local(
    ctx: _Ctx,
    target: PatternDef,
    pspec: ParamSpec,
    form: _LocalForm,
    sigma: Bindings,
    avail: FlatOntology,
    fit_pairs: list,
) -> FlatOntology:
    shape: PlainShape = pspec.shape
    if len(shape.new_symbols) != 1:
        raise UnsupportedArgument(
            f"parameter {pspec.index + 1} of '{target.name}' defines "
            f"{len(shape.new_symbols)} new symbols; a bare symbol argument fits "
            f"only single-symbol parameters",
            form.pos,
        )
    n = shape.new_symbols[0]
    term = form.term
    for src, dst in form.fits:
        if src == n.name:
            if dst != term:
                raise IncompatibleFittings(
                    f"'{src.render()}' is mapped both to '{term.render()}' and to "
                    f"'{dst.render()}'",
                    form.pos,
                )
        else:
            _bind_checked(sigma, src, dst, form.pos)
    added = EMPTY_ONTOLOGY
    if ctx.is_placeholder(term):
        added = make_ontology([Symbol(term, n.kind)], [])
    else:
        found = avail.kind_of(term)
        if found is None:
            # not visible in the local environment: declared fresh
            added = make_ontology([Symbol(term, n.kind)], [])
        elif found is not n.kind:
            raise KindMismatch(
                f"'{term.render()}' has kind {found.value}, parameter "
                f"'{n.name.render()}' needs {n.kind.value}",
                form.pos,
            )
    _bind_checked(sigma, n.name, term, form.pos)
    fit_pairs.append((n, Symbol(term, n.kind)))
    return added


def _eval_arg_ontology(
    ctx: _Ctx,
    form: _OntForm,
    env: FlatOntology,
    caller_scope: _RuntimeScope,
    pos,
) -> FlatOntology:
    if form.ont is not None:
        return union_flat(env, form.ont)
    if form.named is not None:
        d = ctx.lib.lookup(form.named)
        if d is None:
            raise UnknownReference(f"unknown ontology '{form.named}'", form.pos)
        return union_flat(env, _closed_expansion(ctx, d, form.pos))
    # local-environment injection: the argument is evaluated on top of env,
    # in the caller's scope (its bindings substitute enclosing parameters)
    return _eval_expr(ctx, form.expr, env, caller_scope)


def _fit_ontology(
    ctx: _Ctx,
    target: PatternDef,
    pspec: ParamSpec,
    form: _OntForm,
    arg_ont: FlatOntology,
    env: FlatOntology,
    sigma: Bindings,
    fit_pairs: list,
) -> None:
    shape: PlainShape = pspec.shape
    explicit = dict(form.fits)
    consumed: set[NameTerm] = set()
    pool = [s for s in arg_ont.sorted_signature() if s not in env.signature]
    for n in shape.new_symbols:
        if n.name in explicit:
            image = explicit[n.name]
            consumed.add(n.name)
            k = arg_ont.kind_of(image)
            if k is None:
                raise NoCandidate(
                    f"fit target '{image.render()}' is not a symbol of the argument",
                    form.pos,
                )
            if k is not n.kind:
                raise KindMismatch(
                    f"fit target '{image.render()}' has kind {k.value}, parameter "
                    f"'{n.name.render()}' needs {n.kind.value}",
                    form.pos,
                )
        else:
            candidates = [s for s in pool if s.kind is n.kind]
            if not candidates:
                raise NoCandidate(
                    f"no {n.kind.value} symbol in the argument to fit parameter "
                    f"'{n.name.render()}'",
                    form.pos,
                )
            if len(candidates) > 1:
                raise AmbiguousFitting(
                    f"parameter '{n.name.render()}' has {len(candidates)} "
                    f"{n.kind.value} candidates "
                    f"({', '.join(c.name.render() for c in candidates)}); "
                    f"give an explicit fit map",
                    form.pos,
                )
            image = candidates[0].name
        _bind_checked(sigma, n.name, image, form.pos)
        fit_pairs.append((n, Symbol(image, n.kind)))
    for src, dst in form.fits:
        if src in consumed:
            continue
        _bind_checked(sigma, src, dst, form.pos)


def _check_param_constraints(
    ctx: _Ctx, pspec: ParamSpec, sigma: Bindings, avail: FlatOntology, pos
) -> None:
    shape: PlainShape = pspec.shape
    for ax in sorted(shape.delta.axioms, key=Axiom.sort_key):
        translated = ax.rename(sigma.apply).canonical()
        if any(ctx.is_placeholder(n) for n, _ in translated.refs()):
            continue  # the elided branch contributes nothing to check
        if translated not in avail.axioms:
            raise UnmetConstraint(
                f"argument does not satisfy required axiom: "
                f"{' '.join(translated.dump_fields())}",
                pos,
            )
        ctx.constraint_trace.append((translated, avail.axioms))


# ---------------------------------------------------------------------------
# Public entry points
# ---------------------------------------------------------------------------

def expand(
    lib: Library,
    inst: Instantiation,
    depth: int = DEFAULT_DEPTH,
    _ctx_out: list | None = None,
) -> FlatOntology:
    """Expand one instantiation against its local environment."""
    ctx = _Ctx(lib, depth)
    if _ctx_out is not None:
        _ctx_out.append(ctx)
    target = lib.require(inst.pattern)
    forms = [_public_to_form(a, None) for a in inst.args]
    shape = target.clauses[0].params
    if len(forms) > len(shape):
        raise ArityMismatch(
            f"'{target.name}' takes {len(shape)} argument(s), got {len(forms)}"
        )
    while len(forms) < len(shape):
        p = shape[len(forms)]
        if p.is_list or not p.optional:
            raise ArityMismatch(
                f"missing argument for parameter {len(forms) + 1} of '{target.name}'"
            )
        forms.append(_EmptyForm(None))
    return _instantiate(ctx, target, None, forms, inst.local_env, None)


def expand_named(
    lib: Library,
    name: str,
    depth: int = DEFAULT_DEPTH,
    _ctx_out: list | None = None,
) -> FlatOntology:
    """Expand a 0-parameter definition to its flat ontology."""
    ctx = _Ctx(lib, depth)
    if _ctx_out is not None:
        _ctx_out.append(ctx)
    target = lib.require(name)
    return _closed_expansion(ctx, target, target.pos)
