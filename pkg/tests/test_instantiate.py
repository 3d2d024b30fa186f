from __future__ import annotations

import pytest

from godp import (
    AnonymousArg,
    Bindings,
    EmptyOptArg,
    Instantiation,
    ListArg,
    LocalSymbolArg,
    check_compatibility,
    check_constraints,
    derive_fitting,
    elide_optional,
    expand,
    expand_named,
    match_template,
    substitute_name,
    union_flat,
)
from godp.core import (
    EMPTY_ONTOLOGY,
    Domain,
    FittingMorphism,
    Range,
    Symbol,
    SymbolKind,
    Transitive,
    make_ontology,
    name,
)
from godp.diagnostics import (
    AmbiguousFitting,
    DepthExceeded,
    IncompatibleFittings,
    KindMismatch,
    MissingArgument,
    NoCandidate,
    NoMatch,
    UnmetConstraint,
    UnsupportedArgument,
)

from conftest import CORPUS, lib_of

OP = SymbolKind.OBJECT_PROPERTY
CLS = SymbolKind.CLASS
IND = SymbolKind.INDIVIDUAL


def sym(n, k):
    return Symbol(name(n) if isinstance(n, str) else n, k)


# -- derive_fitting ------------------------------------------------------------

def test_fit_local_symbol_single_new_symbol(corpus_lib):
    fourth = corpus_lib.defs["SubProp"].clauses[0].params[3]
    env = make_ontology(
        [sym("isAncestorOf", OP), sym("Person", CLS)],
        [Domain(name("isAncestorOf"), name("Person"))],
    )
    m = derive_fitting(fourth, LocalSymbolArg(name("isAncestorOf")), env)
    assert m.as_dict() == {sym("p", OP): sym("isAncestorOf", OP)}


def test_fit_anonymous_single_class(corpus_lib):
    second = corpus_lib.defs["TransitiveRelation"].clauses[0].params[1]
    arg = AnonymousArg(make_ontology([sym("Person", CLS)], []))
    m = derive_fitting(second, arg, EMPTY_ONTOLOGY)
    assert m.as_dict() == {sym("C", CLS): sym("Person", CLS)}


def test_fit_ambiguous_two_candidates(corpus_lib):
    first = corpus_lib.defs["TransitiveRelation"].clauses[0].params[0]
    arg = AnonymousArg(make_ontology([sym("q1", OP), sym("q2", OP)], []))
    with pytest.raises(AmbiguousFitting):
        derive_fitting(first, arg, EMPTY_ONTOLOGY)


def test_fit_named_ontology_ambiguous():
    from godp import NamedOntologyArg

    lib = lib_of(
        "ontology TwoProps = { ObjectProperty: q1  ObjectProperty: q2 }\n"
        "ontology NeedsOneProp [ObjectProperty: r] = { ObjectProperty: r }\n"
    )
    first = lib.defs["NeedsOneProp"].clauses[0].params[0]
    with pytest.raises(AmbiguousFitting):
        derive_fitting(first, NamedOntologyArg("TwoProps"), EMPTY_ONTOLOGY, lib=lib)
    m = derive_fitting(
        first, NamedOntologyArg("TwoProps"), EMPTY_ONTOLOGY,
        explicit=[(name("r"), name("q1"))], lib=lib,
    )
    assert m.as_dict() == {sym("r", OP): sym("q1", OP)}


def test_fit_explicit_map_resolves_ambiguity(corpus_lib):
    first = corpus_lib.defs["TransitiveRelation"].clauses[0].params[0]
    arg = AnonymousArg(make_ontology([sym("q1", OP), sym("q2", OP)], []))
    m = derive_fitting(first, arg, EMPTY_ONTOLOGY, explicit=[(name("r"), name("q2"))])
    assert m.as_dict() == {sym("r", OP): sym("q2", OP)}


def test_fit_no_candidate(corpus_lib):
    first = corpus_lib.defs["TransitiveRelation"].clauses[0].params[0]
    arg = AnonymousArg(make_ontology([sym("Person", CLS)], []))
    with pytest.raises(NoCandidate):
        derive_fitting(first, arg, EMPTY_ONTOLOGY)


def test_fit_kind_mismatch(corpus_lib):
    first = corpus_lib.defs["TransitiveRelation"].clauses[0].params[0]
    env = make_ontology([sym("Person", CLS)], [])
    with pytest.raises(KindMismatch):
        derive_fitting(first, LocalSymbolArg(name("Person")), env)


def test_fit_empty_against_non_optional(corpus_lib):
    first = corpus_lib.defs["TransitiveRelation"].clauses[0].params[0]
    with pytest.raises(MissingArgument):
        derive_fitting(first, EmptyOptArg(), EMPTY_ONTOLOGY)


# -- check_compatibility ----------------------------------------------------------

def test_compatibility_shared_symbol_same_image():
    d = sym("D", CLS)
    person = sym("Person", CLS)
    m1 = FittingMorphism.of({d: person, sym("r", OP): sym("owns", OP)})
    m2 = FittingMorphism.of({d: person, sym("s", OP): sym("ownedBy", OP)})
    check_compatibility([m1, m2])


def test_compatibility_single_morphism_vacuous():
    check_compatibility([FittingMorphism.of({sym("D", CLS): sym("Person", CLS)})])
    check_compatibility([])


def test_compatibility_conflict():
    d = sym("D", CLS)
    m1 = FittingMorphism.of({d: sym("Person", CLS)})
    m2 = FittingMorphism.of({d: sym("Pizza", CLS)})
    with pytest.raises(IncompatibleFittings):
        check_compatibility([m1, m2])


def test_remention_of_old_symbol_with_agreeing_image_is_fine():
    lib = lib_of(
        "ontology Pair [Class: D; ObjectProperty: r Domain: D] =\n"
        "  { ObjectProperty: r Characteristics: Reflexive }\n"
        "ontology Use =\n"
        "  { Class: Person  ObjectProperty: owns Domain: Person }\n"
        "  then Pair[Person; owns fit D |-> Person]\n"
    )
    out = expand_named(lib, "Use")
    from godp.core import Reflexive

    assert Reflexive(name("owns")) in out.axioms


# -- check_constraints -------------------------------------------------------------

def _subprop_constraints():
    return [Domain(name("p"), name("D")), Range(name("p"), name("R"))]


def _subprop_fitting():
    return FittingMorphism.of({
        sym("p", OP): sym("isAncestorOf", OP),
        sym("D", CLS): sym("Person", CLS),
        sym("R", CLS): sym("Person", CLS),
    })


def test_constraints_satisfied():
    available = make_ontology(
        [],
        [
            Domain(name("isAncestorOf"), name("Person")),
            Range(name("isAncestorOf"), name("Person")),
            Transitive(name("isAncestorOf")),
        ],
    )
    check_constraints(_subprop_constraints(), _subprop_fitting(), available)


def test_constraints_empty_set_ok():
    check_constraints([], _subprop_fitting(), EMPTY_ONTOLOGY)


def test_constraints_missing_range():
    available = make_ontology([], [Domain(name("isAncestorOf"), name("Person"))])
    with pytest.raises(UnmetConstraint) as exc:
        check_constraints(_subprop_constraints(), _subprop_fitting(), available)
    assert "Range isAncestorOf Person" in exc.value.message


# -- elide_optional ---------------------------------------------------------------

def test_elide_removes_order_axioms():
    gt = name("greater", "Val")
    o = make_ontology(
        [],
        [Transitive(gt), Domain(gt, name("Val")), Range(gt, name("Val")),
         Domain(name("keep"), name("Val"))],
    )
    out = elide_optional(o, {Symbol(gt, OP)})
    assert out.axioms == frozenset({Domain(name("keep"), name("Val"))})
    assert Symbol(gt, OP) not in out.signature


def test_elide_empty_dead_set_is_identity():
    o = make_ontology([], [Transitive(name("p"))])
    assert elide_optional(o, set()) == o


def test_elide_whole_signature_gives_empty():
    o = make_ontology([], [Transitive(name("p"))])
    assert elide_optional(o, o.signature) == EMPTY_ONTOLOGY


# -- match_template ----------------------------------------------------------------

def _items(*names_):
    return tuple(name(n) for n in names_)


def test_match_template_recursive_then_final(corpus_lib):
    clauses = corpus_lib.defs["GradedRelsSub"].locals["AtLeastStep"].clauses
    # two-element recursive case first, one-element final case second: on a
    # 4-item list the recursion hits the first clause three times, then the final
    picks = []
    items = _items("g0", "g1", "g2", "g3")
    while items:
        clause, bindings = match_template(clauses, ListArg(items))
        picks.append(clauses.index(clause))
        if clauses.index(clause) == 0:
            assert bindings.name_map[name("x")] == items[0]
            assert bindings.name_map[name("y")] == items[1]
            items = items[1:]
        else:
            break
    assert picks == [0, 0, 0, 1]


def test_match_template_empty_clause(corpus_lib):
    clauses = corpus_lib.defs["GradedRels"].clauses
    clause, bindings = match_template(clauses, ListArg(()))
    assert clause is clauses[1]
    assert bindings.name_map == {} and bindings.list_map == {}


def test_match_template_no_match(corpus_lib):
    clauses = corpus_lib.defs["ValSet"].clauses
    with pytest.raises(NoMatch):
        match_template(clauses, ListArg(()))


# -- substitute_name ----------------------------------------------------------------

def test_substitute_parameterized_name():
    b = Bindings({name("Val"): name("Significance")}, {})
    assert substitute_name(name("greater", "Val"), b) == name("greater", "Significance")


def test_substitute_plain_name_unbound():
    assert substitute_name(name("Person"), Bindings({}, {})) == name("Person")


def test_substitute_nested():
    b = Bindings({name("X"): name("a", "b"), name("Y"): name("c")}, {})
    out = substitute_name(name("p", name("X"), name("Y")), b)
    assert out == name("p", name("a", "b"), name("c"))


def test_substitute_bound_base_prefixes_args():
    b = Bindings({name("p"): name("hasIngredient")}, {})
    assert substitute_name(name("p", "x"), b) == name("hasIngredient", "x")


# -- expand -------------------------------------------------------------------------

def test_expand_transitive_relation(corpus_lib):
    env = make_ontology([sym("Person", CLS)], [])
    inst = Instantiation(
        "TransitiveRelation",
        (LocalSymbolArg(name("isAncestorOf")), LocalSymbolArg(name("Person"))),
        local_env=env,
    )
    out = expand(corpus_lib, inst)
    a = name("isAncestorOf")
    assert Transitive(a) in out.axioms
    assert Domain(a, name("Person")) in out.axioms
    assert Range(a, name("Person")) in out.axioms
    assert sym("isAncestorOf", OP) in out.signature


def test_expand_empty_list_leaves_local_env_unchanged():
    lib = lib_of(
        "ontology G [Class: C :: Cs] = { Class: C }\n"
        "ontology G [empty] = { }\n"
    )
    env = make_ontology([sym("Base", CLS)], [])
    out = expand(lib, Instantiation("G", (ListArg(()),), local_env=env))
    assert out == env


def test_expand_graded_rels_four_values(corpus_lib):
    out = expand_named(corpus_lib, "GradedRels_Significance")
    graded = sorted(
        s.name.render() for s in out.signature
        if s.kind is OP and s.name.base == "hasIngredient" and s.name.args
    )
    assert graded == [
        "hasIngredient[0Insignificant]",
        "hasIngredient[1Subordinate]",
        "hasIngredient[2Essential]",
        "hasIngredient[3Dominant]",
    ]
    for g in graded:
        base, grade = g.split("[")
        term = name(base, grade.rstrip("]"))
        assert Domain(term, name("Recipe")) in out.axioms
        assert Range(term, name("FoodStuff")) in out.axioms


def test_expand_deterministic(corpus_lib):
    a = expand_named(corpus_lib, "GradedRelsSub_Significance")
    b = expand_named(corpus_lib, "GradedRelsSub_Significance")
    assert a == b


def test_expand_snst_idempotent_on_corpus(corpus_lib):
    for target in corpus_lib.zero_param_names():
        o = expand_named(corpus_lib, target)
        assert union_flat(o, o) == o


def test_expand_depth_budget(corpus_lib):
    with pytest.raises(DepthExceeded):
        expand_named(corpus_lib, "GradedRelsSub_Significance", depth=3)


def test_missing_non_optional_argument(corpus_lib):
    with pytest.raises((MissingArgument, Exception)) as exc:
        expand(corpus_lib, Instantiation("TransitiveRelation", (LocalSymbolArg(name("r")),)))
    assert exc.type.__name__ in ("ArityMismatch", "MissingArgument")


def test_missing_middle_argument_elides_optional():
    lib = lib_of(
        "ontology H [Class: A; ? Class: B; Class: C] =\n"
        "  { ObjectProperty: rel[B] Domain: A Range: C }\n"
        "ontology Use = H[X; ; Z]\n"
    )
    out = expand_named(lib, "Use")
    assert all("rel" != s.name.base for s in out.signature)
    assert {s.name.base for s in out.signature} == {"X", "Z"}


def test_optional_argument_provided():
    lib = lib_of(
        "ontology H [Class: A; ? Class: B; Class: C] =\n"
        "  { ObjectProperty: rel[B] Domain: A Range: C }\n"
        "ontology Use = H[X; Y; Z]\n"
    )
    out = expand_named(lib, "Use")
    assert Symbol(name("rel", "Y"), OP) in out.signature


def test_fresh_local_symbol_with_constraints_fails():
    # a constrained parameter cannot be satisfied by an invisible fresh symbol
    lib = lib_of(
        "ontology N [Class: D; ObjectProperty: r Domain: D] = { Class: D }\n"
        "ontology Use = { Class: Person } then N[Person; ghost]\n"
    )
    with pytest.raises(UnmetConstraint):
        expand_named(lib, "Use")


def test_constraint_trace_recorded(corpus_lib):
    holder = []
    out = expand_named(corpus_lib, "ValSetWithOrder_Significance", _ctx_out=holder)
    ctx = holder[0]
    assert ctx.constraint_trace, "constrained instantiations should be recorded"
    for translated, env_axioms in ctx.constraint_trace:
        assert translated in env_axioms
        assert env_axioms <= out.axioms


def test_at_least_step_call_schedule(corpus_lib):
    # on the 4-grade list the recursive clause (binding two heads) fires three
    # times and the one-element final clause (binding one head) once
    holder = []
    expand_named(corpus_lib, "GradedRelsSub_Significance", _ctx_out=holder)
    als_calls = [
        len(m.pairs) for qual, m in holder[0].fitting_trace
        if qual == "GradedRelsSub::AtLeastStep"
    ]
    assert als_calls == [2, 2, 2, 1]
    link_calls = [
        qual for qual, _ in holder[0].fitting_trace
        if qual == "GradedRelsSub::AtLeastLink"
    ]
    assert len(link_calls) == 3


def test_fitting_trace_compatible(corpus_lib):
    for target in corpus_lib.zero_param_names():
        holder = []
        expand_named(corpus_lib, target, _ctx_out=holder)
        for _, morphism in holder[0].fitting_trace:
            check_compatibility([morphism])


def test_list_argument_against_plain_parameter(corpus_lib):
    lib = lib_of(
        "ontology P [Class: C] = { Class: C }\n"
        "ontology Use = P[a, b]\n"
    )
    with pytest.raises(UnsupportedArgument):
        expand_named(lib, "Use")


def test_instantiation_as_argument_matches_local_symbol_form(corpus_lib):
    # the long form: the fourth argument is itself an instantiation, fitted
    # explicitly; it must agree with the shorthand used by PersonRels
    src = "".join(
        (CORPUS / part).read_text(encoding="utf-8")
        for part in ("patterns.gdp", "person_rels.gdp")
    ) + (
        "\nontology PersonRelsLong given Agents =\n"
        "  SubProp[isParentOf; Person; Person;\n"
        "          TransitiveRelation[isAncestorOf; Person] fit p |-> isAncestorOf]\n"
    )
    lib = lib_of(src)
    assert expand_named(lib, "PersonRelsLong") == expand_named(lib, "PersonRels")


def test_given_symbols_visible_in_parameters():
    lib = lib_of(
        "ontology Base = { Class: Person }\n"
        "ontology G [ObjectProperty: r Domain: Person] given Base =\n"
        "  { ObjectProperty: r Characteristics: Transitive }\n"
        "ontology Use = { ObjectProperty: owns Domain: Person } then G[owns]\n"
    )
    g = lib.defs["G"]
    assert [s.name.base for s in g.clauses[0].params[0].shape.new_symbols] == ["r"]
    out = expand_named(lib, "Use")
    assert Transitive(name("owns")) in out.axioms
    assert sym("Person", CLS) in out.signature


def test_anonymous_argument_inside_generic_body_is_substituted():
    # the inline-frames argument mentions the enclosing parameter C; its
    # evaluation must happen under the caller's bindings
    lib = lib_of(
        "ontology T [ObjectProperty: r; Class: C] =\n"
        "  { ObjectProperty: r Domain: C Range: C Characteristics: Transitive }\n"
        "ontology Wrap [Class: C] =\n"
        "  T[{ ObjectProperty: rel[C] }; C]\n"
        "ontology Use = Wrap[Thing]\n"
    )
    out = expand_named(lib, "Use")
    assert Symbol(name("rel", "Thing"), OP) in out.signature
    assert Transitive(name("rel", "Thing")) in out.axioms
    assert all(s.name != name("rel", "C") for s in out.signature)


def test_local_zero_param_helper_sees_enclosing_bindings():
    lib = lib_of(
        "ontology G [Class: Val] =\n"
        "  let ontology Helper = { Class: marked[Val] } in\n"
        "  Helper then { Class: Val }\n"
        "ontology Use = G[Thing]\n"
    )
    out = expand_named(lib, "Use")
    assert sym(name("marked", "Thing"), CLS) in out.signature
