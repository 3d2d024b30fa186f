from __future__ import annotations

import pytest

from godp import build_library, param_environments, resolve_local_subpatterns
from godp.core import Domain, Range, Symbol, SymbolKind, name
from godp.diagnostics import (
    DuplicateDefinition,
    IllegalCycle,
    UnknownReference,
    UnsupportedArgument,
)
from godp.elaborate import ListTemplate, PlainShape
from godp.syntax import LibraryAst

from conftest import lib_of

OP = SymbolKind.OBJECT_PROPERTY
CLS = SymbolKind.CLASS
IND = SymbolKind.INDIVIDUAL


def test_build_library_fig1_patterns(corpus_lib):
    for pattern in ("ReflexiveRelation", "TransitiveRelation", "InverseRelation", "SubProp"):
        assert pattern in corpus_lib.defs
    sub = corpus_lib.defs["SubProp"]
    assert sub.arity == 4
    fourth = sub.clauses[0].params[3]
    assert isinstance(fourth.shape, PlainShape)
    assert fourth.shape.new_symbols == (Symbol(name("p"), OP),)
    assert Domain(name("p"), name("D")) in fourth.shape.delta.axioms
    assert Range(name("p"), name("R")) in fourth.shape.delta.axioms


def test_build_library_empty():
    lib = build_library(LibraryAst(()))
    assert lib.defs == {}


def test_self_reference_without_list_is_illegal():
    with pytest.raises(IllegalCycle):
        lib_of("ontology A = { Class: C } then A")


def test_self_call_reconsing_same_list_is_illegal():
    with pytest.raises(IllegalCycle):
        lib_of("ontology B [Class: X :: Xs] = B[X :: Xs]")


def test_tail_recursion_is_legal():
    lib = lib_of(
        "ontology B [Class: X :: Xs] = { Class: X } then B[Xs]\n"
        "ontology B [empty] = { }\n"
    )
    assert lib.defs["B"].clauses[1].params[0].shape == ListTemplate(None, None, None, None)


def test_mutual_cycle_without_shrink_is_illegal():
    src = (
        "ontology A [Class: X :: Xs] = B[X :: Xs]\n"
        "ontology B [Class: X :: Xs] = A[X :: Xs]\n"
    )
    with pytest.raises(IllegalCycle):
        lib_of(src)


def test_param_environments_subprop(corpus_lib):
    envs = param_environments(corpus_lib.defs["SubProp"])
    assert len(envs) == 5
    visible_to_fourth = {s.name.base for s in envs[3].signature}
    assert visible_to_fourth == {"q", "D", "R"}
    for earlier, later in zip(envs, envs[1:]):
        assert earlier.signature <= later.signature


def test_param_environments_zero_param_def(corpus_lib):
    envs = param_environments(corpus_lib.defs["Agents"])
    assert len(envs) == 1 and envs[0].is_empty()
    with_import = param_environments(corpus_lib.defs["PersonRels"])
    assert {s.name.base for s in with_import[0].signature} == {"Person"}


def test_param_environments_valset_optional_sees_val_and_head(corpus_lib):
    envs = param_environments(corpus_lib.defs["ValSet"])
    env_for_optional = envs[2]
    assert Symbol(name("Val"), CLS) in env_for_optional.signature
    assert Symbol(name("v"), IND) in env_for_optional.signature


def test_new_symbols_equal_env_difference(corpus_lib):
    for d in corpus_lib.defs.values():
        for clause in d.clauses:
            for p in clause.params:
                if isinstance(p.shape, PlainShape):
                    diff = clause.envs[p.index + 1].signature - clause.envs[p.index].signature
                    assert frozenset(p.shape.new_symbols) == diff


def test_locals_share_enclosing_parameters(corpus_lib):
    valset = resolve_local_subpatterns(corpus_lib, corpus_lib.defs["ValSet"])
    step = valset.locals["OrderStep"]
    prefix = step.clauses[0].envs[0].signature
    assert Symbol(name("Val"), CLS) in prefix
    assert Symbol(name("greater", "Val"), OP) in prefix


def test_no_locals_is_unchanged(corpus_lib):
    sub = corpus_lib.defs["SubProp"]
    assert resolve_local_subpatterns(corpus_lib, sub) is sub
    assert sub.locals == {}


def test_graded_rels_sub_locals_registered(corpus_lib):
    d = corpus_lib.defs["GradedRelsSub"]
    assert "AtLeastStep" in d.locals
    assert "AtMostInitial" in d.locals
    als = d.locals["AtLeastStep"]
    assert len(als.clauses) == 2
    assert Symbol(name("p"), OP) in als.clauses[0].envs[0].signature


def test_locals_of_distinct_patterns_do_not_collide(corpus_lib):
    step_a = corpus_lib.defs["GradedRels"].locals["Step"]
    assert step_a.qual == "GradedRels::Step"
    assert "Step" not in corpus_lib.defs


def test_duplicate_zero_param_definition():
    with pytest.raises(DuplicateDefinition):
        lib_of("ontology A = { Class: C }\nontology A = { Class: D }\n")


def test_clause_shape_disagreement():
    src = (
        "ontology G [Class: C :: Cs] = { Class: C }\n"
        "ontology G [Class: X] = { Class: X }\n"
    )
    with pytest.raises(DuplicateDefinition):
        lib_of(src)


def test_unknown_reference_in_body():
    with pytest.raises(UnknownReference):
        lib_of("ontology A = Nowhere then { Class: C }")


def test_given_must_be_zero_parameter():
    src = (
        "ontology G [Class: C] = { Class: C }\n"
        "ontology A given G = { Class: D }\n"
    )
    with pytest.raises(UnsupportedArgument):
        lib_of(src)


def test_given_unknown_import():
    with pytest.raises(UnknownReference):
        lib_of("ontology A given Nowhere = { Class: D }")
