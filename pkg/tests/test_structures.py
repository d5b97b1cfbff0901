import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from closurelab import (
    Element,
    FiniteStructure,
    PartitionedFormula,
    RuleStructure,
    Signature,
    SortError,
    StageBudget,
    StructureRegistry,
    Truth,
    brute_force_count,
    evaluate,
    parse_formula,
    parse_structure,
    truncate,
)
from closurelab.structures import format_element, parse_element
from closurelab.syntax import Atom, Exists, Forall, Var, free_vars
from closurelab.textio import StructureFormatError, format_structure

from helpers import GRAPH_SIG, digraph, nested_loop_solutions, random_formula, random_structure, textbook_sat

NAT_SIG = Signature.build(["N"], {"S": ["N", "N"]})


def nat() -> RuleStructure:
    def succ_support(b):
        y, z = b
        if y is not None:
            return [(y, y + 1)] if z in (None, y + 1) else []
        if z is not None:
            return [(z - 1, z)] if z > 0 else []
        return None

    return RuleStructure(NAT_SIG, lambda j, k: k >= 0, {"S": lambda a: a[1] == a[0] + 1}, {"S": succ_support})


def X(k):
    return Element(0, k)


def test_eval_table_lookup_and_exhaustive_search():
    g = digraph(2, [(0, 1)])
    assert evaluate(g, Atom("E", ("x", "y")), {"x": X(0), "y": X(1)}) is Truth.TRUE
    f = Exists((Var("z", 0),), Atom("E", ("y", "z")))
    assert evaluate(g, f, {"y": X(1)}) is Truth.FALSE
    assert evaluate(g, f, {"y": X(0)}) is Truth.TRUE


def test_eval_universal_over_infinite_sort_is_unknown():
    f = Forall((Var("y", 0),), Exists((Var("z", 0),), Atom("S", ("y", "z"))))
    assert evaluate(nat(), f, {}, StageBudget(domain_horizon=10)) is Truth.UNKNOWN


def test_eval_existential_witnessed_below_horizon_is_true():
    f = Exists((Var("z", 0),), Atom("S", ("y", "z")))
    assert evaluate(nat(), f, {"y": Element(0, 3)}, StageBudget(domain_horizon=10)) is Truth.TRUE
    # the witness 10 is not below the horizon
    assert evaluate(nat(), f, {"y": Element(0, 9)}, StageBudget(domain_horizon=10)) is Truth.UNKNOWN


def test_eval_rejects_bad_assignments():
    g = digraph(2, [(0, 1)])
    with pytest.raises(SortError):
        evaluate(g, Atom("E", ("x", "y")), {"x": X(0)})
    with pytest.raises(SortError):
        evaluate(g, Atom("E", ("x", "y")), {"x": X(0), "y": X(5)})
    with pytest.raises(SortError):
        evaluate(g, Atom("E", ("x", "y")), {"x": X(0), "y": 1})


def test_truth_is_not_boolean():
    with pytest.raises(TypeError):
        bool(Truth.TRUE)


def test_truncate_copy_of_nat():
    t = truncate(nat(), 4)
    assert t.universe[0] == (0, 1, 2, 3)
    assert t.tables["S"] == {(0, 1), (1, 2), (2, 3)}


def test_truncate_rejects_finite_and_zero_horizon():
    with pytest.raises(ValueError):
        truncate(digraph(2, []), 3)
    with pytest.raises(ValueError):
        truncate(nat(), 0)


def test_truncate_is_stable():
    a = truncate(nat(), 7)
    b = truncate(nat(), 7)
    assert a.same_tables(b)


def test_brute_force_counts():
    three = FiniteStructure(GRAPH_SIG, {0: range(3)}, {})
    pf = parse_formula("phi(x ; y) := y = y & x = x", GRAPH_SIG)
    assert brute_force_count(three, pf, (X(0),)) == 3
    g = digraph(3, [(0, 1), (0, 2)])
    assert brute_force_count(g, parse_formula("E(x;y)", g.sig), (X(0),)) == 2
    with pytest.raises(SortError):
        brute_force_count(g, parse_formula("E(x;y)", g.sig), ())


def test_brute_force_matches_nested_loop_recount():
    rng = random.Random(11)
    for _ in range(100):
        s = random_structure(rng, 4)
        f = random_formula(rng, ["x", "y"], 3)
        fv = [v for v in ("x", "y") if v in set(free_vars(f))]
        if not fv:
            continue
        pf = PartitionedFormula.make(f, [Var(fv[0], 0)], [Var(v, 0) for v in fv[1:]], GRAPH_SIG)
        for k in s.universe[0]:
            assert brute_force_count(s, pf, (X(k),)) == len(nested_loop_solutions(s, pf, (X(k),)))


def test_eval_agrees_with_textbook_oracle():
    rng = random.Random(5)
    for _ in range(120):
        s = random_structure(rng, 4)
        f = random_formula(rng, ["x", "y"], 4, max_quant=3)
        fv = free_vars(f)
        for combo in itertools.product(s.universe[0], repeat=len(fv)):
            env = dict(zip(fv, combo))
            got = evaluate(s, f, {v: X(k) for v, k in env.items()})
            assert got is Truth.of(textbook_sat(s, f, env))


def test_decided_verdicts_are_stable_under_truncation():
    rng = random.Random(8)
    s = nat()
    budget = StageBudget(domain_horizon=12)
    for _ in range(200):
        f = random_formula(rng, ["x"], 3, sig=NAT_SIG)
        fv = free_vars(f)
        for k in range(4):
            env = {v: Element(0, k) for v in fv}
            v = evaluate(s, f, env, budget)
            if v is Truth.UNKNOWN:
                continue
            for h in (12, 15, 20):
                assert evaluate(truncate(s, h), f, env) is v


def test_registry_codes():
    reg = StructureRegistry()
    c0 = reg.register(digraph(1, []))
    c1 = reg.register(nat())
    assert (c0, c1) == (0, 1)
    with pytest.raises(ValueError):
        reg.register(nat(), code=1)
    assert reg.codes() == [0, 1] and 1 in reg and len(reg) == 2


def test_element_text():
    sig = Signature.build(["X", "N"], {})
    assert format_element(Element(1, 4), sig) == "N#4"
    assert parse_element("N#4", sig) == Element(1, 4)
    with pytest.raises(ValueError):
        parse_element("Q#1", sig)


# ---------------------------------------------------------- text format


def test_parse_structure_example():
    s = parse_structure("""
        language { sort X; rel E : X*X; }   % a path
        structure { X = {0,1,2}; E = {(0,1),(1,2)}; }
    """)
    assert s.universe[0] == (0, 1, 2)
    assert s.tables["E"] == {(0, 1), (1, 2)}


@pytest.mark.parametrize("text", [
    "language { sort X; rel E : X*X; } structure { X = {0,1}; E = {(0,1),(0,1)}; }",
    "language { sort X; rel E : X*X; } structure { X = {0,1}; E = {(0,2)}; }",
    "language { sort X; rel E : X*X; rel E : X; } structure { X = {0}; }",
    "language { sort X; } structure { X = {0,0}; }",
    "language { sort X; rel E : X*Y; } structure { }",
    "language { sort X; } structure { X = {0}; Q = {1}; }",
    "language { sort X; } structure { X = {0}; } extra",
    "language { sort X; } structure { X = {0} }",
])
def test_parse_structure_rejects(text):
    with pytest.raises(StructureFormatError):
        parse_structure(text)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 5), st.data())
def test_structure_text_round_trip(n, data):
    pairs = list(itertools.product(range(n), repeat=2))
    e = data.draw(st.sets(st.sampled_from(pairs))) if pairs else set()
    f = data.draw(st.sets(st.sampled_from(pairs))) if pairs else set()
    s = FiniteStructure(GRAPH_SIG, {0: range(n)}, {"E": e, "F": f})
    assert parse_structure(format_structure(s)).same_tables(s)
