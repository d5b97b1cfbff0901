import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from closurelab import (
    FormulaSyntaxError,
    PartitionedFormula,
    Signature,
    SortError,
    Var,
    bc_sigma_level,
    format_partitioned,
    parse_formula,
    quantifier_rank,
    repartition,
)
from closurelab.reductions import build_upsilon
from closurelab.syntax import (
    And,
    Atom,
    Eq,
    Exists,
    Forall,
    Not,
    Or,
    alpha_normalize,
    free_vars,
    rename_free,
)

from helpers import GRAPH_SIG, random_formula

TWO = Signature.build(["X", "N"], {"E": ["X", "X"], "S": ["N", "N"], "R": ["X", "N"]})
FXYZ = Signature.build(["Y"], {"F": ["Y", "Y", "Y"]})


def test_signature_rejects_duplicates_and_bad_indices():
    with pytest.raises(ValueError):
        Signature(("X", "X"))
    with pytest.raises(ValueError):
        Signature(("X",), (("E", (0, 0)), ("E", (0,))))
    with pytest.raises(ValueError):
        Signature(("X",), (("E", (0, 1)),))
    with pytest.raises(ValueError):
        Signature.build(["X"], {"E": ["X", "Q"]})


def test_parse_single_atom():
    pf = parse_formula("E(x;y)", GRAPH_SIG)
    assert pf.formula == Atom("E", ("x", "y"))
    assert pf.left == (Var("x", 0),)
    assert pf.right == (Var("y", 0),)


def test_parse_conjunction_with_negation():
    pf = parse_formula("F(x,y;z) & !F(x,z;y)", FXYZ)
    assert pf.formula == And((Atom("F", ("x", "y", "z")), Not(Atom("F", ("x", "z", "y")))))
    assert [v.name for v in pf.left] == ["x", "y"]
    assert [v.name for v in pf.right] == ["z"]


def test_syntax_error_offset():
    with pytest.raises(FormulaSyntaxError) as exc:
        parse_formula("E(x;", GRAPH_SIG)
    assert exc.value.offset == 4
    assert "offset 4" in str(exc.value)


def test_sort_mismatch_names_atom():
    with pytest.raises(SortError, match="R"):
        parse_formula("phi(x:X ; y:X) := R(x,y)", TWO)


def test_parse_header_quantifier_and_neq():
    pf = parse_formula("phi(x:X ; l:N) := E l2 : N . S(l,l2) & R(x,l2) & x != x", TWO)
    assert pf.left == (Var("x", 0),)
    assert pf.right == (Var("l", 1),)
    assert isinstance(pf.formula, Exists)
    assert pf.formula.vars == (Var("l2", 1),)


def test_parse_precedence():
    pf = parse_formula("E(x,y) | E(y,x) & x = y", GRAPH_SIG)
    assert isinstance(pf.formula, Or)
    assert isinstance(pf.formula.parts[1], And)


def test_parse_rejects_unknown_relation_and_trailing_input():
    with pytest.raises((FormulaSyntaxError, SortError, ValueError)):
        parse_formula("G(x;y)", GRAPH_SIG)
    with pytest.raises(FormulaSyntaxError):
        parse_formula("E(x;y) )", GRAPH_SIG)


def test_quantifier_rank_examples():
    assert quantifier_rank(Atom("E", ("x", "y"))) == 0
    assert quantifier_rank(Exists((Var("y", 0),), Atom("E", ("x", "y")))) == 1
    assert quantifier_rank(Forall((Var("y", 1), Var("z", 1)), Atom("S", ("y", "z")))) == 2


def _rank_oracle(f):
    if isinstance(f, (Atom, Eq)):
        return 0
    if isinstance(f, Not):
        return _rank_oracle(f.body)
    if isinstance(f, (And, Or)):
        return max(_rank_oracle(p) for p in f.parts)
    return len(f.vars) + _rank_oracle(f.body)


def _level_oracle(f):
    if isinstance(f, (Atom, Eq)):
        return 0
    if isinstance(f, Not):
        return _level_oracle(f.body)
    if isinstance(f, (And, Or)):
        return max(_level_oracle(p) for p in f.parts)
    return 1 + _level_oracle(f.body)


def test_bc_sigma_level_examples():
    e = Exists((Var("y", 0),), Atom("E", ("x", "y")))
    assert bc_sigma_level(Atom("E", ("x", "y"))) == 0
    assert bc_sigma_level(Not(e)) == 1
    assert bc_sigma_level(Forall((Var("x", 0),), Not(e))) == 2


def test_classifiers_match_recursion_oracles():
    rng = random.Random(3)
    for _ in range(300):
        f = random_formula(rng, ["x", "y"], 5, max_quant=3)
        assert quantifier_rank(f) == _rank_oracle(f)
        assert bc_sigma_level(f) == _level_oracle(f)
        assert bc_sigma_level(Not(f)) == bc_sigma_level(f)
        g = random_formula(rng, ["x"], 3)
        assert bc_sigma_level(And((f, g))) == max(bc_sigma_level(f), bc_sigma_level(g))
        assert (quantifier_rank(f) == 0) == (bc_sigma_level(f) == 0)


def test_repartition_swap_and_errors():
    pf = parse_formula("E(x;y)", GRAPH_SIG)
    swapped = repartition(pf, ["y"])
    assert [v.name for v in swapped.left] == ["y"]
    assert [v.name for v in swapped.right] == ["x"]
    with pytest.raises(ValueError):
        repartition(pf, ["q"])
    bound = parse_formula("phi(x ; ) := E y : X . E(x,y)", GRAPH_SIG)
    with pytest.raises(ValueError):
        repartition(bound, ["y"])


def test_repartition_upsilon_tau0():
    pf = parse_formula("E(x;y)", GRAPH_SIG)
    ups = build_upsilon(pf, 2)
    z0, z1 = ups.blocks
    tau0 = repartition(ups.partitions[0], ["x"] + [v.name for v in z1])
    assert tau0.right == z0
    assert ups.partitions[0] == tau0


def test_partition_must_match_free_variables():
    with pytest.raises(ValueError):
        PartitionedFormula(Atom("E", ("x", "y")), (Var("x", 0),), ())
    with pytest.raises(ValueError):
        PartitionedFormula(Atom("E", ("x", "x")), (Var("x", 0),), (Var("x", 0),))


def test_alpha_normalize_removes_shadowing():
    inner = Exists((Var("x", 0),), Atom("E", ("x", "x")))
    f = And((Atom("E", ("x", "y")), inner))
    g = alpha_normalize(f)
    assert free_vars(g) == free_vars(f)
    assert g.parts[1].vars[0].name not in ("x", "y")
    assert alpha_normalize(g) == g


def test_rename_free_avoids_capture():
    f = Exists((Var("z", 0),), Atom("E", ("x", "z")))
    g = rename_free(f, {"x": "z"})
    assert free_vars(g) == ("z",)
    assert g.vars[0].name != "z"


# ------------------------------------------------------ round trip


_names = st.sampled_from(["x", "y", "z"])


def _formulas():
    atoms = st.one_of(
        st.builds(lambda r, a, b: Atom(r, (a, b)), st.sampled_from(["E", "F"]), _names, _names),
        st.builds(Eq, _names, _names),
    )

    def extend(children):
        pair = st.tuples(children, children)
        return st.one_of(
            st.builds(Not, children),
            st.builds(And, pair),
            st.builds(Or, pair),
            st.builds(lambda v, b: Exists((Var(v, 0),), b), _names, children),
            st.builds(lambda v, b: Forall((Var(v, 0),), b), _names, children),
        )

    return st.recursive(atoms, extend, max_leaves=8)


@settings(max_examples=300, deadline=None)
@given(_formulas(), st.data())
def test_print_parse_round_trip(f, data):
    fv = list(free_vars(f))
    cut = data.draw(st.integers(0, len(fv)))
    pf = PartitionedFormula.make(f, [Var(v, 0) for v in fv[:cut]], [Var(v, 0) for v in fv[cut:]], GRAPH_SIG)
    text = format_partitioned(pf, GRAPH_SIG)
    assert parse_formula(text, GRAPH_SIG) == pf
