"""Counting solutions and growing closures on a small directed graph.

Run: python3 demos/closure_basics.py
"""
from closurelab import (
    ALL_FINITE,
    SINGLETON,
    parse_formula,
    parse_structure,
    cl_fixpoint,
    count_solutions,
    dcl_set_member,
    in_acl0,
    in_dcl0,
)

GRAPH = """
language { sort X; rel E : X*X; }
structure { X = {0,1,2,3,4}; E = {(0,1),(1,2),(1,3),(3,4)}; }
"""

g = parse_structure(GRAPH)
edge = parse_formula("E(x;y)", g.sig)
x = [g.lookup(f"X#{k}") for k in range(5)]

print("out-neighbours of each vertex")
for v in x:
    verdict = count_solutions(g, edge, (v,))
    print(f"  {g.element_name(v)}: {verdict}  algebraic={in_acl0(g, edge, (v,))}  definable={in_dcl0(g, edge, (v,))}")

print("\nclosures of {X#0}")
for label, S in (("singleton counts", SINGLETON), ("any finite count", ALL_FINITE)):
    res = cl_fixpoint(g, [edge], {x[0]}, S)
    names = sorted(g.element_name(e) for e in res.elements)
    print(f"  {label}: {names}")
    for line in res.format_trace(g.sig):
        print(f"    {line}")

print("\nX#4 definable over {X#0}?", dcl_set_member(g, [edge], {x[0]}, x[4]))
print("X#4 definable over {X#3}?", dcl_set_member(g, [edge], {x[3]}, x[4]))
