"""The four seeded constructions next to their analytic oracles.

Run: python3 demos/constructions_tour.py
"""
from closurelab import SINGLETON, Element, StageBudget, closure_membership, count_solutions, in_acl0
from closurelab.constructions import (
    DegreeOracle,
    EnumerationSource,
    build_bipartite_pair,
    build_chain_graph,
    build_path_witness,
    build_sorted_halting,
    decode_parities,
    degree_graph,
    gamma_formula,
    psi_formula,
    xi_formulas,
    zero_input_graph,
)
from closurelab.constructions import path_witness as pw
from closurelab.constructions.bipartite import U2

src = EnumerationSource.parse("1:0;2:0,1,2;3:4", infinite="5")
print("source columns:", src.format(), "infinite:", sorted(src.infinite_columns))

print("\n-- one sort per column, sized by the column")
s, oracle = build_sorted_halting(src)
xi = xi_formulas(s.sig)
for e in range(6):
    c = s.lookup(f"c_{e}")
    print(f"  X{e}: staged {count_solutions(s, xi[e], (c,))}, true size {oracle.size(e)}, "
          f"finite-with-oracle {in_acl0(s, xi[e], (c,), oracle=oracle)}")

print("\n-- chains whose lengths carry a limiting bit")
f = lambda n, stage: (n + (stage >= 5)) % 2  # early bit n mod 2, flipped from stage 5 on
g, inv = build_chain_graph(f, 16)
for line in inv.export_lines()[:5]:
    print("  " + line)
print("  decoded below 3000:", decode_parities(g, 3000))

print("\n-- paths that are definable only past spoiled indices")
s, oracle = build_path_witness(src)
for e in (0, 2, 5):
    a, b = s.lookup(f"a_{e}"), s.lookup(f"b_{e}")
    v, res = closure_membership(s, [gamma_formula()], {a}, b, SINGLETON, StageBudget(closure_iterations=20), oracle)
    path = " ".join(s.element_name(t.element) for t in res.derivation(b)) or "(no path)"
    print(f"  a_{e} -> b_{e}: {v} (oracle {oracle.dcl_member(e)}) {path}")

print("\n-- two bipartite encodings that differ only at one parameter")
g0, g1 = degree_graph(src), zero_input_graph(src)
z0, z1 = build_bipartite_pair(g0, g1)
for e in range(6):
    args = (Element(0, U2), Element(0, pw.enc_a(e)))
    print(f"  a_{e}: degree {g0.degree(e)} -> {count_solutions(z0, psi_formula(), args)}; "
          f"zero-input degree {g1.degree(e)} -> {in_acl0(z1, psi_formula(), args, oracle=DegreeOracle(g1))}")
