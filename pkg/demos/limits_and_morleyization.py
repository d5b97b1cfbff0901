"""Limits as formulas over a copy of the naturals, and quantifier elimination by new relations.

Run: python3 demos/limits_and_morleyization.py
"""
from closurelab import (
    Element,
    FiniteStructure,
    LimitPresentation,
    Signature,
    augment_with_nat,
    bc_sigma_level,
    brute_force_count,
    evaluate,
    format_partitioned,
    limit_encode,
    morleyize,
    parse_formula,
    parse_structure,
    truncate,
)

sig = Signature.build(["X"], {"R": ["X"]})
base = augment_with_nat(FiniteStructure(sig, {0: range(3)}, {}))
# R(a) settles to "a >= 1" after stage a + 2
lp = LimitPresentation(base, {"R": lambda a, ells: (a[0] >= 1) == (ells[0] >= a[0] + 2)}, depth=1)
plus, phis = limit_encode(lp)
phi = phis["R"]
print(format_partitioned(phi, plus.sig, "limit_R"))
print("level:", bc_sigma_level(phi.formula))
for h in (6, 10, 14):
    t = truncate(plus, h)
    row = [evaluate(t, phi.formula, {"x0": Element(0, a)}).value for a in range(3)]
    print(f"  horizon {h}: {row}")

g = parse_structure("""
language { sort X; rel E : X*X; }
structure { X = {0,1,2,3}; E = {(0,1),(1,2),(2,0),(3,3)}; }
""")
two_step = parse_formula("phi(x ; y) := E z:X . E(x,z) & E(z,y)", g.sig)
res = morleyize(g, [two_step], 1)
qf = res.translate(two_step)
print("\nnew relations:", res.sig.relation_names)
print("translated:", format_partitioned(qf, res.sig))
for k in range(4):
    a = (Element(0, k),)
    print(f"  X#{k}: {brute_force_count(g, two_step, a)} == {brute_force_count(res.structure, qf, a)}")
