"""Shared corpus generators and independently coded brute-force oracles.

The oracles here deliberately avoid the library's evaluator: they walk
formulas over the raw tables of a FiniteStructure with their own recursion.
"""
from __future__ import annotations

import itertools
import random

from closurelab.structures import Element, FiniteStructure
from closurelab.syntax import (
    And,
    Atom,
    Eq,
    Exists,
    Forall,
    Not,
    Or,
    PartitionedFormula,
    Signature,
    Var,
    free_vars,
)

GRAPH_SIG = Signature.build(["X"], {"E": ["X", "X"], "F": ["X", "X"]})
EDGE_SIG = Signature.build(["X"], {"E": ["X", "X"]})


def random_structure(rng: random.Random, max_size: int = 4, sig: Signature = GRAPH_SIG,
                     density: float | None = None) -> FiniteStructure:
    """A single-sorted structure on 1..max_size elements with random binary tables."""
    n = rng.randint(1, max_size)
    p = rng.choice([0.2, 0.4, 0.6]) if density is None else density
    tables = {
        name: [t for t in itertools.product(range(n), repeat=len(ty)) if rng.random() < p]
        for name, ty in sig.relations
    }
    return FiniteStructure(sig, {0: range(n)}, tables)


def digraph(n: int, edges) -> FiniteStructure:
    return FiniteStructure(EDGE_SIG, {0: range(n)}, {"E": edges})


def random_qf(rng: random.Random, names: list[str], depth: int, sig: Signature = GRAPH_SIG):
    rels = sig.relation_names
    if depth == 0 or rng.random() < 0.3:
        if rng.random() < 0.25:
            return Eq(rng.choice(names), rng.choice(names))
        return Atom(rng.choice(rels), (rng.choice(names), rng.choice(names)))
    kind = rng.choice(["not", "and", "or"])
    if kind == "not":
        return Not(random_qf(rng, names, depth - 1, sig))
    parts = tuple(random_qf(rng, names, depth - 1, sig) for _ in range(2))
    return And(parts) if kind == "and" else Or(parts)


_SHAPES = [(("x",), ("y",)), (("x",), ("y", "z")), (("x", "y"), ("z",)), ((), ("x",)), ((), ("x", "y"))]


def qf_corpus(count: int = 40, seed: int = 7, shapes=_SHAPES, sig: Signature = GRAPH_SIG) -> list[PartitionedFormula]:
    """A fixed list of quantifier-free partitioned formulas over ``sig``.

    Every variable named in the shape is forced to occur free by conjoining
    reflexive equalities for any that the random body misses.
    """
    rng = random.Random(seed)
    out = []
    for i in range(count):
        left, right = shapes[i % len(shapes)]
        names = list(left + right)
        body = random_qf(rng, names, 3, sig)
        missing = [v for v in names if v not in free_vars(body)]
        if missing:
            body = And((body,) + tuple(Eq(v, v) for v in missing))
        out.append(PartitionedFormula(body, tuple(Var(v, 0) for v in left), tuple(Var(v, 0) for v in right)))
    return out


def random_formula(rng: random.Random, names: list[str], depth: int, sig: Signature = GRAPH_SIG,
                   max_quant: int = 2):
    """Random formula with quantifiers; bound names come from a fixed pool and may shadow."""
    if depth == 0 or rng.random() < 0.25:
        return random_qf(rng, names, 0, sig)
    kind = rng.choice(["not", "and", "or", "exists", "forall"] if max_quant else ["not", "and", "or"])
    if kind == "not":
        return Not(random_formula(rng, names, depth - 1, sig, max_quant))
    if kind in ("and", "or"):
        parts = tuple(random_formula(rng, names, depth - 1, sig, max_quant) for _ in range(2))
        return And(parts) if kind == "and" else Or(parts)
    v = rng.choice(["u", "w"])
    body = random_formula(rng, names + [v], depth - 1, sig, max_quant - 1)
    q = Exists if kind == "exists" else Forall
    return q((Var(v, 0),), body)


# ------------------------------------------------------------ oracles


def textbook_sat(s: FiniteStructure, f, env: dict) -> bool:
    """Recursive satisfaction over raw index tables; env maps names to indices."""
    if isinstance(f, Atom):
        return tuple(env[v] for v in f.args) in s.tables[f.rel]
    if isinstance(f, Eq):
        return env[f.left] == env[f.right]
    if isinstance(f, Not):
        return not textbook_sat(s, f.body, env)
    if isinstance(f, And):
        return all(textbook_sat(s, p, env) for p in f.parts)
    if isinstance(f, Or):
        return any(textbook_sat(s, p, env) for p in f.parts)
    pools = [s.universe[v.sort] for v in f.vars]
    results = (
        textbook_sat(s, f.body, {**env, **{v.name: k for v, k in zip(f.vars, combo)}})
        for combo in itertools.product(*pools)
    )
    return any(results) if isinstance(f, Exists) else all(results)


def nested_loop_solutions(s: FiniteStructure, pf: PartitionedFormula, a) -> list[tuple]:
    env = {v.name: e.index for v, e in zip(pf.left, a)}
    out = []
    for combo in itertools.product(*(s.universe[v.sort] for v in pf.right)):
        env.update({v.name: k for v, k in zip(pf.right, combo)})
        if textbook_sat(s, pf.formula, env):
            out.append(tuple(Element(v.sort, k) for v, k in zip(pf.right, combo)))
    return out


def left_tuples(s: FiniteStructure, pf: PartitionedFormula, pool=None):
    """All left tuples, or those drawn from ``pool`` when given."""
    if pool is None:
        pools = [[Element(v.sort, k) for k in s.universe[v.sort]] for v in pf.left]
    else:
        pools = [[e for e in sorted(pool) if e.sort == v.sort] for v in pf.left]
    return itertools.product(*pools)


def fixpoint_oracle(s: FiniteStructure, phis, base, allowed: set | None) -> frozenset:
    """Exhaustive closure: ``allowed`` is a set of counts, None for every finite count."""
    current = frozenset(base)
    while True:
        nxt = set(current)
        for pf in phis:
            for a in left_tuples(s, pf, current):
                sols = nested_loop_solutions(s, pf, a)
                if allowed is None or len(sols) in allowed:
                    nxt.update(e for b in sols for e in b)
        if nxt == current:
            return current
        current = frozenset(nxt)


def reachable(s: FiniteStructure, base, step) -> frozenset:
    """Graph search where ``step(x)`` lists successors."""
    seen = set(base)
    todo = list(base)
    while todo:
        x = todo.pop()
        for y in step(x):
            if y not in seen:
                seen.add(y)
                todo.append(y)
    return frozenset(seen)


def all_subsets(elems):
    elems = sorted(elems)
    return [frozenset(c) for r in range(len(elems) + 1) for c in itertools.combinations(elems, r)]
