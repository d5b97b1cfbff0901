"""Two structures that differ only in a bipartite graph hung off one element.

The universe, the unary relations A, B, C, D, H and the chain graph E are
those of the path-witness layout. ``U = {u0, u1, u2}`` with ``u0``, ``u1``
the first two C elements and ``u2`` the star. With ``F_i`` the binary
relation ``F(u_i, ., .)``:

* ``F_0`` is the path through ``Y \\ U`` in increasing order, plus ``(u0, u1)``;
* ``F_1`` is its reverse, plus ``(u1, u2)``;
* ``F_2 = {(u2, u0)}``, plus ``(a, b)`` for every edge of the bipartite
  graph G. G is directed from its A side to its B side, so ``psi(u2, a; z)``
  has exactly the G-neighbours of ``a`` as solutions.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from ..structures import Element, FiniteStructure, RuleStructure
from ..syntax import And, Atom, Not, PartitionedFormula, Signature, Var
from . import path_witness as pw
from .layout import pair, unpair
from .sources import EnumerationSource

U0, U1, U2 = 3, 7, pw.STAR
U = (U0, U1, U2)
UNARY = ("U",) + pw.UNARY


@dataclass(frozen=True)
class BipartiteEdges:
    """Edges (a_i, b_j) given by row: ``rows(i)`` lists the j adjacent to
    a_i, or is None when a_i has infinitely many neighbours, in which case
    ``member(i, j)`` decides adjacency. ``degree(i)`` is the true degree."""

    rows: Callable[[int], Optional[list[int]]]
    member: Callable[[int, int], bool]
    degree: Callable[[int], float]
    columns: Callable[[int], list[int]]  # the i adjacent to b_j (always finite here)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]]) -> "BipartiteEdges":
        """From element pairs (x, y) of the layout with x in A and y in B."""
        by_row: dict[int, list[int]] = {}
        by_col: dict[int, list[int]] = {}
        for x, y in pairs:
            cx, cy = pw.classify(x), pw.classify(y)
            if cx[0] != "a" or cy[0] != "b":
                raise ValueError(f"edge ({x}, {y}) does not go from the A side to the B side")
            by_row.setdefault(cx[1], []).append(cy[1])
            by_col.setdefault(cy[1], []).append(cx[1])
        return cls(
            lambda i: sorted(set(by_row.get(i, []))),
            lambda i, j: j in by_row.get(i, []),
            lambda i: len(set(by_row.get(i, []))),
            lambda j: sorted(set(by_col.get(j, []))),
        )


def degree_graph(src: EnumerationSource) -> BipartiteEdges:
    """a_e is adjacent to b_{pair(e, n)} for each n in column e."""

    def rows(e):
        if src.is_infinite(e):
            return None
        return sorted(pair(e, n) for n in src.column(e))

    def columns(j):
        e, n = unpair(j)
        return [e] if src.halts(e, n) else []

    return BipartiteEdges(rows, lambda e, j: e in columns(j), src.size, columns)


def zero_input_graph(src: EnumerationSource) -> BipartiteEdges:
    """a_e is adjacent to the single vertex b_e when machine e halts on 0."""
    return BipartiteEdges(
        lambda e: [e] if src.halts(e, 0) else [],
        lambda e, j: j == e and src.halts(e, 0),
        lambda e: 1 if src.halts(e, 0) else 0,
        lambda j: [j] if src.halts(j, 0) else [],
    )


def _next_free(s: int) -> int:
    t = s + 1
    while t in U:
        t += 1
    return t


def _prev_free(t: int) -> Optional[int]:
    s = t - 1
    while s in U:
        s -= 1
    return s if s >= 0 else None


class BipartiteStructure(RuleStructure):
    def __init__(self, g: BipartiteEdges):
        self.g = g
        self._layout = pw.PathWitnessStructure(EnumerationSource())
        sig = Signature(("Y",), tuple((u, (0,)) for u in UNARY) + (("E", (0, 0)), ("F", (0, 0, 0))))
        relations = {u: self._layout.relations[u] for u in pw.UNARY}
        supports = {u: self._layout.supports[u] for u in pw.UNARY}
        relations["U"] = lambda args: args[0] in U
        supports["U"] = lambda b: [(u,) for u in sorted(U)] if b[0] is None else ([b] if b[0] in U else [])
        relations["E"] = self._layout.relations["E"]
        supports["E"] = self._layout.supports["E"]
        relations["F"] = self.f_holds
        supports["F"] = self._f_support
        super().__init__(sig, lambda j, k: k >= 0, relations, supports)

    def f_holds(self, args) -> bool:
        r, s, t = args
        if r == U0:
            return (s, t) == (U0, U1) or (s not in U and t == _next_free(s))
        if r == U1:
            return (s, t) == (U1, U2) or (t not in U and s == _next_free(t))
        if r == U2:
            if (s, t) == (U2, U0):
                return True
            cs, ct = pw.classify(s), pw.classify(t)
            return cs[0] == "a" and ct[0] == "b" and self.g.member(cs[1], ct[1])
        return False

    def _successors(self, r: int, s: int) -> Optional[list[int]]:
        if r == U0:
            return [U1] if s == U0 else ([] if s in U else [_next_free(s)])
        if r == U1:
            if s == U1:
                return [U2]
            if s in U:
                return []
            p = _prev_free(s)
            return [] if p is None else [p]
        if r == U2:
            if s == U2:
                return [U0]
            c = pw.classify(s)
            if c[0] != "a":
                return []
            row = self.g.rows(c[1])
            return None if row is None else [pw.enc_b(j) for j in row]
        return []

    def _predecessors(self, r: int, t: int) -> list[int]:
        if r == U0:
            if t == U1:
                return [U0]
            if t in U:
                return []
            p = _prev_free(t)
            return [] if p is None else [p]
        if r == U1:
            return [U1] if t == U2 else ([] if t in U else [_next_free(t)])
        if r == U2:
            if t == U0:
                return [U2]
            c = pw.classify(t)
            return [pw.enc_a(i) for i in self.g.columns(c[1])] if c[0] == "b" else []
        return []

    def _f_support(self, b):
        r, s, t = b
        if r is None:
            return None
        if s is not None and t is not None:
            return [b] if self.f_holds(b) else []
        if s is not None:
            succ = self._successors(r, s)
            return None if succ is None else [(r, s, x) for x in succ]
        if t is not None:
            return [(r, x, t) for x in self._predecessors(r, t)]
        return None

    def lookup(self, text):
        name = text.strip()
        if name in ("u0", "u1", "u2"):
            return Element(0, U[int(name[1])])
        return self._layout.lookup(name)

    def element_name(self, e):
        if e.index in U:
            return f"u{U.index(e.index)}"
        return self._layout.element_name(e)


def psi_formula() -> PartitionedFormula:
    """``F(x, y, z) & !F(x, z, y)`` partitioned ``(x, y ; z)``."""
    x, y, z = (Var(n, 0) for n in "xyz")
    body = And((Atom("F", ("x", "y", "z")), Not(Atom("F", ("x", "z", "y")))))
    return PartitionedFormula(body, (x, y), (z,))


@dataclass(frozen=True)
class DegreeOracle:
    """True solution counts of psi at (u2, a_e): the G-degree of a_e."""

    g: BipartiteEdges

    def __call__(self, pf: PartitionedFormula, a: tuple) -> Optional[float]:
        if pf != psi_formula() or a[0].index != U2:
            return None
        c = pw.classify(a[1].index)
        if c[0] != "a":
            return None
        return self.g.degree(c[1])


def build_bipartite_pair(g0, g1) -> tuple[BipartiteStructure, BipartiteStructure]:
    """Z(g0) and Z(g1). Each argument is a BipartiteEdges or an iterable of
    element pairs (a-vertex, b-vertex)."""
    g0 = g0 if isinstance(g0, BipartiteEdges) else BipartiteEdges.from_pairs(g0)
    g1 = g1 if isinstance(g1, BipartiteEdges) else BipartiteEdges.from_pairs(g1)
    return BipartiteStructure(g0), BipartiteStructure(g1)


def table_diff(s0: FiniteStructure, s1: FiniteStructure) -> dict[str, set]:
    """Relation rows present in exactly one of two structures on the same universe."""
    if s0.universe != s1.universe:
        raise ValueError("structures have different universes")
    out = {}
    for name in s0.sig.relation_names:
        d = set(s0.tables[name]) ^ set(s1.tables[name])
        if d:
            out[name] = d
    return out


def decode_chain_indexing(vertices: Iterable, edges: Iterable[tuple], a_side: set, b_side: set) -> dict:
    """Recover the layout names of a relabelled copy of the (A u B u H, E)
    chain graph. Returns ``{vertex: ("a", i) | ("b", i) | ("h", i, t)}``;
    chain L_i is the component of order i + 2 and h positions count from
    the A end. Raises ValueError when the input is not such a copy."""
    adj: dict = {v: [] for v in vertices}
    for x, y in edges:
        if y not in adj[x]:
            adj[x].append(y)
            adj[y].append(x)
    names: dict = {}
    seen: set = set()
    for v in adj:
        if v in seen or v not in a_side:
            continue
        chain = [v]
        seen.add(v)
        prev, cur = None, v
        while True:
            nxt = [w for w in adj[cur] if w != prev]
            if len(adj[cur]) > 2 or (cur != v and len(nxt) > 1):
                raise ValueError(f"vertex {cur!r} has degree above 2")
            if not nxt or (cur != v and cur in b_side):
                break
            prev, cur = cur, nxt[0]
            if cur in seen:
                raise ValueError("cycle in chain graph")
            seen.add(cur)
            chain.append(cur)
        if chain[-1] not in b_side:
            raise ValueError(f"chain from {v!r} does not end on the B side")
        i = len(chain) - 2
        if ("a", i) in names.values():
            raise ValueError(f"two chains of order {i + 2}")
        names[chain[0]] = ("a", i)
        names[chain[-1]] = ("b", i)
        for t, h in enumerate(chain[1:-1]):
            names[h] = ("h", i, t)
    leftover = [v for v in adj if v not in seen]
    if leftover:
        raise ValueError(f"vertices outside any A-to-B chain: {leftover[:5]}")
    return names
