"""A structure where b_e is definable over a_e by a path witness exactly when
column e of the source is bounded.

Layout of the universe (one sort, naturals): 0 is the star. For x >= 1 let
``q = (x - 1) // 4``; ``(x - 1) % 4`` selects the family:

* 0: ``a_q``; 1: ``b_q``;
* 2: the q-th C element. Even q with ``unpair(q // 2) = (i, j)`` is
  ``r_{i,inf,j}``; odd q with ``unpair(q // 2) = (i, w)`` and
  ``tri_decode(w) = (k, t)`` is the t-th element of ``P_{i,k}`` (k >= 1);
* 3: the q-th H element, with ``tri_decode(q) = (i, t)`` the t-th interior
  vertex of the chain ``L_i``.

``E`` is the union of the chains ``L_i = a_i, h_{i,0}, ..., h_{i,i-1}, b_i``.
``F(r, s, t)`` holds when (s, t) is an edge of the path attached to r:
``a_i -> r_{i,inf,0} -> r_{i,inf,1} -> ...`` for ``r = a_i``, and
``a_i -> P_{i,k} -> b_i`` for ``r = r_{i,inf,k}``. In addition
``F(r_{e,inf,k}, a_e, star)`` holds for every spoiled pair (e, k): some
listed (e, n) has k <= n, or column e is infinite.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional

from ..closure import MembershipVerdict
from ..structures import Element, RuleStructure
from ..syntax import Atom, PartitionedFormula, Signature, Var
from .layout import pair, tri_decode, tri_encode, unpair
from .sources import EnumerationSource

STAR = 0
UNARY = ("A", "B", "C", "D", "H")


def enc_a(i: int) -> int:
    return 1 + 4 * i


def enc_b(i: int) -> int:
    return 2 + 4 * i


def enc_r(i: int, j: int) -> int:
    return 3 + 4 * (2 * pair(i, j))


def enc_p(i: int, k: int, t: int) -> int:
    return 3 + 4 * (2 * pair(i, tri_encode(k, t)) + 1)


def enc_h(i: int, t: int) -> int:
    return 4 + 4 * tri_encode(i, t)


def classify(x: int) -> tuple:
    """``("star",)``, ``("a", i)``, ``("b", i)``, ``("r", i, j)``,
    ``("p", i, k, t)`` or ``("h", i, t)``."""
    if x < 0:
        raise ValueError("negative element")
    if x == STAR:
        return ("star",)
    q, kind = divmod(x - 1, 4)
    if kind == 0:
        return ("a", q)
    if kind == 1:
        return ("b", q)
    if kind == 2:
        i, w = unpair(q // 2)
        if q % 2 == 0:
            return ("r", i, w)
        k, t = tri_decode(w)
        return ("p", i, k, t)
    i, t = tri_decode(q)
    return ("h", i, t)


def encode(kind: tuple) -> int:
    tag, *rest = kind
    return {"star": lambda: STAR, "a": enc_a, "b": enc_b, "r": enc_r, "p": enc_p, "h": enc_h}[tag](*rest)


def chain_vertices(i: int) -> list[int]:
    """The chain L_i in order, from a_i to b_i."""
    return [enc_a(i)] + [enc_h(i, t) for t in range(i)] + [enc_b(i)]


def path_vertices(r: int) -> Optional[list[int]]:
    """The path attached to r up to its end (None for the infinite path of a_i)."""
    c = classify(r)
    if c[0] == "r":
        _, i, k = c
        return [enc_a(i)] + [enc_p(i, k, t) for t in range(k)] + [enc_b(i)]
    return None


def path_successor(r: int, s: int) -> Optional[int]:
    c, d = classify(r), classify(s)
    if c[0] == "a":
        i = c[1]
        if s == enc_a(i):
            return enc_r(i, 0)
        if d[0] == "r" and d[1] == i:
            return enc_r(i, d[2] + 1)
        return None
    if c[0] == "r":
        _, i, k = c
        path = path_vertices(r)
        if s in path[:-1]:
            return path[path.index(s) + 1]
    return None


def path_predecessor(r: int, t: int) -> Optional[int]:
    c, d = classify(r), classify(t)
    if c[0] == "a":
        i = c[1]
        if d[0] == "r" and d[1] == i:
            return enc_a(i) if d[2] == 0 else enc_r(i, d[2] - 1)
        return None
    if c[0] == "r":
        path = path_vertices(r)
        if t in path[1:]:
            return path[path.index(t) - 1]
    return None


class PathWitnessStructure(RuleStructure):
    """The spoiled structure; ``spoiled(e, k)`` and ``least_witness(e)``
    expose the layout's ground truth."""

    _NAME = re.compile(r"^(star|a|b|r|p|h)((?:_\d+)*)$")

    def __init__(self, src: EnumerationSource):
        self.source = src
        self._sup = {}
        sig = Signature(("Y",), tuple((u, (0,)) for u in UNARY) + (("E", (0, 0)), ("F", (0, 0, 0))))
        kinds = {"A": "a", "B": "b", "D": "star", "H": "h"}

        def unary(u):
            if u == "C":
                return lambda args: classify(args[0])[0] in ("r", "p")
            return lambda args: classify(args[0])[0] == kinds[u]

        relations = {u: unary(u) for u in UNARY}
        supports = {u: (lambda b, u=u: None if b[0] is None else ([b] if relations[u](b) else [])) for u in UNARY}
        supports["D"] = lambda b: [(STAR,)] if b[0] in (None, STAR) else []
        relations["E"] = lambda args: args[1] in self.e_neighbors(args[0])
        supports["E"] = self._e_support
        relations["F"] = self.f_holds
        supports["F"] = self._f_support
        super().__init__(sig, lambda j, k: k >= 0, relations, supports)

    # ground truth
    def spoiled(self, e: int, k: int) -> bool:
        if e not in self._sup:
            self._sup[e] = self.source.sup(e)
        return k <= self._sup[e]

    def least_witness(self, e: int) -> float:
        """Least unspoiled k, or inf for an infinite column."""
        return self.source.sup(e) + 1

    # E
    def e_neighbors(self, x: int) -> list[int]:
        c = classify(x)
        if c[0] in ("a", "b"):
            chain = chain_vertices(c[1])
            return [chain[1] if c[0] == "a" else chain[-2]]
        if c[0] == "h":
            chain = chain_vertices(c[1])
            pos = c[2] + 1
            return sorted([chain[pos - 1], chain[pos + 1]])
        return []

    def _e_support(self, b):
        u, v = b
        if u is not None:
            return [(u, w) for w in self.e_neighbors(u) if v is None or v == w]
        if v is not None:
            return [(w, v) for w in self.e_neighbors(v)]
        return None

    # F
    def _star_edge(self, r: int, s: int) -> bool:
        c = classify(r)
        return c[0] == "r" and s == enc_a(c[1]) and self.spoiled(c[1], c[2])

    def f_holds(self, args) -> bool:
        r, s, t = args
        if t == STAR:
            return self._star_edge(r, s)
        if STAR in (r, s):
            return False
        return path_successor(r, s) == t

    def _f_support(self, b):
        r, s, t = b
        if r is None:
            return None
        if s is not None and t is not None:
            return [b] if self.f_holds(b) else []
        if s is not None:
            out = []
            nxt = path_successor(r, s) if s != STAR else None
            if nxt is not None:
                out.append((r, s, nxt))
            if self._star_edge(r, s):
                out.append((r, s, STAR))
            return out
        if t is not None:
            if t == STAR:
                c = classify(r)
                return [(r, enc_a(c[1]), STAR)] if c[0] == "r" and self._star_edge(r, enc_a(c[1])) else []
            prev = path_predecessor(r, t)
            return [(r, prev, t)] if prev is not None else []
        return None

    # names
    def lookup(self, text):
        m = self._NAME.match(text.strip())
        if m:
            nums = tuple(int(x) for x in m.group(2).split("_")[1:])
            arity = {"star": 0, "a": 1, "b": 1, "r": 2, "p": 3, "h": 2}[m.group(1)]
            if len(nums) == arity:
                try:
                    return Element(0, encode((m.group(1),) + nums))
                except ValueError:
                    pass
            raise ValueError(f"bad element name {text!r}")
        return super().lookup(text)

    def element_name(self, e):
        tag, *rest = classify(e.index)
        return "_".join([tag] + [str(x) for x in rest])


def gamma_formula() -> PartitionedFormula:
    """``F(x, y ; z)``."""
    x, y, z = (Var(n, 0) for n in "xyz")
    return PartitionedFormula(Atom("F", ("x", "y", "z")), (x, y), (z,))


@dataclass(frozen=True)
class WitnessOracle:
    """Answers b_e in dcl({a_e}) and the true solution counts of F(x,y;z)."""

    structure: PathWitnessStructure

    def dcl_member(self, e: int) -> MembershipVerdict:
        ok = self.structure.least_witness(e) != math.inf
        return MembershipVerdict.MEMBER if ok else MembershipVerdict.NON_MEMBER

    def __call__(self, pf: PartitionedFormula, a: tuple) -> Optional[float]:
        if pf != gamma_formula():
            return None
        r, s = (e.index for e in a)
        return float(len(self.structure._f_support((r, s, None))))


def build_path_witness(src: EnumerationSource) -> tuple[PathWitnessStructure, WitnessOracle]:
    s = PathWitnessStructure(src)
    return s, WitnessOracle(s)
