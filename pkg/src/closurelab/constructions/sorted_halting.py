"""Sorts whose sizes record halting behaviour.

One sort ``X{e}`` per column, with unary ``C{e}`` and ``D{e}`` each holding
of a single element. Within ``X{e}`` index 0 is the C element, index 1 the
D element, and index 2 + j the j-th listed input of column e (every
2 + n for an infinite column). So |X{e}| = |W_e| + 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from ..structures import Element, RuleStructure
from ..syntax import And, Eq, PartitionedFormula, Signature, Var
from .sources import EnumerationSource


def sorted_halting_signature(sorts: int) -> Signature:
    names = [f"X{e}" for e in range(sorts)]
    rels = []
    for e in range(sorts):
        rels += [(f"C{e}", (e,)), (f"D{e}", (e,))]
    return Signature(tuple(names), tuple(rels))


def xi_formulas(sig: Signature) -> list[PartitionedFormula]:
    """``(x = x) & (y = y)`` with x, y of sort X_i, partitioned (x ; y), one per sort."""
    out = []
    for j in range(len(sig.sorts)):
        x, y = Var("x", j), Var("y", j)
        out.append(PartitionedFormula(And((Eq("x", "x"), Eq("y", "y"))), (x,), (y,)))
    return out


@dataclass(frozen=True)
class SortSizeOracle:
    """True solution counts of the xi formulas, read off the source."""

    source: EnumerationSource
    sig: Signature

    def size(self, e: int) -> float:
        return self.source.size(e) + 2

    def __call__(self, pf: PartitionedFormula, a: tuple) -> Optional[float]:
        if len(pf.left) == 1 and len(pf.right) == 1 and pf.left_type == pf.right_type:
            if pf == xi_formulas(self.sig)[pf.left_type[0]]:
                return self.size(pf.left_type[0])
        return None


class SortedHaltingStructure(RuleStructure):
    def lookup(self, text):
        kind, _, num = text.partition("_")
        if kind in ("c", "d") and num.isdigit() and int(num) < len(self.sig.sorts):
            return Element(int(num), 0 if kind == "c" else 1)
        return super().lookup(text)

    def element_name(self, e):
        if e.index < 2:
            return f"{'cd'[e.index]}_{e.sort}"
        return super().element_name(e)


def build_sorted_halting(src: EnumerationSource, sorts: Optional[int] = None):
    """The structure and its sort-size oracle. ``sorts`` defaults to one more
    than the largest column mentioned, and at least 11."""
    if sorts is None:
        sorts = max([10] + src.columns()) + 1
    sig = sorted_halting_signature(sorts)
    sizes = {e: src.size(e) for e in range(sorts)}

    def in_sort(j, k):
        return 0 <= k < sizes[j] + 2

    relations, supports, enumerators = {}, {}, {}
    for e in range(sorts):
        for rel, idx in ((f"C{e}", 0), (f"D{e}", 1)):
            relations[rel] = lambda args, idx=idx: args[0] == idx
            supports[rel] = lambda b, idx=idx: [(idx,)] if b[0] in (None, idx) else []
            enumerators[rel] = lambda h, idx=idx: [(idx,)] if idx < h else []
    bounds = {e: int(sizes[e]) + 2 for e in range(sorts) if sizes[e] != math.inf}
    s = SortedHaltingStructure(sig, in_sort, relations, supports, bounds, enumerators)
    return s, SortSizeOracle(src, sig)
