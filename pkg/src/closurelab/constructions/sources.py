"""Enumeration sources: finite presentations of halting pairs (e, n).

A source lists pairs without repetition. Column ``e`` is the set of ``n``
with ``(e, n)`` listed. Columns named in ``infinite_columns`` are treated
as all of N: machine e halts on every input. That is how the analytic
oracles of the constructions see an infinite domain that no finite
listing could show.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence


@dataclass(frozen=True)
class EnumerationSource:
    pairs: tuple[tuple[int, int], ...] = ()
    infinite_columns: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple((int(e), int(n)) for e, n in self.pairs))
        object.__setattr__(self, "infinite_columns", frozenset(int(e) for e in self.infinite_columns))
        if len(set(self.pairs)) != len(self.pairs):
            raise ValueError("enumeration source repeats a pair")
        if any(e < 0 or n < 0 for e, n in self.pairs):
            raise ValueError("pairs must be natural numbers")
        if any(e < 0 for e in self.infinite_columns):
            raise ValueError("column indices must be natural numbers")

    @classmethod
    def parse(cls, text: str, infinite: str | Iterable[int] = "") -> "EnumerationSource":
        """Read ``"3:0,1,2;5:0"`` (column e: inputs). Pairs are listed column by
        column in the order written."""
        pairs = []
        for chunk in text.split(";"):
            chunk = chunk.strip()
            if not chunk:
                continue
            col, sep, rest = chunk.partition(":")
            if not sep:
                raise ValueError(f"bad source column {chunk!r}; expected e:n,n,...")
            e = _nat(col)
            for item in rest.split(","):
                if item.strip():
                    pairs.append((e, _nat(item)))
        if isinstance(infinite, str):
            inf = [_nat(x) for x in infinite.split(",") if x.strip()]
        else:
            inf = list(infinite)
        return cls(tuple(pairs), frozenset(inf))

    def format(self) -> str:
        cols = []
        for e in sorted({e for e, _ in self.pairs}):
            cols.append(f"{e}:" + ",".join(str(n) for n in self.column(e)))
        return ";".join(cols)

    def columns(self) -> list[int]:
        return sorted({e for e, _ in self.pairs} | set(self.infinite_columns))

    def column(self, e: int) -> list[int]:
        """Listed inputs of column ``e`` in enumeration order."""
        return [n for f, n in self.pairs if f == e]

    def is_infinite(self, e: int) -> bool:
        return e in self.infinite_columns

    def size(self, e: int) -> float:
        """|W_e|: the column size, or math.inf."""
        return math.inf if self.is_infinite(e) else len(self.column(e))

    def halts(self, e: int, n: int) -> bool:
        return self.is_infinite(e) or (e, n) in set(self.pairs)

    def sup(self, e: int) -> float:
        """Largest listed input of column e (-1 when empty, inf when infinite)."""
        if self.is_infinite(e):
            return math.inf
        return max(self.column(e), default=-1)

    @classmethod
    def from_machines(cls, machines: Sequence["TuringMachine"], inputs: int,
                      step_cap: int) -> "EnumerationSource":
        """Dovetail machine e on inputs below ``inputs`` for up to ``step_cap``
        steps each; pairs are listed by halting time, then e, then n."""
        found = []
        for e, m in enumerate(machines):
            for n in range(inputs):
                steps = m.run(n, step_cap)
                if steps is not None:
                    found.append((steps, e, n))
        found.sort()
        return cls(tuple((e, n) for _, e, n in found))


def _nat(text: str) -> int:
    text = text.strip()
    if not text.isdigit():
        raise ValueError(f"expected a natural number, got {text!r}")
    return int(text)


@dataclass(frozen=True)
class TuringMachine:
    """Single-tape machine over symbols {0, 1}; input n is written as n ones.

    ``table[(state, symbol)] = (write, move, next_state)`` with move in
    {-1, 0, 1}; the machine halts when no entry applies.
    """

    table: Mapping[tuple, tuple]
    start: str = "q0"

    def run(self, n: int, step_cap: int) -> Optional[int]:
        """Number of steps to halt on input n, or None if ``step_cap`` is hit."""
        tape = {i: 1 for i in range(n)}
        state, head = self.start, 0
        for step in range(step_cap + 1):
            key = (state, tape.get(head, 0))
            if key not in self.table:
                return step
            if step == step_cap:
                break
            write, move, state = self.table[key]
            tape[head] = write
            head += move
        return None

    @classmethod
    def parse(cls, text: str) -> "TuringMachine":
        """Lines ``state symbol -> write move next``, move one of L, R, S."""
        table, start = {}, None
        moves = {"L": -1, "R": 1, "S": 0}
        for ln, line in enumerate(text.splitlines(), 1):
            line = line.split("%", 1)[0].strip()
            if not line:
                continue
            lhs, arrow, rhs = line.partition("->")
            try:
                if not arrow:
                    raise ValueError
                q, sym = lhs.split()
                w, mv, nxt = rhs.split()
                key = (q, int(sym))
                if key in table:
                    raise ValueError
                table[key] = (int(w), moves[mv], nxt)
            except (ValueError, KeyError):
                raise ValueError(f"line {ln}: bad transition {line!r}") from None
            start = start or q
        return cls(table, start or "q0")
