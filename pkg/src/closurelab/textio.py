"""Text formats: finite structures and depth-1 limit tables.

Finite structure::

    language { sort X; rel E : X*X; }
    structure { X = {0,1,2}; E = {(0,1),(1,2)}; }

Whitespace is insignificant, ``%`` starts a comment, unary tuples may be
written without parentheses and duplicate tuples are rejected.

Limit table: lines ``R a l value`` where ``a`` is a comma-separated index
tuple and ``value`` is 0/1 or true/false. For fixed (R, a) the function is
the step function through the listed points, False before the first.
"""
from __future__ import annotations

import bisect
import re
from dataclasses import dataclass, field

from .structures import FiniteStructure
from .syntax import Signature


class StructureFormatError(ValueError):
    pass


_TOK = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|([{}();:,*=]))")


def _tokens(text: str) -> list[tuple[str, str, int]]:
    text = "\n".join(line.split("%", 1)[0] for line in text.splitlines())
    out, pos = [], 0
    while True:
        m = _TOK.match(text, pos)
        if not m:
            if text[pos:].strip():
                bad = len(text) - len(text[pos:].lstrip())
                raise StructureFormatError(f"unexpected character {text[bad]!r} at offset {bad}")
            break
        kind = "num" if m.group(1) else "name" if m.group(2) else "punct"
        out.append((kind, m.group(m.lastindex), m.start(m.lastindex)))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


class _Reader:
    def __init__(self, text):
        self.toks = _tokens(text)
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def fail(self, what):
        kind, text, pos = self.tok
        raise StructureFormatError(f"expected {what} at offset {pos}, found {text or 'end of input'!r}")

    def take(self, text=None, kind=None):
        k, t, _ = self.tok
        if (text is not None and t != text) or (kind is not None and k != kind):
            self.fail(repr(text) if text else kind)
        self.i += 1
        return t

    def peek(self, text):
        return self.tok[1] == text and self.tok[0] == "punct"


def parse_structure(text: str) -> FiniteStructure:
    r = _Reader(text)
    r.take("language")
    r.take("{")
    sorts, rels = [], []
    while not r.peek("}"):
        word = r.take(kind="name")
        if word == "sort":
            sorts.append(r.take(kind="name"))
        elif word == "rel":
            name = r.take(kind="name")
            r.take(":")
            ty = [r.take(kind="name")]
            while r.peek("*"):
                r.take("*")
                ty.append(r.take(kind="name"))
            rels.append((name, ty))
        else:
            raise StructureFormatError(f"expected 'sort' or 'rel', found {word!r}")
        r.take(";")
    r.take("}")
    if len(dict(rels)) != len(rels):
        raise StructureFormatError("relation declared twice")
    try:
        sig = Signature.build(sorts, dict(rels))
    except (KeyError, ValueError) as exc:
        raise StructureFormatError(str(exc)) from None
    r.take("structure")
    r.take("{")
    universe, tables = {}, {}
    while not r.peek("}"):
        name = r.take(kind="name")
        r.take("=")
        r.take("{")
        items = []
        while not r.peek("}"):
            if r.peek("("):
                r.take("(")
                tup = [int(r.take(kind="num"))]
                while r.peek(","):
                    r.take(",")
                    tup.append(int(r.take(kind="num")))
                r.take(")")
                items.append(tuple(tup))
            else:
                items.append(int(r.take(kind="num")))
            if r.peek(","):
                r.take(",")
            elif not r.peek("}"):
                r.fail("',' or '}'")
        r.take("}")
        r.take(";")
        if name in universe or name in tables:
            raise StructureFormatError(f"{name} is given twice")
        if sig.has_sort(name):
            if any(isinstance(x, tuple) for x in items):
                raise StructureFormatError(f"sort {name} lists tuples")
            if len(set(items)) != len(items):
                raise StructureFormatError(f"sort {name} lists an element twice")
            universe[sig.sort_index(name)] = items
        elif sig.has_relation(name):
            rows = [x if isinstance(x, tuple) else (x,) for x in items]
            if len(set(rows)) != len(rows):
                dup = next(t for t in rows if rows.count(t) > 1)
                raise StructureFormatError(f"duplicate tuple {dup} in {name}")
            tables[name] = rows
        else:
            raise StructureFormatError(f"{name} is neither a sort nor a relation")
    r.take("}")
    if r.tok[0] != "eof":
        r.fail("end of input")
    for j in range(len(sig.sorts)):
        universe.setdefault(j, [])
    try:
        return FiniteStructure(sig, universe, tables)
    except ValueError as exc:
        raise StructureFormatError(str(exc)) from None


def format_structure(s: FiniteStructure) -> str:
    sig = s.sig
    lines = ["language {"]
    lines += [f"  sort {name};" for name in sig.sorts]
    for name, ty in sig.relations:
        lines.append(f"  rel {name} : {'*'.join(sig.sorts[j] for j in ty)};")
    lines += ["}", "structure {"]
    for j, name in enumerate(sig.sorts):
        lines.append(f"  {name} = {{{','.join(str(k) for k in s.elements(j))}}};")
    for name in sig.relation_names:
        rows = ",".join("(" + ",".join(str(k) for k in t) + ")" for t in sorted(s.tables[name]))
        lines.append(f"  {name} = {{{rows}}};")
    lines.append("}")
    return "\n".join(lines) + "\n"


@dataclass
class LimitTable:
    """Step functions ``points[R][a] = [(l, value), ...]`` sorted by l."""

    points: dict = field(default_factory=dict)

    @classmethod
    def parse(cls, text: str) -> "LimitTable":
        points: dict = {}
        for ln, line in enumerate(text.splitlines(), 1):
            line = line.split("%", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ValueError(f"line {ln}: expected 'R a l value'")
            rel, a, l, value = parts
            try:
                args = tuple(int(x) for x in a.split(","))
                ell = int(l)
            except ValueError:
                raise ValueError(f"line {ln}: bad number in {line!r}") from None
            if value.lower() in ("1", "true"):
                v = True
            elif value.lower() in ("0", "false"):
                v = False
            else:
                raise ValueError(f"line {ln}: value must be 0, 1, true or false")
            row = points.setdefault(rel, {}).setdefault(args, [])
            if any(x == ell for x, _ in row):
                raise ValueError(f"line {ln}: {rel} {a} {l} given twice")
            row.append((ell, v))
        for rows in points.values():
            for row in rows.values():
                row.sort()
        return cls(points)

    def value(self, rel: str, args: tuple, ell: int) -> bool:
        row = self.points.get(rel, {}).get(tuple(args), [])
        i = bisect.bisect_right([x for x, _ in row], ell) - 1
        return row[i][1] if i >= 0 else False

    def function(self, rel: str):
        """As a depth-1 limit function ``(args, (l,)) -> bool``."""
        return lambda args, ells: self.value(rel, args, ells[0])

    def binary(self, rel: str = "f"):
        """As a two-argument 0/1 function ``(n, s)``, for the chain graph."""
        return lambda n, s: int(self.value(rel, (n,), s))
