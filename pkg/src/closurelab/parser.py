"""Parser for the ASCII formula grammar.

::

    formula   := [header ':='] expr
    header    := name '(' decls ';' decls ')'        decl := var [':' Sort]
    expr      := quant | or
    quant     := ('E' | 'A') vars [':' sorts] '.' expr
    or        := and ('|' and)*
    and       := unary ('&' unary)*
    unary     := '!' unary | '(' expr ')' | quant | R '(' vars ')' | v '=' w | v '!=' w

Without a header, the first atom written with a semicolon, as in
``F(x,y;z)``, fixes the partition: the variables before the semicolon are
the left part and every other free variable goes right, in order of first
occurrence. Later semicolons are read as commas. With neither a header nor
a semicolon every free variable is on the right.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import (
    Atom,
    Eq,
    Exists,
    Forall,
    Formula,
    Not,
    PartitionedFormula,
    Signature,
    SortError,
    Var,
    alpha_normalize,
    check_sorts,
    conj,
    disj,
    free_vars,
    format_atom,
)


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


_TOKEN = re.compile(
    r"\s*(?:(?P<assign>:=)|(?P<neq>!=)|(?P<ident>[A-Za-z_][A-Za-z0-9_#+']*)|(?P<punct>[(),;:.!&|=]))"
)


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while True:
        m = _TOKEN.match(text, pos)
        if not m:
            rest = text[pos:]
            stripped = rest.lstrip()
            if not stripped:
                break
            raise FormulaSyntaxError(f"unexpected character {stripped[0]!r}", len(text) - len(stripped))
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(_Tok("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, sig: Signature):
        self.text = text
        self.sig = sig
        self.toks = _tokenize(text)
        self.i = 0
        self.split: tuple[str, ...] | None = None
        self.atom_sorts: list[tuple[Atom, int]] = []

    # token helpers
    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def fail(self, what: str):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise FormulaSyntaxError(f"expected {what}, found {found}", t.pos)

    def accept(self, text: str) -> bool:
        if self.tok.kind != "eof" and self.tok.kind != "ident" and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str):
        if not self.accept(text):
            self.fail(repr(text))

    def ident(self, what: str = "identifier") -> _Tok:
        if self.tok.kind != "ident":
            self.fail(what)
        t = self.tok
        self.i += 1
        return t

    # grammar
    def has_header(self) -> bool:
        return any(t.kind == "assign" for t in self.toks)

    def header(self):
        self.ident("formula name")
        self.expect("(")
        left, right, seen_semi = [], [], False
        cur = left
        if not (self.tok.text == ")" and self.tok.kind == "punct"):
            while True:
                if self.accept(";"):
                    if seen_semi:
                        self.fail("',' or ')'")
                    seen_semi, cur = True, right
                    if self.tok.kind == "punct" and self.tok.text == ")":
                        break
                    continue
                name = self.ident("variable").text
                sort = None
                if self.accept(":"):
                    st = self.ident("sort name")
                    if not self.sig.has_sort(st.text):
                        raise FormulaSyntaxError(f"unknown sort {st.text!r}", st.pos)
                    sort = self.sig.sort_index(st.text)
                cur.append((name, sort))
                if self.accept(","):
                    continue
                if self.tok.kind == "punct" and self.tok.text == ";":
                    continue
                break
        self.expect(")")
        if self.tok.kind != "assign":
            self.fail("':='")
        self.i += 1
        if not seen_semi:
            right, left = left, []
        return left, right

    def expr(self) -> Formula:
        if self.is_quant():
            return self.quant()
        return self.or_()

    def is_quant(self) -> bool:
        return self.tok.kind == "ident" and self.tok.text in ("E", "A") and self.peek().kind == "ident"

    def quant(self) -> Formula:
        kind = self.ident().text
        names = [self.ident("variable")]
        while self.accept(","):
            names.append(self.ident("variable"))
        if self.accept(":"):
            sorts = [self.ident("sort name")]
            while self.accept(","):
                sorts.append(self.ident("sort name"))
            if len(sorts) != len(names):
                raise FormulaSyntaxError(
                    f"{len(names)} quantified variables but {len(sorts)} sorts", sorts[0].pos
                )
            idx = []
            for st in sorts:
                if not self.sig.has_sort(st.text):
                    raise FormulaSyntaxError(f"unknown sort {st.text!r}", st.pos)
                idx.append(self.sig.sort_index(st.text))
        elif len(self.sig.sorts) == 1:
            idx = [0] * len(names)
        else:
            self.fail("':' and sorts for quantified variables")
        self.expect(".")
        body = self.expr()
        vs = tuple(Var(t.text, s) for t, s in zip(names, idx))
        return (Exists if kind == "E" else Forall)(vs, body)

    def or_(self) -> Formula:
        parts = [self.and_()]
        while self.accept("|"):
            parts.append(self.and_())
        return disj(*parts)

    def and_(self) -> Formula:
        parts = [self.unary()]
        while self.accept("&"):
            parts.append(self.unary())
        return conj(*parts)

    def unary(self) -> Formula:
        if self.accept("!"):
            return Not(self.unary())
        if self.accept("("):
            f = self.expr()
            self.expect(")")
            return f
        if self.is_quant():
            return self.quant()
        if self.tok.kind != "ident":
            self.fail("formula")
        name = self.ident()
        if self.accept("("):
            return self.atom(name)
        if self.accept("="):
            return Eq(name.text, self.ident("variable").text)
        if self.tok.kind == "neq":
            self.i += 1
            return Not(Eq(name.text, self.ident("variable").text))
        self.fail("'(' or '='")

    def atom(self, name: _Tok) -> Atom:
        if not self.sig.has_relation(name.text):
            raise FormulaSyntaxError(f"unknown relation {name.text!r}", name.pos)
        args: list[str] = []
        semi_at = None
        if not (self.tok.kind == "punct" and self.tok.text == ")"):
            while True:
                args.append(self.ident("variable").text)
                if self.accept(","):
                    continue
                if self.accept(";"):
                    if semi_at is None:
                        semi_at = len(args)
                    continue
                break
        self.expect(")")
        a = Atom(name.text, tuple(args))
        if semi_at is not None and self.split is None:
            self.split = tuple(args[:semi_at])
        return a


def _infer_sorts(f: Formula, sig: Signature, declared: dict[str, int | None]) -> dict[str, int]:
    env = {k: v for k, v in declared.items() if v is not None}

    def clash(v, got, want, where):
        raise SortError(
            f"sort mismatch in {where}: {v} used as {sig.sorts[got]} and as {sig.sorts[want]}"
        )

    def atoms(g, bound):
        if isinstance(g, Atom):
            ty = sig.relation_type(g.rel)
            if len(ty) != len(g.args):
                raise SortError(f"atom {format_atom(g)}: {g.rel} has arity {len(ty)}")
            for v, s in zip(g.args, ty):
                if v in bound:
                    continue
                if v in env and env[v] != s:
                    clash(v, env[v], s, f"atom {format_atom(g)}")
                env[v] = s
        elif isinstance(g, (Exists, Forall)):
            atoms(g.body, bound | {x.name for x in g.vars})
        elif hasattr(g, "parts"):
            for p in g.parts:
                atoms(p, bound)
        elif isinstance(g, Not):
            atoms(g.body, bound)

    atoms(f, frozenset())
    # propagate through equalities between free variables
    eqs = []

    def collect(g, bound):
        if isinstance(g, Eq):
            if g.left not in bound and g.right not in bound:
                eqs.append(g)
        elif isinstance(g, (Exists, Forall)):
            collect(g.body, bound | {x.name for x in g.vars})
        elif hasattr(g, "parts"):
            for p in g.parts:
                collect(p, bound)
        elif isinstance(g, Not):
            collect(g.body, bound)

    collect(f, frozenset())
    changed = True
    while changed:
        changed = False
        for e in eqs:
            for a, b in ((e.left, e.right), (e.right, e.left)):
                if a in env and b not in env:
                    env[b] = env[a]
                    changed = True
    for v in free_vars(f):
        if v not in env:
            if len(sig.sorts) == 1:
                env[v] = 0
            else:
                raise SortError(f"cannot infer the sort of free variable {v!r}; declare it in a header")
    return env


def parse_formula(text: str, sig: Signature) -> PartitionedFormula:
    """Parse ``text`` into a well-sorted, alpha-normalized PartitionedFormula."""
    p = _Parser(text, sig)
    declared: dict[str, int | None] = {}
    header = None
    if p.has_header():
        header = p.header()
        for name, sort in header[0] + header[1]:
            if name in declared:
                raise FormulaSyntaxError(f"variable {name!r} declared twice", 0)
            declared[name] = sort
    f = p.expr()
    if p.tok.kind != "eof":
        p.fail("end of input")
    fv = free_vars(f)
    env = _infer_sorts(f, sig, declared)
    if header is not None:
        left_names = [n for n, _ in header[0]]
        right_names = [n for n, _ in header[1]]
        undeclared = [v for v in fv if v not in declared]
        if undeclared:
            raise SortError(f"free variables {undeclared} are not declared in the header")
    else:
        left_names = list(p.split or ())
        right_names = [v for v in fv if v not in set(left_names)]
    for v in left_names + right_names:
        if v not in env:
            env[v] = declared.get(v) if declared.get(v) is not None else 0
    left = tuple(Var(v, env[v]) for v in left_names)
    right = tuple(Var(v, env[v]) for v in right_names)
    check_sorts(f, sig, env)
    f = alpha_normalize(f)
    return PartitionedFormula(f, left, right)
