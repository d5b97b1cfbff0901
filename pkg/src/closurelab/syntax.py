"""Many-sorted relational signatures and first-order formula trees.

Formulas are immutable trees of frozen dataclasses. Variables are plain
strings inside atoms and equalities; quantifiers carry typed variables
(:class:`Var`) so every bound variable has a sort. Free-variable sorts live
on :class:`PartitionedFormula`, which also fixes the ``(left ; right)``
split used by closure queries.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence, Union


class SortError(ValueError):
    """A formula or assignment that is not well-sorted."""


@dataclass(frozen=True)
class Signature:
    """Sorts plus typed relation symbols.

    ``relations`` is a tuple of ``(name, type)`` pairs where ``type`` is a
    tuple of sort indices.
    """

    sorts: tuple[str, ...]
    relations: tuple[tuple[str, tuple[int, ...]], ...] = ()
    _types: dict = field(init=False, repr=False, compare=False, hash=False)
    _sort_index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "sorts", tuple(self.sorts))
        rels = tuple((name, tuple(ty)) for name, ty in self.relations)
        object.__setattr__(self, "relations", rels)
        if len(set(self.sorts)) != len(self.sorts):
            raise ValueError(f"duplicate sort names in {self.sorts}")
        types = {}
        for name, ty in rels:
            if name in types:
                raise ValueError(f"duplicate relation name {name!r}")
            for j in ty:
                if not 0 <= j < len(self.sorts):
                    raise ValueError(f"relation {name!r}: sort index {j} out of range")
            types[name] = ty
        object.__setattr__(self, "_types", types)
        object.__setattr__(self, "_sort_index", {s: i for i, s in enumerate(self.sorts)})

    @classmethod
    def build(cls, sorts: Sequence[str], relations: Mapping[str, Sequence[str]]) -> "Signature":
        """Build from sort names, with relation types given as sort names."""
        index = {s: i for i, s in enumerate(sorts)}
        try:
            rels = tuple((name, tuple(index[s] for s in ty)) for name, ty in relations.items())
        except KeyError as exc:
            raise ValueError(f"unknown sort {exc.args[0]!r}") from None
        return cls(tuple(sorts), rels)

    def sort_index(self, name: str) -> int:
        try:
            return self._sort_index[name]
        except KeyError:
            raise ValueError(f"unknown sort {name!r}") from None

    def has_sort(self, name: str) -> bool:
        return name in self._sort_index

    def relation_type(self, name: str) -> tuple[int, ...]:
        try:
            return self._types[name]
        except KeyError:
            raise ValueError(f"unknown relation {name!r}") from None

    def has_relation(self, name: str) -> bool:
        return name in self._types

    @property
    def relation_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.relations)

    def extend(self, sorts: Sequence[str] = (), relations: Iterable[tuple[str, Sequence[int]]] = ()) -> "Signature":
        return Signature(self.sorts + tuple(sorts), self.relations + tuple((n, tuple(t)) for n, t in relations))

    def restrict(self, relation_names: Iterable[str]) -> "Signature":
        keep = set(relation_names)
        return Signature(self.sorts, tuple(r for r in self.relations if r[0] in keep))


class Var(NamedTuple):
    name: str
    sort: int


# ---------------------------------------------------------------- formulas


@dataclass(frozen=True)
class Atom:
    rel: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class Eq:
    left: str
    right: str


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    parts: tuple["Formula", ...]

    def __post_init__(self):
        if len(self.parts) < 2:
            raise ValueError("And needs at least two parts; use conj()")


@dataclass(frozen=True)
class Or:
    parts: tuple["Formula", ...]

    def __post_init__(self):
        if len(self.parts) < 2:
            raise ValueError("Or needs at least two parts; use disj()")


@dataclass(frozen=True)
class Exists:
    vars: tuple[Var, ...]
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    vars: tuple[Var, ...]
    body: "Formula"


Formula = Union[Atom, Eq, Not, And, Or, Exists, Forall]
Quantifier = (Exists, Forall)


def conj(*parts: Formula) -> Formula:
    if not parts:
        raise ValueError("empty conjunction")
    return parts[0] if len(parts) == 1 else And(tuple(parts))


def disj(*parts: Formula) -> Formula:
    if not parts:
        raise ValueError("empty disjunction")
    return parts[0] if len(parts) == 1 else Or(tuple(parts))


def tuple_eq(left: Sequence[str], right: Sequence[str]) -> Formula:
    """Componentwise equality of two variable tuples of equal length."""
    if len(left) != len(right) or not left:
        raise ValueError("tuple equality needs two nonempty tuples of equal length")
    return conj(*(Eq(u, v) for u, v in zip(left, right)))


def tuple_neq(left: Sequence[str], right: Sequence[str]) -> Formula:
    if len(left) != len(right) or not left:
        raise ValueError("tuple inequality needs two nonempty tuples of equal length")
    return disj(*(Not(Eq(u, v)) for u, v in zip(left, right)))


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, (And, Or)):
        return f.parts
    if isinstance(f, (Not, Exists, Forall)):
        return (f.body,)
    return ()


def free_vars(f: Formula) -> tuple[str, ...]:
    """Free variables in order of first occurrence."""
    out: dict[str, None] = {}

    def walk(g: Formula, bound: frozenset):
        if isinstance(g, Atom):
            for v in g.args:
                if v not in bound:
                    out.setdefault(v)
        elif isinstance(g, Eq):
            for v in (g.left, g.right):
                if v not in bound:
                    out.setdefault(v)
        elif isinstance(g, (Exists, Forall)):
            walk(g.body, bound | {v.name for v in g.vars})
        else:
            for c in children(g):
                walk(c, bound)

    walk(f, frozenset())
    return tuple(out)


def all_var_names(f: Formula) -> set[str]:
    names: set[str] = set()
    for g in subformulas(f):
        if isinstance(g, Atom):
            names.update(g.args)
        elif isinstance(g, Eq):
            names.update((g.left, g.right))
        elif isinstance(g, (Exists, Forall)):
            names.update(v.name for v in g.vars)
    return names


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    for c in children(f):
        yield from subformulas(c)


def relations_used(f: Formula) -> set[str]:
    return {g.rel for g in subformulas(f) if isinstance(g, Atom)}


# ------------------------------------------------------------- classifiers


def quantifier_rank(f: Formula) -> int:
    """Quantifier rank, counting each variable of a tuple quantifier."""
    if isinstance(f, (Atom, Eq)):
        return 0
    if isinstance(f, Not):
        return quantifier_rank(f.body)
    if isinstance(f, (And, Or)):
        return max(quantifier_rank(p) for p in f.parts)
    return len(f.vars) + quantifier_rank(f.body)


def bc_sigma_level(f: Formula) -> int:
    """Least n certifying ``f`` as a Boolean combination of Sigma_n formulas.

    Purely syntactic: a quantifier block (of either kind) over a body of
    level m has level m + 1. No prenexing is attempted, so this is an upper
    bound rather than the semantic minimum.
    """
    if isinstance(f, (Atom, Eq)):
        return 0
    if isinstance(f, Not):
        return bc_sigma_level(f.body)
    if isinstance(f, (And, Or)):
        return max(bc_sigma_level(p) for p in f.parts)
    return bc_sigma_level(f.body) + 1


# ---------------------------------------------------------- sort checking


def check_sorts(f: Formula, sig: Signature, env: Mapping[str, int]) -> None:
    """Raise SortError unless ``f`` is well-sorted with free sorts ``env``."""

    def walk(g: Formula, env: Mapping[str, int]):
        if isinstance(g, Atom):
            ty = sig.relation_type(g.rel)
            if len(ty) != len(g.args):
                raise SortError(f"atom {format_atom(g)}: {g.rel} has arity {len(ty)}")
            for pos, (v, want) in enumerate(zip(g.args, ty)):
                if v not in env:
                    raise SortError(f"atom {format_atom(g)}: variable {v!r} has no sort")
                if env[v] != want:
                    raise SortError(
                        f"sort mismatch in atom {format_atom(g)}: {v} has sort "
                        f"{sig.sorts[env[v]]} but position {pos} expects {sig.sorts[want]}"
                    )
        elif isinstance(g, Eq):
            for v in (g.left, g.right):
                if v not in env:
                    raise SortError(f"equality {g.left} = {g.right}: variable {v!r} has no sort")
            if env[g.left] != env[g.right]:
                raise SortError(
                    f"sort mismatch in equality {g.left} = {g.right}: "
                    f"{sig.sorts[env[g.left]]} vs {sig.sorts[env[g.right]]}"
                )
        elif isinstance(g, (Exists, Forall)):
            inner = dict(env)
            for v in g.vars:
                if not 0 <= v.sort < len(sig.sorts):
                    raise SortError(f"quantified variable {v.name}: bad sort index {v.sort}")
                inner[v.name] = v.sort
            walk(g.body, inner)
        else:
            for c in children(g):
                walk(c, env)

    walk(f, env)


# -------------------------------------------------------------- renaming


def fresh_name(base: str, used: set[str]) -> str:
    if base not in used:
        return base
    for i in itertools.count(1):
        cand = f"{base}_{i}"
        if cand not in used:
            return cand
    raise AssertionError  # unreachable


def rename_free(f: Formula, mapping: Mapping[str, str]) -> Formula:
    """Substitute free variables by name. Bound variables that would capture
    a substituted name are renamed first."""
    if not mapping:
        return f
    targets = set(mapping.values())

    def walk(g: Formula, m: Mapping[str, str]) -> Formula:
        if isinstance(g, Atom):
            return Atom(g.rel, tuple(m.get(v, v) for v in g.args))
        if isinstance(g, Eq):
            return Eq(m.get(g.left, g.left), m.get(g.right, g.right))
        if isinstance(g, Not):
            return Not(walk(g.body, m))
        if isinstance(g, (And, Or)):
            return type(g)(tuple(walk(p, m) for p in g.parts))
        inner = {k: v for k, v in m.items() if k not in {x.name for x in g.vars}}
        new_vars = []
        used = all_var_names(g) | targets | set(m)
        for x in g.vars:
            if x.name in targets:
                nn = fresh_name(x.name, used)
                used.add(nn)
                inner[x.name] = nn
                new_vars.append(Var(nn, x.sort))
            else:
                new_vars.append(x)
        return type(g)(tuple(new_vars), walk(g.body, inner))

    return walk(f, mapping)


def alpha_normalize(f: Formula, reserved: Iterable[str] = ()) -> Formula:
    """Rename bound variables so that no name is bound twice and no bound
    name coincides with a free or reserved one. Identity on formulas that
    already satisfy this."""
    used = set(free_vars(f)) | set(reserved)

    def walk(g: Formula, m: dict[str, str]) -> Formula:
        if isinstance(g, Atom):
            return Atom(g.rel, tuple(m.get(v, v) for v in g.args))
        if isinstance(g, Eq):
            return Eq(m.get(g.left, g.left), m.get(g.right, g.right))
        if isinstance(g, Not):
            return Not(walk(g.body, m))
        if isinstance(g, (And, Or)):
            return type(g)(tuple(walk(p, m) for p in g.parts))
        inner = dict(m)
        new_vars = []
        for x in g.vars:
            nn = fresh_name(x.name, used)
            used.add(nn)
            inner[x.name] = nn
            new_vars.append(Var(nn, x.sort))
        return type(g)(tuple(new_vars), walk(g.body, inner))

    return walk(f, {})


# -------------------------------------------------- partitioned formulas


@dataclass(frozen=True)
class PartitionedFormula:
    """A formula with its free variables split as ``(left ; right)``."""

    formula: Formula
    left: tuple[Var, ...]
    right: tuple[Var, ...]

    def __post_init__(self):
        object.__setattr__(self, "left", tuple(Var(*v) for v in self.left))
        object.__setattr__(self, "right", tuple(Var(*v) for v in self.right))
        names = [v.name for v in self.left + self.right]
        if len(set(names)) != len(names):
            raise ValueError(f"partition repeats a variable: {names}")
        fv = set(free_vars(self.formula))
        if fv != set(names):
            missing = sorted(fv - set(names))
            extra = sorted(set(names) - fv)
            raise ValueError(f"partition does not match free variables (missing {missing}, extra {extra})")

    @classmethod
    def make(cls, formula: Formula, left, right, sig: Signature) -> "PartitionedFormula":
        """Construct, check sorts and alpha-normalize bound variables."""
        pf = cls(formula, tuple(left), tuple(right))
        formula = alpha_normalize(formula)
        check_sorts(formula, sig, pf.sorts)
        return cls(formula, pf.left, pf.right)

    @property
    def variables(self) -> tuple[Var, ...]:
        return self.left + self.right

    @property
    def sorts(self) -> dict[str, int]:
        return {v.name: v.sort for v in self.variables}

    @property
    def left_type(self) -> tuple[int, ...]:
        return tuple(v.sort for v in self.left)

    @property
    def right_type(self) -> tuple[int, ...]:
        return tuple(v.sort for v in self.right)

    def check(self, sig: Signature) -> None:
        check_sorts(self.formula, sig, self.sorts)


def repartition(pf: PartitionedFormula, new_left: Sequence[str]) -> PartitionedFormula:
    """Same formula, new split; the rest become the right part, in the
    order they had in ``left + right``."""
    by_name = {v.name: v for v in pf.variables}
    if len(set(new_left)) != len(new_left):
        raise ValueError(f"repeated variable in {list(new_left)}")
    for name in new_left:
        if name not in by_name:
            raise ValueError(f"{name!r} is not a free variable of the formula")
    left = tuple(by_name[n] for n in new_left)
    right = tuple(v for v in pf.variables if v.name not in set(new_left))
    return PartitionedFormula(pf.formula, left, right)


# ---------------------------------------------------------------- printing


def format_atom(a: Atom) -> str:
    return f"{a.rel}({','.join(a.args)})"


def format_formula(f: Formula, sig: Signature) -> str:
    """Print in the ASCII grammar accepted by :func:`closurelab.parser.parse_formula`."""

    def prim(g: Formula) -> str:
        # operand of ! : atoms and parenthesised things
        if isinstance(g, Atom):
            return format_atom(g)
        if isinstance(g, Not) and not isinstance(g.body, Eq):
            return "!" + prim(g.body)
        return "(" + show(g) + ")"

    def operand(g: Formula) -> str:
        if isinstance(g, (Exists, Forall, And, Or)):
            return "(" + show(g) + ")"
        return show(g)

    def show(g: Formula) -> str:
        if isinstance(g, Atom):
            return format_atom(g)
        if isinstance(g, Eq):
            return f"{g.left} = {g.right}"
        if isinstance(g, Not):
            if isinstance(g.body, Eq):
                return f"{g.body.left} != {g.body.right}"
            return "!" + prim(g.body)
        if isinstance(g, And):
            return " & ".join(operand(p) for p in g.parts)
        if isinstance(g, Or):
            return " | ".join(operand(p) for p in g.parts)
        q = "E" if isinstance(g, Exists) else "A"
        names = ",".join(v.name for v in g.vars)
        sorts = ",".join(sig.sorts[v.sort] for v in g.vars)
        return f"{q} {names} : {sorts} . {show(g.body)}"

    return show(f)


def format_partitioned(pf: PartitionedFormula, sig: Signature, name: str = "phi") -> str:
    def decl(vs):
        return ", ".join(f"{v.name}:{sig.sorts[v.sort]}" for v in vs)

    return f"{name}({decl(pf.left)} ; {decl(pf.right)}) := {format_formula(pf.formula, sig)}"
