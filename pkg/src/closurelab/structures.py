"""Finite and rule-based many-sorted structures and staged evaluation.

An element is a pair ``(sort, index)`` printed ``Sort#index``. A
:class:`FiniteStructure` lists its elements and relation tables outright. A
:class:`RuleStructure` decides sort membership and relations with Python
callables and, for every relation, offers a *support hint*: given a partial
binding of the argument positions it returns a finite list of candidate
completions, or ``None`` when no finite bound is known.

Evaluation on rule-based structures is staged by a :class:`StageBudget`.
Quantifiers search indices below ``domain_horizon``; a search that could
not be exhausted yields :attr:`Truth.UNKNOWN` instead of a guess.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping, NamedTuple, Optional, Sequence

from .syntax import (
    And,
    Atom,
    Eq,
    Exists,
    Formula,
    Not,
    Or,
    PartitionedFormula,
    Signature,
    SortError,
    free_vars,
)


class Element(NamedTuple):
    sort: int
    index: int


def format_element(e: Element, sig: Signature) -> str:
    return f"{sig.sorts[e.sort]}#{e.index}"


def parse_element(text: str, sig: Signature) -> Element:
    sort, sep, idx = text.strip().partition("#")
    if not sep or not idx.isdigit():
        raise ValueError(f"bad element {text!r}; expected Sort#k")
    return Element(sig.sort_index(sort), int(idx))


def format_tuple(elems: Sequence[Element], sig: Signature) -> str:
    return "(" + ",".join(format_element(e, sig) for e in elems) + ")"


class Truth(enum.Enum):
    TRUE = "True"
    FALSE = "False"
    UNKNOWN = "Unknown"

    @classmethod
    def of(cls, value: Optional[bool]) -> "Truth":
        if value is None:
            return cls.UNKNOWN
        return cls.TRUE if value else cls.FALSE

    def __bool__(self):
        raise TypeError("Truth is three-valued; compare against Truth.TRUE explicitly")


@dataclass(frozen=True)
class StageBudget:
    domain_horizon: int = 64
    closure_iterations: int = 16
    solution_cap: int = 64

    def __post_init__(self):
        for name in ("domain_horizon", "closure_iterations", "solution_cap"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")


Support = Optional[list]


class Structure:
    """Common interface of finite and rule-based structures."""

    sig: Signature
    is_finite: bool = False

    def in_sort(self, sort: int, index: int) -> bool:
        raise NotImplementedError

    def sort_bound(self, sort: int) -> Optional[int]:
        """An index bound certifying the sort finite, or None."""
        raise NotImplementedError

    def elements(self, sort: int, horizon: Optional[int] = None) -> list[int]:
        """Indices of elements of ``sort`` below ``horizon``."""
        raise NotImplementedError

    def exhausted(self, sort: int, horizon: int) -> bool:
        """True when all elements of ``sort`` lie below ``horizon``."""
        bound = self.sort_bound(sort)
        return bound is not None and bound <= horizon

    def holds_raw(self, rel: str, args: tuple[int, ...]) -> bool:
        raise NotImplementedError

    def support(self, rel: str, binding: tuple[Optional[int], ...]) -> Support:
        raise NotImplementedError

    def contains(self, e: Element) -> bool:
        return 0 <= e.sort < len(self.sig.sorts) and e.index >= 0 and self.in_sort(e.sort, e.index)

    def holds(self, rel: str, args: Sequence[Element]) -> bool:
        ty = self.sig.relation_type(rel)
        if len(ty) != len(args):
            raise SortError(f"{rel} expects {len(ty)} arguments, got {len(args)}")
        for e, s in zip(args, ty):
            if e.sort != s:
                raise SortError(f"{rel}: element {format_element(e, self.sig)} has the wrong sort")
        return self.holds_raw(rel, tuple(e.index for e in args))

    def element_name(self, e: Element) -> str:
        return format_element(e, self.sig)

    def lookup(self, text: str) -> Element:
        """Resolve ``Sort#k`` or a structure-specific element name."""
        e = parse_element(text, self.sig)
        if not self.contains(e):
            raise ValueError(f"{text} is not an element of the structure")
        return e


class FiniteStructure(Structure):
    """Explicit element lists and relation tables (indices, not Elements)."""

    is_finite = True

    def __init__(self, sig: Signature, universe: Mapping[int, Iterable[int]], tables: Mapping[str, Iterable[tuple]]):
        self.sig = sig
        self.universe: dict[int, tuple[int, ...]] = {}
        for j in range(len(sig.sorts)):
            elems = sorted(set(universe.get(j, ())))
            if any(k < 0 for k in elems):
                raise ValueError("element indices must be natural numbers")
            self.universe[j] = tuple(elems)
        self._members = {j: frozenset(v) for j, v in self.universe.items()}
        self.tables: dict[str, frozenset] = {}
        for name, ty in sig.relations:
            rows = frozenset(tuple(r) for r in tables.get(name, ()))
            for row in rows:
                if len(row) != len(ty):
                    raise ValueError(f"{name}: tuple {row} has the wrong arity")
                for k, j in zip(row, ty):
                    if k not in self._members[j]:
                        raise ValueError(f"{name}: tuple {row} uses {sig.sorts[j]}#{k}, not in the universe")
            self.tables[name] = rows
        unknown = set(tables) - set(sig.relation_names)
        if unknown:
            raise ValueError(f"tables for undeclared relations {sorted(unknown)}")
        self._index: dict = {}

    def in_sort(self, sort, index):
        return index in self._members[sort]

    def sort_bound(self, sort):
        elems = self.universe[sort]
        return elems[-1] + 1 if elems else 0

    def elements(self, sort, horizon=None):
        elems = self.universe[sort]
        if horizon is None:
            return list(elems)
        return [k for k in elems if k < horizon]

    def exhausted(self, sort, horizon):
        return True

    def holds_raw(self, rel, args):
        return args in self.tables[rel]

    def support(self, rel, binding):
        mask = tuple(b is not None for b in binding)
        key = (rel, mask)
        idx = self._index.get(key)
        if idx is None:
            idx = {}
            for row in self.tables[rel]:
                idx.setdefault(tuple(v for v, m in zip(row, mask) if m), []).append(row)
            self._index[key] = idx
        return list(idx.get(tuple(b for b in binding if b is not None), ()))

    def all_elements(self) -> list[Element]:
        return [Element(j, k) for j in range(len(self.sig.sorts)) for k in self.universe[j]]

    def reduct(self, relation_names: Iterable[str]) -> "FiniteStructure":
        sig = self.sig.restrict(relation_names)
        return FiniteStructure(sig, self.universe, {n: self.tables[n] for n in sig.relation_names})

    def same_tables(self, other: "FiniteStructure") -> bool:
        return (
            self.sig == other.sig
            and self.universe == other.universe
            and self.tables == other.tables
        )

    def __repr__(self):
        sizes = {self.sig.sorts[j]: len(v) for j, v in self.universe.items()}
        return f"FiniteStructure(sorts={sizes}, relations={list(self.sig.relation_names)})"


class RuleStructure(Structure):
    """A computable structure given by decision procedures.

    ``in_sort(sort, index)`` decides membership; ``relations[name](args)``
    decides a relation on index tuples; ``supports[name](binding)`` is the
    mandatory support hint; ``sort_bounds`` maps sorts to certified index
    bounds for sorts known to be finite. ``enumerators[name](horizon)`` may
    list all tuples with every index below ``horizon``; it speeds up
    truncation of sparse relations.
    """

    def __init__(
        self,
        sig: Signature,
        in_sort: Callable[[int, int], bool],
        relations: Mapping[str, Callable[[tuple], bool]],
        supports: Mapping[str, Callable[[tuple], Support]],
        sort_bounds: Optional[Mapping[int, int]] = None,
        enumerators: Optional[Mapping[str, Callable[[int], Iterable[tuple]]]] = None,
        names: Optional[Mapping[str, Element]] = None,
    ):
        self.sig = sig
        self._in_sort = in_sort
        missing = set(sig.relation_names) - set(relations)
        if missing:
            raise ValueError(f"no decision procedure for {sorted(missing)}")
        missing = set(sig.relation_names) - set(supports)
        if missing:
            raise ValueError(f"no support hint for {sorted(missing)}")
        self.relations = dict(relations)
        self.supports = dict(supports)
        self.sort_bounds = dict(sort_bounds or {})
        self.enumerators = dict(enumerators or {})
        self.names = dict(names or {})

    def in_sort(self, sort, index):
        return self._in_sort(sort, index)

    def sort_bound(self, sort):
        return self.sort_bounds.get(sort)

    def elements(self, sort, horizon=None):
        if horizon is None:
            horizon = self.sort_bound(sort)
            if horizon is None:
                raise ValueError(f"sort {self.sig.sorts[sort]} is not certified finite; pass a horizon")
        return [k for k in range(horizon) if self._in_sort(sort, k)]

    def holds_raw(self, rel, args):
        return bool(self.relations[rel](args))

    def support(self, rel, binding):
        return self.supports[rel](tuple(binding))

    def lookup(self, text):
        if text in self.names:
            return self.names[text]
        return super().lookup(text)

    def element_name(self, e):
        for name, x in self.names.items():
            if x == e:
                return name
        return format_element(e, self.sig)

    def __repr__(self):
        return f"RuleStructure(sorts={list(self.sig.sorts)}, relations={list(self.sig.relation_names)})"


# ------------------------------------------------------------- evaluation


def _check_assignment(s: Structure, f: Formula, assignment: Mapping[str, Element], sorts=None) -> None:
    fv = set(free_vars(f))
    if set(assignment) != fv:
        raise SortError(f"assignment covers {sorted(assignment)} but free variables are {sorted(fv)}")
    for v, e in assignment.items():
        if not isinstance(e, Element):
            raise SortError(f"{v} is not assigned an Element")
        if sorts is not None and sorts.get(v, e.sort) != e.sort:
            raise SortError(f"{v} must have sort {s.sig.sorts[sorts[v]]}")
        if not s.contains(e):
            raise SortError(f"{v}: {format_element(e, s.sig)} is not an element of the structure")


def _eval(s: Structure, f: Formula, env: dict, horizon: int) -> Optional[bool]:
    if isinstance(f, Atom):
        ty = s.sig.relation_type(f.rel)
        args = []
        for v, want in zip(f.args, ty):
            e = env[v]
            if e.sort != want:
                raise SortError(f"{f.rel}: {v} has sort {s.sig.sorts[e.sort]}, expected {s.sig.sorts[want]}")
            args.append(e.index)
        return s.holds_raw(f.rel, tuple(args))
    if isinstance(f, Eq):
        a, b = env[f.left], env[f.right]
        if a.sort != b.sort:
            raise SortError(f"equality between sorts {s.sig.sorts[a.sort]} and {s.sig.sorts[b.sort]}")
        return a == b
    if isinstance(f, Not):
        r = _eval(s, f.body, env, horizon)
        return None if r is None else not r
    if isinstance(f, And):
        unknown = False
        for p in f.parts:
            r = _eval(s, p, env, horizon)
            if r is False:
                return False
            unknown |= r is None
        return None if unknown else True
    if isinstance(f, Or):
        unknown = False
        for p in f.parts:
            r = _eval(s, p, env, horizon)
            if r is True:
                return True
            unknown |= r is None
        return None if unknown else False
    # quantifiers
    want = isinstance(f, Exists)  # value that decides the search
    pools = []
    exhausted = True
    for v in f.vars:
        if s.is_finite:
            pools.append(s.elements(v.sort))
        else:
            pools.append(s.elements(v.sort, horizon))
            exhausted &= s.exhausted(v.sort, horizon)
    unknown = False
    inner = dict(env)
    for combo in itertools.product(*pools):
        for v, k in zip(f.vars, combo):
            inner[v.name] = Element(v.sort, k)
        r = _eval(s, f.body, inner, horizon)
        if r is want:
            return want
        unknown |= r is None
    if unknown or not exhausted:
        return None
    return not want


def evaluate(s: Structure, f: Formula, assignment: Mapping[str, Element], budget: Optional[StageBudget] = None) -> Truth:
    """Truth value of ``f`` under ``assignment``; never UNKNOWN on finite structures."""
    _check_assignment(s, f, assignment)
    budget = budget or StageBudget()
    return Truth.of(_eval(s, f, dict(assignment), budget.domain_horizon))


def satisfies(s: Structure, pf: PartitionedFormula, a: Sequence[Element], b: Sequence[Element],
              budget: Optional[StageBudget] = None) -> Truth:
    env = {v.name: e for v, e in zip(pf.left, a)}
    env.update({v.name: e for v, e in zip(pf.right, b)})
    return evaluate(s, pf.formula, env, budget)


# ------------------------------------------------------------- truncation


def truncate(s: Structure, horizon: int) -> FiniteStructure:
    """The induced finite substructure on indices below ``horizon``."""
    if s.is_finite:
        raise ValueError("truncate expects a rule-based structure")
    if horizon < 1:
        raise ValueError("horizon must be positive")
    universe = {j: s.elements(j, horizon) for j in range(len(s.sig.sorts))}
    tables = {}
    for name, ty in s.sig.relations:
        enum_fn = getattr(s, "enumerators", {}).get(name)
        if enum_fn is not None:
            rows = {
                tuple(r) for r in enum_fn(horizon)
                if all(k < horizon and s.in_sort(j, k) for k, j in zip(r, ty))
            }
        else:
            rows = {r for r in itertools.product(*(universe[j] for j in ty)) if s.holds_raw(name, r)}
        tables[name] = rows
    return FiniteStructure(s.sig, universe, tables)


# ----------------------------------------------------------- brute force


def right_tuples(s: FiniteStructure, types: Sequence[int]) -> Iterator[tuple[Element, ...]]:
    pools = [[Element(j, k) for k in s.elements(j)] for j in types]
    return itertools.product(*pools)


def brute_force_count(s: Structure, pf: PartitionedFormula, a: Sequence[Element]) -> int:
    """Exact |{b : s |= pf(a; b)}| by exhaustive enumeration (finite ``s`` only)."""
    if not s.is_finite:
        raise ValueError("brute_force_count needs a finite structure")
    a = tuple(a)
    if tuple(e.sort for e in a) != pf.left_type:
        raise SortError("tuple does not match the left type of the formula")
    env = {v.name: e for v, e in zip(pf.left, a)}
    count = 0
    for b in right_tuples(s, pf.right_type):
        env.update({v.name: e for v, e in zip(pf.right, b)})
        if _eval(s, pf.formula, env, 0):
            count += 1
    return count


class StructureRegistry:
    """Codes for structures; a stand-in for Goedel numbering."""

    def __init__(self):
        self._by_code: dict[int, Structure] = {}

    def register(self, structure: Structure, code: Optional[int] = None) -> int:
        if code is None:
            code = max(self._by_code, default=-1) + 1
        if code in self._by_code:
            raise ValueError(f"code {code} already registered")
        if code < 0:
            raise ValueError("codes are natural numbers")
        self._by_code[code] = structure
        return code

    def __getitem__(self, code: int) -> Structure:
        return self._by_code[code]

    def __contains__(self, code) -> bool:
        return code in self._by_code

    def __len__(self):
        return len(self._by_code)

    def codes(self) -> list[int]:
        return sorted(self._by_code)
