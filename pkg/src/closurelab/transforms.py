"""Structure and formula transforms.

* :func:`augment_with_nat` adds a fresh sort ``N`` carrying a successor
  relation ``S``; the element ``N#l`` plays the role of the numeral l.
* :func:`gamma_prime` turns a formula whose last variable ranges over ``N``
  and changes truth value at most once along ``N`` into one that holds
  exactly when the eventual value is True.
* :func:`limit_encode` replaces each relation R by a computable R+ with n
  extra ``N`` arguments whose iterated limit is R, and builds the formula
  recovering R by iterating :func:`gamma_prime`.
* :func:`morleyize` names chosen formulas by fresh relation symbols.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .structures import FiniteStructure, RuleStructure, Structure, right_tuples, _eval
from .syntax import (
    And,
    Atom,
    Exists,
    Forall,
    Not,
    Or,
    PartitionedFormula,
    Signature,
    Var,
    all_var_names,
    alpha_normalize,
    bc_sigma_level,
    fresh_name,
    rename_free,
)


class FlipViolation(ValueError):
    """A limit function changed value more than once along one coordinate."""

    def __init__(self, rel: str, args: tuple, prefix: tuple, flips: list[int]):
        super().__init__(
            f"{rel}: more than one flip for a={args} prefix={prefix} (flips after l in {flips})"
        )
        self.rel, self.tuple, self.prefix, self.flips = rel, args, prefix, flips


# ------------------------------------------------------------ copy of N


def augment_with_nat(s: Structure, sort: str = "N", succ: str = "S") -> RuleStructure:
    """Add a sort ``sort`` whose index-l element is the numeral l, with
    ``succ`` the graph of the successor function on it."""
    if s.sig.has_sort(sort):
        raise ValueError(f"sort {sort!r} already exists")
    if s.sig.has_relation(succ):
        raise ValueError(f"relation {succ!r} already exists")
    n = len(s.sig.sorts)
    sig = s.sig.extend([sort], [(succ, (n, n))])

    def in_sort(j, k):
        return k >= 0 if j == n else s.in_sort(j, k)

    def succ_support(binding):
        a, b = binding
        if a is not None:
            return [(a, a + 1)] if b is None or b == a + 1 else []
        if b is not None:
            return [(b - 1, b)] if b > 0 else []
        return None

    relations = {name: (lambda args, name=name: s.holds_raw(name, args)) for name in s.sig.relation_names}
    relations[succ] = lambda args: args[1] == args[0] + 1
    supports = {name: (lambda b, name=name: s.support(name, b)) for name in s.sig.relation_names}
    supports[succ] = succ_support
    bounds = {j: s.sort_bound(j) for j in range(n) if s.sort_bound(j) is not None}
    enumerators = {succ: lambda h: [(i, i + 1) for i in range(h - 1)]}
    if isinstance(s, FiniteStructure):
        enumerators.update({name: (lambda h, name=name: s.tables[name]) for name in s.sig.relation_names})
    elif isinstance(s, RuleStructure):
        enumerators.update(s.enumerators)
    names = dict(getattr(s, "names", {}))
    return RuleStructure(sig, in_sort, relations, supports, bounds, enumerators, names)


# ------------------------------------------------------------ gamma prime


def gamma_prime(gamma: PartitionedFormula, sig: Signature, nat_sort: str = "N",
                succ: str = "S") -> PartitionedFormula:
    """``(A y:N . gamma(x, y)) | (E y, z:N . S(y,z) & !gamma(x, y) & gamma(x, z))``.

    ``y`` is the last free variable of ``gamma`` (in left-then-right order);
    the result keeps the remaining free variables and their partition.
    """
    n = sig.sort_index(nat_sort)
    if not gamma.variables:
        raise ValueError("gamma has no free variables")
    y = gamma.variables[-1]
    if y.sort != n:
        raise ValueError(f"last variable {y.name} is not of sort {nat_sort}")
    used = all_var_names(gamma.formula) | {v.name for v in gamma.variables}
    y1 = fresh_name(y.name, used)
    used.add(y1)
    z1 = fresh_name(y.name + "_next", used)
    used.add(z1)
    body_y = rename_free(gamma.formula, {y.name: y1})
    body_z = rename_free(gamma.formula, {y.name: z1})
    formula = Or((
        Forall((Var(y1, n),), body_y),
        Exists((Var(y1, n), Var(z1, n)), And((Atom(succ, (y1, z1)), Not(body_y), body_z))),
    ))
    left = tuple(v for v in gamma.left if v != y)
    right = tuple(v for v in gamma.right if v != y)
    formula = alpha_normalize(formula, reserved=[v.name for v in left + right])
    return PartitionedFormula.make(formula, left, right, sig)


# ------------------------------------------------------- limit encoding

LimitFunction = Callable[[tuple, tuple], bool]


@dataclass
class LimitPresentation:
    """A base structure containing a copy of N plus, for each other relation
    R, a total procedure ``functions[R](a, (l0, ..., l_{n-1}))`` whose
    iterated limit (innermost coordinate first) is R.

    ``a`` is a tuple of element indices of R's type. ``scan`` is how far
    along the last coordinate each evaluation checks for a second flip.
    """

    base: Structure
    functions: Mapping[str, LimitFunction]
    depth: int
    nat_sort: str = "N"
    succ: str = "S"
    scan: int = 32
    _seen: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        sig = self.base.sig
        if self.depth < 0:
            raise ValueError("depth must be a natural number")
        n = sig.sort_index(self.nat_sort)
        if sig.relation_type(self.succ) != (n, n):
            raise ValueError(f"{self.succ} must have type {self.nat_sort}*{self.nat_sort}")
        others = set(sig.relation_names) - {self.succ}
        if set(self.functions) != others:
            raise ValueError(f"need limit functions for exactly {sorted(others)}")

    def value(self, rel: str, args: tuple, ells: tuple) -> bool:
        """f_{rel,depth}(args, ells), checking the last coordinate for flips."""
        if self.depth == 0:
            return bool(self.functions[rel](args, ()))
        prefix = ells[:-1]
        key = (rel, args, prefix)
        seen = self._seen.get(key, -1)
        last = ells[-1]
        if last + 1 > seen:
            upto = max(last + 2, self.scan)
            self._flip_check(rel, args, prefix, upto)
            self._seen[key] = upto - 1
        out = self.functions[rel](args, ells)
        if not isinstance(out, bool):
            raise TypeError(f"limit function for {rel} returned {out!r}, not a bool")
        return out

    def _flip_check(self, rel, args, prefix, upto):
        vals = [self.functions[rel](args, prefix + (l,)) for l in range(upto)]
        flips = [l for l in range(upto - 1) if vals[l] != vals[l + 1]]
        if len(flips) > 1:
            raise FlipViolation(rel, args, prefix, flips)


def check_flips(lp: LimitPresentation, horizon: int) -> None:
    """Scan every coordinate level for a second flip, approximating inner
    limits by their value at ``horizon - 1``. Raises FlipViolation."""
    sig = lp.base.sig
    for rel, fn in lp.functions.items():
        ty = sig.relation_type(rel)
        pools = [lp.base.elements(j, horizon) if not lp.base.is_finite else lp.base.elements(j) for j in ty]
        for a in itertools.product(*pools):

            def level(k, prefix, a=a, fn=fn):
                # value of the level-k function, inner limits approximated
                if k == lp.depth:
                    return fn(a, prefix)
                return level(k + 1, prefix + (horizon - 1,))

            for k in range(lp.depth, 0, -1):
                for prefix in itertools.product(range(horizon), repeat=k - 1):
                    vals = [level(k, prefix + (l,)) for l in range(horizon)]
                    flips = [l for l in range(horizon - 1) if vals[l] != vals[l + 1]]
                    if len(flips) > 1:
                        raise FlipViolation(rel, a, prefix, flips)


def plus_name(rel: str) -> str:
    return rel + "+"


def limit_encode(lp: LimitPresentation) -> tuple[Structure, dict[str, PartitionedFormula]]:
    """The structure A+ and, for each relation R, the formula over A+ that
    defines R (all free variables on the left)."""
    sig = lp.base.sig
    n_sort = sig.sort_index(lp.nat_sort)
    rels = [r for r in sig.relation_names if r != lp.succ]
    if lp.depth == 0:
        phis = {}
        for r in rels:
            xs = tuple(Var(f"x{i}", j) for i, j in enumerate(sig.relation_type(r)))
            phis[r] = PartitionedFormula(Atom(r, tuple(v.name for v in xs)), xs, ())
        return lp.base, phis

    new_rels = [(lp.succ, (n_sort, n_sort))]
    new_rels += [(plus_name(r), sig.relation_type(r) + (n_sort,) * lp.depth) for r in rels]
    sig_plus = Signature(sig.sorts, tuple(new_rels))
    base = lp.base

    relations = {lp.succ: lambda args: base.holds_raw(lp.succ, args)}
    supports = {lp.succ: lambda b: base.support(lp.succ, b)}
    for r in rels:
        m = len(sig.relation_type(r))

        def holds(args, r=r, m=m):
            return lp.value(r, tuple(args[:m]), tuple(args[m:]))

        def support(binding, holds=holds):
            if all(v is not None for v in binding):
                return [tuple(binding)] if holds(tuple(binding)) else []
            return None

        relations[plus_name(r)] = holds
        supports[plus_name(r)] = support
    bounds = {j: base.sort_bound(j) for j in range(len(sig.sorts)) if base.sort_bound(j) is not None}
    enumerators = {}
    if lp.succ in getattr(base, "enumerators", {}):
        enumerators[lp.succ] = base.enumerators[lp.succ]
    plus = RuleStructure(sig_plus, base.in_sort, relations, supports, bounds, enumerators,
                         dict(getattr(base, "names", {})))

    phis = {}
    for r in rels:
        ty = sig.relation_type(r)
        xs = tuple(Var(f"x{i}", j) for i, j in enumerate(ty))
        ys = tuple(Var(f"l{i}", n_sort) for i in range(lp.depth))
        atom = Atom(plus_name(r), tuple(v.name for v in xs + ys))
        gamma = PartitionedFormula(atom, xs + ys[:-1], ys[-1:])
        for _ in range(lp.depth):
            gamma = gamma_prime(gamma, sig_plus, lp.nat_sort, lp.succ)
        phis[r] = gamma
    return plus, phis


# ----------------------------------------------------------- Morleyization


@dataclass(frozen=True)
class MorleyizationResult:
    sig: Signature
    structure: FiniteStructure
    phi_of_psi: dict  # input PartitionedFormula -> quantifier-free atom formula
    psi_of_phi: dict  # new relation name -> input PartitionedFormula

    def translate(self, pf: PartitionedFormula) -> PartitionedFormula:
        return self.phi_of_psi[pf]


def morleyize(s: FiniteStructure, formulas: Sequence[PartitionedFormula], n: int,
              prefix: str = "M") -> MorleyizationResult:
    """Expand ``s`` with one relation per input formula holding exactly on
    its solution set. Each formula must have Sigma-level at most ``n``."""
    if not s.is_finite:
        raise ValueError("morleyize needs a finite structure")
    used = set(s.sig.relation_names)
    new_rels, tables = [], dict(s.tables)
    phi_of_psi, psi_of_phi = {}, {}
    for i, pf in enumerate(formulas):
        level = bc_sigma_level(pf.formula)
        if level > n:
            raise ValueError(f"formula {i} has level {level} > {n}")
        name = fresh_name(f"{prefix}{i}", used)
        used.add(name)
        ty = tuple(v.sort for v in pf.variables)
        rows = set()
        for tup in right_tuples(s, ty):
            env = {v.name: e for v, e in zip(pf.variables, tup)}
            if _eval(s, pf.formula, env, 0):
                rows.add(tuple(e.index for e in tup))
        new_rels.append((name, ty))
        tables[name] = rows
        atom = Atom(name, tuple(v.name for v in pf.variables))
        phi_of_psi[pf] = PartitionedFormula(atom, pf.left, pf.right)
        psi_of_phi[name] = pf
    sig = s.sig.extend(relations=new_rels)
    return MorleyizationResult(sig, FiniteStructure(sig, s.universe, tables), phi_of_psi, psi_of_phi)
