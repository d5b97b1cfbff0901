"""Reductions between exact solution counts and ACL/DCL membership.

``build_upsilon`` asks for k distinct realizations of the right tuple,
``build_psi`` pads a formula with an equality disjunct so that emptiness
becomes a definability question, and ``cl_from_acl_dcl`` recovers the
exact count from an ACL oracle and a DCL oracle alone.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .closure import CountVerdict, MembershipVerdict, at_least, exact, unknown
from .structures import Element, StageBudget, Structure
from .syntax import (
    Formula,
    PartitionedFormula,
    Var,
    all_var_names,
    conj,
    disj,
    rename_free,
    repartition,
    tuple_eq,
    tuple_neq,
)

MembershipOracle = Callable[[PartitionedFormula, tuple], MembershipVerdict]


@dataclass(frozen=True)
class UpsilonBundle:
    formula: Formula
    blocks: tuple[tuple[Var, ...], ...]  # the fresh tuples z^0 .. z^(k-1)
    partitions: tuple[PartitionedFormula, ...]  # partitions[j] has z^j on the right

    @property
    def k(self) -> int:
        return len(self.blocks)


def _fresh(base: Var, suffix: str, used: set[str]) -> Var:
    name = f"{base.name}#{suffix}"
    while name in used:
        name += "'"
    used.add(name)
    return Var(name, base.sort)


def build_upsilon(pf: PartitionedFormula, k: int) -> UpsilonBundle:
    """The conjunction of pairwise inequalities between k fresh copies of the
    right tuple and k instances of the formula, one per copy."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if not pf.right:
        raise ValueError("the right part must be nonempty")
    used = all_var_names(pf.formula) | {v.name for v in pf.variables}
    blocks = tuple(
        tuple(_fresh(y, f"upsilon_{j}", used) for y in pf.right) for j in range(k)
    )
    names = [tuple(v.name for v in blk) for blk in blocks]
    neqs = [tuple_neq(names[i], names[j]) for i in range(k) for j in range(i + 1, k)]
    copies = [
        rename_free(pf.formula, {y.name: z for y, z in zip(pf.right, names[j])}) for j in range(k)
    ]
    formula = conj(*neqs, *copies)
    full = PartitionedFormula(formula, pf.left + tuple(v for blk in blocks for v in blk), ())
    parts = []
    for j in range(k):
        left = [v.name for v in pf.left] + [v.name for i, blk in enumerate(blocks) if i != j for v in blk]
        parts.append(repartition(full, left))
    return UpsilonBundle(formula, blocks, tuple(parts))


def build_psi(pf: PartitionedFormula) -> PartitionedFormula:
    """``phi(x, y) | y = z`` partitioned as ``(x z ; y)`` with z fresh."""
    if not pf.right:
        raise ValueError("the right part must be nonempty")
    used = all_var_names(pf.formula) | {v.name for v in pf.variables}
    zs = tuple(_fresh(y, "psi", used) for y in pf.right)
    formula = disj(pf.formula, tuple_eq([y.name for y in pf.right], [z.name for z in zs]))
    return PartitionedFormula(formula, pf.left + zs, pf.right)


def _right_space(s: Structure, types: Sequence[int], budget: StageBudget) -> list[tuple[Element, ...]]:
    pools = []
    for j in types:
        idx = s.elements(j) if s.is_finite else s.elements(j, budget.domain_horizon)
        pools.append([Element(j, k) for k in idx])
    return list(itertools.product(*pools))


def cl_from_acl_dcl(s: Structure, pf: PartitionedFormula, a: Sequence[Element],
                    acl_oracle: MembershipOracle, dcl_oracle: MembershipOracle,
                    budget: Optional[StageBudget] = None) -> CountVerdict:
    """Exact solution count computed from ACL and DCL answers only.

    An ACL ``NonMember`` gives the infinite-flagged Unknown verdict. Otherwise
    k = 0 is tested with ``build_psi`` at two distinct padding tuples and each
    k >= 1 with ``build_upsilon``: the count is k exactly when some choice of
    k-1 parameter tuples leaves a unique completion. Since the Upsilon formula
    is symmetric in its blocks and false on repeated blocks, parameters are
    drawn as increasing sequences of distinct tuples and only the last
    partition is queried.
    """
    budget = budget or StageBudget()
    a = tuple(a)
    acl = acl_oracle(pf, a)
    if acl is MembershipVerdict.NON_MEMBER:
        return unknown(infinite=True)
    if acl is MembershipVerdict.UNKNOWN:
        return unknown()
    space = _right_space(s, pf.right_type, budget)
    if not space:
        return exact(0)

    # k = 0
    if len(space) >= 2:
        psi = build_psi(pf)
        answers = [dcl_oracle(psi, a + space[0]), dcl_oracle(psi, a + space[1])]
        if MembershipVerdict.UNKNOWN in answers:
            return unknown()
        if all(v is MembershipVerdict.MEMBER for v in answers):
            return exact(0)
    else:
        # a single candidate tuple: Psi is always definable there, so ask directly
        v = dcl_oracle(pf, a)
        if v is MembershipVerdict.UNKNOWN:
            return unknown()
        return exact(1 if v is MembershipVerdict.MEMBER else 0)

    for k in range(1, budget.solution_cap + 1):
        if k > len(space):
            break
        part = build_upsilon(pf, k).partitions[k - 1]
        saw_unknown = False
        for params in itertools.combinations(space, k - 1):
            v = dcl_oracle(part, a + tuple(e for b in params for e in b))
            if v is MembershipVerdict.MEMBER:
                return exact(k)
            saw_unknown |= v is MembershipVerdict.UNKNOWN
        if saw_unknown:
            return unknown()
    if budget.solution_cap >= len(space):
        # every possible k was refuted, which a truthful oracle never does
        return unknown()
    return at_least(budget.solution_cap + 1)
