"""Solution counting, ACL/DCL membership and the iterated closure operator.

Every verdict here is budget-aware and sound: ``Exact`` counts and
``Member``/``NonMember`` answers are only returned when the search that
justifies them was exhausted (or an analytic oracle vouches for
infinitude). Everything else is ``AtLeast`` or ``Unknown``; raising the
budget can only resolve those.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from .structures import (
    Element,
    StageBudget,
    Structure,
    _eval,
    format_element,
    format_tuple,
)
from .syntax import And, Atom, Eq, Or, PartitionedFormula, SortError

# An analytic oracle maps (formula, left tuple) to the true solution count
# (math.inf when infinite) or None when it has no opinion.
Oracle = Callable[[PartitionedFormula, tuple], Optional[float]]


@dataclass(frozen=True)
class CountVerdict:
    kind: str  # "Exact", "AtLeast" or "Unknown"
    k: int = 0
    infinite: bool = False
    solutions: tuple = field(default=(), compare=False, repr=False)

    @property
    def is_exact(self) -> bool:
        return self.kind == "Exact"

    def __str__(self):
        if self.kind == "Unknown":
            return "Unknown infinite" if self.infinite else "Unknown"
        return f"{self.kind} k={self.k}"


def exact(k: int, solutions=()) -> CountVerdict:
    return CountVerdict("Exact", k, solutions=tuple(solutions))


def at_least(k: int, solutions=()) -> CountVerdict:
    return CountVerdict("AtLeast", k, solutions=tuple(solutions))


def unknown(infinite: bool = False) -> CountVerdict:
    return CountVerdict("Unknown", 0, infinite=infinite)


class MembershipVerdict(enum.Enum):
    MEMBER = "Member"
    NON_MEMBER = "NonMember"
    UNKNOWN = "Unknown"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class SolutionCountSet:
    """The set S of admissible solution counts; ``values=None`` means all of N."""

    values: Optional[frozenset] = None

    def __post_init__(self):
        if self.values is not None:
            vals = frozenset(self.values)
            if not vals or any(v < 0 for v in vals):
                raise ValueError("a finite count set must be a nonempty set of naturals")
            object.__setattr__(self, "values", vals)

    @classmethod
    def of(cls, *values: int) -> "SolutionCountSet":
        return cls(frozenset(values))

    @property
    def all_finite(self) -> bool:
        return self.values is None

    def decide(self, verdict: CountVerdict, oracle_count: Optional[float] = None) -> Optional[bool]:
        """Certified membership of the count in S, or None if undecided."""
        if verdict.is_exact:
            return self.all_finite or verdict.k in self.values
        if oracle_count == math.inf or verdict.infinite:
            return False
        if verdict.kind == "AtLeast" and not self.all_finite and verdict.k > max(self.values):
            return False
        return None

    def __str__(self):
        if self.all_finite:
            return "all-finite"
        return "{" + ",".join(str(v) for v in sorted(self.values)) + "}"


ALL_FINITE = SolutionCountSet()
SINGLETON = SolutionCountSet.of(1)


# --------------------------------------------------------------- counting


def _candidates(s: Structure, f, env: dict, targets: dict):
    """Finite candidate assignments for some target variables.

    Returns ``(covered, rows)`` where every solution of ``f`` extending
    ``env`` restricts on ``covered`` to one of ``rows``; None when no target
    variable can be bounded.
    """
    if isinstance(f, Atom):
        unbound = [v for v in f.args if v not in env]
        if not unbound:
            return frozenset(), [{}]
        if any(v not in targets for v in unbound):
            return None
        binding = tuple(env[v].index if v in env else None for v in f.args)
        rows = s.support(f.rel, binding)
        if rows is None:
            return None
        ty = s.sig.relation_type(f.rel)
        out = []
        for row in rows:
            cand: dict = {}
            ok = True
            for v, k, b, j in zip(f.args, row, binding, ty):
                if b is not None:
                    ok = k == b
                elif v in cand:
                    ok = cand[v].index == k
                else:
                    ok = s.in_sort(j, k)
                    cand[v] = Element(j, k)
                if not ok:
                    break
            if ok:
                out.append(cand)
        return frozenset(unbound), out
    if isinstance(f, Eq):
        lb, rb = f.left in env, f.right in env
        if lb and rb:
            return frozenset(), [{}]
        if lb and f.right in targets:
            return frozenset([f.right]), [{f.right: env[f.left]}]
        if rb and f.left in targets:
            return frozenset([f.left]), [{f.left: env[f.right]}]
        return None
    if isinstance(f, And):
        covered: frozenset = frozenset()
        rows = [{}]
        remaining = list(f.parts)
        progress = True
        while remaining and progress:
            progress = False
            for part in list(remaining):
                new_rows, part_cov = [], None
                for row in rows:
                    r = _candidates(s, part, {**env, **row}, targets)
                    if r is None:
                        part_cov = None
                        break
                    part_cov = r[0]
                    new_rows.extend({**row, **d} for d in r[1])
                else:
                    if part_cov:
                        covered |= part_cov
                        rows = new_rows
                        remaining.remove(part)
                        progress = True
        return (covered, rows) if covered else None
    if isinstance(f, Or):
        results = [_candidates(s, p, env, targets) for p in f.parts]
        if any(r is None for r in results):
            return None
        covered = frozenset.intersection(*(r[0] for r in results))
        if not covered:
            return None
        seen, rows = set(), []
        for _, part_rows in results:
            for row in part_rows:
                key = tuple(sorted((v, row[v]) for v in covered))
                if key not in seen:
                    seen.add(key)
                    rows.append({v: row[v] for v in covered})
        return covered, rows
    return None


def _check_left(s: Structure, pf: PartitionedFormula, a: Sequence[Element]) -> tuple:
    a = tuple(a)
    if len(a) != len(pf.left) or any(e.sort != v.sort for e, v in zip(a, pf.left)):
        raise SortError("tuple does not match the left type of the formula")
    for e in a:
        if not s.contains(e):
            raise SortError(f"{format_element(e, s.sig)} is not an element of the structure")
    return a


def count_solutions(s: Structure, pf: PartitionedFormula, a: Sequence[Element],
                    budget: Optional[StageBudget] = None) -> CountVerdict:
    """Count the right-tuples ``b`` with ``s |= pf(a; b)``.

    Support hints bound whatever right variables they can; the rest are
    enumerated below the domain horizon. On finite structures the answer is
    always ``Exact`` and the solution cap is ignored. The verdict carries
    the solutions it found, sorted.
    """
    budget = budget or StageBudget()
    a = _check_left(s, pf, a)
    env = {v.name: e for v, e in zip(pf.left, a)}
    targets = {v.name: v.sort for v in pf.right}
    r = _candidates(s, pf.formula, env, targets)
    covered, rows = r if r is not None else (frozenset(), [{}])
    rest = [v for v in pf.right if v.name not in covered]
    exhaustive = True
    pools = []
    for v in rest:
        if s.is_finite:
            pools.append(s.elements(v.sort))
        else:
            pools.append(s.elements(v.sort, budget.domain_horizon))
            exhaustive &= s.exhausted(v.sort, budget.domain_horizon)
    cap = None if s.is_finite else budget.solution_cap

    seen = set()
    candidates = []
    for row in rows:
        for combo in itertools.product(*pools):
            full = dict(row)
            full.update({v.name: Element(v.sort, k) for v, k in zip(rest, combo)})
            b = tuple(full[v.name] for v in pf.right)
            if b not in seen:
                seen.add(b)
                candidates.append(b)
    candidates.sort()

    found = []
    undecided = False
    capped = False
    scope = dict(env)
    for i, b in enumerate(candidates):
        scope.update({v.name: e for v, e in zip(pf.right, b)})
        val = _eval(s, pf.formula, scope, budget.domain_horizon)
        if val is None:
            undecided = True
        elif val:
            found.append(b)
            if cap is not None and len(found) >= cap and i < len(candidates) - 1:
                capped = True
                break
    if exhaustive and not undecided and not capped:
        return exact(len(found), found)
    if found:
        return at_least(len(found), found)
    return unknown()


def in_acl0(s: Structure, pf: PartitionedFormula, a: Sequence[Element],
            budget: Optional[StageBudget] = None, oracle: Optional[Oracle] = None) -> MembershipVerdict:
    """Is the solution set of ``pf`` at ``a`` finite (possibly empty)?"""
    v = count_solutions(s, pf, a, budget)
    if v.is_exact:
        return MembershipVerdict.MEMBER
    if oracle is not None and oracle(pf, tuple(a)) == math.inf:
        return MembershipVerdict.NON_MEMBER
    return MembershipVerdict.UNKNOWN


def in_dcl0(s: Structure, pf: PartitionedFormula, a: Sequence[Element],
            budget: Optional[StageBudget] = None, oracle: Optional[Oracle] = None) -> MembershipVerdict:
    """Is the solution set of ``pf`` at ``a`` a singleton?"""
    budget = budget or StageBudget()
    if budget.solution_cap < 2:
        budget = StageBudget(budget.domain_horizon, budget.closure_iterations, 2)
    v = count_solutions(s, pf, a, budget)
    decided = SINGLETON.decide(v, oracle(pf, tuple(a)) if oracle is not None else None)
    if decided is None:
        return MembershipVerdict.UNKNOWN
    return MembershipVerdict.MEMBER if decided else MembershipVerdict.NON_MEMBER


# ---------------------------------------------------------------- closure


@dataclass(frozen=True)
class TraceEntry:
    iteration: int
    element: Element
    formula: int
    args: tuple

    def format(self, sig) -> str:
        return (
            f"iter={self.iteration} add={format_element(self.element, sig)} "
            f"via=phi{self.formula} a={format_tuple(self.args, sig)}"
        )


@dataclass(frozen=True)
class Suppressed:
    iteration: int
    formula: int
    args: tuple
    verdict: CountVerdict

    def format(self, sig) -> str:
        return (
            f"iter={self.iteration} suppressed=phi{self.formula} "
            f"a={format_tuple(self.args, sig)} count={self.verdict}"
        )


@dataclass
class ClosureResult:
    elements: frozenset
    iterations_used: int
    converged: bool
    trace: list[TraceEntry]
    suppressed: list[Suppressed] = field(default_factory=list)
    complete: bool = False  # converged with nothing suppressed in the last pass

    def justification(self, e: Element) -> Optional[TraceEntry]:
        for t in self.trace:
            if t.element == e:
                return t
        return None

    def derivation(self, e: Element) -> list[TraceEntry]:
        """Trace entries needed to derive ``e`` from the base set, in order."""
        by_elem = {t.element: t for t in self.trace}
        needed, stack = {}, [e]
        while stack:
            x = stack.pop()
            t = by_elem.get(x)
            if t is None or x in needed:
                continue
            needed[x] = t
            stack.extend(t.args)
        return sorted(needed.values(), key=lambda t: (t.iteration, t.element))

    def format_trace(self, sig) -> list[str]:
        return [t.format(sig) for t in self.trace]


def _left_tuples(pf: PartitionedFormula, base: Sequence[Element]):
    pools = [[e for e in base if e.sort == v.sort] for v in pf.left]
    return itertools.product(*pools)


def _one_pass(s, phis, current: frozenset, S: SolutionCountSet, budget, oracle, iteration):
    added: dict[Element, TraceEntry] = {}
    suppressed = []
    base = sorted(current)
    for i, pf in enumerate(phis):
        for a in _left_tuples(pf, base):
            v = count_solutions(s, pf, a, budget)
            oc = oracle(pf, a) if (oracle is not None and not v.is_exact) else None
            fire = S.decide(v, oc)
            if fire is None:
                suppressed.append(Suppressed(iteration, i, a, v))
                continue
            if not fire:
                continue
            for b in v.solutions:
                for e in b:
                    if e not in current and e not in added:
                        added[e] = TraceEntry(iteration, e, i, a)
    return added, suppressed


def _check_base(s: Structure, base: Iterable[Element]) -> frozenset:
    base = frozenset(base)
    for e in base:
        if not isinstance(e, Element) or not s.contains(e):
            raise ValueError(f"{e!r} is not an element of the structure")
    return base


def cl_step(s: Structure, phis: Sequence[PartitionedFormula], base: Iterable[Element],
            S: SolutionCountSet, budget: Optional[StageBudget] = None,
            oracle: Optional[Oracle] = None) -> frozenset:
    """One application of the closure operator: base plus every element of a
    solution of some formula whose certified count lies in ``S``."""
    budget = budget or StageBudget()
    current = _check_base(s, base)
    added, _ = _one_pass(s, phis, current, S, budget, oracle, 1)
    return current | frozenset(added)


def cl_fixpoint(s: Structure, phis: Sequence[PartitionedFormula], base: Iterable[Element],
                S: SolutionCountSet, budget: Optional[StageBudget] = None,
                oracle: Optional[Oracle] = None, stop_at: Optional[Element] = None) -> ClosureResult:
    """Iterate :func:`cl_step` up to ``budget.closure_iterations`` times.

    ``stop_at`` ends the iteration as soon as that element is added.
    """
    budget = budget or StageBudget()
    current = _check_base(s, base)
    trace: list[TraceEntry] = []
    suppressed: list[Suppressed] = []
    for it in range(1, budget.closure_iterations + 1):
        added, supp = _one_pass(s, phis, current, S, budget, oracle, it)
        suppressed.extend(supp)
        if not added:
            return ClosureResult(current, it, True, trace, suppressed, complete=not supp)
        trace.extend(added[e] for e in sorted(added))
        current = current | frozenset(added)
        if stop_at is not None and stop_at in current:
            return ClosureResult(current, it, False, trace, suppressed)
    return ClosureResult(current, budget.closure_iterations, False, trace, suppressed)


def closure_membership(s: Structure, phis: Sequence[PartitionedFormula], base: Iterable[Element],
                       target: Element, S: SolutionCountSet, budget: Optional[StageBudget] = None,
                       oracle: Optional[Oracle] = None) -> tuple[MembershipVerdict, ClosureResult]:
    """Membership of ``target`` in cl(base, S) together with the run that decided it."""
    base = _check_base(s, base)
    if target in base:
        return MembershipVerdict.MEMBER, ClosureResult(base, 0, False, [])
    res = cl_fixpoint(s, phis, base, S, budget, oracle, stop_at=target)
    if target in res.elements:
        return MembershipVerdict.MEMBER, res
    if res.converged and res.complete:
        return MembershipVerdict.NON_MEMBER, res
    return MembershipVerdict.UNKNOWN, res


def acl_set_member(s, phis, A, target, budget=None, oracle=None) -> MembershipVerdict:
    return closure_membership(s, phis, A, target, ALL_FINITE, budget, oracle)[0]


def dcl_set_member(s, phis, A, target, budget=None, oracle=None) -> MembershipVerdict:
    return closure_membership(s, phis, A, target, SINGLETON, budget, oracle)[0]


def closure_via_reachability(s: Structure, phis: Sequence[PartitionedFormula], base: Iterable[Element],
                             S: SolutionCountSet, budget: Optional[StageBudget] = None,
                             oracle: Optional[Oracle] = None) -> frozenset:
    """Forward reachability from ``base`` along the edges of Z_S, for formula
    sets whose members each have one left and one right variable. Depth is
    limited by ``budget.closure_iterations`` so the result matches
    :func:`cl_fixpoint` under the same budget."""
    budget = budget or StageBudget()
    for pf in phis:
        if len(pf.left) != 1 or len(pf.right) != 1:
            raise ValueError("closure_via_reachability needs formulas with one left and one right variable")
    reached = set(_check_base(s, base))
    frontier = sorted(reached)
    for _ in range(budget.closure_iterations):
        nxt = set()
        for a in frontier:
            for pf in phis:
                if pf.left[0].sort != a.sort:
                    continue
                v = count_solutions(s, pf, (a,), budget)
                oc = oracle(pf, (a,)) if (oracle is not None and not v.is_exact) else None
                if S.decide(v, oc):
                    nxt.update(b[0] for b in v.solutions)
        nxt -= reached
        if not nxt:
            break
        reached |= nxt
        frontier = sorted(nxt)
    return frozenset(reached)
