"""Command-line front end.

Output is ``key=value`` lines. Exit status: 0 when the answer is decided,
2 when it is Unknown at the given budget, 1 on any error.
"""
from __future__ import annotations

import argparse
import contextlib
import itertools
import os
import sys
from dataclasses import dataclass, field
from typing import Callable, Optional

from .closure import (
    ALL_FINITE,
    SINGLETON,
    MembershipVerdict,
    SolutionCountSet,
    cl_fixpoint,
    closure_membership,
    count_solutions,
    in_acl0,
    in_dcl0,
)
from .constructions import (
    DegreeOracle,
    EnumerationSource,
    build_bipartite_pair,
    build_chain_graph,
    build_path_witness,
    build_sorted_halting,
    decode_parities,
    degree_graph,
    gamma_formula,
    psi_formula,
    xi_formulas,
    zero_input_graph,
)
from .parser import parse_formula
from .reductions import build_psi, build_upsilon
from .structures import Element, StageBudget, Structure, Truth, evaluate, truncate
from .syntax import Atom, PartitionedFormula, Var, bc_sigma_level, format_partitioned
from .textio import LimitTable, parse_structure
from .transforms import LimitPresentation, augment_with_nat, limit_encode, morleyize

CONSTRUCTIONS = ("sorted-halting", "chain-graph", "path-witness", "bipartite")


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


@dataclass
class Loaded:
    structure: Structure
    formulas: list[PartitionedFormula] = field(default_factory=list)  # default query formulas
    oracle: Optional[Callable] = None
    info: list[str] = field(default_factory=list)


# ------------------------------------------------------------ arguments


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="closurelab", description="Closure queries on computable structures.")
    p.add_argument("command", choices=[
        "eval", "count", "acl", "dcl", "closure", "reduce", "morleyize",
        "limit-encode", "construct", "decode-parities",
    ])
    p.add_argument("what", nargs="?", help="reduce: upsilon|psi; construct: a construction name")
    p.add_argument("--structure", help="structure file, or construct:<name>")
    p.add_argument("--formula", action="append", default=[])
    p.add_argument("--assign", default="", help="v=Sort#k,... or element names")
    p.add_argument("--base", default=None, help="comma-separated elements")
    p.add_argument("--target")
    p.add_argument("--budget", type=int, help="sets horizon, iterations and cap together")
    p.add_argument("--horizon", type=int)
    p.add_argument("--iters", type=int)
    p.add_argument("--cap", type=int)
    p.add_argument("--S", dest="S", help="{1}, {0,1}, ... or all-finite")
    p.add_argument("--k", type=int, default=1, help="number of realizations for reduce upsilon")
    p.add_argument("--source", default="")
    p.add_argument("--infinite", default="")
    p.add_argument("--stages", type=int, default=10)
    p.add_argument("--depth", type=int, default=1)
    p.add_argument("--limit-fn", dest="limit_fn", default="const:0",
                   help="table:<file> or const:<0|1>")
    p.add_argument("--side", type=int, choices=(0, 1), default=0, help="bipartite: which structure")
    return p


def _budget(args) -> StageBudget:
    b = StageBudget() if args.budget is None else StageBudget(args.budget, args.budget, args.budget)
    return StageBudget(
        args.horizon if args.horizon is not None else b.domain_horizon,
        args.iters if args.iters is not None else b.closure_iterations,
        args.cap if args.cap is not None else b.solution_cap,
    )


def _count_set(text: Optional[str], default: SolutionCountSet) -> SolutionCountSet:
    if text is None:
        return default
    t = text.strip()
    if t in ("all-finite", "N", "all"):
        return ALL_FINITE
    t = t.strip("{}")
    try:
        values = [int(x) for x in t.split(",") if x.strip()]
    except ValueError:
        raise CliError(f"bad --S value {text!r}") from None
    if not values:
        raise CliError("--S needs at least one count")
    return SolutionCountSet.of(*values)


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None


def _limit_fn(args) -> Callable[[int, int], int]:
    kind, _, rest = args.limit_fn.partition(":")
    if kind == "const" and rest in ("0", "1"):
        v = int(rest)
        return lambda n, s: v
    if kind == "table" and rest:
        return LimitTable.parse(_read(rest)).binary("f")
    raise CliError(f"bad --limit-fn {args.limit_fn!r}; use table:<file> or const:<0|1>")


def _source(args) -> EnumerationSource:
    return EnumerationSource.parse(args.source, args.infinite)


def _construct(name: str, args) -> Loaded:
    if name == "sorted-halting":
        s, oracle = build_sorted_halting(_source(args))
        return Loaded(s, xi_formulas(s.sig), oracle, [f"sorts={len(s.sig.sorts)}"] + [
            f"size X{e}={oracle.size(e)}" for e in range(len(s.sig.sorts))
        ])
    if name == "chain-graph":
        s, inv = build_chain_graph(_limit_fn(args), args.stages)
        e = PartitionedFormula(Atom("E", ("x", "y")), (Var("x", 0),), (Var("y", 0),))
        return Loaded(s, [e], None, [f"stages={args.stages}", f"consumed_F={inv.consumed}"] + inv.export_lines())
    if name == "path-witness":
        src = _source(args)
        s, oracle = build_path_witness(src)
        info = [f"source={src.format()}", f"infinite={','.join(map(str, sorted(src.infinite_columns)))}"]
        info += [f"least_witness e={e} k={s.least_witness(e)}" for e in src.columns()]
        return Loaded(s, [gamma_formula()], oracle, info)
    if name == "bipartite":
        src = _source(args)
        g = (degree_graph(src), zero_input_graph(src))
        pair_ = build_bipartite_pair(*g)
        s = pair_[args.side]
        return Loaded(s, [psi_formula()], DegreeOracle(g[args.side]), [f"side={args.side}"] + [
            f"degree a_{e}={_count_text(g[args.side].degree(e))}" for e in src.columns()
        ])
    raise CliError(f"unknown construction {name!r}; choose from {', '.join(CONSTRUCTIONS)}")


def _load(args) -> Loaded:
    if not args.structure:
        raise CliError("--structure is required")
    if args.structure.startswith("construct:"):
        return _construct(args.structure.split(":", 1)[1], args)
    return Loaded(parse_structure(_read(args.structure)))


def _formulas(args, loaded: Loaded) -> list[PartitionedFormula]:
    if args.formula:
        return [parse_formula(t, loaded.structure.sig) for t in args.formula]
    if loaded.formulas:
        return loaded.formulas
    raise CliError("--formula is required")


def _lookup(s: Structure, text: str) -> Element:
    try:
        return s.lookup(text.strip())
    except (ValueError, KeyError) as exc:
        raise CliError(f"bad element {text!r}: {exc}") from None


def _assignment(s: Structure, text: str) -> dict[str, Element]:
    out = {}
    for item in filter(None, (x.strip() for x in text.split(","))):
        var, sep, val = item.partition("=")
        if not sep:
            raise CliError(f"bad --assign item {item!r}; expected v=Sort#k")
        out[var.strip()] = _lookup(s, val)
    return out


def _left_tuple(s: Structure, pf: PartitionedFormula, assign: dict) -> tuple:
    missing = [v.name for v in pf.left if v.name not in assign]
    if missing:
        raise CliError(f"--assign lacks left variables {missing}")
    extra = sorted(set(assign) - {v.name for v in pf.left})
    if extra:
        raise CliError(f"--assign names variables {extra} that are not on the left")
    return tuple(assign[v.name] for v in pf.left)


def _names(s: Structure, elems) -> str:
    return "(" + ",".join(s.element_name(e) for e in elems) + ")"


def _solution_list(s: Structure, verdict) -> str:
    return ",".join(_names(s, b) for b in verdict.solutions) or "none"


def _count_text(x: float) -> str:
    return "inf" if x == float("inf") else str(int(x))


def _elements(s: Structure, elems) -> str:
    return "{" + ",".join(s.element_name(e) for e in sorted(elems)) + "}"


# ------------------------------------------------------------- commands


def _cmd_eval(args, out) -> int:
    loaded = _load(args)
    s = loaded.structure
    pf = _formulas(args, loaded)[0]
    assign = _assignment(s, args.assign)
    t = evaluate(s, pf.formula, assign, _budget(args))
    out.append(f"truth={t.value}")
    return 2 if t is Truth.UNKNOWN else 0


def _cmd_count(args, out) -> int:
    loaded = _load(args)
    s = loaded.structure
    pf = _formulas(args, loaded)[0]
    a = _left_tuple(s, pf, _assignment(s, args.assign))
    v = count_solutions(s, pf, a, _budget(args))
    out.append(f"verdict={v}")
    out.append("solutions=" + ",".join(_names(s, b) for b in v.solutions))
    return 0 if v.is_exact else 2


def _trace_lines(s: Structure, res) -> list[str]:
    return [
        f"iter={t.iteration} add={s.element_name(t.element)} via=phi{t.formula} a={_names(s, t.args)}"
        for t in res.trace
    ]


def _membership(args, out, default_S: SolutionCountSet, single: Callable) -> int:
    loaded = _load(args)
    s = loaded.structure
    phis = _formulas(args, loaded)
    budget = _budget(args)
    if args.target is not None:
        base = [_lookup(s, x) for x in (args.base or "").split(",") if x.strip()]
        target = _lookup(s, args.target)
        S = _count_set(args.S, default_S)
        v, res = closure_membership(s, phis, base, target, S, budget, loaded.oracle)
        out.append(f"verdict={v}")
        out.append(f"iterations={res.iterations_used}")
        if v is MembershipVerdict.MEMBER:
            if target in base:
                out.append("witness=target in base")
            else:
                steps = [f"{s.element_name(t.element)}<-phi{t.formula}{_names(s, t.args)}"
                         for t in res.derivation(target)]
                out.append("witness=" + "; ".join(steps))
        elif v is MembershipVerdict.NON_MEMBER:
            out.append(f"certificate=converged at iteration {res.iterations_used} with "
                       f"{len(res.elements)} elements and no suppressed formula")
        if os.environ.get("CLOSURELAB_TRACE") == "1":
            out.extend(_trace_lines(s, res))
            out.extend(x.format(s.sig) for x in res.suppressed)
        return 2 if v is MembershipVerdict.UNKNOWN else 0
    pf = phis[0]
    a = _left_tuple(s, pf, _assignment(s, args.assign))
    v = single(s, pf, a, budget, loaded.oracle)
    out.append(f"verdict={v}")
    cap = max(budget.solution_cap, 2)
    c = count_solutions(s, pf, a, StageBudget(budget.domain_horizon, budget.closure_iterations, cap))
    if v is MembershipVerdict.MEMBER:
        if single is in_dcl0:
            out.append(f"witness={_names(s, c.solutions[0])}")
        else:
            out.append(f"certificate=count {c} solutions {_solution_list(s, c)}")
    elif v is MembershipVerdict.NON_MEMBER:
        if c.is_exact or len(c.solutions) >= 2:
            out.append(f"certificate=count {c} solutions {_solution_list(s, c)}")
        else:
            out.append("certificate=oracle count=inf")
    return 2 if v is MembershipVerdict.UNKNOWN else 0


def _cmd_closure(args, out) -> int:
    loaded = _load(args)
    s = loaded.structure
    phis = _formulas(args, loaded)
    base = [_lookup(s, x) for x in (args.base or "").split(",") if x.strip()]
    S = _count_set(args.S, ALL_FINITE)
    res = cl_fixpoint(s, phis, base, S, _budget(args), loaded.oracle)
    decided = res.converged and res.complete
    out.append(f"verdict={'Closed' if decided else 'Unknown'}")
    out.append(f"S={S}")
    out.append(f"iterations={res.iterations_used}")
    out.append(f"converged={str(res.converged).lower()}")
    out.append(f"suppressed={len(res.suppressed)}")
    out.append(f"elements={_elements(s, res.elements)}")
    if decided:
        out.append(f"certificate=iteration {res.iterations_used} added nothing and suppressed nothing")
    if os.environ.get("CLOSURELAB_TRACE") == "1":
        out.extend(_trace_lines(s, res))
        out.extend(x.format(s.sig) for x in res.suppressed)
    return 0 if decided else 2


def _cmd_reduce(args, out) -> int:
    loaded = _load(args)
    sig = loaded.structure.sig
    pf = _formulas(args, loaded)[0]
    if args.what == "upsilon":
        bundle = build_upsilon(pf, args.k)
        out.append(f"k={bundle.k}")
        out.append(f"level={bc_sigma_level(bundle.formula)}")
        for j, part in enumerate(bundle.partitions):
            out.append(f"tau{j}=" + format_partitioned(part, sig, f"tau{j}"))
    elif args.what == "psi":
        psi = build_psi(pf)
        out.append(f"level={bc_sigma_level(psi.formula)}")
        out.append("psi=" + format_partitioned(psi, sig, "psi"))
    else:
        raise CliError("reduce needs 'upsilon' or 'psi'")
    return 0


def _cmd_morleyize(args, out) -> int:
    loaded = _load(args)
    s = loaded.structure
    if not s.is_finite:
        raise CliError("morleyize needs a finite structure file")
    phis = _formulas(args, loaded)
    res = morleyize(s, phis, args.depth)
    for name, pf in res.psi_of_phi.items():
        ty = "*".join(res.sig.sorts[v.sort] for v in pf.variables)
        rows = ",".join(
            "(" + ",".join(res.sig.sorts[j] + "#" + str(k) for j, k in zip([v.sort for v in pf.variables], t)) + ")"
            for t in sorted(res.structure.tables[name])
        )
        out.append(f"relation={name} type={ty} formula={format_partitioned(pf, s.sig, name)}")
        out.append(f"table {name}={{{rows}}}")
    return 0


def _cmd_limit_encode(args, out) -> int:
    loaded = _load(args)
    s = loaded.structure
    if not s.is_finite:
        raise CliError("limit-encode needs a finite structure file")
    if args.depth not in (0, 1):
        raise CliError("limit tables describe depth 0 or 1 only")
    kind, _, path = args.limit_fn.partition(":")
    if kind != "table" or not path:
        raise CliError("limit-encode needs --limit-fn table:<file>")
    table = LimitTable.parse(_read(path))
    base = augment_with_nat(s)
    if args.depth == 0:
        fns = {r: (lambda a, ells, r=r: s.holds_raw(r, a)) for r in s.sig.relation_names}
    else:
        fns = {r: table.function(r) for r in s.sig.relation_names}
    lp = LimitPresentation(base, fns, args.depth)
    plus, phis = limit_encode(lp)
    horizon = _budget(args).domain_horizon
    trunc = truncate(plus, horizon)
    for r in s.sig.relation_names:
        phi = phis[r]
        out.append(f"phi_{r}=" + format_partitioned(phi, plus.sig, f"phi_{r}"))
        out.append(f"level_{r}={bc_sigma_level(phi.formula)}")
        pools = [s.elements(v.sort) for v in phi.variables]
        for tup in itertools.product(*pools):
            env = {v.name: Element(v.sort, k) for v, k in zip(phi.variables, tup)}
            t = evaluate(trunc, phi.formula, env)
            out.append(f"value {r}{_names(s, env.values())}={t.value} horizon={horizon}")
    return 0


def _cmd_construct(args, out) -> int:
    name = args.what or (args.structure or "").removeprefix("construct:")
    loaded = _construct(name, args)
    s = loaded.structure
    out.append(f"construction={name}")
    out.append("sorts=" + ",".join(s.sig.sorts))
    out.append("relations=" + ",".join(
        f"{r}:{'*'.join(s.sig.sorts[j] for j in ty)}" for r, ty in s.sig.relations))
    out.extend(loaded.info)
    return 0


def _cmd_decode(args, out) -> int:
    loaded = _load(args)
    horizon = args.horizon if args.horizon is not None else _budget(args).domain_horizon
    found = decode_parities(loaded.structure, horizon)
    out.append(f"horizon={horizon}")
    out.extend(f"parity n={n} parity={p}" for n, p in found.items())
    return 0


COMMANDS = {
    "eval": _cmd_eval,
    "count": _cmd_count,
    "acl": lambda a, o: _membership(a, o, ALL_FINITE, in_acl0),
    "dcl": lambda a, o: _membership(a, o, SINGLETON, in_dcl0),
    "closure": _cmd_closure,
    "reduce": _cmd_reduce,
    "morleyize": _cmd_morleyize,
    "limit-encode": _cmd_limit_encode,
    "construct": _cmd_construct,
    "decode-parities": _cmd_decode,
}


def run(argv, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    out: list[str] = []
    try:
        with contextlib.redirect_stdout(stdout):
            try:
                args = _parser().parse_args(argv)
            except SystemExit as exc:  # --help
                return int(exc.code or 0)
        code = COMMANDS[args.command](args, out)
    except (CliError, ValueError, TypeError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=stderr)
        return 1
    for line in out:
        print(line, file=stdout)
    return code


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
