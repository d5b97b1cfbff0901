"""Algebraic and definable closure in computable many-sorted structures."""
from .closure import (
    ALL_FINITE,
    SINGLETON,
    ClosureResult,
    CountVerdict,
    MembershipVerdict,
    SolutionCountSet,
    acl_set_member,
    cl_fixpoint,
    cl_step,
    closure_membership,
    closure_via_reachability,
    count_solutions,
    dcl_set_member,
    in_acl0,
    in_dcl0,
)
from .parser import FormulaSyntaxError, parse_formula
from .reductions import UpsilonBundle, build_psi, build_upsilon, cl_from_acl_dcl
from .structures import (
    Element,
    FiniteStructure,
    RuleStructure,
    StageBudget,
    StructureRegistry,
    Truth,
    brute_force_count,
    evaluate,
    truncate,
)
from .syntax import (
    PartitionedFormula,
    Signature,
    SortError,
    Var,
    bc_sigma_level,
    format_formula,
    format_partitioned,
    quantifier_rank,
    repartition,
)
from .textio import LimitTable, parse_structure
from .transforms import (
    FlipViolation,
    LimitPresentation,
    MorleyizationResult,
    augment_with_nat,
    check_flips,
    gamma_prime,
    limit_encode,
    morleyize,
)

__all__ = [
    "ALL_FINITE",
    "SINGLETON",
    "ClosureResult",
    "CountVerdict",
    "Element",
    "FiniteStructure",
    "FlipViolation",
    "FormulaSyntaxError",
    "LimitPresentation",
    "LimitTable",
    "MembershipVerdict",
    "MorleyizationResult",
    "PartitionedFormula",
    "RuleStructure",
    "Signature",
    "SolutionCountSet",
    "SortError",
    "StageBudget",
    "StructureRegistry",
    "Truth",
    "UpsilonBundle",
    "Var",
    "acl_set_member",
    "augment_with_nat",
    "bc_sigma_level",
    "brute_force_count",
    "build_psi",
    "build_upsilon",
    "check_flips",
    "cl_fixpoint",
    "cl_from_acl_dcl",
    "cl_step",
    "closure_membership",
    "closure_via_reachability",
    "count_solutions",
    "dcl_set_member",
    "evaluate",
    "format_formula",
    "format_partitioned",
    "gamma_prime",
    "in_acl0",
    "in_dcl0",
    "limit_encode",
    "morleyize",
    "parse_formula",
    "parse_structure",
    "quantifier_rank",
    "repartition",
    "truncate",
]
