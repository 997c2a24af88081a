"""Workbench for polynomial fixed point equations over semirings.

Systems x = f(x) + a are solved by plain iteration, by iterating the
linearization, or by evaluating doubling ladders of completion grammars;
derivation tree sums and a tensor companion construction provide
independent cross-checks for all of them.
"""

from semifix.grammar import (
    Cfg,
    DerivationTree,
    decompose,
    dimension,
    enumerate_trees,
    grammar_of,
    grammar_with_constants,
    regraft,
    tree_sum,
    yield_value,
    yield_word,
)
from semifix.munchausen import (
    IndexedGrammar,
    LinearCfg,
    canonical_form,
    completion_function_table,
    completion_via_differential_star,
    evaluate_grammar,
    expand_indexed,
    index_shift,
    indexed_grammar_of,
    left_linear_completion_grammar,
    linear_completion_grammar,
    munchausen_grammar,
    munchausen_sequence,
)
from semifix.polynomial import (
    EquationSystem,
    InvariantError,
    Monomial,
    Polynomial,
    differential,
    differential_full,
    enumerate_linear_monomial_substitutions,
    enumerate_linear_polynomial_substitutions,
    equation_system,
    eval_monomial,
    eval_poly,
    eval_rhs,
    monomial,
    polynomial,
    render_monomial,
    render_polynomial,
)
from semifix.semiring import (
    BOOLEAN,
    COUNTING,
    INF,
    MIN_PLUS,
    InstanceMismatchError,
    NotFiniteError,
    Semiring,
    Value,
    add,
    add_all,
    instance_by_name,
    make_function_semiring,
    mul,
    mul_all,
    nat_leq,
    relation_semiring,
    star,
    vector_eq,
    vector_leq,
)
from semifix.solver import (
    BudgetExhaustedError,
    LinearSystem,
    SequenceOutcome,
    SolveOutcome,
    kleene_solve,
    newton_solve,
    solve_linear,
)
from semifix.tensor import (
    AdmissibleOps,
    Eq1System,
    check_admissible,
    matrix_star,
    regularize,
    relation_admissible,
    solve_left_linear,
    tensor_pipeline,
)

__version__ = "0.1.0"

__all__ = [
    "AdmissibleOps",
    "BOOLEAN",
    "BudgetExhaustedError",
    "COUNTING",
    "Cfg",
    "DerivationTree",
    "Eq1System",
    "EquationSystem",
    "INF",
    "IndexedGrammar",
    "InstanceMismatchError",
    "InvariantError",
    "LinearCfg",
    "LinearSystem",
    "MIN_PLUS",
    "Monomial",
    "NotFiniteError",
    "Polynomial",
    "Semiring",
    "SequenceOutcome",
    "SolveOutcome",
    "Value",
    "add",
    "add_all",
    "canonical_form",
    "check_admissible",
    "completion_function_table",
    "completion_via_differential_star",
    "decompose",
    "differential",
    "differential_full",
    "dimension",
    "enumerate_linear_monomial_substitutions",
    "enumerate_linear_polynomial_substitutions",
    "enumerate_trees",
    "equation_system",
    "eval_monomial",
    "eval_poly",
    "eval_rhs",
    "evaluate_grammar",
    "expand_indexed",
    "grammar_of",
    "grammar_with_constants",
    "index_shift",
    "indexed_grammar_of",
    "instance_by_name",
    "kleene_solve",
    "left_linear_completion_grammar",
    "linear_completion_grammar",
    "make_function_semiring",
    "matrix_star",
    "monomial",
    "mul",
    "mul_all",
    "munchausen_grammar",
    "munchausen_sequence",
    "nat_leq",
    "newton_solve",
    "polynomial",
    "regraft",
    "regularize",
    "relation_admissible",
    "relation_semiring",
    "render_monomial",
    "render_polynomial",
    "solve_left_linear",
    "solve_linear",
    "star",
    "tensor_pipeline",
    "tree_sum",
    "vector_eq",
    "vector_leq",
    "yield_value",
    "yield_word",
]
