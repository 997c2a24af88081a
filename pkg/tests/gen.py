"""Seeded random generators shared across the test suite."""

import random

from semifix.polynomial import (
    EquationSystem,
    equation_system,
    monomial,
    polynomial,
)
from semifix.semiring import BOOLEAN, COUNTING, MIN_PLUS, Semiring, relation_semiring

VAR_NAMES = ("x", "y", "z", "w", "u", "v")


def random_value(sr: Semiring, rng: random.Random):
    """One element, biased toward small payloads."""
    if sr is BOOLEAN:
        return sr.value(rng.random() < 0.6)
    if sr is MIN_PLUS:
        return sr.value(rng.randrange(0, 10))
    if sr is COUNTING:
        return sr.value(rng.randrange(0, 4))
    if hasattr(sr, "q"):
        q = sr.q
        return sr.value([[rng.random() < 0.5 for _ in range(q)] for _ in range(q)])
    raise ValueError(f"no generator for {sr.name}")


def random_point(sr: Semiring, rng: random.Random, variables):
    return {x: random_value(sr, rng) for x in variables}


def random_monomial(sr, rng, variables, max_occurrences=2, unit_bias=0.6):
    """A canonical monomial with one or more variable occurrences."""
    degree = rng.randint(1, max_occurrences)
    factors = []
    for _ in range(degree):
        if rng.random() > unit_bias:
            factors.append(random_value(sr, rng))
        factors.append(rng.choice(variables))
    if rng.random() > unit_bias:
        factors.append(random_value(sr, rng))
    return monomial(sr, factors)


def random_system(
    sr,
    rng,
    n_vars,
    max_monomials=3,
    max_occurrences=2,
    zero_const_bias=0.4,
) -> EquationSystem:
    """A small random equation system with nonzero chance of empty parts."""
    variables = VAR_NAMES[:n_vars]
    rhs = {}
    for x in variables:
        count = rng.randint(0, max_monomials)
        monos = [
            random_monomial(sr, rng, variables, max_occurrences) for _ in range(count)
        ]
        if rng.random() > zero_const_bias:
            monos.append(monomial(sr, [random_value(sr, rng)]))
        rhs[x] = polynomial(sr, monos)
    return equation_system(sr, variables, rhs)


def random_triangular_system(
    sr, rng, n_vars, max_monomials=2, max_occurrences=2
) -> EquationSystem:
    """A system whose variable parts only mention strictly later variables.

    No cycles means finitely many derivation trees, so exhaustive tree
    enumeration is an exact oracle on these.
    """
    variables = VAR_NAMES[:n_vars]
    rhs = {}
    for i, x in enumerate(variables):
        later = variables[i + 1 :]
        monos = []
        if later:
            for _ in range(rng.randint(0, max_monomials)):
                monos.append(random_monomial(sr, rng, later, max_occurrences))
        monos.append(monomial(sr, [random_value(sr, rng)]))
        rhs[x] = polynomial(sr, monos)
    return equation_system(sr, variables, rhs)


def instances_for_order_tests():
    """The idempotent instances used throughout the comparison suites."""
    return [BOOLEAN, MIN_PLUS, relation_semiring(2)]


def random_eq1(sr, rng, n_vars, max_terms=3):
    """A two-sided linear system with random coefficient pairs."""
    from semifix.tensor import Eq1System

    variables = VAR_NAMES[:n_vars]
    constants = {x: random_value(sr, rng) for x in variables}
    terms = {
        x: tuple(
            (
                rng.choice(variables),
                random_value(sr, rng),
                random_value(sr, rng),
            )
            for _ in range(rng.randint(0, max_terms))
        )
        for x in variables
    }
    return Eq1System(sr, variables, constants, terms)
