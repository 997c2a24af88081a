"""Concrete semiring instances and the operations shared by all of them.

A semiring here is a carrier with an addition that acts as least upper
bound steps, a multiplication, neutral elements for both, and a star
operation summing all powers of an element.  Values are tagged with the
instance they belong to so that mixing instances fails loudly instead of
producing garbage.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Callable, Iterable, Mapping, Sequence

INF = math.inf

# Counting values above this cap saturate to infinity.  Keeps diverging
# iterations from allocating huge ints while staying exact below the cap.
COUNTING_CAP = 2**62


class InstanceMismatchError(TypeError):
    """An operation received values from two different semiring instances."""


class NotFiniteError(ValueError):
    """Element enumeration was requested for an infinite carrier."""


@dataclass(frozen=True)
class Value:
    """One element of a concrete semiring instance.

    The payload layout is instance specific: bools, numbers, matrices as
    nested tuples, or output tables.  Payloads are always hashable, so
    values can be set members and dict keys.
    """

    semiring: "Semiring"
    payload: Any

    def __repr__(self) -> str:
        return f"<{self.semiring.name} {self.semiring.render(self)}>"


class Semiring:
    """Shared behaviour of one instance.

    Subclasses fill in the payload-level hooks `_add`, `_mul`, `_star` and
    `_leq`; everything else works through them.  Instances are compared by
    identity, so each concrete carrier must be a singleton (module level or
    cached by parameters).
    """

    name = "abstract"
    is_idempotent = True
    is_commutative = True
    is_finite = False
    domain = ""

    def value(self, payload: Any) -> Value:
        return Value(self, self._check(payload))

    def zero(self) -> Value:
        return Value(self, self._zero())

    def one(self) -> Value:
        return Value(self, self._one())

    def elements(self) -> list[Value]:
        if not self.is_finite:
            raise NotFiniteError(f"{self.name} carrier is not finite")
        return [Value(self, p) for p in self._elements()]

    def parse_literal(self, text: str) -> Value:
        """Read one element from its textual form."""
        return self.value(self._parse(text.strip()))

    def render(self, v: Value) -> str:
        return self._render(v.payload)

    # payload-level hooks
    def _check(self, payload: Any) -> Any:
        return payload

    def _zero(self) -> Any:
        raise NotImplementedError

    def _one(self) -> Any:
        raise NotImplementedError

    def _add(self, x: Any, y: Any) -> Any:
        raise NotImplementedError

    def _mul(self, x: Any, y: Any) -> Any:
        raise NotImplementedError

    def _star(self, x: Any) -> Any:
        raise NotImplementedError

    def _leq(self, x: Any, y: Any) -> bool:
        raise NotImplementedError

    def _elements(self) -> Iterable[Any]:
        raise NotImplementedError

    def _parse(self, text: str) -> Any:
        raise NotImplementedError

    def _render(self, payload: Any) -> str:
        return str(payload)


def _same_instance(a: Value, b: Value) -> Semiring:
    if a.semiring is not b.semiring:
        raise InstanceMismatchError(
            f"cannot combine {a.semiring.name} value with {b.semiring.name} value"
        )
    return a.semiring


def add(a: Value, b: Value) -> Value:
    sr = _same_instance(a, b)
    return Value(sr, sr._add(a.payload, b.payload))


def mul(a: Value, b: Value) -> Value:
    sr = _same_instance(a, b)
    return Value(sr, sr._mul(a.payload, b.payload))


def star(a: Value) -> Value:
    return Value(a.semiring, a.semiring._star(a.payload))


def nat_leq(a: Value, b: Value) -> bool:
    """Natural order: a precedes b when adding a to b changes nothing."""
    sr = _same_instance(a, b)
    return sr._leq(a.payload, b.payload)


def add_all(sr: Semiring, values: Iterable[Value]) -> Value:
    """Sum of a finite collection, zero when empty."""
    total = sr.zero()
    for v in values:
        total = add(total, v)
    return total


def mul_all(sr: Semiring, values: Iterable[Value]) -> Value:
    """Product of a finite sequence in order, one when empty."""
    total = sr.one()
    for v in values:
        total = mul(total, v)
    return total


def vector_eq(u: Mapping[str, Value], v: Mapping[str, Value]) -> bool:
    return dict(u) == dict(v)


def vector_leq(u: Mapping[str, Value], v: Mapping[str, Value]) -> bool:
    """Componentwise natural order over a shared key set."""
    if set(u) != set(v):
        raise ValueError("vectors cover different variables")
    return all(nat_leq(u[x], v[x]) for x in u)


class BooleanSemiring(Semiring):
    """Truth values with or, and. Star is constantly true."""

    name = "boolean"
    is_idempotent = True
    is_commutative = True
    is_finite = True
    domain = "truth values"

    def _check(self, payload):
        if not isinstance(payload, bool):
            raise ValueError(f"boolean payload must be bool, got {payload!r}")
        return payload

    def _zero(self):
        return False

    def _one(self):
        return True

    def _add(self, x, y):
        return x or y

    def _mul(self, x, y):
        return x and y

    def _star(self, x):
        return True

    def _leq(self, x, y):
        return (not x) or y

    def _elements(self):
        return [False, True]

    def _parse(self, text):
        if text == "0":
            return False
        if text == "1":
            return True
        raise ValueError(f"boolean literal must be 0 or 1, got {text!r}")

    def _render(self, payload):
        return "1" if payload else "0"


def _check_extended_nat(payload, label):
    if payload == INF:
        return INF
    if isinstance(payload, bool) or not isinstance(payload, int) or payload < 0:
        raise ValueError(f"{label} payload must be a natural number or inf, got {payload!r}")
    return payload


def _parse_extended_nat(text, label):
    if text == "inf":
        return INF
    if text.isdigit():
        return int(text)
    raise ValueError(f"{label} literal must be digits or inf, got {text!r}")


def _render_extended_nat(payload):
    return "inf" if payload == INF else str(payload)


class MinPlusSemiring(Semiring):
    """Naturals with infinity under min and numeric addition.

    Addition picks the cheaper cost and multiplication accumulates cost,
    so the natural order is the reverse of the numeric one and star of any
    element is 0.
    """

    name = "min-plus"
    is_idempotent = True
    is_commutative = True
    is_finite = False
    domain = "naturals with infinity"

    def _check(self, payload):
        return _check_extended_nat(payload, self.name)

    def _zero(self):
        return INF

    def _one(self):
        return 0

    def _add(self, x, y):
        return min(x, y)

    def _mul(self, x, y):
        return x + y

    def _star(self, x):
        return 0

    def _leq(self, x, y):
        return y <= x

    def _parse(self, text):
        return _parse_extended_nat(text, self.name)

    def _render(self, payload):
        return _render_extended_nat(payload)


class CountingSemiring(Semiring):
    """Naturals with infinity under ordinary addition and multiplication.

    The one non-idempotent instance, kept as a stress test: 1 + 1 = 2.
    Star is 1 at zero and infinity everywhere else, and results above
    COUNTING_CAP saturate to infinity.
    """

    name = "counting"
    is_idempotent = False
    is_commutative = True
    is_finite = False
    domain = "naturals with infinity"

    def _check(self, payload):
        payload = _check_extended_nat(payload, self.name)
        return INF if payload != INF and payload > COUNTING_CAP else payload

    def _zero(self):
        return 0

    def _one(self):
        return 1

    def _cap(self, n):
        return INF if n > COUNTING_CAP else n

    def _add(self, x, y):
        if x == INF or y == INF:
            return INF
        return self._cap(x + y)

    def _mul(self, x, y):
        # guard keeps 0 absorbing even against infinity
        if x == 0 or y == 0:
            return 0
        if x == INF or y == INF:
            return INF
        return self._cap(x * y)

    def _star(self, x):
        return 1 if x == 0 else INF

    def _leq(self, x, y):
        return x <= y

    def _parse(self, text):
        return self._check(_parse_extended_nat(text, self.name))

    def _render(self, payload):
        return _render_extended_nat(payload)


class RelationSemiring(Semiring):
    """Square boolean matrices under union and relational composition.

    Payloads are nested tuples of bools.  Star is reflexive transitive
    closure.  Composition only commutes in dimension one.
    """

    name = "relation"
    is_idempotent = True
    is_finite = True

    def __init__(self, q: int):
        if q < 1:
            raise ValueError("relation dimension must be at least 1")
        self.q = q
        self.name = f"relation[{q}]"
        self.is_commutative = q == 1
        self.domain = f"{q}x{q} boolean matrices"

    def _check(self, payload):
        rows = tuple(tuple(bool(c) for c in row) for row in payload)
        if len(rows) != self.q or any(len(row) != self.q for row in rows):
            raise ValueError(f"relation payload must be a {self.q}x{self.q} matrix")
        return rows

    def _zero(self):
        return tuple(tuple(False for _ in range(self.q)) for _ in range(self.q))

    def _one(self):
        return tuple(tuple(i == j for j in range(self.q)) for i in range(self.q))

    def _add(self, x, y):
        return tuple(
            tuple(x[i][j] or y[i][j] for j in range(self.q)) for i in range(self.q)
        )

    def _mul(self, x, y):
        return tuple(
            tuple(any(x[i][k] and y[k][j] for k in range(self.q)) for j in range(self.q))
            for i in range(self.q)
        )

    def _star(self, x):
        closure = [[i == j or x[i][j] for j in range(self.q)] for i in range(self.q)]
        for k in range(self.q):
            for i in range(self.q):
                if closure[i][k]:
                    row_k = closure[k]
                    row_i = closure[i]
                    for j in range(self.q):
                        if row_k[j]:
                            row_i[j] = True
        return tuple(tuple(row) for row in closure)

    def _leq(self, x, y):
        return all(
            (not x[i][j]) or y[i][j] for i in range(self.q) for j in range(self.q)
        )

    def _elements(self):
        cells = self.q * self.q
        for bits in itertools.product((False, True), repeat=cells):
            yield tuple(bits[i * self.q : (i + 1) * self.q] for i in range(self.q))

    def _parse(self, text):
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"relation literal must look like [[0,1],[1,0]]: {exc}") from exc
        if not isinstance(raw, list) or not all(isinstance(row, list) for row in raw):
            raise ValueError("relation literal must be a list of rows")
        for row in raw:
            for cell in row:
                if cell not in (0, 1):
                    raise ValueError(f"relation cells must be 0 or 1, got {cell!r}")
        return self._check(raw)

    def _render(self, payload):
        return json.dumps([[1 if c else 0 for c in row] for row in payload], separators=(",", ":"))


class FunctionSemiring(Semiring):
    """Finite tables from argument vectors into a finite base instance.

    All operations act pointwise, so idempotence and commutativity are
    inherited from the base.  A table payload lists one base payload per
    argument vector, in the fixed enumeration order of `points`.
    """

    name = "function"
    is_finite = True

    def __init__(self, base: Semiring, variables: tuple[str, ...]):
        if not base.is_finite:
            raise NotFiniteError("function semiring needs a finite base instance")
        self.base = base
        self.variables = variables
        base_payloads = [v.payload for v in base.elements()]
        self.points = tuple(itertools.product(base_payloads, repeat=len(variables)))
        self._point_index = {p: i for i, p in enumerate(self.points)}
        self.name = f"function[{base.name}; {' '.join(variables) if variables else '()'}]"
        self.is_idempotent = base.is_idempotent
        self.is_commutative = base.is_commutative
        self.domain = f"tables over {len(self.points)} argument vectors into {base.name}"

    def _check(self, payload):
        table = tuple(self.base._check(p) for p in payload)
        if len(table) != len(self.points):
            raise ValueError(
                f"table must have {len(self.points)} entries, got {len(table)}"
            )
        return table

    def _zero(self):
        return tuple(self.base._zero() for _ in self.points)

    def _one(self):
        return tuple(self.base._one() for _ in self.points)

    def _add(self, x, y):
        return tuple(self.base._add(a, b) for a, b in zip(x, y))

    def _mul(self, x, y):
        return tuple(self.base._mul(a, b) for a, b in zip(x, y))

    def _star(self, x):
        return tuple(self.base._star(a) for a in x)

    def _leq(self, x, y):
        return all(self.base._leq(a, b) for a, b in zip(x, y))

    def _elements(self):
        base_payloads = [v.payload for v in self.base.elements()]
        return itertools.product(base_payloads, repeat=len(self.points))

    def _render(self, payload):
        entries = []
        for point, out in zip(self.points, payload):
            args = ",".join(self.base._render(p) for p in point)
            entries.append(f"({args})->{self.base._render(out)}")
        return "{" + ", ".join(entries) + "}"

    def constant(self, v: Value) -> Value:
        """Table returning the same base value everywhere."""
        if v.semiring is not self.base:
            raise InstanceMismatchError("constant table needs a base value")
        return Value(self, tuple(v.payload for _ in self.points))

    def projection(self, var: str) -> Value:
        """Table returning the argument supplied for one variable."""
        i = self.variables.index(var)
        return Value(self, tuple(point[i] for point in self.points))

    def tabulate(self, fn: Callable[[dict[str, Value]], Value]) -> Value:
        """Build a table by sampling a callable at every argument vector."""
        outs = []
        for point in self.points:
            args = {
                x: Value(self.base, p) for x, p in zip(self.variables, point)
            }
            outs.append(fn(args).payload)
        return Value(self, tuple(outs))

    def apply(self, table: Value, args: Mapping[str, Value]) -> Value:
        """Look one argument vector up in a table."""
        point = tuple(args[x].payload for x in self.variables)
        return Value(self.base, table.payload[self._point_index[point]])


BOOLEAN = BooleanSemiring()
MIN_PLUS = MinPlusSemiring()
COUNTING = CountingSemiring()


@lru_cache(maxsize=None)
def relation_semiring(q: int = 2) -> RelationSemiring:
    """The boolean matrix instance of a given dimension, one per q."""
    return RelationSemiring(q)


@lru_cache(maxsize=None)
def make_function_semiring(base: Semiring, variables: Sequence[str]) -> FunctionSemiring:
    """Pointwise instance of finite tables over a finite base.

    Cached per (base, variable tuple) so repeated requests share one
    instance and their values stay combinable.
    """
    return FunctionSemiring(base, tuple(variables))


def instance_by_name(name: str, param: int | None = None) -> Semiring:
    """Look a concrete instance up by its file-format name."""
    if name == "boolean":
        if param is not None:
            raise ValueError("boolean takes no parameter")
        return BOOLEAN
    if name in ("min-plus", "minplus"):
        if param is not None:
            raise ValueError("min-plus takes no parameter")
        return MIN_PLUS
    if name == "counting":
        if param is not None:
            raise ValueError("counting takes no parameter")
        return COUNTING
    if name == "relation":
        return relation_semiring(2 if param is None else param)
    raise ValueError(f"unknown semiring {name!r}")
