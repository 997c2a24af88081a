"""Command line front end for the equation workbench.

Systems are small text files: a semiring header, a variable list, then
one equation per variable, each statement closed by a semicolon.

    semiring counting;
    vars x y z;
    x = y*y;
    y = z;
    z = 2;

Exit codes: 0 success, 1 usage, 2 malformed input, 3 budget exhausted,
4 violated internal invariant.
"""

from __future__ import annotations

import argparse
import json as jsonlib
import os
import sys as _sys
from dataclasses import dataclass

from semifix.grammar import grammar_with_constants, tree_sum
from semifix.munchausen import (
    Coeff,
    Held,
    evaluate_grammar,
    indexed_grammar_of,
    indexed_to_json,
    left_linear_completion_grammar,
    lincfg_to_json,
    linear_completion_grammar,
    munchausen_grammar,
    munchausen_sequence,
    completion_via_differential_star,
    completion_function_table,
    render_lsym,
)
from semifix.polynomial import (
    EquationSystem,
    InvariantError,
    Monomial,
    Polynomial,
    equation_system,
    monomial,
    polynomial,
    render_monomial,
)
from semifix.semiring import (
    InstanceMismatchError,
    NotFiniteError,
    Semiring,
    Value,
    instance_by_name,
    vector_eq,
)
from semifix.solver import (
    BudgetExhaustedError,
    kleene_solve,
    newton_solve,
)
from semifix.tensor import tensor_pipeline

SCHEMA_VERSION = "v1"
DEFAULT_KLEENE_BUDGET = 10_000
DEFAULT_NODE_BUDGET = 5_000


class EquationSyntaxError(ValueError):
    """Rejected input text, pinned to file, line, and column."""

    def __init__(self, message: str, filename: str, line: int, col: int):
        super().__init__(f"{filename}:{line}:{col}: {message}")
        self.filename = filename
        self.line = line
        self.col = col


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str, filename: str) -> list[_Token]:
    toks = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i, line, col = i + 1, line + 1, 1
        elif ch in " \t\r":
            i, col = i + 1, col + 1
        elif ch == "#":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "=+*;":
            toks.append(_Token(ch, ch, line, col))
            i, col = i + 1, col + 1
        elif ch == "[":
            start_line, start_col, start = line, col, i
            depth = 0
            while i < n:
                if text[i] == "[":
                    depth += 1
                elif text[i] == "]":
                    depth -= 1
                elif text[i] == "\n":
                    line, col = line + 1, 0
                i, col = i + 1, col + 1
                if depth == 0:
                    break
            if depth != 0:
                raise EquationSyntaxError(
                    "unbalanced brackets", filename, start_line, start_col
                )
            toks.append(_Token("matrix", text[start:i], start_line, start_col))
        elif ch.isdigit():
            start, start_col = i, col
            while i < n and text[i].isdigit():
                i, col = i + 1, col + 1
            toks.append(_Token("number", text[start:i], line, start_col))
        elif ch.isalpha() or ch == "_":
            start, start_col = i, col
            while i < n and (text[i].isalnum() or text[i] in "_-"):
                i, col = i + 1, col + 1
            toks.append(_Token("name", text[start:i], line, start_col))
        else:
            raise EquationSyntaxError(f"unexpected character {ch!r}", filename, line, col)
    toks.append(_Token("end", "", line, col))
    return toks


class _Parser:
    def __init__(self, tokens: list[_Token], filename: str):
        self.tokens = tokens
        self.pos = 0
        self.filename = filename

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def take(self) -> _Token:
        t = self.tokens[self.pos]
        if t.kind != "end":
            self.pos += 1
        return t

    def fail(self, message: str, tok: _Token | None = None):
        tok = tok or self.peek()
        raise EquationSyntaxError(message, self.filename, tok.line, tok.col)

    def expect(self, kind: str, what: str) -> _Token:
        t = self.peek()
        if t.kind != kind:
            self.fail(f"expected {what}, found {t.text!r}" if t.text else f"expected {what}")
        return self.take()

    def keyword(self, word: str):
        t = self.peek()
        if t.kind != "name" or t.text != word:
            self.fail(f"expected {word!r}")
        self.take()


def _parse_factor(p: _Parser, sr: Semiring, variables: set[str]):
    t = p.peek()
    if t.kind == "name" and t.text in variables:
        p.take()
        return t.text
    if t.kind in ("name", "number", "matrix"):
        p.take()
        try:
            return sr.parse_literal(t.text)
        except ValueError as exc:
            p.fail(f"not a variable or {sr.name} literal: {exc}", t)
    p.fail("expected a variable or literal")


def _parse_term(p: _Parser, sr: Semiring, variables: set[str]) -> Monomial:
    factors = [_parse_factor(p, sr, variables)]
    while p.peek().kind == "*":
        p.take()
        factors.append(_parse_factor(p, sr, variables))
    return monomial(sr, factors)


def _parse_expr(p: _Parser, sr: Semiring, variables: set[str]) -> Polynomial:
    monos = [_parse_term(p, sr, variables)]
    while p.peek().kind == "+":
        p.take()
        monos.append(_parse_term(p, sr, variables))
    return polynomial(sr, monos)


def parse(text: str, filename: str = "<input>") -> EquationSystem:
    """Read a system from its textual form."""
    p = _Parser(_tokenize(text, filename), filename)
    p.keyword("semiring")
    name_tok = p.expect("name", "a semiring name")
    param = None
    if p.peek().kind == "number":
        param = int(p.take().text)
    try:
        sr = instance_by_name(name_tok.text, param)
    except ValueError as exc:
        p.fail(str(exc), name_tok)
    p.expect(";", "';'")
    p.keyword("vars")
    variables = []
    while p.peek().kind == "name":
        v = p.take().text
        if v in variables:
            p.fail(f"variable {v} declared twice")
        variables.append(v)
    if not variables:
        p.fail("expected at least one variable")
    p.expect(";", "';'")
    names = set(variables)
    rhs: dict[str, Polynomial] = {}
    while p.peek().kind != "end":
        lhs = p.expect("name", "a variable")
        if lhs.text not in names:
            p.fail(f"undeclared variable {lhs.text}", lhs)
        if lhs.text in rhs:
            p.fail(f"second equation for {lhs.text}", lhs)
        p.expect("=", "'='")
        rhs[lhs.text] = _parse_expr(p, sr, names)
        p.expect(";", "';'")
    missing = [v for v in variables if v not in rhs]
    if missing:
        p.fail(f"no equation for {', '.join(missing)}")
    return equation_system(sr, tuple(variables), rhs)


def render(sys: EquationSystem) -> str:
    """Canonical textual form; parsing it back recovers the system."""
    sr = sys.semiring
    q = getattr(sr, "q", None)
    header = f"semiring relation {q}" if q is not None else f"semiring {sr.name}"
    lines = [header + ";", "vars " + " ".join(sys.variables) + ";"]
    zero = sr.zero()
    for x in sys.variables:
        parts = [render_monomial(m) for m in sys.f[x].monomials]
        if sys.a[x] != zero:
            parts.append(sr.render(sys.a[x]))
        lines.append(f"{x} = {' + '.join(parts) if parts else sr.render(zero)};")
    return "\n".join(lines) + "\n"


def _rendered(sys: EquationSystem, v) -> dict[str, str]:
    return {x: sys.semiring.render(v[x]) for x in sys.variables}


def _emit(args, payload: dict, text_lines: list[str]):
    if args.json:
        print(jsonlib.dumps(payload, indent=2))
    else:
        for line in text_lines:
            print(line)


def _budget(args) -> int | None:
    given = getattr(args, "budget", None)
    if given is not None:
        return given
    env = os.environ.get("SEMIFIX_BUDGET")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise BadUsage(f"SEMIFIX_BUDGET must be an integer, got {env!r}")
    return None


class BadUsage(ValueError):
    pass


def _run_solve(args, sys: EquationSystem) -> int:
    budget = _budget(args)
    if args.method == "kleene":
        out = kleene_solve(sys, budget if budget is not None else DEFAULT_KLEENE_BUDGET)
        values, status, steps = out.value, out.status, out.steps_used
    elif args.method == "newton":
        seq = newton_solve(sys, args.steps, budget)
        values = seq.iterates[-1] if seq.iterates else None
        status, steps = seq.status, max(len(seq.iterates) - 1, 0)
    else:
        seq = munchausen_sequence(sys, args.steps, budget=budget)
        values = seq.iterates[-1] if seq.iterates else None
        status, steps = seq.status, max(len(seq.iterates) - 1, 0)
    shown = _rendered(sys, values) if values is not None else None
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "solve",
        "method": args.method,
        "semiring": sys.semiring.name,
        "variables": list(sys.variables),
        "status": status,
        "steps": steps,
        "values": shown,
    }
    lines = [f"{x} = {shown[x]}" for x in sys.variables] if shown else []
    lines.append(f"status: {status} after {steps} steps")
    _emit(args, payload, lines)
    return 0 if status == "stabilized" else 3


def _run_compare(args, sys: EquationSystem) -> int:
    budget = _budget(args)
    results = {}
    out = kleene_solve(sys, budget if budget is not None else DEFAULT_KLEENE_BUDGET)
    results["kleene"] = (out.value if out.stabilized else None, out.status)
    seq = newton_solve(sys, args.steps, budget)
    results["newton"] = (
        seq.iterates[-1] if seq.stabilized and seq.iterates else None,
        seq.status,
    )
    seq = munchausen_sequence(sys, args.steps, budget=budget)
    results["munchausen"] = (
        seq.iterates[-1] if seq.stabilized and seq.iterates else None,
        seq.status,
    )
    methods = list(results)
    verdicts = []
    for i, a in enumerate(methods):
        for b in methods[i + 1 :]:
            va, vb = results[a][0], results[b][0]
            verdicts.append(
                {
                    "pair": [a, b],
                    "verdict": "skipped"
                    if va is None or vb is None
                    else ("OK" if vector_eq(va, vb) else "DIFFER"),
                }
            )
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "compare",
        "semiring": sys.semiring.name,
        "steps": args.steps,
        "results": {
            m: {"status": st, "values": _rendered(sys, v) if v is not None else None}
            for m, (v, st) in results.items()
        },
        "verdicts": verdicts,
    }
    lines = []
    for m, (v, st) in results.items():
        shown = " ".join(f"{x}={sys.semiring.render(v[x])}" for x in sys.variables) if v else st
        lines.append(f"{m}: {shown}")
    for v in verdicts:
        lines.append(f"{v['pair'][0]} vs {v['pair'][1]}: {v['verdict']}")
    _emit(args, payload, lines)
    return 0


def _run_oracle(args, sys: EquationSystem) -> int:
    node_budget = args.node_budget
    g = grammar_with_constants(sys)
    at = None if args.complete else dict(sys.a)
    sums = {}
    all_stable = True
    for x in sys.variables:
        res = tree_sum(
            g, x, args.dim, complete_only=args.complete, at=at, node_budget=node_budget
        )
        sums[x] = res.value
        all_stable = all_stable and res.stabilized
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "oracle",
        "semiring": sys.semiring.name,
        "dim": args.dim,
        "complete": args.complete,
        "stabilized": all_stable,
        "tree_sums": _rendered(sys, sums),
    }
    lines = [f"{x} = {payload['tree_sums'][x]}" for x in sys.variables]
    if args.complete:
        seq = newton_solve(sys, args.dim)
        if seq.stabilized:
            iterate = seq.iterates[args.dim]
            agree = vector_eq(sums, iterate)
            payload["iterate"] = _rendered(sys, iterate)
            payload["verdict"] = "OK" if agree else "DIFFER"
            lines.append(
                "vs iterate: " + " ".join(f"{x}={payload['iterate'][x]}" for x in sys.variables)
            )
            lines.append(f"verdict: {payload['verdict']}")
    if not all_stable:
        lines.append("status: budget-exhausted")
    _emit(args, payload, lines)
    return 0 if all_stable else 3


def _run_completion(args, sys: EquationSystem) -> int:
    if args.grammar:
        lg = linear_completion_grammar(sys)
        payload = {
            "schema_version": SCHEMA_VERSION,
            "command": "completion",
            "grammar": lincfg_to_json(lg),
        }
        _emit(args, payload, _grammar_lines(lg))
        return 0
    if args.left_linear:
        lg = left_linear_completion_grammar(sys)
        payload = {
            "schema_version": SCHEMA_VERSION,
            "command": "completion",
            "grammar": lincfg_to_json(lg),
        }
        _emit(args, payload, _grammar_lines(lg))
        return 0
    if args.table:
        table = completion_function_table(sys)
        fs = table[sys.variables[0]].semiring
        shown = {x: fs.render(table[x]) for x in sys.variables}
        payload = {
            "schema_version": SCHEMA_VERSION,
            "command": "completion",
            "table": shown,
        }
        _emit(args, payload, [f"{x}: {shown[x]}" for x in sys.variables])
        return 0
    values = completion_via_differential_star(sys, dict(sys.a), _budget(args))
    shown = _rendered(sys, values)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "completion",
        "values": shown,
    }
    _emit(args, payload, [f"{x} = {shown[x]}" for x in sys.variables])
    return 0


def _grammar_lines(lg) -> list[str]:
    lines = []
    for lhs, words in lg.rules.items():
        alts = " | ".join(" ".join(render_lsym(s) for s in w) for w in words)
        lines.append(f"{render_lsym(lhs)} -> {alts}")
    return lines


def _run_grammar(args, sys: EquationSystem) -> int:
    if args.indexed:
        ig = indexed_grammar_of(sys)
        payload = {
            "schema_version": SCHEMA_VERSION,
            "command": "grammar",
            "indexed": indexed_to_json(ig),
        }
        def spell(s):
            if isinstance(s, Coeff):
                return s.value.semiring.render(s.value)
            return f"{s.var}[s]" if isinstance(s, Held) else f"{s.var}[1.s]"

        lines = []
        for y, words in ig.recursion.items():
            for w in words:
                lines.append(f"{y}[1.s] -> {' '.join(spell(s) for s in w)}")
        for y in ig.pop_variables:
            lines.append(f"{y}[1.s] -> {y}[s]")
            lines.append(f"{y}[0] -> {y}")
        _emit(args, payload, lines)
        return 0
    lg = munchausen_grammar(sys, args.level)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "grammar",
        "level": args.level,
        "grammar": lincfg_to_json(lg),
    }
    _emit(args, payload, _grammar_lines(lg))
    return 0


def _run_tensor(args, sys: EquationSystem) -> int:
    if getattr(sys.semiring, "q", None) is None:
        raise BadUsage(f"tensor command needs a relation system, got {sys.semiring.name}")
    got = tensor_pipeline(sys, args.level)
    ref = evaluate_grammar(
        munchausen_grammar(sys, args.level), dict(sys.a), _budget(args)
    )
    agree = ref.stabilized and vector_eq(got, ref.value)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "tensor",
        "level": args.level,
        "values": _rendered(sys, got),
        "reference": _rendered(sys, ref.value) if ref.stabilized else None,
        "verdict": "OK" if agree else "DIFFER",
    }
    lines = [f"{x} = {payload['values'][x]}" for x in sys.variables]
    lines.append(f"verdict: {payload['verdict']}")
    _emit(args, payload, lines)
    return 0


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="semifix",
        description="Solve polynomial fixed point systems over semiring instances.",
    )
    sub = top.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("file", help="system description file")
        p.add_argument("--json", action="store_true", help="machine readable output")

    p = sub.add_parser("solve", help="compute the least solution")
    common(p)
    p.add_argument(
        "--method",
        choices=("kleene", "newton", "munchausen"),
        default="kleene",
    )
    p.add_argument("--steps", type=int, default=3, help="iterates for the accelerated methods")
    p.add_argument("--budget", type=int, help="iteration budget override")

    p = sub.add_parser("compare", help="run all methods and diff the results")
    common(p)
    p.add_argument("--steps", type=int, default=2)
    p.add_argument("--budget", type=int)

    p = sub.add_parser("oracle", help="sum derivation trees by dimension")
    common(p)
    p.add_argument("--dim", type=int, default=2, help="dimension bound")
    p.add_argument(
        "--complete",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="restrict to fully expanded trees",
    )
    p.add_argument("--node-budget", type=int, default=DEFAULT_NODE_BUDGET)

    p = sub.add_parser("completion", help="substitution closure of the system")
    common(p)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--grammar", action="store_true", help="emit the closure grammar")
    mode.add_argument(
        "--left-linear", action="store_true", help="emit the left linear variant"
    )
    mode.add_argument(
        "--table", action="store_true", help="tabulate the closure over a finite instance"
    )
    p.add_argument("--budget", type=int)

    p = sub.add_parser("grammar", help="emit the doubling ladder grammar")
    common(p)
    p.add_argument("--level", type=int, default=1, help="number of doublings")
    p.add_argument("--indexed", action="store_true", help="emit the stack indexed form")

    p = sub.add_parser("tensor", help="solve through the tensor companion")
    common(p)
    p.add_argument("--level", type=int, default=1)
    p.add_argument("--budget", type=int)

    return top


_RUNNERS = {
    "solve": _run_solve,
    "compare": _run_compare,
    "oracle": _run_oracle,
    "completion": _run_completion,
    "grammar": _run_grammar,
    "tensor": _run_tensor,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        with open(args.file, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"cannot read {args.file}: {exc}", file=_sys.stderr)
        return 1
    try:
        sys = parse(text, args.file)
        return _RUNNERS[args.command](args, sys)
    except EquationSyntaxError as exc:
        print(exc, file=_sys.stderr)
        return 2
    except (BadUsage, NotFiniteError) as exc:
        print(exc, file=_sys.stderr)
        return 1
    except BudgetExhaustedError as exc:
        print(f"budget exhausted: {exc}", file=_sys.stderr)
        return 3
    except (InvariantError, InstanceMismatchError) as exc:
        print(f"internal invariant violated: {exc}", file=_sys.stderr)
        return 4


if __name__ == "__main__":
    raise SystemExit(main())
