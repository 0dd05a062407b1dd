"""Line-by-line checkers for two clausal calculi over F_p.

The equation calculus works on disjunctions of linear equations f = a and
has rules

    resolution      C v f=0,  D v g=0  =>  C v D v (alpha*f + beta*g)=0
    simplification  C v a=0  (constant a != 0)  =>  C
    weakening       C  =>  C v f=0

with boolean axioms x=0 v x=1.  A refutation derives the empty clause
from the input clauses.

The inequality calculus works on disjunctions of linear inequalities
f != a and has rules

    resolution      C_0 v f!=0, ..., C_{p-1} v f!=p-1  =>  C_0 v ... v C_{p-1}
    simplification  C v 0!=0  =>  C
    linear comb.    C v f!=a  =>  C v f+g != a+b v g != b

with boolean axioms x!=2, ..., x!=p-1 (one unit clause per excluded
value) and truth axioms 0!=c for c != 0.
Resolution consumes one premise per residue, p in total.  By default a
refutation of a system derives the clause joining f != b over all rows
f = b from axioms alone; with ``from_negations=True`` the rows' negated
single-literal clauses f != c (c != b) are available as inputs and the
target is the empty clause.

Every rule application cites its premises, literal positions, and scalar
parameters explicitly; the checker performs no inference search.  Clauses
compare as multisets of literals, and duplicates are legal.

Derivation file grammar (UTF-8, line oriented; integers in [0, p)):

    line <i> clause <lit>; <lit>; ... by <justification>

    lit            := <n coeffs> | <rhs> <= or !=>
    justification  := input <j>
                    | axiom var <j>
                    | axiom truth <c>                      (neq only)
                    | res <i> <li> <j> <lj> <alpha> <beta> (eq)
                    | res <i0> <l0> ... <i_{p-1}> <l_{p-1}> (neq)
                    | simp <k> <li>
                    | weak <k> <n coeffs> | <rhs>          (eq only)
                    | lincomb <k> <li> <n coeffs> | <b>    (neq only)
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import ParseError
from .instances import LinearSystem
from .linalg import Field
from .refutations import CheckResult


@dataclass(frozen=True, order=True)
class Lit:
    """One literal: a linear form and a right-hand side.

    The polarity (= or !=) is fixed by the calculus of the derivation.
    """

    coeffs: Tuple[int, ...]
    rhs: int

    def is_constant(self) -> bool:
        return not any(self.coeffs)


Clause = Tuple[Lit, ...]


@dataclass(frozen=True)
class Line:
    clause: Clause
    just: Tuple


@dataclass(frozen=True)
class Derivation:
    calculus: str  # "eq" | "neq"
    lines: Tuple[Line, ...]


def lit(field: Field, coeffs: Sequence[int], rhs: int) -> Lit:
    p = field.p
    return Lit(tuple(int(c) % p for c in coeffs), int(rhs) % p)


def clause_multiset(clause: Clause):
    return tuple(sorted(clause))


def _combine(field: Field, a: Lit, b: Lit, alpha: int, beta: int) -> Lit:
    p = field.p
    coeffs = tuple((alpha * x + beta * y) % p for x, y in zip(a.coeffs, b.coeffs))
    return Lit(coeffs, (alpha * a.rhs + beta * b.rhs) % p)


def _without_index(clause: Clause, idx: int) -> Optional[Clause]:
    if not 0 <= idx < len(clause):
        return None
    return clause[:idx] + clause[idx + 1 :]


def _unit(n: int, j: int) -> Tuple[int, ...]:
    u = [0] * n
    u[j] = 1
    return tuple(u)


def boolean_axiom_eq(field: Field, n: int, j: int) -> Clause:
    return (Lit(_unit(n, j), 0), Lit(_unit(n, j), 1))


def boolean_axiom_neq(field: Field, n: int, j: int, v: int) -> Clause:
    """The unit axiom x_j != v for an excluded value v in {2, ..., p-1}."""
    if not 2 <= v < field.p:
        raise ValueError("boolean axiom value must lie in {2, ..., p-1}")
    return (Lit(_unit(n, j), v),)


def truth_axiom(field: Field, n: int, c: int) -> Clause:
    if c % field.p == 0:
        raise ValueError("truth axiom needs a nonzero constant")
    return (Lit((0,) * n, c % field.p),)


def negation_inputs(inst: LinearSystem) -> List[Clause]:
    """Single-literal clauses f != c for each row f = b and each c != b."""
    out: List[Clause] = []
    for i in range(inst.k):
        coeffs = tuple(int(v) for v in inst.a[i])
        b = int(inst.b[i])
        for c in range(inst.field.p):
            if c != b:
                out.append((Lit(coeffs, c),))
    return out


def refutation_target(inst: LinearSystem) -> Clause:
    """The clause joining f != b over all instance rows."""
    return tuple(Lit(tuple(int(v) for v in inst.a[i]), int(inst.b[i])) for i in range(inst.k))


def _check_line_shape(field: Field, n: int, line: Line, lineno: int) -> Optional[str]:
    for l in line.clause:
        if len(l.coeffs) != n:
            return f"line {lineno}: literal has {len(l.coeffs)} coefficients, expected {n}"
        if any(not 0 <= c < field.p for c in l.coeffs) or not 0 <= l.rhs < field.p:
            return f"line {lineno}: literal entries outside [0, p)"
    return None


def check_reslin(
    deriv: Derivation, inputs: Sequence[Clause], field: Field, n: int
) -> CheckResult:
    """Accept iff every line is justified and the last clause is empty."""
    if deriv.calculus != "eq":
        return CheckResult(False, "derivation is not in the equation calculus")
    lines = deriv.lines
    if not lines:
        return CheckResult(False, "empty derivation")
    input_keys = [clause_multiset(c) for c in inputs]
    for idx, line in enumerate(lines):
        shape = _check_line_shape(field, n, line, idx)
        if shape:
            return CheckResult(False, shape)
        msg = _check_eq_just(field, n, lines, input_keys, idx)
        if msg:
            return CheckResult(False, f"line {idx}: {msg}")
    if lines[-1].clause:
        return CheckResult(False, "last line is not the empty clause")
    return CheckResult(True)


def _premise(lines, idx, k) -> Optional[Clause]:
    if not isinstance(k, int) or not 0 <= k < idx:
        return None
    return lines[k].clause


def _check_eq_just(field, n, lines, input_keys, idx) -> Optional[str]:
    line = lines[idx]
    just = line.just
    kind = just[0]
    key = clause_multiset(line.clause)
    if kind == "input":
        j = just[1]
        if not 0 <= j < len(input_keys):
            return f"input index {j} out of range"
        if key != input_keys[j]:
            return f"clause does not match input {j}"
        return None
    if kind == "axiom-var":
        j = just[1]
        if not 0 <= j < n:
            return f"axiom variable {j} out of range"
        if key != clause_multiset(boolean_axiom_eq(field, n, j)):
            return "clause is not the boolean axiom for that variable"
        return None
    if kind == "res":
        (i, li), (j, lj), alpha, beta = just[1], just[2], just[3] % field.p, just[4] % field.p
        prem_a = _premise(lines, idx, i)
        prem_b = _premise(lines, idx, j)
        if prem_a is None or prem_b is None:
            return "resolution premises must be earlier lines"
        rest_a = _without_index(prem_a, li)
        rest_b = _without_index(prem_b, lj)
        if rest_a is None or rest_b is None:
            return "designated literal index out of range"
        new = _combine(field, prem_a[li], prem_b[lj], alpha, beta)
        if key != clause_multiset(rest_a + rest_b + (new,)):
            return "conclusion is not C v D v (alpha*f + beta*g = 0)"
        return None
    if kind == "simp":
        k, li = just[1], just[2]
        prem = _premise(lines, idx, k)
        if prem is None:
            return "simplification premise must be an earlier line"
        if not 0 <= li < len(prem):
            return "designated literal index out of range"
        target = prem[li]
        if not target.is_constant() or target.rhs == 0:
            return "simplification literal must be a constant equation 0 = a with a != 0"
        if key != clause_multiset(_without_index(prem, li)):
            return "conclusion is not the premise without the constant literal"
        return None
    if kind == "weak":
        k, added = just[1], just[2]
        prem = _premise(lines, idx, k)
        if prem is None:
            return "weakening premise must be an earlier line"
        if key != clause_multiset(prem + (added,)):
            return "conclusion is not the premise plus the added literal"
        return None
    return f"unknown justification {kind!r}"


def check_reslin_neq(
    deriv: Derivation,
    inst: LinearSystem,
    from_negations: bool = False,
) -> CheckResult:
    """Accept iff every line is justified and the final clause hits the target.

    Default target: the clause joining f != b over the instance rows,
    derived from axioms alone.  With from_negations=True the instance's
    negated rows are available via `input` and the target is empty.
    """
    if deriv.calculus != "neq":
        return CheckResult(False, "derivation is not in the inequality calculus")
    field, n = inst.field, inst.n
    lines = deriv.lines
    if not lines:
        return CheckResult(False, "empty derivation")
    input_keys = [clause_multiset(c) for c in negation_inputs(inst)] if from_negations else []
    for idx, line in enumerate(lines):
        shape = _check_line_shape(field, n, line, idx)
        if shape:
            return CheckResult(False, shape)
        msg = _check_neq_just(field, n, lines, input_keys, idx)
        if msg:
            return CheckResult(False, f"line {idx}: {msg}")
    final = clause_multiset(lines[-1].clause)
    if from_negations:
        if final != ():
            return CheckResult(False, "last line is not the empty clause")
    else:
        if final != clause_multiset(refutation_target(inst)):
            return CheckResult(False, "last line is not the instance's inequality clause")
    return CheckResult(True)


def _check_neq_just(field, n, lines, input_keys, idx) -> Optional[str]:
    p = field.p
    line = lines[idx]
    just = line.just
    kind = just[0]
    key = clause_multiset(line.clause)
    if kind == "input":
        j = just[1]
        if not 0 <= j < len(input_keys):
            return f"input index {j} out of range (inputs disabled or too few)"
        if key != input_keys[j]:
            return f"clause does not match input {j}"
        return None
    if kind == "axiom-var":
        if len(just) != 3:
            return "boolean axiom must cite (variable, excluded value)"
        j, v = just[1], just[2]
        if not 0 <= j < n:
            return f"axiom variable {j} out of range"
        if not 2 <= v < p:
            return f"axiom value {v} outside {{2, ..., p-1}}"
        if key != clause_multiset(boolean_axiom_neq(field, n, j, v)):
            return "clause is not the unit boolean axiom x != v"
        return None
    if kind == "axiom-truth":
        c = just[1] % p
        if c == 0:
            return "truth axiom constant must be nonzero"
        if key != clause_multiset(truth_axiom(field, n, c)):
            return "clause is not the truth axiom 0 != c"
        return None
    if kind == "res":
        pairs = just[1]
        if len(pairs) != p:
            return f"resolution needs {p} premises, one per residue"
        base = None
        rests: List[Clause] = []
        for value, (k, li) in enumerate(pairs):
            prem = _premise(lines, idx, k)
            if prem is None:
                return "resolution premises must be earlier lines"
            if not 0 <= li < len(prem):
                return "designated literal index out of range"
            target = prem[li]
            if base is None:
                base = target.coeffs
            if target.coeffs != base or target.rhs != value:
                return f"premise {value} does not designate f != {value}"
            rests.append(_without_index(prem, li))
        merged: Tuple[Lit, ...] = ()
        for r in rests:
            merged = merged + r
        if key != clause_multiset(merged):
            return "conclusion is not the join of the side clauses"
        return None
    if kind == "simp":
        k, li = just[1], just[2]
        prem = _premise(lines, idx, k)
        if prem is None:
            return "simplification premise must be an earlier line"
        if not 0 <= li < len(prem):
            return "designated literal index out of range"
        target = prem[li]
        if not target.is_constant() or target.rhs != 0:
            return "simplification literal must be 0 != 0"
        if key != clause_multiset(_without_index(prem, li)):
            return "conclusion is not the premise without the trivial literal"
        return None
    if kind == "lincomb":
        k, li, g, b = just[1], just[2], just[3], just[4] % p
        prem = _premise(lines, idx, k)
        if prem is None:
            return "linear combination premise must be an earlier line"
        if not 0 <= li < len(prem):
            return "designated literal index out of range"
        if len(g) != n:
            return "g must have one coefficient per variable"
        f = prem[li]
        combined = Lit(tuple((x + y) % p for x, y in zip(f.coeffs, g)), (f.rhs + b) % p)
        expect = _without_index(prem, li) + (combined, Lit(tuple(c % p for c in g), b))
        if key != clause_multiset(expect):
            return "conclusion is not C v f+g != a+b v g != b"
        return None
    return f"unknown justification {kind!r}"


def check_derivation_lines(
    deriv: Derivation,
    field: Field,
    n: int,
    inputs: Sequence[Clause] = (),
) -> CheckResult:
    """Validate every line's justification without any final-clause target."""
    lines = deriv.lines
    input_keys = [clause_multiset(c) for c in inputs]
    for idx, line in enumerate(lines):
        shape = _check_line_shape(field, n, line, idx)
        if shape:
            return CheckResult(False, shape)
        if deriv.calculus == "eq":
            msg = _check_eq_just(field, n, lines, input_keys, idx)
        else:
            msg = _check_neq_just(field, n, lines, input_keys, idx)
        if msg:
            return CheckResult(False, f"line {idx}: {msg}")
    return CheckResult(True)


# ---------------------------------------------------------------------------
# file format


def _lit_text(l: Lit, op: str) -> str:
    return " ".join(str(c) for c in l.coeffs) + f" | {l.rhs} {op}"


def _just_text(just: Tuple) -> str:
    kind = just[0]
    if kind == "input":
        return f"input {just[1]}"
    if kind == "axiom-var" and len(just) == 3:
        return f"axiom var {just[1]} {just[2]}"
    if kind == "axiom-var":
        return f"axiom var {just[1]}"
    if kind == "axiom-truth":
        return f"axiom truth {just[1]}"
    if kind == "res" and len(just) == 5:
        (i, li), (j, lj), alpha, beta = just[1], just[2], just[3], just[4]
        return f"res {i} {li} {j} {lj} {alpha} {beta}"
    if kind == "res":
        return "res " + " ".join(f"{k} {li}" for k, li in just[1])
    if kind == "simp":
        return f"simp {just[1]} {just[2]}"
    if kind == "weak":
        added = just[2]
        return "weak " + str(just[1]) + " " + " ".join(str(c) for c in added.coeffs) + f" | {added.rhs}"
    if kind == "lincomb":
        g = " ".join(str(c) for c in just[3])
        return f"lincomb {just[1]} {just[2]} {g} | {just[4]}"
    raise ValueError(f"unknown justification {kind!r}")


def serialize_derivation(deriv: Derivation) -> str:
    op = "=" if deriv.calculus == "eq" else "!="
    out = []
    for i, line in enumerate(deriv.lines):
        lits = "; ".join(_lit_text(l, op) for l in line.clause)
        out.append(f"line {i} clause {lits} by {_just_text(line.just)}".replace("clause  by", "clause by"))
    return "\n".join(out) + "\n"


def _parse_lit(text: str, n: int, p: int, op: str, lineno: int) -> Lit:
    toks = text.split()
    if len(toks) < 3 or toks[-1] != op or toks[-3] != "|":
        raise ParseError(f"literal must read '<coeffs> | <rhs> {op}'", lineno)
    coeffs = [int(t) for t in toks[:-3]]
    rhs = int(toks[-2])
    if len(coeffs) != n:
        raise ParseError(f"literal has {len(coeffs)} coefficients, expected {n}", lineno)
    if any(not 0 <= c < p for c in coeffs) or not 0 <= rhs < p:
        raise ParseError("literal entries outside [0, p)", lineno)
    return Lit(tuple(coeffs), rhs)


def _parse_just(toks: List[str], calculus: str, p: int, lineno: int) -> Tuple:
    head = toks[0]
    if head == "input":
        return ("input", int(toks[1]))
    if head == "axiom":
        if toks[1] == "var" and calculus == "eq" and len(toks) == 3:
            return ("axiom-var", int(toks[2]))
        if toks[1] == "var" and calculus == "neq" and len(toks) == 4:
            return ("axiom-var", int(toks[2]), int(toks[3]))
        if toks[1] == "truth" and len(toks) == 3:
            return ("axiom-truth", int(toks[2]))
        raise ParseError("axiom must be 'axiom var <j> [v]' or 'axiom truth <c>'", lineno)
    if head == "res":
        nums = [int(t) for t in toks[1:]]
        if calculus == "eq":
            if len(nums) != 6:
                raise ParseError("equation resolution takes 6 integers", lineno)
            return ("res", (nums[0], nums[1]), (nums[2], nums[3]), nums[4], nums[5])
        if len(nums) != 2 * p:
            raise ParseError(f"inequality resolution takes {2 * p} integers", lineno)
        return ("res", tuple((nums[2 * a], nums[2 * a + 1]) for a in range(p)))
    if head == "simp":
        return ("simp", int(toks[1]), int(toks[2]))
    if head == "weak":
        if calculus != "eq":
            raise ParseError("weakening only exists in the equation calculus", lineno)
        if "|" not in toks:
            raise ParseError("weakening literal missing '|'", lineno)
        bar = toks.index("|")
        coeffs = tuple(int(t) for t in toks[2:bar])
        return ("weak", int(toks[1]), Lit(coeffs, int(toks[bar + 1])))
    if head == "lincomb":
        if calculus != "neq":
            raise ParseError("linear combination only exists in the inequality calculus", lineno)
        if "|" not in toks:
            raise ParseError("lincomb form missing '|'", lineno)
        bar = toks.index("|")
        g = tuple(int(t) for t in toks[3:bar])
        return ("lincomb", int(toks[1]), int(toks[2]), g, int(toks[bar + 1]))
    raise ParseError(f"unknown justification {head!r}", lineno)


def parse_derivation(text: str, calculus: str, field: Field, n: int) -> Derivation:
    if calculus not in ("eq", "neq"):
        raise ValueError("calculus must be 'eq' or 'neq'")
    op = "=" if calculus == "eq" else "!="
    lines: List[Line] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if " by " not in stripped:
            raise ParseError("line missing 'by' justification", lineno)
        left, right = stripped.rsplit(" by ", 1)
        toks = left.split(None, 2)
        if len(toks) < 2 or toks[0] != "line" or int(toks[1]) != len(lines):
            raise ParseError(f"expected 'line {len(lines)} clause ...'", lineno)
        rest = toks[2] if len(toks) > 2 else ""
        if not rest.startswith("clause"):
            raise ParseError("missing 'clause' keyword", lineno)
        body = rest[len("clause") :].strip()
        clause: List[Lit] = []
        if body:
            for part in body.split(";"):
                clause.append(_parse_lit(part.strip(), n, field.p, op, lineno))
        just = _parse_just(right.split(), calculus, field.p, lineno)
        lines.append(Line(tuple(clause), just))
    if not lines:
        raise ParseError("empty derivation file")
    return Derivation(calculus=calculus, lines=tuple(lines))


def load_derivation(path, calculus: str, field: Field, n: int) -> Derivation:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_derivation(fh.read(), calculus, field, n)
