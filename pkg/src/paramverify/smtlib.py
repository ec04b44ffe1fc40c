"""SMT-LIB2 export of reduced ground problems, for cross-checking with
external solvers."""

from fractions import Fraction
from typing import Iterable, List

from .errors import SortError
from .terms import App, Atom, And, Formula, Implies, Not, Num, Or, Var, formula_symbols


def _sexpr_num(q: Fraction) -> str:
    if q < 0:
        return "(- %s)" % _sexpr_num(-q)
    if q.denominator == 1:
        return str(q.numerator)
    return "(/ %d %d)" % (q.numerator, q.denominator)


def _sexpr_term(t) -> str:
    if isinstance(t, Num):
        return _sexpr_num(t.value)
    if isinstance(t, Var):
        raise SortError("cannot export non-ground term (variable %s)" % t.name)
    if isinstance(t, App):
        if not t.args:
            return t.fn
        if t.fn == "-" and len(t.args) == 1:
            return "(- %s)" % _sexpr_term(t.args[0])
        if t.fn in ("+", "-", "*"):
            return "(%s %s %s)" % (t.fn, _sexpr_term(t.args[0]), _sexpr_term(t.args[1]))
        raise SortError("cannot export unpurified application of %s" % t.fn)
    raise TypeError(t)


def _sexpr_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        l, r = _sexpr_term(f.lhs), _sexpr_term(f.rhs)
        if f.rel == "!=":
            return "(not (= %s %s))" % (l, r)
        rel = {"<=": "<=", "<": "<", ">=": ">=", ">": ">", "=": "="}[f.rel]
        return "(%s %s %s)" % (rel, l, r)
    if isinstance(f, And):
        if not f.parts:
            return "true"
        if len(f.parts) == 1:
            return _sexpr_formula(f.parts[0])
        return "(and %s)" % " ".join(_sexpr_formula(p) for p in f.parts)
    if isinstance(f, Or):
        if not f.parts:
            return "false"
        if len(f.parts) == 1:
            return _sexpr_formula(f.parts[0])
        return "(or %s)" % " ".join(_sexpr_formula(p) for p in f.parts)
    if isinstance(f, Not):
        return "(not %s)" % _sexpr_formula(f.body)
    if isinstance(f, Implies):
        return "(=> %s %s)" % (_sexpr_formula(f.left), _sexpr_formula(f.right))
    raise SortError("cannot export quantified formula")


def export_smtlib(formulas: Iterable[Formula]) -> str:
    """QF_LRA script: declarations sorted lexicographically, asserts in
    source order, one check-sat."""
    formulas = list(formulas)
    symbols = set()
    for f in formulas:
        symbols |= {s for s in formula_symbols(f) if s not in ("+", "-", "*")}
    lines: List[str] = ["(set-logic QF_LRA)"]
    for s in sorted(symbols):
        lines.append("(declare-const %s Real)" % s)
    if not formulas:
        lines.append("(assert true)")
    for f in formulas:
        lines.append("(assert %s)" % _sexpr_formula(f))
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"
