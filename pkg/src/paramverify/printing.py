"""Concrete-syntax printer and canonical formula normalization.

Atoms are canonicalized into moved-to-left-hand-side form: all symbol
terms on the left (sorted, leading coefficient +1), a numeral on the
right.  Disjunction/conjunction members are ordered with atoms that
apply a proper function first, then descending by printed form, which
keeps printed results stable across runs.
"""

from fractions import Fraction
from typing import Dict, List, Tuple, Union

from .errors import SortError
from .terms import (
    App,
    Atom,
    And,
    Exists,
    FALSE,
    Forall,
    Formula,
    Implies,
    Not,
    Num,
    Or,
    TRUE,
    Term,
    Var,
)

ARITH = {"+", "-", "*"}


def print_numeral(q: Fraction) -> str:
    return "_%s" % q


def _is_binary_arith(t: Term) -> bool:
    return isinstance(t, App) and t.fn in ARITH and len(t.args) == 2


def _wrap(t: Term) -> str:
    s = print_term(t)
    return "(%s)" % s if _is_binary_arith(t) else s


def print_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Num):
        return print_numeral(t.value)
    if t.fn in ARITH and len(t.args) == 2:
        return "%s %s %s" % (_wrap(t.args[0]), t.fn, _wrap(t.args[1]))
    if t.fn == "-" and len(t.args) == 1:
        return "-%s" % _wrap(t.args[0])
    if not t.args:
        return t.fn
    return "%s(%s)" % (t.fn, ", ".join(print_term(a) for a in t.args))


def print_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        return "%s %s %s" % (print_term(f.lhs), f.rel, print_term(f.rhs))
    if isinstance(f, And):
        if not f.parts:
            return "true"
        if len(f.parts) == 1:
            return print_formula(f.parts[0])
        return "AND(%s)" % ", ".join(print_formula(p) for p in f.parts)
    if isinstance(f, Or):
        if not f.parts:
            return "false"
        if len(f.parts) == 1:
            return print_formula(f.parts[0])
        return "OR(%s)" % ", ".join(print_formula(p) for p in f.parts)
    if isinstance(f, Not):
        return "NOT(%s)" % print_formula(f.body)
    if isinstance(f, Implies):
        return "%s --> %s" % (print_formula(f.left), print_formula(f.right))
    if isinstance(f, Forall):
        return "(FORALL %s). %s" % (",".join(f.variables), print_formula(f.body))
    if isinstance(f, Exists):
        return "(EXISTS %s). %s" % (",".join(f.variables), print_formula(f.body))
    raise TypeError(f)


# ---------------------------------------------------------------------------
# Linear canonical form over symbolic terms

Monomial = Tuple[Term, ...]  # sorted atomic factors; () is the constant part


def _term_key(t: Term) -> str:
    return print_term(t)


def _combine(t: Term) -> Dict[Monomial, Fraction]:
    """Interpret +, - and * over atomic summands (variables, numerals,
    applications of non-arithmetic functions)."""
    if isinstance(t, Num):
        return {(): t.value}
    if isinstance(t, Var) or isinstance(t, App) and t.fn not in ARITH:
        return {(t,): Fraction(1)}
    if t.fn == "-" and len(t.args) == 1:
        return _scale(_combine(t.args[0]), Fraction(-1))
    if t.fn == "+":
        return _add(_combine(t.args[0]), _combine(t.args[1]))
    if t.fn == "-":
        return _add(_combine(t.args[0]), _scale(_combine(t.args[1]), Fraction(-1)))
    if t.fn == "*":
        return _mul(_combine(t.args[0]), _combine(t.args[1]))
    raise SortError("cannot linearize term %s" % print_term(t))


def _add(a, b):
    out = dict(a)
    for m, c in b.items():
        c2 = out.get(m, Fraction(0)) + c
        if c2:
            out[m] = c2
        else:
            out.pop(m, None)
    return out


def _scale(a, q: Fraction):
    if not q:
        return {}
    return {m: c * q for m, c in a.items()}


def _mul(a, b):
    out: Dict[Monomial, Fraction] = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            m = tuple(sorted(m1 + m2, key=_term_key))
            c = out.get(m, Fraction(0)) + c1 * c2
            if c:
                out[m] = c
            else:
                out.pop(m, None)
    return out


def _monomial_term(m: Monomial, coeff: Fraction) -> Term:
    factors: List[Term] = list(m)
    if coeff != 1 or not factors:
        factors = [Num(coeff)] + factors
    expr = factors[0]
    for f in factors[1:]:
        expr = App("*", (expr, f))
    return expr


_FLIP = {"<=": ">=", "<": ">", ">=": "<=", ">": "<", "=": "=", "!=": "!="}


def normalize_atom(a: Atom) -> Union[Atom, Formula]:
    """Moved-to-left-hand-side form with sorted terms and leading
    coefficient +1; constant atoms collapse to true/false."""
    combo = _add(_combine(a.lhs), _scale(_combine(a.rhs), Fraction(-1)))
    constant = combo.pop((), Fraction(0))
    if not combo:
        value = _eval_rel(a.rel, constant)
        return TRUE if value else FALSE
    monos = sorted(combo, key=lambda m: " * ".join(_term_key(f) for f in m))
    rel = a.rel
    lead = combo[monos[0]]
    scale = abs(lead)
    if lead < 0:
        scale = -scale
        rel = _FLIP[rel]
    combo = {m: c / scale for m, c in combo.items()}
    rhs = -constant / scale
    lhs: Term = _monomial_term(monos[0], combo[monos[0]])
    for m in monos[1:]:
        c = combo[m]
        if c < 0:
            lhs = App("-", (lhs, _monomial_term(m, -c)))
        else:
            lhs = App("+", (lhs, _monomial_term(m, c)))
    return Atom(rel, lhs, Num(rhs))


def _eval_rel(rel: str, value: Fraction) -> bool:
    if rel == "=":
        return value == 0
    if rel == "!=":
        return value != 0
    if rel == "<=":
        return value <= 0
    if rel == "<":
        return value < 0
    if rel == ">=":
        return value >= 0
    return value > 0


def _has_proper_app(f: Formula) -> bool:
    from .terms import formula_terms, subterms

    for t in formula_terms(f):
        for s in subterms(t):
            if isinstance(s, App) and s.args and s.fn not in ARITH:
                return True
    return False


def _ordered(parts: List[Formula]) -> Tuple[Formula, ...]:
    by_text = sorted(parts, key=print_formula, reverse=True)
    return tuple(sorted(by_text, key=lambda p: 0 if _has_proper_app(p) else 1))


def canonical(f: Formula) -> Formula:
    """Canonical normal form used for printed results and for
    structural comparison of equivalent outputs."""
    if isinstance(f, Atom):
        return normalize_atom(f)
    if isinstance(f, Not):
        from .terms import nnf

        return canonical(nnf(f))
    if isinstance(f, Implies):
        from .terms import nnf

        return canonical(nnf(f))
    if isinstance(f, And):
        parts: List[Formula] = []
        for p in f.parts:
            q = canonical(p)
            if q == TRUE:
                continue
            if q == FALSE:
                return FALSE
            sub = q.parts if isinstance(q, And) else (q,)
            for s in sub:
                if s not in parts:
                    parts.append(s)
        if not parts:
            return TRUE
        if len(parts) == 1:
            return parts[0]
        return And(_ordered(parts))
    if isinstance(f, Or):
        parts = []
        for p in f.parts:
            q = canonical(p)
            if q == FALSE:
                continue
            if q == TRUE:
                return TRUE
            sub = q.parts if isinstance(q, Or) else (q,)
            for s in sub:
                if s not in parts:
                    parts.append(s)
        if not parts:
            return FALSE
        if len(parts) == 1:
            return parts[0]
        return Or(_ordered(parts))
    if isinstance(f, (Forall, Exists)):
        from .terms import free_variables

        body = canonical(f.body)
        used = tuple(v for v in f.variables if v in free_variables(body))
        if not used:
            return body
        return type(f)(used, body)
    raise TypeError(f)


def print_canonical(f: Formula) -> str:
    return print_formula(canonical(f))
