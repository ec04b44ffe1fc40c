from fractions import Fraction

from paramverify.parsing import parse_formula, parse_statements
from paramverify.printing import canonical, print_canonical, print_formula, print_term
from paramverify.terms import App, Atom, FALSE, Num, Signature, TRUE


def sig():
    s = Signature()
    s.extension_functions["a"] = (1, 2)
    return s


def test_moved_to_lhs_form():
    f = parse_formula("d1 <= d2;", Signature())
    assert print_canonical(f) == "d1 - d2 <= _0"


def test_monotone_atom_prints_as_reference():
    f = parse_formula("(FORALL i). a(i) <= a(i + _1);", sig())
    assert print_canonical(f) == "(FORALL i). a(i + _1) - a(i) >= _0"


def test_literal_order_function_atoms_first():
    f = parse_formula("OR(d1 - d2 > _0, a(i + _1) - a(i) >= _0);", sig())
    assert print_canonical(f) == "OR(a(i + _1) - a(i) >= _0, d1 - d2 > _0)"


def test_ground_literals_descending():
    f = parse_formula("OR(ea <= _0, lf - lsafe <= _0, min < _0, lsafe < _0);", Signature())
    assert print_canonical(f) == "OR(min < _0, lsafe < _0, lf - lsafe <= _0, ea <= _0)"


def test_trivial_literal():
    assert print_canonical(parse_formula("_1 <= _2;", Signature())) == "true"
    assert print_formula(Atom("<=", Num(Fraction(1)), Num(Fraction(2)))) == "_1 <= _2"


def test_parameter_products_sorted_and_parenthesized():
    s = Signature()
    f = parse_formula("(((dmax * epsilon) - (dmin * epsilon)) - ea) + lsafe < _0;", s)
    assert print_canonical(f) == "(((dmax * epsilon) - (dmin * epsilon)) - ea) + lsafe < _0"
    g = parse_formula("lsafe + (epsilon * dmax - ea - epsilon * dmin) < _0;", s)
    assert print_canonical(g) == print_canonical(f)


def test_true_false_forms():
    assert print_formula(TRUE) == "true"
    assert print_formula(FALSE) == "false"
    assert canonical(parse_formula("sk_x - sk_x != _0;", Signature())) == FALSE


def test_scaling_first_coefficient_to_one():
    f = parse_formula("_2 * x - _4 * y <= _6;", Signature())
    assert print_canonical(f) == "x - (_2 * y) <= _3"


def test_unary_minus_round_trip():
    s = Signature()
    f = parse_formula("-esafe <= x1 - x2;", s)
    assert print_formula(f) == "-esafe <= x1 - x2"
    assert print_canonical(f) == "(esafe + x1) - x2 >= _0"


def test_conjunction_order_stable():
    s = sig()
    fs = parse_statements("d1 - d2 <= _0; (FORALL i). a(i + _1) - a(i) >= _0;", s)
    assert [print_formula(f) for f in fs] == [
        "d1 - d2 <= _0",
        "(FORALL i). a(i + _1) - a(i) >= _0",
    ]
