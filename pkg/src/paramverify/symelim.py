"""Property-directed symbol elimination.

Produces the weakest universal constraint on the parameter symbols that
makes a reduced problem unsatisfiable: purify, existentially eliminate
every non-parameter constant, negate, then re-substitute definition
terms and universally close over the kept argument constants.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .errors import EngineError, SortError
from .linear import (
    LinAtom,
    assumptions_from,
    decide,
    eliminate,
    is_sat,
    lin_to_atom,
    make_atom,
    poly_scale,
    simplify,
    to_linear,
)
from .printing import canonical, print_formula, print_term
from .reduction import (
    clause_level,
    extension_heads,
    reduce_chain,
    split_statements,
)
from .terms import (
    And,
    App,
    Atom,
    FALSE,
    Forall,
    Formula,
    Or,
    Signature,
    TRUE,
    Term,
    Var,
    conj,
    disj,
    formula_symbols,
    negate_universal,
    subterms,
    substitute,
)


@dataclass
class ConstraintResult:
    constraint: Formula  # conjunction of universally closed clauses
    weakest: bool
    steps: List[str] = field(default_factory=list)


def _occurring_constants(formulas: Iterable[Formula], sig: Signature) -> List[str]:
    """Constants of the formulas in first-occurrence order."""
    from .terms import formula_terms

    out: List[str] = []
    for f in formulas:
        for t in formula_terms(f):
            for s in subterms(t):
                if isinstance(s, App) and not s.args and s.fn in sig.constants and s.fn not in out:
                    out.append(s.fn)
    return out


def _register_constants(sig: Signature, f: Formula) -> None:
    from .terms import formula_terms

    for t in formula_terms(f):
        for s in subterms(t):
            if isinstance(s, App) and not s.args and sig.arity_of(s.fn) is None:
                sig.declare_constant(s.fn)


def _constants_in(term: Term, sig: Signature) -> List[str]:
    out: List[str] = []
    for s in subterms(term):
        if isinstance(s, App) and not s.args and s.fn in sig.constants and s.fn not in out:
            out.append(s.fn)
    return out


def generate_constraint(
    sig: Signature,
    statements: Sequence[Formula],
    parameters: Optional[Sequence[str]] = None,
    eliminate_symbols: Optional[Sequence[str]] = None,
    assumptions: Sequence[Formula] = (),
    max_cases: int = 10000,
    full_simplify: bool = True,
    seeds: Sequence[Term] = (),
) -> ConstraintResult:
    """Weakest universal parameter constraint making the problem
    unsatisfiable (weakest guaranteed only when the extension axioms
    have definitional or bounded shape, reported via the flag)."""
    if (parameters is None) == (eliminate_symbols is None):
        raise EngineError("exactly one of parameters/eliminate must be given")
    work_sig = sig.copy()
    for f in statements:
        _register_constants(work_sig, f)
    steps: List[str] = []

    def is_param(symbol: str) -> bool:
        if parameters is not None:
            return symbol in parameters
        return symbol not in eliminate_symbols

    work_sig.parameters = {s for s in work_sig.all_symbols() if is_param(s)}
    reduced = reduce_chain(work_sig, statements, seeds)
    for step in reduced.steps:
        steps.append(
            "level %d: %d instantiation terms, %d instances, %d definitions"
            % (step.level, len(step.est), len(step.instances), len(step.definitions))
        )

    kept_defs = [d for d in reduced.definitions if is_param(d.term.fn)]
    for d in kept_defs:
        bad = [
            s.fn
            for s in subterms(d.term)
            if isinstance(s, App) and s.args and work_sig.is_extension(s.fn) and not is_param(s.fn) and s != d.term
        ]
        if bad:
            raise SortError(
                "argument of parameter application %s contains eliminated symbol %s"
                % (print_term(d.term), bad[0])
            )
    kept: List[str] = []
    for name in _occurring_constants(reduced.ground, work_sig):
        if is_param(name):
            kept.append(name)
    for d in kept_defs:
        if d.constant not in kept:
            kept.append(d.constant)
    arg_constants: List[str] = []
    for d in kept_defs:
        for arg in d.term.args:
            for name in _constants_in(arg, work_sig):
                if not is_param(name) and name not in kept and name not in arg_constants:
                    arg_constants.append(name)
    eliminated = [
        name
        for name in _occurring_constants(reduced.ground, work_sig)
        if name not in kept and name not in arg_constants
    ]
    steps.append("kept %s; eliminating %s" % (kept + arg_constants, eliminated))

    lin_assumptions = assumptions_from(assumptions)
    dnf = to_linear(conj(reduced.ground) if reduced.ground else TRUE)
    projected = eliminate(eliminated, dnf, lin_assumptions, max_cases)
    if full_simplify:
        projected = simplify(projected, lin_assumptions)
    steps.append("eliminated %d symbols, %d conjuncts remain" % (len(eliminated), len(projected)))

    clauses = _negate_dnf(projected, lin_assumptions)
    defs_map = {d.constant: d.term for d in kept_defs}
    closed: List[Formula] = []
    for clause in clauses:
        f = substitute_constants(clause, defs_map)
        variables = [c for c in arg_constants if c in formula_symbols(f)]
        if variables:
            f = _constants_to_variables(f, variables)
            f = Forall(tuple(variables), f)
        closed.append(canonical(f))
    constraint = canonical(conj(closed)) if closed else TRUE
    weakest = definitional_shapes_ok(work_sig, statements)
    return ConstraintResult(constraint, weakest, steps)


def _negate_dnf(dnf, lin_assumptions: Sequence[LinAtom]) -> List[Formula]:
    """Clauses of the negation, cleaned up under the assumptions."""
    clauses: List[List[LinAtom]] = []
    for conjunct in dnf:
        clauses.append([a.negated() for a in conjunct])
    out: List[Formula] = []
    for lits in clauses:
        lits = [l for l in lits if _lit_possible(lin_assumptions, l)]
        if any(_lit_entailed(lin_assumptions, l) for l in lits):
            continue
        if _is_tautology(lits):
            continue
        out.append(disj([lin_to_atom(l) for l in lits]) if lits else FALSE)
    # drop syntactically subsumed clauses
    kept: List[Formula] = []
    sets = [set(print_formula(f) for f in (c.parts if isinstance(c, Or) else (c,))) for c in out]
    for i, c in enumerate(out):
        if any(j != i and sets[j] < sets[i] for j in range(len(out))):
            continue
        if c in kept:
            continue
        kept.append(c)
    return kept


def _lit_possible(ctx: Sequence[LinAtom], lit: LinAtom) -> bool:
    if lit.rel == "!=":
        lt = make_atom("<", lit.poly_dict())
        gt = make_atom("<", poly_scale(lit.poly_dict(), -1))
        return any(a is True or (a is not False and is_sat(list(ctx) + [a]) is not None) for a in (lt, gt))
    return is_sat(list(ctx) + [lit]) is not None


def _lit_entailed(ctx: Sequence[LinAtom], lit: LinAtom) -> bool:
    if lit.rel == "!=":
        eq = make_atom("=", lit.poly_dict())
        if eq is True:
            return False
        if eq is False:
            return True
        return is_sat(list(ctx) + [eq]) is None
    return is_sat(list(ctx) + [lit.negated()]) is None


def _is_tautology(lits: Sequence[LinAtom]) -> bool:
    for i in range(len(lits)):
        for j in range(i + 1, len(lits)):
            if lits[i].negated() == lits[j] or lits[j].negated() == lits[i]:
                return True
    return False


def substitute_constants(f: Formula, mapping: Dict[str, Term]) -> Formula:
    """Replace nullary applications by terms."""

    def sub_term(t: Term) -> Term:
        if isinstance(t, App):
            if not t.args and t.fn in mapping:
                return mapping[t.fn]
            return App(t.fn, tuple(sub_term(a) for a in t.args))
        return t

    def sub(f: Formula) -> Formula:
        if isinstance(f, Atom):
            return Atom(f.rel, sub_term(f.lhs), sub_term(f.rhs))
        if isinstance(f, And):
            return And(tuple(sub(p) for p in f.parts))
        if isinstance(f, Or):
            return Or(tuple(sub(p) for p in f.parts))
        from .terms import Implies, Not

        if isinstance(f, Not):
            return Not(sub(f.body))
        if isinstance(f, Implies):
            return Implies(sub(f.left), sub(f.right))
        if isinstance(f, Forall):
            return Forall(f.variables, sub(f.body))
        raise TypeError(f)

    return sub(f)


def _constants_to_variables(f: Formula, names: Sequence[str]) -> Formula:
    return substitute_constants(f, {n: Var(n) for n in names})


# ---------------------------------------------------------------------------
# Shape checks backing the weakest-constraint guarantee


def definitional_shapes_ok(sig: Signature, statements: Sequence[Formula]) -> bool:
    """True when every universal axiom is a guarded definition or bound
    of a single extension application with mutually exclusive guards."""
    try:
        clauses, _ = split_statements(statements)
    except SortError:
        return False
    defined: Dict[str, List[Tuple[Tuple[str, ...], Formula]]] = {}
    for clause in clauses:
        if not isinstance(clause, Forall):
            return False
        level = clause_level(sig, clause)
        heads = extension_heads(sig, level)
        info = _definition_parts(clause, heads)
        if info is None:
            return False
        fn, args, guard = info
        defined.setdefault(fn, []).append((args, guard))
    for fn, entries in defined.items():
        for i in range(len(entries)):
            for j in range(i + 1, len(entries)):
                if not _guards_disjoint(sig, entries[i], entries[j]):
                    return False
    return True


def _definition_parts(clause: Forall, heads) -> Optional[Tuple[str, Tuple[str, ...], Formula]]:
    body = clause.body
    lits = body.parts if isinstance(body, Or) else (body,)
    from .terms import Implies, nnf

    if isinstance(body, Implies):
        lits = tuple(p for p in _flatten_disj(nnf(body)))
    if not all(isinstance(l, Atom) for l in lits):
        return None
    patterns: List[App] = []
    for l in lits:
        for t in (l.lhs, l.rhs):
            for s in subterms(t):
                if isinstance(s, App) and s.fn in heads and s not in patterns:
                    patterns.append(s)
    if len(patterns) != 1:
        return None
    p = patterns[0]
    if not all(isinstance(a, Var) for a in p.args):
        return None
    names = tuple(a.name for a in p.args)
    if len(set(names)) != len(names) or set(names) != set(clause.variables):
        return None
    guard_lits = [l for l in lits if p not in _atom_subterms(l)]
    value_lits = [l for l in lits if p in _atom_subterms(l)]
    if not value_lits:
        return None
    from .terms import negate_atom

    guard = conj([negate_atom(l) for l in guard_lits]) if guard_lits else TRUE
    return p.fn, names, guard


def _atom_subterms(a: Atom):
    out = []
    for t in (a.lhs, a.rhs):
        out.extend(subterms(t))
    return out


def _flatten_disj(f: Formula):
    if isinstance(f, Or):
        for p in f.parts:
            yield from _flatten_disj(p)
    else:
        yield f


def _guards_disjoint(sig: Signature, a, b) -> bool:
    args_a, guard_a = a
    args_b, guard_b = b
    if len(args_a) != len(args_b):
        return True
    shared = ["v_%d" % k for k in range(len(args_a))]
    sub_a = {x: App("g_%s" % v, ()) for x, v in zip(args_a, shared)}
    sub_b = {x: App("g_%s" % v, ()) for x, v in zip(args_b, shared)}
    try:
        ga = substitute(guard_a, sub_a)
        gb = substitute(guard_b, sub_b)
        return decide([ga, gb]) is None
    except (SortError, EngineError):
        return False


# ---------------------------------------------------------------------------
# Re-checking generated constraints


def check_unsat_with_constraint(sig: Signature, statements: Sequence[Formula], constraint: Formula) -> bool:
    """True iff the problem together with the constraint reduces to an
    unsatisfiable ground formula."""
    work_sig = sig.copy()
    extra = [f for f in _constraint_statements(constraint)]
    reduced = reduce_chain(work_sig, list(statements) + extra)
    return decide(reduced.ground) is None


def _constraint_statements(constraint: Formula) -> List[Formula]:
    if constraint == TRUE:
        return []
    if isinstance(constraint, And):
        out: List[Formula] = []
        for p in constraint.parts:
            out.extend(_constraint_statements(p))
        return out
    return [constraint]


def entails_constraint(sig: Signature, stronger: Formula, weaker: Formula) -> bool:
    """stronger |= weaker, decided by instantiating the negation of the
    weaker constraint with fresh constants and reducing."""
    work_sig = sig.copy()
    negated = negate_universal(weaker, avoid=work_sig.all_symbols())
    for name in sorted(formula_symbols(negated)):
        if work_sig.arity_of(name) is None:
            work_sig.declare_constant(name)
    statements = _constraint_statements(stronger) + [negated]
    reduced = reduce_chain(work_sig, statements)
    return decide(reduced.ground) is None
