"""Hierarchical reduction of extension-chain problems to ground base
formulas.

Level by level (highest first), the axiom clauses of that level are
instantiated with the ground extension subterms of the current problem,
the level's function applications are replaced by fresh constants with
definitional entries, and instantiated congruence clauses are added.
The result is a ground conjunction over base symbols, numerals,
parameters and the introduced constants, equisatisfiable with the input
whenever the extension chain is local for the identity closure.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .errors import NonGroundableError, SortError
from .terms import (
    And,
    App,
    Atom,
    Forall,
    Formula,
    Implies,
    Num,
    Signature,
    Term,
    Var,
    conj,
    formula_terms,
    free_variables,
    is_ground,
    substitute,
    subterms,
)


def split_statements(statements: Iterable[Formula]) -> Tuple[List[Formula], List[Formula]]:
    """Separate axiom clauses (quantified) from the ground goal part."""
    clauses: List[Formula] = []
    goal: List[Formula] = []
    for s in statements:
        if isinstance(s, Forall) and not free_variables(s.body) - set(s.variables):
            if not set(s.variables) & free_variables(s.body):
                goal.append(s.body)
            else:
                clauses.append(s)
        elif is_ground(s):
            goal.append(s)
        else:
            raise SortError("statement has unbound variables")
    return clauses, goal


def extension_heads(sig: Signature, level: Optional[int] = None) -> Set[str]:
    if level is None:
        return set(sig.extension_functions)
    return {f for f, (_, l) in sig.extension_functions.items() if l == level}


def clause_level(sig: Signature, clause: Formula) -> int:
    level = 0
    for t in formula_terms(clause):
        for s in subterms(t):
            if isinstance(s, App) and sig.is_extension(s.fn):
                level = max(level, sig.level_of(s.fn))
    return level


def ground_extension_subterms(
    statements: Iterable[Formula], sig: Signature, heads: Optional[Set[str]] = None
) -> List[Term]:
    """All ground subterms with an extension head, in encounter order
    (the set is closed under taking extension-headed subterms)."""
    if heads is None:
        heads = extension_heads(sig)
    out: List[Term] = []
    for s in statements:
        for t in formula_terms(s):
            for sub in subterms(t):
                if isinstance(sub, App) and sub.fn in heads and is_ground(sub) and sub not in out:
                    out.append(sub)
    return out


def closure(
    terms: Sequence[Term],
    statements: Iterable[Formula],
    sig: Signature,
    heads: Optional[Set[str]] = None,
    seeds: Sequence[Term] = (),
) -> List[Term]:
    """Identity closure: the extension subterms of the axioms and of the
    given terms, the terms themselves, plus user-supplied seeds."""
    if heads is None:
        heads = extension_heads(sig)
    out = ground_extension_subterms(statements, sig, heads)
    for t in terms:
        for sub in subterms(t):
            if isinstance(sub, App) and sub.fn in heads and is_ground(sub) and sub not in out:
                out.append(sub)
    for t in list(terms) + list(seeds):
        if isinstance(t, App) and t.fn in heads and is_ground(t) and t not in out:
            out.append(t)
    return out


# ---------------------------------------------------------------------------
# Instantiation


def _match(pattern: Term, ground: Term, binding: Dict[str, Term]) -> bool:
    if isinstance(pattern, Var):
        bound = binding.get(pattern.name)
        if bound is None:
            binding[pattern.name] = ground
            return True
        return bound == ground
    if isinstance(pattern, Num):
        return isinstance(ground, Num) and pattern.value == ground.value
    if isinstance(pattern, App):
        if not isinstance(ground, App) or pattern.fn != ground.fn or len(pattern.args) != len(ground.args):
            return False
        return all(_match(p, g, binding) for p, g in zip(pattern.args, ground.args))
    return False


def _patterns(clause: Formula, heads: Set[str]) -> List[Term]:
    out: List[Term] = []
    for t in formula_terms(clause):
        for sub in subterms(t):
            if isinstance(sub, App) and sub.fn in heads and sub not in out:
                out.append(sub)
    return out


def instantiate(
    clauses: Iterable[Formula], terms: Sequence[Term], sig: Signature, heads: Optional[Set[str]] = None
) -> List[Formula]:
    """All ground instances of the clauses whose extension-headed terms
    fall inside the given term set."""
    if heads is None:
        heads = extension_heads(sig)
    out: List[Formula] = []
    for clause in clauses:
        if isinstance(clause, Forall):
            variables = set(clause.variables)
            body = clause.body
        else:
            variables = set()
            body = clause
        if not variables:
            if is_ground(body) and all(t in terms for t in _patterns(body, heads)):
                if body not in out:
                    out.append(body)
            continue
        patterns = [p for p in _patterns(body, heads) if free_variables(p)]
        covered: Set[str] = set()
        for p in patterns:
            covered |= free_variables(p)
        if not variables <= covered:
            missing = sorted(variables - covered)
            raise NonGroundableError(
                "variable %s does not occur below a level-matching extension symbol" % missing[0]
            )
        bindings: List[Dict[str, Term]] = [{}]
        for p in patterns:
            next_bindings: List[Dict[str, Term]] = []
            for b in bindings:
                for t in terms:
                    candidate = dict(b)
                    if _match(p, t, candidate) and candidate not in next_bindings:
                        next_bindings.append(candidate)
            bindings = next_bindings
            if not bindings:
                break
        for b in bindings:
            instance = substitute(body, b)
            if not is_ground(instance):
                continue
            if all(t in terms for t in _patterns(instance, heads)):
                if instance not in out:
                    out.append(instance)
    return out


# ---------------------------------------------------------------------------
# Flattening and purification


@dataclass
class Definition:
    constant: str
    term: App  # the original extension application
    purified_args: Tuple[Term, ...]


@dataclass
class PurifiedProblem:
    clauses: List[Formula]
    definitions: List[Definition]
    congruence: List[Formula]


def flatten_purify(
    statements: Iterable[Formula], sig: Signature, heads: Optional[Set[str]] = None
) -> PurifiedProblem:
    """Replace ground extension applications by fresh constants, bottom
    up, and emit one congruence clause per pair of same-head entries."""
    if heads is None:
        heads = extension_heads(sig)
    defs: List[Definition] = []
    by_term: Dict[App, str] = {}

    def name_for(original: App, purified_args: Tuple[Term, ...]) -> str:
        known = by_term.get(original)
        if known is not None:
            return known
        count = sum(1 for d in defs if d.term.fn == original.fn) + 1
        name = sig.fresh_constant("c_%s_%d" % (original.fn, count))
        defs.append(Definition(name, original, purified_args))
        by_term[original] = name
        return name

    def purify_term(t: Term) -> Term:
        if not isinstance(t, App):
            return t
        args = tuple(purify_term(a) for a in t.args)
        if t.fn in heads:
            if not is_ground(t):
                raise SortError("extension symbol %s applied to non-ground arguments" % t.fn)
            return App(name_for(t, args), ())
        return App(t.fn, args)

    def purify_formula(f: Formula) -> Formula:
        if isinstance(f, Atom):
            return Atom(f.rel, purify_term(f.lhs), purify_term(f.rhs))
        if isinstance(f, And):
            return And(tuple(purify_formula(p) for p in f.parts))
        if isinstance(f, Implies):
            return Implies(purify_formula(f.left), purify_formula(f.right))
        from .terms import Not, Or

        if isinstance(f, Or):
            return Or(tuple(purify_formula(p) for p in f.parts))
        if isinstance(f, Not):
            return Not(purify_formula(f.body))
        raise SortError("cannot purify %s" % type(f).__name__)

    clauses = [purify_formula(s) for s in statements]
    congruence: List[Formula] = []
    for i in range(len(defs)):
        for j in range(i + 1, len(defs)):
            d, e = defs[i], defs[j]
            if d.term.fn != e.term.fn:
                continue
            eqs = [Atom("=", a, b) for a, b in zip(d.purified_args, e.purified_args)]
            head = Atom("=", App(d.constant, ()), App(e.constant, ()))
            congruence.append(Implies(conj(eqs), head) if eqs else head)
    return PurifiedProblem(clauses, defs, congruence)


# ---------------------------------------------------------------------------
# Chain reduction


@dataclass
class ReductionStep:
    level: int
    est: List[Term]
    instances: List[Formula]
    definitions: List[Definition]
    congruence: List[Formula]


@dataclass
class ReducedProblem:
    sig: Signature
    ground: List[Formula]
    definitions: List[Definition] = field(default_factory=list)
    steps: List[ReductionStep] = field(default_factory=list)


def reduce_chain(sig: Signature, statements: Iterable[Formula], seeds: Sequence[Term] = ()) -> ReducedProblem:
    """Iterate est / closure / instantiation / purification from the
    highest declared extension level down to 1."""
    clauses, goal = split_statements(statements)
    leveled: Dict[int, List[Formula]] = {}
    for c in clauses:
        level = clause_level(sig, c)
        if level == 0:
            raise NonGroundableError("universal clause without extension symbols cannot be grounded")
        leveled.setdefault(level, []).append(c)
    levels = sorted(set(sig.extension_functions[f][1] for f in sig.extension_functions), reverse=True)
    problem = ReducedProblem(sig, list(goal))
    for level in levels:
        heads = extension_heads(sig, level)
        level_clauses = leveled.pop(level, [])
        est_terms = ground_extension_subterms(level_clauses + problem.ground, sig, heads)
        terms = closure(est_terms, level_clauses, sig, heads, seeds)
        instances = instantiate(level_clauses, terms, sig, heads)
        purified = flatten_purify(instances + problem.ground, sig, heads)
        problem.ground = purified.clauses + purified.congruence
        problem.definitions.extend(purified.definitions)
        problem.steps.append(
            ReductionStep(level, terms, instances, purified.definitions, purified.congruence)
        )
    if leveled:
        raise SortError("clauses at undeclared extension level %s" % sorted(leveled))
    return problem
