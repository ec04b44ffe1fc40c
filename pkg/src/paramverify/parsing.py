"""Parsers for the specification language and task files.

The specification grammar follows the concrete syntax of the input
listings this tool consumes:

    Base_functions := {(+,2), (-,2), (*,2)}
    Extension_functions := {(a, 1, 2), (ap, 1, 3)}
    Relations := {(<=,2), (<,2), (>=,2), (>,2)}
    Clauses :=
        d1 <= d2;
        (FORALL j). ap(j) = a(j) + _1;
    Query := d1p - d2p > _0;

Statements are ";"-terminated, quantifier prefixes are written
"(FORALL v1,v2).", implications use "-->", and numerals carry a leading
underscore ("_1", "_3/2").  Task files are YAML documents whose layout
matches the task listings (tasks, per-task mode/options/specification).
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import yaml

from .errors import ParseError, SignatureError
from .terms import (
    App,
    Atom,
    FALSE,
    Forall,
    Formula,
    Implies,
    Num,
    Or,
    And,
    Not,
    Signature,
    TRUE,
    Term,
    Var,
    check_term,
)

SECTION_NAMES = ("Base_functions", "Extension_functions", "Relations", "Clauses", "Query")

_OPERATORS = [
    ":=",
    "-->",
    "->",
    "<=",
    ">=",
    "!=",
    "<",
    ">",
    "=",
    "+",
    "-",
    "*",
    "(",
    ")",
    "{",
    "}",
    ",",
    ";",
    ".",
    ":",
]


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT | INT | NUMERAL | OP | EOF
    text: str
    line: int
    column: int


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "_":
            j = i + 1
            if j < n and text[j] == "-":
                j += 1
            start_digits = j
            while j < n and text[j].isdigit():
                j += 1
            if j == start_digits:
                raise ParseError("malformed numeral", line, col)
            if j < n and text[j] == "/":
                j += 1
                k = j
                while j < n and text[j].isdigit():
                    j += 1
                if j == k:
                    raise ParseError("malformed numeral", line, col)
            tokens.append(Token("NUMERAL", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha():
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token("IDENT", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("INT", text[i:j], line, col))
            col += j - i
            i = j
            continue
        for op in _OPERATORS:
            if text.startswith(op, i):
                tokens.append(Token("OP", op, line, col))
                col += len(op)
                i += len(op)
                break
        else:
            raise ParseError("unexpected character %r" % ch, line, col)
    tokens.append(Token("EOF", "", line, col))
    return tokens


@dataclass
class ProblemSpec:
    """A set of axiom clauses plus a ground goal over a signature."""

    sig: Signature
    clauses: List[Formula] = field(default_factory=list)
    query: List[Formula] = field(default_factory=list)

    def statements(self) -> List[Formula]:
        return list(self.clauses) + list(self.query)


@dataclass
class PTSSpec:
    """Transition-system body: initial states, update axioms, candidate."""

    sig: Signature
    init: List[Formula]
    update: List[Formula]
    query: List[Formula]
    update_vars: Dict[str, str]


@dataclass
class LhaModeSpec:
    name: str
    inv: List[Formula] = field(default_factory=list)
    flow: List[Formula] = field(default_factory=list)
    init: List[Formula] = field(default_factory=list)
    inenv: List[Formula] = field(default_factory=list)


@dataclass
class LhaEdgeSpec:
    source: str
    target: str
    guard: List[Formula] = field(default_factory=list)
    jump: List[Formula] = field(default_factory=list)


@dataclass
class LhaSpec:
    variables: List[str]
    modes: Dict[str, LhaModeSpec]
    edges: List[LhaEdgeSpec]
    sig: Signature


class Parser:
    def __init__(self, text: str, sig: Optional[Signature] = None):
        self.tokens = tokenize(text)
        self.pos = 0
        self.sig = sig if sig is not None else Signature()

    # -- token plumbing

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.next()
        if tok.text != text:
            raise ParseError("expected %r, found %r" % (text, tok.text or "end of input"), tok.line, tok.column)
        return tok

    def expect_ident(self) -> Token:
        tok = self.next()
        if tok.kind != "IDENT":
            raise ParseError("expected identifier, found %r" % (tok.text or "end of input"), tok.line, tok.column)
        return tok

    def at_end(self) -> bool:
        return self.peek().kind == "EOF"

    def error(self, message: str) -> ParseError:
        tok = self.peek()
        return ParseError(message, tok.line, tok.column)

    # -- declarations

    def parse_decl_set(self, with_level: bool) -> List[Tuple[str, int, int]]:
        self.expect("{")
        decls: List[Tuple[str, int, int]] = []
        if self.peek().text != "}":
            while True:
                decls.append(self.parse_decl(with_level))
                if self.peek().text != ",":
                    break
                self.next()
        self.expect("}")
        return decls

    def parse_decl(self, with_level: bool) -> Tuple[str, int, int]:
        self.expect("(")
        tok = self.next()
        if tok.kind not in ("IDENT", "OP") or tok.text in ("(", ")", "{", "}", ",", ";"):
            raise ParseError("expected a function or relation name", tok.line, tok.column)
        name = tok.text
        self.expect(",")
        arity = self.parse_int()
        level = 0
        if with_level and self.peek().text == ",":
            self.next()
            level = self.parse_int()
        self.expect(")")
        return name, arity, level

    def parse_int(self) -> int:
        tok = self.next()
        if tok.kind != "INT":
            raise ParseError("expected an integer, found %r" % tok.text, tok.line, tok.column)
        return int(tok.text)

    # -- terms and formulas

    def parse_term(self, scope: Tuple[str, ...]) -> Term:
        left = self.parse_factor(scope)
        while self.peek().text in ("+", "-") and self.peek().kind == "OP":
            op = self.next().text
            right = self.parse_factor(scope)
            left = App(op, (left, right))
        return left

    def parse_factor(self, scope: Tuple[str, ...]) -> Term:
        left = self.parse_unary(scope)
        while self.peek().text == "*" and self.peek().kind == "OP":
            self.next()
            right = self.parse_unary(scope)
            left = App("*", (left, right))
        return left

    def parse_unary(self, scope: Tuple[str, ...]) -> Term:
        if self.peek().text == "-" and self.peek().kind == "OP":
            self.next()
            return App("-", (self.parse_unary(scope),))
        return self.parse_primary(scope)

    def parse_primary(self, scope: Tuple[str, ...]) -> Term:
        tok = self.peek()
        if tok.kind == "NUMERAL":
            self.next()
            return Num(Fraction(tok.text[1:]))
        if tok.text == "(":
            self.next()
            inner = self.parse_term(scope)
            self.expect(")")
            return inner
        if tok.kind == "IDENT":
            self.next()
            if self.peek().text == "(":
                self.next()
                args = [self.parse_term(scope)]
                while self.peek().text == ",":
                    self.next()
                    args.append(self.parse_term(scope))
                self.expect(")")
                term: Term = App(tok.text, tuple(args))
            elif tok.text in scope:
                return Var(tok.text)
            else:
                term = App(tok.text, ())
            try:
                check_term(self.sig, term, set(scope))
            except SignatureError as exc:
                raise ParseError(str(exc), tok.line, tok.column)
            return term
        raise ParseError("expected a term, found %r" % (tok.text or "end of input"), tok.line, tok.column)

    def parse_formula(self, scope: Tuple[str, ...]) -> Formula:
        left = self.parse_disjunct(scope)
        if self.peek().text == "-->":
            self.next()
            right = self.parse_formula(scope)
            return Implies(left, right)
        return left

    def parse_disjunct(self, scope: Tuple[str, ...]) -> Formula:
        tok = self.peek()
        if tok.kind == "IDENT" and tok.text in ("OR", "AND", "NOT") and self.peek(1).text == "(":
            self.next()
            self.next()
            parts = [self.parse_formula(scope)]
            while self.peek().text == ",":
                self.next()
                parts.append(self.parse_formula(scope))
            self.expect(")")
            if tok.text == "OR":
                return Or(tuple(parts))
            if tok.text == "AND":
                return And(tuple(parts))
            if len(parts) != 1:
                raise ParseError("NOT takes a single formula", tok.line, tok.column)
            return Not(parts[0])
        if tok.kind == "IDENT" and tok.text == "true" and self.peek(1).text not in ("(",):
            self.next()
            return TRUE
        if tok.kind == "IDENT" and tok.text == "false" and self.peek(1).text not in ("(",):
            self.next()
            return FALSE
        return self.parse_atom(scope)

    def parse_atom(self, scope: Tuple[str, ...]) -> Atom:
        lhs = self.parse_term(scope)
        tok = self.next()
        if tok.text not in ("<=", "<", ">=", ">", "=", "!="):
            raise ParseError("expected a relation, found %r" % (tok.text or "end of input"), tok.line, tok.column)
        if tok.text not in ("=", "!=") and tok.text not in self.sig.relations and self.sig.relations:
            raise ParseError("undeclared relation %s" % tok.text, tok.line, tok.column)
        rhs = self.parse_term(scope)
        return Atom(tok.text, lhs, rhs)

    def parse_statement(self) -> Formula:
        scope: Tuple[str, ...] = ()
        quantified = False
        if (
            self.peek().text == "("
            and self.peek(1).kind == "IDENT"
            and self.peek(1).text in ("FORALL", "EXISTS")
        ):
            self.next()
            kind = self.next().text
            if kind == "EXISTS":
                raise self.error("existential statements are not supported")
            names = [self.expect_ident().text]
            while self.peek().text == ",":
                self.next()
                names.append(self.expect_ident().text)
            self.expect(")")
            self.expect(".")
            scope = tuple(names)
            quantified = True
        body = self.parse_formula(scope)
        self.expect(";")
        if quantified:
            return Forall(scope, body)
        return body

    def parse_statements_until(self, stop) -> List[Formula]:
        out: List[Formula] = []
        while not self.at_end() and not stop():
            out.append(self.parse_statement())
        return out

    # -- specification bodies

    def at_section(self) -> bool:
        return (
            self.peek().kind == "IDENT"
            and self.peek().text in SECTION_NAMES
            and self.peek(1).text == ":="
        )

    def parse_spec_body(self) -> ProblemSpec:
        spec = ProblemSpec(self.sig)
        seen = set()
        while not self.at_end():
            if not self.at_section():
                raise self.error("expected a section header")
            name = self.next().text
            self.expect(":=")
            if name in seen:
                raise self.error("duplicate section %s" % name)
            seen.add(name)
            if name == "Base_functions":
                for fn, arity, _ in self.parse_decl_set(False):
                    self.sig.base_functions[fn] = arity
            elif name == "Extension_functions":
                for fn, arity, level in self.parse_decl_set(True):
                    if level < 1:
                        raise self.error("extension level of %s must be >= 1" % fn)
                    self.sig.extension_functions[fn] = (arity, level)
            elif name == "Relations":
                for rel, arity, _ in self.parse_decl_set(False):
                    self.sig.relations[rel] = arity
            elif name == "Clauses":
                spec.clauses = self.parse_statements_until(self.at_section)
            else:
                spec.query = self.parse_statements_until(self.at_section)
        self.sig.validate()
        return spec

    # -- hybrid automaton bodies

    def parse_lha_body(self) -> LhaSpec:
        self.expect("variables")
        self.expect(":")
        variables = [self.expect_ident().text]
        while self.peek().text == ",":
            self.next()
            variables.append(self.expect_ident().text)
        self.expect(";")
        for x in variables:
            self.sig.declare_constant(x)
            self.sig.declare_constant(x + "p")
        self.sig.base_functions["d"] = 1
        modes: Dict[str, LhaModeSpec] = {}
        edges: List[LhaEdgeSpec] = []
        while not self.at_end():
            tok = self.next()
            if tok.text == "mode":
                name = self.parse_name()
                self.expect(":")
                if name in modes:
                    raise ParseError("duplicate mode %s" % name, tok.line, tok.column)
                mode = LhaModeSpec(name)
                modes[name] = mode
                self.parse_lha_sections(
                    {"inv": mode.inv, "flow": mode.flow, "init": mode.init, "inenv": mode.inenv}
                )
            elif tok.text == "edge":
                source = self.parse_name()
                self.expect("->")
                target = self.parse_name()
                self.expect(":")
                edge = LhaEdgeSpec(source, target)
                edges.append(edge)
                self.parse_lha_sections({"guard": edge.guard, "jump": edge.jump})
            else:
                raise ParseError("expected 'mode' or 'edge', found %r" % tok.text, tok.line, tok.column)
        for edge in edges:
            if edge.source not in modes or edge.target not in modes:
                raise ParseError("edge %s -> %s references an unknown mode" % (edge.source, edge.target))
        del self.sig.base_functions["d"]
        return LhaSpec(variables, modes, edges, self.sig)

    def parse_name(self) -> str:
        tok = self.next()
        if tok.kind not in ("IDENT", "INT"):
            raise ParseError("expected a mode name, found %r" % tok.text, tok.line, tok.column)
        return tok.text

    def parse_lha_sections(self, sections: Dict[str, List[Formula]]) -> None:
        def at_boundary() -> bool:
            tok = self.peek()
            if tok.kind != "IDENT":
                return False
            if tok.text in ("mode", "edge"):
                return True
            return tok.text in sections and self.peek(1).text == ":"

        while not self.at_end():
            tok = self.peek()
            if tok.text in ("mode", "edge"):
                return
            if tok.kind == "IDENT" and tok.text in sections and self.peek(1).text == ":":
                key = self.next().text
                self.next()
                sections[key].extend(self.parse_statements_until(at_boundary))
            else:
                return


# ---------------------------------------------------------------------------
# Public entry points


def parse_spec(text: str, sig: Optional[Signature] = None) -> ProblemSpec:
    parser = Parser(text, sig)
    return parser.parse_spec_body()


def parse_lha(text: str, sig: Optional[Signature] = None) -> LhaSpec:
    parser = Parser(text, sig)
    return parser.parse_lha_body()


def parse_statements(text: str, sig: Signature) -> List[Formula]:
    parser = Parser(text, sig)
    out = parser.parse_statements_until(lambda: False)
    if not parser.at_end():
        raise parser.error("trailing input")
    return out


def parse_formula(text: str, sig: Signature) -> Formula:
    text = text.strip()
    if not text.endswith(";"):
        text += ";"
    statements = parse_statements(text, sig)
    if len(statements) != 1:
        raise ParseError("expected a single formula")
    return statements[0]


def parse_term_string(text: str, sig: Signature) -> Term:
    parser = Parser(text, sig)
    term = parser.parse_term(())
    if not parser.at_end():
        raise parser.error("trailing input")
    return term


def parse_decl_string(text: str, with_level: bool) -> List[Tuple[str, int, int]]:
    parser = Parser(text)
    decls = parser.parse_decl_set(with_level)
    if not parser.at_end():
        raise parser.error("trailing input")
    return decls


# ---------------------------------------------------------------------------
# Task files

MODES = ("GENERATE_CONSTRAINTS", "INVARIANT_STRENGTHENING", "CHECK_INVARIANT", "BMC", "CHATTER_FREE")
SPEC_TYPES = ("HPILOT", "PTS", "LHA")
THEORIES = ("REAL_CLOSED_FIELDS", "PRESBURGER_ARITHMETIC")

_KNOWN_TOP_KEYS = {"tasks", "task_options"}
_KNOWN_TASK_KEYS = {"mode", "options", "specification_type", "specification_theory", "specification"}
_KNOWN_OPTION_KEYS = {
    "parameter",
    "eliminate",
    "slfq_query",
    "inv_str_max_iter",
    "bmc_k",
    "assumptions",
    "epsilon",
    "candidate",
    "vcs",
    "print_steps",
}


@dataclass
class TaskSpec:
    name: str
    mode: str
    spec_type: str
    theory: str
    body: object  # ProblemSpec | PTSSpec | LhaSpec
    options: Dict[str, object] = field(default_factory=dict)


@dataclass
class TaskFile:
    tasks: Dict[str, TaskSpec]
    task_options: Dict[str, object] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)


def parse_task_file(text: str) -> TaskFile:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        if mark is not None:
            raise ParseError("invalid task file: %s" % exc, mark.line + 1, mark.column + 1)
        raise ParseError("invalid task file: %s" % exc)
    if not isinstance(doc, dict):
        raise ParseError("task file must be a mapping")
    warnings = [
        "unknown top-level key %r ignored" % key for key in doc if key not in _KNOWN_TOP_KEYS
    ]
    tasks_doc = doc.get("tasks")
    if not tasks_doc:
        raise ParseError("no tasks")
    if not isinstance(tasks_doc, dict):
        raise ParseError("tasks must be a mapping")
    task_options = doc.get("task_options") or {}
    tasks: Dict[str, TaskSpec] = {}
    for name, body in tasks_doc.items():
        task, extra = _parse_task(str(name), body or {}, task_options)
        tasks[str(name)] = task
        warnings.extend(extra)
    return TaskFile(tasks, task_options, warnings)


def _parse_task(name: str, doc: dict, defaults: dict) -> Tuple[TaskSpec, List[str]]:
    warnings = ["task %s: unknown key %r ignored" % (name, k) for k in doc if k not in _KNOWN_TASK_KEYS]
    mode = doc.get("mode")
    if mode not in MODES:
        raise ParseError("task %s: unknown mode %r" % (name, mode))
    spec_type = doc.get("specification_type")
    if spec_type not in SPEC_TYPES:
        raise ParseError("task %s: unknown specification_type %r" % (name, spec_type))
    theory = doc.get("specification_theory", "REAL_CLOSED_FIELDS")
    if theory not in THEORIES:
        raise ParseError("task %s: unknown specification_theory %r" % (name, theory))
    options = dict(defaults)
    raw_options = doc.get("options") or {}
    warnings.extend(
        "task %s: unknown option %r ignored" % (name, k) for k in raw_options if k not in _KNOWN_OPTION_KEYS
    )
    options.update({k: v for k, v in raw_options.items() if k in _KNOWN_OPTION_KEYS})
    if "parameter" in options and "eliminate" in options:
        raise ParseError("task %s: parameter and eliminate are mutually exclusive" % name)
    if mode == "GENERATE_CONSTRAINTS" and spec_type == "HPILOT":
        # hybrid-automaton tasks default to eliminating the state variables
        if ("parameter" in options) == ("eliminate" in options):
            raise ParseError("task %s: exactly one of parameter/eliminate is required" % name)
    spec_doc = doc.get("specification")
    if spec_doc is None:
        raise ParseError("task %s: missing specification" % name)
    body = _parse_task_body(name, spec_type, spec_doc)
    return TaskSpec(name, mode, spec_type, theory, body, options), warnings


def _parse_task_body(name: str, spec_type: str, doc) -> object:
    if spec_type in ("HPILOT", "LHA"):
        if not isinstance(doc, dict) or "file" not in doc:
            raise ParseError("task %s: specification needs a 'file' entry" % name)
        text = doc["file"]
        return parse_spec(text) if spec_type == "HPILOT" else parse_lha(text)
    if not isinstance(doc, dict):
        raise ParseError("task %s: PTS specification must be a mapping" % name)
    sig = Signature()
    for fn, arity, _ in parse_decl_string(doc.get("base_functions", "{}"), False):
        sig.base_functions[fn] = arity
    for fn, arity, level in parse_decl_string(doc.get("extension_functions", "{}"), True):
        sig.extension_functions[fn] = (arity, level)
    for rel, arity, _ in parse_decl_string(doc.get("relations", "{}"), False):
        sig.relations[rel] = arity
    init = parse_statements(doc.get("init", ""), sig)
    update = parse_statements(doc.get("update", ""), sig)
    query = parse_statements(doc.get("query", ""), sig)
    update_vars_doc = doc.get("update_vars") or {}
    update_vars = {str(k).strip(): str(v).strip() for k, v in update_vars_doc.items()}
    for old, new in update_vars.items():
        if sig.arity_of(old) is None:
            sig.declare_constant(old)
        if sig.arity_of(new) is None:
            sig.declare_constant(new)
        if sig.arity_of(old) != sig.arity_of(new):
            raise ParseError("task %s: update pair %s:%s changes arity" % (name, old, new))
    sig.validate()
    return PTSSpec(sig, init, update, query, update_vars)
