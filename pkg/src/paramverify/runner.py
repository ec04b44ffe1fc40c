"""Task execution and report assembly.

Reports mirror the reference output layout: a Metadata header, then one
block per task with Result, Runtime and (with print_steps) an Extra
section.  Date and Runtime values are the only non-deterministic
fields; everything else is byte-stable across runs.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import EngineError, ParseError
from .hybrid import HybridAutomaton, primed, vcs_chatterfree, vcs_invariant
from .linear import assumptions_from, decide
from .parsing import (
    LhaSpec,
    ProblemSpec,
    PTSSpec,
    TaskSpec,
    parse_statements,
    parse_task_file,
    parse_term_string,
)
from .printing import print_formula
from .reduction import reduce_chain
from .smtlib import export_smtlib
from .symelim import generate_constraint
from .terms import Formula, Num, Signature
from .transition import TransitionSystem, bmc, check_inductive, strengthen


@dataclass
class RunFlags:
    tasks: Optional[Sequence[str]] = None
    out: Optional[str] = None
    assume: str = ""
    max_cases: int = 10000
    seed_closure: Optional[str] = None
    dump_smtlib: Optional[str] = None
    dump_reduction: bool = False
    parallel: bool = False


@dataclass
class TaskOutcome:
    name: str
    result: List[Tuple[int, str]]  # indented lines under "Result:"
    inline_result: Optional[str]  # single-line form, when it fits
    runtime: float = 0.0
    extra: List[Tuple[int, str]] = field(default_factory=list)
    smtlib: List[Tuple[str, str]] = field(default_factory=list)


def _parse_assumptions(task: TaskSpec, sig: Signature, global_assume: str):
    texts: List[str] = []
    for a in task.options.get("assumptions", []) or []:
        texts.append(str(a))
    if global_assume:
        texts.extend(p for p in global_assume.split(";") if p.strip())
    formulas: List[Formula] = []
    for t in texts:
        formulas.extend(parse_statements(t.strip() + ";", sig))
    return formulas


def _parse_seeds(task: TaskSpec, sig: Signature, seed_text: Optional[str]):
    if not seed_text:
        return []
    seeds = []
    for line in seed_text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            seeds.append(parse_term_string(line.rstrip(";"), sig))
    return seeds


def _task_sig(task: TaskSpec) -> Signature:
    return task.body.sig


class TaskRunner:
    def __init__(self, flags: RunFlags, seed_text: Optional[str] = None):
        self.flags = flags
        self.seed_text = seed_text

    def run(self, task: TaskSpec, print_steps: bool) -> TaskOutcome:
        start = time.perf_counter()
        sig = _task_sig(task)
        assumptions = _parse_assumptions(task, sig, self.flags.assume)
        seeds = _parse_seeds(task, sig, self.seed_text)
        handler = {
            "GENERATE_CONSTRAINTS": self._generate_constraints,
            "INVARIANT_STRENGTHENING": self._strengthen,
            "CHECK_INVARIANT": self._check_invariant,
            "BMC": self._bmc,
            "CHATTER_FREE": self._chatter_free,
        }[task.mode]
        outcome = handler(task, assumptions, seeds, print_steps)
        outcome.runtime = time.perf_counter() - start
        return outcome

    # -- GENERATE_CONSTRAINTS

    def _gen_options(self, task: TaskSpec):
        parameters = task.options.get("parameter")
        eliminate = task.options.get("eliminate")
        full = bool(task.options.get("slfq_query", False))
        return parameters, eliminate, full

    def _generate_constraints(self, task, assumptions, seeds, print_steps) -> TaskOutcome:
        parameters, eliminate, full = self._gen_options(task)
        if isinstance(task.body, ProblemSpec):
            statements = task.body.statements()
            res = generate_constraint(
                task.body.sig,
                statements,
                parameters=parameters,
                eliminate_symbols=eliminate,
                assumptions=assumptions,
                max_cases=self.flags.max_cases,
                full_simplify=full or bool(assumptions),
                seeds=seeds,
            )
            outcome = TaskOutcome(task.name, [], None)
            _set_constraint_result(outcome, res.constraint)
            if print_steps:
                outcome.extra = [(0, "(step) %s" % s) for s in res.steps]
                outcome.extra.append((0, "(step) weakest-constraint guarantee: %s" % str(res.weakest).lower()))
            self._dumps(outcome, task, statements, seeds=seeds)
            return outcome
        if isinstance(task.body, LhaSpec):
            automaton = HybridAutomaton.from_spec(task.body)
            candidate = self._candidate(task, automaton.sig)
            vcs = vcs_invariant(automaton, candidate)
            selected = task.options.get("vcs")
            if selected:
                wanted = {str(s) for s in selected}
                vcs = [vc for vc in vcs if vc.name in wanted]
                if not vcs:
                    raise EngineError("no verification condition matches %s" % sorted(wanted))
            return self._constraints_for_vcs(
                task, vcs, parameters, eliminate, assumptions, full, automaton, print_steps
            )
        raise EngineError("GENERATE_CONSTRAINTS expects an HPILOT or LHA specification")

    def _default_eliminate(self, automaton: HybridAutomaton, tname: str = "t") -> List[str]:
        out = list(automaton.variables) + [primed(x) for x in automaton.variables]
        out.append(tname)
        return out

    def _constraints_for_vcs(
        self, task, vcs, parameters, eliminate, assumptions, full, automaton, print_steps
    ) -> TaskOutcome:
        if parameters is None and eliminate is None:
            eliminate = self._default_eliminate(automaton)
        from .symelim import _constraint_statements

        extra: List[Tuple[int, str]] = []
        results = []
        for vc in vcs:
            res = generate_constraint(
                automaton.sig,
                vc.statements,
                parameters=parameters,
                eliminate_symbols=eliminate,
                assumptions=assumptions,
                max_cases=self.flags.max_cases,
                full_simplify=full or bool(assumptions),
            )
            results.append((vc.name, res.constraint))
            if print_steps:
                extra.append((0, "(step) %s:" % vc.name))
                extra.extend((1, s) for s in res.steps)
        outcome = TaskOutcome(task.name, [], None)
        if len(results) == 1:
            _set_constraint_result(outcome, results[0][1])
        else:
            for name, constraint in results:
                clauses = _constraint_statements(constraint)
                if len(clauses) <= 1:
                    outcome.result.append((0, "%s: %s" % (name, print_formula(constraint))))
                else:
                    outcome.result.append((0, "%s: |-" % name))
                    outcome.result += [(1, "%s;" % print_formula(c)) for c in clauses]
        outcome.extra = extra
        for vc in vcs:
            self._dumps(outcome, task, vc.statements, vc.name)
        return outcome

    # -- INVARIANT_STRENGTHENING

    def _strengthen(self, task, assumptions, seeds, print_steps) -> TaskOutcome:
        if not isinstance(task.body, PTSSpec):
            raise EngineError("INVARIANT_STRENGTHENING expects a PTS specification")
        system = TransitionSystem.from_pts(task.body)
        max_iter = int(task.options.get("inv_str_max_iter", 10))
        parameters = task.options.get("parameter")
        if not parameters:
            raise EngineError("INVARIANT_STRENGTHENING needs a parameter list")
        res = strengthen(
            system,
            task.body.query,
            parameters,
            max_iter=max_iter,
            task_name=task.name,
            max_cases=self.flags.max_cases,
        )
        outcome = TaskOutcome(task.name, [], None)
        if res.kind == "Invariant":
            outcome.result = [(0, "Inductive Invariant: |-")]
            outcome.result += [(1, "%s;" % print_formula(c)) for c in res.candidate]
        elif res.kind == "NoUniversalInvariant":
            outcome.inline_result = (
                "no universal inductive invariant over the parameters entails the candidate"
            )
        else:
            outcome.result = [(0, "Exhausted after %d iterations, candidate: |-" % res.iterations)]
            outcome.result += [(1, "%s;" % print_formula(c)) for c in res.candidate]
        if print_steps:
            outcome.extra = list(res.log)
        return outcome

    # -- CHECK_INVARIANT

    def _candidate(self, task, sig: Signature) -> List[Formula]:
        text = task.options.get("candidate")
        if not text:
            raise EngineError("task %s needs a candidate option" % task.name)
        return parse_statements(str(text), sig)

    def _check_invariant(self, task, assumptions, seeds, print_steps) -> TaskOutcome:
        lin_assumptions = assumptions_from(assumptions)
        if isinstance(task.body, PTSSpec):
            system = TransitionSystem.from_pts(task.body)
            verdict = check_inductive(system, task.body.query)
            outcome = TaskOutcome(task.name, [], verdict.kind)
            if print_steps and verdict.witness:
                outcome.extra = [
                    (0, "(step) witness: %s" % _format_point(verdict.witness)),
                    (0, _INSTANTIATION_NOTE),
                ]
            return outcome
        if isinstance(task.body, LhaSpec):
            automaton = HybridAutomaton.from_spec(task.body)
            candidate = self._candidate(task, automaton.sig)
            failing: List[str] = []
            extra: List[Tuple[int, str]] = []
            outcome = TaskOutcome(task.name, [], None)
            for vc in vcs_invariant(automaton, candidate):
                reduced = reduce_chain(automaton.sig.copy(), vc.statements, ())
                witness = decide(reduced.ground, lin_assumptions)
                holds = witness is None
                if not holds:
                    failing.append(vc.name)
                if print_steps:
                    extra.append((0, "(step) %s: %s" % (vc.name, "unsatisfiable" if holds else "satisfiable")))
                self._dumps(outcome, task, vc.statements, vc.name)
            if not failing:
                outcome.inline_result = "Inductive"
            elif all(name.startswith("I_") for name in failing):
                outcome.inline_result = "InitFails (%s)" % ", ".join(failing)
            else:
                outcome.inline_result = "ConsecutionFails (%s)" % ", ".join(failing)
            if failing and print_steps:
                extra.append((0, _INSTANTIATION_NOTE))
            outcome.extra = extra
            return outcome
        raise EngineError("CHECK_INVARIANT expects a PTS or LHA specification")

    # -- BMC

    def _bmc(self, task, assumptions, seeds, print_steps) -> TaskOutcome:
        if not isinstance(task.body, PTSSpec):
            raise EngineError("BMC expects a PTS specification")
        system = TransitionSystem.from_pts(task.body)
        k = int(task.options.get("bmc_k", 1))
        steps = bmc(system, task.body.query, k)
        violated = [s for s in steps if not s.holds]
        outcome = TaskOutcome(task.name, [], None)
        if violated:
            outcome.inline_result = "counterexample at depth %d" % violated[0].depth
        else:
            outcome.inline_result = "no counterexample up to depth %d" % k
        if print_steps:
            outcome.extra = [
                (0, "(step) depth %d: %s" % (s.depth, "unsatisfiable" if s.holds else "satisfiable"))
                for s in steps
            ]
            if violated:
                outcome.extra.append((0, _INSTANTIATION_NOTE))
        return outcome

    # -- CHATTER_FREE

    def _chatter_free(self, task, assumptions, seeds, print_steps) -> TaskOutcome:
        if not isinstance(task.body, LhaSpec):
            raise EngineError("CHATTER_FREE expects an LHA specification")
        automaton = HybridAutomaton.from_spec(task.body)
        eps_opt = task.options.get("epsilon", "epsilon")
        if isinstance(eps_opt, (int, float)):
            eps = Num(Fraction(str(eps_opt)))
        else:
            eps = parse_term_string(str(eps_opt), automaton.sig)
        vcs = vcs_chatterfree(automaton, eps, edges=task.options.get("vcs"))
        parameters, eliminate, full = (
            task.options.get("parameter"),
            task.options.get("eliminate"),
            bool(task.options.get("slfq_query", False)),
        )
        return self._constraints_for_vcs(
            task, vcs, parameters, eliminate, assumptions, full, automaton, print_steps
        )

    # -- dumps

    def _dumps(
        self, outcome: TaskOutcome, task, statements, label: str = "problem", seeds=()
    ) -> None:
        if not (self.flags.dump_reduction or self.flags.dump_smtlib):
            return
        reduced = reduce_chain(_task_sig(task).copy(), statements, seeds)
        if self.flags.dump_reduction:
            outcome.extra.append((0, "(reduction) %s:" % label))
            outcome.extra.extend((1, "%s;" % print_formula(g)) for g in reduced.ground)
        if self.flags.dump_smtlib:
            outcome.smtlib.append((label, export_smtlib(reduced.ground)))


# instantiation is complete only for local extension chains, which the
# tool assumes rather than verifies
_INSTANTIATION_NOTE = "(step) satisfiable under the complete-instantiation assumption"


def _set_constraint_result(outcome: TaskOutcome, constraint: Formula) -> None:
    """Single clauses print inline; conjunctions print one clause per
    line so quantified statements stay re-parseable."""
    from .symelim import _constraint_statements

    clauses = _constraint_statements(constraint)
    if len(clauses) <= 1:
        outcome.inline_result = print_formula(constraint)
        return
    outcome.result = [(0, "Constraint: |-")]
    outcome.result += [(1, "%s;" % print_formula(c)) for c in clauses]


def _format_point(witness: Dict[str, Fraction]) -> str:
    return ", ".join("%s = %s" % (k, witness[k]) for k in sorted(witness))


# ---------------------------------------------------------------------------
# Report assembly


def _fmt_runtime(value: float) -> str:
    return "%.4f" % value


def format_report(outcomes: List[TaskOutcome], date: Optional[str] = None) -> str:
    lines: List[str] = []
    total = sum(o.runtime for o in outcomes)
    if date is None:
        date = datetime.now().strftime("%Y-%m-%d %H:%M:%S")
    lines.append("Metadata:")
    lines.append("    Date: '%s'" % date)
    lines.append("    Number of Tasks: %d" % len(outcomes))
    lines.append("    Runtime Sum: %s" % _fmt_runtime(total))
    for o in outcomes:
        lines.append("%s:" % o.name)
        if o.inline_result is not None:
            lines.append("    Result: %s" % o.inline_result)
        else:
            lines.append("    Result:")
            for depth, text in o.result:
                lines.append("        " + "    " * depth + text)
        lines.append("    Runtime: %s" % _fmt_runtime(o.runtime))
        if o.extra:
            lines.append("    Extra:")
            for depth, text in o.extra:
                lines.append("        " + "    " * depth + text)
    return "\n".join(lines) + "\n"


def run_task_file(text: str, flags: Optional[RunFlags] = None) -> Tuple[str, int, List[TaskOutcome]]:
    """Execute a task file; returns (report text, exit code, outcomes)."""
    flags = flags or RunFlags()
    task_file = parse_task_file(text)
    selected = list(task_file.tasks.values())
    if flags.tasks:
        wanted = set(flags.tasks)
        selected = [t for t in selected if t.name in wanted]
        if not selected:
            raise ParseError("no task matches %s" % sorted(wanted))
    seed_text = None
    if flags.seed_closure:
        with open(flags.seed_closure, "r", encoding="utf-8") as fh:
            seed_text = fh.read()
    runner = TaskRunner(flags, seed_text)
    print_steps_default = bool(task_file.task_options.get("print_steps", False))

    def execute(task: TaskSpec) -> TaskOutcome:
        print_steps = bool(task.options.get("print_steps", print_steps_default))
        return runner.run(task, print_steps)

    if flags.parallel and len(selected) > 1:
        with ThreadPoolExecutor(max_workers=min(8, len(selected))) as pool:
            outcomes = list(pool.map(execute, selected))
    else:
        outcomes = [execute(t) for t in selected]
    report = format_report(outcomes)
    return report, 0, outcomes
