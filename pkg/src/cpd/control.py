"""Requirement satisfaction, supervised-plant construction, controllability,
and nonblocking verification.

Requirement actions name completed communications as they appear in the
supervised space (``SchOper!?``), so the unsupervised reference view is the
plant under the completion renaming.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ModelError
from .parser import SystemSpec
from .printer import requirement_to_str
from .relations import RelationResult, partial_bisim
from .semantics import Configuration, Engine, xi_rename
from .statespace import DEFAULT_BUDGET, StateSpace, coreachable, explore
from .terms import (
    ActionSet,
    Alt,
    Channel,
    Declarations,
    Encap,
    EventImplies,
    Guard,
    Invariant,
    Par,
    Prefix,
    ProcessTerm,
    Requirement,
    Seq,
    Star,
    StateExcludesEvent,
    eval_bool,
)


def satisfies(c: Configuration, r: Requirement, declarations: Declarations) -> bool:
    """Whether a single configuration meets the requirement.

    An event-implies form is the exclusion form with the negated formula: the
    named event may only be enabled where the formula holds."""
    alpha = c.env.alpha
    if isinstance(r, Invariant):
        return eval_bool(alpha, r.condition)
    if isinstance(r, EventImplies):
        if eval_bool(alpha, r.condition):
            return True
        return not _has_step(c, r.action, declarations)
    if isinstance(r, StateExcludesEvent):
        if not eval_bool(alpha, r.condition):
            return True
        return not _has_step(c, r.action, declarations)
    raise TypeError(f"not a requirement: {r!r}")


def _has_step(c: Configuration, action, declarations: Declarations) -> bool:
    engine = Engine(declarations)
    return any(a == action for a, _ in engine.step(c))


@dataclass
class Violation:
    state: int
    requirement: Requirement

    def render(self, ss: StateSpace) -> str:
        alpha = ss.states[self.state].env.alpha
        values = ", ".join(
            f"{n}={ss.declarations.render_value(n, v)}" for n, v in alpha.items()
        )
        return f"state {self.state} ({values}) violates: {requirement_to_str(self.requirement)}"


@dataclass
class GlobalSatisfaction:
    holds: bool
    violations: list[Violation]
    # shortest trail from the initial state to the first violating state
    trace: list | None

    def render(self, ss: StateSpace, limit: int = 10) -> str:
        if self.holds:
            return "all requirements hold in every reachable state"
        shown = self.violations[:limit]
        lines = [v.render(ss) for v in shown]
        if len(self.violations) > len(shown):
            lines.append(f"... and {len(self.violations) - len(shown)} more violations")
        if self.trace is not None:
            trail = "; ".join(str(a) for a in self.trace) or "(initial state)"
            lines.append(f"shortest trace to first violation: {trail}")
        return "\n".join(lines)


def satisfies_globally(ss: StateSpace, rs: list[Requirement]) -> GlobalSatisfaction:
    """Check every requirement in every reachable state of the space."""
    engine = Engine(ss.declarations)
    violations: list[Violation] = []
    for state in range(len(ss.states)):
        conf = ss.states[state]
        alpha = conf.env.alpha
        enabled = None
        for r in rs:
            if isinstance(r, Invariant):
                ok = eval_bool(alpha, r.condition)
            else:
                if isinstance(r, EventImplies):
                    excluded = not eval_bool(alpha, r.condition)
                else:
                    excluded = eval_bool(alpha, r.condition)
                if not excluded:
                    ok = True
                else:
                    if enabled is None:
                        enabled = {a for a, _ in ss.succ[state]}
                    ok = r.action not in enabled
            if not ok:
                violations.append(Violation(state, r))
    if not violations:
        return GlobalSatisfaction(True, [], None)
    first = min(violations, key=lambda v: v.state)
    return GlobalSatisfaction(False, violations, ss.trace_to(first.state))


def default_encapsulation(spec: SystemSpec) -> ActionSet:
    """Blocked set closing every controllable channel of the plant: all
    partial synchronizations below sender plus the plant's receive arity."""
    arities: dict[Channel, set[int]] = {}

    def walk(t: ProcessTerm) -> None:
        if isinstance(t, Prefix):
            a = t.action
            if a.channel.controllable:
                arities.setdefault(a.channel, set()).add(a.receivers)
            walk(t.cont)
        elif isinstance(t, (Guard, Encap, Star)):
            walk(t.body)
        elif isinstance(t, (Alt, Seq, Par)):
            walk(t.left)
            walk(t.right)

    walk(spec.plant)
    incomplete: set[tuple[Channel, int]] = set()
    for channel in spec.declarations.channels:
        if not channel.controllable:
            continue
        ns = arities.get(channel, {1})
        if len(ns) != 1:
            raise ModelError(
                f"channel '{channel.name}' is received with mixed arities; "
                f"declare the blocked set explicitly with an encap statement"
            )
        incomplete.add((channel, 1 + next(iter(ns))))
    return ActionSet(incomplete=frozenset(incomplete))


def supervised_plant(spec: SystemSpec, encapsulated: bool = True) -> Configuration:
    """Root configuration of the plant-supervisor composition, by default
    under the blocked set that closes the partial synchronizations."""
    supervisor = spec.supervisor
    if supervisor is None:
        raise ModelError("no supervisor declared")
    term: ProcessTerm = Par(spec.plant, supervisor)
    if encapsulated:
        blocked = spec.encapsulation
        if blocked is None:
            blocked = default_encapsulation(spec)
        term = Encap(blocked, term)
    return Configuration(term, spec.declarations.initial_environment())


def renamed_plant(spec: SystemSpec) -> Configuration:
    """Root configuration of the plant under the completion renaming."""
    return Configuration(
        xi_rename(spec.plant), spec.declarations.initial_environment()
    )


def operational_root(spec: SystemSpec, unsupervised: bool = False) -> Configuration:
    """The configuration a spec denotes operationally: the supervised
    composition when a supervisor is declared, else the renamed plant."""
    if spec.supervisor_name is not None and not unsupervised:
        return supervised_plant(spec)
    return renamed_plant(spec)


def check_controllability(
    spec: SystemSpec, budget: int | None = DEFAULT_BUDGET
) -> RelationResult:
    """The supervised composition must be partially bisimulated by the renamed
    plant with the uncontrollable actions as bisimulation action set."""
    left = explore(supervised_plant(spec), spec.declarations, budget)
    right = explore(renamed_plant(spec), spec.declarations, budget)
    return partial_bisim(left, right, "uncontrollable")


@dataclass
class NonblockingResult:
    holds: bool
    blocking: set[int]
    # shortest trail into a blocking state
    trace: list | None

    def render(self, ss: StateSpace) -> str:
        if self.holds:
            return "nonblocking: every reachable state can reach a marked state"
        first = min(self.blocking)
        trail = "; ".join(str(a) for a in self.trace) or "(initial state)"
        return (
            f"blocking: {len(self.blocking)} state(s) cannot reach a marked state; "
            f"first is state {first}, trace: {trail}"
        )


def check_nonblocking(ss: StateSpace) -> NonblockingResult:
    """Every reachable state must reach some marked state."""
    alive = coreachable(ss)
    blocking = {s for s in range(len(ss.states)) if s not in alive}
    if not blocking:
        return NonblockingResult(True, set(), None)
    first = min(blocking)
    return NonblockingResult(False, blocking, ss.trace_to(first))
