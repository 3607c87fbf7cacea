"""Kernel certificate replay.

step() applies one kernel rule to a task and either returns the child tasks
or raises CheckError naming the violated side condition. ccheck() walks a
whole certificate with it. Every task a rule produces is typechecked on the
spot, so a defect in the rule logic surfaces as a failure at the offending
node instead of as a bogus derived leaf.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import cert
from .core import (
    INT,
    PROP,
    Bottom,
    Exists,
    Forall,
    Ident,
    Lam,
    Not,
    PiType,
    TApp,
    Term,
    Top,
    TypingError,
    Var,
    all_idents,
    alpha_equal,
    app,
    check_type,
    conj,
    disj,
    eq,
    free_vars,
    fresh_ident,
    iff,
    imp,
    subst_term,
    subst_type,
    typecheck,
    typecheck_against,
    var,
)
from .task import Premise, Task, TaskError, task_alpha_equal, task_list_alpha_equal, well_typed
from .theories import apply_context, is_reserved


@dataclass(frozen=True, slots=True)
class CheckFailure:
    rule: str
    path: tuple[int, ...]
    message: str


@dataclass(frozen=True, slots=True)
class CheckReport:
    ok: bool
    derived_leaves: list[Task]
    failure: CheckFailure | None = None


class CheckError(Exception):
    def __init__(self, failure: CheckFailure):
        super().__init__(
            f"{failure.rule} at {list(failure.path)}: {failure.message}")
        self.failure = failure


def step(T: Task, node: cert.KernelCert, path: tuple[int, ...]) -> list[Task]:
    """One rule application: the tasks the node's children must discharge."""
    rule = type(node).__name__

    def fail(message: str):
        raise CheckError(CheckFailure(rule, path, message))

    def find(name: Ident, goal: bool | None) -> tuple[bool, int, Premise]:
        found = T.find(name)
        if found is None:
            fail(f"no premise named {name}")
        if goal is not None and found[0] != goal:
            fail(f"{name} is not a {'goal' if goal else 'hypothesis'}")
        return found

    def fresh_premise(name: Ident) -> None:
        if name in T.premise_names():
            fail(f"premise name {name} is already used")

    def match(actual: Term, expected: Term, what: str) -> None:
        if not alpha_equal(actual, expected):
            fail(f"{what} does not match the task")

    def ground(ty) -> None:
        try:
            check_type(T.types_map(), ty, allow_vars=False)
        except TypingError as e:
            fail(str(e))

    def typed(t: Term, expected) -> None:
        try:
            typecheck_against(T.types_map(), T.sig_map(), t, expected)
        except TypingError as e:
            fail(str(e))

    try:
        children = _apply(T, node, fail, find, fresh_premise, match, ground,
                          typed)
    except TaskError as e:
        fail(str(e))
    for child in children:
        if not well_typed(child):
            fail("produced an ill-typed task")
    return children


def _apply(T: Task, node: cert.KernelCert, fail, find, fresh_premise, match,
           ground, typed) -> list[Task]:
    if isinstance(node, cert.KHole):
        fail("KHole has no rule; it closes nothing")

    if isinstance(node, cert.KTrivial):
        _, _, prem = find(node.name, node.goal)
        want = Top if node.goal else Bottom
        if not isinstance(prem.formula, want):
            fail(f"{node.name} is not {'truth' if node.goal else 'falsity'}")
        return []

    if isinstance(node, cert.KAxiom):
        _, _, hyp = find(node.hyp, False)
        _, _, goal = find(node.goal, True)
        match(hyp.formula, node.formula, f"hypothesis {node.hyp}")
        match(goal.formula, node.formula, f"goal {node.goal}")
        return []

    if isinstance(node, cert.KEqRefl):
        _, _, goal = find(node.name, True)
        match(goal.formula, eq(node.term, node.term), f"goal {node.name}")
        return []

    if isinstance(node, cert.KAssert):
        fresh_premise(node.name)
        try:
            ty = typecheck(T.types_map(), T.sig_map(), node.formula)
        except TypingError as e:
            fail(str(e))
        if ty != PROP:
            fail(f"asserted formula has type {ty}, not prop")
        p = Premise(node.name, node.formula)
        return [T.append(True, p), T.append(False, p)]

    if isinstance(node, cert.KSplit):
        side, idx, prem = find(node.name, node.goal)
        make = conj if node.goal else disj
        match(prem.formula, make(node.left, node.right), f"premise {node.name}")
        return [T.replace(side, idx, (Premise(node.name, node.left),)),
                T.replace(side, idx, (Premise(node.name, node.right),))]

    if isinstance(node, cert.KDestruct):
        side, idx, prem = find(node.name, node.goal)
        make = disj if node.goal else conj
        match(prem.formula, make(node.left, node.right), f"premise {node.name}")
        if node.left_name == node.right_name:
            fail("the two part names coincide")
        fresh_premise(node.left_name)
        fresh_premise(node.right_name)
        return [T.replace(side, idx, (Premise(node.left_name, node.left),
                                      Premise(node.right_name, node.right)))]

    if isinstance(node, cert.KClear):
        side, idx, prem = find(node.name, node.goal)
        match(prem.formula, node.formula, f"premise {node.name}")
        return [T.replace(side, idx, ())]

    if isinstance(node, cert.KSwapNeg):
        side, idx, prem = find(node.name, node.goal)
        match(prem.formula, Not(node.formula), f"premise {node.name}")
        moved = Premise(node.name, node.formula)
        return [T.replace(side, idx, ()).append(not side, moved)]

    if isinstance(node, cert.KIntroImp):
        _, idx, prem = find(node.name, True)
        match(prem.formula, imp(node.left, node.right), f"goal {node.name}")
        fresh_premise(node.hyp_name)
        t = T.replace(True, idx, (Premise(node.name, node.right),))
        return [t.append(False, Premise(node.hyp_name, node.left))]

    if isinstance(node, cert.KSplitImp):
        _, idx, prem = find(node.name, False)
        match(prem.formula, imp(node.left, node.right),
              f"hypothesis {node.name}")
        fresh_premise(node.goal_name)
        t_side = T.replace(False, idx, ()).append(
            True, Premise(node.goal_name, node.left))
        t_rest = T.replace(False, idx, (Premise(node.name, node.right),))
        return [t_side, t_rest]

    if isinstance(node, cert.KUnfoldIff):
        side, idx, prem = find(node.name, node.goal)
        match(prem.formula, iff(node.left, node.right), f"premise {node.name}")
        unfolded = conj(imp(node.left, node.right), imp(node.right, node.left))
        return [T.replace(side, idx, (Premise(node.name, unfolded),))]

    if isinstance(node, cert.KRevert):
        _, hidx, hyp = find(node.hyp, False)
        _, gidx, goal = find(node.goal, True)
        match(hyp.formula, node.hyp_formula, f"hypothesis {node.hyp}")
        match(goal.formula, node.goal_formula, f"goal {node.goal}")
        merged = Premise(node.goal, imp(node.hyp_formula, node.goal_formula))
        return [T.replace(False, hidx, ()).replace(True, gidx, (merged,))]

    if isinstance(node, cert.KIntroQuant):
        if not isinstance(node.pred, Lam):
            fail("the predicate is not a lambda abstraction")
        if node.pred.ty != node.ty:
            fail("the predicate's annotation differs from the carried type")
        ground(node.ty)
        side, idx, prem = find(node.name, node.goal)
        make = Forall if node.goal else Exists
        match(prem.formula, make(node.pred.var, node.ty, node.pred.body),
              f"premise {node.name}")
        y = node.fresh
        if is_reserved(y.name):
            fail(f"{y} is interpreted and reserved")
        if y in T.formula_idents():
            fail(f"{y} is not fresh for the task")
        opened = Premise(node.name, apply_context(node.pred, Var(y)))
        return [T.extend_sig(y, node.ty).replace(side, idx, (opened,))]

    if isinstance(node, cert.KInstQuant):
        if not isinstance(node.pred, Lam):
            fail("the predicate is not a lambda abstraction")
        if node.pred.ty != node.ty:
            fail("the predicate's annotation differs from the carried type")
        ground(node.ty)
        side, idx, prem = find(node.name, node.goal)
        make = Exists if node.goal else Forall
        match(prem.formula, make(node.pred.var, node.ty, node.pred.body),
              f"premise {node.name}")
        fresh_premise(node.inst_name)
        typed(node.witness, node.ty)
        inst = Premise(node.inst_name, apply_context(node.pred, node.witness))
        return [T.append(side, inst)]

    if isinstance(node, cert.KIntroType):
        _, idx, prem = find(node.name, True)
        if not isinstance(node.formula, PiType):
            fail("the carried formula is not type-quantified")
        match(prem.formula, node.formula, f"goal {node.name}")
        if node.iota in T.types_map() or is_reserved(node.iota.name) \
                or node.iota.name == "prop":
            fail(f"type name {node.iota} is not fresh")
        fixed = subst_type(node.formula.body, node.formula.var,
                           TApp(node.iota, ()))
        t = T.extend_types(node.iota, 0)
        return [t.replace(True, idx, (Premise(node.name, fixed),))]

    if isinstance(node, cert.KInstType):
        _, idx, prem = find(node.name, False)
        if not isinstance(node.formula, PiType):
            fail("the carried formula is not type-quantified")
        match(prem.formula, node.formula, f"hypothesis {node.name}")
        ground(node.ty)
        fresh_premise(node.inst_name)
        inst = subst_type(node.formula.body, node.formula.var, node.ty)
        return [T.append(False, Premise(node.inst_name, inst))]

    if isinstance(node, cert.KRewrite):
        _, _, heq = find(node.eq_name, False)
        match(heq.formula, eq(node.left, node.right),
              f"hypothesis {node.eq_name}")
        if not isinstance(node.context, Lam):
            fail("the rewriting context is not a lambda abstraction")
        ground(node.context.ty)
        typed(node.left, node.context.ty)
        typed(node.right, node.context.ty)
        side, idx, prem = find(node.name, node.goal)
        match(prem.formula, apply_context(node.context, node.left),
              f"premise {node.name}")
        rewritten = Premise(node.name, apply_context(node.context, node.right))
        return [T.replace(side, idx, (rewritten,))]

    if isinstance(node, cert.KInduction):
        i = node.var
        if T.sig_map().get(i) != INT:
            fail(f"{i} is not declared with type int")
        typed(node.bound, INT)
        if i in free_vars(node.bound):
            fail(f"the bound mentions {i}")
        if not isinstance(node.context, Lam):
            fail("the induction context is not a lambda abstraction")
        if node.context.ty != INT:
            fail("the induction context does not abstract an int")
        if i in free_vars(node.context):
            fail(f"the context must abstract every occurrence of {i}")
        _, _, goal = find(node.goal_name, True)
        match(goal.formula, apply_context(node.context, Var(i)),
              f"goal {node.goal_name}")
        for p in T.premises():
            if p.name != node.goal_name and i in free_vars(p.formula):
                fail(f"{i} occurs free in premise {p.name}")
        if node.hyp_name == node.rec_name:
            fail("the two hypothesis names coincide")
        fresh_premise(node.hyp_name)
        fresh_premise(node.rec_name)
        base_t = T.append(False, Premise(
            node.hyp_name, app(var("<="), Var(i), node.bound)))
        m = fresh_ident("n", all_idents(node.context.body)
                        | {i, node.context.var})
        below = subst_term(node.context.body, node.context.var, Var(m))
        rec_f = Forall(m, INT, imp(app(var("<"), Var(m), Var(i)), below))
        rec_t = T.append(False, Premise(
            node.hyp_name, app(var(">"), Var(i), node.bound)))
        rec_t = rec_t.append(False, Premise(node.rec_name, rec_f))
        return [base_t, rec_t]

    fail(f"unknown kernel certificate {node!r}")


def ccheck(c: cert.KernelCert, T: Task) -> CheckReport:
    """Replay c against T; collect the tasks at the holes, in order."""
    if not well_typed(T):
        return CheckReport(False, [], CheckFailure(
            type(c).__name__, (), "the initial task is not well-typed"))
    leaves: list[Task] = []
    todo: list[tuple[cert.KernelCert, Task, tuple[int, ...]]] = [(c, T, ())]
    while todo:
        node, task, path = todo.pop()
        if isinstance(node, cert.KHole):
            if not task_alpha_equal(node.task, task):
                return CheckReport(False, [], CheckFailure(
                    "KHole", path, "stored task differs from the derived one"))
            leaves.append(task)
            continue
        try:
            tasks = step(task, node, path)
        except CheckError as e:
            return CheckReport(False, [], e.failure)
        children = cert.cert_children(node)
        assert len(children) == len(tasks)
        for i in range(len(children) - 1, -1, -1):
            todo.append((children[i], tasks[i], path + (i,)))
    return CheckReport(True, leaves, None)


def check_application(T: Task, L, c: cert.KernelCert) -> bool:
    """Does c certify that transforming T produced exactly the tasks L?"""
    report = ccheck(c, T)
    return report.ok and task_list_alpha_equal(report.derived_leaves, list(L))
