"""Independent reference implementations used to cross-check the library.

These are deliberately written in the most naive way possible and must not
import anything from certforge beyond the plain AST constructors. They were
written and frozen before the implementations they test.
"""

from __future__ import annotations

from certforge.core import (
    App,
    Arrow,
    BinOp,
    Bottom,
    Exists,
    Forall,
    IntLit,
    Lam,
    Not,
    PiType,
    Prop,
    TApp,
    TVar,
    Term,
    Top,
    Type,
    Var,
)


def db_type(ty: Type, tenv: tuple) -> tuple:
    """Nameless normal form of a type. tenv holds Pi-bound type variables."""
    if isinstance(ty, Prop):
        return ("prop",)
    if isinstance(ty, TVar):
        for depth in range(len(tenv) - 1, -1, -1):
            if tenv[depth] == ty.name:
                return ("tbound", len(tenv) - 1 - depth)
        return ("tfree", str(ty.name))
    if isinstance(ty, Arrow):
        return ("arrow", db_type(ty.left, tenv), db_type(ty.right, tenv))
    if isinstance(ty, TApp):
        return ("tapp", str(ty.head)) + tuple(db_type(a, tenv) for a in ty.args)
    raise AssertionError(f"unknown type node {ty!r}")


def db_term(t: Term, env: tuple = (), tenv: tuple = ()) -> tuple:
    """Nameless (de Bruijn) normal form of a term.

    Two terms are alpha-equivalent exactly when their normal forms are equal.
    Innermost binder gets index 0; lookup scans from the end so shadowed
    names resolve to the nearest binder.
    """
    if isinstance(t, Var):
        for depth in range(len(env) - 1, -1, -1):
            if env[depth] == t.name:
                return ("bound", len(env) - 1 - depth)
        return ("free", str(t.name))
    if isinstance(t, IntLit):
        return ("int", t.value)
    if isinstance(t, Top):
        return ("top",)
    if isinstance(t, Bottom):
        return ("bot",)
    if isinstance(t, Not):
        return ("not", db_term(t.body, env, tenv))
    if isinstance(t, BinOp):
        return (t.op, db_term(t.left, env, tenv), db_term(t.right, env, tenv))
    if isinstance(t, App):
        return ("app", db_term(t.fn, env, tenv), db_term(t.arg, env, tenv))
    if isinstance(t, Lam):
        return ("lam", db_type(t.ty, tenv), db_term(t.body, env + (t.var,), tenv))
    if isinstance(t, Exists):
        return ("ex", db_type(t.ty, tenv), db_term(t.body, env + (t.var,), tenv))
    if isinstance(t, Forall):
        return ("all", db_type(t.ty, tenv), db_term(t.body, env + (t.var,), tenv))
    if isinstance(t, PiType):
        return ("pi", db_term(t.body, env, tenv + (t.var,)))
    raise AssertionError(f"unknown term node {t!r}")


def eval_prop(t: Term, assignment: dict) -> bool:
    """Evaluate a quantifier-free propositional formula under an assignment.

    Atoms are bare variables; the assignment maps the variable name string
    to a bool. Anything outside the propositional fragment is an error.
    """
    if isinstance(t, Var):
        return assignment[str(t.name)]
    if isinstance(t, Top):
        return True
    if isinstance(t, Bottom):
        return False
    if isinstance(t, Not):
        return not eval_prop(t.body, assignment)
    if isinstance(t, BinOp):
        a = eval_prop(t.left, assignment)
        b = eval_prop(t.right, assignment)
        if t.op == "and":
            return a and b
        if t.op == "or":
            return a or b
        if t.op == "imp":
            return (not a) or b
        if t.op == "iff":
            return a == b
    raise AssertionError(f"not propositional: {t!r}")


def prop_atoms(t: Term) -> set:
    """Atom names of a quantifier-free propositional formula."""
    if isinstance(t, Var):
        return {str(t.name)}
    if isinstance(t, (Top, Bottom)):
        return set()
    if isinstance(t, Not):
        return prop_atoms(t.body)
    if isinstance(t, BinOp):
        return prop_atoms(t.left) | prop_atoms(t.right)
    raise AssertionError(f"not propositional: {t!r}")


def brute_force_valid(hyps: list, goals: list) -> bool:
    """Truth-table validity: every assignment satisfying all hyps satisfies
    at least one goal."""
    atoms = sorted(set().union(*[prop_atoms(f) for f in hyps + goals], set()))
    for bits in range(1 << len(atoms)):
        assignment = {a: bool(bits >> i & 1) for i, a in enumerate(atoms)}
        if all(eval_prop(h, assignment) for h in hyps):
            if not any(eval_prop(g, assignment) for g in goals):
                return False
    return True
