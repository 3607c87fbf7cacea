"""Certifying transformations over proof tasks.

Every operation either returns (resulting tasks, surface certificate) or
raises TransformError and returns nothing.  The pair always comes out of
one code path: build the surface certificate, replay it with cert.elaborate
against the input task, and read the resulting tasks off the kernel
certificate's leaves.  A successful return has therefore already survived
the rule-by-rule validation; the leaves and the task list cannot drift
apart.
"""

from __future__ import annotations

import sys
from collections.abc import Callable, Iterable
from dataclasses import dataclass

from . import cert, theories
from .cert import CertError, SurfaceCert
from .core import (
    App,
    BinOp,
    Bottom,
    Exists,
    Forall,
    Ident,
    IntLit,
    Lam,
    Not,
    PiType,
    Term,
    Top,
    Var,
    alpha_equal,
    free_vars,
    fresh_ident,
    ident,
    subst_term,
)
from .task import Premise, Task

Result = tuple[list[Task], SurfaceCert]


class TransformError(Exception):
    """The transformation does not apply; no tasks, no certificate."""


@dataclass(frozen=True, slots=True)
class CertifyingTransform:
    """A named transformation: apply(T) -> (resulting tasks, certificate)."""

    name: str
    apply: Callable[[Task], Result]


def transform(op, /, *args, name: str | None = None) -> CertifyingTransform:
    """Package an operation with its arguments, for composition."""
    if name is None:
        name = op.__name__.removeprefix("t_")
    return CertifyingTransform(name, lambda T: op(T, *args))


# ---------------------------------------------------------------------------
# Shared plumbing

# names the freshness side conditions refuse outright
_RESERVED = frozenset(
    {ident(s) for s in theories.INTERPRETED.term_symbols}
    | set(theories.INTERPRETED.type_symbols)
    | {ident("prop")}
)


def _certify(T: Task, s: SurfaceCert) -> Result:
    try:
        k = cert.elaborate(s, T)
    except CertError as e:
        raise TransformError(str(e)) from e
    return cert.leaves(k), s


def _premise(T: Task, name: Ident, who: str) -> tuple[bool, Premise]:
    found = T.find(name)
    if found is None:
        raise TransformError(f"{who}: no premise named {name}")
    is_goal, _, prem = found
    return is_goal, prem


def _fresh_name(base: str, used: set[Ident]) -> Ident:
    out = fresh_ident(base, used | _RESERVED)
    used.add(out)
    return out


# ---------------------------------------------------------------------------
# Elementary transformations

def t_identity(T: Task) -> Result:
    return _certify(T, cert.SHole())


identity = CertifyingTransform("identity", t_identity)


def t_trivial(T: Task, P: Ident) -> Result:
    return _certify(T, cert.STrivial(P))


def t_axiom(T: Task, H: Ident, G: Ident) -> Result:
    return _certify(T, cert.SAxiom(H, G))


def t_assert(T: Task, name: Ident, formula: Term) -> Result:
    return _certify(T, cert.SAssert(name, formula, cert.SHole(), cert.SHole()))


def t_split(T: Task, P: Ident) -> Result:
    return _certify(T, cert.SSplit(P, cert.SHole(), cert.SHole()))


def t_destruct(T: Task, P: Ident, P1: Ident, P2: Ident) -> Result:
    return _certify(T, cert.SDestruct(P, P1, P2, cert.SHole()))


def t_construct(T: Task, P1: Ident, P2: Ident, P: Ident) -> Result:
    return _certify(T, cert.SConstruct(P1, P2, P, cert.SHole()))


def t_clear(T: Task, P: Ident) -> Result:
    return _certify(T, cert.SClear(P, cert.SHole()))


def t_swap_neg(T: Task, P: Ident) -> Result:
    return _certify(T, cert.SSwapNeg(P, cert.SHole()))


def t_intro_imp(T: Task, P: Ident) -> Result:
    used = set(T.premise_names())
    hyp_name = _fresh_name(f"{P}.1", used)
    return _certify(T, cert.SIntroImp(P, hyp_name, cert.SHole()))


def t_split_imp(T: Task, P: Ident) -> Result:
    used = set(T.premise_names())
    goal_name = _fresh_name(f"{P}.1", used)
    return _certify(
        T, cert.SSplitImp(P, goal_name, cert.SHole(), cert.SHole()))


def t_unfold_iff(T: Task, P: Ident) -> Result:
    return _certify(T, cert.SUnfoldIff(P, cert.SHole()))


# ---------------------------------------------------------------------------
# Quantifiers

def t_instantiate(T: Task, H: Ident, u: Term) -> Result:
    used = set(T.premise_names())
    inst_name = _fresh_name(f"{H}_inst", used)
    return _certify(T, cert.SInstQuant(H, inst_name, u, cert.SHole()))


def t_inst_type(T: Task, H: Ident, ty) -> Result:
    used = set(T.premise_names())
    inst_name = _fresh_name(f"{H}_inst", used)
    return _certify(T, cert.SInstType(H, inst_name, ty, cert.SHole()))


def t_intro(T: Task, P: Ident) -> Result:
    is_goal, prem = _premise(T, P, "t_intro")
    f = prem.formula
    if isinstance(f, PiType):
        if not is_goal:
            raise TransformError(
                f"t_intro: {P} is a type-quantified hypothesis; "
                "instantiate it instead")
        iota = fresh_ident(
            f.var,
            T.every_ident() | {n for n, _ in T.types} | _RESERVED)
        return _certify(T, cert.SIntroType(P, iota, cert.SHole()))
    if isinstance(f, Forall if is_goal else Exists):
        fresh = fresh_ident(f.var, T.every_ident() | _RESERVED)
        return _certify(T, cert.SIntroQuant(P, fresh, cert.SHole()))
    side = "goal" if is_goal else "hypothesis"
    raise TransformError(f"t_intro: {side} {P} does not start with a binder")


# ---------------------------------------------------------------------------
# Rewriting

def _eq_sides(f: Term) -> tuple[Term, Term] | None:
    if (isinstance(f, App) and isinstance(f.fn, App)
            and isinstance(f.fn.fn, Var) and f.fn.fn.name == ident("=")):
        return f.fn.arg, f.arg
    return None


def _eq_spine(f: Term) -> tuple[list, Term, Term]:
    """Strip the forall/condition prefix down to the equation.

    Returns (spine, l, r) where spine entries are ("all", var, ty) and
    ("cond", formula), outermost first, with no substitution applied.
    """
    spine = []
    while True:
        if isinstance(f, Forall):
            spine.append(("all", f.var, f.ty))
            f = f.body
        elif isinstance(f, BinOp) and f.op == "imp":
            spine.append(("cond", f.left))
            f = f.right
        else:
            break
    sides = _eq_sides(f)
    if sides is None:
        raise TransformError(
            "t_rewrite: the premise does not end in an equality")
    return spine, sides[0], sides[1]


def _match_pattern(pat: Term, t: Term, pvars: frozenset[Ident],
                   binds: dict[Ident, Term]) -> bool:
    if isinstance(pat, Var) and pat.name in pvars:
        if pat.name in binds:
            return alpha_equal(binds[pat.name], t)
        binds[pat.name] = t
        return True
    if isinstance(pat, (Lam, Forall, Exists, PiType)):
        # first-order only: a binder in the pattern must match literally
        return not (free_vars(pat) & pvars) and alpha_equal(pat, t)
    if type(pat) is not type(t):
        return False
    if isinstance(pat, Var):
        return pat.name == t.name
    if isinstance(pat, IntLit):
        return pat.value == t.value
    if isinstance(pat, (Top, Bottom)):
        return True
    if isinstance(pat, Not):
        return _match_pattern(pat.body, t.body, pvars, binds)
    if isinstance(pat, BinOp):
        return (pat.op == t.op
                and _match_pattern(pat.left, t.left, pvars, binds)
                and _match_pattern(pat.right, t.right, pvars, binds))
    if isinstance(pat, App):
        return (_match_pattern(pat.fn, t.fn, pvars, binds)
                and _match_pattern(pat.arg, t.arg, pvars, binds))
    return False


def _find_instantiation(pattern: Term, pvars: frozenset[Ident],
                        formula: Term) -> dict[Ident, Term] | None:
    """Leftmost-outermost subterm of `formula` matching `pattern`."""

    def walk(t: Term, blocked: frozenset[Ident]) -> dict[Ident, Term] | None:
        binds: dict[Ident, Term] = {}
        if _match_pattern(pattern, t, pvars, binds):
            # a witness mentioning a locally bound variable cannot leave
            # its binder, so keep scanning
            if all(not (free_vars(u) & blocked) for u in binds.values()):
                return binds
        if isinstance(t, Not):
            return walk(t.body, blocked)
        if isinstance(t, BinOp):
            return walk(t.left, blocked) or walk(t.right, blocked)
        if isinstance(t, App):
            return walk(t.fn, blocked) or walk(t.arg, blocked)
        if isinstance(t, (Lam, Forall, Exists)):
            return walk(t.body, blocked | {t.var})
        if isinstance(t, PiType):
            return walk(t.body, blocked)
        return None

    return walk(formula, frozenset())


def t_rewrite(T: Task, Heq: Ident, P: Ident, right_to_left: bool = False,
              inst: Iterable[Term] | None = None) -> Result:
    """Rewrite with an equation living under foralls and conditions.

    The premise Heq must look like forall xs. c1 => ... => ck => (l = r).
    `inst` instantiates xs in order; leave it None to infer the terms by
    matching l (or r) against the target premise.  Each condition becomes
    an extra resulting task, in order, ahead of the rewritten one.
    """
    _, heq = _premise(T, Heq, "t_rewrite")
    _, target = _premise(T, P, "t_rewrite")
    spine, l_raw, r_raw = _eq_spine(heq.formula)
    binders = [v for kind, v, *_ in spine if kind == "all"]

    if inst is None:
        pattern = r_raw if right_to_left else l_raw
        binds = _find_instantiation(
            pattern, frozenset(binders), target.formula)
        if binds is None:
            raise TransformError(
                f"t_rewrite: no subterm of {P} matches the equation")
        missing = [x for x in binders if x not in binds]
        if missing:
            raise TransformError(
                f"t_rewrite: cannot infer a term for {missing[0]}; "
                "pass inst explicitly")
        inst = [binds[x] for x in binders]
    else:
        inst = list(inst)
        if len(inst) != len(binders):
            raise TransformError(
                f"t_rewrite: the equation takes {len(binders)} "
                f"instantiation terms, got {len(inst)}")

    # walk the spine: instantiate each forall into a fresh copy, split off
    # each condition as a side goal; the original hypothesis stays intact
    used = set(T.premise_names())
    witnesses = iter(inst)
    cur = Heq
    shape = heq.formula
    temps: list[Ident] = []
    shell: list[tuple] = []
    conds = 0
    for entry in spine:
        if entry[0] == "all":
            u = next(witnesses)
            nxt = _fresh_name(f"{Heq}_inst", used)
            shell.append(("inst", cur, nxt, u))
            temps.append(nxt)
            cur = nxt
            shape = subst_term(shape.body, entry[1], u)
        else:
            if cur == Heq:
                # copy first: splitting would chew up the caller's premise
                tmp = _fresh_name(f"{Heq}_inst", used)
                shell.append(("copy", cur, tmp, shape))
                temps.append(tmp)
                cur = tmp
            conds += 1
            gname = _fresh_name(f"{Heq}.{conds}", used)
            shell.append(("cond", cur, gname))
            shape = shape.right

    return _assemble_rewrite(T, shell, temps, cur, P, right_to_left)


def _assemble_rewrite(T, shell, temps, cur, P, right_to_left) -> Result:
    s: SurfaceCert = cert.SHole()
    for tmp in reversed(temps):
        s = cert.SClear(tmp, s)
    s = cert.SRewrite(right_to_left, cur, P, s)
    for entry in reversed(shell):
        if entry[0] == "inst":
            _, frm, nxt, u = entry
            s = cert.SInstQuant(frm, nxt, u, s)
        elif entry[0] == "copy":
            _, frm, tmp, formula = entry
            s = cert.SAssert(tmp, formula, cert.SAxiom(frm, tmp), s)
        else:
            _, frm, gname = entry
            s = cert.SSplitImp(frm, gname, cert.SHole(), s)
    return _certify(T, s)


# ---------------------------------------------------------------------------
# Induction

def t_induction(T: Task, G: Ident, i: Ident, a: Term) -> Result:
    is_goal, _ = _premise(T, G, "t_induction")
    if not is_goal:
        raise TransformError(f"t_induction: {G} is not a goal")
    if len(T.goals) != 1 or T.goals[0].name != G:
        raise TransformError("t_induction: the task must have exactly the "
                             f"goal {G}")
    used = set(T.premise_names())
    hyp_name = _fresh_name(f"H{i}", used)
    rec_name = _fresh_name("H_rec", used)
    return _certify(
        T, cert.SInduction(i, a, hyp_name, rec_name,
                           cert.SHole(), cert.SHole()))


# ---------------------------------------------------------------------------
# Composition

def compose_transforms(t1: CertifyingTransform,
                       t2_selector: Callable[[int, Task],
                                             CertifyingTransform | None],
                       ) -> CertifyingTransform:
    """Apply t1, then whatever t2_selector picks for each resulting task.

    The selector gets (index, task) and returns a transform to run on that
    task, or None to keep it as a leaf.  The combined certificate splices
    each sub-certificate into the matching hole, so the resulting task
    list and the certificate leaves stay aligned.  Any component failure
    aborts the whole application.
    """

    def apply(T: Task) -> Result:
        tasks, s = t1.apply(T)
        out: list[Task] = []
        fillers: list[SurfaceCert] = []
        for idx, task in enumerate(tasks):
            t2 = t2_selector(idx, task)
            if t2 is None:
                out.append(task)
                fillers.append(cert.SHole())
            else:
                sub_tasks, sub_s = t2.apply(task)
                out.extend(sub_tasks)
                fillers.append(sub_s)
        return out, cert.fill_holes(s, fillers)

    return CertifyingTransform(f"compose({t1.name})", apply)


# ---------------------------------------------------------------------------
# blast

def _prop_kind(p: Premise) -> str:
    f = p.formula
    if isinstance(f, BinOp):
        return f.op
    if isinstance(f, Not):
        return "not"
    if isinstance(f, Top):
        return "top"
    if isinstance(f, Bottom):
        return "bottom"
    if isinstance(f, (Var, App, IntLit)):
        return "atom"
    raise TransformError(f"t_blast: premise {p.name} is not propositional")


def _blast_action(T: Task) -> CertifyingTransform:
    """One tableau step: close if possible, else decompose goals, then hyps."""
    for p in T.hyps:
        if isinstance(p.formula, Bottom):
            return transform(t_trivial, p.name)
    for p in T.goals:
        if isinstance(p.formula, Top):
            return transform(t_trivial, p.name)
    for h in T.hyps:
        for g in T.goals:
            if alpha_equal(h.formula, g.formula):
                return transform(t_axiom, h.name, g.name)
    used = set(T.premise_names())
    for p in T.goals:
        kind = _prop_kind(p)
        if kind == "and":
            return transform(t_split, p.name)
        if kind == "or":
            return transform(t_destruct, p.name,
                             _fresh_name(f"{p.name}.1", used),
                             _fresh_name(f"{p.name}.2", used))
        if kind == "imp":
            return transform(t_intro_imp, p.name)
        if kind == "not":
            return transform(t_swap_neg, p.name)
        if kind == "iff":
            return transform(t_unfold_iff, p.name)
        if kind == "bottom":
            return transform(t_clear, p.name)
    for p in T.hyps:
        kind = _prop_kind(p)
        if kind == "and":
            return transform(t_destruct, p.name,
                             _fresh_name(f"{p.name}.1", used),
                             _fresh_name(f"{p.name}.2", used))
        if kind == "or":
            return transform(t_split, p.name)
        if kind == "imp":
            return transform(t_split_imp, p.name)
        if kind == "not":
            return transform(t_swap_neg, p.name)
        if kind == "iff":
            return transform(t_unfold_iff, p.name)
        if kind == "top":
            return transform(t_clear, p.name)
    raise TransformError("t_blast: cannot close the task")


def _blast() -> CertifyingTransform:
    def apply(T: Task) -> Result:
        step = _blast_action(T)
        return compose_transforms(step, lambda _i, _t: _blast()).apply(T)

    return CertifyingTransform("blast", apply)


def t_blast(T: Task) -> Result:
    """Close a propositional task outright, or fail.

    Goal-directed: every step first tries to close the branch with an
    axiom or truth/falsity, then decomposes the leftmost compound goal,
    then the leftmost compound hypothesis.  Each step is an elementary
    certifying transformation and the steps are glued together with
    compose_transforms, so the certificate is exactly the trace.
    """
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 40000))
    return _blast().apply(T)
