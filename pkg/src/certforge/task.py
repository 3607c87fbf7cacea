"""Proof tasks: sequents I | Sigma | Gamma |- Delta with named premises.

Gamma and Delta are ordered so serialization and export are deterministic;
set semantics is recovered by name-keyed lookup wherever equality matters.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

from . import theories
from .core import (
    PROP,
    Arrow,
    BinOp,
    Bottom,
    Ident,
    Not,
    Prop,
    TApp,
    TVar,
    Term,
    Top,
    Type,
    TypingError,
    Var,
    all_idents,
    alpha_equal,
    free_vars,
    ident,
    imp,
    type_vars,
    typecheck,
    var,
)


class TaskError(Exception):
    """Malformed task: duplicate or reserved declarations, duplicate premise names."""


@dataclass(frozen=True, slots=True)
class Premise:
    name: Ident
    formula: Term


@dataclass(frozen=True, slots=True)
class Task:
    types: tuple[tuple[Ident, int], ...] = ()
    sig: tuple[tuple[Ident, Type], ...] = ()
    hyps: tuple[Premise, ...] = ()
    goals: tuple[Premise, ...] = ()

    def __post_init__(self) -> None:
        seen_ty: set[Ident] = set()
        for name, arity in self.types:
            if theories.is_reserved(name.name):
                raise TaskError(f"type symbol {name} is interpreted and reserved")
            if name in seen_ty:
                raise TaskError(f"type symbol {name} declared twice")
            if arity < 0:
                raise TaskError(f"negative arity for {name}")
            seen_ty.add(name)
        seen_sig: set[Ident] = set()
        for name, _ in self.sig:
            if theories.is_reserved(name.name):
                raise TaskError(f"symbol {name} is interpreted and reserved")
            if name in seen_sig:
                raise TaskError(f"symbol {name} declared twice")
            seen_sig.add(name)
        names: set[Ident] = set()
        for p in itertools.chain(self.hyps, self.goals):
            if p.name in names:
                raise TaskError(f"premise name {p.name} used twice")
            names.add(p.name)

    # -- lookups ------------------------------------------------------------

    def types_map(self) -> dict[Ident, int]:
        return dict(self.types)

    def sig_map(self) -> dict[Ident, Type]:
        return dict(self.sig)

    def premises(self) -> tuple[Premise, ...]:
        return self.hyps + self.goals

    def premise_names(self) -> frozenset[Ident]:
        return frozenset(p.name for p in self.premises())

    def find(self, name: Ident | str) -> tuple[bool, int, Premise] | None:
        """Locate a premise by name; the bool is True for a goal."""
        name = ident(name)
        for i, p in enumerate(self.hyps):
            if p.name == name:
                return False, i, p
        for i, p in enumerate(self.goals):
            if p.name == name:
                return True, i, p
        return None

    # -- functional edits (used by replay and by the transformations) -------

    def replace(self, is_goal: bool, index: int, new: tuple[Premise, ...]) -> Task:
        """Splice `new` in place of the premise at `index` on the given side."""
        side = self.goals if is_goal else self.hyps
        spliced = side[:index] + new + side[index + 1:]
        return replace(self, goals=spliced) if is_goal else replace(self, hyps=spliced)

    def append(self, is_goal: bool, p: Premise) -> Task:
        if is_goal:
            return replace(self, goals=self.goals + (p,))
        return replace(self, hyps=self.hyps + (p,))

    def extend_sig(self, name: Ident, ty: Type) -> Task:
        return replace(self, sig=self.sig + ((name, ty),))

    def extend_types(self, name: Ident, arity: int) -> Task:
        return replace(self, types=self.types + ((name, arity),))

    # -- ident pools ---------------------------------------------------------

    def formula_idents(self) -> frozenset[Ident]:
        """Free variables of every premise formula plus the signature domain.

        This is the pool the freshness side conditions check against; premise
        names live in their own namespace.
        """
        out: set[Ident] = set(name for name, _ in self.sig)
        for p in self.premises():
            out |= free_vars(p.formula)
        return frozenset(out)

    def every_ident(self) -> frozenset[Ident]:
        """Everything in sight, for generating names that collide with nothing."""
        out: set[Ident] = set(name for name, _ in self.types)
        out |= set(name for name, _ in self.sig)
        out |= self.premise_names()
        for p in self.premises():
            out |= all_idents(p.formula)
        return frozenset(out)


def well_typed(T: Task) -> bool:
    """True iff every premise formula has type prop under (I, Sigma)."""
    I, sig = T.types_map(), T.sig_map()
    for p in T.premises():
        try:
            if typecheck(I, sig, p.formula) != PROP:
                return False
        except TypingError:
            return False
    return True


# ---------------------------------------------------------------------------
# Alpha-equality of whole tasks

def _scheme_canon(ty: Type) -> Type:
    """Rename type variables in first-occurrence order for comparison."""
    mapping = {v: TVar(Ident("a", i + 1)) for i, v in enumerate(type_vars(ty))}

    def walk(t: Type) -> Type:
        if isinstance(t, TVar):
            return mapping[t.name]
        if isinstance(t, Arrow):
            return Arrow(walk(t.left), walk(t.right))
        if isinstance(t, TApp):
            return TApp(t.head, tuple(walk(a) for a in t.args))
        return t

    return walk(ty)


def _support(T: Task) -> frozenset[Ident]:
    out: set[Ident] = set()
    for p in T.premises():
        out |= free_vars(p.formula)
    return frozenset(out)


def _type_heads(T: Task, supported: frozenset[Ident]) -> frozenset[Ident]:
    heads: set[Ident] = set()

    def walk_ty(ty: Type) -> None:
        if isinstance(ty, Arrow):
            walk_ty(ty.left)
            walk_ty(ty.right)
        elif isinstance(ty, TApp):
            heads.add(ty.head)
            for a in ty.args:
                walk_ty(a)

    sig = T.sig_map()
    for name in supported:
        if name in sig:
            walk_ty(sig[name])
    for p in T.premises():
        for s in _annotation_types(p.formula):
            walk_ty(s)
    return frozenset(heads)


def _annotation_types(t: Term):
    from .core import Exists, Forall, Lam, subterms

    for s in subterms(t):
        if isinstance(s, (Lam, Exists, Forall)):
            yield s.ty


def task_alpha_equal(T1: Task, T2: Task) -> bool:
    """Name-keyed, support-based task equality.

    Premises must match by name with alpha-equal formulas (order within a
    side is irrelevant); signatures and type signatures must agree on the
    symbols the formulas actually use. Unused declarations are ignored.
    """
    h1 = {p.name: p.formula for p in T1.hyps}
    h2 = {p.name: p.formula for p in T2.hyps}
    g1 = {p.name: p.formula for p in T1.goals}
    g2 = {p.name: p.formula for p in T2.goals}
    if set(h1) != set(h2) or set(g1) != set(g2):
        return False
    for name in h1:
        if not alpha_equal(h1[name], h2[name]):
            return False
    for name in g1:
        if not alpha_equal(g1[name], g2[name]):
            return False
    sup1, sup2 = _support(T1), _support(T2)
    sig1, sig2 = T1.sig_map(), T2.sig_map()
    for name in sup1 | sup2:
        if theories.lookup_interpreted(str(name)) is not None:
            continue
        t1, t2 = sig1.get(name), sig2.get(name)
        if (t1 is None) != (t2 is None):
            return False
        if t1 is not None and _scheme_canon(t1) != _scheme_canon(t2):
            return False
    ty1, ty2 = T1.types_map(), T2.types_map()
    for head in _type_heads(T1, sup1) | _type_heads(T2, sup2):
        if head in theories.INTERPRETED.type_symbols:
            continue
        if ty1.get(head) != ty2.get(head):
            return False
    return True


def task_list_alpha_equal(L1: list[Task] | tuple[Task, ...], L2: list[Task] | tuple[Task, ...]) -> bool:
    return len(L1) == len(L2) and all(task_alpha_equal(a, b) for a, b in zip(L1, L2))


# ---------------------------------------------------------------------------
# Propositional validity oracle

ORACLE_ATOM_CAP = 20  # 2^20 truth-table rows bounds desk-scale runtime


def prop_valid_oracle(T: Task) -> bool | None:
    """Brute-force validity on the propositional fragment.

    Returns True/False when every premise is built from prop-typed variables
    and the propositional connectives only; None (not applicable) on
    quantifiers, lambdas, applications, type quantification, interpreted
    symbols, or more than ORACLE_ATOM_CAP atoms.
    """
    sig = T.sig_map()
    atoms: set[Ident] = set()

    def scan(t: Term) -> bool:
        if isinstance(t, Var):
            if sig.get(t.name) != PROP:
                return False
            atoms.add(t.name)
            return True
        if isinstance(t, (Top, Bottom)):
            return True
        if isinstance(t, Not):
            return scan(t.body)
        if isinstance(t, BinOp):
            return scan(t.left) and scan(t.right)
        return False

    for p in T.premises():
        if not scan(p.formula):
            return None
    order = sorted(atoms, key=lambda n: (n.name, n.uid))
    if len(order) > ORACLE_ATOM_CAP:
        return None

    def eval_term(t: Term, env: dict[Ident, bool]) -> bool:
        if isinstance(t, Var):
            return env[t.name]
        if isinstance(t, Top):
            return True
        if isinstance(t, Bottom):
            return False
        if isinstance(t, Not):
            return not eval_term(t.body, env)
        assert isinstance(t, BinOp)
        l, r = eval_term(t.left, env), eval_term(t.right, env)
        if t.op == "and":
            return l and r
        if t.op == "or":
            return l or r
        if t.op == "imp":
            return (not l) or r
        return l == r  # iff

    for bits in itertools.product((False, True), repeat=len(order)):
        env = dict(zip(order, bits))
        if all(eval_term(p.formula, env) for p in T.hyps):
            if not any(eval_term(p.formula, env) for p in T.goals):
                return False
    return True


# ---------------------------------------------------------------------------
# Benchmark family

def gen_chain_task(n: int) -> Task:
    """The n-variable implication chain: |- p1 => (p1=>p2) => ... => pn."""
    if n < 1:
        raise ValueError("chain task needs n >= 1")
    ps = [var(f"p{i}") for i in range(1, n + 1)]
    links = [ps[0]] + [imp(ps[i], ps[i + 1]) for i in range(n - 1)] + [ps[n - 1]]
    formula = imp(*links)
    return Task(
        sig=tuple((p.name, PROP) for p in ps),
        goals=(Premise(ident("G"), formula),),
    )
