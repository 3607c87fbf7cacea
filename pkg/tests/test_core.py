from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import typing_cases
from certforge.core import (
    INT,
    PROP,
    App,
    Arrow,
    BinOp,
    Bottom,
    Exists,
    Forall,
    Ident,
    IntLit,
    Lam,
    Not,
    PiType,
    TApp,
    TVar,
    Top,
    TypingError,
    Var,
    alpha_equal,
    annotate,
    app,
    arrow,
    conj,
    eq,
    free_type_vars,
    free_vars,
    fresh_ident,
    ident,
    imp,
    subst_in_type,
    subst_term,
    subst_type,
    typecheck,
    type_is_ground,
    type_vars,
)
from oracles import db_term

# ---------------------------------------------------------------------------
# Identifiers


def test_ident_parsing():
    assert ident("x") == Ident("x", 0)
    assert str(ident("x")) == "x"
    assert ident("x#3") == Ident("x", 3)
    assert str(Ident("x", 3)) == "x#3"
    # a non-numeric tail is just part of the name
    assert ident("x#y") == Ident("x#y", 0)
    i = Ident("z", 1)
    assert ident(i) is i


def test_fresh_ident_progression():
    assert fresh_ident("x", frozenset()) == Ident("x", 0)
    assert fresh_ident("x", {Ident("x", 0)}) == Ident("x", 1)
    assert fresh_ident("x", {Ident("x", 0), Ident("x", 1)}) == Ident("x", 2)


@given(st.sets(st.integers(min_value=0, max_value=30), max_size=20))
def test_fresh_ident_avoids(uids):
    avoid = {Ident("v", u) for u in uids}
    got = fresh_ident("v", avoid)
    assert got not in avoid
    assert got.name == "v"


# ---------------------------------------------------------------------------
# Term strategy for property tests

_names = [ident(n) for n in ("x", "y", "z", "w")]
_tnames = [ident(n) for n in ("a", "b")]
_anns = [INT, PROP, Arrow(INT, PROP), TVar(_tnames[0]), TVar(_tnames[1])]

_leaf = st.one_of(
    st.sampled_from([Top(), Bottom(), IntLit(0), IntLit(1)]),
    st.sampled_from(_names).map(Var),
)


def _extend(inner):
    binder = st.tuples(st.sampled_from(_names), st.sampled_from(_anns), inner)
    return st.one_of(
        inner.map(Not),
        st.tuples(st.sampled_from(["and", "or", "imp", "iff"]), inner, inner)
          .map(lambda t: BinOp(*t)),
        st.tuples(inner, inner).map(lambda t: App(*t)),
        binder.map(lambda t: Lam(*t)),
        binder.map(lambda t: Forall(*t)),
        binder.map(lambda t: Exists(*t)),
        st.tuples(st.sampled_from(_tnames), inner).map(lambda t: PiType(*t)),
    )


terms = st.recursive(_leaf, _extend, max_leaves=12)


def rename_bound(t, vmap=None, tmap=None, counter=None):
    """Structurally rename every binder to a fresh name; free names unchanged."""
    vmap = vmap or {}
    tmap = tmap or {}
    counter = counter if counter is not None else itertools.count(1)

    def fresh():
        return Ident(f"r{next(counter)}")

    def retype(ty):
        if isinstance(ty, TVar):
            return TVar(tmap.get(ty.name, ty.name))
        if isinstance(ty, Arrow):
            return Arrow(retype(ty.left), retype(ty.right))
        if isinstance(ty, TApp):
            return TApp(ty.head, tuple(retype(a) for a in ty.args))
        return ty

    if isinstance(t, Var):
        return Var(vmap.get(t.name, t.name))
    if isinstance(t, (Top, Bottom, IntLit)):
        return t
    if isinstance(t, Not):
        return Not(rename_bound(t.body, vmap, tmap, counter))
    if isinstance(t, BinOp):
        return BinOp(t.op, rename_bound(t.left, vmap, tmap, counter),
                     rename_bound(t.right, vmap, tmap, counter))
    if isinstance(t, App):
        return App(rename_bound(t.fn, vmap, tmap, counter),
                   rename_bound(t.arg, vmap, tmap, counter))
    if isinstance(t, (Lam, Exists, Forall)):
        new = fresh()
        inner = dict(vmap)
        inner[t.var] = new
        return type(t)(new, retype(t.ty),
                       rename_bound(t.body, inner, tmap, counter))
    if isinstance(t, PiType):
        new = fresh()
        inner = dict(tmap)
        inner[t.var] = new
        return PiType(new, rename_bound(t.body, vmap, inner, counter))
    raise AssertionError(t)


# ---------------------------------------------------------------------------
# Alpha equivalence


def test_alpha_hand_cases():
    a, b = ident("a"), ident("b")
    assert alpha_equal(Lam(ident("x"), INT, var_x := Var(ident("x"))),
                       Lam(ident("y"), INT, Var(ident("y"))))
    assert not alpha_equal(Lam(ident("x"), INT, var_x),
                           Lam(ident("y"), PROP, Var(ident("y"))))
    # free variables must match by name
    assert not alpha_equal(Var(ident("x")), Var(ident("y")))
    # bound type variables match positionally
    assert alpha_equal(
        PiType(a, Forall(ident("x"), TVar(a), eq(Var(ident("x")), Var(ident("x"))))),
        PiType(b, Forall(ident("y"), TVar(b), eq(Var(ident("y")), Var(ident("y"))))))
    assert not alpha_equal(
        PiType(a, Forall(ident("x"), TVar(a), Top())),
        PiType(b, Forall(ident("x"), INT, Top())))


def test_alpha_shadowing():
    x = ident("x")
    t1 = Lam(x, INT, Lam(x, INT, Var(x)))
    t2 = Lam(ident("u"), INT, Lam(ident("v"), INT, Var(ident("v"))))
    t3 = Lam(ident("u"), INT, Lam(ident("v"), INT, Var(ident("u"))))
    assert alpha_equal(t1, t2)
    assert not alpha_equal(t1, t3)


@settings(max_examples=200, deadline=None)
@given(terms)
def test_alpha_reflexive(t):
    assert alpha_equal(t, t)


@settings(max_examples=200, deadline=None)
@given(terms)
def test_alpha_rename_invariant(t):
    r = rename_bound(t)
    assert db_term(t) == db_term(r)
    assert alpha_equal(t, r)
    assert alpha_equal(r, t)


@settings(max_examples=400, deadline=None)
@given(terms, terms)
def test_alpha_agrees_with_debruijn_oracle(t1, t2):
    assert alpha_equal(t1, t2) == (db_term(t1) == db_term(t2))


# ---------------------------------------------------------------------------
# Substitution


def _times(a, b):
    return app(Var(ident("*")), a, b)


def _plus(a, b):
    return app(Var(ident("+")), a, b)


def test_subst_instantiation_example():
    # p (4*i+1) with i := x*x+x gives p (4*(x*x+x)+1)
    i, x, p = ident("i"), ident("x"), ident("p")
    body = app(Var(p), _plus(_times(IntLit(4), Var(i)), IntLit(1)))
    witness = _plus(_times(Var(x), Var(x)), Var(x))
    got = subst_term(body, i, witness)
    want = app(Var(p), _plus(_times(IntLit(4), witness), IntLit(1)))
    assert alpha_equal(got, want)
    sig = {p: arrow(INT, PROP), x: INT}
    assert typecheck({}, sig, got) == PROP


def test_subst_avoids_capture():
    x, y = ident("x"), ident("y")
    t = Forall(y, INT, eq(Var(x), Var(y)))
    got = subst_term(t, x, Var(y))
    assert isinstance(got, Forall)
    assert got.var != y  # binder was renamed
    assert y in free_vars(got)
    assert alpha_equal(got, Forall(ident("z"), INT, eq(Var(y), Var(ident("z")))))


def test_subst_shadowed_is_noop():
    x = ident("x")
    t = Lam(x, INT, Var(x))
    assert subst_term(t, x, IntLit(7)) == t


@settings(max_examples=200, deadline=None)
@given(terms, st.sampled_from(_names))
def test_subst_nonfree_identity(t, x):
    if x in free_vars(t):
        t = Lam(x, INT, t)  # now x is not free
    assert alpha_equal(subst_term(t, x, IntLit(9)), t)


@settings(max_examples=300, deadline=None)
@given(terms, st.sampled_from(_names))
def test_subst_free_vars_equation(t, x):
    u = Var(ident("fresh_free"))
    got = free_vars(subst_term(t, x, u))
    want = free_vars(t) - {x}
    if x in free_vars(t):
        want = want | {ident("fresh_free")}
    assert got == want


def test_subst_type_in_annotations():
    a, x = ident("a"), ident("x")
    t = Forall(x, TVar(a), eq(Var(x), Var(x)))
    got = subst_type(t, a, INT)
    assert got == Forall(x, INT, eq(Var(x), Var(x)))
    assert a not in free_type_vars(got)


def test_subst_type_respects_pi_shadowing():
    a = ident("a")
    t = PiType(a, Forall(ident("x"), TVar(a), Top()))
    assert subst_type(t, a, INT) == t


def test_type_utilities():
    a, b = ident("a"), ident("b")
    ty = arrow(TVar(a), TApp(ident("set"), (TVar(b),)), TVar(a))
    assert type_vars(ty) == (a, b)
    assert not type_is_ground(ty)
    assert type_is_ground(subst_in_type(ty, {a: INT, b: PROP}))


# ---------------------------------------------------------------------------
# Typing rules


@pytest.mark.parametrize(
    "rule,types,sig,term,expected",
    typing_cases.POSITIVE,
    ids=[f"{c[0]}-{k}" for k, c in enumerate(typing_cases.POSITIVE)])
def test_typing_positive(rule, types, sig, term, expected):
    assert typecheck(types, sig, term) == expected


@pytest.mark.parametrize(
    "rule,types,sig,term",
    typing_cases.NEGATIVE,
    ids=[f"{c[0]}-{k}" for k, c in enumerate(typing_cases.NEGATIVE)])
def test_typing_negative(rule, types, sig, term):
    with pytest.raises(TypingError):
        typecheck(types, sig, term)


def test_typing_case_tables_cover_every_rule():
    pos = {c[0] for c in typing_cases.POSITIVE}
    neg = {c[0] for c in typing_cases.NEGATIVE}
    assert pos == neg == set(typing_cases.RULES)


def test_annotate_records_instances():
    # mem green (add red (add green empty)) instantiates every scheme at color
    color = TApp(ident("color"), ())

    def set_of(ty):
        return TApp(ident("set"), (ty,))

    a = TVar(ident("a"))
    types = {ident("color"): 0, ident("set"): 1}
    sig = {
        ident("red"): color,
        ident("green"): color,
        ident("blue"): color,
        ident("empty"): set_of(a),
        ident("add"): arrow(a, set_of(a), set_of(a)),
        ident("mem"): arrow(a, set_of(a), PROP),
    }
    goal = app(Var(ident("mem")), Var(ident("green")),
               app(Var(ident("add")), Var(ident("red")),
                   app(Var(ident("add")), Var(ident("green")),
                       Var(ident("empty")))))
    info = annotate(types, sig, goal)
    assert info.type == PROP
    # mem, add, add, empty: four scheme occurrences, all at color
    assert len(info.inst) == 4
    assert all(inst == (color,) for inst in info.inst.values())


def test_annotate_defaults_unconstrained_to_int():
    a = TVar(ident("a"))
    sig = {ident("empty"): TApp(ident("set"), (a,))}
    info = annotate({ident("set"): 1}, sig, eq(Var(ident("empty")), Var(ident("empty"))))
    assert info.type == PROP
    for inst in info.inst.values():
        for ty in inst:
            assert type_is_ground(ty)


def test_prenex_quantification_scopes_body():
    a, x = ident("a"), ident("x")
    t = PiType(a, Forall(x, TVar(a), eq(Var(x), Var(x))))
    assert typecheck({}, {}, t) == PROP
    # the same body without the prefix leaves a free type variable
    with pytest.raises(TypingError):
        typecheck({}, {}, Forall(x, TVar(a), eq(Var(x), Var(x))))
