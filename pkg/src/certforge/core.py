"""Object-language syntax and the typing judgment.

Types and terms of a higher-order logic with prenex type quantification.
Type symbols are always fully applied; arrows associate right; binders carry
explicit (variable-free) type annotations. The type quantifier Pi may only
appear in prenex position and only over formulas.

Everything here is immutable and hashable; all operations are pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional


class TypingError(Exception):
    """Raised when a term has no derivation in the typing rules."""


# ---------------------------------------------------------------------------
# Identifiers

@dataclass(frozen=True, slots=True)
class Ident:
    """A named identifier with a numeric disambiguator.

    Two idents are equal iff both name and uid are equal; uid 0 prints
    as the bare name.
    """

    name: str
    uid: int = 0

    def __str__(self) -> str:
        return self.name if self.uid == 0 else f"{self.name}#{self.uid}"


def ident(name: str | Ident) -> Ident:
    if isinstance(name, Ident):
        return name
    if "#" in name:
        base, _, tail = name.rpartition("#")
        if base and tail.isdigit():
            return Ident(base, int(tail))
    return Ident(name)


def fresh_ident(base: str | Ident, avoid: frozenset[Ident] | set[Ident]) -> Ident:
    """First ident not in `avoid`: the base itself, else base#1, base#2, ...

    Deterministic in (base, avoid); takes the avoid set explicitly so there
    is no hidden counter state.
    """
    base = ident(base)
    if base not in avoid:
        return base
    k = 1
    while True:
        cand = Ident(base.name, k)
        if cand not in avoid:
            return cand
        k += 1


# ---------------------------------------------------------------------------
# Types

class Type:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class TVar(Type):
    name: Ident

    def __str__(self) -> str:
        return str(self.name)


@dataclass(frozen=True, slots=True)
class Prop(Type):
    def __str__(self) -> str:
        return "prop"


@dataclass(frozen=True, slots=True)
class Arrow(Type):
    left: Type
    right: Type

    def __str__(self) -> str:
        l = f"({self.left})" if isinstance(self.left, Arrow) else str(self.left)
        return f"{l} ~> {self.right}"


@dataclass(frozen=True, slots=True)
class TApp(Type):
    head: Ident
    args: tuple[Type, ...] = ()

    def __str__(self) -> str:
        if not self.args:
            return f"{self.head}()"
        return f"{self.head}({', '.join(map(str, self.args))})"


PROP = Prop()
INT = TApp(Ident("int"), ())


def arrow(*types: Type) -> Type:
    """Right-fold arrow: arrow(a, b, c) == a ~> (b ~> c)."""
    if not types:
        raise ValueError("arrow needs at least one type")
    out = types[-1]
    for ty in reversed(types[:-1]):
        out = Arrow(ty, out)
    return out


def type_vars(ty: Type) -> tuple[Ident, ...]:
    """Type variables of `ty` in order of first occurrence."""
    out: list[Ident] = []

    def walk(t: Type) -> None:
        if isinstance(t, TVar):
            if t.name not in out:
                out.append(t.name)
        elif isinstance(t, Arrow):
            walk(t.left)
            walk(t.right)
        elif isinstance(t, TApp):
            for a in t.args:
                walk(a)

    walk(ty)
    return tuple(out)


def type_is_ground(ty: Type) -> bool:
    return not type_vars(ty)


def subst_in_type(ty: Type, mapping: Mapping[Ident, Type]) -> Type:
    if isinstance(ty, TVar):
        return mapping.get(ty.name, ty)
    if isinstance(ty, Arrow):
        return Arrow(subst_in_type(ty.left, mapping), subst_in_type(ty.right, mapping))
    if isinstance(ty, TApp):
        return TApp(ty.head, tuple(subst_in_type(a, mapping) for a in ty.args))
    return ty


# ---------------------------------------------------------------------------
# Terms

class Term:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Var(Term):
    name: Ident

    def __str__(self) -> str:
        return str(self.name)


@dataclass(frozen=True, slots=True)
class IntLit(Term):
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True, slots=True)
class Top(Term):
    def __str__(self) -> str:
        return "true"


@dataclass(frozen=True, slots=True)
class Bottom(Term):
    def __str__(self) -> str:
        return "false"


@dataclass(frozen=True, slots=True)
class Not(Term):
    body: Term

    def __str__(self) -> str:
        return f"(not {self.body})"


AND, OR, IMP, IFF = "and", "or", "imp", "iff"
BINOPS = (AND, OR, IMP, IFF)


@dataclass(frozen=True, slots=True)
class BinOp(Term):
    op: str
    left: Term
    right: Term

    def __post_init__(self) -> None:
        if self.op not in BINOPS:
            raise ValueError(f"unknown connective {self.op!r}")

    def __str__(self) -> str:
        return f"({self.op} {self.left} {self.right})"


@dataclass(frozen=True, slots=True)
class App(Term):
    fn: Term
    arg: Term

    def __str__(self) -> str:
        return f"({self.fn} {self.arg})"


@dataclass(frozen=True, slots=True)
class Lam(Term):
    var: Ident
    ty: Type
    body: Term

    def __str__(self) -> str:
        return f"(lam ({self.var} {self.ty}) {self.body})"


@dataclass(frozen=True, slots=True)
class Exists(Term):
    var: Ident
    ty: Type
    body: Term

    def __str__(self) -> str:
        return f"(exists ({self.var} {self.ty}) {self.body})"


@dataclass(frozen=True, slots=True)
class Forall(Term):
    var: Ident
    ty: Type
    body: Term

    def __str__(self) -> str:
        return f"(forall ({self.var} {self.ty}) {self.body})"


@dataclass(frozen=True, slots=True)
class PiType(Term):
    """Prenex quantification over a type variable."""

    var: Ident
    body: Term

    def __str__(self) -> str:
        return f"(pi {self.var} {self.body})"


# Smart constructors used throughout the package and the tests.

def var(name: str | Ident) -> Var:
    return Var(ident(name))


def app(fn: Term, *args: Term) -> Term:
    out = fn
    for a in args:
        out = App(out, a)
    return out


def conj(a: Term, b: Term) -> Term:
    return BinOp(AND, a, b)


def disj(a: Term, b: Term) -> Term:
    return BinOp(OR, a, b)


def imp(*terms: Term) -> Term:
    if not terms:
        raise ValueError("imp needs at least one term")
    out = terms[-1]
    for t in reversed(terms[:-1]):
        out = BinOp(IMP, t, out)
    return out


def iff(a: Term, b: Term) -> Term:
    return BinOp(IFF, a, b)


def eq(a: Term, b: Term) -> Term:
    return app(var("="), a, b)


# ---------------------------------------------------------------------------
# Syntactic audits

def binder_children(t: Term) -> Optional[tuple[Ident, Term]]:
    if isinstance(t, (Lam, Exists, Forall)):
        return t.var, t.body
    if isinstance(t, PiType):
        return t.var, t.body
    return None


def subterms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, Not):
        yield from subterms(t.body)
    elif isinstance(t, BinOp):
        yield from subterms(t.left)
        yield from subterms(t.right)
    elif isinstance(t, App):
        yield from subterms(t.fn)
        yield from subterms(t.arg)
    elif isinstance(t, (Lam, Exists, Forall, PiType)):
        yield from subterms(t.body)


def is_prenex(t: Term) -> bool:
    """Pi nodes may only form a prefix at the root."""
    while isinstance(t, PiType):
        t = t.body
    return all(not isinstance(s, PiType) for s in subterms(t))


def strip_prenex(t: Term) -> tuple[tuple[Ident, ...], Term]:
    alphas: list[Ident] = []
    while isinstance(t, PiType):
        alphas.append(t.var)
        t = t.body
    return tuple(alphas), t


def free_vars(t: Term) -> frozenset[Ident]:
    """Free term variables (interpreted symbols included when they occur)."""
    out: set[Ident] = set()

    def walk(t: Term, bound: frozenset[Ident]) -> None:
        if isinstance(t, Var):
            if t.name not in bound:
                out.add(t.name)
        elif isinstance(t, Not):
            walk(t.body, bound)
        elif isinstance(t, BinOp):
            walk(t.left, bound)
            walk(t.right, bound)
        elif isinstance(t, App):
            walk(t.fn, bound)
            walk(t.arg, bound)
        elif isinstance(t, (Lam, Exists, Forall)):
            walk(t.body, bound | {t.var})
        elif isinstance(t, PiType):
            walk(t.body, bound)

    walk(t, frozenset())
    return frozenset(out)


def free_type_vars(t: Term) -> frozenset[Ident]:
    out: set[Ident] = set()

    def walk(t: Term, bound: frozenset[Ident]) -> None:
        if isinstance(t, (Lam, Exists, Forall)):
            out.update(v for v in type_vars(t.ty) if v not in bound)
            walk(t.body, bound)
        elif isinstance(t, PiType):
            walk(t.body, bound | {t.var})
        elif isinstance(t, Not):
            walk(t.body, bound)
        elif isinstance(t, BinOp):
            walk(t.left, bound)
            walk(t.right, bound)
        elif isinstance(t, App):
            walk(t.fn, bound)
            walk(t.arg, bound)

    walk(t, frozenset())
    return frozenset(out)


def all_idents(t: Term) -> frozenset[Ident]:
    """Every ident occurring anywhere in t, bound or free, term or type level."""
    out: set[Ident] = set()

    def walk_ty(ty: Type) -> None:
        if isinstance(ty, TVar):
            out.add(ty.name)
        elif isinstance(ty, Arrow):
            walk_ty(ty.left)
            walk_ty(ty.right)
        elif isinstance(ty, TApp):
            out.add(ty.head)
            for a in ty.args:
                walk_ty(a)

    for s in subterms(t):
        if isinstance(s, Var):
            out.add(s.name)
        elif isinstance(s, (Lam, Exists, Forall)):
            out.add(s.var)
            walk_ty(s.ty)
        elif isinstance(s, PiType):
            out.add(s.var)
    return frozenset(out)


# ---------------------------------------------------------------------------
# Substitution

def subst_term(t: Term, x: Ident, u: Term) -> Term:
    """Capture-avoiding substitution t[x -> u]."""
    fvu = free_vars(u)

    def walk(t: Term) -> Term:
        if isinstance(t, Var):
            return u if t.name == x else t
        if isinstance(t, (Top, Bottom, IntLit)):
            return t
        if isinstance(t, Not):
            return Not(walk(t.body))
        if isinstance(t, BinOp):
            return BinOp(t.op, walk(t.left), walk(t.right))
        if isinstance(t, App):
            return App(walk(t.fn), walk(t.arg))
        if isinstance(t, (Lam, Exists, Forall)):
            cls = type(t)
            if t.var == x:
                return t  # shadowed, no free x below
            if t.var in fvu and x in free_vars(t.body):
                avoid = fvu | free_vars(t.body) | {x}
                v2 = fresh_ident(t.var, avoid)
                body2 = subst_term(t.body, t.var, Var(v2))
                return cls(v2, t.ty, walk(body2))
            return cls(t.var, t.ty, walk(t.body))
        if isinstance(t, PiType):
            return PiType(t.var, walk(t.body))
        raise TypeError(f"unknown term node {t!r}")

    return walk(t)


def subst_type(t: Term, alpha: Ident, tau: Type) -> Term:
    """Type substitution t[alpha -> tau] over annotations and type applications."""
    mapping = {alpha: tau}

    def walk(t: Term) -> Term:
        if isinstance(t, (Var, Top, Bottom, IntLit)):
            return t
        if isinstance(t, Not):
            return Not(walk(t.body))
        if isinstance(t, BinOp):
            return BinOp(t.op, walk(t.left), walk(t.right))
        if isinstance(t, App):
            return App(walk(t.fn), walk(t.arg))
        if isinstance(t, (Lam, Exists, Forall)):
            return type(t)(t.var, subst_in_type(t.ty, mapping), walk(t.body))
        if isinstance(t, PiType):
            if t.var == alpha:
                return t  # shadowed
            return PiType(t.var, walk(t.body))
        raise TypeError(f"unknown term node {t!r}")

    return walk(t)


# ---------------------------------------------------------------------------
# Alpha-equivalence

def _type_alpha(a: Type, b: Type, env_a: dict[Ident, int], env_b: dict[Ident, int]) -> bool:
    if isinstance(a, TVar) and isinstance(b, TVar):
        la, lb = env_a.get(a.name), env_b.get(b.name)
        if la is None and lb is None:
            return a.name == b.name
        return la is not None and la == lb
    if isinstance(a, Prop) and isinstance(b, Prop):
        return True
    if isinstance(a, Arrow) and isinstance(b, Arrow):
        return _type_alpha(a.left, b.left, env_a, env_b) and _type_alpha(a.right, b.right, env_a, env_b)
    if isinstance(a, TApp) and isinstance(b, TApp):
        return (
            a.head == b.head
            and len(a.args) == len(b.args)
            and all(_type_alpha(x, y, env_a, env_b) for x, y in zip(a.args, b.args))
        )
    return False


def alpha_equal(t1: Term, t2: Term) -> bool:
    """Equality up to renaming of bound term and type variables."""

    def walk(a: Term, b: Term, va: dict[Ident, int], vb: dict[Ident, int],
             ta: dict[Ident, int], tb: dict[Ident, int], depth: int) -> bool:
        if type(a) is not type(b):
            return False
        if isinstance(a, Var):
            la, lb = va.get(a.name), vb.get(b.name)
            if la is None and lb is None:
                return a.name == b.name
            return la is not None and la == lb
        if isinstance(a, IntLit):
            return a.value == b.value
        if isinstance(a, (Top, Bottom)):
            return True
        if isinstance(a, Not):
            return walk(a.body, b.body, va, vb, ta, tb, depth)
        if isinstance(a, BinOp):
            return a.op == b.op and walk(a.left, b.left, va, vb, ta, tb, depth) \
                and walk(a.right, b.right, va, vb, ta, tb, depth)
        if isinstance(a, App):
            return walk(a.fn, b.fn, va, vb, ta, tb, depth) \
                and walk(a.arg, b.arg, va, vb, ta, tb, depth)
        if isinstance(a, (Lam, Exists, Forall)):
            if not _type_alpha(a.ty, b.ty, ta, tb):
                return False
            va2 = dict(va); va2[a.var] = depth
            vb2 = dict(vb); vb2[b.var] = depth
            return walk(a.body, b.body, va2, vb2, ta, tb, depth + 1)
        if isinstance(a, PiType):
            ta2 = dict(ta); ta2[a.var] = depth
            tb2 = dict(tb); tb2[b.var] = depth
            return walk(a.body, b.body, va, vb, ta2, tb2, depth + 1)
        raise TypeError(f"unknown term node {a!r}")

    return walk(t1, t2, {}, {}, {}, {}, 0)


# ---------------------------------------------------------------------------
# Typing

# Signatures are mappings; entry types may contain type variables and are read
# as quantified over all of them (instance typing at each occurrence).
TypeSignature = Mapping[Ident, int]
Signature = Mapping[Ident, Type]


@dataclass(frozen=True, slots=True)
class _Meta(Type):
    """Inference-internal metavariable; never escapes this module."""

    id: int


@dataclass
class Typing:
    """Result of annotate(): the derived type plus per-occurrence instances.

    inst maps the path of each Var node (tuple of child indices from the
    root, after the prenex prefix was stripped) to the instance types chosen
    for the type variables of its signature scheme, in scheme order.
    node_types maps every node path to its resolved type.
    """

    type: Type
    inst: dict[tuple[int, ...], tuple[Type, ...]] = field(default_factory=dict)
    node_types: dict[tuple[int, ...], Type] = field(default_factory=dict)


class _Unifier:
    def __init__(self) -> None:
        self.next_id = 0
        self.bind: dict[int, Type] = {}

    def fresh(self) -> _Meta:
        self.next_id += 1
        return _Meta(self.next_id)

    def resolve(self, ty: Type) -> Type:
        while isinstance(ty, _Meta) and ty.id in self.bind:
            ty = self.bind[ty.id]
        if isinstance(ty, Arrow):
            return Arrow(self.resolve(ty.left), self.resolve(ty.right))
        if isinstance(ty, TApp):
            return TApp(ty.head, tuple(self.resolve(a) for a in ty.args))
        return ty

    def _occurs(self, m: _Meta, ty: Type) -> bool:
        ty = self.resolve(ty)
        if isinstance(ty, _Meta):
            return ty.id == m.id
        if isinstance(ty, Arrow):
            return self._occurs(m, ty.left) or self._occurs(m, ty.right)
        if isinstance(ty, TApp):
            return any(self._occurs(m, a) for a in ty.args)
        return False

    def unify(self, a: Type, b: Type, where: str) -> None:
        a, b = self.resolve(a), self.resolve(b)
        if isinstance(a, _Meta) and isinstance(b, _Meta) and a.id == b.id:
            return
        if isinstance(a, _Meta):
            if self._occurs(a, b):
                raise TypingError(f"occurs check failed in {where}")
            self.bind[a.id] = b
            return
        if isinstance(b, _Meta):
            self.unify(b, a, where)
            return
        if isinstance(a, Prop) and isinstance(b, Prop):
            return
        if isinstance(a, TVar) and isinstance(b, TVar) and a.name == b.name:
            return
        if isinstance(a, Arrow) and isinstance(b, Arrow):
            self.unify(a.left, b.left, where)
            self.unify(a.right, b.right, where)
            return
        if isinstance(a, TApp) and isinstance(b, TApp) and a.head == b.head \
                and len(a.args) == len(b.args):
            for x, y in zip(a.args, b.args):
                self.unify(x, y, where)
            return
        raise TypingError(f"cannot unify {a} with {b} in {where}")

    def default_ground(self, ty: Type) -> Type:
        """Replace unconstrained metas by int(); see the defaulting note in annotate."""
        ty = self.resolve(ty)
        if isinstance(ty, _Meta):
            self.bind[ty.id] = INT
            return INT
        if isinstance(ty, Arrow):
            return Arrow(self.default_ground(ty.left), self.default_ground(ty.right))
        if isinstance(ty, TApp):
            return TApp(ty.head, tuple(self.default_ground(a) for a in ty.args))
        return ty


def check_type(I: TypeSignature, ty: Type, *, allow_vars: bool) -> None:
    """Well-formedness of a type against the type signature.

    Type symbols must be declared (int is interpreted) and fully applied at
    their declared arity; with allow_vars=False the type must be ground.
    """
    from . import theories

    if isinstance(ty, TVar):
        if not allow_vars:
            raise TypingError(f"type variable {ty.name} not allowed here")
        return
    if isinstance(ty, Prop):
        return
    if isinstance(ty, Arrow):
        check_type(I, ty.left, allow_vars=allow_vars)
        check_type(I, ty.right, allow_vars=allow_vars)
        return
    if isinstance(ty, TApp):
        arity = theories.INTERPRETED.type_symbols.get(ty.head)
        if arity is None:
            arity = I.get(ty.head)
        if arity is None:
            raise TypingError(f"undeclared type symbol {ty.head}")
        if arity != len(ty.args):
            raise TypingError(
                f"type symbol {ty.head} has arity {arity}, applied to {len(ty.args)}")
        for a in ty.args:
            check_type(I, a, allow_vars=allow_vars)
        return
    raise TypingError(f"malformed type {ty!r}")


def annotate(I: TypeSignature, sig: Signature, t: Term,
             expected: Type | None = None) -> Typing:
    """Typecheck t and record the instance choices made at each occurrence.

    Implements the typing rules: a prenex Pi prefix is replaced by fresh
    arity-0 type symbols and the body must be prop; a variable's type is a
    ground instance of its scheme; binder annotations are variable-free and
    may not shadow the signature. Instances an occurrence leaves
    unconstrained are defaulted to int(), which always yields a valid
    ground derivation and keeps results deterministic.

    With `expected` given, the result must unify with it, so instance
    choices are made against the required type instead of the default.
    """
    from . import theories

    if not is_prenex(t):
        raise TypingError("type quantifier occurs under another constructor")

    alphas, body = strip_prenex(t)
    I2 = dict(I)
    if alphas:
        if len(set(alphas)) != len(alphas):
            raise TypingError("duplicate type variable in prenex prefix")
        taken = set(I2) | set(theories.INTERPRETED.type_symbols) | all_idents(body) | set(alphas)
        for a in alphas:
            iota = fresh_ident(a, frozenset(taken))
            taken.add(iota)
            I2[iota] = 0
            body = subst_type(body, a, TApp(iota, ()))

    uni = _Unifier()
    info = Typing(type=PROP)

    def infer(t: Term, sig: dict[Ident, Type], path: tuple[int, ...]) -> Type:
        if isinstance(t, Var):
            scheme = sig.get(t.name)
            if scheme is None:
                entry = theories.lookup_interpreted(str(t.name))
                if entry is None:
                    raise TypingError(f"unbound variable {t.name}")
                scheme = entry.type
            tvs = type_vars(scheme)
            metas = {v: uni.fresh() for v in tvs}
            if tvs:
                info.inst[path] = tuple(metas[v] for v in tvs)  # resolved later
            ty = subst_in_type(scheme, metas)
            info.node_types[path] = ty
            return ty
        if isinstance(t, IntLit):
            info.node_types[path] = INT
            return INT
        if isinstance(t, (Top, Bottom)):
            info.node_types[path] = PROP
            return PROP
        if isinstance(t, Not):
            uni.unify(infer(t.body, sig, path + (0,)), PROP, "negation")
            info.node_types[path] = PROP
            return PROP
        if isinstance(t, BinOp):
            uni.unify(infer(t.left, sig, path + (0,)), PROP, f"{t.op} left")
            uni.unify(infer(t.right, sig, path + (1,)), PROP, f"{t.op} right")
            info.node_types[path] = PROP
            return PROP
        if isinstance(t, App):
            tf = infer(t.fn, sig, path + (0,))
            ta = infer(t.arg, sig, path + (1,))
            res = uni.fresh()
            uni.unify(tf, Arrow(ta, res), "application")
            info.node_types[path] = res
            return res
        if isinstance(t, (Lam, Exists, Forall)):
            check_type(I2, t.ty, allow_vars=False)
            if t.var in sig or theories.lookup_interpreted(str(t.var)) is not None:
                raise TypingError(f"binder {t.var} shadows a declared symbol")
            inner = dict(sig)
            inner[t.var] = t.ty
            tb = infer(t.body, inner, path + (0,))
            if isinstance(t, Lam):
                ty = Arrow(t.ty, tb)
            else:
                uni.unify(tb, PROP, "quantifier body")
                ty = PROP
            info.node_types[path] = ty
            return ty
        if isinstance(t, PiType):
            raise TypingError("type quantifier occurs under another constructor")
        raise TypeError(f"unknown term node {t!r}")

    for name, scheme in sig.items():
        check_type(I2, scheme, allow_vars=True)
    top = infer(body, dict(sig), ())
    if alphas:
        uni.unify(top, PROP, "type quantifier body")
    if expected is not None:
        uni.unify(top, expected, "required type")

    result = uni.default_ground(top)
    info.type = result
    info.inst = {p: tuple(uni.default_ground(m) for m in ms) for p, ms in info.inst.items()}
    info.node_types = {p: uni.default_ground(ty) for p, ty in info.node_types.items()}
    return info


def typecheck(I: TypeSignature, sig: Signature, t: Term) -> Type:
    """The type of t under (I, sig), or TypingError if none derivable."""
    return annotate(I, sig, t).type


def typecheck_against(I: TypeSignature, sig: Signature, t: Term,
                      expected: Type) -> Type:
    """Typecheck t requiring the result to be an instance of `expected`."""
    return annotate(I, sig, t, expected=expected).type
