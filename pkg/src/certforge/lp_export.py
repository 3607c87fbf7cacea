"""Shallow λΠ embedding of tasks and kernel certificates.

Propositions become types through the usual impredicative encodings
(conjunction, disjunction, falsity as their elimination schemes), a task
becomes the type stating that its premises entail absurdity, and a checked
certificate becomes a lambda term built from a fixed set of combinators that
live in a hand-written preamble. emit_module() renders one application
T -> L as a single deterministic text file:

    symbol task1 : TYPE = (each resulting task, encoded)
    symbol initial : TYPE = (the initial task, encoded)
    symbol proof : task1 -> ... -> taskN -> initial = (the certificate)

Nothing here typechecks λΠ terms; emitted text is kept honest by structural
golden tests, a free-name audit before emission, and optionally an external
checker (see tests). The preamble's trust surface is three axioms: excluded
middle, totality of <= versus > on int, and bounded course-of-values
induction; every other combinator is a definition.
"""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass

from . import cert, checker
from .core import (
    INT,
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
    Prop,
    TApp,
    TVar,
    Term,
    Top,
    Type,
    Var,
    all_idents,
    annotate,
    fresh_ident,
    free_vars,
    strip_prenex,
    subst_type,
    type_vars,
    typecheck,
)
from .task import Task
from .theories import lookup_interpreted


class ExportError(Exception):
    """Emission failed an internal consistency check (scope audit)."""


# ---------------------------------------------------------------------------
# λΠ terms

class LpTerm:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class LSort(LpTerm):
    """The sort of propositions-as-types, printed TYPE."""


@dataclass(frozen=True, slots=True)
class LProd(LpTerm):
    var: str
    dom: LpTerm
    body: LpTerm


@dataclass(frozen=True, slots=True)
class LArrow(LpTerm):
    left: LpTerm
    right: LpTerm


@dataclass(frozen=True, slots=True)
class LLam(LpTerm):
    var: str
    ann: LpTerm | None
    body: LpTerm


@dataclass(frozen=True, slots=True)
class LApp(LpTerm):
    fn: LpTerm
    arg: LpTerm


@dataclass(frozen=True, slots=True)
class LConst(LpTerm):
    name: str


@dataclass(frozen=True, slots=True)
class LVar(LpTerm):
    name: str


SORT = LSort()
# falsity and truth, spelled out exactly as the encoding table produces them
LP_BOT = LProd("C", SORT, LVar("C"))
LP_TOP = LArrow(LP_BOT, LP_BOT)


def lapp(fn: LpTerm, *args: LpTerm) -> LpTerm:
    for a in args:
        fn = LApp(fn, a)
    return fn


def arrows(*ts: LpTerm) -> LpTerm:
    out = ts[-1]
    for t in reversed(ts[:-1]):
        out = LArrow(t, out)
    return out


def neg(t: LpTerm) -> LpTerm:
    return LArrow(t, LP_BOT)


# printing precedence: 0 admits everything, 1 an arrow operand (arrows and
# binders get parentheses), 2 an application head, 3 an application argument
def lp_format(t: LpTerm, prec: int = 0) -> str:
    if isinstance(t, LSort):
        return "TYPE"
    if isinstance(t, (LConst, LVar)):
        return t.name
    if isinstance(t, LProd):
        s = f"Π {t.var} : {lp_format(t.dom, 1)}, {lp_format(t.body)}"
        return f"({s})" if prec > 0 else s
    if isinstance(t, LLam):
        if t.ann is None:
            s = f"λ {t.var}, {lp_format(t.body)}"
        else:
            s = f"λ {t.var} : {lp_format(t.ann, 1)}, {lp_format(t.body)}"
        return f"({s})" if prec > 0 else s
    if isinstance(t, LArrow):
        s = f"{lp_format(t.left, 1)} → {lp_format(t.right)}"
        return f"({s})" if prec > 0 else s
    if isinstance(t, LApp):
        s = f"{lp_format(t.fn, 2)} {lp_format(t.arg, 3)}"
        return f"({s})" if prec > 2 else s
    raise TypeError(f"unknown λΠ node {t!r}")


def lp_atoms(t: LpTerm) -> frozenset[str]:
    """Names occurring free, constants and variables alike."""
    out: set[str] = set()

    def walk(t: LpTerm, bound: frozenset[str]) -> None:
        if isinstance(t, (LConst, LVar)):
            if t.name not in bound:
                out.add(t.name)
        elif isinstance(t, LProd):
            walk(t.dom, bound)
            walk(t.body, bound | {t.var})
        elif isinstance(t, LLam):
            if t.ann is not None:
                walk(t.ann, bound)
            walk(t.body, bound | {t.var})
        elif isinstance(t, LArrow):
            walk(t.left, bound)
            walk(t.right, bound)
        elif isinstance(t, LApp):
            walk(t.fn, bound)
            walk(t.arg, bound)

    walk(t, frozenset())
    return frozenset(out)


def lp_alpha_equal(a: LpTerm, b: LpTerm) -> bool:
    def eq(a: LpTerm, b: LpTerm, ma: dict[str, int], mb: dict[str, int],
           depth: int) -> bool:
        if isinstance(a, LSort) and isinstance(b, LSort):
            return True
        if isinstance(a, (LConst, LVar)) and isinstance(b, (LConst, LVar)):
            da, db = ma.get(a.name), mb.get(b.name)
            if da is None and db is None:
                return a.name == b.name
            return da == db
        if isinstance(a, LProd) and isinstance(b, LProd):
            return eq(a.dom, b.dom, ma, mb, depth) and eq(
                a.body, b.body, {**ma, a.var: depth}, {**mb, b.var: depth},
                depth + 1)
        if isinstance(a, LLam) and isinstance(b, LLam):
            if (a.ann is None) != (b.ann is None):
                return False
            if a.ann is not None and not eq(a.ann, b.ann, ma, mb, depth):
                return False
            return eq(a.body, b.body, {**ma, a.var: depth},
                      {**mb, b.var: depth}, depth + 1)
        if isinstance(a, LArrow) and isinstance(b, LArrow):
            return eq(a.left, b.left, ma, mb, depth) and eq(
                a.right, b.right, ma, mb, depth)
        if isinstance(a, LApp) and isinstance(b, LApp):
            return eq(a.fn, b.fn, ma, mb, depth) and eq(
                a.arg, b.arg, ma, mb, depth)
        return False

    return eq(a, b, {}, {}, 0)


# ---------------------------------------------------------------------------
# parsing (round-trip tests and the preamble self-check)

@dataclass(frozen=True, slots=True)
class LpRequire:
    path: str


@dataclass(frozen=True, slots=True)
class LpSymbol:
    name: str
    ty: LpTerm | None
    body: LpTerm | None


@dataclass(frozen=True, slots=True)
class LpRule:
    lhs: LpTerm
    rhs: LpTerm


_TOKEN = re.compile(r"//[^\n]*|\$?[A-Za-z_][A-Za-z0-9_]*|[(),:;]|[Πλ→↪≔.]|\s+")


def _tokenize(text: str) -> list[str]:
    toks: list[str] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ValueError(f"stray character {text[pos]!r} at offset {pos}")
        pos = m.end()
        tok = m.group()
        if tok.strip() and not tok.startswith("//"):
            toks.append(tok)
    return toks


class _Parser:
    def __init__(self, toks: list[str]):
        self.toks = toks
        self.i = 0

    def peek(self) -> str | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self) -> str:
        tok = self.peek()
        if tok is None:
            raise ValueError("unexpected end of input")
        self.i += 1
        return tok

    def expect(self, tok: str) -> None:
        got = self.next()
        if got != tok:
            raise ValueError(f"expected {tok!r}, got {got!r}")

    def term(self, bound: frozenset[str]) -> LpTerm:
        tok = self.peek()
        if tok == "Π":
            self.next()
            var = self.next()
            self.expect(":")
            dom = self.arrow(bound)
            self.expect(",")
            return LProd(var, dom, self.term(bound | {var}))
        if tok == "λ":
            self.next()
            var = self.next()
            ann = None
            if self.peek() == ":":
                self.next()
                ann = self.arrow(bound)
            self.expect(",")
            return LLam(var, ann, self.term(bound | {var}))
        return self.arrow(bound)

    def arrow(self, bound: frozenset[str]) -> LpTerm:
        left = self.app(bound)
        if self.peek() == "→":
            self.next()
            return LArrow(left, self.term(bound))
        return left

    def app(self, bound: frozenset[str]) -> LpTerm:
        t = self.atom(bound)
        while True:
            tok = self.peek()
            if tok is None or tok in (")", ",", ";", "→", "↪", "≔", ":"):
                return t
            t = LApp(t, self.atom(bound))

    def atom(self, bound: frozenset[str]) -> LpTerm:
        tok = self.next()
        if tok == "(":
            t = self.term(bound)
            self.expect(")")
            return t
        if tok == "TYPE":
            return SORT
        if not re.fullmatch(r"\$?[A-Za-z_][A-Za-z0-9_]*", tok):
            raise ValueError(f"unexpected token {tok!r}")
        if tok in bound or tok.startswith("$"):
            return LVar(tok)
        return LConst(tok)


def parse_lp_term(text: str) -> LpTerm:
    p = _Parser(_tokenize(text))
    t = p.term(frozenset())
    if p.peek() is not None:
        raise ValueError(f"trailing tokens at {p.peek()!r}")
    return t


def parse_lp(text: str) -> list[LpRequire | LpSymbol | LpRule]:
    """Parse a module: require lines, symbol declarations, rewrite rules."""
    p = _Parser(_tokenize(text))
    out: list[LpRequire | LpSymbol | LpRule] = []
    while p.peek() is not None:
        tok = p.next()
        if tok == "require":
            p.expect("open")
            parts = [p.next()]
            while p.peek() == ".":
                p.next()
                parts.append(p.next())
            p.expect(";")
            out.append(LpRequire(".".join(parts)))
        elif tok == "symbol":
            name = p.next()
            ty = body = None
            if p.peek() == ":":
                p.next()
                ty = p.term(frozenset())
            if p.peek() == "≔":
                p.next()
                body = p.term(frozenset())
            p.expect(";")
            out.append(LpSymbol(name, ty, body))
        elif tok == "rule":
            lhs = p.term(frozenset())
            p.expect("↪")
            rhs = p.term(frozenset())
            p.expect(";")
            out.append(LpRule(lhs, rhs))
        else:
            raise ValueError(f"unexpected declaration {tok!r}")
    return out


# ---------------------------------------------------------------------------
# name mangling

_LP_KEYWORDS = frozenset({
    "TYPE", "symbol", "rule", "require", "open", "assert", "begin", "end",
    "in", "let", "type", "with", "builtin", "constant", "injective",
    "opaque", "private", "protected", "sequential",
})

# binder names the encoders and the module skeleton hand out themselves
_EMITTER_NAMES = frozenset({"C", "Q", "initial", "proof"})


def _is_reserved_lp(name: str) -> bool:
    return (name in _LP_KEYWORDS or name in _EMITTER_NAMES
            or name in PREAMBLE_NAMES
            or re.fullmatch(r"(s|task)[0-9]+", name) is not None)


def mangle(name: Ident) -> str:
    """Emitter-safe rendering of an object-language identifier.

    Injective: non-alphanumerics (and a leading digit) become _hh hex
    escapes, a nonzero uid becomes a _u<digits> suffix, and collisions with
    reserved emitter names get a uniform u_ prefix.
    """
    out = []
    for k, ch in enumerate(name.name):
        if (ch.isascii() and ch.isalnum()) and not (k == 0 and ch.isdigit()):
            out.append(ch)
        else:
            out.append("_%02x" % ord(ch))
    base = "".join(out) or "_5f"
    if name.uid:
        base += f"_u{name.uid}"
    if _is_reserved_lp(base) or base.startswith("u_"):
        base = "u_" + base
    return base


def _freshen(base: str, avoid: frozenset[str]) -> str:
    # mangle never produces a _v suffix, so this cannot collide with it
    name, k = base, 0
    while name in avoid:
        k += 1
        name = f"{base}_v{k}"
    return name


# ---------------------------------------------------------------------------
# encoding terms and types

_INTERP_CONST = {"+": "add", "*": "mul", "-": "sub",
                 "<": "lt", ">": "gt", "<=": "le", ">=": "ge"}


def _pos_term(n: int) -> LpTerm:
    if n == 1:
        return LConst("xH")
    half = _pos_term(n // 2)
    return LApp(LConst("xI" if n % 2 else "xO"), half)


def _int_term(n: int) -> LpTerm:
    if n == 0:
        return LConst("Z0")
    if n > 0:
        return LApp(LConst("Zpos"), _pos_term(n))
    return LApp(LConst("Zneg"), _pos_term(-n))


def _encode_type(ty: Type, tvs: dict[Ident, str] | None = None) -> LpTerm:
    if isinstance(ty, Prop):
        return SORT
    if isinstance(ty, Arrow):
        return LArrow(_encode_type(ty.left, tvs), _encode_type(ty.right, tvs))
    if isinstance(ty, TVar):
        if tvs is None or ty.name not in tvs:
            raise ExportError(f"stray type variable {ty.name}")
        return LVar(tvs[ty.name])
    if isinstance(ty, TApp):
        if ty == INT:
            return LConst("int")
        head: LpTerm = LVar(mangle(ty.head))
        return lapp(head, *(_encode_type(a, tvs) for a in ty.args))
    raise ExportError(f"unencodable type {ty!r}")


def _type_heads(ty: Type, out: set[Ident]) -> None:
    if isinstance(ty, Arrow):
        _type_heads(ty.left, out)
        _type_heads(ty.right, out)
    elif isinstance(ty, TApp):
        if ty != INT:
            out.add(ty.head)
        for a in ty.args:
            _type_heads(a, out)


def _encode_scheme(scheme: Type) -> LpTerm:
    """A signature entry: type variables become leading Π binders."""
    tvs = type_vars(scheme)
    heads: set[Ident] = set()
    _type_heads(scheme, heads)
    avoid = frozenset(mangle(h) for h in heads) | {"int"}
    names: dict[Ident, str] = {}
    for a in tvs:
        names[a] = _freshen(mangle(a), avoid | frozenset(names.values()))
    body = _encode_type(scheme, names)
    for a in reversed(tvs):
        body = LProd(names[a], SORT, body)
    return body


def _type_power(arity: int) -> LpTerm:
    out: LpTerm = SORT
    for _ in range(arity):
        out = LArrow(SORT, out)
    return out


def _bind_c(avoid_under: tuple[LpTerm, ...]) -> str:
    free = frozenset().union(*(lp_atoms(t) for t in avoid_under))
    return _freshen("C", free)


def _encode(t: Term, path: tuple[int, ...], info, sig: dict[Ident, Type]) -> LpTerm:
    if isinstance(t, Var):
        if t.name not in sig and lookup_interpreted(str(t.name)) is not None:
            if str(t.name) == "=":
                tau = info.inst[path][0]
                return LApp(LConst("eq"), _encode_type(tau))
            return LConst(_INTERP_CONST[str(t.name)])
        head: LpTerm = LVar(mangle(t.name))
        for tau in info.inst.get(path, ()):
            head = LApp(head, _encode_type(tau))
        return head
    if isinstance(t, IntLit):
        return _int_term(t.value)
    if isinstance(t, Bottom):
        return LP_BOT
    if isinstance(t, Top):
        return LP_TOP
    if isinstance(t, Not):
        return neg(_encode(t.body, path + (0,), info, sig))
    if isinstance(t, BinOp):
        l = _encode(t.left, path + (0,), info, sig)
        r = _encode(t.right, path + (1,), info, sig)
        if t.op == "imp":
            return LArrow(l, r)
        c = _bind_c((l, r))
        if t.op == "and":
            return LProd(c, SORT, LArrow(arrows(l, r, LVar(c)), LVar(c)))
        if t.op == "or":
            return LProd(c, SORT, arrows(
                LArrow(l, LVar(c)), LArrow(r, LVar(c)), LVar(c)))
        if t.op == "iff":
            return LProd(c, SORT, LArrow(
                arrows(LArrow(l, r), LArrow(r, l), LVar(c)), LVar(c)))
        raise ExportError(f"unknown connective {t.op}")
    if isinstance(t, App):
        return LApp(_encode(t.fn, path + (0,), info, sig),
                    _encode(t.arg, path + (1,), info, sig))
    if isinstance(t, Forall):
        body = _encode(t.body, path + (0,), info, sig)
        return LProd(mangle(t.var), _encode_type(t.ty), body)
    if isinstance(t, Exists):
        body = _encode(t.body, path + (0,), info, sig)
        x = mangle(t.var)
        c = _bind_c((body, _encode_type(t.ty)))
        return LProd(c, SORT, LArrow(
            LProd(x, _encode_type(t.ty), LArrow(body, LVar(c))), LVar(c)))
    if isinstance(t, Lam):
        body = _encode(t.body, path + (0,), info, sig)
        return LLam(mangle(t.var), _encode_type(t.ty), body)
    if isinstance(t, PiType):
        raise ExportError("type quantifier below the prenex prefix")
    raise ExportError(f"unencodable term {t!r}")


def encode_term(t: Term, I: dict[Ident, int] | None = None,
                sig: dict[Ident, Type] | None = None) -> LpTerm:
    """The impredicative encoding of a well-typed term.

    I and sig supply the typing environment; they default to empty. The
    prenex type quantifiers become Π binders over TYPE, mirroring the
    renaming the typechecker performs so recorded instances line up.
    """
    I = dict(I or {})
    sig = dict(sig or {})
    alphas, body = strip_prenex(t)
    iotas: list[Ident] = []
    if alphas:
        # keep in lockstep with annotate(): same pool, same fresh_ident
        from . import theories
        taken = set(I) | set(theories.INTERPRETED.type_symbols) \
            | all_idents(body) | set(alphas)
        for a in alphas:
            iota = fresh_ident(a, frozenset(taken))
            taken.add(iota)
            I[iota] = 0
            iotas.append(iota)
            body = subst_type(body, a, TApp(iota, ()))
    info = annotate(I, sig, body)
    out = _encode(body, (), info, sig)
    for iota in reversed(iotas):
        out = LProd(mangle(iota), SORT, out)
    return out


# ---------------------------------------------------------------------------
# encoding tasks

def _support(T: Task) -> tuple[tuple[tuple[Ident, int], ...],
                               tuple[tuple[Ident, Type], ...]]:
    """Declarations some premise actually touches, in declaration order."""
    used: set[Ident] = set()
    for p in T.premises():
        used |= free_vars(p.formula)
    ssyms = tuple(e for e in T.sig if e[0] in used)
    heads: set[Ident] = set()
    for _, scheme in ssyms:
        _type_heads(scheme, heads)
    for p in T.premises():
        for ann in _binder_annotations(p.formula):
            _type_heads(ann, heads)
    tsyms = tuple(e for e in T.types if e[0] in heads)
    return tsyms, ssyms


def _binder_annotations(t: Term) -> list[Type]:
    out: list[Type] = []

    def walk(t: Term) -> None:
        if isinstance(t, (Lam, Exists, Forall)):
            out.append(t.ty)
            walk(t.body)
        elif isinstance(t, Not):
            walk(t.body)
        elif isinstance(t, BinOp):
            walk(t.left)
            walk(t.right)
        elif isinstance(t, App):
            walk(t.fn)
            walk(t.arg)
        elif isinstance(t, PiType):
            walk(t.body)

    walk(t)
    return out


def encode_task(T: Task, *, prune: bool = False) -> LpTerm:
    """A task as the type: symbols imply premises imply absurdity.

    With prune=True only declarations mentioned by some premise are
    quantified; hole tasks are encoded that way so their statements stay
    minimal, while an initial task keeps its full declaration list (a
    certificate may introduce formulas over symbols no premise mentions).
    """
    I, sig = T.types_map(), T.sig_map()
    tsyms, ssyms = _support(T) if prune else (T.types, T.sig)
    out = LP_BOT
    for g in reversed(T.goals):
        out = LArrow(neg(encode_term(g.formula, I, sig)), out)
    for h in reversed(T.hyps):
        out = LArrow(encode_term(h.formula, I, sig), out)
    for name, scheme in reversed(ssyms):
        out = LProd(mangle(name), _encode_scheme(scheme), out)
    for name, arity in reversed(tsyms):
        out = LProd(mangle(name), _type_power(arity), out)
    return out


def app_correctness_type(T: Task, L: list[Task]) -> LpTerm:
    """The statement that the resulting tasks entail the initial one."""
    out = encode_task(T)
    for leaf in reversed(L):
        out = LArrow(encode_task(leaf, prune=True), out)
    return out


# ---------------------------------------------------------------------------
# proof terms

def _hole_application(index: int, task: Task,
                      scope: dict[Ident, LpTerm]) -> LpTerm:
    tsyms, ssyms = _support(task)
    args: list[LpTerm] = [LVar(mangle(n)) for n, _ in tsyms]
    args += [LVar(mangle(n)) for n, _ in ssyms]
    args += [scope[p.name] for p in task.premises()]
    return lapp(LVar(f"s{index}"), *args)


def proof_term(c: cert.KernelCert, T: Task, L: list[Task]) -> LpTerm:
    """The certificate as a λ-term of type app_correctness_type(T, L).

    Hole identifiers come first, then the initial task's type symbols,
    function symbols and premise names; each rule application becomes its
    preamble combinator applied to the formulas the node records, and a
    hole becomes its identifier applied to the symbols and premises of its
    task in declaration order.
    """
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 40000))
    counter = [0]

    def enc(f: Term, task: Task) -> LpTerm:
        return encode_term(f, task.types_map(), task.sig_map())

    def walk(node: cert.KernelCert, task: Task, path: tuple[int, ...],
             scope: dict[Ident, LpTerm]) -> LpTerm:
        if isinstance(node, cert.KHole):
            counter[0] += 1
            return _hole_application(counter[0], task, scope)

        children = checker.step(task, node, path)

        def sub(k: int, child_node: cert.KernelCert,
                scope2: dict[Ident, LpTerm]) -> LpTerm:
            return walk(child_node, children[k], path + (k,), scope2)

        def rebind(*names: Ident, drop: tuple[Ident, ...] = ()) -> dict[Ident, LpTerm]:
            out = dict(scope)
            for n in drop:
                out.pop(n, None)
            for n in names:
                out[n] = LVar(mangle(n))
            return out

        if isinstance(node, cert.KTrivial):
            if node.goal:
                return LApp(LConst("triv"), scope[node.name])
            return scope[node.name]

        if isinstance(node, cert.KAxiom):
            return lapp(LConst("axm"), enc(node.formula, task),
                        scope[node.hyp], scope[node.goal])

        if isinstance(node, cert.KEqRefl):
            tau = typecheck(task.types_map(), task.sig_map(), node.term)
            witness = lapp(LConst("eq_refl"), _encode_type(tau),
                           enc(node.term, task))
            return LApp(scope[node.name], witness)

        if isinstance(node, cert.KAssert):
            n = mangle(node.name)
            return lapp(LConst("cut"), enc(node.formula, task),
                        LLam(n, None, sub(0, node.proof, rebind(node.name))),
                        LLam(n, None, sub(1, node.rest, rebind(node.name))))

        if isinstance(node, cert.KSplit):
            n = mangle(node.name)
            comb = "split_goal" if node.goal else "split"
            return lapp(LConst(comb), enc(node.left, task),
                        enc(node.right, task),
                        LLam(n, None, sub(0, node.first, rebind(node.name))),
                        LLam(n, None, sub(1, node.second, rebind(node.name))),
                        scope[node.name])

        if isinstance(node, cert.KDestruct):
            comb = "destruct_goal" if node.goal else "destruct"
            scope2 = rebind(node.left_name, node.right_name,
                            drop=(node.name,))
            cont = LLam(mangle(node.left_name), None,
                        LLam(mangle(node.right_name), None,
                             sub(0, node.rest, scope2)))
            return lapp(LConst(comb), enc(node.left, task),
                        enc(node.right, task), cont, scope[node.name])

        if isinstance(node, cert.KClear):
            return sub(0, node.rest, rebind(drop=(node.name,)))

        if isinstance(node, cert.KSwapNeg):
            if not node.goal:
                # a negated hypothesis and the goal it becomes share the
                # encoding, so the premise variable carries over unchanged
                return sub(0, node.rest, dict(scope))
            return lapp(LConst("swapneg_goal"), enc(node.formula, task),
                        LLam(mangle(node.name), None,
                             sub(0, node.rest, rebind(node.name))),
                        scope[node.name])

        if isinstance(node, cert.KIntroImp):
            cont = LLam(mangle(node.hyp_name), None,
                        LLam(mangle(node.name), None,
                             sub(0, node.rest,
                                 rebind(node.name, node.hyp_name))))
            return lapp(LConst("intro_imp"), enc(node.left, task),
                        enc(node.right, task), cont, scope[node.name])

        if isinstance(node, cert.KSplitImp):
            side_scope = rebind(node.goal_name, drop=(node.name,))
            side = LLam(mangle(node.goal_name), None,
                        sub(0, node.side, side_scope))
            rest = LLam(mangle(node.name), None,
                        sub(1, node.rest, rebind(node.name)))
            return lapp(LConst("split_imp"), enc(node.left, task),
                        enc(node.right, task), side, rest, scope[node.name])

        if isinstance(node, cert.KUnfoldIff):
            # the iff encoding already is the conjunction of both arrows
            return sub(0, node.rest, dict(scope))

        if isinstance(node, cert.KRevert):
            cont = LLam(mangle(node.goal), None,
                        sub(0, node.rest, rebind(node.goal, drop=(node.hyp,))))
            return lapp(LConst("revert"), enc(node.hyp_formula, task),
                        enc(node.goal_formula, task), scope[node.hyp],
                        scope[node.goal], cont)

        if isinstance(node, cert.KIntroQuant):
            comb = "intro_all" if node.goal else "intro_ex"
            cont = LLam(mangle(node.fresh), None,
                        LLam(mangle(node.name), None,
                             sub(0, node.rest, rebind(node.name))))
            return lapp(LConst(comb), _encode_type(node.ty),
                        enc(node.pred, task), cont, scope[node.name])

        if isinstance(node, cert.KInstQuant):
            comb = "inst_ex" if node.goal else "inst_all"
            cont = LLam(mangle(node.inst_name), None,
                        sub(0, node.rest, rebind(node.inst_name)))
            return lapp(LConst(comb), _encode_type(node.ty),
                        enc(node.pred, task), enc(node.witness, task), cont,
                        scope[node.name])

        if isinstance(node, cert.KIntroType):
            body = subst_type(node.formula.body, node.formula.var,
                              TApp(node.iota, ()))
            I2 = dict(task.types_map())
            I2[node.iota] = 0
            pred = LLam(mangle(node.iota), None,
                        encode_term(body, I2, task.sig_map()))
            cont = LLam(mangle(node.iota), None,
                        LLam(mangle(node.name), None,
                             sub(0, node.rest, rebind(node.name))))
            return lapp(LConst("intro_ty"), pred, cont, scope[node.name])

        if isinstance(node, cert.KInstType):
            b = fresh_ident(node.formula.var,
                            frozenset(task.every_ident()) | {node.formula.var})
            body = subst_type(node.formula.body, node.formula.var, TApp(b, ()))
            I2 = dict(task.types_map())
            I2[b] = 0
            pred = LLam(mangle(b), None,
                        encode_term(body, I2, task.sig_map()))
            cont = LLam(mangle(node.inst_name), None,
                        sub(0, node.rest, rebind(node.inst_name)))
            return lapp(LConst("inst_ty"), pred, _encode_type(node.ty), cont,
                        scope[node.name])

        if isinstance(node, cert.KRewrite):
            comb = "rewrite_goal" if node.goal else "rewrite_hyp"
            moved = lapp(LConst(comb), _encode_type(node.context.ty),
                         enc(node.left, task), enc(node.right, task),
                         enc(node.context, task), scope[node.eq_name],
                         scope[node.name])
            scope2 = dict(scope)
            scope2[node.name] = moved
            return sub(0, node.rest, scope2)

        if isinstance(node, cert.KInduction):
            # the λ binders reuse the symbol's and the goal's own names, so
            # occurrences inside the branches rebind to the current case
            v, g = mangle(node.var), mangle(node.goal_name)
            h, rc = mangle(node.hyp_name), mangle(node.rec_name)
            base_scope = rebind(node.goal_name, node.hyp_name)
            rec_scope = rebind(node.goal_name, node.hyp_name, node.rec_name)
            base = LLam(v, None, LLam(g, None, LLam(
                h, None, sub(0, node.base, base_scope))))
            rec = LLam(v, None, LLam(g, None, LLam(h, None, LLam(
                rc, None, sub(1, node.rec, rec_scope)))))
            return lapp(LConst("sind"), enc(node.context, task),
                        enc(node.bound, task), base, rec,
                        LVar(mangle(node.var)), scope[node.goal_name])

        raise ExportError(f"untranslatable certificate node {node!r}")

    scope0 = {p.name: LVar(mangle(p.name)) for p in T.premises()}
    out = walk(c, T, (), scope0)
    if counter[0] != len(L):
        raise ExportError(
            f"certificate has {counter[0]} holes, {len(L)} tasks given")
    for p in reversed(T.premises()):
        out = LLam(mangle(p.name), None, out)
    for name, _ in reversed(T.sig):
        out = LLam(mangle(name), None, out)
    for name, _ in reversed(T.types):
        out = LLam(mangle(name), None, out)
    for i in reversed(range(len(L))):
        out = LLam(f"s{i + 1}", None, out)
    return out


# ---------------------------------------------------------------------------
# module emission

def _audit(term: LpTerm, known: frozenset[str], what: str) -> None:
    loose = lp_atoms(term) - known
    if loose:
        raise ExportError(f"{what} escapes its scope: {sorted(loose)}")


def emit_module(T: Task, L: list[Task], c: cert.KernelCert) -> str:
    """One self-contained λΠ module for a checked application.

    The output is a pure function of the inputs: fixed bytes, LF endings,
    one require of the shared preamble, one symbol per resulting task, and
    the proof definition.
    """
    known = PREAMBLE_NAMES
    lines = [
        "// generated by certforge; edit the source task, not this file",
        "require open certforge.preamble;",
        "",
    ]
    declared: list[str] = []
    for i, leaf in enumerate(L):
        ty = encode_task(leaf, prune=True)
        _audit(ty, known, f"task{i + 1}")
        lines.append(f"symbol task{i + 1} : TYPE ≔ {lp_format(ty)};")
        declared.append(f"task{i + 1}")
    initial = encode_task(T)
    _audit(initial, known, "initial")
    lines.append(f"symbol initial : TYPE ≔ {lp_format(initial)};")

    ty: LpTerm = LConst("initial")
    for name in reversed(declared):
        ty = LArrow(LConst(name), ty)
    body = proof_term(c, T, L)
    _audit(body, known, "proof")
    lines.append(f"symbol proof : {lp_format(ty)} ≔ {lp_format(body)};")
    lines.append("")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# the preamble

def emit_preamble() -> str:
    """The static combinator and theory preamble, byte-identical per run."""
    return _PREAMBLE


# falsity and truth spelled out; the encodings never abbreviate them
_B = "Π C : TYPE, C"
_PB = f"({_B})"
_TOP = f"{_PB} → {_B}"

_PREAMBLE = f"""\
// certforge preamble: the combinators every emitted proof term uses.
//
// Trusted base (plain declarations, no body):
//   em           excluded middle over encoded propositions
//   le_gt_cases  any two ints compare as <= or >
//   int_ind      bounded course-of-values induction above a bound
// Everything else is a definition or a computation rule. sind, the
// combinator behind induction certificates, is derived: compare i with the
// bound a; at most a use the base continuation, otherwise recurse on
// int_ind with the motive λ v, (C v → ⊥) → ⊥, deciding each smaller m
// against a via le_gt_cases and double negation.

// propositional combinators ------------------------------------------------

symbol eq : Π t : TYPE, t → t → TYPE ≔
  λ t, λ x, λ y, Π Q : (t → TYPE), Q x → Q y;
symbol eq_refl : Π t : TYPE, Π x : t, eq t x x ≔
  λ t, λ x, λ Q, λ q, q;

symbol em : Π t : TYPE, Π C : TYPE, (t → C) → ((t → {_PB}) → C) → C;
symbol dne : Π t : TYPE, ((t → {_PB}) → {_PB}) → t ≔
  λ t, λ g, em t t (λ x, x) (λ n, g n t);

symbol triv : (({_TOP}) → {_PB}) → {_B} ≔
  λ g, g (λ c, c);
symbol axm : Π t : TYPE, t → (t → {_PB}) → {_B} ≔
  λ t, λ h, λ g, g h;
symbol cut : Π t : TYPE, ((t → {_PB}) → {_PB}) → (t → {_PB}) → {_B} ≔
  λ t, λ p, λ r, p r;

symbol split : Π t1 : TYPE, Π t2 : TYPE,
    (t1 → {_PB}) → (t2 → {_PB}) →
    (Π C : TYPE, (t1 → C) → (t2 → C) → C) → {_B} ≔
  λ t1, λ t2, λ s1, λ s2, λ h, h {_PB} s1 s2;
symbol split_goal : Π t1 : TYPE, Π t2 : TYPE,
    ((t1 → {_PB}) → {_PB}) → ((t2 → {_PB}) → {_PB}) →
    ((Π C : TYPE, (t1 → t2 → C) → C) → {_PB}) → {_B} ≔
  λ t1, λ t2, λ s1, λ s2, λ g,
    s1 (λ h1, s2 (λ h2, g (λ C, λ k, k h1 h2)));
symbol destruct : Π t1 : TYPE, Π t2 : TYPE,
    (t1 → t2 → {_PB}) → (Π C : TYPE, (t1 → t2 → C) → C) → {_B} ≔
  λ t1, λ t2, λ s, λ h, h {_PB} s;
symbol destruct_goal : Π t1 : TYPE, Π t2 : TYPE,
    ((t1 → {_PB}) → (t2 → {_PB}) → {_PB}) →
    ((Π C : TYPE, (t1 → C) → (t2 → C) → C) → {_PB}) → {_B} ≔
  λ t1, λ t2, λ s, λ g,
    s (λ h1, g (λ C, λ k1, λ k2, k1 h1)) (λ h2, g (λ C, λ k1, λ k2, k2 h2));

symbol intro_imp : Π t1 : TYPE, Π t2 : TYPE,
    (t1 → (t2 → {_PB}) → {_PB}) → ((t1 → t2) → {_PB}) → {_B} ≔
  λ t1, λ t2, λ s, λ g, g (λ x, s x (λ y, g (λ w, y)) t2);
symbol split_imp : Π t1 : TYPE, Π t2 : TYPE,
    ((t1 → {_PB}) → {_PB}) → (t2 → {_PB}) → (t1 → t2) → {_B} ≔
  λ t1, λ t2, λ s, λ r, λ h, s (λ x, r (h x));
symbol swapneg_goal : Π t : TYPE,
    (t → {_PB}) → ((t → {_PB}) → {_PB}) → {_B} ≔
  λ t, λ s, λ g, g s;
symbol revert : Π t : TYPE, Π u : TYPE,
    t → (u → {_PB}) → (((t → u) → {_PB}) → {_PB}) → {_B} ≔
  λ t, λ u, λ h, λ g, λ s, s (λ f, g (f h));

// quantifier combinators ----------------------------------------------------

symbol intro_all : Π t : TYPE, Π p : (t → TYPE),
    (Π y : t, (p y → {_PB}) → {_PB}) → ((Π y : t, p y) → {_PB}) → {_B} ≔
  λ t, λ p, λ s, λ g, g (λ y, dne (p y) (s y));
symbol intro_ex : Π t : TYPE, Π p : (t → TYPE),
    (Π y : t, p y → {_PB}) →
    (Π C : TYPE, (Π x : t, p x → C) → C) → {_B} ≔
  λ t, λ p, λ s, λ h, h {_PB} s;
symbol inst_all : Π t : TYPE, Π p : (t → TYPE), Π w : t,
    ((p w) → {_PB}) → (Π y : t, p y) → {_B} ≔
  λ t, λ p, λ w, λ s, λ h, s (h w);
symbol inst_ex : Π t : TYPE, Π p : (t → TYPE), Π w : t,
    (((p w) → {_PB}) → {_PB}) →
    ((Π C : TYPE, (Π x : t, p x → C) → C) → {_PB}) → {_B} ≔
  λ t, λ p, λ w, λ s, λ g, s (λ q, g (λ C, λ k, k w q));
symbol intro_ty : Π p : (TYPE → TYPE),
    (Π a : TYPE, (p a → {_PB}) → {_PB}) → ((Π a : TYPE, p a) → {_PB}) → {_B} ≔
  λ p, λ s, λ g, g (λ a, dne (p a) (s a));
symbol inst_ty : Π p : (TYPE → TYPE), Π a : TYPE,
    ((p a) → {_PB}) → (Π b : TYPE, p b) → {_B} ≔
  λ p, λ a, λ s, λ h, s (h a);

symbol rewrite_hyp : Π t : TYPE, Π l : t, Π r : t, Π C : (t → TYPE),
    eq t l r → C l → C r ≔
  λ t, λ l, λ r, λ C, λ e, λ h, e C h;
symbol rewrite_goal : Π t : TYPE, Π l : t, Π r : t, Π C : (t → TYPE),
    eq t l r → (C l → {_PB}) → C r → {_B} ≔
  λ t, λ l, λ r, λ C, λ e, λ g, e (λ z, C z → {_PB}) g;

// binary integers -----------------------------------------------------------

symbol cmp : TYPE;
symbol CEq : cmp;
symbol CLt : cmp;
symbol CGt : cmp;

symbol pos : TYPE;
symbol xH : pos;
symbol xO : pos → pos;
symbol xI : pos → pos;

symbol int : TYPE;
symbol Z0 : int;
symbol Zpos : pos → int;
symbol Zneg : pos → int;

symbol psucc : pos → pos;
rule psucc xH ↪ xO xH;
rule psucc (xO $p) ↪ xI $p;
rule psucc (xI $p) ↪ xO (psucc $p);

// pdbl p computes 2p - 1
symbol pdbl : pos → pos;
rule pdbl xH ↪ xH;
rule pdbl (xO $p) ↪ xI (pdbl $p);
rule pdbl (xI $p) ↪ xI (xO $p);

symbol padd : pos → pos → pos;
symbol paddc : pos → pos → pos;
rule padd xH xH ↪ xO xH;
rule padd xH (xO $q) ↪ xI $q;
rule padd xH (xI $q) ↪ xO (psucc $q);
rule padd (xO $p) xH ↪ xI $p;
rule padd (xO $p) (xO $q) ↪ xO (padd $p $q);
rule padd (xO $p) (xI $q) ↪ xI (padd $p $q);
rule padd (xI $p) xH ↪ xO (psucc $p);
rule padd (xI $p) (xO $q) ↪ xI (padd $p $q);
rule padd (xI $p) (xI $q) ↪ xO (paddc $p $q);
rule paddc xH xH ↪ xI xH;
rule paddc xH (xO $q) ↪ xO (psucc $q);
rule paddc xH (xI $q) ↪ xI (psucc $q);
rule paddc (xO $p) xH ↪ xO (psucc $p);
rule paddc (xO $p) (xO $q) ↪ xI (padd $p $q);
rule paddc (xO $p) (xI $q) ↪ xO (paddc $p $q);
rule paddc (xI $p) xH ↪ xI (psucc $p);
rule paddc (xI $p) (xO $q) ↪ xO (paddc $p $q);
rule paddc (xI $p) (xI $q) ↪ xI (paddc $p $q);

symbol pmul : pos → pos → pos;
rule pmul xH $q ↪ $q;
rule pmul (xO $p) $q ↪ xO (pmul $p $q);
rule pmul (xI $p) $q ↪ padd $q (xO (pmul $p $q));

// subtraction masks: MNul is zero, MNeg any underflow
symbol mask : TYPE;
symbol MNul : mask;
symbol MPos : pos → mask;
symbol MNeg : mask;

symbol dblm : mask → mask;
rule dblm MNul ↪ MNul;
rule dblm (MPos $p) ↪ MPos (xO $p);
rule dblm MNeg ↪ MNeg;
symbol sdblm : mask → mask;
rule sdblm MNul ↪ MPos xH;
rule sdblm (MPos $p) ↪ MPos (xI $p);
rule sdblm MNeg ↪ MNeg;
// dpredm p computes the mask of 2p - 2
symbol dpredm : pos → mask;
rule dpredm xH ↪ MNul;
rule dpredm (xO $p) ↪ MPos (xO (pdbl $p));
rule dpredm (xI $p) ↪ MPos (xO (xO $p));

symbol smask : pos → pos → mask;
symbol smaskc : pos → pos → mask;
rule smask xH xH ↪ MNul;
rule smask xH (xO $q) ↪ MNeg;
rule smask xH (xI $q) ↪ MNeg;
rule smask (xO $p) xH ↪ MPos (pdbl $p);
rule smask (xO $p) (xO $q) ↪ dblm (smask $p $q);
rule smask (xO $p) (xI $q) ↪ sdblm (smaskc $p $q);
rule smask (xI $p) xH ↪ MPos (xO $p);
rule smask (xI $p) (xO $q) ↪ sdblm (smask $p $q);
rule smask (xI $p) (xI $q) ↪ dblm (smask $p $q);
rule smaskc xH $q ↪ MNeg;
rule smaskc (xO $p) xH ↪ dpredm $p;
rule smaskc (xO $p) (xO $q) ↪ sdblm (smaskc $p $q);
rule smaskc (xO $p) (xI $q) ↪ dblm (smaskc $p $q);
rule smaskc (xI $p) xH ↪ MPos (pdbl $p);
rule smaskc (xI $p) (xO $q) ↪ dblm (smask $p $q);
rule smaskc (xI $p) (xI $q) ↪ sdblm (smaskc $p $q);

// only reached when the difference is known positive
symbol mask_pos : mask → pos;
rule mask_pos (MPos $p) ↪ $p;
rule mask_pos MNul ↪ xH;
rule mask_pos MNeg ↪ xH;
symbol psub_pos : pos → pos → pos;
rule psub_pos $p $q ↪ mask_pos (smask $p $q);

symbol pcmpc : cmp → pos → pos → cmp;
rule pcmpc $r xH xH ↪ $r;
rule pcmpc $r xH (xO $q) ↪ CLt;
rule pcmpc $r xH (xI $q) ↪ CLt;
rule pcmpc $r (xO $p) xH ↪ CGt;
rule pcmpc $r (xO $p) (xO $q) ↪ pcmpc $r $p $q;
rule pcmpc $r (xO $p) (xI $q) ↪ pcmpc CLt $p $q;
rule pcmpc $r (xI $p) xH ↪ CGt;
rule pcmpc $r (xI $p) (xO $q) ↪ pcmpc CGt $p $q;
rule pcmpc $r (xI $p) (xI $q) ↪ pcmpc $r $p $q;
symbol pcmp : pos → pos → cmp;
rule pcmp $p $q ↪ pcmpc CEq $p $q;

symbol zcmp : int → int → cmp;
rule zcmp Z0 Z0 ↪ CEq;
rule zcmp Z0 (Zpos $q) ↪ CLt;
rule zcmp Z0 (Zneg $q) ↪ CGt;
rule zcmp (Zpos $p) Z0 ↪ CGt;
rule zcmp (Zpos $p) (Zpos $q) ↪ pcmp $p $q;
rule zcmp (Zpos $p) (Zneg $q) ↪ CGt;
rule zcmp (Zneg $p) Z0 ↪ CLt;
rule zcmp (Zneg $p) (Zpos $q) ↪ CLt;
rule zcmp (Zneg $p) (Zneg $q) ↪ pcmp $q $p;

symbol zsign : cmp → pos → pos → int;
rule zsign CEq $p $q ↪ Z0;
rule zsign CLt $p $q ↪ Zneg (psub_pos $q $p);
rule zsign CGt $p $q ↪ Zpos (psub_pos $p $q);

symbol opp : int → int;
rule opp Z0 ↪ Z0;
rule opp (Zpos $p) ↪ Zneg $p;
rule opp (Zneg $p) ↪ Zpos $p;

symbol add : int → int → int;
rule add Z0 $y ↪ $y;
rule add $x Z0 ↪ $x;
rule add (Zpos $p) (Zpos $q) ↪ Zpos (padd $p $q);
rule add (Zneg $p) (Zneg $q) ↪ Zneg (padd $p $q);
rule add (Zpos $p) (Zneg $q) ↪ zsign (pcmp $p $q) $p $q;
rule add (Zneg $p) (Zpos $q) ↪ zsign (pcmp $q $p) $q $p;

symbol sub : int → int → int;
rule sub $x $y ↪ add $x (opp $y);

symbol mul : int → int → int;
rule mul Z0 $y ↪ Z0;
rule mul $x Z0 ↪ Z0;
rule mul (Zpos $p) (Zpos $q) ↪ Zpos (pmul $p $q);
rule mul (Zpos $p) (Zneg $q) ↪ Zneg (pmul $p $q);
rule mul (Zneg $p) (Zpos $q) ↪ Zneg (pmul $p $q);
rule mul (Zneg $p) (Zneg $q) ↪ Zpos (pmul $p $q);

symbol is_le : cmp → TYPE;
rule is_le CLt ↪ {_TOP};
rule is_le CEq ↪ {_TOP};
rule is_le CGt ↪ {_B};
symbol is_lt : cmp → TYPE;
rule is_lt CLt ↪ {_TOP};
rule is_lt CEq ↪ {_B};
rule is_lt CGt ↪ {_B};

symbol le : int → int → TYPE;
rule le $x $y ↪ is_le (zcmp $x $y);
symbol lt : int → int → TYPE;
rule lt $x $y ↪ is_lt (zcmp $x $y);
symbol gt : int → int → TYPE;
rule gt $x $y ↪ is_lt (zcmp $y $x);
symbol ge : int → int → TYPE;
rule ge $x $y ↪ is_le (zcmp $y $x);

// induction -----------------------------------------------------------------

symbol le_gt_cases : Π x : int, Π y : int, Π C : TYPE,
    (le x y → C) → (gt x y → C) → C;
symbol int_ind : Π a : int, Π Q : (int → TYPE),
    (Π v : int, (Π m : int, gt m a → lt m v → Q m) → gt v a → Q v) →
    Π v : int, gt v a → Q v;

symbol sind : Π C : (int → TYPE), Π a : int,
    (Π v : int, (C v → {_PB}) → le v a → {_PB}) →
    (Π v : int, (C v → {_PB}) → gt v a → (Π m : int, lt m v → C m) → {_PB}) →
    Π i : int, (C i → {_PB}) → {_B} ≔
  λ C, λ a, λ b, λ s, λ i, λ g,
    le_gt_cases i a {_PB}
      (λ hle, b i g hle)
      (λ hgt, int_ind a (λ v, (C v → {_PB}) → {_B})
        (λ v, λ ih, λ hgt2, λ g2,
          s v g2 hgt2
            (λ m, λ hlt, dne (C m)
              (λ nm, le_gt_cases m a {_PB}
                (λ hm, b m nm hm)
                (λ hm2, ih m hm2 hlt nm))))
        i hgt g);
"""

PREAMBLE_NAMES = frozenset({
    "eq", "eq_refl", "em", "dne", "triv", "axm", "cut",
    "split", "split_goal", "destruct", "destruct_goal",
    "intro_imp", "split_imp", "swapneg_goal", "revert",
    "intro_all", "intro_ex", "inst_all", "inst_ex", "intro_ty", "inst_ty",
    "rewrite_hyp", "rewrite_goal",
    "cmp", "CEq", "CLt", "CGt",
    "pos", "xH", "xO", "xI", "int", "Z0", "Zpos", "Zneg",
    "psucc", "pdbl", "padd", "paddc", "pmul",
    "mask", "MNul", "MPos", "MNeg", "dblm", "sdblm", "dpredm",
    "smask", "smaskc", "mask_pos", "psub_pos",
    "pcmpc", "pcmp", "zcmp", "zsign", "opp", "add", "sub", "mul",
    "is_le", "is_lt", "le", "lt", "gt", "ge",
    "le_gt_cases", "int_ind", "sind",
})
