"""S-expression reading, printing, and conversions for the object language.

The concrete syntax is deliberately small: symbols, integers, #t/#f and
parenthesized lists. Idents like x#3 are ordinary symbols since # only
means a Boolean as the whole token #t or #f.

Terms:   (forall (x (int)) body)  (exists ...)  (lam ...)  (pi a body)
         (not t)  (and a b)  (or a b)  (imp a b)  (iff a b)  (= a b)
         true  false  integers  symbols; any other list is application.
Types:   prop  |  a (type variable)  |  (color)  |  (set ty)  |  (-> a b c)
Tasks:   (task (types (c 0) ...) (sig (x ty) ...)
               (hyps (H t) ...) (goals (G t) ...))
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import (
    App,
    Arrow,
    BinOp,
    Bottom,
    Exists,
    Forall,
    IntLit,
    Lam,
    Not,
    PROP,
    PiType,
    Prop,
    TApp,
    TVar,
    Term,
    Top,
    Type,
    Var,
    app,
    ident,
)
from .task import Premise, Task


class SexprError(Exception):
    pass


@dataclass(frozen=True, slots=True)
class Pos:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


_DELIMS = "()"


def _tokenize(text: str):
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            col += 1
            i += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in _DELIMS:
            yield ch, Pos(line, col)
            col += 1
            i += 1
        else:
            start = i
            p = Pos(line, col)
            while i < n and text[i] not in " \t\r\n;()":
                i += 1
            tok = text[start:i]
            col += len(tok)
            yield tok, p


def _atom(tok: str):
    if tok == "#t":
        return True
    if tok == "#f":
        return False
    body = tok[1:] if tok[0] in "+-" and len(tok) > 1 else tok
    if body.isdigit():
        return int(tok)
    return tok


def loads_many(text: str) -> list:
    """All toplevel data in text. Symbols come back as plain strings."""
    stack: list[list] = []
    out: list = []
    last_open: list[Pos] = []
    for tok, pos in _tokenize(text):
        if tok == "(":
            stack.append([])
            last_open.append(pos)
        elif tok == ")":
            if not stack:
                raise SexprError(f"{pos}: unmatched )")
            done = stack.pop()
            last_open.pop()
            (stack[-1] if stack else out).append(done)
        else:
            (stack[-1] if stack else out).append(_atom(tok))
    if stack:
        raise SexprError(f"{last_open[-1]}: unclosed (")
    return out


def loads(text: str):
    data = loads_many(text)
    if len(data) != 1:
        raise SexprError(f"expected one datum, found {len(data)}")
    return data[0]


def dumps(value) -> str:
    if value is True:
        return "#t"
    if value is False:
        return "#f"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        if not value or any(c in value for c in " \t\r\n;()"):
            raise SexprError(f"not a printable symbol: {value!r}")
        return value
    if isinstance(value, (list, tuple)):
        return "(" + " ".join(dumps(v) for v in value) + ")"
    raise SexprError(f"cannot print {value!r}")


# ---------------------------------------------------------------------------
# Types

def type_to_sexpr(ty: Type):
    if isinstance(ty, Prop):
        return "prop"
    if isinstance(ty, TVar):
        return str(ty.name)
    if isinstance(ty, TApp):
        return [str(ty.head)] + [type_to_sexpr(a) for a in ty.args]
    if isinstance(ty, Arrow):
        parts = []
        cur: Type = ty
        while isinstance(cur, Arrow):
            parts.append(type_to_sexpr(cur.left))
            cur = cur.right
        parts.append(type_to_sexpr(cur))
        return ["->"] + parts
    raise SexprError(f"cannot print type {ty!r}")


def type_from_sexpr(form) -> Type:
    if form == "prop":
        return PROP
    if isinstance(form, str):
        return TVar(ident(form))
    if isinstance(form, list) and form:
        if form[0] == "->":
            if len(form) < 3:
                raise SexprError("-> needs at least two types")
            tys = [type_from_sexpr(f) for f in form[1:]]
            out = tys[-1]
            for t in reversed(tys[:-1]):
                out = Arrow(t, out)
            return out
        head = form[0]
        if not isinstance(head, str):
            raise SexprError(f"bad type head {head!r}")
        return TApp(ident(head), tuple(type_from_sexpr(f) for f in form[1:]))
    raise SexprError(f"bad type syntax {form!r}")


# ---------------------------------------------------------------------------
# Terms

_BINOPS = {"and", "or", "imp", "iff"}
_BINDERS = {"forall": Forall, "exists": Exists, "lam": Lam}
_KEYWORDS = _BINOPS | set(_BINDERS) | {"not", "pi", "=", "true", "false"}


def term_to_sexpr(t: Term):
    if isinstance(t, Var):
        return str(t.name)
    if isinstance(t, IntLit):
        return t.value
    if isinstance(t, Top):
        return "true"
    if isinstance(t, Bottom):
        return "false"
    if isinstance(t, Not):
        return ["not", term_to_sexpr(t.body)]
    if isinstance(t, BinOp):
        return [t.op, term_to_sexpr(t.left), term_to_sexpr(t.right)]
    if isinstance(t, App):
        args = []
        cur: Term = t
        while isinstance(cur, App):
            args.append(term_to_sexpr(cur.arg))
            cur = cur.fn
        return [term_to_sexpr(cur)] + list(reversed(args))
    if isinstance(t, (Lam, Exists, Forall)):
        kw = {Lam: "lam", Exists: "exists", Forall: "forall"}[type(t)]
        return [kw, [str(t.var), type_to_sexpr(t.ty)], term_to_sexpr(t.body)]
    if isinstance(t, PiType):
        return ["pi", str(t.var), term_to_sexpr(t.body)]
    raise SexprError(f"cannot print term {t!r}")


def term_from_sexpr(form) -> Term:
    if isinstance(form, bool):
        raise SexprError("booleans are not terms; use true/false")
    if isinstance(form, int):
        return IntLit(form)
    if isinstance(form, str):
        if form == "true":
            return Top()
        if form == "false":
            return Bottom()
        return Var(ident(form))
    if not isinstance(form, list) or not form:
        raise SexprError(f"bad term syntax {form!r}")
    head = form[0]
    if head == "not":
        if len(form) != 2:
            raise SexprError("not takes one argument")
        return Not(term_from_sexpr(form[1]))
    if isinstance(head, str) and head in _BINOPS:
        if len(form) != 3:
            raise SexprError(f"{head} takes two arguments")
        return BinOp(head, term_from_sexpr(form[1]), term_from_sexpr(form[2]))
    if isinstance(head, str) and head in _BINDERS:
        if len(form) != 3 or not (isinstance(form[1], list) and len(form[1]) == 2
                                  and isinstance(form[1][0], str)):
            raise SexprError(f"{head} expects ({head} (x type) body)")
        name, tyf = form[1]
        return _BINDERS[head](ident(name), type_from_sexpr(tyf),
                              term_from_sexpr(form[2]))
    if head == "pi":
        if len(form) != 3 or not isinstance(form[1], str):
            raise SexprError("pi expects (pi a body)")
        return PiType(ident(form[1]), term_from_sexpr(form[2]))
    if head == "=":
        if len(form) != 3:
            raise SexprError("= takes two arguments")
        return app(Var(ident("=")), term_from_sexpr(form[1]),
                   term_from_sexpr(form[2]))
    # plain application, left-associated
    return app(term_from_sexpr(head), *(term_from_sexpr(f) for f in form[1:]))


# ---------------------------------------------------------------------------
# Tasks

def task_to_sexpr(T: Task):
    return ["task",
            ["types"] + [[str(n), a] for n, a in T.types],
            ["sig"] + [[str(n), type_to_sexpr(ty)] for n, ty in T.sig],
            ["hyps"] + [[str(p.name), term_to_sexpr(p.formula)] for p in T.hyps],
            ["goals"] + [[str(p.name), term_to_sexpr(p.formula)] for p in T.goals]]


def _section(form, key: str):
    for part in form[1:]:
        if isinstance(part, list) and part and part[0] == key:
            return part[1:]
    return []


def task_from_sexpr(form) -> Task:
    if not (isinstance(form, list) and form and form[0] == "task"):
        raise SexprError("task form must start with (task ...)")
    seen = []
    for part in form[1:]:
        if not (isinstance(part, list) and part
                and part[0] in ("types", "sig", "hyps", "goals")):
            raise SexprError(f"unknown task section {part!r}")
        seen.append(part[0])
    if seen != ["types", "sig", "hyps", "goals"]:
        raise SexprError("a task needs exactly the sections "
                         "(types ...) (sig ...) (hyps ...) (goals ...)")
    types = []
    for entry in _section(form, "types"):
        if not (isinstance(entry, list) and len(entry) == 2
                and isinstance(entry[0], str) and isinstance(entry[1], int)):
            raise SexprError(f"bad type declaration {entry!r}")
        types.append((ident(entry[0]), entry[1]))
    sig = []
    for entry in _section(form, "sig"):
        if not (isinstance(entry, list) and len(entry) == 2
                and isinstance(entry[0], str)):
            raise SexprError(f"bad signature entry {entry!r}")
        sig.append((ident(entry[0]), type_from_sexpr(entry[1])))

    def premises(key):
        out = []
        for entry in _section(form, key):
            if not (isinstance(entry, list) and len(entry) == 2
                    and isinstance(entry[0], str)):
                raise SexprError(f"bad premise {entry!r}")
            out.append(Premise(ident(entry[0]), term_from_sexpr(entry[1])))
        return tuple(out)

    return Task(types=tuple(types), sig=tuple(sig),
                hyps=premises("hyps"), goals=premises("goals"))
