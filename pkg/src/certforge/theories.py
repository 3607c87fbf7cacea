"""Interpreted symbols: polymorphic equality and the integer theory.

Interpreted symbols are not part of the signature or type signature of any
task; they resolve against the fixed table below, and task construction
rejects attempts to redeclare them.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import (
    INT,
    PROP,
    Ident,
    Lam,
    TVar,
    Term,
    Type,
    TypingError,
    arrow,
    subst_term,
)


@dataclass(frozen=True)
class InterpretedSymbol:
    name: str
    type: Type  # read as quantified over its type variables


@dataclass(frozen=True)
class InterpretedSignature:
    type_symbols: dict[Ident, int]
    term_symbols: dict[str, InterpretedSymbol]


_A = TVar(Ident("a"))

INTERPRETED = InterpretedSignature(
    type_symbols={Ident("int"): 0},
    term_symbols={
        "=": InterpretedSymbol("=", arrow(_A, _A, PROP)),
        "+": InterpretedSymbol("+", arrow(INT, INT, INT)),
        "*": InterpretedSymbol("*", arrow(INT, INT, INT)),
        "-": InterpretedSymbol("-", arrow(INT, INT, INT)),
        ">": InterpretedSymbol(">", arrow(INT, INT, PROP)),
        "<": InterpretedSymbol("<", arrow(INT, INT, PROP)),
        ">=": InterpretedSymbol(">=", arrow(INT, INT, PROP)),
        "<=": InterpretedSymbol("<=", arrow(INT, INT, PROP)),
    },
)


def lookup_interpreted(name: str) -> InterpretedSymbol | None:
    """The fixed interpreted typing of `name`, or None for user symbols."""
    return INTERPRETED.term_symbols.get(name)


def is_reserved(name: str) -> bool:
    return name in INTERPRETED.term_symbols or Ident(name) in INTERPRETED.type_symbols


def apply_context(ctx: Term, arg: Term) -> Term:
    """Beta-reduce a single application of an explicit lambda context.

    This is the t[u] notation of the rewrite and induction rules: for
    ctx = lam x. u the result is u[x -> arg].
    """
    if not isinstance(ctx, Lam):
        raise TypingError(f"context is not a lambda abstraction: {ctx}")
    return subst_term(ctx.body, ctx.var, arg)
