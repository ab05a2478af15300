"""Compact infix printing whose output parses back to the same tree.

Parenthesisation follows the input grammar, in particular its unary-minus
rule ``base := '-' base``, under which ``-x^2`` would read as ``(-x)^2``.
"""

from __future__ import annotations

from fractions import Fraction

from odelie.expr import Add, Div, Expr, Func, IndexN, Mul, Neg, Num, Pi, Pow, U


def _fmt_fraction(v: Fraction) -> str:
    if v.denominator == 1:
        return str(v.numerator)
    return f"{v.numerator}/{v.denominator}"


def _is_atom(e: Expr) -> bool:
    """Printable as a grammar ``base`` without parentheses or leading sign."""
    if isinstance(e, Num):
        return e.value >= 0 and e.value.denominator == 1
    return isinstance(e, (IndexN, Pi, U, Func))


def _paren(s: str) -> str:
    return f"({s})"


def _atom(e: Expr) -> str:
    s = format_expr(e)
    return s if _is_atom(e) else _paren(s)


def _negative_part(e: Expr):
    """Return the magnitude of a term printed with a leading minus, else None."""
    if isinstance(e, Neg):
        return e.arg
    if isinstance(e, Num) and e.value < 0:
        return Num(-e.value)
    if isinstance(e, Mul) and isinstance(e.args[0], Num) and e.args[0].value < 0:
        c = -e.args[0].value
        return Mul((Num(c),) + e.args[1:])
    return None


def _term(e: Expr) -> str:
    # a grammar 'term': anything but a bare sum
    s = format_expr(e)
    return _paren(s) if isinstance(e, Add) else s


def format_expr(e: Expr) -> str:
    if isinstance(e, Num):
        v = e.value
        return ("-" if v < 0 else "") + _fmt_fraction(abs(v))
    if isinstance(e, IndexN):
        return "n"
    if isinstance(e, Pi):
        return "pi"
    if isinstance(e, U):
        return f"u[{e.k}]"
    if isinstance(e, Func):
        return f"{e.name}({format_expr(e.arg)})"
    if isinstance(e, Add):
        first, *rest = e.args
        if isinstance(first, Neg):
            out = "-" + _atom(first.arg)
        else:
            out = _term(first)
        for t in rest:
            m = _negative_part(t)
            if m is not None:
                out += "-" + _term(m)
            else:
                out += "+" + _term(t)
        return out
    if isinstance(e, Neg):
        return "-" + _atom(e.arg)
    if isinstance(e, Mul):
        parts = []
        for i, f in enumerate(e.args):
            if isinstance(f, Num):
                parts.append(format_expr(f))
            elif isinstance(f, Pow):
                parts.append(format_expr(f))
            elif isinstance(f, Div) and i == 0:
                parts.append(format_expr(f))
            else:
                parts.append(_atom(f))
        return "*".join(parts)
    if isinstance(e, Div):
        a, b = e.num, e.den
        if isinstance(a, Add):
            top = _paren(format_expr(a))
        else:
            top = format_expr(a)
        if isinstance(b, Pow):
            bot = format_expr(b)
        else:
            bot = _atom(b)
        return f"{top}/{bot}"
    if isinstance(e, Pow):
        base = _atom(e.base)
        x = e.exp
        ex = format_expr(x) if isinstance(x, Pow) else _atom(x)
        return f"{base}^{ex}"
    raise TypeError(f"cannot format {e!r}")
