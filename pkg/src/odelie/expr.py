"""Immutable expression trees over ``n`` and the shifted unknowns ``u[k]``.

Nodes are built through the smart constructors (``add``, ``mul``, ``neg``,
``div``, ``power``, ``func``) which do local constant folding only.  There is
no canonical-form simplifier: equality of two expressions in the
mathematical sense is decided numerically (see :mod:`odelie.numeric`).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Union

FUNCTIONS = ("sin", "cos", "log", "abs", "sqrt", "exp")

# largest integer exponent folded exactly; keeps Fractions from exploding
_MAX_FOLD_EXPONENT = 64


class Expr:
    """Base class; concrete nodes are frozen dataclasses below."""

    __slots__ = ()

    def __str__(self) -> str:
        from odelie.printing import format_expr

        return format_expr(self)

    # operator sugar, used heavily by the catalog and tests
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), neg(self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __pow__(self, other):
        return power(self, as_expr(other))

    def __rpow__(self, other):
        return power(as_expr(other), self)

    def __neg__(self):
        return neg(self)


@dataclass(frozen=True, eq=True, repr=False)
class Num(Expr):
    """Exact rational constant (integers have denominator 1)."""

    value: Fraction

    def __repr__(self):
        return f"Num({self.value})"

    @property
    def is_integer(self) -> bool:
        return self.value.denominator == 1


@dataclass(frozen=True, eq=True, repr=False)
class IndexN(Expr):
    """The discrete independent variable n."""

    def __repr__(self):
        return "n"


@dataclass(frozen=True, eq=True, repr=False)
class Pi(Expr):
    def __repr__(self):
        return "pi"


@dataclass(frozen=True, eq=True, repr=False)
class U(Expr):
    """Shifted unknown u[k] standing for u_{n+k}."""

    k: int

    def __post_init__(self):
        if self.k < 0:
            raise ValueError(f"negative shift index u[{self.k}]")

    def __repr__(self):
        return f"u[{self.k}]"


@dataclass(frozen=True, eq=True, repr=False)
class Add(Expr):
    args: tuple

    def __repr__(self):
        return f"Add{self.args!r}"


@dataclass(frozen=True, eq=True, repr=False)
class Mul(Expr):
    args: tuple

    def __repr__(self):
        return f"Mul{self.args!r}"


@dataclass(frozen=True, eq=True, repr=False)
class Neg(Expr):
    arg: Expr

    def __repr__(self):
        return f"Neg({self.arg!r})"


@dataclass(frozen=True, eq=True, repr=False)
class Div(Expr):
    num: Expr
    den: Expr

    def __repr__(self):
        return f"Div({self.num!r}, {self.den!r})"


@dataclass(frozen=True, eq=True, repr=False)
class Pow(Expr):
    base: Expr
    exp: Expr

    def __repr__(self):
        return f"Pow({self.base!r}, {self.exp!r})"


@dataclass(frozen=True, eq=True, repr=False)
class Func(Expr):
    name: str
    arg: Expr

    def __post_init__(self):
        if self.name not in FUNCTIONS:
            raise ValueError(f"unknown function {self.name!r}")

    def __repr__(self):
        return f"{self.name}({self.arg!r})"


N = IndexN()
PI = Pi()
ZERO = Num(Fraction(0))
ONE = Num(Fraction(1))

Number = Union[int, Fraction]


def num(value: Number) -> Num:
    if isinstance(value, float):
        # exact binary value; never rounded
        value = Fraction(value)
    return Num(Fraction(value))


def u(k: int) -> U:
    return U(k)


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction, float)):
        return num(x)
    raise TypeError(f"cannot convert {type(x).__name__} to Expr")


def _is_num(e: Expr, value=None) -> bool:
    return isinstance(e, Num) and (value is None or e.value == value)


# ---------------------------------------------------------------------------
# smart constructors


def add(*args: Expr) -> Expr:
    terms = []
    const = Fraction(0)
    for a in args:
        parts = a.args if isinstance(a, Add) else (a,)
        for p in parts:
            if isinstance(p, Num):
                const += p.value
            else:
                terms.append(p)
    if const != 0 or not terms:
        terms.append(Num(const))
    if len(terms) == 1:
        return terms[0]
    return Add(tuple(terms))


def mul(*args: Expr) -> Expr:
    factors = []
    const = Fraction(1)
    for a in args:
        parts = a.args if isinstance(a, Mul) else (a,)
        for p in parts:
            # pull signs out so Mul never holds a Neg
            while isinstance(p, Neg):
                const = -const
                p = p.arg
            if isinstance(p, Num):
                const *= p.value
            elif isinstance(p, Mul):
                # a Neg(Mul) unwrapped above
                for q in p.args:
                    if isinstance(q, Num):
                        const *= q.value
                    else:
                        factors.append(q)
            else:
                factors.append(p)
    if const == 0:
        return ZERO
    if not factors:
        return Num(const)
    if const == -1:
        inner = factors[0] if len(factors) == 1 else Mul(tuple(factors))
        return Neg(inner)
    if const != 1:
        factors.insert(0, Num(const))
    if len(factors) == 1:
        return factors[0]
    return Mul(tuple(factors))


def neg(a: Expr) -> Expr:
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    if isinstance(a, Mul) and isinstance(a.args[0], Num):
        c = -a.args[0].value
        rest = a.args[1:]
        if c == 1:
            return rest[0] if len(rest) == 1 else Mul(rest)
        return Mul((Num(c),) + rest)
    return Neg(a)


def sub(a: Expr, b: Expr) -> Expr:
    return add(a, neg(b))


def div(a: Expr, b: Expr) -> Expr:
    if isinstance(b, Num) and b.value != 0:
        if isinstance(a, Num):
            return Num(a.value / b.value)
        if b.value == 1:
            return a
    if _is_num(a, 0) and not _is_num(b, 0):
        return ZERO
    return Div(a, b)


def power(b: Expr, e: Expr) -> Expr:
    if isinstance(e, Num):
        if e.value == 0:
            return ONE
        if e.value == 1:
            return b
        if (
            isinstance(b, Num)
            and e.is_integer
            and abs(e.value) <= _MAX_FOLD_EXPONENT
            and not (b.value == 0 and e.value < 0)
        ):
            return Num(b.value ** int(e.value))
    return Pow(b, e)


def func(name: str, arg: Expr) -> Expr:
    return Func(name, arg)


def sin(a):
    return Func("sin", as_expr(a))


def cos(a):
    return Func("cos", as_expr(a))


def log(a):
    return Func("log", as_expr(a))


def sqrt(a):
    return Func("sqrt", as_expr(a))


def exp(a):
    return Func("exp", as_expr(a))


def absolute(a):
    return Func("abs", as_expr(a))


# ---------------------------------------------------------------------------
# traversal


def rebuild(e: Expr, leaf: Callable[[Expr], Expr]) -> Expr:
    """Bottom-up rebuild through the smart constructors; ``leaf`` maps atoms."""
    if isinstance(e, Add):
        return add(*(rebuild(a, leaf) for a in e.args))
    if isinstance(e, Mul):
        return mul(*(rebuild(a, leaf) for a in e.args))
    if isinstance(e, Neg):
        return neg(rebuild(e.arg, leaf))
    if isinstance(e, Div):
        return div(rebuild(e.num, leaf), rebuild(e.den, leaf))
    if isinstance(e, Pow):
        return power(rebuild(e.base, leaf), rebuild(e.exp, leaf))
    if isinstance(e, Func):
        return Func(e.name, rebuild(e.arg, leaf))
    return leaf(e)


def children(e: Expr) -> tuple:
    if isinstance(e, (Add, Mul)):
        return e.args
    if isinstance(e, (Neg, Func)):
        return (e.arg,)
    if isinstance(e, Div):
        return (e.num, e.den)
    if isinstance(e, Pow):
        return (e.base, e.exp)
    return ()


@lru_cache(maxsize=65536)
def free_indices(e: Expr) -> frozenset:
    """Set of k such that u[k] occurs in ``e``."""
    if isinstance(e, U):
        return frozenset((e.k,))
    out = frozenset()
    for c in children(e):
        out |= free_indices(c)
    return out


@lru_cache(maxsize=65536)
def has_n(e: Expr) -> bool:
    if isinstance(e, IndexN):
        return True
    return any(has_n(c) for c in children(e))


def max_index(e: Expr) -> int:
    """Largest k with u[k] in ``e``; -1 when no unknown occurs."""
    idx = free_indices(e)
    return max(idx) if idx else -1


def is_constant(e: Expr) -> bool:
    return not has_n(e) and not free_indices(e)


def size(e: Expr) -> int:
    return 1 + sum(size(c) for c in children(e))


# ---------------------------------------------------------------------------
# shift, substitution, differentiation


def shift(e: Expr, k: int = 1) -> Expr:
    """Apply S^k: n -> n+k and u[j] -> u[j+k]."""
    if k < 0:
        raise ValueError("shift of u-variables needs k >= 0; use shift_n")
    if k == 0:
        return e
    step = Num(Fraction(k))

    def leaf(a):
        if isinstance(a, IndexN):
            return add(N, step)
        if isinstance(a, U):
            return U(a.k + k)
        return a

    return rebuild(e, leaf)


def shift_n(e: Expr, k: int) -> Expr:
    """Replace n by n+k (any sign); only valid for expressions free of u."""
    if free_indices(e):
        raise ValueError("shift_n applies to functions of n only")
    return substitute_n(e, add(N, Num(Fraction(k))))


def substitute(e: Expr, target: U, replacement: Expr) -> Expr:
    def leaf(a):
        if a == target:
            return replacement
        return a

    if target.k not in free_indices(e):
        return e
    return rebuild(e, leaf)


def substitute_many(e: Expr, mapping: dict) -> Expr:
    def leaf(a):
        return mapping.get(a, a)

    return rebuild(e, leaf)


def substitute_n(e: Expr, replacement: Expr) -> Expr:
    def leaf(a):
        if isinstance(a, IndexN):
            return replacement
        return a

    return rebuild(e, leaf)


def depends_on(e: Expr, k: int) -> bool:
    return k in free_indices(e)


def diff(e: Expr, v: U | int) -> Expr:
    """Partial derivative with respect to u[k]; n and other u[j] are constants."""
    k = v.k if isinstance(v, U) else int(v)
    return _diff(e, k)


@lru_cache(maxsize=65536)
def _diff(e: Expr, k: int) -> Expr:
    if k not in free_indices(e):
        return ZERO
    if isinstance(e, U):
        return ONE
    if isinstance(e, Add):
        return add(*(_diff(a, k) for a in e.args))
    if isinstance(e, Neg):
        return neg(_diff(e.arg, k))
    if isinstance(e, Mul):
        terms = []
        for i, a in enumerate(e.args):
            if k in free_indices(a):
                rest = e.args[:i] + (_diff(a, k),) + e.args[i + 1 :]
                terms.append(mul(*rest))
        return add(*terms)
    if isinstance(e, Div):
        da = _diff(e.num, k)
        if k not in free_indices(e.den):
            return div(da, e.den)
        db = _diff(e.den, k)
        top = sub(mul(da, e.den), mul(e.num, db))
        return div(top, power(e.den, Num(Fraction(2))))
    if isinstance(e, Pow):
        b, x = e.base, e.exp
        if k not in free_indices(x):
            return mul(x, power(b, add(x, Num(Fraction(-1)))), _diff(b, k))
        if k not in free_indices(b):
            return mul(e, Func("log", b), _diff(x, k))
        return mul(
            e,
            add(mul(_diff(x, k), Func("log", b)), div(mul(x, _diff(b, k)), b)),
        )
    if isinstance(e, Func):
        a = e.arg
        da = _diff(a, k)
        if e.name == "sin":
            return mul(Func("cos", a), da)
        if e.name == "cos":
            return neg(mul(Func("sin", a), da))
        if e.name == "log":
            return div(da, a)
        if e.name == "exp":
            return mul(e, da)
        if e.name == "sqrt":
            return div(da, mul(Num(Fraction(2)), e))
        if e.name == "abs":
            # sign(a) away from zero; undefined (non-finite) at a == 0
            return mul(div(e, a), da)
    raise TypeError(f"cannot differentiate {e!r}")
