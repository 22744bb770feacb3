"""Scalar coefficient expressions in the coordinates x1..xn.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' integer)?
    base   := number | var | func '(' expr ')' | '(' expr ')' | '-' base
    var    := 'x' digits
    func   := 'sin' | 'cos' | 'exp' | 'log'
    number := digits ('.' digits)?

Unary minus binds to a base, so ``-x1^2`` is ``(-x1)^2``.
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Any, Callable, Dict, FrozenSet, List, Sequence, Union

import pyparsing as pp

from ..common.errors import (
    DimensionError,
    ExprDomainError,
    ExprNameError,
    ExprSyntaxError,
)
from . import jet
from .jet import Jet, real_part

FUNCTIONS: Dict[str, Callable[[Any], Any]] = {
    "sin": jet.sin,
    "cos": jet.cos,
    "exp": jet.exp,
    "log": jet.log,
}


class Expr:
    """Immutable expression node."""

    __slots__ = ()

    def evaluate(self, point: Sequence[Any]) -> Any:
        """Evaluate at a point of floats or jets."""
        raise NotImplementedError

    def variables(self) -> FrozenSet[int]:
        """Return the 0-based indices of the variables used."""
        raise NotImplementedError

    def is_zero(self) -> bool:
        """Whether this is the literal zero."""
        return False

    def __eq__(self, other: object) -> bool:
        """Structural equality."""
        if type(self) is not type(other):
            return False
        assert isinstance(other, Expr)
        return self._key() == other._key()

    def __hash__(self) -> int:
        """Hash the structure."""
        return hash((type(self).__name__, self._key()))

    def _key(self) -> object:
        raise NotImplementedError

    def __repr__(self) -> str:
        """Show the printed form."""
        return f"Expr({self})"


def _decimal(value: Fraction) -> str:
    """Print a fraction exactly, as a decimal when it terminates."""
    num, den = value.numerator, value.denominator
    twos = fives = 0
    rest = den
    while rest % 2 == 0:
        rest //= 2
        twos += 1
    while rest % 5 == 0:
        rest //= 5
        fives += 1
    sign = "-" if num < 0 else ""
    num = abs(num)
    if rest != 1:
        return f"({sign}{num}/{den})"
    places = max(twos, fives)
    digits = str(num * 10**places // den).rjust(places + 1, "0")
    if places == 0:
        return f"{sign}{digits}" if not sign else f"({sign}{digits})"
    text = f"{digits[:-places]}.{digits[-places:]}"
    return text if not sign else f"({sign}{text})"


class Const(Expr):
    """Rational literal."""

    __slots__ = ("value", "number")

    def __init__(self, value: Union[int, Fraction, str]) -> None:
        """Store the exact value and its float conversion."""
        self.value = Fraction(value)
        self.number = float(self.value)

    def evaluate(self, point: Sequence[Any]) -> Any:
        """Return the float value."""
        return self.number

    def variables(self) -> FrozenSet[int]:
        """No variables."""
        return frozenset()

    def is_zero(self) -> bool:
        """Whether the value is zero."""
        return self.value == 0

    def _key(self) -> object:
        return self.value

    def __str__(self) -> str:
        """Print exactly."""
        return _decimal(self.value)


class Var(Expr):
    """Coordinate variable, stored 0-based."""

    __slots__ = ("index",)

    def __init__(self, index: int) -> None:
        """Refer to coordinate x{index+1}."""
        if index < 0:
            raise ExprNameError(f"negative variable index {index}")
        self.index = index

    def evaluate(self, point: Sequence[Any]) -> Any:
        """Pick the coordinate."""
        return point[self.index]

    def variables(self) -> FrozenSet[int]:
        """The single variable."""
        return frozenset([self.index])

    def _key(self) -> object:
        return self.index

    def __str__(self) -> str:
        """Print 1-based."""
        return f"x{self.index + 1}"


class Neg(Expr):
    """Unary minus."""

    __slots__ = ("operand",)

    def __init__(self, operand: Expr) -> None:
        """Negate operand."""
        self.operand = operand

    def evaluate(self, point: Sequence[Any]) -> Any:
        """Negate the operand value."""
        return -self.operand.evaluate(point)

    def variables(self) -> FrozenSet[int]:
        """Variables of the operand."""
        return self.operand.variables()

    def _key(self) -> object:
        return self.operand

    def __str__(self) -> str:
        """Print parenthesised."""
        return f"(-{self.operand})"


class BinOp(Expr):
    """Binary arithmetic."""

    __slots__ = ("op", "left", "right")

    def __init__(self, op: str, left: Expr, right: Expr) -> None:
        """Combine left and right with op in + - * /."""
        if op not in "+-*/" or len(op) != 1:
            raise ValueError(f"unknown operator {op}")
        self.op = op
        self.left = left
        self.right = right

    def evaluate(self, point: Sequence[Any]) -> Any:
        """Evaluate both sides and combine."""
        a = self.left.evaluate(point)
        b = self.right.evaluate(point)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if real_part(b) == 0.0:
            raise ExprDomainError("division by zero", str(self))
        return a / b

    def variables(self) -> FrozenSet[int]:
        """Union of both sides."""
        return self.left.variables() | self.right.variables()

    def _key(self) -> object:
        return (self.op, self.left, self.right)

    def __str__(self) -> str:
        """Print parenthesised."""
        return f"({self.left} {self.op} {self.right})"


class Pow(Expr):
    """Power with a non-negative integer exponent."""

    __slots__ = ("base", "exponent")

    def __init__(self, base: Expr, exponent: int) -> None:
        """Raise base to exponent."""
        if exponent < 0:
            raise ValueError("exponents are non-negative integers")
        self.base = base
        self.exponent = exponent

    def evaluate(self, point: Sequence[Any]) -> Any:
        """Integer power of the base value."""
        value = self.base.evaluate(point)
        if self.exponent == 0:
            return 1.0
        return value**self.exponent

    def variables(self) -> FrozenSet[int]:
        """Variables of the base."""
        return self.base.variables()

    def _key(self) -> object:
        return (self.base, self.exponent)

    def __str__(self) -> str:
        """Print parenthesised."""
        return f"({self.base}^{self.exponent})"


class Func(Expr):
    """Call of sin, cos, exp or log."""

    __slots__ = ("name", "arg")

    def __init__(self, name: str, arg: Expr) -> None:
        """Apply the named function to arg."""
        if name not in FUNCTIONS:
            raise ExprNameError(f"unknown function {name}")
        self.name = name
        self.arg = arg

    def evaluate(self, point: Sequence[Any]) -> Any:
        """Apply the function, checking the log domain."""
        value = self.arg.evaluate(point)
        if self.name == "log" and real_part(value) <= 0.0:
            raise ExprDomainError("log of non-positive value", str(self))
        return FUNCTIONS[self.name](value)

    def variables(self) -> FrozenSet[int]:
        """Variables of the argument."""
        return self.arg.variables()

    def _key(self) -> object:
        return (self.name, self.arg)

    def __str__(self) -> str:
        """Print as a call."""
        return f"{self.name}({self.arg})"


ZERO = Const(0)
ONE = Const(1)


def _fold(tokens: pp.ParseResults) -> Expr:
    items = list(tokens)
    node: Expr = items[0]
    for op, rhs in zip(items[1::2], items[2::2]):
        node = BinOp(op, node, rhs)
    return node


def _power(tokens: pp.ParseResults) -> Expr:
    if len(tokens) == 1:
        return tokens[0]  # type: ignore[no-any-return]
    return Pow(tokens[0], int(tokens[1]))


def _grammar() -> pp.ParserElement:
    lpar, rpar = pp.Suppress("("), pp.Suppress(")")
    number = pp.Regex(r"\d+(\.\d+)?").set_parse_action(
        lambda t: Const(Fraction(t[0]))
    )
    var = pp.Regex(r"x\d+").set_parse_action(lambda t: Var(int(t[0][1:]) - 1))
    func = pp.one_of(list(FUNCTIONS))
    integer = pp.Regex(r"\d+")

    expr = pp.Forward()
    base = pp.Forward()
    call = (func + lpar + expr + rpar).set_parse_action(
        lambda t: Func(t[0], t[1])
    )
    negation = (pp.Suppress("-") + base).set_parse_action(
        lambda t: Neg(t[0])
    )
    base <<= number | call | var | (lpar + expr + rpar) | negation
    factor = (base + pp.Optional(pp.Suppress("^") + integer)).set_parse_action(
        _power
    )
    products = factor + pp.ZeroOrMore(pp.one_of("* /") + factor)
    term = products.set_parse_action(_fold)
    expr <<= (term + pp.ZeroOrMore(pp.one_of("+ -") + term)).set_parse_action(
        _fold
    )
    return expr


GRAMMAR = _grammar()
_IDENTIFIER = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_VARIABLE = re.compile(r"x(\d+)")


def _check_names(text: str, dim: int) -> None:
    for match in _IDENTIFIER.finditer(text):
        name = match.group(0)
        if name in FUNCTIONS:
            continue
        var = _VARIABLE.fullmatch(name)
        if var is None or int(var.group(1)) == 0:
            raise ExprNameError(
                f"unknown identifier '{name}' at offset {match.start()}"
            )
        if int(var.group(1)) > dim:
            raise DimensionError(
                f"variable {name} exceeds dimension {dim} "
                f"at offset {match.start()}"
            )


def parse_expr(text: str, dim: int) -> Expr:
    """Parse text into an expression over x1..x{dim}.

    Raises:
        ExprSyntaxError: malformed text, with the byte offset.
        ExprNameError: unknown identifiers.
        DimensionError: variables beyond dim, or dim below 1.
    """
    if dim < 1:
        raise DimensionError(f"dimension must be positive, got {dim}")
    _check_names(text, dim)
    try:
        result = GRAMMAR.parse_string(text, parse_all=True)
    except pp.ParseException as err:
        offset = len(text[: err.loc].encode("utf-8"))
        raise ExprSyntaxError(f"cannot parse '{text}'", offset) from err
    node = result[0]
    assert isinstance(node, Expr)
    return node


def eval_jet(e: Expr, point: Sequence[float]) -> Jet:
    """Evaluate e and its gradient at point."""
    seeded = jet.seed(point)
    value = e.evaluate(seeded)
    if isinstance(value, Jet) and seeded and value.tag == seeded[0].tag:
        return value
    return Jet(value, (0.0,) * len(point), seeded[0].tag if seeded else -1)


def parse_all(texts: Sequence[str], dim: int) -> List[Expr]:
    """Parse a list of expressions."""
    return [parse_expr(text, dim) for text in texts]
