"""Expression language for analytic scalar fields.

Grammar (whitespace is insignificant)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | factor
    factor := atom ('^' ['-'] integer)?
    atom   := number | 'x' index | '(' expr ')' | func '(' expr ')'
    func   := 'sqrt' | 'exp' | 'log' | 'abs'

Variables are ``x1 .. xn``.  The parsed tree evaluates on :class:`~gaussflat.taylor.Taylor`
objects, so the same tree yields values and derivatives along lines.
"""

import re

from .taylor import Taylor, TaylorDomainError

FUNCTIONS = ("sqrt", "exp", "log", "abs")

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


class ParseError(ValueError):
    """Syntax or name error in a field expression.

    Attributes
    ----------
    position : int
        0-based character offset of the offending token.
    token : str
        The offending token text (empty string at end of input).
    """

    def __init__(self, message, position, token):
        super().__init__(f"{message} at position {position} (token {token!r})")
        self.position = position
        self.token = token


class Node:
    def evaluate(self, xs):
        raise NotImplementedError


class Number(Node):
    def __init__(self, value):
        self.value = float(value)

    def evaluate(self, xs):
        return self.value

    def __repr__(self):
        return repr(self.value)


class Variable(Node):
    def __init__(self, index):
        self.index = index

    def evaluate(self, xs):
        return xs[self.index]

    def __repr__(self):
        return f"x{self.index + 1}"


class Negate(Node):
    def __init__(self, operand):
        self.operand = operand

    def evaluate(self, xs):
        return -self.operand.evaluate(xs)

    def __repr__(self):
        return f"(-{self.operand!r})"


class BinaryOp(Node):
    def __init__(self, op, left, right):
        self.op = op
        self.left = left
        self.right = right

    def evaluate(self, xs):
        a = self.left.evaluate(xs)
        b = self.right.evaluate(xs)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if not isinstance(a, Taylor) and not isinstance(b, Taylor):
            if b == 0:
                # constant subexpression, nothing to point at
                raise TaylorDomainError("division by zero", 0)
        return a / b

    def __repr__(self):
        return f"({self.left!r} {self.op} {self.right!r})"


class Power(Node):
    def __init__(self, base, exponent):
        self.base = base
        self.exponent = int(exponent)

    def evaluate(self, xs):
        b = self.base.evaluate(xs)
        if isinstance(b, Taylor):
            return b**self.exponent
        if b == 0 and self.exponent < 0:
            raise TaylorDomainError("division by zero", 0)
        return b**self.exponent

    def __repr__(self):
        return f"({self.base!r}^{self.exponent})"


class Call(Node):
    def __init__(self, func, arg):
        self.func = func
        self.arg = arg

    def evaluate(self, xs):
        a = self.arg.evaluate(xs)
        if not isinstance(a, Taylor):
            # constant argument: lift to a one-element series
            a = Taylor.constant(a, 0, 1)
            return float(getattr(a, self.func)().c[0, 0])
        return getattr(a, self.func)()

    def __repr__(self):
        return f"{self.func}({self.arg!r})"


def _tokenize(source):
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise ParseError("unexpected character", pos, source[pos])
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, source, dim):
        self.tokens = _tokenize(source)
        self.i = 0
        self.dim = dim

    @property
    def current(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text):
        kind, value, pos = self.current
        if value != text or kind == "end":
            raise ParseError(f"expected {text!r}", pos, value)
        return self.advance()

    def parse(self):
        node = self.expr()
        kind, value, pos = self.current
        if kind != "end":
            raise ParseError("unexpected trailing input", pos, value)
        return node

    def expr(self):
        node = self.term()
        while self.current[1] in ("+", "-") and self.current[0] == "op":
            op = self.advance()[1]
            node = BinaryOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.current[1] in ("*", "/") and self.current[0] == "op":
            op = self.advance()[1]
            node = BinaryOp(op, node, self.unary())
        return node

    def unary(self):
        kind, value, _ = self.current
        if kind == "op" and value in ("+", "-"):
            self.advance()
            operand = self.unary()
            return Negate(operand) if value == "-" else operand
        return self.factor()

    def factor(self):
        node = self.atom()
        if self.current[0] == "op" and self.current[1] == "^":
            self.advance()
            sign = 1
            if self.current[0] == "op" and self.current[1] == "-":
                self.advance()
                sign = -1
            kind, value, pos = self.current
            if kind != "number" or not value.isdigit():
                raise ParseError("exponent must be an integer", pos, value)
            self.advance()
            node = Power(node, sign * int(value))
        return node

    def atom(self):
        kind, value, pos = self.current
        if kind == "number":
            self.advance()
            return Number(value)
        if kind == "op" and value == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if kind == "name":
            self.advance()
            m = re.fullmatch(r"x(\d+)", value)
            if m:
                index = int(m.group(1))
                if index < 1:
                    raise ParseError("variable indices start at 1", pos, value)
                if index > self.dim:
                    raise ParseError(f"variable index exceeds dim={self.dim}", pos, value)
                return Variable(index - 1)
            if value in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(value, arg)
            raise ParseError("unknown identifier", pos, value)
        if kind == "end":
            raise ParseError("unexpected end of input", pos, value)
        raise ParseError("unexpected token", pos, value)


def parse_expression(source, dim):
    """Parse ``source`` into an expression tree over ``x1 .. x{dim}``."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    return _Parser(source, dim).parse()
