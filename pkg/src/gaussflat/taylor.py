"""Truncated univariate Taylor arithmetic.

A :class:`Taylor` stores the normalized coefficients ``c[k] = f^(k)(0) / k!``
of a function of one real variable ``t``, truncated at a fixed degree, for a
whole batch of independent lines at once.  The coefficient array has shape
``(degree + 1, m)``.

Evaluating an expression tree on ``Taylor`` inputs ``x_i(t) = x0_i + t v_i``
propagates every derivative of ``t -> u(x0 + t v)`` up to the truncation
degree at a cost proportional to the size of the expression.
"""

from math import factorial

import numpy as np

MAX_DEGREE = 4


class TaylorDomainError(ArithmeticError):
    """A partial function was applied outside its domain.

    ``index`` is the position in the batch of the first offending line.
    """

    def __init__(self, message, index):
        super().__init__(message)
        self.index = int(index)


def _first_bad(mask, message):
    if np.any(mask):
        raise TaylorDomainError(message, np.flatnonzero(mask)[0])


def _cauchy(a, b):
    out = np.empty_like(a)
    for k in range(a.shape[0]):
        out[k] = np.sum(a[: k + 1] * b[k::-1], axis=0)
    return out


class Taylor:
    __slots__ = ("c",)

    def __init__(self, c):
        self.c = c

    @classmethod
    def variable(cls, x0, v, degree):
        x0 = np.asarray(x0, dtype=float)
        c = np.zeros((degree + 1,) + x0.shape)
        c[0] = x0
        if degree >= 1:
            c[1] = v
        return cls(c)

    @classmethod
    def constant(cls, value, degree, size):
        c = np.zeros((degree + 1, size))
        c[0] = value
        return cls(c)

    @property
    def degree(self):
        return self.c.shape[0] - 1

    def derivatives(self):
        """Return ``d^k/dt^k`` at ``t = 0`` for ``k = 0..degree``."""
        scale = np.array([factorial(k) for k in range(self.degree + 1)], dtype=float)
        return self.c * scale.reshape((-1,) + (1,) * (self.c.ndim - 1))

    # -- arithmetic -------------------------------------------------------

    def __neg__(self):
        return Taylor(-self.c)

    def __pos__(self):
        return self

    def __add__(self, other):
        if isinstance(other, Taylor):
            return Taylor(self.c + other.c)
        c = self.c.copy()
        c[0] = c[0] + other
        return Taylor(c)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Taylor):
            return Taylor(_cauchy(self.c, other.c))
        return Taylor(self.c * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Taylor):
            if other == 0:
                raise TaylorDomainError("division by zero", 0)
            return Taylor(self.c / other)
        a, b = self.c, other.c
        _first_bad(b[0] == 0, "division by zero")
        out = np.empty_like(a)
        for k in range(a.shape[0]):
            acc = a[k].copy()
            for j in range(1, k + 1):
                acc -= b[j] * out[k - j]
            out[k] = acc / b[0]
        return Taylor(out)

    def __rtruediv__(self, other):
        one = np.zeros_like(self.c)
        one[0] = other
        return Taylor(one) / self

    def __pow__(self, k):
        if not isinstance(k, (int, np.integer)):
            raise TypeError("only integer exponents are supported")
        if k < 0:
            return 1.0 / (self ** (-k))
        result = None
        base = self
        while k:
            if k & 1:
                result = base if result is None else result * base
            k >>= 1
            if k:
                base = base * base
        if result is None:
            one = np.zeros_like(self.c)
            one[0] = 1.0
            return Taylor(one)
        return result

    # -- elementary functions ----------------------------------------------

    def sqrt(self):
        a = self.c
        if self.degree == 0:
            _first_bad(a[0] < 0, "sqrt of a negative number")
        else:
            _first_bad(a[0] <= 0, "sqrt of a non-positive number (not differentiable)")
        out = np.empty_like(a)
        out[0] = np.sqrt(a[0])
        for k in range(1, a.shape[0]):
            acc = a[k].copy()
            for j in range(1, k):
                acc -= out[j] * out[k - j]
            out[k] = acc / (2.0 * out[0])
        return Taylor(out)

    def exp(self):
        a = self.c
        out = np.empty_like(a)
        out[0] = np.exp(a[0])
        for k in range(1, a.shape[0]):
            acc = np.zeros_like(a[0])
            for j in range(1, k + 1):
                acc += j * a[j] * out[k - j]
            out[k] = acc / k
        return Taylor(out)

    def log(self):
        a = self.c
        _first_bad(a[0] <= 0, "log of a non-positive number")
        out = np.empty_like(a)
        out[0] = np.log(a[0])
        for k in range(1, a.shape[0]):
            acc = a[k].copy()
            for j in range(1, k):
                acc -= j * out[j] * a[k - j] / k
            out[k] = acc / a[0]
        return Taylor(out)

    def abs(self):
        a = self.c
        if self.degree > 0:
            _first_bad(a[0] == 0, "abs is not differentiable at 0")
        return Taylor(a * np.sign(a[0]))
