import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from gaussflat.expr import ParseError, parse_expression
from gaussflat.field import EvaluationError, directional_jet, parse_field
from gaussflat.taylor import Taylor, TaylorDomainError


def series(x0, degree=4):
    return Taylor.variable(np.atleast_1d(float(x0)), np.ones(1), degree)


def derivs(t):
    return t.derivatives()[:, 0]


class TestTaylor:
    def test_polynomial(self):
        x = series(2.0)
        np.testing.assert_allclose(derivs(x**3 - 2 * x + 1), [5, 10, 12, 6, 0])

    def test_elementary_functions_match_closed_forms(self):
        x = series(0.7)
        np.testing.assert_allclose(derivs(x.exp()), [math.exp(0.7)] * 5, rtol=1e-14)
        logs = [math.log(0.7), 1 / 0.7, -1 / 0.7**2, 2 / 0.7**3, -6 / 0.7**4]
        np.testing.assert_allclose(derivs(x.log()), logs, rtol=1e-13)
        r = math.sqrt(0.7)
        sq = [r, 0.5 / r, -0.25 / r**3, 0.375 / r**5, -0.9375 / r**7]
        np.testing.assert_allclose(derivs(x.sqrt()), sq, rtol=1e-13)

    def test_division_and_negative_power_agree(self):
        x = series(1.3)
        np.testing.assert_allclose(derivs(1.0 / (x * x)), derivs(x**-2), rtol=1e-14)

    def test_abs_is_sign_times_series(self):
        x = series(-1.5)
        np.testing.assert_allclose(derivs(x.abs()), [1.5, -1, 0, 0, 0])

    @pytest.mark.parametrize(
        "make",
        [lambda x: x.sqrt(), lambda x: x.log(), lambda x: 1.0 / x, lambda x: x.abs()],
    )
    def test_singular_points_raise(self, make):
        with pytest.raises(TaylorDomainError):
            make(series(0.0))

    def test_negative_sqrt_raises(self):
        with pytest.raises(TaylorDomainError):
            series(-1.0).sqrt()


class TestParser:
    def test_precedence_and_unary_minus(self):
        f = parse_field("-x1^2 + 2*x2/4 - (1 - x1)", 2)
        assert f([3.0, 2.0]) == pytest.approx(-9 + 1 - (1 - 3))

    def test_power_binds_tighter_than_unary_minus(self):
        assert parse_field("-x1^2", 1)([3.0]) == -9.0

    def test_scientific_literals(self):
        assert parse_field("1.5e-1*x1 + 2E2", 1)([2.0]) == pytest.approx(200.3)

    def test_syntax_error_reports_position_and_token(self):
        with pytest.raises(ParseError) as info:
            parse_expression("x1 + * 2", 2)
        assert info.value.position == 5
        assert info.value.token == "*"

    def test_unknown_identifier(self):
        with pytest.raises(ParseError, match="unknown identifier"):
            parse_expression("sin(x1)", 1)

    def test_variable_index_exceeds_dim(self):
        with pytest.raises(ParseError, match="exceeds dim"):
            parse_expression("x3", 2)

    def test_partial_functions_fail_at_evaluation_not_parse(self):
        f = parse_field("sqrt(x1)", 1)
        assert f([4.0]) == 2.0
        with pytest.raises(EvaluationError):
            f([-1.0])
        g = parse_field("1/(x1 - 1)", 1)
        with pytest.raises(EvaluationError):
            g([1.0])

    def test_constant_subexpressions(self):
        f = parse_field("sqrt(4) * exp(0) * x1 + log(1)", 1)
        assert f([3.0]) == 6.0


X1, X2, X3 = sp.symbols("x1 x2 x3")

EXPRESSIONS = [
    ("x1^2*x2 - 3*x2^3 + x1*x3", X1**2 * X2 - 3 * X2**3 + X1 * X3),
    ("exp(x1 - x2)/(1 + x3^2)", sp.exp(X1 - X2) / (1 + X3**2)),
    ("sqrt(x1^2 + x2^2 + 1) * log(2 + x3^2)", sp.sqrt(X1**2 + X2**2 + 1) * sp.log(2 + X3**2)),
    ("(x1 + 2*x2 - x3)^-3", (X1 + 2 * X2 - X3) ** -3),
]


@pytest.mark.parametrize("text,sym", EXPRESSIONS)
def test_directional_jets_match_sympy(text, sym):
    rng = np.random.default_rng(11)
    f = parse_field(text, 3)
    t = sp.symbols("t")
    for _ in range(5):
        x0 = rng.uniform(0.5, 1.5, 3)
        v = rng.normal(size=3)
        line = sym.subs({X1: x0[0] + t * v[0], X2: x0[1] + t * v[1], X3: x0[2] + t * v[2]})
        want = [float(sp.diff(line, t, k).subs(t, 0)) for k in range(5)]
        got = directional_jet(f, x0, v, 4).derivs
        np.testing.assert_allclose(got, want, rtol=1e-10, atol=1e-12)


coef = st.floats(-3, 3, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(a=coef, b=coef, c=coef, x=st.floats(-2, 2), v=st.floats(-2, 2))
def test_quadratic_jet_property(a, b, c, x, v):
    # u(x + t v) for a one-variable quadratic: derivs are exact polynomials in t
    f = parse_field(f"({a!r})*x1^2 + ({b!r})*x1 + ({c!r})", 1)
    d = directional_jet(f, [x], [v], 4).derivs
    assert d[0] == pytest.approx(a * x * x + b * x + c, abs=1e-9)
    assert d[1] == pytest.approx((2 * a * x + b) * v, abs=1e-9)
    assert d[2] == pytest.approx(2 * a * v * v, abs=1e-9)
    assert d[3] == 0.0 and d[4] == 0.0


@settings(max_examples=40, deadline=None)
@given(x=st.floats(-3, 3))
def test_leibniz_rule_property(x):
    # d^k/dx^k (x e^x) = (x + k) e^x
    p = series(x)
    want = [(x + k) * math.exp(x) for k in range(5)]
    np.testing.assert_allclose(derivs(p * p.exp()), want, rtol=1e-12, atol=1e-12)
