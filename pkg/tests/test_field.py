import numpy as np
import pytest

from gaussflat.corpus import cone, example_1_1, random_polynomial_field
from gaussflat.field import (
    AffineSubspace,
    DomainError,
    directional_jet,
    fd_crosscheck,
    jet2_at,
    mixed_directional,
    mixed_many,
    parse_field,
)


@pytest.fixture
def ex11():
    return example_1_1(0.5, 1.0)


def test_parse_matches_builtin_example(ex11):
    f = parse_field("0.5*sqrt(x1^2+1)", 2)
    rng = np.random.default_rng(0)
    for x in rng.uniform(-20, 20, (10, 2)):
        assert f(x) == ex11(x)


def test_jet2_example(ex11):
    value, grad, hess = jet2_at(ex11, [0.0, 0.0])
    assert value == 0.5
    np.testing.assert_array_equal(grad, [0.0, 0.0])
    np.testing.assert_allclose(hess, np.diag([0.5, 0.0]), atol=1e-15)


def test_jet2_affine():
    f = parse_field("3*x1+2", 2)
    _, grad, hess = jet2_at(f, [4.0, -7.0])
    np.testing.assert_allclose(grad, [3.0, 0.0], atol=1e-14)
    np.testing.assert_allclose(hess, 0.0, atol=1e-14)


def test_jet2_cone():
    _, grad, hess = jet2_at(cone(0.5), [3.0, 4.0])
    np.testing.assert_allclose(grad, 0.5 * np.array([0.6, 0.8]), rtol=1e-15)
    assert np.trace(hess) == pytest.approx(0.1, rel=1e-14)


def test_hessian_is_symmetric_and_matches_sympy_values():
    f = parse_field("x1^3*x2 + exp(x2)*x1", 2)
    x1, x2 = 0.3, -1.2
    _, grad, hess = jet2_at(f, [x1, x2])
    np.testing.assert_allclose(grad, [3 * x1**2 * x2 + np.exp(x2), x1**3 + x1 * np.exp(x2)], rtol=1e-13)
    want = [[6 * x1 * x2, 3 * x1**2 + np.exp(x2)], [3 * x1**2 + np.exp(x2), x1 * np.exp(x2)]]
    np.testing.assert_allclose(hess, want, rtol=1e-12)
    np.testing.assert_array_equal(hess, hess.T)


class TestDirectionalJet:
    def test_example_along_e1(self, ex11):
        np.testing.assert_allclose(
            directional_jet(ex11, [0, 0], [1, 0]).derivs, [0.5, 0, 0.5, 0, -1.5], atol=1e-15
        )

    def test_example_along_e2(self, ex11):
        np.testing.assert_array_equal(directional_jet(ex11, [0, 0], [0, 1]).derivs, [0.5, 0, 0, 0, 0])

    def test_affine(self):
        f = parse_field("3*x1 - x2 + 2", 2)
        d = directional_jet(f, [1.0, 5.0], [0.3, 0.4]).derivs
        np.testing.assert_allclose(d, [0.0, 0.5, 0, 0, 0], atol=1e-15)

    def test_degree_above_four_rejected(self, ex11):
        with pytest.raises(ValueError):
            directional_jet(ex11, [0, 0], [1, 0], degree=5)

    def test_second_derivative_nonnegative_for_convex(self, ex11):
        rng = np.random.default_rng(3)
        for x, v in zip(rng.uniform(-9, 9, (30, 2)), rng.normal(size=(30, 2))):
            assert directional_jet(ex11, x, v, 2).derivs[2] >= -1e-14


class TestMixed:
    def test_cubic_constant_tensor(self):
        f = parse_field("x1^2*x2", 2)
        assert mixed_directional(f, [0.7, -2.1], [0, 1], [1, 0], 3) == pytest.approx(2.0, abs=1e-13)

    def test_example_independent_of_x2(self, ex11):
        assert mixed_directional(ex11, [1, 2], [1, 0], [0, 1], 3) == 0.0

    def test_quadratic_fourth_vanishes(self):
        f = parse_field("x1^2 - 3*x1*x2 + 0.5*x2^2", 2)
        assert mixed_directional(f, [1, 1], [0.3, 0.2], [1, -2], 4) == pytest.approx(0, abs=1e-12)

    def test_polarization_matches_coordinate_tensor(self):
        # u = x1^2 x2^2: D4u[e1,e1,e2,e2] = 4, D3u[e1,e2,e2] = 4 x1
        f = parse_field("x1^2*x2^2", 2)
        assert mixed_directional(f, [1.5, 0.2], [1, 0], [0, 1], 4) == pytest.approx(4.0, rel=1e-12)
        assert mixed_directional(f, [1.5, 0.2], [1, 0], [0, 1], 3) == pytest.approx(6.0, rel=1e-12)

    def test_many_agrees_with_single(self):
        f = random_polynomial_field(3, 4, 5)
        rng = np.random.default_rng(5)
        etas, gammas = rng.normal(size=(6, 3)), rng.normal(size=(6, 3))
        for order in (3, 4):
            many = mixed_many(f, [0.1, 0.2, 0.3], etas, gammas, order)
            single = [mixed_directional(f, [0.1, 0.2, 0.3], e, g, order) for e, g in zip(etas, gammas)]
            np.testing.assert_allclose(many, single, rtol=1e-13)

    def test_bad_order(self, ex11):
        with pytest.raises(ValueError):
            mixed_directional(ex11, [0, 0], [1, 0], [0, 1], 2)


class TestDomain:
    def test_outside_box(self, ex11):
        with pytest.raises(DomainError, match="outside"):
            jet2_at(ex11, [2000.0, 0.0])

    def test_excluded_set(self):
        with pytest.raises(DomainError, match="excluded"):
            jet2_at(cone(0.5), [0.0, 1e-8])

    def test_restrict(self, ex11):
        small = ex11.restrict(-1, 1)
        with pytest.raises(DomainError):
            small([2.0, 0.0])

    def test_segment_limits_respect_excluded_set(self):
        f = cone(0.5).restrict(-10, 10)
        lo, hi = f.segment_limits([3.0, 4.0], [0.6, 0.8])
        assert hi == pytest.approx(7.5)
        assert lo == pytest.approx(-5.0, abs=2e-6)
        assert f.admissible(np.array([[3.0, 4.0]]) + lo * np.array([0.6, 0.8]))[0]

    def test_affine_subspace_distance_and_projection(self):
        s = AffineSubspace.through([1.0, 0.0, 0.0], [[0.0, 0.0, 2.0]])
        assert s.distance(np.array([[1.0, 3.0, 7.0]]))[0] == pytest.approx(3.0)
        np.testing.assert_allclose(s.project([4.0, 3.0, 7.0]), [1.0, 0.0, 7.0])


class TestFdCrosscheck:
    def test_example_order_two(self, ex11):
        assert fd_crosscheck(ex11, [1, 2], 2) <= 1e-6

    def test_polynomial_order_four(self):
        f = random_polynomial_field(2, 4, 1)
        assert fd_crosscheck(f, [0.4, -0.9], 4) <= 1e-5

    def test_affine_absolute_fallback(self):
        f = parse_field("0.3*x1 - 0.4*x2 + 2", 2)
        assert fd_crosscheck(f, [3.0, -1.0], 2) <= 1e-12

    def test_detects_wrong_derivatives(self, ex11, monkeypatch):
        # corrupt the exact side: the oracle must notice
        real = type(ex11)._line_derivs

        def skewed(self, points, directions, degree):
            out = real(self, points, directions, degree)
            out[-1] *= 1.001
            return out

        monkeypatch.setattr(type(ex11), "_line_derivs", skewed)
        assert fd_crosscheck(ex11, [1, 2], 2) > 1e-4
