import json

import numpy as np
import pytest

from gaussflat.corpus import affine, cone, corpus, example_1_1, partial_cone, quadratic
from gaussflat.field import DomainError, EvaluationError, parse_field
from gaussflat.rigidity import (
    decay_profile,
    developability_scan,
    evaluate_witness,
    rigidity_verdict,
    sphere_directions,
    sphere_sup,
    timelike_scan,
)
from gaussflat.tolerances import DEFAULT, Tolerances

QUANTITIES = ("laplacian", "mean-euclidean", "mean-minkowski-tilde")


def test_sphere_directions_are_unit_and_deterministic():
    for n in (2, 3, 4):
        d = sphere_directions(n, 256, 3)
        np.testing.assert_allclose(np.linalg.norm(d, axis=1), 1.0, rtol=1e-14)
        np.testing.assert_array_equal(d, sphere_directions(n, 256, 3))
        assert not np.array_equal(d, sphere_directions(n, 256, 4))


class TestSphereSup:
    def test_cone_laplacian(self):
        s = sphere_sup(cone(0.5), "laplacian", [0, 0], 10, seed=0)
        assert s.sup == pytest.approx(0.05, rel=1e-12)

    def test_example_tilde_at_pole(self):
        s = sphere_sup(example_1_1(0.5, 1.0), "mean-minkowski-tilde", [0, 0], 100, seed=0)
        assert s.sup == pytest.approx(0.5, abs=1e-9)
        assert abs(abs(s.argmax[1]) - 100) < 1e-3

    def test_argmax_on_sphere(self):
        s = sphere_sup(example_1_1(0.3, 2.0), "mean-euclidean", [1, -2], 37, seed=5)
        assert np.linalg.norm(s.argmax - [1, -2]) == pytest.approx(37, rel=1e-12)

    @pytest.mark.parametrize("q", QUANTITIES)
    def test_affine_zero(self, q):
        assert sphere_sup(affine([0.3, -0.4], 2.0), q, [0, 0], 50, seed=1).sup == 0

    def test_exits_domain(self):
        with pytest.raises(DomainError):
            sphere_sup(cone(0.5).restrict(-10, 10), "laplacian", [0, 0], 20)

    def test_undefined_samples_counted_or_substituted(self):
        f = parse_field("1.5*x1 + 0.1*x2^2", 2)
        with pytest.raises(EvaluationError):
            sphere_sup(f, "mean-minkowski", [0, 0], 1, samples=64)
        s = sphere_sup(f, "mean-minkowski", [0, 0], 1, samples=64, substitute_tilde=True)
        assert np.isfinite(s.sup) and s.undefined == 64

    def test_skips_excluded_neighbourhood(self):
        s = sphere_sup(partial_cone(0.5, 1, 2), "laplacian", [0, 0], 10, samples=64)
        assert s.sup == 0.0


class TestDecayProfile:
    def test_cone(self):
        p = decay_profile(cone(0.5), "laplacian", [0, 0], [1, 10, 100])
        np.testing.assert_allclose(p.sups, [0.5, 0.05, 0.005], rtol=1e-12)
        assert p.monotone and not p.decaying

    def test_cone_formulas_all_quantities(self):
        a, n = 0.3, 3
        p = {q: decay_profile(cone(a, n), q, np.zeros(n), [2, 20]).sups for q in QUANTITIES}
        r = np.array([2.0, 20.0])
        np.testing.assert_allclose(p["laplacian"], a * (n - 1) / r, rtol=1e-6)
        np.testing.assert_allclose(p["mean-euclidean"], (n - 1) * a / (np.sqrt(1 + a * a) * r), rtol=1e-6)
        np.testing.assert_allclose(p["mean-minkowski-tilde"], (1 - a * a) * (n - 1) * a / r, rtol=1e-6)

    def test_example_non_decay(self):
        p = decay_profile(example_1_1(0.5, 1.0), "mean-minkowski-tilde", [0, 0], [10, 100])
        np.testing.assert_allclose(p.sups, 0.5, atol=1e-9)
        assert not p.decaying

    def test_affine(self):
        p = decay_profile(affine([0.3, -0.4], 2.0), "laplacian", [0, 0], [1, 10, 100])
        np.testing.assert_array_equal(p.sups, 0)
        assert p.monotone and p.decaying

    def test_schedule_must_increase(self):
        with pytest.raises(ValueError):
            decay_profile(cone(0.5), "laplacian", [0, 0], [10, 1])

    def test_serialization(self):
        p = decay_profile(cone(0.5), "laplacian", [0, 0], [1, 10])
        doc = json.loads(json.dumps(p.to_dict()))
        assert doc["sups_are_lower_bounds"] and doc["radii"] == [1.0, 10.0]
        assert p.csv_rows()[0] == ("R", "sup")


class TestScans:
    def test_timelike(self):
        assert timelike_scan(example_1_1(0.5, 1.0)).outcome == "no-timelike-points"
        s = timelike_scan(parse_field("2*x1", 2))
        assert s.outcome == "timelike-points-present" and s.worst_margin == pytest.approx(1.0)
        s = timelike_scan(parse_field("x1", 2))
        assert s.outcome == "no-timelike-points" and s.lightlike == s.samples

    def test_developability(self):
        d = developability_scan(example_1_1(0.5, 1.0), (np.full(2, -20.0), np.full(2, 20.0)))
        assert d.max_abs_det <= 1e-13 and d.min_eigenvalue >= -1e-13
        assert developability_scan(quadratic(2)).max_abs_det == pytest.approx(1.0)
        box = (np.array([0.5, 0.5]), np.array([1.5, 1.5]))
        assert developability_scan(parse_field("x1^2*x2", 2), box).min_eigenvalue < 0


class TestVerdict:
    @pytest.mark.parametrize("q", QUANTITIES + ("mean-minkowski",))
    def test_affine_consistent(self, q):
        v = rigidity_verdict(affine([0.3, -0.4], 2.0), q)
        assert v.outcome == "hyperplane-consistent" and v.witness is None

    def test_example_decay_fails_along_ruling_axis(self):
        v = rigidity_verdict(example_1_1(0.5, 1.0), "mean-minkowski-tilde")
        assert v.outcome == "decay-fails"
        angle = np.degrees(np.arccos(abs(v.witness.direction[1])))
        assert angle <= 5

    @pytest.mark.parametrize("q", QUANTITIES)
    def test_quadratic_not_developable(self, q):
        assert rigidity_verdict(quadratic(2), q).outcome == "not-developable"

    def test_not_convex(self):
        f = parse_field("x1^2*x2", 2, lower=0.5, upper=1.5)
        v = rigidity_verdict(f, "laplacian", center=[1, 1], radii=[0.1, 0.4])
        assert v.outcome == "not-convex"

    def test_timelike(self):
        v = rigidity_verdict(parse_field("2*x1", 2), "mean-minkowski-tilde")
        assert v.outcome == "timelike-points-present"
        # the analysis quantity never consults the causal scan
        assert rigidity_verdict(parse_field("2*x1", 2), "laplacian").outcome == "hyperplane-consistent"

    def test_singular_with_decay_is_not_smooth(self):
        assert rigidity_verdict(partial_cone(0.5, 1, 2), "laplacian").outcome == "not-smooth"

    def test_scope_and_tolerances_recorded(self):
        tol = Tolerances(eps_decay=1e-5)
        v = rigidity_verdict(cone(0.5), "laplacian", radii=(1, 10), tol=tol, seed=3)
        doc = json.loads(json.dumps(v.to_dict()))
        assert doc["scope"]["radii"] == [1.0, 10.0] and doc["scope"]["seed"] == 3
        assert doc["scope"]["box"]["lower"] == [-1000.0, -1000.0]
        assert doc["tolerances"]["eps_decay"] == 1e-5

    def test_witness_fidelity(self):
        fields = corpus() + [parse_field("2*x1", 2), parse_field("x1^2*x2", 2, lower=0.5, upper=1.5)]
        for f in fields:
            for q in QUANTITIES:
                center = None if f.lower[0] < 0 else [1, 1]
                radii = (1, 10, 100) if center is None else (0.1, 0.4)
                v = rigidity_verdict(f, q, center=center, radii=radii)
                if v.witness is None:
                    continue
                again = evaluate_witness(f, v)
                assert again == pytest.approx(v.witness.value, rel=1e-10, abs=1e-300)

    def test_deterministic(self):
        a = rigidity_verdict(example_1_1(0.3, 2.0), "mean-euclidean", seed=4).to_dict()
        b = rigidity_verdict(example_1_1(0.3, 2.0), "mean-euclidean", seed=4).to_dict()
        assert json.dumps(a) == json.dumps(b)

    def test_conclusion_check_catches_loose_decay_threshold(self):
        # with eps_decay too loose the decay stage passes; the direct check must not
        v = rigidity_verdict(example_1_1(0.5, 1.0), "laplacian", tol=Tolerances(eps_decay=10.0))
        assert v.outcome == "conclusion-fails"
        assert v.witness.value == pytest.approx(evaluate_witness(example_1_1(0.5, 1.0), v), rel=1e-10)


def test_affine_fit_witness_on_nearly_flat_parabola():
    f = parse_field("1e-9*x1^2", 2)
    v = rigidity_verdict(f, "laplacian", seed=0)
    assert v.outcome == "conclusion-fails"
    assert v.witness.kind == "affine-fit-residual"
    assert v.witness.value > DEFAULT.eps_conclusion
    assert v.witness.value == pytest.approx(evaluate_witness(f, v), rel=1e-8)
