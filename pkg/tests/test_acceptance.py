"""Acceptance criteria 1-8.

Each test prints one ``CRITERION k: PASS|FAIL`` line with the measured
numbers, then asserts at the stated tolerance.
"""

import time

import numpy as np
import pytest

from gaussflat.affinity import affinity_check, trace_ruling
from gaussflat.corpus import affine, cone, corpus, example_1_1, random_cylindrical_fields
from gaussflat.curvature import causal_type, curvature_report, laplacian, quantity_values
from gaussflat.field import grid_field, sample_grid
from gaussflat.rigidity import decay_profile, rigidity_verdict
from gaussflat.verify import euclid_identity_suite, fd_oracle_suite, lemma_suite

EXAMPLE_PARAMS = ((0.5, 1.0), (0.3, 2.0), (0.9, 0.5))


@pytest.fixture
def report(capsys):
    def emit(k, ok, detail):
        with capsys.disabled():
            print(f"\nCRITERION {k}: {'PASS' if ok else 'FAIL'} ({detail})")

    return emit


def test_criterion_1_cone_formulas(report):
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    worst = 0.0
    for a in (0.3, 0.5, 0.9):
        for n in (2, 3, 4):
            f = cone(a, n)
            for x in f.random_points(20, rng, (np.full(n, -10.0), np.full(n, 10.0)), 1e-3):
                r = np.linalg.norm(x)
                got = (
                    laplacian(f, x),
                    curvature_report(f, x, "euclidean").mean,
                    curvature_report(f, x, "minkowski").mean_tilde,
                )
                want = (a * (n - 1) / r, (n - 1) * a / (np.sqrt(1 + a * a) * r), (1 - a * a) * (n - 1) * a / r)
                worst = max(worst, *(abs(g - w) / w for g, w in zip(got, want)))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 5
    report(1, ok, f"max relative error {worst:.3g}, {elapsed:.2f} s")
    assert worst <= 1e-9
    assert elapsed < 5


def test_criterion_2_example_counterexample(report):
    a = 0.5
    f = example_1_1(a, 1.0)
    box = f.restrict(-50, 50)
    rng = np.random.default_rng(202)
    pts = rng.uniform(-50, 50, (10_000, 2))
    _, grads, hess = f.jet2(pts)
    max_det = float(np.max(np.abs(np.linalg.det(hess))))
    max_grad = float(np.max(np.linalg.norm(grads, axis=1)))
    kinds = {causal_type(f, x).kind for x in pts[:: 10]}
    margins = np.linalg.norm(grads, axis=1) - 1.0
    all_spacelike = kinds == {"spacelike"} and bool(np.all(margins < -1e-9))

    chord_res, full = 0.0, True
    for x in rng.uniform(-50, 50, (20, 2)):
        seg = trace_ruling(box, x, [0, 1])
        full &= seg.stop_minus == seg.stop_plus == "boundary"
        full &= np.allclose(seg.endpoints[0][1], -50) and np.allclose(seg.endpoints[1][1], 50)
        chord_res = max(chord_res, seg.residual, affinity_check(box, *seg.endpoints))

    outcomes = [rigidity_verdict(f, q).outcome for q in ("laplacian", "mean-euclidean", "mean-minkowski-tilde")]
    ok = (
        max_det <= 1e-12 and max_grad <= a and all_spacelike and full and chord_res <= 1e-10
        and outcomes == ["decay-fails"] * 3
    )
    report(2, ok, f"max|det| {max_det:.3g}, max|Du| {max_grad!r}, spacelike {all_spacelike}, "
                  f"full chords {full}, chord residual {chord_res:.3g}, verdicts {outcomes}")
    assert max_det <= 1e-12
    assert max_grad <= a
    assert all_spacelike
    assert full and chord_res <= 1e-10
    assert outcomes == ["decay-fails"] * 3


def test_criterion_3_identity_suite(report):
    start = time.perf_counter()
    res = euclid_identity_suite(trials=100, seed=303, cases=10)
    elapsed = time.perf_counter() - start
    worst = res.summary["max_relative_residual"]
    dims = sorted({r["dim"] for r in res.rows})
    ok = worst <= 1e-8 and elapsed < 30 and dims == [2, 3, 4]
    report(3, ok, f"max relative residual {worst:.3g} over {len(res.rows)} fields x 10, {elapsed:.1f} s")
    assert dims == [2, 3, 4] and len(res.rows) == 100
    assert worst <= 1e-8
    assert elapsed < 30


def test_criterion_4_lemma_suite(report):
    res = lemma_suite(points=3, etas=50, seed=404)
    s = res.summary
    cone_rows = [r for r in res.rows if "htilde_gg_expected" in r]
    ok = (
        s["rulings"] > 0 and s["uncertified"] == 0 and cone_rows
        and s["d3"] <= 1e-8 and s["d4_min"] >= -1e-8
        and s["grad_sq_g"] <= 1e-8 and s["grad_sq_gg"] <= 1e-8
        and s["htilde_gg_min"] >= -1e-8 and s["cone_rel"] <= 1e-6
    )
    report(4, ok, f"{s['rulings']} rulings on {len(s['fields'])} fields; max|D3| {s['d3']:.3g}, "
                  f"min D4 {s['d4_min']:.3g}, max|(|Du|^2)_g| {s['grad_sq_g']:.3g}, "
                  f"max|(|Du|^2)_gg| {s['grad_sq_gg']:.3g}, min Htilde_gg {s['htilde_gg_min']:.3g}, "
                  f"cone rel. error {s['cone_rel']:.3g}")
    assert s["rulings"] > 0 and s["uncertified"] == 0 and cone_rows
    assert s["d3"] <= 1e-8
    assert s["d4_min"] >= -1e-8
    assert s["grad_sq_g"] <= 1e-8 and s["grad_sq_gg"] <= 1e-8
    assert s["htilde_gg_min"] >= -1e-8
    assert s["cone_rel"] <= 1e-6


def test_criterion_5_decay_profiles(report):
    radii = (1, 10, 100)
    p = decay_profile(cone(0.5), "laplacian", [0, 0], radii, seed=505)
    cone_err = float(np.max(np.abs(p.sups - [0.5, 0.05, 0.005])))
    ex_err, non_decay = 0.0, True
    for a, c in EXAMPLE_PARAMS:
        q = decay_profile(example_1_1(a, c), "mean-minkowski-tilde", [0, 0], radii, seed=505)
        ex_err = max(ex_err, float(np.max(np.abs(q.sups - a / np.sqrt(c)))))
        non_decay &= not q.decaying
    ok = cone_err <= 1e-6 and ex_err <= 1e-6 and non_decay and p.monotone
    report(5, ok, f"cone laplacian max error {cone_err:.3g}, example tilde max error {ex_err:.3g}, "
                  f"non-decay detected {non_decay}")
    assert cone_err <= 1e-6 and p.monotone
    assert ex_err <= 1e-6
    assert non_decay


def test_criterion_6_theorem_consistency(report):
    start = time.perf_counter()
    fields = corpus() + random_cylindrical_fields(50, seed=606) + [affine([0.2, 0.1, -0.3, 0.4], 0.5)]
    bad, affine_ok, counts = [], True, {}
    for f in fields:
        for q in ("laplacian", "mean-euclidean", "mean-minkowski-tilde", "mean-minkowski"):
            v = rigidity_verdict(f, q, seed=606)
            counts[v.outcome] = counts.get(v.outcome, 0) + 1
            if "affine" in f.tags:
                affine_ok &= v.outcome == "hyperplane-consistent"
            elif v.outcome == "hyperplane-consistent":
                bad.append((f.name, q))
    elapsed = time.perf_counter() - start
    ok = not bad and affine_ok and elapsed < 120
    report(6, ok, f"{len(fields)} fields, outcomes {counts}, non-affine consistent {bad}, "
                  f"affine all consistent {affine_ok}, {elapsed:.1f} s")
    assert not bad
    assert affine_ok
    assert elapsed < 120


def test_criterion_7_fd_oracle(report):
    res = fd_oracle_suite(points=100, seed=707)
    worst = res.summary["max_discrepancy_by_order"]
    ok = worst["1"] <= 1e-6 and worst["2"] <= 1e-6 and worst["3"] <= 1e-5 and worst["4"] <= 1e-5
    report(7, ok, "max discrepancy by order " + ", ".join(f"{k}: {v:.3g}" for k, v in worst.items()))
    assert worst["1"] <= 1e-6 and worst["2"] <= 1e-6
    assert worst["3"] <= 1e-5 and worst["4"] <= 1e-5


def test_criterion_8_grid_parity(report):
    exact = example_1_1(0.5, 1.0)
    grid = grid_field(sample_grid(exact, [-5, -5], 0.05, 201))
    rng = np.random.default_rng(808)
    pts = rng.uniform(grid.lower, grid.upper, (100, 2))
    _, g_grad, g_hess = grid.jet2(pts)
    _, a_grad, a_hess = exact.jet2(pts)
    lap_err = float(np.max(np.abs(np.trace(g_hess, axis1=1, axis2=2) - np.trace(a_hess, axis1=1, axis2=2))))
    ht = "mean-minkowski-tilde"
    ht_err = float(np.max(np.abs(quantity_values(g_grad, g_hess, ht) - quantity_values(a_grad, a_hess, ht))))
    ok = lap_err <= 1e-3 and ht_err <= 1e-3
    report(8, ok, f"max |Lap error| {lap_err:.3g}, max |Htilde error| {ht_err:.3g} at 100 interior points")
    assert lap_err <= 1e-3
    assert ht_err <= 1e-3
