"""Seeded verification suites behind ``gaussflat verify``.

Each suite returns a :class:`SuiteResult` whose ``passed`` flag compares the
worst observed residual against the relevant tolerance.
"""

from dataclasses import dataclass, field as dc_field

import numpy as np

from . import corpus as built_in
from .affinity import (
    RulingError,
    euclidean_combination_identity,
    gradient_sq_residuals,
    hessian_kernel,
    htilde_second_derivative,
    trace_ruling,
)
from .curvature import quantity_values
from .field import AnalyticField, fd_crosscheck, mixed_many
from .tolerances import DEFAULT

SUITES = ("euclid-identity", "lemmas", "cone-formulas", "fd-oracle")

FD_LIMITS = {1: 1e-6, 2: 1e-6, 3: 1e-5, 4: 1e-5}


@dataclass(frozen=True, eq=False)
class SuiteResult:
    suite: str
    passed: bool
    summary: dict
    rows: list = dc_field(default_factory=list)

    def to_dict(self):
        return {"suite": self.suite, "passed": self.passed, "summary": self.summary, "rows": self.rows}


def _unit_rows(rng, count, n):
    v = rng.normal(size=(count, n))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def euclid_identity_suite(trials=100, seed=1, cases=10, tol=DEFAULT):
    """Identity residuals on random degree-4 polynomials, ``n`` cycling through 2, 3, 4."""
    rng = np.random.default_rng(seed)
    rows = []
    for k in range(trials):
        n = 2 + k % 3
        f = built_in.random_polynomial_field(n, 4, rng)
        xs = rng.uniform(-2, 2, size=(cases, n))
        gs = _unit_rows(rng, cases, n)
        res = [euclidean_combination_identity(f, x, g, relative=True) for x, g in zip(xs, gs)]
        rows.append({"trial": k, "dim": n, "max_relative_residual": float(max(res))})
    worst = max(r["max_relative_residual"] for r in rows)
    summary = {"trials": trials, "cases_per_trial": cases, "seed": seed,
               "max_relative_residual": worst, "tau_id": tol.tau_id}
    return SuiteResult("euclid-identity", worst <= tol.tau_id, summary, rows)


def _ruling_points(field, count, rng):
    region = (np.maximum(field.lower, -5.0), np.minimum(field.upper, 5.0))
    return field.random_points(count, rng, region, min_distance=0.5)


def lemma_suite(points=3, etas=50, seed=2, tol=DEFAULT):
    """Ruling-point residuals on every developable convex corpus field.

    Every Hessian-kernel direction at each sampled point is traced into a
    certified ruling; only certified rulings are checked.  Cones additionally
    compare ``(Htilde)_gamma_gamma`` along the radial ruling with
    ``2 (n - 1)(1 - a^2) a / |x|^3``.
    """
    rng = np.random.default_rng(seed)
    fields = [f for f in built_in.corpus() if {"convex", "developable"} <= f.tags]
    cones = {built_in.cone(a, n).name: (a, n) for a, n in built_in.CONE_CASES}
    rows = []
    t = tol.tau_lem
    worst = {"d3": 0.0, "d4_min": np.inf, "grad_sq_g": 0.0, "grad_sq_gg": 0.0, "htilde_gg_min": np.inf,
             "cone_rel": 0.0}
    uncertified = 0
    for f in fields:
        for x0 in _ruling_points(f, points, rng):
            for g in hessian_kernel(f, x0, tol.tau_ker):
                try:
                    ruling = trace_ruling(f, x0, g, tol=tol)
                except RulingError:
                    uncertified += 1
                    continue
                e = _unit_rows(rng, etas, f.dim)
                d3 = float(np.max(np.abs(mixed_many(f, x0, e, g, 3))))
                d4 = float(np.min(mixed_many(f, x0, e, g, 4)))
                r3, r4 = gradient_sq_residuals(f, x0, g, ruling=ruling, tol=tol)
                h2 = htilde_second_derivative(f, x0, g, ruling=ruling, tol=tol)
                row = {"field": f.name, "x0": x0.tolist(), "gamma": g.tolist(),
                       "ruling_length": ruling.length, "max_abs_d3": d3, "min_d4": d4,
                       "abs_grad_sq_g": abs(r3), "abs_grad_sq_gg": abs(r4), "htilde_gg": h2}
                if f.name in cones:
                    a, n = cones[f.name]
                    r = np.linalg.norm(x0)
                    expected = 2 * (n - 1) * (1 - a * a) * a / r**3
                    row["htilde_gg_expected"] = expected
                    row["htilde_gg_relative_error"] = abs(h2 - expected) / expected
                    worst["cone_rel"] = max(worst["cone_rel"], row["htilde_gg_relative_error"])
                rows.append(row)
                worst["d3"] = max(worst["d3"], d3)
                worst["d4_min"] = min(worst["d4_min"], d4)
                worst["grad_sq_g"] = max(worst["grad_sq_g"], abs(r3))
                worst["grad_sq_gg"] = max(worst["grad_sq_gg"], abs(r4))
                worst["htilde_gg_min"] = min(worst["htilde_gg_min"], h2)
    passed = (
        bool(rows)
        and worst["d3"] <= t
        and worst["d4_min"] >= -t
        and worst["grad_sq_g"] <= t
        and worst["grad_sq_gg"] <= t
        and worst["htilde_gg_min"] >= -t
        and worst["cone_rel"] <= 1e-6
    )
    summary = {"fields": [f.name for f in fields], "rulings": len(rows), "uncertified": uncertified,
               "etas_per_ruling": etas, "seed": seed, "tau_lem": t, **worst}
    return SuiteResult("lemmas", passed, summary, rows)


def cone_formula_suite(points=20, seed=3, rtol=1e-9):
    """Cone ``a |x|`` curvature formulas for ``a`` in {0.3, 0.5, 0.9} and ``n`` in {2, 3, 4}."""
    rng = np.random.default_rng(seed)
    rows = []
    for a in (0.3, 0.5, 0.9):
        for n in (2, 3, 4):
            f = built_in.cone(a, n)
            xs = f.random_points(points, rng, (np.full(n, -10.0), np.full(n, 10.0)), 1e-3)
            _, grads, hess = f.jet2(xs)
            r = np.linalg.norm(xs, axis=1)
            checks = {
                "laplacian": (quantity_values(grads, hess, "laplacian"), a * (n - 1) / r),
                "mean-euclidean": (quantity_values(grads, hess, "mean-euclidean"),
                                   (n - 1) * a / (np.sqrt(1 + a * a) * r)),
                "mean-minkowski-tilde": (quantity_values(grads, hess, "mean-minkowski-tilde"),
                                         (1 - a * a) * (n - 1) * a / r),
            }
            for q, (got, want) in checks.items():
                rows.append({"a": a, "dim": n, "quantity": q,
                             "max_relative_error": float(np.max(np.abs(got - want) / want))})
    worst = max(r["max_relative_error"] for r in rows)
    summary = {"points_per_case": points, "seed": seed, "max_relative_error": worst, "rtol": rtol}
    return SuiteResult("cone-formulas", worst <= rtol, summary, rows)


def fd_oracle_suite(points=100, seed=4, orders=(1, 2, 3, 4)):
    """Exact derivatives against finite differences on every analytic corpus field."""
    rng = np.random.default_rng(seed)
    rows = []
    worst = {k: 0.0 for k in orders}
    for f in built_in.corpus():
        if not isinstance(f, AnalyticField):
            continue
        region = (np.maximum(f.lower, -10.0), np.minimum(f.upper, 10.0))
        xs = f.random_points(points, rng, region, min_distance=0.1)
        for k in orders:
            d = max(fd_crosscheck(f, x, k) for x in xs)
            worst[k] = max(worst[k], d)
            rows.append({"field": f.name, "order": k, "max_discrepancy": d})
    passed = all(worst[k] <= FD_LIMITS[k] for k in orders)
    summary = {"points_per_field": points, "seed": seed,
               "max_discrepancy_by_order": {str(k): v for k, v in worst.items()},
               "limits": {str(k): FD_LIMITS[k] for k in orders}}
    return SuiteResult("fd-oracle", passed, summary, rows)


def run_suite(name, trials=None, seed=1, tol=DEFAULT):
    """Dispatch by suite name; ``trials`` scales the suite's main sample count."""
    if name == "euclid-identity":
        return euclid_identity_suite(trials or 100, seed, tol=tol)
    if name == "lemmas":
        return lemma_suite(points=trials or 3, seed=seed, tol=tol)
    if name == "cone-formulas":
        return cone_formula_suite(points=trials or 20, seed=seed)
    if name == "fd-oracle":
        return fd_oracle_suite(points=trials or 100, seed=seed)
    raise ValueError(f"unknown suite {name!r}; expected one of {SUITES}")
