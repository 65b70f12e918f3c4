"""Decay profiles, hypothesis scans and rigidity verdicts.

"``x -> infinity``" is replaced by a finite, increasing radius schedule and an
acceptance threshold ``eps_decay``.  Every verdict records its scope (box,
scan region, center, radii, sample counts, seed) and tolerances, and never
claims a true limit.  Sphere suprema are maxima over a seeded low-discrepancy
sample polished by a local pattern search, so they are lower bounds of the
true suprema.
"""

from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.stats import norm, qmc

from .curvature import (
    EUCLIDEAN,
    MINKOWSKI,
    QUANTITIES,
    causal_type,
    classify_margin,
    principal_curvatures,
    quantity_values,
)
from .field import DomainError, EvaluationError, jet2_at
from .tolerances import DEFAULT

OUTCOMES = (
    "hyperplane-consistent",
    "decay-fails",
    "not-developable",
    "not-convex",
    "timelike-points-present",
    "not-smooth",
    "conclusion-fails",
)

DEFAULT_RADII = (1.0, 10.0, 100.0)


def _sobol(dim, count, seed):
    engine = qmc.Sobol(d=dim, scramble=True, seed=seed)
    m = int(np.ceil(np.log2(max(count, 2))))
    return engine.random_base2(m)[:count]


def sphere_directions(n, count, seed):
    """Deterministic low-discrepancy unit vectors in ``R^n``."""
    if n == 1:
        return np.array([[1.0], [-1.0]])
    u = _sobol(n - 1 if n == 2 else n, count, seed)
    if n == 2:
        theta = 2 * np.pi * u[:, 0]
        return np.column_stack([np.cos(theta), np.sin(theta)])
    g = norm.ppf(np.clip(u, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def region_points(field, region, count, seed):
    """Seeded low-discrepancy points of ``region`` that the field admits."""
    lower, upper = region
    pts = qmc.scale(_sobol(field.dim, count, seed), lower, upper)
    return pts[field.admissible(pts)]


def _quantity(field, quantity, points, tol, substitute_tilde=False):
    _, grads, hess = field.jet2(points)
    q = quantity_values(grads, hess, quantity, tol.tau_light)
    if substitute_tilde and quantity == "mean-minkowski":
        q = np.where(np.isnan(q), quantity_values(grads, hess, "mean-minkowski-tilde"), q)
    return q


def quantity_at(field, quantity, x, tol=DEFAULT, substitute_tilde=False):
    """Single-point evaluation of a decay quantity (NaN where undefined)."""
    return float(_quantity(field, quantity, np.asarray(x, dtype=float)[None], tol, substitute_tilde)[0])


def _tangent_basis(y):
    n = y.size
    q, _ = np.linalg.qr(np.column_stack([y, np.eye(n)]))
    return q[:, 1:n].T


def _polish(field, quantity, center, radius, starts, values, step, tol, substitute_tilde):
    """Batched compass search on the sphere from several starting directions."""
    ys = starts.copy()
    best = values.copy()
    steps = np.full(len(ys), step)
    for _ in range(400):
        active = steps > 1e-11
        if not np.any(active):
            break
        cands, owner = [], []
        for k in np.flatnonzero(active):
            basis = _tangent_basis(ys[k])
            moves = np.concatenate([basis, -basis]) * steps[k]
            trial = ys[k] + moves
            trial /= np.linalg.norm(trial, axis=1, keepdims=True)
            cands.append(trial)
            owner.extend([k] * len(trial))
        cands = np.concatenate(cands)
        owner = np.array(owner)
        pts = center + radius * cands
        ok = field.admissible(pts)
        vals = np.full(len(pts), np.nan)
        if np.any(ok):
            vals[ok] = _quantity(field, quantity, pts[ok], tol, substitute_tilde)
        for k in np.flatnonzero(active):
            mine = np.flatnonzero((owner == k) & ~np.isnan(vals))
            if len(mine) and vals[mine].max() > best[k]:
                j = mine[np.argmax(vals[mine])]
                ys[k] = cands[j]
                best[k] = vals[j]
            else:
                steps[k] *= 0.5
    return ys, best


@dataclass(frozen=True, eq=False)
class SphereSup:
    quantity: str
    center: np.ndarray
    radius: float
    sup: float
    argmax: np.ndarray
    samples: int
    skipped: int
    undefined: int

    def to_dict(self):
        return {
            "quantity": self.quantity,
            "center": self.center.tolist(),
            "radius": self.radius,
            "sup": self.sup,
            "argmax": self.argmax.tolist(),
            "samples": self.samples,
            "skipped_near_excluded_set": self.skipped,
            "undefined_samples": self.undefined,
        }


def sphere_sup(field, quantity, center, radius, samples=512, seed=0, tol=DEFAULT,
               substitute_tilde=False, polish=True):
    """Estimate ``sup`` of a curvature quantity over the sphere ``|x - center| = radius``.

    Samples closer than the guard to the excluded set are skipped; samples
    where ``mean-minkowski`` is undefined are counted (or replaced by the tilde
    quantity when ``substitute_tilde``).  The best few samples are polished by
    a compass search along the sphere.
    """
    if quantity not in QUANTITIES:
        raise ValueError(f"unknown quantity {quantity!r}; expected one of {QUANTITIES}")
    center = np.asarray(center, dtype=float)
    radius = float(radius)
    if np.any(center - radius < field.lower - 1e-12) or np.any(center + radius > field.upper + 1e-12):
        raise DomainError(f"sphere of radius {radius:g} about {center.tolist()} exits the domain box")
    dirs = sphere_directions(field.dim, samples, seed)
    pts = center + radius * dirs
    ok = field.admissible(pts)
    dirs, pts = dirs[ok], pts[ok]
    if not len(pts):
        raise DomainError("no admissible sample on the sphere")
    vals = _quantity(field, quantity, pts, tol)
    undefined = int(np.sum(np.isnan(vals)))
    if undefined and substitute_tilde:
        vals = _quantity(field, quantity, pts, tol, substitute_tilde)
    elif undefined == len(vals):
        raise EvaluationError(f"{quantity} is undefined at every sample of the sphere")
    if polish and field.dim > 1:
        order = np.argsort(np.where(np.isnan(vals), -np.inf, vals))[::-1][:4]
        order = order[~np.isnan(vals[order])]
        step = np.pi / len(dirs) ** (1.0 / (field.dim - 1))
        ys, best = _polish(field, quantity, center, radius, dirs[order], vals[order], step, tol,
                           substitute_tilde)
        dirs = np.concatenate([dirs, ys])
        vals = np.concatenate([vals, best])
    k = int(np.nanargmax(vals))
    return SphereSup(
        quantity, center, radius, float(vals[k]), center + radius * dirs[k],
        int(samples), int(np.sum(~ok)), undefined,
    )


@dataclass(frozen=True, eq=False)
class DecayProfile:
    quantity: str
    center: np.ndarray
    radii: tuple
    sups: np.ndarray
    argmaxes: np.ndarray
    samples: int
    seed: int
    eps_decay: float
    undefined: tuple = ()

    @property
    def monotone(self):
        return bool(np.all(np.diff(self.sups) <= 0))

    @property
    def decaying(self):
        return bool(self.sups[-1] <= self.eps_decay)

    def to_dict(self):
        return {
            "quantity": self.quantity,
            "center": self.center.tolist(),
            "radii": list(self.radii),
            "sups": self.sups.tolist(),
            "argmaxes": self.argmaxes.tolist(),
            "samples_per_sphere": self.samples,
            "seed": self.seed,
            "eps_decay": self.eps_decay,
            "monotone": self.monotone,
            "decaying": self.decaying,
            "undefined_samples": list(self.undefined),
            "sups_are_lower_bounds": True,
        }

    def csv_rows(self):
        return [("R", "sup")] + [(r, s) for r, s in zip(self.radii, self.sups.tolist())]


def decay_profile(field, quantity, center, radii, samples=512, seed=0, tol=DEFAULT,
                  substitute_tilde=False):
    radii = tuple(float(r) for r in radii)
    if any(b <= a for a, b in zip(radii, radii[1:])) or radii[0] <= 0:
        raise ValueError("radius schedule must be positive and strictly increasing")
    center = np.asarray(center, dtype=float)
    results = [
        sphere_sup(field, quantity, center, r, samples, seed, tol, substitute_tilde) for r in radii
    ]
    return DecayProfile(
        quantity=quantity,
        center=center,
        radii=radii,
        sups=np.array([s.sup for s in results]),
        argmaxes=np.array([s.argmax for s in results]),
        samples=int(samples),
        seed=int(seed),
        eps_decay=tol.eps_decay,
        undefined=tuple(s.undefined for s in results),
    )


@dataclass(frozen=True, eq=False)
class TimelikeScan:
    outcome: str
    worst_margin: float
    witness: np.ndarray
    lightlike: int
    samples: int

    def to_dict(self):
        return {
            "outcome": self.outcome,
            "worst_margin": self.worst_margin,
            "witness": self.witness.tolist(),
            "lightlike_samples": self.lightlike,
            "samples": self.samples,
        }


def timelike_scan(field, region=None, samples=4096, seed=0, tau_light=DEFAULT.tau_light):
    """Look for points with ``|Du| > 1`` in ``region`` (default: the box)."""
    region = (field.lower, field.upper) if region is None else region
    pts = region_points(field, region, samples, seed)
    _, grads, _ = field.jet2(pts)
    margins = np.linalg.norm(grads, axis=1) - 1.0
    k = int(np.argmax(margins))
    kinds = [classify_margin(m, tau_light) for m in margins]
    outcome = "timelike-points-present" if kinds[k] == "timelike" else "no-timelike-points"
    return TimelikeScan(outcome, float(margins[k]), pts[k], kinds.count("lightlike"), len(pts))


@dataclass(frozen=True, eq=False)
class DevelopabilityScan:
    max_abs_det: float
    det_witness: np.ndarray
    min_eigenvalue: float
    eig_witness: np.ndarray
    eig_direction: np.ndarray
    det_ratio: float
    det_ratio_witness: np.ndarray
    convexity_ratio: float
    convexity_witness: np.ndarray
    samples: int

    def to_dict(self):
        return {
            "max_abs_det": self.max_abs_det,
            "det_witness": self.det_witness.tolist(),
            "min_eigenvalue": self.min_eigenvalue,
            "eig_witness": self.eig_witness.tolist(),
            "eig_direction": self.eig_direction.tolist(),
            "max_relative_det": self.det_ratio,
            "min_relative_eigenvalue": self.convexity_ratio,
            "samples": self.samples,
        }


def developability_scan(field, region=None, samples=4096, seed=0):
    """Extremes of ``det D^2u`` and of the smallest Hessian eigenvalue over ``region``.

    Also returns scale-free versions: ``|det| / (1 + lambda_max)^n`` and
    ``lambda_min / (1 + lambda_max)``.
    """
    region = (field.lower, field.upper) if region is None else region
    pts = region_points(field, region, samples, seed)
    _, _, hess = field.jet2(pts)
    sym = 0.5 * (hess + np.swapaxes(hess, 1, 2))
    lam, vec = np.linalg.eigh(sym)
    det = np.prod(lam, axis=1)
    scale = 1.0 + np.maximum(lam[:, -1], 0.0)
    det_rel = np.abs(det) / scale**field.dim
    eig_rel = lam[:, 0] / scale
    i = int(np.argmax(np.abs(det)))
    j = int(np.argmin(lam[:, 0]))
    k = int(np.argmax(det_rel))
    m = int(np.argmin(eig_rel))
    return DevelopabilityScan(
        float(np.abs(det[i])), pts[i], float(lam[j, 0]), pts[j], vec[j, :, 0],
        float(det_rel[k]), pts[k], float(eig_rel[m]), pts[m], len(pts),
    )


@dataclass(frozen=True, eq=False)
class Witness:
    kind: str
    point: np.ndarray
    value: float
    direction: object = None

    def to_dict(self):
        return {
            "kind": self.kind,
            "point": self.point.tolist(),
            "value": self.value,
            "direction": None if self.direction is None else np.asarray(self.direction).tolist(),
        }


@dataclass(frozen=True, eq=False)
class Verdict:
    outcome: str
    quantity: str
    witness: object
    scope: dict
    tolerances: dict
    profile: object = None
    details: dict = dc_field(default_factory=dict)

    def to_dict(self):
        return {
            "outcome": self.outcome,
            "quantity": self.quantity,
            "witness": None if self.witness is None else self.witness.to_dict(),
            "scope": self.scope,
            "tolerances": self.tolerances,
            "profile": None if self.profile is None else self.profile.to_dict(),
            "details": self.details,
        }


def _signature_of(quantity):
    return MINKOWSKI if quantity.startswith("mean-minkowski") else EUCLIDEAN


def rigidity_verdict(field, quantity, center=None, radii=DEFAULT_RADII, region=None,
                     tol=DEFAULT, seed=0, samples=4096, sphere_samples=512):
    """Run the hypothesis checks and the decay test; return a :class:`Verdict`.

    Pipeline: convexity -> developability -> no timelike points (Minkowski
    quantities only) -> decay of ``quantity`` over the radius schedule ->
    smoothness (an excluded singular set voids the implication) -> direct
    check of the conclusion (all principal curvatures, or the Laplacian, vanish on the
    region and ``u`` fits an affine function).  The first failing stage
    decides the outcome; every failure carries a witness.
    """
    if quantity not in QUANTITIES:
        raise ValueError(f"unknown quantity {quantity!r}; expected one of {QUANTITIES}")
    center = np.zeros(field.dim) if center is None else np.asarray(center, dtype=float)
    radii = tuple(float(r) for r in radii)
    if region is None:
        reach = max(radii)
        region = (np.maximum(center - reach, field.lower), np.minimum(center + reach, field.upper))
    region = (np.asarray(region[0], dtype=float), np.asarray(region[1], dtype=float))
    scope = {
        "box": {"lower": field.lower.tolist(), "upper": field.upper.tolist()},
        "region": {"lower": region[0].tolist(), "upper": region[1].tolist()},
        "center": center.tolist(),
        "radii": list(radii),
        "region_samples": int(samples),
        "sphere_samples": int(sphere_samples),
        "seed": int(seed),
        "limit_claim": "finite radius schedule only; no true limit is asserted",
    }
    if quantity == "mean-minkowski":
        scope["note"] = "mean-minkowski (full H^M, spacelike only) is an extrapolated mode"

    def verdict(outcome, witness=None, profile=None, **details):
        return Verdict(outcome, quantity, witness, scope, tol.to_dict(), profile, details)

    dev = developability_scan(field, region, samples, seed)
    details = {"developability": dev.to_dict()}
    if dev.convexity_ratio < -tol.eps_convex:
        x = dev.convexity_witness
        _, _, h = jet2_at(field, x)
        lam, vec = np.linalg.eigh(0.5 * (h + h.T))
        return verdict("not-convex", Witness("min-hessian-eigenvalue", x, float(lam[0]), vec[:, 0]),
                       **details)
    if dev.det_ratio > tol.eps_det:
        x = dev.det_ratio_witness
        _, _, h = jet2_at(field, x)
        det = float(np.prod(np.linalg.eigvalsh(0.5 * (h + h.T))))
        return verdict("not-developable", Witness("hessian-determinant", x, det), **details)

    if _signature_of(quantity) == MINKOWSKI:
        scan = timelike_scan(field, region, samples, seed, tol.tau_light)
        details["causal"] = scan.to_dict()
        if scan.outcome == "timelike-points-present":
            return verdict("timelike-points-present",
                           Witness("causal-margin", scan.witness, scan.worst_margin), **details)

    profile = decay_profile(field, quantity, center, radii, sphere_samples, seed, tol)
    if not profile.decaying:
        x = profile.argmaxes[-1]
        direction = (x - center) / radii[-1]
        return verdict("decay-fails", Witness("sphere-sup", x, float(profile.sups[-1]), direction),
                       profile, **details)

    if field.excluded:
        # decay held, but the implication chain needs u smooth everywhere
        p = field.excluded[0].project(center)
        return verdict("not-smooth", Witness("excluded-distance", p, float(field.excluded_distance(p)[0])),
                       profile, **details)

    pts = region_points(field, region, samples, seed + 1)
    values, grads, hess = field.jet2(pts)
    if quantity == "laplacian":
        size = np.abs(np.trace(hess, axis1=1, axis2=2))
        kind = "abs-laplacian"
    else:
        kappa = principal_curvatures(grads, hess, _signature_of(quantity))
        size = np.nanmax(np.abs(kappa), axis=1) if np.any(~np.isnan(kappa)) else np.zeros(len(pts))
        size = np.nan_to_num(size, nan=0.0)
        kind = "max-abs-principal-curvature"
    design = np.column_stack([pts, np.ones(len(pts))])
    coef, *_ = np.linalg.lstsq(design, values, rcond=None)
    scale = 1.0 + float(np.max(np.abs(values)))
    fit = np.abs(values - design @ coef) / scale
    details["conclusion"] = {"max_" + kind.replace("-", "_"): float(np.max(size)),
                             "max_relative_affine_fit_residual": float(np.max(fit)),
                             "affine_fit": {"slope": coef[:-1].tolist(), "offset": float(coef[-1]),
                                            "scale": scale}}
    if np.max(size) > tol.eps_conclusion:
        k = int(np.argmax(size))
        return verdict("conclusion-fails", Witness(kind, pts[k], float(size[k])), profile, **details)
    if np.max(fit) > tol.eps_conclusion:
        k = int(np.argmax(fit))
        return verdict("conclusion-fails", Witness("affine-fit-residual", pts[k], float(fit[k])),
                       profile, **details)
    return verdict("hyperplane-consistent", None, profile, **details)


def evaluate_witness(field, verdict, tol=DEFAULT):
    """Recompute a verdict witness's value from scratch at its point."""
    w = verdict.witness
    if w is None:
        return None
    x = w.point
    if w.kind == "excluded-distance":
        return float(field.excluded_distance(x)[0])
    if w.kind == "causal-margin":
        return causal_type(field, x, tol.tau_light).margin
    if w.kind == "sphere-sup":
        return quantity_at(field, verdict.quantity, x, tol)
    if w.kind == "affine-fit-residual":
        fit = verdict.details["conclusion"]["affine_fit"]
        u = float(field.values(np.asarray(x, dtype=float)[None])[0])
        return abs(u - float(np.dot(fit["slope"], x)) - fit["offset"]) / fit["scale"]
    _, grad, hess = jet2_at(field, x)
    lam = np.linalg.eigvalsh(0.5 * (hess + hess.T))
    if w.kind == "min-hessian-eigenvalue":
        return float(lam[0])
    if w.kind == "hessian-determinant":
        return float(np.prod(lam))
    if w.kind == "abs-laplacian":
        return abs(float(np.trace(hess)))
    if w.kind == "max-abs-principal-curvature":
        kappa = principal_curvatures(grad[None], hess[None], _signature_of(verdict.quantity))[0]
        return float(np.max(np.abs(kappa)))
    raise ValueError(f"cannot re-evaluate witness kind {w.kind!r}")
