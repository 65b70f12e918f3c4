"""Scalar fields ``u: R^n -> R`` and their derivatives up to fourth order.

Two backends share one interface:

* :class:`AnalyticField` wraps a parsed expression.  Derivatives along a line
  come from truncated Taylor arithmetic and are exact up to rounding; mixed
  partials are recovered by polarization of pure directional derivatives.
* :class:`GridField` wraps uniformly sampled data.  Derivative tensors are
  formed at the nodes by central differences and resampled at query points
  with cubic splines.

Every field carries a finite axis-aligned box (the stand-in for ``R^n``) and an
optional excluded singular set: points closer than ``guard`` to it are refused.
"""

import csv
import io
from dataclasses import dataclass, replace
from functools import cached_property
from itertools import combinations, combinations_with_replacement
from math import factorial
from pathlib import Path

import mpmath
import numpy as np
from scipy import ndimage

from .expr import BinaryOp, Negate, Number, Power, Variable, parse_expression
from .taylor import MAX_DEGREE, Taylor, TaylorDomainError

DEFAULT_HALF_WIDTH = 1000.0
ANALYTIC_GUARD = 1e-6
GRID_MARGIN = 4  # nodes needed on each side for fourth-derivative stencils
MIN_GRID_COUNT = 2 * GRID_MARGIN + 1


class DomainError(ValueError):
    """A point lies outside the field's box or too close to its excluded set."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = None if point is None else np.asarray(point, dtype=float)


class EvaluationError(ArithmeticError):
    """A partial function (sqrt, log, division, abs) failed at ``point``."""

    def __init__(self, message, point=None):
        if point is not None:
            message = f"{message} at x={np.asarray(point).tolist()}"
        super().__init__(message)
        self.point = None if point is None else np.asarray(point, dtype=float)


@dataclass(frozen=True, eq=False)
class AffineSubspace:
    """``point + span(basis)``; ``basis`` rows are orthonormal (possibly none)."""

    point: np.ndarray
    basis: np.ndarray

    @classmethod
    def through(cls, point, directions=()):
        point = np.asarray(point, dtype=float)
        directions = np.asarray(directions, dtype=float).reshape(-1, point.size)
        if len(directions):
            q, r = np.linalg.qr(directions.T)
            keep = np.abs(np.diag(r)) > 1e-12
            basis = q[:, keep].T
        else:
            basis = np.zeros((0, point.size))
        return cls(point, basis)

    def _normal_part(self, d):
        if len(self.basis):
            d = d - (d @ self.basis.T) @ self.basis
        return d

    def distance(self, points):
        return np.linalg.norm(self._normal_part(np.asarray(points) - self.point), axis=-1)

    def project(self, x):
        x = np.asarray(x, dtype=float)
        return x - self._normal_part(x - self.point)

    def forbidden_interval(self, x0, direction, radius):
        """Open interval of ``t`` with ``dist(x0 + t d) < radius``, or None."""
        a = self._normal_part(np.asarray(x0, dtype=float) - self.point)
        b = self._normal_part(np.asarray(direction, dtype=float))
        bb = b @ b
        if bb < 1e-300:
            return (-np.inf, np.inf) if a @ a < radius**2 else None
        t_mid = -(a @ b) / bb
        closest = a + t_mid * b
        slack = radius**2 - closest @ closest
        if slack <= 0:
            return None
        half = np.sqrt(slack / bb)
        return (t_mid - half, t_mid + half)

    def to_dict(self):
        return {"point": self.point.tolist(), "basis": self.basis.tolist()}


@dataclass(frozen=True, eq=False, kw_only=True)
class ScalarField:
    """Common behaviour of field backends.  Instances are immutable."""

    dim: int
    lower: np.ndarray
    upper: np.ndarray
    excluded: tuple = ()
    guard: float = ANALYTIC_GUARD
    name: str = ""
    tags: frozenset = frozenset()

    backend = "abstract"

    # -- domain -------------------------------------------------------------

    @property
    def diameter(self):
        return float(np.linalg.norm(self.upper - self.lower))

    def restrict(self, lower, upper):
        """Copy of the field on a different box (broadcast scalars per axis)."""
        lower = np.broadcast_to(np.asarray(lower, dtype=float), (self.dim,)).copy()
        upper = np.broadcast_to(np.asarray(upper, dtype=float), (self.dim,)).copy()
        if np.any(upper <= lower):
            raise ValueError("empty box")
        return replace(self, lower=lower, upper=upper)

    def excluded_distance(self, points):
        points = np.atleast_2d(points)
        if not self.excluded:
            return np.full(len(points), np.inf)
        return np.min([s.distance(points) for s in self.excluded], axis=0)

    def admissible(self, points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        slack = 1e-12 * (1.0 + np.abs(self.upper - self.lower))
        inside = np.all((points >= self.lower - slack) & (points <= self.upper + slack), axis=1)
        return inside & (self.excluded_distance(points) >= self.guard)

    def check(self, points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[-1] != self.dim:
            raise ValueError(f"expected points of dimension {self.dim}, got {points.shape[-1]}")
        ok = self.admissible(points)
        if not np.all(ok):
            bad = points[np.flatnonzero(~ok)[0]]
            slack = 1e-12 * (1.0 + np.abs(self.upper - self.lower))
            if np.any(bad < self.lower - slack) or np.any(bad > self.upper + slack):
                raise DomainError(f"point {bad.tolist()} outside the domain box", bad)
            raise DomainError(
                f"point {bad.tolist()} within {self.guard:g} of the excluded singular set", bad
            )
        return points

    def segment_limits(self, x0, direction):
        """Admissible ``t``-interval around 0 of the line ``x0 + t * direction``."""
        x0 = np.asarray(x0, dtype=float)
        d = np.asarray(direction, dtype=float)
        lo, hi = -np.inf, np.inf
        for i in range(self.dim):
            if d[i] != 0:
                t1 = (self.lower[i] - x0[i]) / d[i]
                t2 = (self.upper[i] - x0[i]) / d[i]
                lo, hi = max(lo, min(t1, t2)), min(hi, max(t1, t2))
            elif not self.lower[i] <= x0[i] <= self.upper[i]:
                return 0.0, 0.0
        for s in self.excluded:
            gap = s.forbidden_interval(x0, d, self.guard)
            if gap is None:
                continue
            # nudge inward so the end point itself clears the guard after rounding
            if gap[1] <= 0:
                lo = max(lo, gap[1] + 1e-12 * (1.0 + abs(gap[1])))
            elif gap[0] >= 0:
                hi = min(hi, gap[0] - 1e-12 * (1.0 + abs(gap[0])))
            else:
                return 0.0, 0.0
        return float(lo), float(hi)

    def random_points(self, count, rng, region=None, min_distance=None):
        """Uniform admissible points from ``region`` (default: the field box)."""
        lower, upper = (self.lower, self.upper) if region is None else region
        need = self.guard if min_distance is None else max(min_distance, self.guard)
        out = []
        while sum(len(o) for o in out) < count:
            cand = rng.uniform(lower, upper, size=(2 * count + 8, self.dim))
            keep = self.admissible(cand) & (self.excluded_distance(cand) >= need)
            out.append(cand[keep])
        return np.concatenate(out)[:count]

    # -- evaluation ---------------------------------------------------------

    def values(self, points):
        points = self.check(points)
        return self._line_derivs(points, np.zeros_like(points), 0)[0]

    def __call__(self, x):
        return float(self.values(np.asarray(x, dtype=float)[None])[0])

    def line_derivatives(self, points, directions, degree):
        """``d^k/dt^k u(x + t v)`` at ``t = 0``; returns shape ``(degree + 1, m)``."""
        if not 0 <= degree <= MAX_DEGREE:
            raise ValueError(f"degree must be in 0..{MAX_DEGREE}")
        points = self.check(points)
        directions = np.broadcast_to(np.asarray(directions, dtype=float), points.shape)
        return self._line_derivs(points, directions, degree)

    def jet2(self, points):
        """Values ``(m,)``, gradients ``(m, n)`` and Hessians ``(m, n, n)``."""
        return self._jet2(self.check(points))

    def _line_derivs(self, points, directions, degree):
        raise NotImplementedError

    def _jet2(self, points):
        raise NotImplementedError

    def describe(self):
        return {
            "name": self.name,
            "dim": self.dim,
            "backend": self.backend,
            "box": {"lower": self.lower.tolist(), "upper": self.upper.tolist()},
            "excluded": [s.to_dict() for s in self.excluded],
            "guard": self.guard,
            "tags": sorted(self.tags),
        }


@dataclass(frozen=True, eq=False, kw_only=True)
class AnalyticField(ScalarField):
    expr: object
    source: str

    backend = "analytic"

    def _line_derivs(self, points, directions, degree):
        xs = [Taylor.variable(points[:, i], directions[:, i], degree) for i in range(self.dim)]
        try:
            out = self.expr.evaluate(xs)
        except TaylorDomainError as exc:
            raise EvaluationError(str(exc), points[min(exc.index, len(points) - 1)]) from None
        if isinstance(out, Taylor):
            derivs = out.derivatives()
        else:
            derivs = np.zeros((degree + 1, len(points)))
            derivs[0] = out
        finite = np.all(np.isfinite(derivs), axis=0)
        if not np.all(finite):
            raise EvaluationError("non-finite result", points[np.flatnonzero(~finite)[0]])
        return derivs

    @cached_property
    def _hessian_probes(self):
        n = self.dim
        eye = np.eye(n)
        pairs = list(combinations(range(n), 2))
        probes = [eye[i] for i in range(n)]
        probes += [eye[i] + eye[j] for i, j in pairs]
        probes += [eye[i] - eye[j] for i, j in pairs]
        return np.array(probes), pairs

    def _jet2(self, points):
        n, m = self.dim, len(points)
        probes, pairs = self._hessian_probes
        k = len(probes)
        d = self._line_derivs(np.repeat(points, k, axis=0), np.tile(probes, (m, 1)), 2)
        d = d.reshape(3, m, k)
        values = d[0, :, 0].copy()
        grads = d[1, :, :n].copy()
        hess = np.zeros((m, n, n))
        idx = np.arange(n)
        hess[:, idx, idx] = d[2, :, :n]
        for p, (i, j) in enumerate(pairs):
            off = (d[2, :, n + p] - d[2, :, n + len(pairs) + p]) / 4.0
            hess[:, i, j] = off
            hess[:, j, i] = off
        return values, grads, hess

    def describe(self):
        info = super().describe()
        info["source"] = self.source
        return info


# -- grid backend -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GridSpec:
    """Uniform samples: ``values[i1, .., in] = u(origin + i * spacing)``."""

    origin: np.ndarray
    spacing: np.ndarray
    counts: tuple
    values: np.ndarray

    def __post_init__(self):
        origin = np.atleast_1d(np.asarray(self.origin, dtype=float))
        n = origin.size
        spacing = np.broadcast_to(np.asarray(self.spacing, dtype=float), (n,)).copy()
        counts = tuple(int(c) for c in np.broadcast_to(np.asarray(self.counts), (n,)))
        values = np.asarray(self.values, dtype=float)
        if np.any(spacing <= 0):
            raise ValueError("grid spacing must be positive")
        if min(counts) < MIN_GRID_COUNT:
            raise ValueError(
                f"insufficient stencil support: need at least {MIN_GRID_COUNT} samples per axis, "
                f"got counts={counts}"
            )
        if values.size != int(np.prod(counts)):
            raise ValueError(f"expected {int(np.prod(counts))} samples, got {values.size}")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "values", values.reshape(counts))

    @classmethod
    def from_axes(cls, axes, values):
        """Build from per-axis coordinate arrays; non-uniform spacing is rejected."""
        origin, spacing = [], []
        for ax in axes:
            ax = np.asarray(ax, dtype=float)
            steps = np.diff(ax)
            if len(steps) == 0 or not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
                raise ValueError("non-uniform grid spacing is not supported")
            origin.append(ax[0])
            spacing.append(steps[0])
        return cls(np.array(origin), np.array(spacing), tuple(len(a) for a in axes), values)

    @property
    def dim(self):
        return self.origin.size


def _node_derivative_tensors(values, spacing, order):
    """Symmetric derivative tensors at grid nodes, keyed by sorted index tuples."""
    n = values.ndim
    if order == 0:
        return {(): values}
    if order == 1:
        return {(i,): np.gradient(values, spacing[i], axis=i) for i in range(n)}
    lower = _node_derivative_tensors(values, spacing, order - 1)
    out = {}
    for idx in combinations_with_replacement(range(n), order):
        if order == 2 and idx[0] == idx[1]:
            i = idx[0]
            arr = np.gradient(lower[(i,)], spacing[i], axis=i)
            inner = [slice(None)] * n
            lo, mid, hi = list(inner), list(inner), list(inner)
            lo[i], mid[i], hi[i] = slice(None, -2), slice(1, -1), slice(2, None)
            # compact three-point stencil in the interior
            arr[tuple(mid)] = (
                values[tuple(hi)] - 2 * values[tuple(mid)] + values[tuple(lo)]
            ) / spacing[i] ** 2
            out[idx] = arr
            continue
        parts = []
        for axis in sorted(set(idx)):
            pos = idx.index(axis)
            rest = idx[:pos] + idx[pos + 1 :]
            parts.append(np.gradient(lower[rest], spacing[axis], axis=axis))
        out[idx] = np.mean(parts, axis=0)
    return out


def _multinomial(idx):
    counts = np.bincount(idx) if idx else np.array([], dtype=int)
    denom = 1
    for c in counts:
        denom *= factorial(int(c))
    return factorial(len(idx)) // denom


@dataclass(frozen=True, eq=False, kw_only=True)
class GridField(ScalarField):
    spec: GridSpec
    interp_order: int = 3

    backend = "grid"

    def _tensors(self, order):
        cache = self.__dict__.setdefault("_tensor_cache", {})
        if order not in cache:
            raw = _node_derivative_tensors(self.spec.values, self.spec.spacing, order)
            if self.interp_order > 1:
                raw = {
                    k: ndimage.spline_filter(v, order=self.interp_order, mode="mirror")
                    for k, v in raw.items()
                }
            cache[order] = raw
        return cache[order]

    def _sample(self, arr, coords):
        return ndimage.map_coordinates(
            arr, coords, order=self.interp_order, mode="mirror", prefilter=False
        )

    def _coords(self, points):
        return ((points - self.spec.origin) / self.spec.spacing).T

    def _line_derivs(self, points, directions, degree):
        coords = self._coords(points)
        out = np.zeros((degree + 1, len(points)))
        for k in range(degree + 1):
            for idx, arr in self._tensors(k).items():
                weight = _multinomial(idx) * np.prod(directions[:, list(idx)], axis=1)
                if np.any(weight):
                    out[k] += weight * self._sample(arr, coords)
        return out

    def _jet2(self, points):
        coords = self._coords(points)
        n, m = self.dim, len(points)
        values = self._sample(self._tensors(0)[()], coords)
        grads = np.column_stack([self._sample(self._tensors(1)[(i,)], coords) for i in range(n)])
        hess = np.zeros((m, n, n))
        for (i, j), arr in self._tensors(2).items():
            hess[:, i, j] = hess[:, j, i] = self._sample(arr, coords)
        return values, grads, hess


def grid_field(spec, *, excluded=(), name="grid", tags=(), interp_order=3):
    """Wrap a :class:`GridSpec` as a field.

    Derivatives are only available at interior points with full stencil
    support, i.e. at least four nodes away from the grid edge.  Accuracy is
    ``O(h^2)`` for all orders, with a larger constant for orders 3 and 4.
    """
    h = spec.spacing
    lower = spec.origin + GRID_MARGIN * h
    upper = spec.origin + (np.array(spec.counts) - 1 - GRID_MARGIN) * h
    subspaces = tuple(
        s if isinstance(s, AffineSubspace) else AffineSubspace.through(*s) for s in excluded
    )
    return GridField(
        dim=spec.dim,
        lower=lower,
        upper=upper,
        excluded=subspaces,
        guard=10.0 * float(np.max(h)),
        name=name,
        tags=frozenset(tags),
        spec=spec,
        interp_order=interp_order,
    )


def sample_grid(field, origin, spacing, counts):
    """Sample ``field`` on a uniform grid (row-major order)."""
    origin = np.atleast_1d(np.asarray(origin, dtype=float))
    spacing = np.broadcast_to(np.asarray(spacing, dtype=float), origin.shape)
    counts = tuple(int(c) for c in np.broadcast_to(np.asarray(counts), origin.shape))
    axes = [origin[i] + spacing[i] * np.arange(counts[i]) for i in range(origin.size)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, origin.size)
    box_field = field.restrict(mesh.min(axis=0), mesh.max(axis=0))
    return GridSpec(origin, spacing, counts, box_field.values(mesh))


def write_grid_csv(spec, path=None):
    """Serialize a grid.  Returns the text when ``path`` is None.

    Layout: a header line ``origin,spacing,counts``; one line holding the three
    space-separated vectors; then the samples in row-major order, one per line.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["origin", "spacing", "counts"])
    writer.writerow(
        [
            " ".join(repr(float(v)) for v in spec.origin),
            " ".join(repr(float(v)) for v in spec.spacing),
            " ".join(str(c) for c in spec.counts),
        ]
    )
    for v in spec.values.ravel():
        writer.writerow([repr(float(v))])
    text = buf.getvalue()
    if path is None:
        return text
    Path(path).write_text(text)
    return None


def read_grid_csv(source):
    """Parse grid CSV from a path or from CSV text (see :func:`write_grid_csv`)."""
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source):
        source = Path(source).read_text()
    rows = [r for r in csv.reader(io.StringIO(source)) if r]
    if len(rows) < 2 or [c.strip() for c in rows[0]] != ["origin", "spacing", "counts"]:
        raise ValueError("grid CSV must start with the header 'origin,spacing,counts'")
    origin, spacing, counts = (np.array(c.split(), dtype=float) for c in rows[1])
    samples = [float(v) for r in rows[2:] for v in r if v.strip()]
    return GridSpec(origin, spacing, tuple(int(c) for c in counts), np.array(samples))


# -- operations ----------------------------------------------------------------


def parse_field(source, dim, *, lower=None, upper=None, excluded=(), name=None, tags=()):
    """Parse an expression in ``x1..x{dim}`` into an analytic field.

    The default box is ``[-1000, 1000]^dim``.  ``excluded`` holds
    :class:`AffineSubspace` objects or ``(point, directions)`` pairs.
    """
    expr = parse_expression(source, dim)
    lower = -DEFAULT_HALF_WIDTH if lower is None else lower
    upper = DEFAULT_HALF_WIDTH if upper is None else upper
    subspaces = tuple(
        s if isinstance(s, AffineSubspace) else AffineSubspace.through(*s) for s in excluded
    )
    return AnalyticField(
        dim=dim,
        lower=np.broadcast_to(np.asarray(lower, dtype=float), (dim,)).copy(),
        upper=np.broadcast_to(np.asarray(upper, dtype=float), (dim,)).copy(),
        excluded=subspaces,
        name=source if name is None else name,
        tags=frozenset(tags),
        expr=expr,
        source=source,
    )


def jet2_at(field, x):
    """Value, gradient and Hessian of ``field`` at a single point."""
    values, grads, hess = field.jet2(np.asarray(x, dtype=float)[None])
    return float(values[0]), grads[0], hess[0]


def jet2_batch(field, points):
    return field.jet2(points)


@dataclass(frozen=True, eq=False)
class Jet:
    """Derivatives ``d^k/dt^k u(point + t * direction)`` at ``t = 0``."""

    point: np.ndarray
    direction: np.ndarray
    degree: int
    derivs: np.ndarray

    def to_dict(self):
        return {
            "point": self.point.tolist(),
            "direction": self.direction.tolist(),
            "degree": self.degree,
            "derivs": self.derivs.tolist(),
        }


def directional_jet(field, x0, v, degree=MAX_DEGREE):
    x0 = np.asarray(x0, dtype=float)
    v = np.asarray(v, dtype=float)
    if degree > MAX_DEGREE:
        raise ValueError(f"degree {degree} exceeds the supported maximum {MAX_DEGREE}")
    derivs = field.line_derivatives(x0[None], v[None], degree)[:, 0]
    return Jet(x0, v, degree, derivs)


def mixed_many(field, x0, etas, gammas, order):
    """Vectorized :func:`mixed_directional` over rows of ``etas`` and ``gammas``."""
    x0 = np.asarray(x0, dtype=float)
    etas = np.atleast_2d(np.asarray(etas, dtype=float))
    gammas = np.broadcast_to(np.atleast_2d(np.asarray(gammas, dtype=float)), etas.shape)
    k = len(etas)
    if order == 3:
        dirs = np.concatenate([gammas + etas, gammas - etas, etas])
        c = field.line_derivatives(np.broadcast_to(x0, dirs.shape), dirs, 3)[3].reshape(3, k)
        return (c[0] - c[1] - 2.0 * c[2]) / 6.0
    if order == 4:
        dirs = np.concatenate([gammas + etas, gammas - etas, gammas, etas])
        q = field.line_derivatives(np.broadcast_to(x0, dirs.shape), dirs, 4)[4].reshape(4, k)
        return (q[0] + q[1] - 2.0 * q[2] - 2.0 * q[3]) / 12.0
    raise ValueError("order must be 3 (D3u[eta,gamma,gamma]) or 4 (D4u[eta,eta,gamma,gamma])")


def mixed_directional(field, x0, eta, gamma, order):
    """Mixed derivative by polarization of pure directional jets.

    ``order=3`` returns ``D^3u[eta, gamma, gamma]``; ``order=4`` returns
    ``D^4u[eta, eta, gamma, gamma]``.  Directions are used as given (no
    normalization).
    """
    return float(mixed_many(field, x0, eta, gamma, order)[0])


def _probe_directions(n):
    eye = np.eye(n)
    dirs = [eye[i] for i in range(n)]
    for i, j in combinations(range(n), 2):
        dirs.append((eye[i] + eye[j]) / np.sqrt(2))
        dirs.append((eye[i] - eye[j]) / np.sqrt(2))
    return np.array(dirs)


_STENCILS = {
    1: ((-1, 1), (-0.5, 0.5)),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5)),
    4: ((-2, -1, 0, 1, 2), (1.0, -4.0, 6.0, -4.0, 1.0)),
}


_MP_DIGITS = 50


def _mp_eval(node, xs):
    """Evaluate an expression tree on mpmath scalars (independent of the series code)."""
    if isinstance(node, Number):
        return mpmath.mpf(node.value)
    if isinstance(node, Variable):
        return xs[node.index]
    if isinstance(node, Negate):
        return -_mp_eval(node.operand, xs)
    if isinstance(node, BinaryOp):
        a, b = _mp_eval(node.left, xs), _mp_eval(node.right, xs)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if b == 0:
            raise EvaluationError("division by zero in finite-difference oracle")
        return a / b
    if isinstance(node, Power):
        b = _mp_eval(node.base, xs)
        if b == 0 and node.exponent < 0:
            raise EvaluationError("division by zero in finite-difference oracle")
        return b**node.exponent
    a = _mp_eval(node.arg, xs)
    if (node.func == "sqrt" and a < 0) or (node.func == "log" and a <= 0):
        raise EvaluationError(f"{node.func} outside its domain in finite-difference oracle")
    return {"sqrt": mpmath.sqrt, "exp": mpmath.exp, "log": mpmath.log, "abs": abs}[node.func](a)


def _mp_stencil(expr, x0, direction, order, h):
    offsets, weights = _STENCILS[order]
    total = mpmath.mpf(0)
    for k, wt in zip(offsets, weights):
        xs = [mpmath.mpf(a) + k * h * mpmath.mpf(d) for a, d in zip(x0, direction)]
        total += wt * _mp_eval(expr, xs)
    return total / h**order


def fd_crosscheck(field, x0, order):
    """Relative discrepancy between exact and finite-difference derivatives.

    Compares the ``order``-th directional derivatives along the coordinate
    axes and the diagonals ``(e_i +- e_j)/sqrt(2)``, which determine the whole
    derivative tensor, against central differences computed from a separate
    evaluation of the expression in 50-digit arithmetic.  Two step sizes are
    combined by one Richardson step, leaving an ``O(h^4)`` truncation error
    with ``h ~ 1e-6``.  The discrepancy is ``max |exact - fd|`` divided by
    ``max |exact|``, or absolute when the exact tensor vanishes.
    """
    if not isinstance(field, AnalyticField):
        raise TypeError("fd_crosscheck needs an analytic field")
    if order not in _STENCILS:
        raise ValueError("order must be in 1..4")
    x0 = field.check(x0)[0]
    dirs = _probe_directions(field.dim)
    exact = field._line_derivs(np.tile(x0, (len(dirs), 1)), dirs, order)[order]

    reach = 1e-6 * (1.0 + np.linalg.norm(x0))
    if field.excluded:
        reach = min(reach, 1e-3 * float(field.excluded_distance(x0)[0]))
    approx = np.empty(len(dirs))
    with mpmath.workdps(_MP_DIGITS):
        h = mpmath.mpf(reach)
        for i, d in enumerate(dirs):
            coarse = _mp_stencil(field.expr, x0, d, order, h)
            fine = _mp_stencil(field.expr, x0, d, order, h / 2)
            approx[i] = float(fine + (fine - coarse) / 3)
    scale = float(np.max(np.abs(exact)))
    diff = float(np.max(np.abs(exact - approx)))
    return diff / scale if scale > 1e-12 else diff
