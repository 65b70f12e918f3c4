"""Rulings of degenerate convex fields and the identities that hold on them.

Where ``det D^2u = 0`` and ``u`` is convex, the Hessian has a kernel and ``u``
is affine along segments in kernel directions.  This module finds kernel
directions, traces such segments (1-D rulings) with an explicit affinity
certificate, and evaluates the third/fourth-order identities that hold at
points of a ruling.  Lemma-style checks always take (or build) the ruling
certificate they depend on; nothing is assumed silently.

Affinity is tested as equality within tolerance,
``u(t a + (1 - t) b) = t u(a) + (1 - t) u(b)``, not as the one-sided
convexity inequality.
"""

from dataclasses import dataclass, replace

import numpy as np

from .field import DomainError, jet2_at, mixed_many
from .tolerances import DEFAULT


class RulingError(ValueError):
    """The requested direction or point is not on a certified ruling."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


def _unit(v):
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ValueError("direction must be non-zero")
    return v / norm


def _sign_normalize(v):
    nz = np.flatnonzero(np.abs(v) > 1e-12)
    if len(nz) and v[nz[0]] < 0:
        return -v
    return v


def hessian_kernel(field, x, tau_ker=DEFAULT.tau_ker):
    """Orthonormal near-null directions of the Hessian at ``x``.

    An eigenvector qualifies when ``|lambda| <= tau_ker * (1 + lambda_max)``.
    Directions are ordered by eigenvalue; each is signed so that its first
    non-zero component is positive.
    """
    _, _, hess = jet2_at(field, x)
    lam, vec = np.linalg.eigh(0.5 * (hess + hess.T))
    threshold = tau_ker * (1.0 + max(lam[-1], 0.0))
    return [_sign_normalize(vec[:, i]) for i in range(len(lam)) if abs(lam[i]) <= threshold]


def _kernel_ratio(field, x, g):
    _, _, hess = jet2_at(field, x)
    lam_max = max(np.linalg.eigvalsh(0.5 * (hess + hess.T))[-1], 0.0)
    return float(g @ hess @ g) / (1.0 + lam_max)


def _chord_residual(ts, us):
    lo, hi = np.argmin(ts), np.argmax(ts)
    if ts[hi] == ts[lo]:
        return 0.0
    slope = (us[hi] - us[lo]) / (ts[hi] - ts[lo])
    return float(np.max(np.abs(us - (us[lo] + slope * (ts - ts[lo])))))


@dataclass(frozen=True, eq=False)
class RulingSegment:
    """``{base + t * direction : t_minus <= t <= t_plus}`` with its certificate."""

    base: np.ndarray
    direction: np.ndarray
    t_minus: float
    t_plus: float
    residual: float
    samples: int
    kernel_residual: float
    stop_minus: str
    stop_plus: str
    tolerances: dict

    @property
    def endpoints(self):
        return self.base + self.t_minus * self.direction, self.base + self.t_plus * self.direction

    @property
    def length(self):
        return self.t_plus - self.t_minus

    def contains(self, x, atol=1e-9):
        d = np.asarray(x, dtype=float) - self.base
        t = float(d @ self.direction)
        off = np.linalg.norm(d - t * self.direction)
        scale = atol * (1.0 + np.linalg.norm(self.base))
        return off <= scale and self.t_minus - scale <= t <= self.t_plus + scale

    def to_dict(self):
        a, b = self.endpoints
        return {
            "base": self.base.tolist(),
            "direction": self.direction.tolist(),
            "t_minus": self.t_minus,
            "t_plus": self.t_plus,
            "start": a.tolist(),
            "end": b.tolist(),
            "affinity_residual": self.residual,
            "samples": self.samples,
            "kernel_residual": self.kernel_residual,
            "stop_minus": self.stop_minus,
            "stop_plus": self.stop_plus,
            "tolerances": self.tolerances,
        }

    def polyline(self):
        """One plot-ready line: start coordinates, end coordinates, residuals."""
        a, b = self.endpoints
        nums = list(a) + list(b) + [self.residual, self.kernel_residual]
        return " ".join(repr(float(v)) for v in nums)


def trace_ruling(field, x0, gamma, step=None, tol=DEFAULT):
    """Grow the affine segment through ``x0`` in direction ``gamma``.

    Each side is extended by ``step`` (default ``1e-2 * diameter`` of the
    domain) while the new point stays in the Hessian kernel and the chord
    residual of all visited samples stays below ``tau_aff * (1 + |u(x0)|)``.
    A failed step is refined by bisection to ``1e-4 * diameter``.  The domain
    box and the excluded-set guard end a side as well.
    """
    x0 = field.check(x0)[0]
    g = _unit(gamma)
    k0 = _kernel_ratio(field, x0, g)
    if k0 > tol.tau_ker:
        raise RulingError(
            f"direction {g.tolist()} is not a Hessian kernel direction at {x0.tolist()} "
            f"(relative residual {k0:.3g} > {tol.tau_ker:g})",
            residual=k0,
        )
    diameter = field.diameter
    step = 1e-2 * diameter if step is None else float(step)
    resolution = 1e-4 * diameter
    u0 = field(x0)
    aff_tol = tol.tau_aff * (1.0 + abs(u0))

    lo, hi = field.segment_limits(x0, g)
    box_lo, box_hi = replace(field, excluded=()).segment_limits(x0, g)

    ts = [0.0]
    us = [u0]
    worst_kernel = [k0]

    def attempt(t):
        x = x0 + t * g
        if not field.admissible(x)[0]:
            return "domain"
        k = _kernel_ratio(field, x, g)
        if k > tol.tau_ker:
            return "kernel"
        u = field(x)
        if _chord_residual(np.array(ts + [t]), np.array(us + [u])) > aff_tol:
            return "affinity"
        ts.append(t)
        us.append(u)
        worst_kernel.append(k)
        return None

    def extend(sign, limit, box_limit):
        limit = abs(limit)
        edge = "boundary" if abs(limit - abs(box_limit)) <= 1e-12 * (1 + limit) else "excluded-set"
        t = 0.0
        while t < limit:
            target = min(t + step, limit)
            reason = attempt(sign * target)
            if reason is None:
                t = target
                continue
            bad = target
            while bad - t > resolution:
                mid = 0.5 * (t + bad)
                if attempt(sign * mid) is None:
                    t = mid
                else:
                    bad = mid
            return t, edge if reason == "domain" else reason
        return t, edge

    t_plus, stop_plus = extend(1.0, hi, box_hi)
    t_minus, stop_minus = extend(-1.0, lo, box_lo)
    residual = _chord_residual(np.array(ts), np.array(us))
    return RulingSegment(
        base=x0,
        direction=g,
        t_minus=-t_minus,
        t_plus=t_plus,
        residual=residual,
        samples=len(ts),
        kernel_residual=float(max(worst_kernel)),
        stop_minus=stop_minus,
        stop_plus=stop_plus,
        tolerances=tol.to_dict(),
    )


def affinity_check(field, a, b, samples=99):
    """Max deviation of ``u`` from its chord on ``[a, b]`` at interior samples.

    The samples are ``t = k / (samples + 1)``, ``k = 1..samples``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    lo, hi = field.segment_limits(a, b - a)
    if not (lo <= 1e-12 and hi >= 1 - 1e-12):
        raise DomainError(f"segment [{a.tolist()}, {b.tolist()}] exits the domain", a)
    t = np.arange(1, samples + 1) / (samples + 1)
    pts = t[:, None] * a + (1.0 - t[:, None]) * b
    ua, ub = field.values(np.stack([a, b]))
    vals = field.values(pts)
    return float(np.max(np.abs(vals - (t * ua + (1.0 - t) * ub))))


def _certify(field, x0, gamma, ruling, tol):
    if ruling is None:
        return trace_ruling(field, x0, gamma, tol=tol)
    g = _unit(gamma)
    if abs(abs(g @ ruling.direction) - 1.0) > 1e-9 or not ruling.contains(x0):
        raise RulingError(f"point {np.asarray(x0).tolist()} is not on the supplied ruling")
    return ruling


@dataclass(frozen=True, eq=False)
class Flatness:
    """Third/fourth-order flatness data at a ruling point (unit directions)."""

    r1: float
    r2: float
    profile: np.ndarray
    profile_scale: float
    ruling: RulingSegment


def flatness_residuals(field, x0, gamma, eta, ruling=None, tol=DEFAULT, profile_points=21):
    """``|D^3u[eta, gamma, gamma]|``, ``D^4u[eta, eta, gamma, gamma]`` and a convexity profile.

    The profile holds second differences of ``t -> u_eta_eta(x0 + t gamma)``
    over the certified ruling; for convex ``u`` they are non-negative.
    ``gamma`` and ``eta`` are normalized first.
    """
    x0 = np.asarray(x0, dtype=float)
    ruling = _certify(field, x0, gamma, ruling, tol)
    g = ruling.direction if ruling.direction @ _unit(gamma) > 0 else -ruling.direction
    e = _unit(eta)
    r1 = abs(float(mixed_many(field, x0, e, g, 3)[0]))
    r2 = float(mixed_many(field, x0, e, g, 4)[0])
    pad = 0.01 * ruling.length
    ts = np.linspace(ruling.t_minus + pad, ruling.t_plus - pad, profile_points)
    pts = ruling.base + ts[:, None] * ruling.direction
    u_ee = field.line_derivatives(pts, e, 2)[2]
    profile = u_ee[:-2] - 2.0 * u_ee[1:-1] + u_ee[2:]
    return Flatness(r1, r2, profile, float(np.max(np.abs(u_ee))), ruling)


def gradient_sq_residuals(field, x0, gamma, ruling=None, tol=DEFAULT):
    """First and second ``t``-derivatives of ``|Du(x0 + t gamma)|^2`` at 0 (unit gamma)."""
    x0 = np.asarray(x0, dtype=float)
    _certify(field, x0, gamma, ruling, tol)
    g = _unit(gamma)
    _, p, hess = jet2_at(field, x0)
    hg = hess @ g
    third = float(mixed_many(field, x0, p, g, 3)[0]) if np.any(p) else 0.0
    return 2.0 * float(p @ hg), 2.0 * (float(hg @ hg) + third)


@dataclass(frozen=True)
class HtildeTerms:
    """``(Htilde)_gamma_gamma = I + II + III + IV`` with

    I = w Lap(u)_gg, II = 2 w_g Lap(u)_g, III = Lap(u) w_gg, IV = (u_k u_l u_kl)_gg,
    where ``w = 1 - |Du|^2``.
    """

    I: float
    II: float
    III: float
    IV: float

    @property
    def total(self):
        return self.I + self.II + self.III + self.IV


def htilde_terms(field, x0, gamma):
    """Second derivative of ``Htilde`` along unit ``gamma``, split into four terms.

    Valid at any point of a C^4 field; no ruling is needed for the algebra.
    """
    x0 = np.asarray(x0, dtype=float)
    g = _unit(gamma)
    n = field.dim
    eye = np.eye(n)
    _, p, hess = jet2_at(field, x0)
    hg = hess @ g
    hp = hess @ p
    lap = float(np.trace(hess))
    lap_g = float(np.sum(mixed_many(field, x0, np.tile(g, (n, 1)), eye, 3)))
    lap_gg = float(np.sum(mixed_many(field, x0, eye, g, 4)))

    etas = np.array([p, hp, g])
    d3 = mixed_many(field, x0, etas, g, 3)  # D3u[p,g,g], D3u[Hp,g,g]
    d3_p, d3_hp = float(d3[0]), float(d3[1])
    # T3[Hg, p, g] by polarization in its first two slots
    cross = mixed_many(field, x0, np.tile(g, (2, 1)), np.array([hg + p, hg - p]), 3)
    t3_hg_p = float(cross[0] - cross[1]) / 4.0
    d4_pp = float(mixed_many(field, x0, p, g, 4)[0])

    w = 1.0 - float(p @ p)
    w_g = -2.0 * float(p @ hg)
    w_gg = -2.0 * (float(hg @ hg) + d3_p)
    four = 2.0 * d3_hp + 2.0 * float(hg @ hess @ hg) + 4.0 * t3_hg_p + d4_pp
    return HtildeTerms(w * lap_gg, 2.0 * w_g * lap_g, lap * w_gg, four)


def htilde_second_derivative(field, x0, gamma, ruling=None, tol=DEFAULT):
    """``(Htilde)_gamma_gamma(x0)`` at a point of a certified ruling."""
    _certify(field, x0, gamma, ruling, tol)
    return htilde_terms(field, x0, gamma).total


def euclidean_pair_vectors(p):
    """Vectors ``eta_ij`` (i < j) with ``p_j`` in slot i and ``-p_i`` in slot j."""
    n = len(p)
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            eta = np.zeros(n)
            eta[i] = p[j]
            eta[j] = -p[i]
            out.append(eta)
    return np.array(out).reshape(-1, n)


def euclidean_combination_identity(field, x0, gamma, relative=False):
    """Residual of ``w Lap(u)_gg - D4u[p,p,g,g] = Lap(u)_gg + sum_{i<j} D4u[eta_ij,eta_ij,g,g]``.

    Here ``w = 1 + |p|^2`` and ``p = Du(x0)``.  This is an algebraic identity
    for every C^4 field.  With ``relative=True`` the residual is divided by the
    magnitude of the left-hand terms (absolute if both vanish).
    """
    x0 = np.asarray(x0, dtype=float)
    g = _unit(gamma)
    n = field.dim
    _, p, _ = jet2_at(field, x0)
    etas = euclidean_pair_vectors(p)
    block = np.concatenate([np.eye(n), p[None], etas])
    d4 = mixed_many(field, x0, block, g, 4)
    lap_gg = float(np.sum(d4[:n]))
    quad_gg = float(d4[n])
    w = 1.0 + float(p @ p)
    lhs = w * lap_gg - quad_gg
    rhs = lap_gg + float(np.sum(d4[n + 1 :]))
    residual = abs(lhs - rhs)
    if relative:
        scale = max(abs(w * lap_gg), abs(quad_gg))
        return residual / scale if scale > 0 else residual
    return residual


@dataclass(frozen=True, eq=False)
class LemmaResidualReport:
    """All ruling-point residuals for one ``(x0, gamma, eta)`` triple."""

    x0: np.ndarray
    gamma: np.ndarray
    eta: np.ndarray
    r1: float
    r2: float
    r3: float
    r4: float
    r5: float
    r6: float
    profile_min: float
    ruling: RulingSegment
    tau_lem: float
    tau_id: float

    @property
    def passed(self):
        t = self.tau_lem
        return (
            self.r1 <= t
            and self.r2 >= -t
            and self.r3 <= t
            and self.r4 <= t
            and self.r5 >= -t
            and self.r6 <= self.tau_id
            and self.profile_min >= -t
        )

    def to_dict(self):
        return {
            "x0": self.x0.tolist(),
            "gamma": self.gamma.tolist(),
            "eta": self.eta.tolist(),
            "r1_abs_d3_eta_gamma_gamma": self.r1,
            "r2_d4_eta_eta_gamma_gamma": self.r2,
            "r3_abs_grad_sq_gamma": self.r3,
            "r4_abs_grad_sq_gamma_gamma": self.r4,
            "r5_htilde_gamma_gamma": self.r5,
            "r6_euclidean_identity": self.r6,
            "profile_min_second_difference": self.profile_min,
            "passed": self.passed,
            "ruling": self.ruling.to_dict(),
        }


def lemma_report(field, x0, gamma, eta, ruling=None, tol=DEFAULT):
    """Evaluate every ruling-point residual at once.

    The convexity profile minimum is normalized by the profile's magnitude
    ``1 + max |u_eta_eta|``.
    """
    x0 = np.asarray(x0, dtype=float)
    ruling = _certify(field, x0, gamma, ruling, tol)
    flat = flatness_residuals(field, x0, gamma, eta, ruling=ruling, tol=tol)
    d1, d2 = gradient_sq_residuals(field, x0, gamma, ruling=ruling, tol=tol)
    r5 = htilde_second_derivative(field, x0, gamma, ruling=ruling, tol=tol)
    r6 = euclidean_combination_identity(field, x0, gamma, relative=True)
    return LemmaResidualReport(
        x0=x0,
        gamma=_unit(gamma),
        eta=_unit(eta),
        r1=flat.r1,
        r2=flat.r2,
        r3=abs(d1),
        r4=abs(d2),
        r5=r5,
        r6=r6,
        profile_min=float(np.min(flat.profile)) / (1.0 + flat.profile_scale),
        ruling=ruling,
        tau_lem=tol.tau_lem,
        tau_id=tol.tau_id,
    )
