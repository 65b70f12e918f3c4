"""Extrinsic geometry of the graph ``M_u = {(x, u(x))}``.

Both ambient signatures are handled.  With ``p = Du`` and ``w = 1 + |p|^2``
(Euclidean) or ``w = 1 - |p|^2`` (Minkowski), the shape operator is::

    S = |w|^(-1/2) (I -+ p p^T / w) D^2u

with ``-`` for Euclidean and ``+`` for Minkowski.  Mean curvature is the
*trace* of ``S`` (sum of principal curvatures, no division by ``n``) and
Gaussian curvature its determinant.  The weight-cleared Minkowski quantities
``Htilde = w Lap(u) + p^T D^2u p`` and ``Ktilde = det D^2u`` stay finite at
lightlike points.
"""

from dataclasses import dataclass

import numpy as np

from .field import jet2_at

EUCLIDEAN = "euclidean"
MINKOWSKI = "minkowski"
SIGNATURES = (EUCLIDEAN, MINKOWSKI)

DEFAULT_TAU_LIGHT = 1e-9
NEAR_LIGHTLIKE_W = 1e-9

QUANTITIES = ("laplacian", "mean-euclidean", "mean-minkowski-tilde", "mean-minkowski")


@dataclass(frozen=True)
class CausalType:
    kind: str
    margin: float

    def to_dict(self):
        return {"kind": self.kind, "margin": self.margin}


def classify_margin(margin, tau_light=DEFAULT_TAU_LIGHT):
    if margin < -tau_light:
        return "spacelike"
    if margin > tau_light:
        return "timelike"
    return "lightlike"


def causal_type(field, x, tau_light=DEFAULT_TAU_LIGHT):
    """Spacelike / lightlike / timelike classification from ``|Du(x)| - 1``."""
    _, grad, _ = jet2_at(field, x)
    margin = float(np.linalg.norm(grad) - 1.0)
    return CausalType(classify_margin(margin, tau_light), margin)


def hessian_determinant(hess):
    """``det`` of (batched) symmetrized Hessians as a product of eigenvalues."""
    sym = 0.5 * (hess + np.swapaxes(hess, -1, -2))
    return np.prod(np.linalg.eigvalsh(sym), axis=-1)


def ma_residual(field, x):
    """Monge-Ampere residual ``det D^2u(x)``."""
    _, _, hess = jet2_at(field, x)
    return float(hessian_determinant(hess))


def laplacian(field, x):
    _, _, hess = jet2_at(field, x)
    return float(np.trace(hess))


def _weight(grads, signature):
    sq = np.sum(grads * grads, axis=-1)
    return 1.0 + sq if signature == EUCLIDEAN else 1.0 - sq


def _inverse_sqrt_metric(grads, signature):
    """``g^(-1/2)`` for ``g = I +- p p^T`` in closed form (batched)."""
    n = grads.shape[-1]
    sq = np.sum(grads * grads, axis=-1)
    w = 1.0 + sq if signature == EUCLIDEAN else 1.0 - sq
    with np.errstate(divide="ignore", invalid="ignore"):
        coef = np.where(sq > 0, (1.0 / np.sqrt(w) - 1.0) / sq, 0.0)
    return np.eye(n) + coef[..., None, None] * grads[..., :, None] * grads[..., None, :]


def principal_curvatures(grads, hess, signature):
    """Sorted principal curvatures (batched) through ``g^(-1/2) h g^(-1/2)``.

    Only meaningful where ``w > 0``; other rows come back as NaN.
    """
    w = _weight(grads, signature)
    valid = w > 0
    root = np.sqrt(np.where(valid, np.abs(w), 1.0))
    r = _inverse_sqrt_metric(np.where(valid[..., None], grads, 0.0), signature)
    sym = r @ (0.5 * (hess + np.swapaxes(hess, -1, -2))) @ r / root[..., None, None]
    sym = 0.5 * (sym + np.swapaxes(sym, -1, -2))
    kappa = np.linalg.eigvalsh(sym)
    return np.where(valid[..., None], kappa, np.nan)


def quantity_values(grads, hess, quantity, tau_light=DEFAULT_TAU_LIGHT):
    """Curvature quantity used by the decay conditions (batched).

    ``mean-minkowski`` is NaN where the point is not spacelike (or is
    numerically lightlike); every other quantity is defined everywhere.
    """
    lap = np.trace(hess, axis1=-2, axis2=-1)
    if quantity == "laplacian":
        return lap
    quad = np.einsum("...i,...ij,...j->...", grads, hess, grads)
    if quantity == "mean-euclidean":
        w = _weight(grads, EUCLIDEAN)
        return w**-1.5 * (w * lap - quad)
    w = _weight(grads, MINKOWSKI)
    tilde = w * lap + quad
    if quantity == "mean-minkowski-tilde":
        return tilde
    if quantity == "mean-minkowski":
        margin = np.sqrt(np.sum(grads * grads, axis=-1)) - 1.0
        ok = (margin < -tau_light) & (w >= NEAR_LIGHTLIKE_W)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(ok, np.abs(w) ** -1.5 * tilde, np.nan)
    raise ValueError(f"unknown quantity {quantity!r}; expected one of {QUANTITIES}")


@dataclass(frozen=True, eq=False)
class CurvatureReport:
    """Per-point geometry of the graph in one signature.

    Minkowski reports at non-spacelike (or nearly lightlike) points have
    ``status == "tilde-only"``: the second fundamental form, shape operator,
    principal curvatures, ``mean`` and ``gauss`` are None there.
    """

    point: np.ndarray
    signature: str
    status: str
    value: float
    gradient: np.ndarray
    hessian: np.ndarray
    w: float
    metric: np.ndarray
    second_form: object
    shape_operator: object
    principal: object
    mean: object
    gauss: object
    mean_tilde: object
    gauss_tilde: object
    causal: CausalType

    def to_dict(self):
        def arr(a):
            return None if a is None else np.asarray(a).tolist()

        return {
            "point": arr(self.point),
            "signature": self.signature,
            "status": self.status,
            "value": self.value,
            "gradient": arr(self.gradient),
            "hessian": arr(self.hessian),
            "w": self.w,
            "metric": arr(self.metric),
            "second_fundamental_form": arr(self.second_form),
            "shape_operator": arr(self.shape_operator),
            "principal_curvatures": arr(self.principal),
            "mean_curvature": self.mean,
            "gauss_curvature": self.gauss,
            "mean_curvature_tilde": self.mean_tilde,
            "gauss_curvature_tilde": self.gauss_tilde,
            "causal_type": self.causal.kind,
            "causal_margin": self.causal.margin,
        }

    def csv_row(self):
        """Flatten :meth:`to_dict` into ``(header, values)`` for CSV output."""
        header, values = [], []
        for key, val in self.to_dict().items():
            if isinstance(val, list):
                flat = np.asarray(val, dtype=float)
                for idx in np.ndindex(flat.shape):
                    header.append(key + "".join(f"[{i}]" for i in idx))
                    values.append(float(flat[idx]))
            else:
                header.append(key)
                values.append(val)
        return header, values


def curvature_report(field, x, signature=EUCLIDEAN, tau_light=DEFAULT_TAU_LIGHT):
    if signature not in SIGNATURES:
        raise ValueError(f"signature must be one of {SIGNATURES}")
    x = np.asarray(x, dtype=float)
    value, p, hess = jet2_at(field, x)
    n = field.dim
    hess = 0.5 * (hess + hess.T)
    sq = float(p @ p)
    margin = float(np.sqrt(sq) - 1.0)
    causal = CausalType(classify_margin(margin, tau_light), margin)
    outer = np.outer(p, p)
    det = float(hessian_determinant(hess))

    if signature == EUCLIDEAN:
        w = 1.0 + sq
        metric = np.eye(n) + outer
        sign = -1.0
        full = True
        mean_tilde = gauss_tilde = None
    else:
        w = 1.0 - sq
        metric = np.eye(n) - outer
        sign = 1.0
        full = causal.kind == "spacelike" and w >= NEAR_LIGHTLIKE_W
        mean_tilde = float(w * np.trace(hess) + p @ hess @ p)
        gauss_tilde = det

    if not full:
        return CurvatureReport(
            x, signature, "tilde-only", value, p, hess, w, metric,
            None, None, None, None, None, mean_tilde, gauss_tilde, causal,
        )

    root = np.sqrt(abs(w))
    second_form = hess / root
    shape = (np.eye(n) + sign * outer / w) @ hess / root
    kappa = principal_curvatures(p, hess, signature)
    return CurvatureReport(
        x, signature, "full", value, p, hess, w, metric,
        second_form, shape, kappa, float(np.sum(kappa)), float(np.prod(kappa)),
        mean_tilde, gauss_tilde, causal,
    )
