"""Built-in fields: the counterexamples, controls, and random families.

Tags used throughout:

``convex``       convex on the whole box (off the excluded set)
``developable``  ``det D^2u = 0`` wherever it is defined
``smooth``       C^4 on the whole box (no excluded set)
``affine``       ``u`` is affine
"""

from itertools import combinations_with_replacement

import numpy as np

from .field import parse_field


def _num(x):
    return repr(float(x))


def _linear_text(coeffs, shift=0.0):
    terms = [f"{_num(c)}*x{i + 1}" for i, c in enumerate(coeffs) if c != 0]
    text = " + ".join(terms) if terms else "0"
    if shift:
        text = f"{text} + {_num(shift)}"
    return f"({text})"


def example_1_1(a=0.5, c=1.0):
    """``a * sqrt(x1^2 + c)`` on R^2: convex, spacelike, developable, not affine."""
    if not (0 < a < 1 and c > 0):
        raise ValueError("need 0 < a < 1 and c > 0")
    return parse_field(
        f"{_num(a)}*sqrt(x1^2 + {_num(c)})",
        2,
        name=f"example-1.1(a={a:g},c={c:g})",
        tags={"convex", "developable", "smooth"},
    )


def cone(a=0.5, n=2):
    """``a * |x|``, singular at the origin."""
    body = " + ".join(f"x{i + 1}^2" for i in range(n))
    return parse_field(
        f"{_num(a)}*sqrt({body})",
        n,
        excluded=[(np.zeros(n), ())],
        name=f"cone(a={a:g})" if n == 2 else f"cone(a={a:g},n={n})",
        tags={"convex", "developable"},
    )


def partial_cone(a=0.5, k=1, n=2):
    """``a * sqrt(x1^2 + ... + xk^2)``, singular on ``{x1 = .. = xk = 0}``."""
    if not 1 <= k < n:
        raise ValueError("need 1 <= k < n")
    body = " + ".join(f"x{i + 1}^2" for i in range(k))
    return parse_field(
        f"{_num(a)}*sqrt({body})",
        n,
        excluded=[(np.zeros(n), np.eye(n)[k:])],
        name=f"v_k(a={a:g},k={k},n={n})",
        tags={"convex", "developable"},
    )


def affine(b, beta=0.0):
    b = np.asarray(b, dtype=float)
    label = ",".join(f"{v:g}" for v in b)
    return parse_field(
        _linear_text(b, beta),
        b.size,
        name=f"affine(b=({label}),beta={beta:g})",
        tags={"convex", "developable", "smooth", "affine"},
    )


def quadratic(n=2):
    """``|x|^2 / 2``: convex with identity Hessian, so not developable."""
    body = " + ".join(f"x{i + 1}^2" for i in range(n))
    return parse_field(f"0.5*({body})", n, name=f"quadratic(n={n})", tags={"convex", "smooth"})


PROFILES = ("sqrt", "quartic-root", "mixed")


def cylindrical(direction, profile="sqrt", alpha=0.5, c=1.0, shift=0.0, tilt=0.0, offset=0.0):
    """``phi(e . x)`` for a smooth convex, non-affine ``phi`` with decaying ``phi''``.

    Profiles, with ``s = e . x - shift``:

    ``sqrt``          ``alpha * sqrt(s^2 + c)``
    ``quartic-root``  ``alpha * (s^4 + c)^(1/4)``
    ``mixed``         half of each

    plus ``tilt * (e . x) + offset``.  ``|phi'| <= alpha + |tilt|``, so the
    graph is spacelike when that bound is below one.
    """
    e = np.asarray(direction, dtype=float)
    e = e / np.linalg.norm(e)
    s = f"({_linear_text(e)} - {_num(shift)})"
    sq = f"sqrt({s}^2 + {_num(c)})"
    qr = f"sqrt(sqrt({s}^4 + {_num(c)}))"
    if profile == "sqrt":
        body = f"{_num(alpha)}*{sq}"
    elif profile == "quartic-root":
        body = f"{_num(alpha)}*{qr}"
    elif profile == "mixed":
        body = f"{_num(alpha / 2)}*{sq} + {_num(alpha / 2)}*{qr}"
    else:
        raise ValueError(f"unknown profile {profile!r}")
    text = f"{body} + {_num(tilt)}*{_linear_text(e)} + {_num(offset)}"
    return parse_field(
        text,
        e.size,
        name=f"cylindrical({profile},alpha={alpha:.3g},c={c:.3g})",
        tags={"convex", "developable", "smooth"},
    )


def random_cylindrical_fields(count, seed=0):
    """Seeded family of spacelike cylindrical convex non-affine fields (n = 2, 3)."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        n = 2 + i % 2
        e = rng.normal(size=n)
        alpha = rng.uniform(0.1, 0.7)
        tilt = rng.uniform(-1, 1) * (0.95 - alpha) * 0.9
        out.append(
            cylindrical(
                e,
                profile=PROFILES[i % 3],
                alpha=alpha,
                c=rng.uniform(0.2, 3.0),
                shift=rng.uniform(-5, 5),
                tilt=tilt,
                offset=rng.uniform(-2, 2),
            )
        )
    return out


def random_polynomial_field(n, degree=4, rng=None, scale=1.0):
    """Dense polynomial of total degree ``degree`` with Gaussian coefficients."""
    rng = np.random.default_rng(rng)
    terms = []
    for d in range(degree + 1):
        for mono in combinations_with_replacement(range(n), d):
            powers = np.bincount(mono, minlength=n) if mono else np.zeros(n, dtype=int)
            factors = [f"x{i + 1}^{p}" if p > 1 else f"x{i + 1}" for i, p in enumerate(powers) if p]
            terms.append("*".join([_num(scale * rng.normal())] + factors))
    return parse_field(" + ".join(terms), n, name=f"poly(n={n},deg={degree})", tags={"smooth"})


CONE_CASES = ((0.5, 2), (0.3, 3))


def corpus():
    """Named built-in fields."""
    return [
        example_1_1(0.5, 1.0),
        example_1_1(0.3, 2.0),
        example_1_1(0.9, 0.5),
        *(cone(a, n) for a, n in CONE_CASES),
        partial_cone(0.5, 1, 2),
        partial_cone(0.5, 2, 3),
        affine([0.3, -0.4], 2.0),
        affine([0.1, 0.2, -0.5], -1.0),
        quadratic(2),
        cylindrical([1.0, 1.0], "sqrt", alpha=0.4, c=0.5, shift=1.0),
        cylindrical([1.0, -2.0, 0.5], "quartic-root", alpha=0.6, c=2.0),
    ]


def corpus_by_name(name):
    for f in corpus():
        if f.name == name:
            return f
    raise KeyError(f"no corpus field named {name!r}")
