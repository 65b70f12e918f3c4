"""Why decay matters: a convex, developable, spacelike graph that is not a plane.

u(x) = a * sqrt(x1^2 + c) solves det D^2u = 0, is convex, has |Du| < 1, and
is not affine.  Its Laplacian and mean curvatures stay at a / sqrt(c) along
the whole x2-axis, so no decay hypothesis holds.  Run it with

    python3 demos/01_counterexample.py
"""

import numpy as np

from gaussflat.affinity import trace_ruling
from gaussflat.corpus import example_1_1
from gaussflat.curvature import curvature_report
from gaussflat.rigidity import decay_profile, developability_scan, rigidity_verdict, timelike_scan

a, c = 0.5, 1.0
u = example_1_1(a, c)
print(u.name)

# %% The hypotheses hold: convex, developable, spacelike
box = (np.full(2, -50.0), np.full(2, 50.0))
dev = developability_scan(u, box, samples=4096, seed=0)
print(f"max |det D2u| = {dev.max_abs_det:.2e}   min eigenvalue = {dev.min_eigenvalue:.2e}")
print("causal scan:", timelike_scan(u, box, seed=0).outcome)

# %% The graph is ruled by lines parallel to e2
seg = trace_ruling(u.restrict(-50, 50), [1.0, 3.0], [0.0, 1.0])
print("ruling from", seg.endpoints[0], "to", seg.endpoints[1], f"residual {seg.residual:.1e}")

# %% Curvature at a point on the axis, both ambient signatures
for sig in ("euclidean", "minkowski"):
    r = curvature_report(u, [0.0, 80.0], sig)
    print(f"{sig:10s} principal = {r.principal}  mean = {r.mean:.6f}")

# %% The curvature does not decay
prof = decay_profile(u, "mean-minkowski-tilde", [0, 0], [1, 10, 100, 500], seed=0)
for R, s, x in zip(prof.radii, prof.sups, prof.argmaxes):
    print(f"R = {R:6.0f}   sup Htilde = {s:.9f}   at {np.round(x, 6)}")
print("a / sqrt(c) =", a / np.sqrt(c))

# %% So the rigidity pipeline refuses it, with a witness on the x2-axis
v = rigidity_verdict(u, "mean-minkowski-tilde", seed=0)
print(v.outcome, v.witness.to_dict())
