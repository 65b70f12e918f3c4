"""The cone a|x|: decaying curvature, one singular point.

The cone is convex and developable away from the origin.  Its curvatures
fall off like 1/|x| and tend to zero, yet it is not a plane; smoothness at
the vertex is what fails.  This script checks the closed-form
curvatures and the identities along its radial rulings.
"""

import numpy as np

from gaussflat.affinity import hessian_kernel, lemma_report, trace_ruling
from gaussflat.corpus import cone
from gaussflat.curvature import curvature_report

a = 0.5
v = cone(a).restrict(-10, 10)
x = np.array([3.0, 4.0])
r = np.linalg.norm(x)

# %% Closed forms at |x| = 5
euc = curvature_report(v, x, "euclidean")
mink = curvature_report(v, x, "minkowski")
print(f"H^E  = {euc.mean:.12f}   expected {a / (np.sqrt(1 + a * a) * r):.12f}")
print(f"H~^M = {mink.mean_tilde:.12f}   expected {(1 - a * a) * a / r:.12f}")

# %% The radial ruling runs from the guard around the vertex to the box edge
(g,) = hessian_kernel(v, x)
seg = trace_ruling(v, x, g)
print("kernel direction", g)
print(f"t in [{seg.t_minus:.6f}, {seg.t_plus:.6f}]  stops: {seg.stop_minus}, {seg.stop_plus}")

# %% Residuals along the ruling, for a tangential eta
rep = lemma_report(v, x, g, [-0.8, 0.6], ruling=seg)
for key, val in rep.to_dict().items():
    if key.startswith(("r", "profile")) and key != "ruling":
        print(f"{key:34s} {val}")
print("(Htilde)_gg expected", 2 * (1 - a * a) * a / r**3)
