"""The same geometry from sampled data.

Example field values are sampled on a 201 x 201 grid (h = 0.05), written to
CSV, read back, and compared with the analytic backend.
"""

import tempfile
from pathlib import Path

import numpy as np

from gaussflat.corpus import example_1_1
from gaussflat.curvature import curvature_report
from gaussflat.field import grid_field, read_grid_csv, sample_grid, write_grid_csv

u = example_1_1(0.5, 1.0)
spec = sample_grid(u, [-5, -5], 0.05, 201)

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "example.csv"
    write_grid_csv(spec, path)
    g = grid_field(read_grid_csv(path), name="example-grid")

print("grid valid box:", g.lower, g.upper)
for x in ([0.0, 0.0], [1.0, 2.0], [-3.0, 4.5]):
    ga = curvature_report(g, x, "minkowski")
    an = curvature_report(u, x, "minkowski")
    print(f"x = {x}:  Htilde grid {ga.mean_tilde:.6f}  analytic {an.mean_tilde:.6f}  "
          f"diff {abs(ga.mean_tilde - an.mean_tilde):.1e}")
print("Hessian at (1, 2), grid:\n", np.round(curvature_report(g, [1, 2]).hessian, 6))
