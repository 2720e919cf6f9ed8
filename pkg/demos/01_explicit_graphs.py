# Explicit minimal graphs over the hyperbolic half-plane and their maximal duals.
# Run: python demos/01_explicit_graphs.py

import math

import numpy as np

from maxgraph import catalog
from maxgraph.duality import dual_partials, potential_at, reconstruct_dual, roundtrip_check
from maxgraph.graph import invariant_report, residual_maximal, residual_minimal
from maxgraph.grids import Grid
from maxgraph.metrics import hyperbolic_half_plane

H = hyperbolic_half_plane()
grid = Grid(-3, 3, 0.2, 3, 50, 50)
X = grid.mesh()

# log(x1^2+x2^2) and x1/(x1^2+x2^2) are harmonic, and that is enough to be minimal here
for name in ("minimal-log", "minimal-inv"):
    u = catalog.get_example(name).u
    print(f"{name:12s} sup |Minimal[u]| = {np.max(np.abs(residual_minimal(u, H, X))):.2e}")

# rotating the normalized gradient gives the partials of a maximal graph
u = catalog.get_example("minimal-log").u
print("dual partials at (0,1):", [float(v) for v in dual_partials(u, H, (0.0, 1.0))], " expected", [-2 / math.sqrt(5), 0.0])

# recover the potential by path integration and check it against the real elliptic form
res = reconstruct_dual(u, H, Grid(-2, 2, 0.5, 3, 41, 41), basepoint=(0.0, 1.0))
print("closedness sup", f"{res.closedness_sup:.1e}", " path spread", f"{res.path_independence_err:.1e}")
p = (1.2, 0.8)
# between nodes the grid value is bilinear; the direct path quadrature is exact to roundoff
print("w1 at", p, " bilinear:", res.w.value(p), " quadrature:", potential_at(u, H, (0.0, 1.0), p),
      " elliptic:", catalog.w1_elliptic(*p))
print("round trip back to -Du:", f"{roundtrip_check(u, H, res.grid, result=res):.1e}")

w2 = catalog.get_example("maximal-w2").u
print("maximal-w2 sup |Maximal[w]| =", f"{np.max(np.abs(residual_maximal(w2, H, X))):.2e}")
print("maximal-w2(0,1) =", w2.value((0.0, 1.0)))

# the height and angle identities at one point
rep = invariant_report(catalog.get_example("maximal-w2").surface(), (0.5, 1.5))
print("Theta", rep.theta, " H", rep.mean_curvature, " K (Gauss eq.)", rep.K_gauss_eq, " K (numeric)", rep.K_numeric)
for k, v in sorted(rep.residuals.items()):
    print(f"  {k:18s} {v:.1e}")
# kappa_M = -1 here, so no sign is claimed for the Laplacian of 1/Theta
print("Laplacian of 1/Theta:", rep.laplace_inv_theta, " sign asserted:", rep.subharmonic_ok)
