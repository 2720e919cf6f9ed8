# Finite-length divergent curves (incompleteness) and a uniform metric bound (completeness).
# Run: python demos/02_completeness.py

import math

from maxgraph import catalog
from maxgraph.completeness import (
    FLAT_LENGTH_BOUND,
    curve_length,
    horizontal_line,
    hyperbolic_ray,
    metric_ratio_scan,
    ray_probe,
    vertical_ray_to_boundary,
)
from maxgraph.grids import Grid
from maxgraph.metrics import hyperbolic_half_plane

# the vertical ray of maximal-w2 runs into the ideal boundary with speed 1/sqrt(1+s^2)
w2 = catalog.get_example("maximal-w2").surface()
res = curve_length(w2, vertical_ray_to_boundary())
print(f"vertical ray on maximal-w2: {res.length:.12f}  asinh(1) = {math.asinh(1):.12f}  ({res.status})")

# an entire spacelike graph over the flat plane whose horizontal line has bounded length
flat = catalog.get_example("flat-incomplete").surface()
a, b, c = catalog.smoothing_coefficients()
print(f"smoothing quartic on (-1,1): {a:.6f} + {b:.6f} s^2 + {c:.6f} s^4")
for R in (1, 2, 5, 10, 50, 100, None):
    r = curve_length(flat, horizontal_line(R))
    print(f"  R = {str(R):>4s}: length {r.length:.9f}  (bound {FLAT_LENGTH_BOUND:.7f})")

# probes classify; the slice over the half-plane is just the hyperbolic plane
for p in ray_probe(catalog.make_slice().surface(), [hyperbolic_ray()]):
    print("slice probe:", p.classification, p.status, f"partial length {p.length:.2f}")

# maximal-w1: g >= (1/5) g_H everywhere, so it is complete
H = hyperbolic_half_plane()
scan = metric_ratio_scan(catalog.get_example("maximal-w1").surface(), H, Grid(-3, 3, 0.05, 3, 61, 60).mesh())
print(f"maximal-w1 ratio infimum {scan.infimum:.9f} at {scan.argmin}")
scan = metric_ratio_scan(w2, H, Grid(-1, 1, 0.01, 1, 21, 100).mesh())
print(f"maximal-w2 ratio infimum {scan.infimum:.2e} at {scan.argmin}  (no positive bound)")
