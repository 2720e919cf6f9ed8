# Solving the minimal and maximal equations on a rectangle and watching the error shrink.
# Run: python demos/03_dirichlet.py [output-dir]

import os
import sys

import numpy as np

from maxgraph import catalog
from maxgraph.grids import Grid, to_csv, write_atomic
from maxgraph.solver import DirichletProblem, refinement_study, solve_dirichlet

out_dir = sys.argv[1] if len(sys.argv) > 1 else None

for name in ("maximal-w2", "minimal-log"):
    e = catalog.get_example(name)
    prob = DirichletProblem(e.metric, e.signature, Grid(-1, 1, 1, 2, 65, 65), e.u, exact=e.u)
    U, rep = solve_dirichlet(prob)
    err = np.max(np.abs(U - prob.grid.sample(e.u)))
    print(f"{name}: {rep.iterations} Newton steps, residual {rep.residual_sup:.1e}, sup error {err:.2e}")
    for h in rep.history:
        print(f"    it {h['iteration']}  residual {h['residual']:.2e}  margin {h['margin']:.4f}  step {h['step']}")

    study = refinement_study(prob.with_grid(Grid(-1, 1, 1, 2, 17, 17)), levels=4)
    for row in study.rows:
        print(f"    {row.n1:4d} x {row.n2:<4d} h = {row.h:.4f}  error {row.error:.3e}")
    print(f"    observed order {study.observed_order:.3f}")

    if out_dir:
        path = os.path.join(out_dir, f"{name}.csv")
        write_atomic(path, to_csv(prob.grid, U))
        print("    wrote", path)
