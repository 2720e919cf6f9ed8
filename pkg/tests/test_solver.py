import numpy as np
import pytest

from maxgraph.catalog import get_example
from maxgraph.errors import OutOfDomainError, SolverError
from maxgraph.fields import ExprField
from maxgraph.graph import Signature
from maxgraph.grids import Grid
from maxgraph.metrics import euclidean, hyperbolic_half_plane
from maxgraph.solver import (
    DirichletProblem,
    _Discretization,
    boundary_mask,
    discrete_residual,
    refinement_study,
    solve_dirichlet,
)

H = hyperbolic_half_plane()
RECT = (-1.0, 1.0, 1.0, 2.0)


def w2_problem(n=65):
    w2 = get_example("maximal-w2").u
    return DirichletProblem(H, Signature.LORENTZIAN, Grid(*RECT, n, n), w2, exact=w2)


def log_problem(n=65):
    u = get_example("minimal-log").u
    return DirichletProblem(H, Signature.RIEMANNIAN, Grid(*RECT, n, n), u, exact=u)


def affine_problem(n=17, shift=0.0):
    u = ExprField(f"(x1+x2)/4+{shift!r}")
    return DirichletProblem(euclidean(), Signature.LORENTZIAN, Grid(-1, 1, -1, 1, n, n), u, exact=u)


@pytest.mark.parametrize("make", [w2_problem, log_problem], ids=["w2", "log"])
def test_converges_to_closed_form(make):
    p = make()
    U, rep = solve_dirichlet(p)
    assert rep.converged and rep.iterations <= 10
    assert rep.residual_sup < 1e-10
    assert np.max(np.abs(U - p.grid.sample(p.exact))) < 1e-3
    mask = boundary_mask(p.grid)
    np.testing.assert_array_equal(U[mask], p.grid.sample(p.exact)[mask])


def test_stops_on_roundoff_floor_when_tol_is_unreachable():
    # 1e-20 is far below eps |U| / h^2, so only the step-size stop can end the loop
    p = w2_problem(17)
    U_ref, ref = solve_dirichlet(p)
    U, rep = solve_dirichlet(p, tol_newton=1e-20)
    assert rep.converged and rep.residual_floor and not ref.residual_floor
    assert rep.residual_sup < 1e-12
    assert len(rep.history) == rep.iterations + 1
    np.testing.assert_allclose(U, U_ref, atol=1e-12)


def test_margin_kept_at_every_iterate():
    U, rep = solve_dirichlet(w2_problem())
    assert rep.min_margin_over_iterates >= 1e-6
    assert all(h["margin"] >= 1e-6 for h in rep.history)
    residuals = [h["residual"] for h in rep.history]
    assert all(b < a for a, b in zip(residuals, residuals[1:]))


def test_affine_is_exact():
    p = affine_problem()
    U, rep = solve_dirichlet(p)
    assert np.max(np.abs(U - p.grid.sample(p.exact))) < 1e-12


def test_affine_exact_from_a_poor_start():
    # zero interior guess: the data must be gentle enough for it to be spacelike
    u = ExprField("(x1+x2)/40")
    p = DirichletProblem(euclidean(), Signature.LORENTZIAN, Grid(-1, 1, -1, 1, 9, 9), u, initial="zero", exact=u)
    U, rep = solve_dirichlet(p)
    assert rep.iterations > 0
    assert np.max(np.abs(U - p.grid.sample(p.exact))) < 1e-12


def test_final_residual_not_above_exact_sample():
    for p in (w2_problem(33), log_problem(33)):
        U, rep = solve_dirichlet(p)
        exact = np.max(np.abs(discrete_residual(p, p.grid.sample(p.exact))))
        assert rep.residual_sup <= exact


def test_truncation_error_is_second_order():
    r = [np.max(np.abs(discrete_residual(w2_problem(n), w2_problem(n).grid.sample(w2_problem(n).exact))))
         for n in (17, 33, 65)]
    assert 3.5 < r[0] / r[1] < 4.5 and 3.5 < r[1] / r[2] < 4.5


def test_constant_shift_invariance():
    w2 = get_example("maximal-w2").u
    g = Grid(*RECT, 33, 33)
    shifted = ExprField(f"({get_example('maximal-w2').expression})+2.5")
    U, _ = solve_dirichlet(DirichletProblem(H, Signature.LORENTZIAN, g, w2))
    V, _ = solve_dirichlet(DirichletProblem(H, Signature.LORENTZIAN, g, shifted))
    assert np.max(np.abs(V - (U + 2.5))) < 1e-12


@pytest.mark.parametrize("sig", [Signature.LORENTZIAN, Signature.RIEMANNIAN])
def test_jacobian_matches_differences(sig, rng):
    u = ExprField("0.2*x1*x2 + 0.1*x1^2")
    p = DirichletProblem(H, sig, Grid(*RECT, 7, 6), u)
    d = _Discretization(p)
    U = p.grid.sample(u) + 0.01 * rng.normal(size=(7, 6))
    J = d.jacobian(U).toarray()
    h = 1e-6
    Jfd = np.empty_like(J)
    for k in range(J.shape[1]):
        cols = []
        for step in (h, -h):
            V = U.copy()
            inner = V[1:-1, 1:-1].ravel()
            inner[k] += step
            V[1:-1, 1:-1] = inner.reshape(5, 4)
            cols.append(d.residual(V).ravel())
        Jfd[:, k] = (cols[0] - cols[1]) / (2 * h)
    np.testing.assert_allclose(J, Jfd, atol=1e-7 * np.max(np.abs(J)))


@pytest.mark.parametrize("make", [w2_problem, log_problem], ids=["w2", "log"])
def test_refinement_order(make):
    study = refinement_study(make(17), levels=3)
    assert [r.n1 for r in study.rows] == [17, 33, 65]
    assert study.observed_order >= 1.8
    assert all(o >= 1.8 for o in study.pairwise_orders)
    assert study.rows[-1].error < 1e-3


def test_refinement_on_affine_is_roundoff():
    study = refinement_study(affine_problem(9), levels=3)
    assert all(r.error < 1e-12 for r in study.rows)
    assert np.isnan(study.observed_order)


def test_refinement_needs_exact():
    p = w2_problem(9)
    p.exact = None
    with pytest.raises(ValueError):
        refinement_study(p)


def test_steep_boundary_rejected():
    p = DirichletProblem(euclidean(), Signature.LORENTZIAN, Grid(-1, 1, -1, 1, 9, 9), ExprField("2*x1"))
    with pytest.raises(SolverError, match="spacelike"):
        solve_dirichlet(p)


def test_iteration_cap():
    with pytest.raises(SolverError, match="did not converge"):
        solve_dirichlet(w2_problem(17), max_iter=1, tol_newton=1e-14)


def test_grid_outside_domain():
    with pytest.raises(OutOfDomainError):
        DirichletProblem(H, Signature.LORENTZIAN, Grid(-1, 1, 0.0, 1, 9, 9), ExprField("0"))


def test_bad_initial_policy():
    p = w2_problem(9)
    p.initial = "random"
    with pytest.raises(ValueError):
        solve_dirichlet(p)


def test_explicit_initial_array():
    p = w2_problem(17)
    p.initial = p.grid.sample(p.exact) + 0.01
    U, rep = solve_dirichlet(p)
    assert rep.converged
    q = w2_problem(17)
    V, _ = solve_dirichlet(q)
    assert np.max(np.abs(U - V)) < 1e-10


def test_report_serializes():
    _, rep = solve_dirichlet(w2_problem(9))
    d = rep.to_dict()
    assert d["converged"] and d["iterations"] == len(d["history"]) - 1
