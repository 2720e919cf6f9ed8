"""Damped Newton solver for Dirichlet problems of the minimal and maximal graph
equations over a conformal base on a rectangle.

Both equations are ``(1/lam) d_i( u_i / sqrt(1 + sigma |D_o u|^2/lam) ) = 0``
with ``sigma = +1`` (minimal, Riemannian product) or ``sigma = -1``
(maximal, Lorentzian product).  Fluxes live on cell faces: the normal
derivative is a two-point difference, the tangential one a four-node
average, which gives a nine-point stencil that is exact on affine data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from .errors import OutOfDomainError, SolverError
from .fields import ScalarField
from .graph import Signature
from .grids import Grid
from .metrics import ConformalMetric

EPS_SPACE = 1e-6
TOL_NEWTON = 1e-10
MAX_ITER = 50
# a full Newton update this small (relative to |U|) means the residual sits on its roundoff floor
STEP_FLOOR = 1e-13


@dataclass
class DirichletProblem:
    metric: ConformalMetric
    signature: Signature
    grid: Grid
    boundary: ScalarField
    initial: str | np.ndarray = "harmonic"
    exact: ScalarField | None = None

    def __post_init__(self):
        X1, X2 = self.grid.mesh()
        if not self.metric.domain.contains((X1, X2), margin=0.0):
            raise OutOfDomainError(f"grid {self.grid.bounds} is not strictly inside the metric domain")

    @property
    def sigma(self):
        return -self.signature.eps

    def with_grid(self, grid):
        return DirichletProblem(self.metric, self.signature, grid, self.boundary, self.initial, self.exact)

    def boundary_values(self):
        """Array with boundary data on boundary nodes and zeros inside."""
        X1, X2 = self.grid.mesh()
        B = np.zeros_like(X1)
        mask = boundary_mask(self.grid)
        B[mask] = np.asarray(self.boundary.value((X1[mask], X2[mask])), dtype=float)
        return B


@dataclass
class SolveReport:
    iterations: int
    residual_sup: float
    spacelike_margin: float
    converged: bool
    min_margin_over_iterates: float
    history: list = field(default_factory=list)
    residual_floor: bool = False  # stopped on a roundoff-sized step above tol_newton

    def to_dict(self):
        return {
            "iterations": self.iterations,
            "residual_sup": self.residual_sup,
            "spacelike_margin": self.spacelike_margin,
            "min_margin_over_iterates": self.min_margin_over_iterates,
            "converged": self.converged,
            "residual_floor": self.residual_floor,
            "history": self.history,
        }


def boundary_mask(grid: Grid):
    m = np.zeros((grid.n1, grid.n2), dtype=bool)
    m[0, :] = m[-1, :] = m[:, 0] = m[:, -1] = True
    return m


class _Discretization:
    """Face geometry and flux evaluation for one grid and one metric."""

    def __init__(self, problem: DirichletProblem):
        g = problem.grid
        self.g = g
        self.sigma = problem.sigma
        self.hx, self.hy = g.h1, g.h2
        x1, x2 = g.x1, g.x2
        xm1 = 0.5 * (x1[:-1] + x1[1:])
        xm2 = 0.5 * (x2[:-1] + x2[1:])
        lamf = problem.metric.lam
        # east faces (i+1/2, j) for interior j; north faces (i, j+1/2) for interior i
        E1, E2 = np.meshgrid(xm1, x2[1:-1], indexing="ij")
        N1, N2 = np.meshgrid(x1[1:-1], xm2, indexing="ij")
        self.lam_e = np.broadcast_to(lamf.value((E1, E2)), E1.shape).astype(float)
        self.lam_n = np.broadcast_to(lamf.value((N1, N2)), N1.shape).astype(float)
        X1, X2 = g.mesh()
        self.lam_c = np.broadcast_to(lamf.value((X1[1:-1, 1:-1], X2[1:-1, 1:-1])), (g.n1 - 2, g.n2 - 2)).astype(float)
        n1, n2 = g.n1, g.n2
        inner = np.full((n1, n2), -1)
        inner[1:-1, 1:-1] = np.arange((n1 - 2) * (n2 - 2)).reshape(n1 - 2, n2 - 2)
        self.inner = inner

    def face_gradients(self, U):
        hx, hy = self.hx, self.hy
        # east faces: shape (n1-1, n2-2)
        ex = (U[1:, 1:-1] - U[:-1, 1:-1]) / hx
        ey = (U[:-1, 2:] + U[1:, 2:] - U[:-1, :-2] - U[1:, :-2]) / (4 * hy)
        # north faces: shape (n1-2, n2-1)
        ny = (U[1:-1, 1:] - U[1:-1, :-1]) / hy
        nx = (U[2:, :-1] + U[2:, 1:] - U[:-2, :-1] - U[:-2, 1:]) / (4 * hx)
        return ex, ey, ny, nx

    def margins(self, U):
        """``1 + sigma |Du|^2`` on every face (for sigma = -1 this is the spacelike margin)."""
        ex, ey, ny, nx = self.face_gradients(U)
        me = 1 + self.sigma * (ex * ex + ey * ey) / self.lam_e
        mn = 1 + self.sigma * (nx * nx + ny * ny) / self.lam_n
        return min(float(me.min()), float(mn.min()))

    def _coef(self, q, lam):
        base = 1 + self.sigma * q / lam
        if np.any(base <= 0):
            raise SolverError("iterate is not spacelike on some face")
        a = base ** -0.5
        da = -0.5 * self.sigma / lam * base ** -1.5
        return a, da

    def residual(self, U):
        ex, ey, ny, nx = self.face_gradients(U)
        ae, _ = self._coef(ex * ex + ey * ey, self.lam_e)
        an, _ = self._coef(nx * nx + ny * ny, self.lam_n)
        fe = ae * ex
        fn = an * ny
        div = (fe[1:, :] - fe[:-1, :]) / self.hx + (fn[:, 1:] - fn[:, :-1]) / self.hy
        return div / self.lam_c

    def jacobian(self, U):
        """Sparse Jacobian of :meth:`residual` with respect to interior nodes."""
        hx, hy = self.hx, self.hy
        n1, n2 = self.g.n1, self.g.n2
        ex, ey, ny, nx = self.face_gradients(U)
        rows, cols, vals = [], [], []
        lam_full = np.ones((n1, n2))
        lam_full[1:-1, 1:-1] = self.lam_c

        def add(left, right, nodes, h):
            # a face flux enters its left cell's row with +1/h and its right cell's with -1/h
            for (ri, rj), sign in ((left, 1.0), (right, -1.0)):
                r = self.inner[ri, rj]
                for ci, cj, w in nodes:
                    c = self.inner[ci, cj]
                    ok = (r >= 0) & (c >= 0)
                    rows.append(r[ok])
                    cols.append(c[ok])
                    vals.append((sign * w / (h * lam_full[ri, rj]))[ok])

        # east faces between (i, j) and (i+1, j), i = 0..n1-2, j = 1..n2-2
        I, J = np.meshgrid(np.arange(n1 - 1), np.arange(1, n2 - 1), indexing="ij")
        ae, dae = self._coef(ex * ex + ey * ey, self.lam_e)
        dfx = ae + 2 * ex * ex * dae
        dfy = 2 * ex * ey * dae
        nodes = [
            (I + 1, J, dfx / hx), (I, J, -dfx / hx),
            (I, J + 1, dfy / (4 * hy)), (I + 1, J + 1, dfy / (4 * hy)),
            (I, J - 1, -dfy / (4 * hy)), (I + 1, J - 1, -dfy / (4 * hy)),
        ]
        add((I, J), (I + 1, J), nodes, hx)

        # north faces between (i, j) and (i, j+1), i = 1..n1-2, j = 0..n2-2
        I, J = np.meshgrid(np.arange(1, n1 - 1), np.arange(n2 - 1), indexing="ij")
        an, dan = self._coef(nx * nx + ny * ny, self.lam_n)
        dfy = an + 2 * ny * ny * dan
        dfx = 2 * nx * ny * dan
        nodes = [
            (I, J + 1, dfy / hy), (I, J, -dfy / hy),
            (I + 1, J, dfx / (4 * hx)), (I + 1, J + 1, dfx / (4 * hx)),
            (I - 1, J, -dfx / (4 * hx)), (I - 1, J + 1, -dfx / (4 * hx)),
        ]
        add((I, J), (I, J + 1), nodes, hy)

        m = (n1 - 2) * (n2 - 2)
        return sp.csc_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(m, m)
        )


def _harmonic_extension(B, hx, hy):
    """Discrete five-point harmonic extension of the boundary values in ``B``."""
    n1, n2 = B.shape
    m1, m2 = n1 - 2, n2 - 2
    if m1 <= 0 or m2 <= 0:
        return B.copy()
    T1 = sp.diags([np.ones(m1 - 1), -2 * np.ones(m1), np.ones(m1 - 1)], [-1, 0, 1]) / hx**2
    T2 = sp.diags([np.ones(m2 - 1), -2 * np.ones(m2), np.ones(m2 - 1)], [-1, 0, 1]) / hy**2
    L = sp.kron(T1, sp.identity(m2)) + sp.kron(sp.identity(m1), T2)
    rhs = np.zeros((m1, m2))
    rhs[0, :] -= B[0, 1:-1] / hx**2
    rhs[-1, :] -= B[-1, 1:-1] / hx**2
    rhs[:, 0] -= B[1:-1, 0] / hy**2
    rhs[:, -1] -= B[1:-1, -1] / hy**2
    U = B.copy()
    U[1:-1, 1:-1] = spsolve(L.tocsc(), rhs.ravel()).reshape(m1, m2)
    return U


def _initial(problem: DirichletProblem, B):
    init = problem.initial
    if isinstance(init, np.ndarray):
        U = np.array(init, dtype=float)
        U[boundary_mask(problem.grid)] = B[boundary_mask(problem.grid)]
        return U
    if init == "harmonic":
        return _harmonic_extension(B, problem.grid.h1, problem.grid.h2)
    if init == "zero":
        return B.copy()
    raise ValueError(f"unknown initial guess policy {init!r}")


def discrete_residual(problem: DirichletProblem, U):
    """Interior residual of the discretized operator for node values ``U``."""
    return _Discretization(problem).residual(np.asarray(U, dtype=float))


def solve_dirichlet(problem: DirichletProblem, tol_newton=TOL_NEWTON, eps_space=EPS_SPACE, max_iter=MAX_ITER):
    """Damped Newton iteration; returns ``(U, SolveReport)`` with ``U`` indexed ``[i, j]``.

    Steps are halved until the sup residual decreases and, for the maximal
    equation, every face keeps ``1 - |Du|^2 >= eps_space``. On fine grids the
    scaled residual bottoms out near ``eps |U| / h^2``, which can exceed
    ``tol_newton``; a full step below ``STEP_FLOOR * (1 + |U|)`` then ends the
    iteration with ``residual_floor`` set.
    """
    disc = _Discretization(problem)
    B = problem.boundary_values()
    U = _initial(problem, B)
    lorentz = problem.sigma < 0
    margin = disc.margins(U)
    if lorentz and margin < eps_space:
        raise SolverError(f"initial guess is not spacelike (margin {margin:.3g}); boundary data too steep?")
    F = disc.residual(U)
    res = float(np.max(np.abs(F))) if F.size else 0.0
    history = [{"iteration": 0, "residual": res, "margin": margin, "step": 0.0}]
    min_margin = margin
    it = 0
    floor = False
    while res >= tol_newton:
        if it >= max_iter:
            raise SolverError(f"Newton did not converge in {max_iter} iterations (residual {res:.3g})")
        Jm = disc.jacobian(U)
        delta = spsolve(Jm, -F.ravel()).reshape(F.shape)
        if not np.all(np.isfinite(delta)):
            raise SolverError("singular Newton system")
        if np.max(np.abs(delta)) <= STEP_FLOOR * (1.0 + np.max(np.abs(U))):
            floor = True
            break
        it += 1
        t = 1.0
        for _ in range(40):
            trial = U.copy()
            trial[1:-1, 1:-1] += t * delta
            tm = disc.margins(trial)
            if not lorentz or tm >= eps_space:
                Ft = disc.residual(trial)
                rt = float(np.max(np.abs(Ft)))
                if rt < res:
                    break
            t *= 0.5
        else:
            raise SolverError("line search failed: cannot keep the spacelike margin and reduce the residual")
        U, F, res, margin = trial, Ft, rt, tm
        min_margin = min(min_margin, margin)
        history.append({"iteration": it, "residual": res, "margin": margin, "step": t})
    return U, SolveReport(it, res, margin, True, min_margin, history, floor)


@dataclass
class RefinementRow:
    n1: int
    n2: int
    h: float
    error: float
    iterations: int


@dataclass
class RefinementStudy:
    rows: list
    pairwise_orders: list
    observed_order: float

    def to_dict(self):
        return {
            "levels": [r.__dict__ for r in self.rows],
            "pairwise_orders": self.pairwise_orders,
            "observed_order": self.observed_order,
        }


def refinement_study(problem: DirichletProblem, levels=3, tol_newton=TOL_NEWTON):
    """Sup errors against ``problem.exact`` on successively halved grids.

    The observed order is the least-squares slope of ``log(error)`` against
    ``log(h)``; it is ``nan`` when every error is at roundoff level.
    """
    if problem.exact is None:
        raise ValueError("refinement_study needs a problem with an exact solution")
    rows = []
    grid = problem.grid
    for _ in range(levels):
        p = problem.with_grid(grid)
        U, rep = solve_dirichlet(p, tol_newton=tol_newton)
        err = float(np.max(np.abs(U - grid.sample(problem.exact))))
        rows.append(RefinementRow(grid.n1, grid.n2, max(grid.h1, grid.h2), err, rep.iterations))
        grid = grid.refine()
    pair = []
    for a, b in zip(rows, rows[1:]):
        ok = a.error > 1e-12 and b.error > 1e-12
        pair.append(math.log(a.error / b.error) / math.log(a.h / b.h) if ok else math.nan)
    errs = np.array([r.error for r in rows])
    if np.all(errs > 1e-12):
        slope = float(np.polyfit(np.log([r.h for r in rows]), np.log(errs), 1)[0])
    else:
        slope = math.nan
    return RefinementStudy(rows, pair, slope)
