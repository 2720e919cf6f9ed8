"""Minimal <-> maximal duality by rotating the normalized gradient.

For a minimal graph ``u`` the 1-form metrically equivalent to
``J(Du / sqrt(1 + |Du|^2))`` is closed on a simply connected domain, and any
potential ``w`` of it defines a maximal graph.  The reverse rotation of
``Dw / sqrt(1 - |Dw|^2)`` gives back ``D(-u)``.

Gradients are handled in two forms: the metric gradient as a coordinate
vector (``Df = D_o f / lam``) and the Euclidean partials ``D_o f``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonSpacelikeError, OutOfDomainError
from .fields import FunctionField, ScalarField
from .graph import LIGHTLIKE_GUARD
from .grids import Grid, bilinear
from .metrics import ConformalMetric

MIN_TO_MAX = "min->max"
MAX_TO_MIN = "max->min"

_DIRECTIONS = {
    "min->max": MIN_TO_MAX, "min_to_max": MIN_TO_MAX, "minmax": MIN_TO_MAX,
    "max->min": MAX_TO_MIN, "max_to_min": MAX_TO_MIN, "maxmin": MAX_TO_MIN,
}


def _direction(d):
    try:
        return _DIRECTIONS[d.replace("→", "->").lower()]
    except KeyError:
        raise ValueError(f"direction must be 'min->max' or 'max->min', got {d!r}") from None


def dual_partials(u: ScalarField, m: ConformalMetric, p, direction=MIN_TO_MAX):
    """Euclidean partials ``(w_x1, w_x2)`` of the dual potential at ``p``.

    Equal to ``J(D_o u) / sqrt(1 +/- |Du|^2)``: the rotation commutes with the
    conformal factor.
    """
    d = _direction(direction)
    lam = m.check(p)
    u1, u2 = u.partial(1, p), u.partial(2, p)
    G = (u1 * u1 + u2 * u2) / lam
    if d == MIN_TO_MAX:
        S = np.sqrt(1.0 + G)
    else:
        if np.any(1.0 - G < LIGHTLIKE_GUARD):
            raise NonSpacelikeError(f"max->min dual needs |Du|^2 < 1, got {np.max(G):.17g}")
        S = np.sqrt(1.0 - G)
    return -u2 / S, u1 / S


def dual_gradient(u: ScalarField, m: ConformalMetric, p, direction=MIN_TO_MAX):
    """Metric gradient ``Dw`` (coordinate vector) of the dual potential."""
    lam = m.check(p)
    w1, w2 = dual_partials(u, m, p, direction)
    return np.array([w1 / lam, w2 / lam])


def norm_identity_check(u: ScalarField, m: ConformalMetric, p):
    """``| |Dw|^2 - |Du|^2 / (1 + |Du|^2) |`` for the min->max dual."""
    lam = m.check(p)
    dw = dual_gradient(u, m, p)
    dw_sq = lam * (dw[0] ** 2 + dw[1] ** 2)
    u1, u2 = u.partial(1, p), u.partial(2, p)
    G = (u1 * u1 + u2 * u2) / lam
    return np.abs(dw_sq - G / (1.0 + G))


def dual_partial_fields(u: ScalarField, m: ConformalMetric, direction=MIN_TO_MAX):
    """The dual partials as fields whose own partials are exact (given ``u``'s Hessian)."""
    d = _direction(direction)
    eps = -1 if d == MIN_TO_MAX else 1

    def parts(p):
        lam = m.lam.value(p)
        u1, u2 = u.partial(1, p), u.partial(2, p)
        G = (u1 * u1 + u2 * u2) / lam
        return lam, u1, u2, G, np.sqrt(1.0 - eps * G)

    def dS(k, p, lam, u1, u2, G, S):
        dG = 2 * (u1 * u.partial2(1, k, p) + u2 * u.partial2(2, k, p)) / lam - G * m.lam.partial(k, p) / lam
        return -eps * dG / (2 * S)

    def p1(p):
        lam, u1, u2, G, S = parts(p)
        return -u2 / S

    def p2(p):
        lam, u1, u2, G, S = parts(p)
        return u1 / S

    def g1(k, p):
        lam, u1, u2, G, S = parts(p)
        return -u.partial2(2, k, p) / S + u2 * dS(k, p, lam, u1, u2, G, S) / S**2

    def g2(k, p):
        lam, u1, u2, G, S = parts(p)
        return u.partial2(1, k, p) / S - u1 * dS(k, p, lam, u1, u2, G, S) / S**2

    return FunctionField(p1, grad=g1, name="w_x1"), FunctionField(p2, grad=g2, name="w_x2")


# ---------------------------------------------------------------------------
# reconstruction by path integration

@dataclass
class DualityResult:
    w: ScalarField
    grid: Grid
    values: np.ndarray
    basepoint: tuple
    closedness_sup: float
    path_independence_err: float
    min_spacelike_margin: float
    certified: bool
    other_path_values: np.ndarray

    def diagnostics(self):
        return {
            "basepoint": [float(self.basepoint[0]), float(self.basepoint[1])],
            "closedness_sup": self.closedness_sup,
            "path_independence_err": self.path_independence_err,
            "min_spacelike_margin": self.min_spacelike_margin,
            "certified": self.certified,
        }


_GL32 = np.polynomial.legendre.leggauss(32)


def _line_integral(f, a, b, other, axis, max_piece=0.5, n_pieces=None):
    """``int_a^b f`` along an axis-parallel segment, vectorized over targets.

    ``axis == 1``: integrate in ``x1`` at fixed ``x2 = other``; ``axis == 2``
    the other way round.  Composite 32-point Gauss-Legendre.
    """
    a, b, other = np.broadcast_arrays(*(np.asarray(z, dtype=float) for z in (a, b, other)))
    span = b - a
    K = n_pieces or max(1, int(math.ceil(np.max(np.abs(span), initial=0.0) / max_piece)))
    xi, wt = _GL32
    frac = (np.arange(K)[:, None] + 0.5 * (xi[None, :] + 1.0)) / K  # (K, 32)
    t = a[..., None, None] + span[..., None, None] * frac
    o = np.broadcast_to(other[..., None, None], t.shape)
    vals = f((t, o)) if axis == 1 else f((o, t))
    return np.sum(vals * wt, axis=(-2, -1)) * span / (2 * K)


def _check_rectangle(m: ConformalMetric, grid: Grid):
    d = m.domain
    X1, X2 = grid.mesh()
    if not d.contains((X1, X2)):
        raise OutOfDomainError(f"grid rectangle {grid.bounds} is not inside the metric domain {d}")
    if d.predicate is not None:
        # rectangle paths must not leave the region; refuse anything we cannot vouch for
        fine = Grid(*grid.bounds, 4 * grid.n1, 4 * grid.n2)
        if not d.contains(fine.mesh()):
            raise OutOfDomainError("grid rectangle is not contained in the (non-rectangular) domain")


def closedness_defect(u: ScalarField, m: ConformalMetric, p, h=1e-3):
    """``curl`` of the dual 1-form at ``p`` by fourth-order centered differences of its components."""
    P1, P2 = dual_partial_fields(u, m)
    x1, x2 = p

    def d(f, shift):
        return (-f(shift(2 * h)) + 8 * f(shift(h)) - 8 * f(shift(-h)) + f(shift(-2 * h))) / (12 * h)

    d1P2 = d(P2.value, lambda s: (x1 + s, x2))
    d2P1 = d(P1.value, lambda s: (x1, x2 + s))
    return d1P2 - d2P1


def reconstruct_dual(u: ScalarField, m: ConformalMetric, grid: Grid, basepoint, tol_closed=1e-6):
    """Potential of the min->max dual 1-form on the grid nodes, zero at ``basepoint``.

    Each node is reached along both axis-aligned L-paths from the basepoint;
    the ``x1``-first value is kept and the spread between the two is reported.
    """
    b1, b2 = float(basepoint[0]), float(basepoint[1])
    if not grid.contains((b1, b2)):
        raise ValueError(f"basepoint {basepoint} is outside the grid rectangle {grid.bounds}")
    _check_rectangle(m, grid)
    P1, P2 = dual_partial_fields(u, m)
    X1, X2 = grid.mesh()

    # path A: along x1 at height b2, then along x2
    leg_a1 = _line_integral(P1.value, b1, X1[:, 0], b2, axis=1)  # (n1,)
    leg_a2 = _line_integral(P2.value, b2, X2, X1, axis=2)
    val_a = leg_a1[:, None] + leg_a2
    # path B: along x2 at abscissa b1, then along x1
    leg_b1 = _line_integral(P2.value, b2, X2[0, :], b1, axis=2)  # (n2,)
    leg_b2 = _line_integral(P1.value, b1, X1, X2, axis=1)
    val_b = leg_b1[None, :] + leg_b2
    path_err = float(np.max(np.abs(val_a - val_b)))

    curl = closedness_defect(u, m, (X1, X2))
    closed_sup = float(np.max(np.abs(curl)))

    lam = m.lam.value((X1, X2))
    margin = 1.0 - (P1.value((X1, X2)) ** 2 + P2.value((X1, X2)) ** 2) / lam
    values = np.array(val_a, dtype=float)

    w = FunctionField(
        lambda p: bilinear(grid, values, p),
        grad=lambda i, p: (P1 if i == 1 else P2).value(p),
        hess=lambda i, j, p: _sym_hess(P1, P2, i, j, p),
        name="dual",
    )
    return DualityResult(
        w=w, grid=grid, values=values, basepoint=(b1, b2),
        closedness_sup=closed_sup, path_independence_err=path_err,
        min_spacelike_margin=float(np.min(margin)),
        certified=closed_sup < tol_closed,
        other_path_values=val_b,
    )


def _sym_hess(P1, P2, i, j, p):
    if i == j:
        return (P1 if i == 1 else P2).partial(i, p)
    return 0.5 * (P1.partial(2, p) + P2.partial(1, p))


def potential_at(u: ScalarField, m: ConformalMetric, basepoint, p):
    """Dual potential at an arbitrary point by direct L-path quadrature (no interpolation)."""
    P1, P2 = dual_partial_fields(u, m)
    b1, b2 = basepoint
    leg1 = _line_integral(P1.value, b1, p[0], b2, axis=1)
    leg2 = _line_integral(P2.value, b2, p[1], p[0], axis=2)
    res = leg1 + leg2
    return float(res) if np.ndim(res) == 0 else res


def roundtrip_check(u: ScalarField, m: ConformalMetric, grid: Grid, basepoint=None, result=None):
    """Sup over grid nodes of ``|D_max->min(w) + Du|_m`` for the reconstructed dual ``w``."""
    if result is None:
        if basepoint is None:
            basepoint = (0.5 * (grid.x1_min + grid.x1_max), 0.5 * (grid.x2_min + grid.x2_max))
        result = reconstruct_dual(u, m, grid, basepoint)
    X1, X2 = grid.mesh()
    p = (X1, X2)
    lam = m.lam.value(p)
    back = dual_gradient(result.w, m, p, MAX_TO_MIN)
    du = np.array([u.partial(1, p), u.partial(2, p)]) / lam
    diff = back + du
    return float(np.max(np.sqrt(lam * (diff[0] ** 2 + diff[1] ** 2))))
