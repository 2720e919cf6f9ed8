"""Conformal Riemannian metrics ``lambda(x) (dx1^2 + dx2^2)`` on planar domains.

Operators (gradient, divergence, Laplace-Beltrami, Gaussian curvature) accept
points whose components are floats or equally shaped numpy arrays, except
where noted.  General symmetric 2x2 metric fields (:class:`MetricField2x2`)
exist to host induced metrics of graphs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import NotPositiveDefiniteError, OutOfDomainError
from .fields import H_FD, ExprField, FunctionField, ScalarField, constant_field

STENCIL_MARGIN = 3 * H_FD


@dataclass(frozen=True)
class Domain:
    """Open rectangle (bounds may be infinite), optionally cut down by a predicate."""

    x1_min: float = -math.inf
    x1_max: float = math.inf
    x2_min: float = -math.inf
    x2_max: float = math.inf
    predicate: Optional[Callable] = None

    def contains(self, p, margin=0.0):
        x1, x2 = np.asarray(p[0]), np.asarray(p[1])
        ok = (
            (x1 > self.x1_min + margin) & (x1 < self.x1_max - margin)
            & (x2 > self.x2_min + margin) & (x2 < self.x2_max - margin)
        )
        if self.predicate is not None:
            ok = ok & np.asarray(self.predicate(p), dtype=bool)
        return bool(np.all(ok))

    def check(self, p, margin=STENCIL_MARGIN):
        if not self.contains(p, margin):
            raise OutOfDomainError(f"point {_fmt_point(p)} outside domain {self} (margin {margin:g})")

    def __str__(self):
        return f"({self.x1_min:g},{self.x1_max:g})x({self.x2_min:g},{self.x2_max:g})"


def _fmt_point(p):
    if np.ndim(p[0]) == 0:
        return f"({float(p[0]):.6g}, {float(p[1]):.6g})"
    return "<array of points>"


@dataclass(frozen=True)
class ConformalMetric:
    """``lam(x) (dx1^2 + dx2^2)`` on ``domain``."""

    lam: ScalarField
    domain: Domain = field(default_factory=Domain)
    name: str = "conformal"

    def check(self, p):
        self.domain.check(p)
        lam = self.lam.value(p)
        if np.any(lam <= 0):
            raise NotPositiveDefiniteError(f"conformal factor not positive at {_fmt_point(p)}")
        return lam

    def factor(self, p):
        return self.lam.value(p)

    def dlog(self, p):
        """Euclidean gradient of ``log(lam)``."""
        lam = self.lam.value(p)
        return np.array([self.lam.partial(1, p) / lam, self.lam.partial(2, p) / lam])

    def inner(self, p, v, w):
        return self.lam.value(p) * (v[0] * w[0] + v[1] * w[1])

    def norm_sq(self, p, v):
        return self.inner(p, v, v)

    def christoffel(self, p):
        """``G[k, i, j]`` = Christoffel symbol Gamma^k_ij (indices 0-based)."""
        d = self.dlog(p)
        gam = np.zeros((2, 2, 2))
        for k in range(2):
            for i in range(2):
                for j in range(2):
                    gam[k, i, j] = 0.5 * ((k == i) * d[j] + (k == j) * d[i] - (i == j) * d[k])
        return gam

    def as_metric_field(self):
        zero = constant_field(0.0)
        return MetricField2x2(self.lam, zero, self.lam, domain=self.domain)


def euclidean():
    return ConformalMetric(constant_field(1.0), Domain(), "euclidean")


def hyperbolic_half_plane():
    """Upper half-plane model of the hyperbolic plane, ``lam = 1/x2^2``."""
    return ConformalMetric(ExprField("1/x2^2"), Domain(x2_min=0.0), "hyperbolic-half-plane")


def sphere_model():
    """Stereographic round unit sphere, ``lam = 4/(1+|x|^2)^2`` (curvature +1)."""
    return ConformalMetric(ExprField("4/(1+x1^2+x2^2)^2"), Domain(), "sphere")


def conformal(lam_expr, domain=None, name="conformal"):
    lam = lam_expr if isinstance(lam_expr, ScalarField) else ExprField(lam_expr)
    return ConformalMetric(lam, domain or Domain(), name)


PRESETS = {
    "euclidean": euclidean,
    "hyperbolic-half-plane": hyperbolic_half_plane,
    "sphere": sphere_model,
}


def preset(name):
    try:
        return PRESETS[name]()
    except KeyError:
        raise ValueError(f"unknown metric preset {name!r}; known: {sorted(PRESETS)}") from None


# ---------------------------------------------------------------------------
# operators on conformal metrics

def gradient(m: ConformalMetric, f: ScalarField, p):
    """Metric gradient ``Df = (1/lam) D_o f``, returned as coordinate components."""
    lam = m.check(p)
    return np.array([f.partial(1, p) / lam, f.partial(2, p) / lam])


def divergence(m: ConformalMetric, X, p):
    """``Div X = Div_o X + <D_o log lam, X>_o`` for ``X = (X1, X2)`` scalar fields."""
    m.check(p)
    d = m.dlog(p)
    return X[0].partial(1, p) + X[1].partial(2, p) + d[0] * X[0].value(p) + d[1] * X[1].value(p)


def gauss_curvature(m: ConformalMetric, p):
    """``K = -Delta_o(log lam) / (2 lam)``."""
    lam = m.check(p)
    lap_log = 0.0
    for k in (1, 2):
        lk = m.lam.partial(k, p)
        lap_log = lap_log + m.lam.partial2(k, k, p) / lam - lk * lk / (lam * lam)
    return -lap_log / (2 * lam)


def rotate_j(v):
    """Positive quarter turn ``(a, b) -> (-b, a)``."""
    return np.array([-v[1], v[0]])


# ---------------------------------------------------------------------------
# general 2x2 metric fields

@dataclass(frozen=True)
class MetricField2x2:
    g11: ScalarField
    g12: ScalarField
    g22: ScalarField
    domain: Domain = field(default_factory=Domain)

    def entries(self, p):
        return self.g11.value(p), self.g12.value(p), self.g22.value(p)

    def at(self, p):
        a, b, c = self.entries(p)
        return np.array([[a, b], [b, c]])

    def d_entries(self, k, p):
        return self.g11.partial(k, p), self.g12.partial(k, p), self.g22.partial(k, p)

    def is_positive_definite(self, p):
        a, b, c = self.entries(p)
        return bool(np.all(a > 0) and np.all(a * c - b * b > 0))

    def check(self, p):
        self.domain.check(p)
        if not self.is_positive_definite(p):
            raise NotPositiveDefiniteError(f"metric not positive definite at {_fmt_point(p)}")

    def _fd_entries(self):
        return any(g.provenance != "symbolic" for g in (self.g11, self.g12, self.g22))


def laplace_beltrami(g: MetricField2x2, f: ScalarField, p):
    """``(1/sqrt det g) d_i (sqrt det g  g^ij d_j f)`` at ``p``.

    Metric-entry derivatives come from the entries' own partials (symbolic when
    the entries are symbolic, finite differences otherwise).
    """
    g.check(p)
    if g._fd_entries():
        h = max(g.g11.h_fd, g.g12.h_fd, g.g22.h_fd)
        for k in (1, 2):
            for s in (h, -h):
                g.check((p[0] + s, p[1]) if k == 1 else (p[0], p[1] + s))
    a, b, c = g.entries(p)
    det = a * c - b * b
    inv = (c / det, -b / det, a / det)  # g^11, g^12, g^22
    da = [g.d_entries(k, p) for k in (1, 2)]
    # d_k of inverse entries: -g^-1 (d_k g) g^-1
    dinv = []
    for k in range(2):
        e11, e12, e22 = da[k]
        i11, i12, i22 = inv
        t11 = i11 * e11 + i12 * e12
        t12 = i11 * e12 + i12 * e22
        t21 = i12 * e11 + i22 * e12
        t22 = i12 * e12 + i22 * e22
        dinv.append((
            -(t11 * i11 + t12 * i12),
            -(t11 * i12 + t12 * i22),
            -(t21 * i12 + t22 * i22),
        ))
    # (d_k sqrt det)/sqrt det = tr(g^-1 d_k g)/2
    half_tr = [0.5 * (inv[0] * e11 + 2 * inv[1] * e12 + inv[2] * e22) for (e11, e12, e22) in da]
    f1, f2 = f.partial(1, p), f.partial(2, p)
    f11, f12, f22 = f.partial2(1, 1, p), f.partial2(1, 2, p), f.partial2(2, 2, p)
    second = inv[0] * f11 + 2 * inv[1] * f12 + inv[2] * f22
    # b^j = sum_i (half_tr_i g^ij + d_i g^ij)
    b1 = half_tr[0] * inv[0] + half_tr[1] * inv[1] + dinv[0][0] + dinv[1][1]
    b2 = half_tr[0] * inv[1] + half_tr[1] * inv[2] + dinv[0][1] + dinv[1][2]
    return second + b1 * f1 + b2 * f2


def laplace_beltrami_conformal(m: ConformalMetric, f: ScalarField, p):
    """``(1/lam) Delta_o f``; the conformal special case of :func:`laplace_beltrami`."""
    lam = m.check(p)
    return (f.partial2(1, 1, p) + f.partial2(2, 2, p)) / lam


def brioschi_curvature(g: MetricField2x2, p, step=1e-4):
    """Gaussian curvature of ``g`` by the Brioschi formula.

    Only entry *values* are used; every derivative of ``E = g11``,
    ``F = g12``, ``G = g22`` is a centered difference with ``step``.
    Scalar points only.
    """
    x1, x2 = float(p[0]), float(p[1])
    h = step

    def ent(dx, dy):
        return np.array(g.entries((x1 + dx * h, x2 + dy * h)), dtype=float)

    c = ent(0, 0)
    e, f_, gg = c
    px, mx, py, my = ent(1, 0), ent(-1, 0), ent(0, 1), ent(0, -1)
    du = (px - mx) / (2 * h)
    dv = (py - my) / (2 * h)
    duu = (px - 2 * c + mx) / (h * h)
    dvv = (py - 2 * c + my) / (h * h)
    duv = (ent(1, 1) - ent(1, -1) - ent(-1, 1) + ent(-1, -1)) / (4 * h * h)
    e_u, f_u, g_u = du
    e_v, f_v, g_v = dv
    e_vv = dvv[0]
    g_uu = duu[2]
    f_uv = duv[1]
    m1 = np.array([
        [-0.5 * e_vv + f_uv - 0.5 * g_uu, 0.5 * e_u, f_u - 0.5 * e_v],
        [f_v - 0.5 * g_u, e, f_],
        [0.5 * g_v, f_, gg],
    ])
    m2 = np.array([
        [0.0, 0.5 * e_v, 0.5 * g_u],
        [0.5 * e_v, e, f_],
        [0.5 * g_u, f_, gg],
    ])
    return float((np.linalg.det(m1) - np.linalg.det(m2)) / (e * gg - f_ * f_) ** 2)


def conformal_rescale(g: MetricField2x2, factor: Callable, name=None):
    """Metric field ``factor(p) * g`` (values only; partials by finite differences)."""
    return MetricField2x2(
        FunctionField(lambda p: factor(p) * g.g11.value(p)),
        FunctionField(lambda p: factor(p) * g.g12.value(p)),
        FunctionField(lambda p: factor(p) * g.g22.value(p)),
        domain=g.domain,
    )
