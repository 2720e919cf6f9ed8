"""Extrinsic geometry of graphs ``x -> (x, u(x))`` over a conformal base.

The ambient space is ``M x R`` with metric ``g_M + dt^2`` (Riemannian
signature) or ``g_M - dt^2`` (Lorentzian signature).  Everything is expressed
in the base coordinates ``(x1, x2)``: a tangent vector ``X`` of the graph is
identified with its projection to the base.

Sign conventions follow the future-pointing normal in the Lorentzian case:
``N = (Du + d_t)/sqrt(1-|Du|^2)``, ``Theta = <N, d_t> = -1/sqrt(1-|Du|^2)``,
``A X = -nabla_X N`` and ``H = -tr(A)/2``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NonSpacelikeError, OutOfDomainError
from .fields import FunctionField, ScalarField
from .metrics import (
    ConformalMetric,
    MetricField2x2,
    brioschi_curvature,
    conformal_rescale,
    divergence,
    gauss_curvature,
    laplace_beltrami,
)

LIGHTLIKE_GUARD = 1e-10


class Signature(enum.Enum):
    RIEMANNIAN = "riemannian"
    LORENTZIAN = "lorentzian"

    @property
    def eps(self):
        """+1 when the height direction is timelike, -1 otherwise."""
        return 1 if self is Signature.LORENTZIAN else -1

    @classmethod
    def parse(cls, text):
        if isinstance(text, Signature):
            return text
        return cls(text.lower())


@dataclass(frozen=True)
class GraphSurface:
    metric: ConformalMetric
    u: ScalarField
    signature: Signature = Signature.LORENTZIAN

    @property
    def lorentzian(self):
        return self.signature is Signature.LORENTZIAN


@dataclass(frozen=True)
class CausalReport:
    spacelike: bool
    theta: float  # nan for Riemannian signature or non-spacelike points
    grad_norm_sq: float


# ---------------------------------------------------------------------------
# pointwise building blocks

def grad_norm_sq(u: ScalarField, m: ConformalMetric, p):
    """``|Du|^2`` measured in the base metric."""
    lam = m.check(p)
    u1, u2 = u.partial(1, p), u.partial(2, p)
    return (u1 * u1 + u2 * u2) / lam


def _require_spacelike(G, p):
    if np.any(1.0 - G < LIGHTLIKE_GUARD):
        raise NonSpacelikeError(f"|Du|^2 = {np.max(G):.17g} is not spacelike (guard {LIGHTLIKE_GUARD:g}) at {p}")


def _weight(s: GraphSurface, p):
    """``(lam, G, W)`` with ``W^2 = 1 - eps G``; enforces the spacelike guard."""
    lam = s.metric.check(p)
    u1, u2 = s.u.partial(1, p), s.u.partial(2, p)
    G = (u1 * u1 + u2 * u2) / lam
    if s.lorentzian:
        _require_spacelike(G, p)
    return lam, G, np.sqrt(1.0 - s.signature.eps * G)


def induced_metric(s: GraphSurface, p, guard=True):
    """Coordinate matrix of ``g_M -/+ du (x) du`` at ``p``.

    With ``guard=False`` the lightlike guard is skipped (used by length
    integrals, whose integrand stays bounded as the graph turns null); a
    strictly timelike point still raises.
    """
    lam = s.metric.check(p)
    u1, u2 = s.u.partial(1, p), s.u.partial(2, p)
    if s.lorentzian:
        G = (u1 * u1 + u2 * u2) / lam
        if guard:
            _require_spacelike(G, p)
        elif np.any(G > 1.0):
            raise NonSpacelikeError(f"timelike point {p}: |Du|^2 = {np.max(G):.17g}")
    e = s.signature.eps
    return np.array([[lam - e * u1 * u1, -e * u1 * u2], [-e * u1 * u2, lam - e * u2 * u2]])


def induced_metric_field(s: GraphSurface) -> MetricField2x2:
    """Induced metric as a field; entry partials are exact given ``u``'s second partials."""
    e = s.signature.eps
    m, u = s.metric, s.u

    def entry(i, j):
        def value(p):
            return m.lam.value(p) * (i == j) - e * u.partial(i, p) * u.partial(j, p)

        def grad(k, p):
            return (
                m.lam.partial(k, p) * (i == j)
                - e * (u.partial2(i, k, p) * u.partial(j, p) + u.partial(i, p) * u.partial2(j, k, p))
            )

        return FunctionField(value, grad=grad, name=f"g{i}{j}")

    return MetricField2x2(entry(1, 1), entry(1, 2), entry(2, 2), domain=m.domain)


def causal_report(s: GraphSurface, p) -> CausalReport:
    lam = s.metric.check(p)
    u1, u2 = s.u.partial(1, p), s.u.partial(2, p)
    G = float((u1 * u1 + u2 * u2) / lam)
    if not s.lorentzian:
        return CausalReport(True, math.nan, G)
    spacelike = 1.0 - G >= LIGHTLIKE_GUARD
    theta = -1.0 / math.sqrt(1.0 - G) if spacelike else math.nan
    return CausalReport(spacelike, theta, G)


def gauss_map(s: GraphSurface, p):
    """Future-pointing unit normal split as ``(base part, d_t part)``.

    Base part ``Du/sqrt(1-|Du|^2)`` in coordinates, ``d_t`` part ``1/sqrt(1-|Du|^2)``.
    """
    if not s.lorentzian:
        raise ValueError("gauss_map is defined for Lorentzian graphs")
    lam, G, W = _weight(s, p)
    du = np.array([s.u.partial(1, p), s.u.partial(2, p)]) / lam
    return du / W, 1.0 / W


def covariant_hessian_of_gradient(u: ScalarField, m: ConformalMetric, p):
    """Matrix ``C[i, j] = (D_{d_j} Du)^i`` for the base Levi-Civita connection."""
    lam = m.check(p)
    lam_d = np.array([m.lam.partial(1, p), m.lam.partial(2, p)])
    du = np.array([u.partial(1, p), u.partial(2, p)])
    hess = u.hessian(p)
    vec = du / lam
    gam = m.christoffel(p)
    C = np.empty((2, 2))
    for i in range(2):
        for j in range(2):
            C[i, j] = hess[i, j] / lam - du[i] * lam_d[j] / lam**2 + gam[i, j, :] @ vec
    return C


def shape_operator(s: GraphSurface, p):
    """Coordinate matrix of ``A`` (columns are ``A d_j``).

    ``A X = -(1/W) D_X Du - eps <D_X Du, Du>/W^3 Du`` with ``W^2 = 1 - eps|Du|^2``.
    """
    lam, G, W = _weight(s, p)
    e = s.signature.eps
    C = covariant_hessian_of_gradient(s.u, s.metric, p)
    vec = np.array([s.u.partial(1, p), s.u.partial(2, p)]) / lam
    A = np.empty((2, 2))
    for j in range(2):
        col = C[:, j]
        A[:, j] = -col / W - e * (lam * (col @ vec)) / W**3 * vec
    return A


def normalized_gradient_fields(u: ScalarField, m: ConformalMetric, eps: int):
    """Components of ``Du / sqrt(1 - eps |Du|^2)`` with exact first partials."""

    def parts(p):
        lam = m.lam.value(p)
        u1, u2 = u.partial(1, p), u.partial(2, p)
        G = (u1 * u1 + u2 * u2) / lam
        return lam, (u1, u2), G, np.sqrt(1.0 - eps * G)

    def make(i):
        def value(p):
            lam, du, G, W = parts(p)
            return du[i - 1] / (lam * W)

        def grad(k, p):
            lam, du, G, W = parts(p)
            lk = m.lam.partial(k, p)
            ui = du[i - 1]
            uik = u.partial2(i, k, p)
            dG = 2 * (du[0] * u.partial2(1, k, p) + du[1] * u.partial2(2, k, p)) / lam - G * lk / lam
            dW = -eps * dG / (2 * W)
            return (uik / lam - ui * lk / lam**2) / W - (ui / lam) * dW / W**2

        return FunctionField(value, grad=grad, name=f"X{i}")

    return make(1), make(2)


def mean_curvature(s: GraphSurface, p):
    """``H = (1/2) Div(Du / sqrt(1 -/+ |Du|^2))`` (equals ``-tr(A)/2``)."""
    _weight(s, p)
    X = normalized_gradient_fields(s.u, s.metric, s.signature.eps)
    return 0.5 * divergence(s.metric, X, p)


def residual_minimal(u: ScalarField, m: ConformalMetric, p):
    """``Minimal[u] = Div(Du / sqrt(1 + |Du|^2))``; accepts array points."""
    m.check(p)
    return divergence(m, normalized_gradient_fields(u, m, -1), p)


def residual_maximal(w: ScalarField, m: ConformalMetric, p):
    """``Maximal[w] = Div(Dw / sqrt(1 - |Dw|^2))``; requires ``|Dw|^2 < 1``."""
    _require_spacelike(grad_norm_sq(w, m, p), p)
    return divergence(m, normalized_gradient_fields(w, m, +1), p)


def residual_minimal_halfplane(u: ScalarField, p):
    """Explicit half-plane expansion of ``Minimal[u]`` for ``lam = 1/x2^2``.

    ``x2^2 Lap_o u / S - x2^2 (x2 u_2 |D_o u|^2 + x2^2 Q(u)) / S^3`` with
    ``S = sqrt(1 + x2^2 |D_o u|^2)`` and
    ``Q(u) = u_1^2 u_11 + 2 u_1 u_2 u_12 + u_2^2 u_22``.
    """
    x2 = p[1]
    if np.any(np.asarray(x2) <= 0):
        raise OutOfDomainError("half-plane expansion needs x2 > 0")
    u1, u2 = u.partial(1, p), u.partial(2, p)
    u11, u12, u22 = u.partial2(1, 1, p), u.partial2(1, 2, p), u.partial2(2, 2, p)
    go = u1 * u1 + u2 * u2
    S = np.sqrt(1.0 + x2 * x2 * go)
    return x2 * x2 * (u11 + u22) / S - x2 * x2 * (x2 * u2 * go + x2 * x2 * q_term(u, p)) / S**3


def q_term(u: ScalarField, p):
    """``Q(u) = u_1^2 u_11 + 2 u_1 u_2 u_12 + u_2^2 u_22`` (Euclidean partials)."""
    u1, u2 = u.partial(1, p), u.partial(2, p)
    return u1 * u1 * u.partial2(1, 1, p) + 2 * u1 * u2 * u.partial2(1, 2, p) + u2 * u2 * u.partial2(2, 2, p)


# ---------------------------------------------------------------------------
# hyperbolic angle and friends as fields

def theta_fields(s: GraphSurface):
    """``Theta``, ``1/Theta`` and ``log(1 - Theta)`` as fields with exact gradients."""
    if not s.lorentzian:
        raise ValueError("Theta is defined for Lorentzian graphs")
    m, u = s.metric, s.u

    def parts(p):
        lam = m.lam.value(p)
        u1, u2 = u.partial(1, p), u.partial(2, p)
        G = (u1 * u1 + u2 * u2) / lam
        return lam, u1, u2, G, np.sqrt(1.0 - G)

    def dG(k, p):
        lam, u1, u2, G, _ = parts(p)
        return 2 * (u1 * u.partial2(1, k, p) + u2 * u.partial2(2, k, p)) / lam - G * m.lam.partial(k, p) / lam

    def theta(p):
        return -1.0 / parts(p)[4]

    def dtheta(k, p):
        W = parts(p)[4]
        return -dG(k, p) / (2 * W**3)

    theta_f = FunctionField(theta, grad=dtheta, name="Theta")
    inv_f = FunctionField(lambda p: -parts(p)[4], grad=lambda k, p: dG(k, p) / (2 * parts(p)[4]), name="1/Theta")
    log_f = FunctionField(
        lambda p: np.log(1.0 - theta(p)),
        grad=lambda k, p: -dtheta(k, p) / (1.0 - theta(p)),
        name="log(1-Theta)",
    )
    return theta_f, inv_f, log_f


# ---------------------------------------------------------------------------
# the identity report

@dataclass
class PointReport:
    point: tuple
    theta: float
    grad_h_norm_sq: float
    mean_curvature: float
    shape_op: np.ndarray
    norm_A_sq: float
    det_A: float
    kappa_M: float
    K_gauss_eq: float
    K_numeric: float
    laplace_inv_theta: float
    khat_scaled: float
    maximal: bool
    subharmonic_ok: bool | None
    residuals: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "point": [float(self.point[0]), float(self.point[1])],
            "theta": self.theta,
            "H": self.mean_curvature,
            "K_gauss": self.K_gauss_eq,
            "K_numeric": self.K_numeric,
            "normA2": self.norm_A_sq,
            "detA": self.det_A,
            "kappaM": self.kappa_M,
            "gradH2": self.grad_h_norm_sq,
            "A": self.shape_op.tolist(),
            "lapInvTheta": self.laplace_inv_theta,
            "khatScaled": self.khat_scaled,
            "maximal": self.maximal,
            "subharmonicOK": self.subharmonic_ok,
            "residuals": dict(self.residuals),
        }


def _gnorm(g, v):
    return math.sqrt(max(float(v @ g @ v), 0.0))


def invariant_report(s: GraphSurface, p, maximal_tol=1e-6, brioschi_step=1e-4, sign_tol=1e-8) -> PointReport:
    """Geometric quantities at ``p`` and the residuals of the height/angle identities.

    Identities that assume ``H = 0`` are evaluated only when ``|H| <= maximal_tol``.
    The subharmonicity sign of ``1/Theta`` is asserted only where ``kappa_M >= 0``.
    """
    if not s.lorentzian:
        raise ValueError("invariant_report needs a Lorentzian graph")
    p = (float(p[0]), float(p[1]))
    lam, G, W = _weight(s, p)
    theta = -1.0 / W
    du = np.array([s.u.partial(1, p), s.u.partial(2, p)])

    gfield = induced_metric_field(s)
    g = gfield.at(p)
    ginv = np.linalg.inv(g)
    grad_h = ginv @ du
    grad_h_sq = float(du @ ginv @ du)

    A = shape_operator(s, p)
    H = float(mean_curvature(s, p))
    norm_A2 = float(np.trace(A @ A))
    det_A = float(np.linalg.det(A))
    kappa = float(gauss_curvature(s.metric, p))
    K_gauss = kappa * theta**2 - det_A
    K_num = brioschi_curvature(gfield, p, step=brioschi_step)

    theta_f, inv_f, log_f = theta_fields(s)
    dtheta = np.array([theta_f.partial(1, p), theta_f.partial(2, p)])
    grad_theta = ginv @ dtheta

    lap_h = float(laplace_beltrami(gfield, s.u, p))
    res = {
        "grad_h_norm": abs(grad_h_sq - (theta**2 - 1.0)),
        "laplace_h": abs(lap_h + 2.0 * H * theta),
        "grad_theta": _gnorm(g, grad_theta - A @ grad_h),
        "gauss_K": abs(K_gauss - K_num),
    }

    lap_inv = float(laplace_beltrami(gfield, inv_f, p))
    lap_log = float(laplace_beltrami(gfield, log_f, p))
    khat_scaled = K_gauss - lap_log
    maximal = abs(H) <= maximal_tol
    if maximal:
        lap_theta = float(laplace_beltrami(gfield, theta_f, p))
        norm_grad_theta_sq = float(grad_theta @ g @ grad_theta)
        res["trace_A"] = abs(float(np.trace(A)))
        res["A_squared"] = float(np.max(np.abs(A @ A - 0.5 * norm_A2 * np.eye(2))))
        res["det_A"] = abs(det_A + 0.5 * norm_A2)
        res["norm_grad_theta"] = abs(norm_grad_theta_sq - 0.5 * norm_A2 * (theta**2 - 1.0))
        res["laplace_theta"] = abs(lap_theta - theta * (kappa * (theta**2 - 1.0) + norm_A2))
        res["laplace_inv_theta"] = abs(lap_inv + (kappa * (theta**2 - 1.0) + norm_A2 / theta**2) / theta)
        res["laplace_log"] = abs(lap_log - (K_gauss + theta * kappa))
        ghat = conformal_rescale(gfield, lambda q: (1.0 - theta_f.value(q)) ** 2)
        khat = brioschi_curvature(ghat, p, step=brioschi_step)
        res["khat"] = abs((1.0 - theta) ** 2 * khat - khat_scaled)

    subharmonic = None
    if maximal and kappa >= 0:
        subharmonic = lap_inv >= -sign_tol
    return PointReport(
        point=p,
        theta=theta,
        grad_h_norm_sq=grad_h_sq,
        mean_curvature=H,
        shape_op=A,
        norm_A_sq=norm_A2,
        det_A=det_A,
        kappa_M=kappa,
        K_gauss_eq=K_gauss,
        K_numeric=K_num,
        laplace_inv_theta=lap_inv,
        khat_scaled=khat_scaled,
        maximal=maximal,
        subharmonic_ok=subharmonic,
        residuals={k: float(v) for k, v in res.items()},
    )
