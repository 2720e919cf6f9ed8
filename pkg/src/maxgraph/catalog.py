"""Built-in surfaces: explicit minimal graphs over the hyperbolic half-plane,
their maximal duals, a flat entire spacelike graph that is not complete,
slices and affine planes.

Every entry is addressable by name through :func:`get_example`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fields import ExprField, FunctionField, PotentialField, ScalarField
from .graph import GraphSurface, Signature
from .metrics import ConformalMetric, euclidean, hyperbolic_half_plane

# Partials of the two dual maximal graphs, as functions of (x1, x2).
W1_PARTIALS = (
    "-(2*x2)/sqrt((x1^2+x2^2)*(x1^2+5*x2^2))",
    "(2*x1)/sqrt((x1^2+x2^2)*(x1^2+5*x2^2))",
)
W2_PARTIALS = (
    "(2*x1*x2)/((x1^2+x2^2)*sqrt((x1^2+x2^2)^2+x2^2))",
    "(x2^2-x1^2)/((x1^2+x2^2)*sqrt((x1^2+x2^2)^2+x2^2))",
)
W2_EXPR = "log((x1^2+x2^2)/(2*(x2+sqrt(x2^2+(x1^2+x2^2)^2))))"
MINIMAL_LOG_EXPR = "log(x1^2+x2^2)"
MINIMAL_INV_EXPR = "x1/(x1^2+x2^2)"

W1_MODULUS = 2 / math.sqrt(5)


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    metric_name: str
    metric: ConformalMetric
    signature: Signature
    u: ScalarField
    known_properties: frozenset
    closed_form_partials: tuple | None = None
    expression: str | None = None
    description: str = ""
    extras: dict = field(default_factory=dict)

    def surface(self) -> GraphSurface:
        return GraphSurface(self.metric, self.u, self.signature)


# ---------------------------------------------------------------------------
# elliptic integral of the first kind

def carlson_rf(x, y, z, rtol=1e-16):
    """Carlson's symmetric integral R_F(x, y, z) by the duplication theorem.

    Arguments are non-negative with at most one zero.
    """
    if min(x, y, z) < 0 or (x == 0) + (y == 0) + (z == 0) > 1:
        raise ValueError("carlson_rf needs non-negative arguments, at most one zero")
    for _ in range(100):
        sx, sy, sz = math.sqrt(x), math.sqrt(y), math.sqrt(z)
        lam = sx * sy + sy * sz + sz * sx
        x, y, z = (x + lam) / 4, (y + lam) / 4, (z + lam) / 4
        mu = (x + y + z) / 3
        dx, dy, dz = 1 - x / mu, 1 - y / mu, 1 - z / mu
        if max(abs(dx), abs(dy), abs(dz)) < 1e-4:
            break
    e2 = dx * dy - dz * dz
    e3 = dx * dy * dz
    return (1 - e2 / 10 + e3 / 14 + e2 * e2 / 24 - 3 * e2 * e3 / 44) / math.sqrt(mu)


def elliptic_f(phi, k):
    """Incomplete elliptic integral ``F(phi, k) = int_0^phi dt / sqrt(1 - k^2 sin^2 t)``."""
    phi = float(phi)
    k = float(k)
    if not (0 <= abs(k) < 1):
        raise ValueError(f"elliptic modulus must satisfy |k| < 1, got {k}")
    if abs(phi) > math.pi / 2 + 1e-15:
        raise ValueError(f"amplitude must satisfy |phi| <= pi/2, got {phi}")
    if phi == 0:
        return 0.0
    s = math.sin(phi)
    c = math.cos(phi)
    return s * carlson_rf(c * c, 1 - k * k * s * s, 1.0)


# ---------------------------------------------------------------------------
# w1: value by real quadrature of its x1-partial

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(48)


def _gl_0_to(a, f):
    """``int_0^a f`` for an array of upper limits ``0 <= a <= 1`` (single 48-point rule)."""
    a = np.asarray(a, dtype=float)
    t = 0.5 * a[..., None] * (_GL_NODES + 1.0)
    return 0.5 * a * np.sum(_GL_WEIGHTS * f(t), axis=-1)


def _w1_of_ratio(tau):
    """``w1`` as a function of ``tau = x1/x2`` (it is homogeneous of degree 0).

    ``w1 = -2 int_0^tau dt / sqrt((1+t^2)(5+t^2))``; the tail ``|tau| > 1``
    is folded onto ``[0, 1]`` by ``t -> 1/t`` so every integrand is smooth and
    bounded.
    """
    tau = np.asarray(tau, dtype=float)
    a = np.abs(tau)
    near = lambda t: 1.0 / np.sqrt((1 + t * t) * (5 + t * t))  # noqa: E731
    far = lambda s: 1.0 / np.sqrt((1 + s * s) * (1 + 5 * s * s))  # noqa: E731
    head = _gl_0_to(np.minimum(a, 1.0), near)
    with np.errstate(divide="ignore"):
        inv = np.where(a > 1, 1.0 / np.where(a > 1, a, 1.0), 1.0)
    tail = np.where(a > 1, _gl_0_to(np.ones_like(a), far) - _gl_0_to(inv, far), 0.0)
    return -2.0 * np.sign(tau) * (head + tail)


def w1_quadrature(p):
    x1, x2 = p
    if np.any(np.asarray(x2) <= 0):
        raise ValueError("w1 is defined on the upper half-plane")
    res = _w1_of_ratio(np.asarray(x1, dtype=float) / np.asarray(x2, dtype=float))
    return float(res) if np.ndim(res) == 0 else res


def w1_elliptic(x1, x2):
    """Real form of the imaginary-amplitude closed form:
    ``w1 = -(2/sqrt 5) F(arctan(x1/x2), 2/sqrt 5)`` (imaginary transformation)."""
    return -(2 / math.sqrt(5)) * elliptic_f(math.atan(x1 / x2), W1_MODULUS)


# ---------------------------------------------------------------------------
# flat entire spacelike graph that is not complete

def _v(x):
    return np.sqrt(-np.expm1(-x))


def flat_profile(x):
    """``int_0^x sqrt(1 - e^-t) dt`` for ``x >= 0`` in a cancellation-free form."""
    x = np.asarray(x, dtype=float)
    v = _v(x)
    return 2 * np.log1p(v) + x - 2 * v


def _flat_profile_d2(x):
    return np.exp(-x) / (2 * _v(x))


def smoothing_coefficients():
    """Even quartic ``a + b s^2 + c s^4`` matching the profile to second order at ``s = 1``."""
    f0 = float(flat_profile(1.0))
    f1 = float(_v(1.0))
    f2 = float(_flat_profile_d2(1.0))
    c = (f2 - f1) / 8
    b = (f1 - 4 * c) / 2
    a = f0 - b - c
    return a, b, c


_A, _B, _C = smoothing_coefficients()


def _flat_value(p):
    x = np.asarray(p[0], dtype=float)
    a = np.abs(x)
    inner = _A + _B * x**2 + _C * x**4
    res = np.where(a >= 1, flat_profile(np.maximum(a, 1.0)), inner)
    return res + 0 * np.asarray(p[1], dtype=float)


def _flat_d1(p):
    x = np.asarray(p[0], dtype=float)
    a = np.abs(x)
    res = np.where(a >= 1, np.sign(x) * _v(np.maximum(a, 1.0)), 2 * _B * x + 4 * _C * x**3)
    return res + 0 * np.asarray(p[1], dtype=float)


def _flat_d11(p):
    x = np.asarray(p[0], dtype=float)
    a = np.abs(x)
    res = np.where(a >= 1, _flat_profile_d2(np.maximum(a, 1.0)), 2 * _B + 12 * _C * x**2)
    return res + 0 * np.asarray(p[1], dtype=float)


def _scalar(f):
    def g(*args):
        r = f(*args)
        return float(r) if np.ndim(r) == 0 else r

    return g


def flat_incomplete_field():
    zero = _scalar(lambda p: 0 * np.asarray(p[0], dtype=float) * np.asarray(p[1], dtype=float))
    return FunctionField(
        _scalar(_flat_value),
        grad=lambda i, p: _scalar(_flat_d1)(p) if i == 1 else zero(p),
        hess=lambda i, j, p: _scalar(_flat_d11)(p) if i == j == 1 else zero(p),
        name="flat-incomplete",
    )


def smoothing_derivative(s):
    return 2 * _B * s + 4 * _C * s**3


# ---------------------------------------------------------------------------
# registry

def make_slice(metric=None, t0=0.0, metric_name="hyperbolic-half-plane"):
    m = metric or hyperbolic_half_plane()
    return CatalogEntry(
        "slice", metric_name, m, Signature.LORENTZIAN, ExprField(repr(float(t0))),
        frozenset({"maximal", "entire", "complete", "totally_geodesic"}),
        expression=repr(float(t0)), description=f"slice at height {t0}",
    )


def make_affine(a1=0.25, a2=0.25, c=0.0):
    if a1 * a1 + a2 * a2 >= 1:
        raise ValueError("affine plane must be spacelike: a1^2 + a2^2 < 1")
    text = f"{a1!r}*x1+{a2!r}*x2+{c!r}"
    return CatalogEntry(
        "affine", "euclidean", euclidean(), Signature.LORENTZIAN, ExprField(text),
        frozenset({"maximal", "entire", "complete", "totally_geodesic"}),
        closed_form_partials=(ExprField(repr(a1)), ExprField(repr(a2))),
        expression=text, description="spacelike affine plane in flat Minkowski space",
    )


def _minimal_log():
    return CatalogEntry(
        "minimal-log", "hyperbolic-half-plane", hyperbolic_half_plane(), Signature.RIEMANNIAN,
        ExprField(MINIMAL_LOG_EXPR), frozenset({"minimal", "entire"}),
        expression=MINIMAL_LOG_EXPR, description="entire minimal graph log(x1^2+x2^2)",
    )


def _minimal_inv():
    return CatalogEntry(
        "minimal-inv", "hyperbolic-half-plane", hyperbolic_half_plane(), Signature.RIEMANNIAN,
        ExprField(MINIMAL_INV_EXPR), frozenset({"minimal", "entire"}),
        expression=MINIMAL_INV_EXPR, description="entire minimal graph x1/(x1^2+x2^2)",
    )


def _maximal_w1():
    partials = tuple(ExprField(t) for t in W1_PARTIALS)
    return CatalogEntry(
        "maximal-w1", "hyperbolic-half-plane", hyperbolic_half_plane(), Signature.LORENTZIAN,
        PotentialField(w1_quadrature, W1_PARTIALS, name="maximal-w1"),
        frozenset({"maximal", "entire", "complete"}),
        closed_form_partials=partials,
        description="dual of minimal-log; value by quadrature of its x1-partial from the x2-axis",
    )


def _maximal_w2():
    return CatalogEntry(
        "maximal-w2", "hyperbolic-half-plane", hyperbolic_half_plane(), Signature.LORENTZIAN,
        ExprField(W2_EXPR), frozenset({"maximal", "entire", "incomplete"}),
        closed_form_partials=tuple(ExprField(t) for t in W2_PARTIALS),
        expression=W2_EXPR, description="dual of minimal-inv, closed form",
    )


def _flat_incomplete():
    return CatalogEntry(
        "flat-incomplete", "euclidean", euclidean(), Signature.LORENTZIAN,
        flat_incomplete_field(), frozenset({"entire", "incomplete"}),
        description="entire spacelike graph over the plane that is not complete",
        extras={"smoothing": dict(zip("abc", smoothing_coefficients()))},
    )


_REGISTRY = {
    "minimal-log": _minimal_log,
    "minimal-inv": _minimal_inv,
    "maximal-w1": _maximal_w1,
    "maximal-w2": _maximal_w2,
    "flat-incomplete": _flat_incomplete,
    "slice": make_slice,
    "affine": make_affine,
}

NAMES = tuple(_REGISTRY)


def get_example(name) -> CatalogEntry:
    try:
        return _REGISTRY[name]()
    except KeyError:
        raise KeyError(f"unknown catalog entry {name!r}; known: {', '.join(NAMES)}") from None
