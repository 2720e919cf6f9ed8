"""Lengths of curves on graphs and completeness probes.

A divergent curve of finite induced length certifies that a graph is not
complete.  A positive lower bound ``g >= c g_M`` against a complete base
metric certifies completeness; :func:`metric_ratio_scan` estimates the best
such ``c`` on a sample.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import NonSpacelikeError, OutOfDomainError, QuadratureError
from .expr import compile_expr, differentiate, parse, to_string
from .graph import LIGHTLIKE_GUARD, GraphSurface
from .metrics import ConformalMetric

L_MAX = 1e3
MAX_PIECES = 200
TIMELIKE_SLACK = 1e-12
NOISE_FRACTION = 1e-2


@dataclass(frozen=True)
class Curve:
    """``s -> (x1(s), x2(s))`` on ``(a, b)``; ``improper`` flags endpoints that are not attained."""

    func: object
    deriv: object
    a: float
    b: float
    improper: tuple = (False, False)
    name: str = "curve"
    source: tuple | None = None

    @classmethod
    def from_exprs(cls, x1, x2, interval, improper=(False, False), name="curve"):
        """Curve from component expressions in the parameter ``s``."""
        e1 = parse(x1, variables=("s",)) if isinstance(x1, str) else x1
        e2 = parse(x2, variables=("s",)) if isinstance(x2, str) else x2
        f1, f2 = compile_expr(e1, ("s",)), compile_expr(e2, ("s",))
        d1 = compile_expr(differentiate(e1, "s"), ("s",))
        d2 = compile_expr(differentiate(e2, "s"), ("s",))

        def func(s):
            s = np.asarray(s, dtype=float)
            return np.broadcast_to(f1(s), s.shape) + 0.0, np.broadcast_to(f2(s), s.shape) + 0.0

        def deriv(s):
            s = np.asarray(s, dtype=float)
            return np.broadcast_to(d1(s), s.shape) + 0.0, np.broadcast_to(d2(s), s.shape) + 0.0

        a, b = (float(t) for t in interval)
        return cls(func, deriv, a, b, tuple(bool(t) for t in improper), name, (to_string(e1), to_string(e2)))

    def reparametrized(self, phi, dphi, a, b, improper=None):
        """``c(phi(t))`` for an increasing ``phi`` mapping ``(a, b)`` onto this curve's interval."""

        def func(t):
            return self.func(phi(t))

        def deriv(t):
            d1, d2 = self.deriv(phi(t))
            k = dphi(t)
            return d1 * k, d2 * k

        return Curve(func, deriv, a, b, improper or self.improper, self.name + "'")


@dataclass
class LengthResult:
    length: float
    converged: bool
    status: str  # finite | roundoff-limited | exceeds-lmax | non-decaying | not-converged
    error_estimate: float = 0.0
    pieces: int = 0
    tails: list = field(default_factory=list)

    def __float__(self):
        return float(self.length)

    @property
    def lower_bound_only(self):
        """True when the integral may diverge and ``length`` is only a partial sum."""
        return self.status not in ("finite", "roundoff-limited")


def speed(s: GraphSurface, c: Curve, t):
    """``||c'(t)||_g`` under the induced metric (no lightlike guard; clamped at 0)."""
    t = np.asarray(t, dtype=float)
    p = c.func(t)
    if not s.metric.domain.contains(p, margin=0.0):
        raise OutOfDomainError(f"curve {c.name} leaves the metric domain")
    lam = s.metric.lam.value(p)
    if np.any(lam <= 0):
        raise OutOfDomainError(f"conformal factor not positive along {c.name}")
    u1, u2 = s.u.partial(1, p), s.u.partial(2, p)
    # lightlike limits (ideal boundaries) may overshoot 1 by roundoff
    if s.lorentzian and np.any((u1 * u1 + u2 * u2) / lam > 1.0 + TIMELIKE_SLACK):
        raise NonSpacelikeError(f"curve {c.name} meets a timelike point of the graph")
    d1, d2 = c.deriv(t)
    du = u1 * d1 + u2 * d2
    g = lam * (d1 * d1 + d2 * d2) - s.signature.eps * du * du
    return np.sqrt(np.maximum(g, 0.0))


def _quad(f, lo, hi, tol, limit=200):
    if lo == hi:
        return 0.0, 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(lambda t: float(f(t)), lo, hi, epsabs=tol, epsrel=1e-12, limit=limit)
    return val, err


_GL = {n: np.polynomial.legendre.leggauss(n) for n in (24, 40)}


def _piece(f, lo, hi, tol):
    """One tail piece by two Gauss-Legendre rules.

    Adaptive quadrature is called only when the rules disagree by more than
    1e-4 relative (a kink or a near-singularity).  Smaller disagreements are
    roundoff in the integrand, which adaptivity cannot remove; they are
    returned as the error estimate.
    """
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    vals = [half * np.sum(w * f(mid + half * x)) for x, w in (_GL[24], _GL[40])]
    diff = abs(vals[1] - vals[0])
    if diff <= max(tol, 1e-4 * abs(vals[1])):
        return float(vals[1]), float(diff)
    # a kink needs few subdivisions; more only chase roundoff
    return _quad(f, lo, hi, tol, limit=50)


def _tail(f, start, end, tol, l_max, sign):
    """Integral from ``start`` toward the (improper) ``end`` by geometric pieces.

    Pieces halve toward a finite endpoint and double toward an infinite one.
    Seven non-shrinking pieces in a row mean the tail diverges (reported as
    exceeding ``l_max``); slowly shrinking ones are reported as non-decaying.
    The running sum is completed by a geometric-series estimate of the
    remainder from the last two pieces.  The tail is accepted when the
    completed sum moves by less than ``tol/10``, when three successive pieces
    are below ``tol/10``, or when the moves start growing again after falling
    below ``tol``, or when a piece is dominated by its own rule disagreement
    (both are signs that the integrand's roundoff floor has been reached).
    """
    finite = math.isfinite(end)
    total = 0.0
    err = 0.0
    pieces = []
    est_prev = d_prev = None
    r_last = 0.0
    small_pieces = 0
    lo = start
    for k in range(MAX_PIECES):
        if finite:
            hi = end + (start - end) * 2.0 ** (-(k + 1))
        else:
            hi = start + sign * (2.0 ** (k + 1) - 1.0)
        a, b = (lo, hi) if sign > 0 else (hi, lo)
        piece, e = _piece(f, a, b, tol / 100)
        if est_prev is not None and e > NOISE_FRACTION * abs(piece) and e > tol / 100:
            # roundoff floor: later pieces would be pure noise, so close the sum here
            # with this piece and the last clean decay ratio
            rest = abs(piece) * r_last / (1 - r_last)
            pieces.append(piece)
            err += e + rest
            return total + piece + rest, err, "finite" if err <= tol else "roundoff-limited", pieces
        total += piece
        err += e
        pieces.append(piece)
        lo = hi
        if total > l_max:
            return total, err, "exceeds-lmax", pieces
        small_pieces = small_pieces + 1 if abs(piece) < tol / 10 else 0
        if small_pieces >= 3:
            return total, err, "finite", pieces
        if len(pieces) < 2 or pieces[-2] <= 0:
            continue
        r = piece / pieces[-2]
        if len(pieces) >= 8:
            ratios = [q2 / q if q > 0 else 0.0 for q, q2 in zip(pieces[-7:-1], pieces[-6:])]
            if min(ratios) >= 1 - 1e-6:
                # pieces no longer shrink: the completed series diverges
                return total, err, "exceeds-lmax", pieces
            if min(ratios) >= 0.95:
                return total, err, "non-decaying", pieces
        if not 0 <= r < 1:
            est_prev = d_prev = None
            continue
        r_last = r
        est = total + piece * r / (1 - r)
        if est_prev is not None:
            d = abs(est - est_prev)
            if len(pieces) >= 3 and d < tol / 10:
                return est, err + d, "finite", pieces
            if d_prev is not None and d >= d_prev and d_prev < tol:
                return est_prev, err + d_prev, "finite", pieces
            d_prev = d
        est_prev = est
    return total, err, "not-converged", pieces


def curve_length(s: GraphSurface, c: Curve, tol=1e-10, l_max=L_MAX) -> LengthResult:
    """Induced length ``int ||c'(t)||_g dt`` with improper endpoints handled by tails."""
    a, b = c.a, c.b
    imp_a, imp_b = c.improper
    if not imp_a and not math.isfinite(a) or not imp_b and not math.isfinite(b):
        raise QuadratureError("infinite endpoints must be flagged improper")
    f = lambda t: speed(s, c, t)  # noqa: E731
    if not imp_a and not imp_b:
        val, err = _quad(f, a, b, tol / 10)
        return LengthResult(val, True, "exceeds-lmax" if val > l_max else "finite", err, 1)

    if math.isfinite(a) and math.isfinite(b):
        mid = 0.5 * (a + b)
    elif math.isfinite(a):
        mid = a + 1.0
    elif math.isfinite(b):
        mid = b - 1.0
    else:
        mid = 0.0
    total, err, n = 0.0, 0.0, 0
    status = "finite"
    tails = []
    for imp, end, sign in ((imp_a, a, -1), (imp_b, b, +1)):
        if imp:
            v, e, st, pieces = _tail(f, mid, end, tol / 2, l_max, sign)
            n += len(pieces)
            tails.append(st)
            if st != "finite" and status in ("finite", "roundoff-limited"):
                status = st
        else:
            v, e = _quad(f, *sorted((mid, end)), tol / 10)
            n += 1
        total += v
        err += e
    if total > l_max:
        status = "exceeds-lmax"
    return LengthResult(total, status == "finite", status, err, n, tails)


@dataclass
class ProbeResult:
    name: str
    classification: str  # "finite" (incompleteness witness) or "inconclusive"
    length: float
    status: str


def ray_probe(s: GraphSurface, curves, tol=1e-10, l_max=L_MAX):
    """Classify divergent curves as finite-length witnesses or inconclusive."""
    out = []
    for c in curves:
        res = curve_length(s, c, tol=tol, l_max=l_max)
        cls = "finite" if not res.lower_bound_only and res.length < l_max else "inconclusive"
        out.append(ProbeResult(c.name, cls, res.length, res.status))
    return out


@dataclass
class ScanResult:
    infimum: float
    argmin: tuple
    ratios: np.ndarray


def metric_ratio_scan(s: GraphSurface, reference: ConformalMetric, samples) -> ScanResult:
    """``inf g(X,X) / g_ref(X,X)`` over sample points and all directions ``X``."""
    x1 = np.asarray(samples[0], dtype=float).ravel()
    x2 = np.asarray(samples[1], dtype=float).ravel()
    p = (x1, x2)
    lam = s.metric.check(p)
    ref = reference.check(p)
    u1, u2 = s.u.partial(1, p), s.u.partial(2, p)
    if s.lorentzian and np.any(1.0 - (u1 * u1 + u2 * u2) / lam < LIGHTLIKE_GUARD):
        raise NonSpacelikeError("metric_ratio_scan: sample set contains non-spacelike points")
    e = s.signature.eps
    g11 = lam - e * u1 * u1
    g12 = -e * u1 * u2
    g22 = lam - e * u2 * u2
    # smallest eigenvalue of g relative to the conformal reference
    tr = (g11 + g22) / 2
    disc = np.sqrt(((g11 - g22) / 2) ** 2 + g12 * g12)
    ratios = (tr - disc) / ref
    k = int(np.argmin(ratios))
    return ScanResult(float(ratios[k]), (float(x1[k]), float(x2[k])), ratios)


# ---------------------------------------------------------------------------
# the curves used by the built-in examples

def vertical_ray_to_boundary():
    """``s -> (0, s)`` on ``(0, 1)``: runs into the ideal boundary of the half-plane."""
    return Curve.from_exprs("0", "s", (0.0, 1.0), improper=(True, False), name="vertical-ray")


def horizontal_line(R=None):
    """``s -> (s, 0)`` on ``(-R, R)``, or on the whole line when ``R`` is None."""
    if R is None:
        return Curve.from_exprs("s", "0", (-math.inf, math.inf), improper=(True, True), name="horizontal-line")
    return Curve.from_exprs("s", "0", (-R, R), name=f"horizontal-segment-{R:g}")


def hyperbolic_ray():
    """``s -> (0, s)`` on ``(0, 1)`` used over slices: hyperbolic length is infinite."""
    return Curve.from_exprs("0", "s", (0.0, 1.0), improper=(True, False), name="hyperbolic-ray")


FLAT_LENGTH_BOUND = 2 * (1 + 2 / math.sqrt(math.e))
