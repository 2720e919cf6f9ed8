import math

import numpy as np
import pytest
from scipy import integrate

from maxgraph.catalog import get_example, make_slice
from maxgraph.completeness import (
    FLAT_LENGTH_BOUND,
    Curve,
    curve_length,
    horizontal_line,
    hyperbolic_ray,
    metric_ratio_scan,
    ray_probe,
    vertical_ray_to_boundary,
)
from maxgraph.errors import NonSpacelikeError, OutOfDomainError, QuadratureError
from maxgraph.fields import ExprField, constant_field
from maxgraph.graph import GraphSurface, Signature, grad_norm_sq, induced_metric
from maxgraph.grids import Grid
from maxgraph.metrics import euclidean, hyperbolic_half_plane

from conftest import halfplane_points

H = hyperbolic_half_plane()
E = euclidean()
W2 = get_example("maximal-w2").surface()
FLAT = get_example("flat-incomplete").surface()
ASINH1 = math.log(1 + math.sqrt(2))


def test_ex2_curve_length():
    res = curve_length(W2, vertical_ray_to_boundary())
    assert res.converged and res.status == "finite"
    assert res.length == pytest.approx(ASINH1, abs=1e-8)
    assert float(res) == res.length


def test_ex2_speed_is_closed_form():
    from maxgraph.completeness import speed

    s = np.linspace(0.01, 0.99, 50)
    np.testing.assert_allclose(speed(W2, vertical_ray_to_boundary(), s) ** 2, 1 / (1 + s * s), rtol=1e-10)


def test_straight_segment_on_flat_slice():
    s = GraphSurface(E, constant_field(0.0))
    c = Curve.from_exprs("3*s", "4*s", (0.0, 2.0))
    assert curve_length(s, c).length == pytest.approx(10.0, rel=1e-14)


@pytest.mark.parametrize("R", [10, 50, 100])
def test_flat_horizontal_segments_stay_below_bound(R):
    res = curve_length(FLAT, horizontal_line(R))
    assert res.converged
    assert res.length < FLAT_LENGTH_BOUND


def test_flat_bound_value():
    assert FLAT_LENGTH_BOUND == pytest.approx(4.4261226, abs=1e-7)


def test_flat_lengths_against_closed_form():
    # outside [-1, 1] the speed is exp(-|s|/2); inside it is sqrt(1 - phi'^2).
    # The generic integrand forms 1 - u'^2 with u'^2 = 1 - e^-s, which loses all
    # digits once e^-s nears machine epsilon; the reported error estimate must cover that.
    # Past |s| ~ 37 the stored u' is exactly 1, so the whole line misses ~1e-8 unseen.
    from maxgraph.catalog import smoothing_derivative

    inner, _ = integrate.quad(lambda s: math.sqrt(1 - smoothing_derivative(s) ** 2), -1, 1, epsabs=1e-13)
    for R in (10, 50, 100, None):
        ref = inner + 4 * (math.exp(-0.5) - (math.exp(-R / 2) if R else 0.0))
        res = curve_length(FLAT, horizontal_line(R))
        if R is not None:
            assert abs(res.length - ref) <= res.error_estimate + 1e-10
        assert abs(res.length - ref) < 5e-8


def test_probe_classification():
    out = ray_probe(W2, [vertical_ray_to_boundary()])
    assert out[0].classification == "finite" and out[0].length == pytest.approx(0.8814, abs=1e-4)
    out = ray_probe(FLAT, [horizontal_line()])
    assert out[0].classification == "finite"
    out = ray_probe(make_slice().surface(), [hyperbolic_ray()])
    assert out[0].classification == "inconclusive"


def test_slice_ray_has_divergent_tail():
    res = curve_length(make_slice().surface(), hyperbolic_ray())
    assert not res.converged
    assert res.status == "exceeds-lmax"


def test_euclidean_divergent_line_exceeds_lmax():
    res = curve_length(GraphSurface(E, constant_field(0.0)), horizontal_line())
    assert res.status == "exceeds-lmax" and not res.converged


def test_tail_integrands():
    # exp(-s/2) on (0, inf) -> 2; 1/(1+s^2) on (0, inf) -> pi/2; lengths via slices with speed 1
    c = Curve.from_exprs("0", "s", (0.0, math.inf), improper=(False, True))
    s = GraphSurface(Curve and __import__("maxgraph.metrics", fromlist=["conformal"]).conformal("exp(-x2)"),
                     constant_field(0.0))
    assert curve_length(s, c).length == pytest.approx(2.0, abs=1e-9)
    s = GraphSurface(__import__("maxgraph.metrics", fromlist=["conformal"]).conformal("1/(1+x2^2)^2"),
                     constant_field(0.0))
    assert curve_length(s, c).length == pytest.approx(math.pi / 2, abs=1e-9)


@pytest.mark.parametrize("k", [2, 3])
def test_parametrization_invariance(k):
    c = vertical_ray_to_boundary()
    ck = c.reparametrized(lambda t: t**k, lambda t: k * t ** (k - 1), 0.0, 1.0)
    assert abs(curve_length(W2, c).length - curve_length(W2, ck).length) < 2e-10


def test_reparametrization_onto_infinite_interval():
    # s = 1/(1+t) on (0, inf) reverses orientation; length does not care
    c = vertical_ray_to_boundary()
    ci = c.reparametrized(lambda t: 1 / (1 + t), lambda t: -1 / (1 + t) ** 2, 0.0, math.inf, improper=(False, True))
    assert abs(curve_length(W2, ci).length - curve_length(W2, c).length) < 2e-10


def test_super_exponential_approach_hits_roundoff_floor():
    # s = exp(t) pushes the parameter to s ~ 1e-14 within a few pieces, where the
    # speed (a difference of two terms of size one) is pure roundoff
    c = vertical_ray_to_boundary().reparametrized(np.exp, np.exp, -math.inf, 0.0, improper=(True, False))
    res = curve_length(W2, c)
    assert res.status == "roundoff-limited" and not res.converged and not res.lower_bound_only
    assert res.length == pytest.approx(ASINH1, abs=1e-7)
    assert ray_probe(W2, [c])[0].classification == "finite"


def test_length_monotone_in_signature(rng):
    for _ in range(5):
        a, b = rng.uniform(-1, 1, 2)
        c = Curve.from_exprs(f"{a}+0.5*cos(s)", f"1.5+{b}*sin(2*s)*0.5", (0.0, 3.0))
        u = ExprField("0.2*x1*x2 + 0.1*sin(x1)")
        lor = curve_length(GraphSurface(H, u, Signature.LORENTZIAN), c).length
        base = curve_length(GraphSurface(H, constant_field(0.0)), c).length
        rie = curve_length(GraphSurface(H, u, Signature.RIEMANNIAN), c).length
        assert lor <= base <= rie


def test_cauchy_schwarz_bound_pointwise(rng):
    s = get_example("maximal-w1").surface()
    for p in halfplane_points(rng, 50):
        g = induced_metric(s, p)
        lam = H.lam.value(p)
        m = 1 - grad_norm_sq(s.u, H, p)
        X = rng.normal(size=2)
        assert X @ g @ X >= m * lam * (X @ X) - 1e-9
        D = s.u.gradient(p) / lam
        assert D @ g @ D == pytest.approx(m * lam * (D @ D), rel=1e-9)


def test_w1_scan_infimum():
    g = Grid(-3, 3, 0.05, 3, 61, 60)
    res = metric_ratio_scan(get_example("maximal-w1").surface(), H, g.mesh())
    assert res.infimum == pytest.approx(0.2, abs=1e-6)
    assert res.argmin[0] == 0.0


def test_w1_scan_equals_closed_margin(rng):
    s = get_example("maximal-w1").surface()
    P = halfplane_points(rng, 40)
    X1, X2 = np.array([p[0] for p in P]), np.array([p[1] for p in P])
    res = metric_ratio_scan(s, H, (X1, X2))
    np.testing.assert_allclose(res.ratios, (X1**2 + X2**2) / (X1**2 + 5 * X2**2), rtol=1e-12)


def test_slice_scan_is_one():
    res = metric_ratio_scan(make_slice().surface(), H, Grid(-1, 1, 0.5, 2, 5, 5).mesh())
    np.testing.assert_allclose(res.ratios, 1.0)


def test_w2_scan_has_no_positive_bound():
    x2 = np.geomspace(1e-4, 1, 40)
    res = metric_ratio_scan(W2, H, (0 * x2, x2))
    # 1 - |Dw2|^2 on the axis is x2^2 / (1 + x2^2)
    # the eigenvalue formula cancels two terms of size 1/x2^2, so compare absolutely
    np.testing.assert_allclose(res.ratios, x2**2 / (1 + x2**2), rtol=1e-9, atol=1e-14)
    assert res.infimum < 1e-7


def test_scan_rejects_timelike():
    with pytest.raises(NonSpacelikeError):
        metric_ratio_scan(GraphSurface(E, ExprField("2*x1")), E, ([0.0], [0.0]))


def test_errors():
    with pytest.raises(QuadratureError):
        curve_length(W2, Curve.from_exprs("0", "s", (0.0, math.inf)))
    with pytest.raises(OutOfDomainError):
        curve_length(W2, Curve.from_exprs("0", "s", (-1.0, 1.0)))
    with pytest.raises(NonSpacelikeError):
        curve_length(GraphSurface(E, ExprField("2*x1")), Curve.from_exprs("s", "0", (0.0, 1.0)))
