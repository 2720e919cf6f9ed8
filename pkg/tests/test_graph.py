import json
import math

import numpy as np
import pytest

from maxgraph.catalog import get_example, make_affine, make_slice
from maxgraph.errors import NonSpacelikeError
from maxgraph.fields import ExprField, constant_field
from maxgraph.graph import (
    GraphSurface,
    Signature,
    causal_report,
    gauss_map,
    induced_metric,
    invariant_report,
    mean_curvature,
    q_term,
    residual_maximal,
    residual_minimal,
    residual_minimal_halfplane,
    shape_operator,
)
from maxgraph.metrics import euclidean, hyperbolic_half_plane, sphere_model

from conftest import halfplane_points

H = hyperbolic_half_plane()
E = euclidean()
LOR = Signature.LORENTZIAN
RIE = Signature.RIEMANNIAN


def test_signature_parse():
    assert Signature.parse("Lorentzian") is LOR
    assert Signature.parse(RIE) is RIE
    assert LOR.eps == 1 and RIE.eps == -1
    with pytest.raises(ValueError):
        Signature.parse("euclidean")


def test_induced_metric_of_constant_is_base():
    s = GraphSurface(H, constant_field(3.0), LOR)
    np.testing.assert_array_equal(induced_metric(s, (0.2, 0.5)), 4.0 * np.eye(2))


def test_induced_metric_of_tilted_line():
    s = GraphSurface(E, ExprField("x1/2"), LOR)
    np.testing.assert_allclose(induced_metric(s, (0.7, -1.0)), np.diag([0.75, 1.0]), atol=1e-15)
    r = GraphSurface(E, ExprField("x1/2"), RIE)
    np.testing.assert_allclose(induced_metric(r, (0.7, -1.0)), np.diag([1.25, 1.0]), atol=1e-15)


def test_causal_character():
    rep = causal_report(GraphSurface(H, constant_field(1.0)), (0.0, 1.0))
    assert rep.spacelike and rep.theta == -1.0
    # |Du|^2 = 3/4 on the flat base
    rep = causal_report(GraphSurface(E, ExprField("sqrt(3)/2*x1")), (0.0, 0.0))
    assert rep.theta == pytest.approx(-2.0, rel=1e-14)
    rep = causal_report(GraphSurface(E, ExprField("sqrt(1.2)*x2")), (0.0, 0.0))
    assert not rep.spacelike and math.isnan(rep.theta)


def test_non_spacelike_rejected():
    s = GraphSurface(E, ExprField("x1"), LOR)  # exactly lightlike
    with pytest.raises(NonSpacelikeError):
        shape_operator(s, (0.0, 0.0))
    with pytest.raises(NonSpacelikeError):
        invariant_report(s, (0.0, 0.0))


def test_gauss_map():
    base, vert = gauss_map(GraphSurface(H, constant_field(0.0)), (0.0, 1.0))
    np.testing.assert_array_equal(base, [0.0, 0.0])
    assert vert == 1.0
    base, vert = gauss_map(GraphSurface(E, ExprField("x1/2")), (0.3, 0.3))
    np.testing.assert_allclose(base, np.array([0.5, 0.0]) / math.sqrt(0.75), rtol=1e-14)
    assert vert == pytest.approx(1 / math.sqrt(0.75), rel=1e-14)


def test_gauss_map_is_unit_timelike_and_normal(rng):
    s = get_example("maximal-w2").surface()
    for p in halfplane_points(rng, 20):
        base, vert = gauss_map(s, p)
        lam = H.lam.value(p)
        # <N, N> = |base|^2_m - vert^2 = -1
        assert lam * (base @ base) - vert**2 == pytest.approx(-1.0, abs=1e-12)
        # tangent vectors (e_i, u_i) are orthogonal to N
        for i in (1, 2):
            e = np.eye(2)[i - 1]
            assert lam * (base @ e) - vert * s.u.partial(i, p) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("entry", [make_slice(), make_slice(t0=-2.5), make_affine(), make_affine(0.6, -0.3, 4.0)])
def test_totally_geodesic_cases(entry):
    s = entry.surface()
    thetas = set()
    for p in [(0.0, 1.0), (1.5, 0.3), (-2.0, 2.5)]:
        np.testing.assert_allclose(shape_operator(s, p), 0.0, atol=1e-12)
        assert abs(mean_curvature(s, p)) < 1e-12
        thetas.add(round(causal_report(s, p).theta, 12))
    assert len(thetas) == 1


def test_slice_report_matches_base():
    rep = invariant_report(make_slice().surface(), (0.3, 1.1))
    assert rep.theta == -1.0
    assert rep.K_gauss_eq == pytest.approx(-1.0, abs=1e-12)
    assert rep.K_numeric == pytest.approx(-1.0, abs=1e-6)
    assert rep.maximal
    for k, v in rep.residuals.items():
        assert v < 1e-6, k


def test_affine_report_is_flat():
    rep = invariant_report(make_affine(0.3, 0.4).surface(), (0.2, -0.7))
    assert rep.theta == pytest.approx(-1 / math.sqrt(0.75), rel=1e-14)
    assert abs(rep.K_gauss_eq) < 1e-12 and abs(rep.K_numeric) < 1e-6
    assert rep.subharmonic_ok is True


def test_shape_operator_against_second_fundamental_form(rng):
    # independent route: second fundamental form from ambient second derivatives.
    # For a graph over a flat base, II(e_i, e_j) = u_ij / W with the Lorentzian normal,
    # and A = g^{-1} II.
    for text in ("0.2*x1^2 - 0.1*x1*x2 + 0.15*x2^2", "0.3*sin(x1)*cos(x2)"):
        s = GraphSurface(E, ExprField(text), LOR)
        for p in rng.uniform(-1, 1, size=(10, 2)):
            p = tuple(p)
            g = induced_metric(s, p)
            W = math.sqrt(1 - (s.u.gradient(p) @ s.u.gradient(p)))
            II = s.u.hessian(p) / W
            np.testing.assert_allclose(shape_operator(s, p), -np.linalg.solve(g, II), atol=1e-12)


def test_mean_curvature_is_minus_half_trace(rng):
    s = GraphSurface(sphere_model(), ExprField("0.2*x1*x2+0.1*x1^2"), LOR)
    for p in rng.uniform(-1, 1, size=(10, 2)):
        p = tuple(p)
        assert mean_curvature(s, p) == pytest.approx(-0.5 * np.trace(shape_operator(s, p)), abs=1e-9)


def test_riemannian_shape_operator_of_paraboloid():
    # z = (x1^2+x2^2)/2 at the origin: principal curvatures 1, upward normal gives -I
    s = GraphSurface(E, ExprField("(x1^2+x2^2)/2"), RIE)
    np.testing.assert_allclose(shape_operator(s, (0.0, 0.0)), -np.eye(2), atol=1e-14)


def test_residual_minimal_examples(rng):
    for name in ("minimal-log", "minimal-inv"):
        u = get_example(name).u
        assert abs(residual_minimal(u, H, (1.0, 2.0))) < 1e-10
    assert residual_minimal(constant_field(1.0), H, (0.0, 1.0)) == 0.0
    # u = x1^2 on a flat base: d/dx (2x / sqrt(1+4x^2)) = 2/(1+4x^2)^(3/2)
    u = ExprField("x1^2")
    for x in rng.uniform(-2, 2, size=10):
        assert residual_minimal(u, E, (x, 0.3)) == pytest.approx(2 / (1 + 4 * x * x) ** 1.5, rel=1e-12)


def test_residual_maximal_examples():
    w2 = get_example("maximal-w2").u
    assert abs(residual_maximal(w2, H, (0.5, 1.5))) < 1e-8
    assert residual_maximal(constant_field(2.0), H, (0.0, 1.0)) == 0.0
    # x1^2 on a flat base: d/dx (2x / sqrt(1-4x^2)) = 2/(1-4x^2)^(3/2)
    assert residual_maximal(ExprField("x1^2"), E, (0.25, 0.0)) == pytest.approx(2 / 0.75**1.5, rel=1e-12)
    with pytest.raises(NonSpacelikeError):
        residual_maximal(ExprField("x1^2"), E, (0.5, 0.0))


def test_halfplane_expansion_matches_divergence_form(rng):
    for text in ("log(x1^2+x2^2)", "x1/(x1^2+x2^2)", "x1*x2 + sin(x2)", "exp(-x1^2)*x2"):
        u = ExprField(text)
        for p in halfplane_points(rng, 20):
            assert residual_minimal_halfplane(u, p) == pytest.approx(residual_minimal(u, H, p), abs=1e-9)


def test_q_term_values(rng):
    log_r, inv_r = ExprField("log(x1^2+x2^2)"), ExprField("x1/(x1^2+x2^2)")
    for p in halfplane_points(rng, 10):
        r2 = p[0] ** 2 + p[1] ** 2
        assert q_term(log_r, p) == pytest.approx(-8 / r2**2, rel=1e-12)
        assert q_term(inv_r, p) == pytest.approx(2 * p[0] / r2**4, rel=1e-10, abs=1e-14)
    assert q_term(constant_field(0.0), (0.0, 1.0)) == 0.0


@pytest.mark.parametrize("name", ["maximal-w1", "maximal-w2"])
def test_identity_report_on_maximal_examples(name, rng):
    s = get_example(name).surface()
    for p in halfplane_points(rng, 8, box=(-2, 2, 0.3, 2.5)):
        rep = invariant_report(s, p)
        assert rep.maximal
        r = rep.residuals
        assert r["grad_h_norm"] < 1e-9
        assert r["trace_A"] < 1e-8
        assert r["A_squared"] < 1e-8
        assert r["det_A"] < 1e-8
        assert r["grad_theta"] < 1e-8
        assert r["norm_grad_theta"] < 1e-8
        assert r["laplace_h"] < 1e-4
        assert r["laplace_theta"] < 1e-4
        assert r["laplace_inv_theta"] < 1e-4
        assert r["laplace_log"] < 1e-4
        assert r["gauss_K"] < 1e-3
        assert r["khat"] < 1e-3
        # on the hyperbolic base the sign of the Laplacian of 1/Theta is not asserted
        assert rep.kappa_M < 0 and rep.subharmonic_ok is None


def test_w2_log_identity_at_reference_point():
    rep = invariant_report(get_example("maximal-w2").surface(), (0.0, 1.0))
    assert rep.residuals["laplace_log"] < 1e-4


def test_non_maximal_graph_skips_maximal_identities():
    s = GraphSurface(E, ExprField("0.2*x1^2"), LOR)
    rep = invariant_report(s, (0.1, 0.0))
    assert not rep.maximal
    assert set(rep.residuals) == {"grad_h_norm", "laplace_h", "grad_theta", "gauss_K"}
    assert rep.residuals["laplace_h"] < 1e-4 and rep.residuals["grad_theta"] < 1e-8
    assert rep.subharmonic_ok is None


def test_subharmonic_sign_on_positive_curvature_base():
    # slice over the round sphere model: kappa > 0, 1/Theta = -1 is constant
    rep = invariant_report(make_slice(sphere_model(), metric_name="sphere").surface(), (0.2, 0.1))
    assert rep.kappa_M > 0 and rep.subharmonic_ok is True


def test_report_serializes():
    rep = invariant_report(get_example("maximal-w2").surface(), (0.5, 1.5))
    d = json.loads(json.dumps(rep.to_dict()))
    for key in ("theta", "H", "K_gauss", "K_numeric", "normA2", "detA", "kappaM", "residuals"):
        assert key in d
    assert d["theta"] <= -1
