"""Convolution engine: values, identities, derivative formula, bounds."""

import numpy as np
import pytest

from groupconv import (BilinearMap, UsageError, bump, conv_derivative,
                       convolve, convolve_alt, get_group,
                       matrix2x2_multiplication, scalar_multiplication,
                       seminorm_bound_report, verify_identity)
from groupconv.config import DEFAULT_CONFIG
from groupconv.functions import (ScaledFunction, VectorFieldSpec,
                                 fd_flow_derivative, flow_points)
from groupconv.support import sample_box
from groupconv.vecnorms import OP2

B = scalar_multiplication()


def dense_conv_1d(gamma, eta, x, n=400_001):
    lo, hi = gamma.support_box()[0]
    ys = np.linspace(lo, hi, n)
    gv = gamma.values(ys[:, None])[:, 0]
    ev = eta.values((x - ys)[:, None])[:, 0]
    return np.trapezoid(gv * ev, ys)


def test_zero_factor_gives_zero(r1):
    h = bump(r1, 1.0)
    zero = ScaledFunction(0.0, bump(r1, 0.8))
    conv = convolve(B, h, zero)
    xs = np.linspace(-2, 2, 21)[:, None]
    assert np.max(np.abs(conv.values(xs))) == 0.0


def test_standard_bump_pair_value_at_origin(r1):
    # (h*h)(0) = int h(y) h(-y) dy, dense Riemann oracle
    h = bump(r1, 1.0)
    conv = convolve(B, h, h)
    got = conv.value(np.zeros(1))[0]
    oracle = dense_conv_1d(h, h, 0.0)
    assert abs(got - oracle) <= 1e-7 * abs(oracle)
    # frozen from the same oracle: int h^2 over [-1, 1]
    assert abs(got - 0.13308612084499422) < 1e-8


def test_values_match_dense_oracle_along_axis(r1):
    gamma = bump(r1, 1.0, amplitude=1.2)
    eta = bump(r1, 0.7, center=np.array([0.3]), amplitude=-0.9)
    conv = convolve(B, gamma, eta)
    for x in (-0.6, 0.0, 0.4, 1.1):
        got = conv.value(np.array([x]))[0]
        want = dense_conv_1d(gamma, eta, x)
        assert abs(got - want) <= 1e-7 * max(abs(want), 1e-4)


def test_commutativity_on_abelian_plane(r2):
    gamma = bump(r2, 0.6, center=r2.from_chart([0.1, -0.1]))
    eta = bump(r2, 0.5, center=r2.from_chart([-0.15, 0.2]), amplitude=1.5)
    ab = convolve(B, gamma, eta)
    ba = convolve(B, eta, gamma)
    pts = r2.from_chart(sample_box(ab.support_box(), 5))
    vals_ab = ab.values(pts)
    scale = np.max(np.abs(vals_ab))
    assert np.max(np.abs(vals_ab - ba.values(pts))) <= 1e-7 * scale


@pytest.mark.parametrize("gid,tol", [("Rn:1", 1e-7), ("affine", 1e-6),
                                     ("heisenberg", 1e-6)])
def test_alt_formula_agreement(gid, tol):
    group = get_group(gid)
    rng = np.random.default_rng(31)
    m = group.dimension
    gamma = bump(group, 0.45, center=group.from_chart(rng.uniform(-0.1, 0.1, m)))
    eta = bump(group, 0.4, center=group.from_chart(rng.uniform(-0.1, 0.1, m)),
               amplitude=1.4)
    rep = verify_identity("ALTFORM", B, gamma, eta, tol=tol)
    assert rep.passed, rep.residual


def test_alt_formula_zero_factor(affine):
    zero = ScaledFunction(0.0, bump(affine, 0.4))
    conv = convolve_alt(B, bump(affine, 0.4), zero)
    assert np.max(np.abs(conv.values(affine.identity[None, :]))) == 0.0


def test_conv_derivative_empty_lists_is_convolve(r1):
    gamma, eta = bump(r1, 1.0), bump(r1, 0.8)
    a = conv_derivative(B, gamma, eta, [], [])
    b = convolve(B, gamma, eta)
    xs = np.linspace(-1.5, 1.5, 11)[:, None]
    assert np.max(np.abs(a.values(xs) - b.values(xs))) < 1e-14


def test_eq8_vs_direct_second_difference_on_r(r1):
    # one derivative on each side vs an FD second derivative of gamma*eta
    gamma = bump(r1, 1.0)
    eta = bump(r1, 0.8, center=np.array([0.2]))
    left = VectorFieldSpec("left", (1.0,))
    right = VectorFieldSpec("right", (1.0,))
    engine = conv_derivative(B, gamma, eta, [right], [left])
    conv = convolve(B, gamma, eta)
    rng = np.random.default_rng(32)
    xs = rng.uniform(-0.8, 0.8, 20)
    h = 0.02
    scale = 0.0
    errs = []
    for x in xs:
        def val(t, s):
            return conv.value(np.array([x + t + s]))[0]

        def mixed(hh):
            return (val(hh, hh) - val(hh, -hh) - val(-hh, hh)
                    + val(-hh, -hh)) / (4 * hh * hh)

        fd = (4 * mixed(h / 2) - mixed(h)) / 3
        en = engine.value(np.array([x]))[0]
        errs.append(abs(fd - en))
        scale = max(scale, abs(en))
    assert max(errs) <= 1e-5 * scale


def test_eq8_right_field_vs_flow_fd_on_heisenberg(heisenberg):
    # one right field on gamma vs FD directional derivative along the flow
    g = heisenberg
    gamma = bump(g, 0.45)
    eta = bump(g, 0.4)
    w = VectorFieldSpec("right", (1.0, 0.0, 0.0))
    engine = conv_derivative(B, gamma, eta, [w], [])
    conv = convolve(B, gamma, eta)
    rng = np.random.default_rng(33)
    pts = g.from_chart(rng.uniform(-0.25, 0.25, (8, 3)))
    fd = fd_flow_derivative(lambda p: conv.values(p)[..., 0], g, w, pts, 0.01)
    en = engine.values(pts)[..., 0]
    scale = max(np.max(np.abs(en)), 1e-12)
    assert np.max(np.abs(fd - en)) <= 1e-5 * scale


def test_engine_bilinearity(r1):
    # the sum convolves over the hull of both supports; run fine enough
    # that the different rule geometries agree to 1e-9
    cfg = DEFAULT_CONFIG.with_updates(quad_points={1: 160})
    gamma1 = bump(r1, 1.0)
    gamma2 = bump(r1, 0.8, center=np.array([0.1]))
    eta = bump(r1, 0.9, center=np.array([-0.2]))
    from groupconv.functions import SumFunction
    a = 1.75
    combo = SumFunction([ScaledFunction(a, gamma1), gamma2])
    lhs = convolve(B, combo, eta, cfg)
    c1 = convolve(B, gamma1, eta, cfg)
    c2 = convolve(B, gamma2, eta, cfg)
    xs = np.linspace(-1.8, 1.8, 31)[:, None]
    want = a * c1.values(xs) + c2.values(xs)
    scale = np.max(np.abs(want))
    assert np.max(np.abs(lhs.values(xs) - want)) <= 1e-9 * scale


@pytest.mark.parametrize("gid", ["Rn:1", "affine"])
def test_invo_identity(gid):
    group = get_group(gid)
    rng = np.random.default_rng(34)
    m = group.dimension
    gamma = bump(group, 0.5, center=group.from_chart(rng.uniform(-0.1, 0.1, m)))
    eta = bump(group, 0.45, center=group.from_chart(rng.uniform(-0.1, 0.1, m)),
               amplitude=-1.1)
    rep = verify_identity("INVO", B, gamma, eta)
    assert rep.passed and rep.residual <= 1e-6


def test_translation_identity_at_identity_element(r1):
    gamma, eta = bump(r1, 1.0), bump(r1, 0.8)
    rep = verify_identity("TRANS_L", B, gamma, eta, g=np.zeros(1))
    assert rep.residual < 1e-12


def test_support_tag(affine):
    gamma = bump(affine, 0.4, center=affine.from_chart([0.1, 0.0]))
    eta = bump(affine, 0.35, center=affine.from_chart([0.0, 0.1]))
    rep = verify_identity("SUPPORT", B, gamma, eta)
    assert rep.passed
    assert rep.lhs_norm <= 1e-9   # worst value outside the declared hull


def test_unknown_tag_raises(r1):
    with pytest.raises(UsageError):
        verify_identity("NOPE", B, bump(r1, 1.0), bump(r1, 1.0))


def test_trans_requires_element(r1):
    with pytest.raises(UsageError):
        verify_identity("TRANS_L", B, bump(r1, 1.0), bump(r1, 1.0))


def test_dimension_mismatch_raises(r1):
    vec = bump(r1, 1.0, dim=2)
    with pytest.raises(UsageError):
        convolve(B, vec, bump(r1, 1.0))


def test_group_mismatch_raises(r1, r2):
    with pytest.raises(UsageError):
        convolve(B, bump(r1, 1.0), bump(r2, 1.0))


# ---------------------------------------------------------------------------
# Seminorm bounds
# ---------------------------------------------------------------------------

def test_bound_report_zero_gamma(r1):
    zero = ScaledFunction(0.0, bump(r1, 1.0))
    rep = seminorm_bound_report(B, zero, bump(r1, 0.8), k=1, l=1)
    assert rep.passed
    for row in rep.rows:
        assert row["lhs"] == 0.0 and row["rhs"] == 0.0


def test_bound_report_r_and_affine():
    for gid, k, l in (("Rn:1", 1, 1), ("affine", 1, 0)):
        group = get_group(gid)
        rng = np.random.default_rng(35)
        m = group.dimension
        gamma = bump(group, 0.5,
                     center=group.from_chart(rng.uniform(-0.1, 0.1, m)))
        eta = bump(group, 0.45,
                   center=group.from_chart(rng.uniform(-0.1, 0.1, m)),
                   amplitude=1.2)
        rep = seminorm_bound_report(B, gamma, eta, k=k, l=l)
        assert rep.passed, rep.rows
        for row in rep.rows:
            assert row["lhs"] <= row["rhs"] * (1 + 1e-6)


# ---------------------------------------------------------------------------
# BilinearMap
# ---------------------------------------------------------------------------

def test_bilinear_map_is_bilinear_exactly():
    rng = np.random.default_rng(36)
    b = matrix2x2_multiplication()
    x, xp = rng.integers(-3, 4, (2, 4)).astype(float)
    y = rng.integers(-3, 4, 4).astype(float)
    a = 2.0
    lhs = b.apply(a * x + xp, y)
    rhs = a * b.apply(x, y) + b.apply(xp, y)
    assert np.array_equal(lhs, rhs)
    lhs2 = b.apply(y, a * x + xp)
    rhs2 = a * b.apply(y, x) + b.apply(y, xp)
    assert np.array_equal(lhs2, rhs2)


def test_matrix_bilinear_matches_matmul():
    b = matrix2x2_multiplication()
    rng = np.random.default_rng(37)
    for _ in range(50):
        x, y = rng.normal(size=(2, 4))
        want = (x.reshape(2, 2) @ y.reshape(2, 2)).reshape(4)
        assert np.allclose(b.apply(x, y), want)


def test_certified_inequality_on_random_pairs():
    rng = np.random.default_rng(38)
    for b in (scalar_multiplication(), matrix2x2_multiplication()):
        xs = rng.uniform(-3, 3, (1000, b.d1))
        ys = rng.uniform(-3, 3, (1000, b.d2))
        lhs = b.q.apply(b.apply(xs, ys))
        rhs = b.p1.apply(xs) * b.p2.apply(ys)
        assert np.all(lhs <= rhs * (1 + 1e-12) + 1e-15)


def test_vee_swaps_arguments():
    b = matrix2x2_multiplication()
    rng = np.random.default_rng(39)
    x, y = rng.normal(size=(2, 4))
    assert np.allclose(b.vee().apply(y, x), b.apply(x, y))
    assert b.vee().p1 is b.p2 and b.vee().p2 is b.p1


def test_memoization_returns_identical_values(r1):
    conv = convolve(B, bump(r1, 1.0), bump(r1, 0.8))
    x = np.array([0.3])
    v1 = conv.value(x)
    v2 = conv.value(x)
    assert np.array_equal(v1, v2)
    assert len(conv._memo) == 1


def test_result_order_bookkeeping(r1):
    from groupconv.functions import CallableFunction
    import math
    f = CallableFunction(r1, lambda p: np.cos(p[..., 0])[..., None],
                         [(-1.0, 1.0)], order=2)
    conv = convolve(B, f, bump(r1, 1.0))
    assert conv.order == math.inf
    conv2 = convolve(B, f, CallableFunction(
        r1, lambda p: np.sin(p[..., 0])[..., None], [(-1.0, 1.0)], order=3))
    assert conv2.order == 5
