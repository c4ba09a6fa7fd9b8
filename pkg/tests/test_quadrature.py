"""Haar quadrature: volumes, invariance, bounds, the inversion pushforward."""

import numpy as np
import pytest

from groupconv import (DomainError, bump, get_group, haar_volume, integrate,
                       inversion_pushforward_residual, make_rule, translate)
from groupconv.config import DEFAULT_CONFIG
from groupconv.functions import DiscreteFunction, ScaledFunction, from_chart_expr
from groupconv.quadrature import integrate_callable
from groupconv.vecnorms import ABS, EUCL


def test_constant_over_unit_box(r1, r2):
    one = from_chart_expr(r1, [1], [(0.0, 1.0)])
    assert abs(integrate(one)[0] - 1.0) < 1e-13
    sq = from_chart_expr(r2, [1], [(0.0, 1.0), (0.0, 1.0)])
    assert abs(integrate(sq)[0] - 1.0) < 1e-13


def test_bump_integral_against_dense_riemann(r1):
    h = bump(r1, 1.0)
    got = integrate(h)[0]
    xs = np.linspace(-1, 1, 2_000_001)
    dense = np.trapezoid(h.values(xs[:, None])[:, 0], xs)
    assert abs(got - dense) <= 1e-8 * dense
    # frozen from the same oracle
    assert abs(got - 0.4439938161680796) < 1e-9


def test_discrete_counting(r1):
    z = get_group("Z")
    ind = DiscreteFunction(z, {0: 1, 1: 1, 2: 1})
    assert integrate(ind)[0] == 3
    assert haar_volume(z, [0, 1, 2]) == 3.0
    s3 = get_group("S3")
    assert haar_volume(s3, s3.elements()) == 6.0


def test_affine_volume_resolution_doubling(affine):
    box = np.array([[-0.5, 0.7], [-0.4, 0.6]])
    v1 = haar_volume(affine, box, points_per_axis=48)
    v2 = haar_volume(affine, box, points_per_axis=96)
    assert abs(v1 - v2) <= 1e-6 * abs(v2)


def test_linearity(r1):
    # the sum integrates over the hull of both supports, so resolve the
    # narrower bump by running at a higher per-axis count
    f = bump(r1, 1.0)
    g = bump(r1, 0.6, center=np.array([0.2]))
    from groupconv.functions import SumFunction
    combo = SumFunction([ScaledFunction(2.5, f), ScaledFunction(-1.25, g)])
    lhs = integrate(combo, points_per_axis=384)[0]
    rhs = (2.5 * integrate(f, points_per_axis=384)[0]
           - 1.25 * integrate(g, points_per_axis=384)[0])
    assert abs(lhs - rhs) <= 1e-10 * max(abs(rhs), 1e-12)


@pytest.mark.parametrize("gid,base", [("Rn:1", 64), ("affine", 96),
                                      ("heisenberg", 64)])
def test_resolution_convergence_smooth_bump(gid, base):
    # radial bumps converge more slowly per axis in higher dimension, so the
    # 1e-8 doubling contract calibrates at these per-dimension resolutions
    group = get_group(gid)
    h = bump(group, 0.5)
    v1 = integrate(h, points_per_axis=base)[0]
    v2 = integrate(h, points_per_axis=2 * base)[0]
    assert abs(v1 - v2) <= 1e-8 * abs(v2)


@pytest.mark.parametrize("gid", ["Rn:1", "Rn:2", "affine", "heisenberg"])
def test_left_invariance(gid):
    group = get_group(gid)
    rng = np.random.default_rng(23)
    f = bump(group, 0.5)
    base = integrate(f)[0]
    for _ in range(10):
        g = group.from_chart(rng.uniform(-0.6, 0.6, group.dimension))
        val = integrate(translate(f, g, "left"))[0]
        assert abs(val - base) <= 1e-6 * base


def test_integral_bound_intabsch(r2):
    # p(integrate(f)) <= lambda(support) * |f|_{p,inf}, vector-valued
    rng = np.random.default_rng(24)
    syms = r2.chart_syms
    for _ in range(10):
        c = rng.uniform(0.4, 1.2, 2)
        f = from_chart_expr(
            r2, [c[0] * syms[0] ** 2, c[1] * (1 + syms[1])],
            [(-0.8, 0.5), (-0.3, 0.9)])
        val = integrate(f)
        vol = haar_volume(r2, f.support_param.base_box)
        from groupconv.seminorms import grid_sup
        for p in (ABS, EUCL):
            sup = grid_sup(f, p, DEFAULT_CONFIG)
            assert p.scalar(val) <= vol * sup * (1 + 1e-9)


def test_pushforward_residual_even_function_on_r(r1):
    h = bump(r1, 1.0)
    assert inversion_pushforward_residual(h) < 1e-12


def test_pushforward_residual_affine(affine):
    h = bump(affine, 0.5, center=affine.from_chart([0.1, -0.2]))
    r_default = inversion_pushforward_residual(h)
    assert r_default <= 1e-6
    r_double = inversion_pushforward_residual(h, points_per_axis=96)
    assert r_double <= 1e-6


def test_pushforward_residual_discrete_exact():
    z = get_group("Z")
    f = DiscreteFunction(z, {-1: 2.0, 0: 1.0, 4: -3.0})
    assert inversion_pushforward_residual(f) == 0.0


def test_support_escaping_chart_raises(affine):
    big = from_chart_expr(affine, [1], [(-9.0, 9.0), (-9.0, 9.0)])
    with pytest.raises(DomainError):
        integrate(big)


def test_rule_invariants(affine):
    rule = make_rule(affine, np.array([[-0.4, 0.4], [-0.3, 0.3]]), 16)
    assert np.all(rule.weights > 0)
    box = rule.param.base_box
    assert np.all(rule.nodes_param >= box[:, 0]) and np.all(
        rule.nodes_param <= box[:, 1])


def test_midpoint_scheme(r1):
    one = from_chart_expr(r1, [1], [(0.0, 1.0)])
    got = integrate(one, cfg=DEFAULT_CONFIG.with_updates(scheme="midpoint"))
    assert abs(got[0] - 1.0) < 1e-13
    h = bump(r1, 1.0)
    mid = integrate(h, cfg=DEFAULT_CONFIG.with_updates(scheme="midpoint"),
                    points_per_axis=512)[0]
    assert abs(mid - 0.4439938161680796) < 1e-5


def test_integrate_callable(r1):
    val = integrate_callable(r1, lambda p: np.cos(p[..., 0]),
                             np.array([[0.0, np.pi / 2]]))
    assert abs(val[0] - 1.0) < 1e-12
