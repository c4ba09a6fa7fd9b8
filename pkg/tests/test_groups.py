"""Group catalog: laws, charts, Haar densities, modular functions."""

import numpy as np
import pytest

from groupconv import DomainError, UsageError, WordCapError, bump, get_group
from groupconv.quadrature import integrate, make_rule
from conftest import random_element


# ---------------------------------------------------------------------------
# Group laws
# ---------------------------------------------------------------------------

ALL_IDS = ["Rn:1", "Rn:2", "affine", "heisenberg", "Z", "Z2", "S3", "F2:len4"]


@pytest.mark.parametrize("gid", ALL_IDS)
def test_group_axioms_on_samples(gid):
    group = get_group(gid)
    rng = np.random.default_rng(17)
    for _ in range(30):
        g = random_element(group, rng)
        h = random_element(group, rng)
        k = random_element(group, rng)
        e = group.identity
        assert group.elements_close(group.multiply(g, e), g)
        assert group.elements_close(group.multiply(e, g), g)
        assert group.elements_close(group.multiply(g, group.inverse(g)), e)
        try:
            lhs = group.multiply(group.multiply(g, h), k)
            rhs = group.multiply(g, group.multiply(h, k))
        except WordCapError:
            continue
        assert group.elements_close(lhs, rhs)


def test_rn_addition(r2):
    out = r2.multiply(np.array([1.0, 2.0]), np.array([3.0, 4.0]))
    assert np.allclose(out, [4.0, 6.0])


def test_affine_law_and_inverse(affine):
    out = affine.multiply(np.array([2.0, 1.0]), np.array([3.0, 5.0]))
    assert np.allclose(out, [6.0, 11.0])
    inv = affine.inverse(np.array([2.0, 1.0]))
    assert np.allclose(inv, [0.5, -0.5])
    assert np.allclose(affine.inverse(affine.identity), affine.identity)


def test_affine_inverse_rejects_nonpositive_a(affine):
    with pytest.raises(DomainError):
        affine.inverse(np.array([-1.0, 0.0]))


def _heis_matrix(g):
    x, y, z = g
    return np.array([[1.0, x, z], [0.0, 1.0, y], [0.0, 0.0, 1.0]])


def test_heisenberg_product_matches_matrix_oracle(heisenberg):
    # oracle: product of upper-triangular 3x3 matrices
    out = heisenberg.multiply(np.array([1.0, 0, 0]), np.array([0.0, 1, 0]))
    assert np.allclose(out, [1.0, 1.0, 1.0])
    rng = np.random.default_rng(3)
    for _ in range(20):
        g, h = rng.normal(size=3), rng.normal(size=3)
        prod = heisenberg.multiply(g, h)
        mat = _heis_matrix(g) @ _heis_matrix(h)
        assert np.allclose(_heis_matrix(prod), mat)


def test_heisenberg_inverse_matches_matrix_oracle(heisenberg):
    assert np.allclose(heisenberg.inverse(np.array([1.0, 1, 1])), [-1, -1, 0])
    rng = np.random.default_rng(4)
    for _ in range(20):
        g = rng.normal(size=3)
        inv = heisenberg.inverse(g)
        assert np.allclose(_heis_matrix(inv), np.linalg.inv(_heis_matrix(g)))


def test_vectorized_ops_match_scalar(lie_groups):
    rng = np.random.default_rng(5)
    for group in lie_groups:
        m = group.dimension
        gs = group.from_chart(rng.uniform(-0.5, 0.5, (10, m)))
        hs = group.from_chart(rng.uniform(-0.5, 0.5, (10, m)))
        batch = group.multiply(gs, hs)
        for i in range(10):
            assert np.allclose(batch[i], group.multiply(gs[i], hs[i]))
        binv = group.inverse(gs)
        for i in range(10):
            assert np.allclose(binv[i], group.inverse(gs[i]))


# ---------------------------------------------------------------------------
# Charts
# ---------------------------------------------------------------------------

def test_chart_identity_and_roundtrip(lie_groups):
    rng = np.random.default_rng(6)
    for group in lie_groups:
        assert np.all(group.to_chart(group.identity) == 0.0)
        q = rng.uniform(-1.2, 1.2, (200, group.dimension))
        back = group.to_chart(group.from_chart(q))
        assert np.max(np.abs(back - q)) < 1e-10


def test_chart_antisymmetry(lie_groups):
    # phi(x^{-1}) = -phi(x) on grid points
    rng = np.random.default_rng(7)
    for group in lie_groups:
        q = rng.uniform(-1.2, 1.2, (200, group.dimension))
        x = group.from_chart(q)
        assert np.max(np.abs(group.to_chart(group.inverse(x)) + q)) < 1e-10


def test_basis_linearly_independent(lie_groups):
    for group in lie_groups:
        assert abs(np.linalg.det(group.basis())) > 0.5


# ---------------------------------------------------------------------------
# Invariant frames and Haar density
# ---------------------------------------------------------------------------

def _frame_fd(group, q, v, side, h=1e-6):
    x = group.from_chart(q)

    def curve(t):
        step = group.from_chart(t * v)
        y = group.multiply(x, step) if side == "left" else group.multiply(step, x)
        return group.to_chart(y)

    c1 = (curve(h) - curve(-h)) / (2 * h)
    c2 = (curve(h / 2) - curve(-h / 2)) / h
    return (4 * c2 - c1) / 3


@pytest.mark.parametrize("side", ["left", "right"])
def test_frames_match_flow_derivatives(lie_groups, side):
    rng = np.random.default_rng(8)
    for group in lie_groups:
        m = group.dimension
        for _ in range(10):
            q = rng.uniform(-1.0, 1.0, m)
            v = rng.normal(size=m)
            frame = group.left_frame(q) if side == "left" else group.right_frame(q)
            assert np.max(np.abs(frame @ v - _frame_fd(group, q, v, side))) < 1e-8


@pytest.mark.parametrize("side", ["left", "right"])
def test_symbolic_field_coeffs_match_frames(lie_groups, side):
    import sympy as sp
    rng = np.random.default_rng(9)
    for group in lie_groups:
        m = group.dimension
        syms = group.chart_syms
        for _ in range(5):
            v = rng.normal(size=m)
            exprs = group.sym_field_coeffs(side, v)
            fns = [sp.lambdify(syms, e, "numpy") for e in exprs]
            q = rng.uniform(-1.0, 1.0, (50, m))
            frame = group.left_frame(q) if side == "left" else group.right_frame(q)
            want = frame @ v
            got = np.stack([np.broadcast_to(f(*q.T), (50,)) for f in fns], axis=-1)
            assert np.max(np.abs(got - want)) < 1e-12


def test_haar_density_rn_and_heisenberg_are_one(r2, heisenberg):
    rng = np.random.default_rng(10)
    for group in (r2, heisenberg):
        q = rng.uniform(-1.0, 1.0, (100, group.dimension))
        assert np.max(np.abs(group.haar_density(q, check=False) - 1.0)) < 1e-12


def test_haar_density_matches_translation_jacobian_oracle(affine):
    # oracle: FD Jacobian at 0 of p -> phi(phi^{-1}(q) phi^{-1}(p))
    rng = np.random.default_rng(11)
    for _ in range(20):
        q = rng.uniform(-1.5, 1.5, 2)
        g = affine.from_chart(q)
        h = 1e-5
        cols = []
        for k in range(2):
            e = np.zeros(2)
            e[k] = 1.0

            def col(hh):
                plus = affine.to_chart(affine.multiply(g, affine.from_chart(hh * e)))
                minus = affine.to_chart(affine.multiply(g, affine.from_chart(-hh * e)))
                return (plus - minus) / (2 * hh)

            cols.append((4 * col(h / 2) - col(h)) / 3)
        det = np.linalg.det(np.stack(cols, axis=-1))
        assert abs(affine.haar_density(q) - 1.0 / abs(det)) < 1e-9


def test_haar_density_closed_form_affine(affine):
    # pushforward of da db / a^2 through exponential coordinates
    u = np.linspace(-2.0, 2.0, 41)
    q = np.stack([u, 0.3 * np.ones_like(u)], axis=-1)
    expected = np.where(u == 0, 1.0, -np.expm1(-u) / np.where(u == 0, 1, u))
    assert np.max(np.abs(affine.haar_density(q, check=False) - expected)) < 1e-13


def test_haar_density_domain_error(affine):
    with pytest.raises(DomainError):
        affine.haar_density(np.array([5.0, 0.0]))


# ---------------------------------------------------------------------------
# Modular function
# ---------------------------------------------------------------------------

def test_modular_basics(lie_groups, discrete_groups):
    for group in lie_groups:
        assert abs(float(np.asarray(group.modular(group.identity))) - 1.0) < 1e-15
    for group in discrete_groups:
        assert group.modular(group.identity) == 1.0


def test_modular_homomorphism(lie_groups):
    rng = np.random.default_rng(12)
    for group in lie_groups:
        m = group.dimension
        for _ in range(100):
            g = group.from_chart(rng.uniform(-1.0, 1.0, m))
            h = group.from_chart(rng.uniform(-1.0, 1.0, m))
            lhs = float(group.modular(group.multiply(g, h)))
            rhs = float(group.modular(g)) * float(group.modular(h))
            assert abs(lhs - rhs) <= 1e-9 * rhs


def right_translate_volume(group, box, x, points=48):
    """lambda_G(E x) by pushforward quadrature: int_E rho(T(p)) |det DT| dp
    with T(p) = phi(phi^{-1}(p) x).  Independent of modular()."""
    rule = make_rule(group, np.asarray(box, float), points)
    p = rule.nodes_param

    def T(pts):
        return group.to_chart(group.multiply(group.from_chart(pts),
                                             np.broadcast_to(x, pts.shape)))

    m = group.dimension
    h = 1e-5
    cols = []
    for k in range(m):
        e = np.zeros(m)
        e[k] = 1.0
        c1 = (T(p + h * e) - T(p - h * e)) / (2 * h)
        c2 = (T(p + h / 2 * e) - T(p - h / 2 * e)) / h
        cols.append((4 * c2 - c1) / 3)
    jac = np.stack(cols, axis=-1)
    dens = group.haar_density(T(p), check=False)
    lebesgue = rule.weights / group.haar_density(p, check=False)
    return float(np.sum(lebesgue * dens * np.abs(np.linalg.det(jac))))


@pytest.mark.parametrize("gid", ["affine", "heisenberg"])
def test_modular_defining_identity(gid):
    # lambda_G(E x) = Delta(x) lambda_G(E) on random boxes and elements
    group = get_group(gid)
    rng = np.random.default_rng(13)
    m = group.dimension
    for _ in range(8):
        lo = rng.uniform(-1.0, 0.0, m)
        hi = lo + rng.uniform(0.3, 0.8, m)
        box = np.stack([lo, hi], axis=-1)
        x = group.from_chart(rng.uniform(-0.8, 0.8, m))
        vol_e = float(np.sum(make_rule(group, box, 48).weights))
        vol_ex = right_translate_volume(group, box, x)
        delta = float(group.modular(x))
        assert abs(vol_ex - delta * vol_e) <= 1e-5 * delta * vol_e


def test_modular_derivative_matches_fd(lie_groups):
    rng = np.random.default_rng(14)
    for group in lie_groups:
        m = group.dimension
        for _ in range(5):
            v = rng.normal(size=m)
            h = 1e-6
            fd = (float(group.modular(group.exp_tangent(h * v)))
                  - float(group.modular(group.exp_tangent(-h * v)))) / (2 * h)
            assert abs(group.modular_derivative(v) - fd) < 1e-7


def test_adjoint_matches_conjugation_fd(lie_groups):
    rng = np.random.default_rng(15)
    for group in lie_groups:
        m = group.dimension
        for _ in range(10):
            g = group.from_chart(rng.uniform(-0.8, 0.8, m))
            v = rng.normal(size=m)
            ginv = group.inverse(g)
            h = 1e-6

            def conj(t):
                return group.to_chart(group.multiply(
                    group.multiply(g, group.exp_tangent(t * v)), ginv))

            fd = (conj(h) - conj(-h)) / (2 * h)
            assert np.max(np.abs(group.adjoint(g) @ v - fd)) < 1e-6


# ---------------------------------------------------------------------------
# Haar left invariance through quadrature
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("gid", ["Rn:1", "Rn:2", "affine", "heisenberg"])
def test_left_invariance_of_haar_quadrature(gid):
    from groupconv.functions import translate
    group = get_group(gid)
    rng = np.random.default_rng(16)
    f = bump(group, 0.5)
    base = integrate(f)[0]
    mass = base  # f >= 0
    for _ in range(10):
        g = group.from_chart(rng.uniform(-0.6, 0.6, group.dimension))
        shifted = translate(f, g, "left")   # x -> f(g x)
        val = integrate(shifted)[0]
        assert abs(val - base) <= 1e-6 * mass


# ---------------------------------------------------------------------------
# Discrete specifics
# ---------------------------------------------------------------------------

def test_s3_noncommutative():
    s3 = get_group("S3")
    a, b = (1, 0, 2), (2, 1, 0)
    assert s3.multiply(a, b) != s3.multiply(b, a)
    assert s3.inverse(a) == a
    assert sorted(s3.elements()) == sorted(
        [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)])


def test_f2_reduction_and_cap():
    f2 = get_group("F2:len4")
    assert f2.multiply("ab", "Ba") == "aa"
    assert f2.multiply("a", "A") == ""
    assert f2.inverse("abA") == "aBA"
    with pytest.raises(WordCapError):
        f2.multiply("abab", "ab")
    with pytest.raises(UsageError):
        f2.validate("aA")


def test_catalog_unknown_id():
    with pytest.raises(UsageError):
        get_group("SO3")
