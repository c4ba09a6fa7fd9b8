"""The convolution engine (gamma *_b eta) and its identity/bound suite.

Evaluation strategy: (gamma *_b eta)(x) integrates over Supp(gamma); for
each requested point the rule box is clipped to the intersection of
Supp(gamma) with a conservative hull of x Supp(eta)^{-1}, which is where
the kernel can be nonzero.  Clipping concentrates the fixed tensor rule on
the actual integrand support and is what makes 1e-6 identity residuals
reachable on three-dimensional groups.  Warped supports (translated
factors) integrate through their pullback parametrization instead.

Derivatives of results never difference the quadrature: a left-invariant
field falls on eta and a right-invariant field on gamma, each exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .config import DEFAULT_CONFIG, NumericsConfig
from .errors import CapabilityError, DomainError, UsageError
from .functions import (DiscreteFunction, TestFunction, VectorFieldSpec,
                        fd_flow_derivative, star, translate)
from .quadrature import haar_volume, make_rule
from .seminorms import SeminormSpec, grid_sup, seminorm
from .support import (SupportParam, box_array, box_contains_point, box_hull,
                      box_intersect, box_widen, mapped_hull, sample_box)
from .vecnorms import ABS, VectorSeminorm

__all__ = [
    "BilinearMap", "scalar_multiplication", "matrix2x2_multiplication",
    "ConvolutionResult", "convolve", "convolve_alt", "conv_derivative",
    "verify_identity", "seminorm_bound_report", "IdentityReport",
    "BoundReport", "IDENTITY_TAGS",
]


@dataclass(frozen=True)
class BilinearMap:
    """Bilinear pairing b: R^{d1} x R^{d2} -> R^{d} via a coefficient tensor.

    p1, p2, q are certified seminorms: q(b(x, y)) <= p1(x) p2(y) must hold
    (checked statistically in the test-suite, relied on by bound reports).
    """
    name: str
    tensor: np.ndarray            # shape (d1, d2, d)
    p1: VectorSeminorm = dc_field(default_factory=lambda: ABS)
    p2: VectorSeminorm = dc_field(default_factory=lambda: ABS)
    q: VectorSeminorm = dc_field(default_factory=lambda: ABS)

    def __post_init__(self):
        t = np.asarray(self.tensor, dtype=float)
        if t.ndim != 3:
            raise UsageError("bilinear tensor must have shape (d1, d2, d)")
        object.__setattr__(self, "tensor", t)

    @property
    def d1(self):
        return self.tensor.shape[0]

    @property
    def d2(self):
        return self.tensor.shape[1]

    @property
    def dim(self):
        return self.tensor.shape[2]

    def apply(self, x, y):
        """b(x, y), broadcasting over leading axes."""
        return np.einsum("ijk,...i,...j->...k", self.tensor,
                         np.asarray(x, float), np.asarray(y, float))

    def vee(self) -> "BilinearMap":
        """b_vee(x, y) := b(y, x), with the certified seminorms swapped."""
        return BilinearMap(self.name + "_vee",
                           np.transpose(self.tensor, (1, 0, 2)),
                           p1=self.p2, p2=self.p1, q=self.q)


def scalar_multiplication() -> BilinearMap:
    return BilinearMap("mult", np.ones((1, 1, 1)))


def matrix2x2_multiplication() -> BilinearMap:
    """2x2 matrix product on row-major flattened matrices, operator norms."""
    t = np.zeros((4, 4, 4))
    for i in range(2):
        for j in range(2):
            for k in range(2):
                t[2 * i + k, 2 * k + j, 2 * i + j] = 1.0
    from .vecnorms import OP2
    return BilinearMap("matmul2", t, p1=OP2, p2=OP2, q=OP2)


@dataclass(frozen=True)
class ConvProvenance:
    formula: str
    points_per_axis: int
    gamma_box: tuple
    eta_box: tuple


class ConvolutionResult(TestFunction):
    """Lazy, memoizing convolution gamma *_b eta on a Lie group."""

    expensive_eval = True

    def __init__(self, b: BilinearMap, gamma: TestFunction, eta: TestFunction,
                 cfg: NumericsConfig, formula: str = "direct",
                 low: bool = False):
        group = gamma.group
        if eta.group is not group:
            raise UsageError("convolution factors must share a group model")
        if gamma.dim != b.d1 or eta.dim != b.d2:
            raise UsageError(
                f"dimension mismatch: b expects ({b.d1},{b.d2}), "
                f"got ({gamma.dim},{eta.dim})")
        order = (math.inf if math.inf in (gamma.order, eta.order)
                 else gamma.order + eta.order)
        super().__init__(group, order, b.dim)
        self.b = b
        self.gamma = gamma
        self.eta = eta
        self.cfg = cfg
        self.low = low
        self.formula = formula
        self._memo = {}
        self._support_box = None
        self._gamma_box = gamma.support_box()
        self._eta_box = eta.support_box()
        self.provenance = ConvProvenance(
            formula, cfg.quad_n(group.dimension, low=low),
            tuple(map(tuple, self._gamma_box)),
            tuple(map(tuple, self._eta_box)))

    # -- support -------------------------------------------------------------
    @property
    def support_param(self):
        return SupportParam(self._product_hull(), None)

    def _product_hull(self):
        if self._support_box is None:
            g = self.group
            s = self.cfg.hull_samples_per_axis
            a = sample_box(self._gamma_box, min(s, 5))
            bpts = sample_box(self._eta_box, min(s, 5))
            prod = g.multiply(g.from_chart(a)[:, None, :],
                              g.from_chart(bpts)[None, :, :])
            q = g.to_chart(prod.reshape(-1, g.dimension))
            lo, hi = q.min(axis=0), q.max(axis=0)
            c, hw = (lo + hi) / 2, (hi - lo) / 2 * (1 + self.cfg.hull_pad)
            box = np.stack([c - hw, c + hw], axis=-1)
            # keep the declared support inside the chart domain
            clipped = box_intersect(box, self.group.chart.box)
            self._support_box = box if clipped is None else clipped
        return self._support_box

    def support_box(self, per_axis: int = 7, pad: float = 0.05):
        return self._product_hull()

    # -- evaluation ------------------------------------------------------------
    def values(self, pts):
        pts = np.asarray(pts, dtype=float)
        flat = pts.reshape(-1, self.group.dimension)
        out = np.empty((flat.shape[0], self.dim))
        for i, x in enumerate(flat):
            key = x.tobytes()
            hit = self._memo.get(key)
            if hit is None:
                hit = self._eval_point(x)
                self._memo[key] = hit
            out[i] = hit
        return out.reshape(pts.shape[:-1] + (self.dim,))

    def _eval_point(self, x):
        if self.formula == "direct":
            return self._eval_direct(x)
        return self._eval_alt(x)

    def _rule_for(self, outer: TestFunction, clip_box):
        """Rule over outer's support, clipped to the kernel's active region."""
        param = outer.support_param
        cfg = self.cfg
        n = cfg.quad_n(self.group.dimension, low=self.low)
        if clip_box is not None:
            param = param.clipped(self.group, clip_box)
            if param is None:
                return None
        return make_rule(self.group, param, n, cfg.scheme)

    def _eval_direct(self, x):
        g = self.group
        # y must lie in Supp(gamma) and in x Supp(eta)^{-1}
        clip = mapped_hull(
            lambda ql: g.to_chart(g.multiply(np.broadcast_to(x, ql.shape),
                                             g.inverse(g.from_chart(ql)))),
            self._eta_box, per_axis=3, pad=0.07)
        rule = self._rule_for(self.gamma, clip)
        if rule is None:
            return np.zeros(self.dim)
        y = rule.points
        gv = self.gamma.values(y)
        z = g.multiply(g.inverse(y), np.broadcast_to(x, y.shape))
        ev = self.eta.values(z)
        return np.einsum("n,ijk,ni,nj->k", rule.weights, self.b.tensor, gv, ev)

    def _eval_alt(self, x):
        g = self.group
        # z in Supp(eta) and x z^{-1} in Supp(gamma)  =>  z in Supp(gamma)^{-1} x
        clip = mapped_hull(
            lambda qk: g.to_chart(g.multiply(g.inverse(g.from_chart(qk)),
                                             np.broadcast_to(x, qk.shape))),
            self._gamma_box, per_axis=3, pad=0.07)
        rule = self._rule_for(self.eta, clip)
        if rule is None:
            return np.zeros(self.dim)
        z = rule.points
        zi = g.inverse(z)
        ev = self.eta.values(z) * g.modular(zi)[..., None]
        gv = self.gamma.values(g.multiply(np.broadcast_to(x, z.shape), zi))
        return np.einsum("n,ijk,ni,nj->k", rule.weights, self.b.tensor, gv, ev)

    # -- calculus --------------------------------------------------------------
    def _derive(self, field: VectorFieldSpec):
        if field.side == "left":
            return ConvolutionResult(self.b, self.gamma, self.eta.derive(field),
                                     self.cfg, self.formula, self.low)
        return ConvolutionResult(self.b, self.gamma.derive(field), self.eta,
                                 self.cfg, self.formula, self.low)


class _DiscreteConvolution(DiscreteFunction):
    pass


def _convolve_discrete(b: BilinearMap, gamma: DiscreteFunction,
                       eta: DiscreteFunction) -> DiscreteFunction:
    group = gamma.group
    acc = {}
    for y, gv in gamma.mapping.items():
        yinv = group.inverse(y)
        for z, ev in eta.mapping.items():
            x = group.multiply(y, z)
            contrib = b.apply(gv, ev)
            if x in acc:
                acc[x] = acc[x] + contrib
            else:
                acc[x] = contrib
    return _DiscreteConvolution(group, acc, b.dim)


def convolve(b: BilinearMap, gamma: TestFunction, eta: TestFunction,
             cfg: NumericsConfig = DEFAULT_CONFIG,
             low: bool = False) -> TestFunction:
    """(gamma *_b eta)(x) = int b(gamma(y), eta(y^{-1} x)) dlambda(y)."""
    if gamma.group is not eta.group:
        raise UsageError("convolution factors must share a group model")
    if gamma.group.is_discrete:
        if gamma.dim != b.d1 or eta.dim != b.d2:
            raise UsageError("dimension mismatch between b and operands")
        return _convolve_discrete(b, gamma, eta)
    return ConvolutionResult(b, gamma, eta, cfg, "direct", low)


def convolve_alt(b: BilinearMap, gamma: TestFunction, eta: TestFunction,
                 cfg: NumericsConfig = DEFAULT_CONFIG,
                 low: bool = False) -> TestFunction:
    """Same value through the inversion-substituted integral:
    int b(gamma(x z^{-1}), Delta(z^{-1}) eta(z)) dlambda(z)."""
    if gamma.group is not eta.group:
        raise UsageError("convolution factors must share a group model")
    if gamma.group.is_discrete:
        # counting measure, Delta = 1: same exact sum reindexed
        return _convolve_discrete(b, gamma, eta)
    return ConvolutionResult(b, gamma, eta, cfg, "alt", low)


def conv_derivative(b: BilinearMap, gamma: TestFunction, eta: TestFunction,
                    right_fields, left_fields,
                    cfg: NumericsConfig = DEFAULT_CONFIG,
                    low: bool = False) -> TestFunction:
    """R_{w_j}...R_{w_1} L_{v_i}...L_{v_1} . (gamma *_b eta), computed as
    (R_{w_j}...R_{w_1}.gamma) *_b (L_{v_i}...L_{v_1}.eta)."""
    right_fields = list(right_fields)
    left_fields = list(left_fields)
    for f in right_fields:
        if f.side != "right":
            raise UsageError("right_fields must be right-invariant")
    for f in left_fields:
        if f.side != "left":
            raise UsageError("left_fields must be left-invariant")
    if gamma.order != math.inf and len(right_fields) > gamma.order:
        raise CapabilityError("too many right derivatives for gamma's order")
    if eta.order != math.inf and len(left_fields) > eta.order:
        raise CapabilityError("too many left derivatives for eta's order")
    dg = gamma
    for f in right_fields:
        dg = dg.derive(f)
    de = eta
    for f in left_fields:
        de = de.derive(f)
    return convolve(b, dg, de, cfg, low)


# ---------------------------------------------------------------------------
# Identity and bound verification
# ---------------------------------------------------------------------------

IDENTITY_TAGS = ("INVO", "TRANS_L", "TRANS_R", "SUPPORT", "ALTFORM",
                 "YOUNG_SUP", "YOUNG_L1", "DERIV", "LASIMPE")


@dataclass
class IdentityReport:
    tag: str
    group: str
    lhs_norm: float
    rhs_norm: float
    residual: float
    tolerance: float
    passed: bool
    details: dict = dc_field(default_factory=dict)

    def to_row(self) -> dict:
        return {"group": self.group, "tag": self.tag,
                "residual": self.residual, "tolerance": self.tolerance,
                "pass": self.passed}


def _residual_report(tag, group, lhs_vals, rhs_vals, tol, details=None):
    lhs_vals = np.asarray(lhs_vals, float)
    rhs_vals = np.asarray(rhs_vals, float)
    lhs_norm = float(np.max(np.abs(lhs_vals))) if lhs_vals.size else 0.0
    rhs_norm = float(np.max(np.abs(rhs_vals))) if rhs_vals.size else 0.0
    denom = max(lhs_norm, rhs_norm)
    diff = float(np.max(np.abs(lhs_vals - rhs_vals))) if lhs_vals.size else 0.0
    residual = 0.0 if denom == 0.0 else diff / denom
    return IdentityReport(tag, group.name, lhs_norm, rhs_norm, residual,
                          tol, residual <= tol, details or {})


def _bound_report(tag, group, lhs, rhs, slack_tol, details=None):
    lhs, rhs = float(lhs), float(rhs)
    denom = max(abs(rhs), 1e-300)
    residual = max(0.0, lhs - rhs) / denom
    passed = lhs <= rhs * (1.0 + slack_tol) + 1e-300
    return IdentityReport(tag, group.name, lhs, rhs, residual, slack_tol,
                          passed, details or {})


def _identity_grid(group, box, n_per_axis):
    return group.from_chart(sample_box(box, n_per_axis))


def verify_identity(tag: str, b: BilinearMap, gamma: TestFunction,
                    eta: TestFunction, g=None,
                    cfg: NumericsConfig = DEFAULT_CONFIG,
                    tol: float | None = None) -> IdentityReport:
    """Check one identity/bound of the convolution calculus on a factor pair.

    Tags: INVO ((gamma*eta)^* = eta^* *_bvee gamma^*), TRANS_L/TRANS_R
    (translation covariance; needs g), SUPPORT (product-set containment),
    ALTFORM (direct vs inversion-substituted formula), YOUNG_SUP (windowed
    sup bound), YOUNG_L1 (L1 submultiplicativity), DERIV (derivative
    formula vs flow finite differences), LASIMPE (the three seminorm bound
    rows, reported through their maximal relative violation).
    """
    group = gamma.group
    if tag not in IDENTITY_TAGS:
        raise UsageError(f"unknown identity tag {tag!r}")
    if tol is None:
        tol = cfg.deriv_tol if tag == "DERIV" else cfg.identity_tol
    m = group.dimension
    ngrid = cfg.conv_grid_n(m)

    if tag == "INVO":
        conv = convolve(b, gamma, eta, cfg)
        lhs_f = star(conv)
        rhs_f = convolve(b.vee(), star(eta), star(gamma), cfg)
        box = box_hull(lhs_f.support_box(), rhs_f.support_box())
        pts = _identity_grid(group, box, ngrid)
        return _residual_report(tag, group, lhs_f.values(pts),
                                rhs_f.values(pts), tol)

    if tag in ("TRANS_L", "TRANS_R"):
        if g is None:
            raise UsageError(f"{tag} needs a group element g")
        side = "left" if tag == "TRANS_L" else "right"
        conv = convolve(b, gamma, eta, cfg)
        lhs_f = translate(conv, g, side)
        if side == "left":
            rhs_f = convolve(b, translate(gamma, g, "left"), eta, cfg)
        else:
            rhs_f = convolve(b, gamma, translate(eta, g, "right"), cfg)
        box = rhs_f.support_box()
        pts = _identity_grid(group, box, ngrid)
        return _residual_report(tag, group, lhs_f.values(pts),
                                rhs_f.values(pts), tol,
                                details={"g": np.asarray(g).tolist()})

    if tag == "ALTFORM":
        lhs_f = convolve(b, gamma, eta, cfg)
        rhs_f = convolve_alt(b, gamma, eta, cfg)
        pts = _identity_grid(group, lhs_f.support_box(), ngrid)
        return _residual_report(tag, group, lhs_f.values(pts),
                                rhs_f.values(pts), tol)

    if tag == "SUPPORT":
        conv = convolve(b, gamma, eta, cfg)
        hull = conv.support_box()
        outer = box_intersect(box_widen(hull, 0.5), group.chart.box)
        pts_q = sample_box(outer, ngrid + 4)
        outside = ~np.array([box_contains_point(hull, q, pad=1e-9)
                             for q in pts_q])
        inside_vals = conv.values(_identity_grid(group, hull, ngrid))
        scale = max(float(np.max(np.abs(inside_vals))), 1e-300)
        if np.any(outside):
            out_vals = conv.values(group.from_chart(pts_q[outside]))
            worst = float(np.max(np.abs(out_vals)))
        else:
            worst = 0.0
        residual = worst / scale
        return IdentityReport(tag, group.name, worst, scale, residual, tol,
                              residual <= tol and worst <= cfg.support_eps,
                              {"outside_points": int(np.sum(outside))})

    if tag == "YOUNG_SUP":
        conv = convolve(b, gamma, eta, cfg)
        K = gamma.support_box()
        M = conv.support_box()
        lhs = grid_sup(conv, b.q, cfg, box=M)
        lam_K = haar_volume(group, K, cfg)
        sup_g = grid_sup(gamma, b.p1, cfg)
        # sup of eta over K^{-1} M
        kinv_m = mapped_hull(
            lambda p: group.to_chart(group.multiply(
                group.inverse(group.from_chart(p[:, :m])),
                group.from_chart(p[:, m:]))),
            np.concatenate([K, M], axis=0), per_axis=5, pad=0.05)
        window = box_intersect(kinv_m, box_widen(eta.support_box(), 0.02))
        sup_e = grid_sup(eta, b.p2, cfg, box=window) if window is not None else 0.0
        rhs = lam_K * sup_g * sup_e
        return _bound_report(tag, group, lhs, rhs, cfg.bound_slack,
                             {"lambda_K": lam_K})

    if tag == "YOUNG_L1":
        # on 3-d groups the double integral runs at the low resolution; the
        # suite feeds it mixed-sign operands whose slack dwarfs that error
        conv = convolve(b, gamma, eta, cfg, low=m >= 3)
        n_outer = {1: 64, 2: 32, 3: 8}.get(m, 8)
        rule = make_rule(group, conv.support_param, n_outer, cfg.scheme)
        lhs = float(np.sum(rule.weights * b.q.apply(conv.values(rule.points))))
        l1_g = seminorm(gamma, SeminormSpec("L1", p=b.p1), cfg)
        l1_e = seminorm(eta, SeminormSpec("L1", p=b.p2), cfg)
        rhs = l1_g * l1_e
        return _bound_report(tag, group, lhs, rhs, tol)

    if tag == "DERIV":
        return _verify_deriv(b, gamma, eta, cfg, tol)

    # LASIMPE: worst relative violation over the three bound rows
    rep = seminorm_bound_report(b, gamma, eta, k=1, l=1, cfg=cfg)
    worst = max(rep.rows, key=lambda row: row["residual"])
    return IdentityReport("LASIMPE", group.name, worst["lhs"], worst["rhs"],
                          worst["residual"], cfg.bound_slack, rep.passed,
                          {"rows": rep.rows})


def _fd_conv_flow(engine: ConvolutionResult, prev: ConvolutionResult,
                  field: VectorFieldSpec, x, step: float):
    """One flow-derivative validation step on a shared quadrature rule.

    Returns (engine_value, fd_value) at x, both integrated with the same
    nodes: fd is a three-level Richardson difference of ``prev`` along the
    field's flow, engine is the derivative moved onto the factors.  Left
    flows act on eta's argument in the direct form, right flows on gamma's
    argument in the inversion-substituted form, so on shared nodes the
    common quadrature error cancels and the residual isolates the
    derivative-shifting identity (the two integral forms agree by the
    separately verified ALTFORM identity).
    """
    from .functions import flow_points
    g = engine.group
    ts = np.array([step, -step, step / 2, -step / 2, step / 4, -step / 4])
    xs = np.stack([flow_points(g, field, x[None, :], t)[0] for t in ts])
    all_x = np.concatenate([xs, x[None, :]], axis=0)

    if field.side == "left":
        # direct form: nodes y over Supp(gamma), eta sees y^{-1} x exp(tv)
        clips = [mapped_hull(
            lambda ql, xt=xt: g.to_chart(
                g.multiply(np.broadcast_to(xt, ql.shape),
                           g.inverse(g.from_chart(ql)))),
            engine._eta_box, per_axis=3, pad=0.07) for xt in all_x]
        rule = engine._rule_for(engine.gamma, box_hull(*clips))
        if rule is None:
            return np.zeros(engine.dim), np.zeros(engine.dim)
        y = rule.points
        yi = g.inverse(y)
        gv_e = engine.gamma.values(y)
        ev_e = engine.eta.values(g.multiply(yi, np.broadcast_to(x, y.shape)))
        en_val = np.einsum("n,ijk,ni,nj->k", rule.weights, engine.b.tensor,
                           gv_e, ev_e)
        gv_p = prev.gamma.values(y)
        vals = []
        for xt in xs:
            ev = prev.eta.values(g.multiply(yi, np.broadcast_to(xt, y.shape)))
            vals.append(np.einsum("n,ijk,ni,nj->k", rule.weights,
                                  prev.b.tensor, gv_p, ev))
    else:
        # alt form: nodes z over Supp(eta), gamma sees exp(tw) x z^{-1}
        clips = [mapped_hull(
            lambda qk, xt=xt: g.to_chart(
                g.multiply(g.inverse(g.from_chart(qk)),
                           np.broadcast_to(xt, qk.shape))),
            engine._gamma_box, per_axis=3, pad=0.07) for xt in all_x]
        rule = engine._rule_for(engine.eta, box_hull(*clips))
        if rule is None:
            return np.zeros(engine.dim), np.zeros(engine.dim)
        z = rule.points
        zi = g.inverse(z)
        mod = g.modular(zi)[..., None]
        ev_e = engine.eta.values(z) * mod
        gv_e = engine.gamma.values(
            g.multiply(np.broadcast_to(x, z.shape), zi))
        en_val = np.einsum("n,ijk,ni,nj->k", rule.weights, engine.b.tensor,
                           gv_e, ev_e)
        ev_p = prev.eta.values(z) * mod
        vals = []
        for xt in xs:
            gv = prev.gamma.values(g.multiply(np.broadcast_to(xt, z.shape), zi))
            vals.append(np.einsum("n,ijk,ni,nj->k", rule.weights,
                                  prev.b.tensor, gv, ev_p))
    d1 = (vals[0] - vals[1]) / (2 * step)
    d2 = (vals[2] - vals[3]) / step
    d4 = (vals[4] - vals[5]) / (step / 2)
    r1 = (4.0 * d2 - d1) / 3.0
    r2 = (4.0 * d4 - d2) / 3.0
    return en_val, (16.0 * r2 - r1) / 15.0


def _verify_deriv(b, gamma, eta, cfg, tol):
    """Eq.-8-style derivative formula vs flow finite differences.

    Each order pair (i, j) with i + j <= 2 is validated by a Richardson
    flow difference of the engine result one order below, which keeps the
    FD noise first-order even for mixed second derivatives.
    """
    group = gamma.group
    m = group.dimension
    v = tuple(np.eye(m)[min(1, m - 1)])
    w = tuple(np.eye(m)[0])
    right = VectorFieldSpec("right", w)
    left = VectorFieldSpec("left", v)
    from .support import box_center_halfwidth
    _, hw = box_center_halfwidth(gamma.support_box())
    step = cfg.deriv_check_step * float(np.mean(hw))

    base = convolve(b, gamma, eta, cfg)
    grid = _identity_grid(group, base.support_box(), cfg.conv_grid_n(m) + 2)

    worst = 0.0
    details = {}
    for (i, j) in ((1, 0), (0, 1), (1, 1), (2, 0), (0, 2)):
        engine = conv_derivative(b, gamma, eta, [right] * i, [left] * j, cfg)
        # difference along the left flow whenever possible: its chain rule
        # acts directly on eta's argument, keeping the FD integrand in the
        # same quadrature class as the engine side
        if j > 0:
            prev = conv_derivative(b, gamma, eta, [right] * i,
                                   [left] * (j - 1), cfg)
            fd_field = left
        else:
            prev = conv_derivative(b, gamma, eta, [right] * (i - 1), [], cfg)
            fd_field = right
        # sample where this order's derivative is largest; the residual is
        # normalized by its grid maximum so near-critical points cannot
        # inflate the relative error
        en_grid = np.abs(engine.values(grid)).max(axis=-1)
        scale = max(float(en_grid.max()), 1e-300)
        pts = grid[np.argsort(en_grid)[-5:]]
        pairs = [_fd_conv_flow(engine, prev, fd_field, x, step) for x in pts]
        diff = max(float(np.max(np.abs(en - fd))) for en, fd in pairs)
        rel = diff / scale
        details[f"order_{i}{j}"] = rel
        worst = max(worst, rel)
    return IdentityReport("DERIV", group.name, 0.0, 0.0, worst, tol,
                          worst <= tol, details)


@dataclass
class BoundReport:
    group: str
    k: int
    l: int
    rows: list
    passed: bool

    def to_rows(self):
        return [{"group": self.group, "tag": f"LASIMPE_{row['name']}",
                 "residual": row["residual"], "tolerance": row["tol"],
                 "pass": row["pass"]} for row in self.rows]


def seminorm_bound_report(b: BilinearMap, gamma: TestFunction,
                          eta: TestFunction, k: int, l: int,
                          cfg: NumericsConfig = DEFAULT_CONFIG) -> BoundReport:
    """The three convolution seminorm bounds with constant lambda_G(K):

        |gamma*eta|^R_{k,q}     <= |gamma|^R_{k,p1} |eta|_{p2,inf} lambda(K)
        |gamma*eta|^L_{l,q}     <= |gamma|_{p1,inf} |eta|^L_{l,p2} lambda(K)
        |gamma*eta|^{R,L}_{k,l,q} <= |gamma|^R_{k,p1} |eta|^L_{l,p2} lambda(K)

    K is the (conservative) support box of gamma; enlarging K only raises
    the right-hand sides, so hulls keep the inequalities valid.
    """
    if b.p1 is None or b.p2 is None or b.q is None:
        raise UsageError("bound report needs certified seminorms on b")
    group = gamma.group
    conv = convolve(b, gamma, eta, cfg, low=True)
    K = gamma.support_box()
    lam_K = haar_volume(group, K, cfg)

    sup_gamma = grid_sup(gamma, b.p1, cfg)
    sup_eta = grid_sup(eta, b.p2, cfg)
    r_gamma = seminorm(gamma, SeminormSpec("R", k=k, p=b.p1), cfg)
    l_eta = seminorm(eta, SeminormSpec("L", k=l, p=b.p2), cfg)

    rows = []

    def add_row(name, lhs, rhs):
        denom = max(abs(rhs), 1e-300)
        residual = max(0.0, lhs - rhs) / denom
        rows.append({"name": name, "lhs": lhs, "rhs": rhs,
                     "residual": residual, "tol": cfg.bound_slack,
                     "pass": lhs <= rhs * (1 + cfg.bound_slack) + 1e-300})

    lhs_r = seminorm(conv, SeminormSpec("R", k=k, p=b.q), cfg)
    add_row("R", lhs_r, r_gamma * sup_eta * lam_K)

    lhs_l = seminorm(conv, SeminormSpec("L", k=l, p=b.q), cfg)
    add_row("L", lhs_l, sup_gamma * l_eta * lam_K)

    lhs_rl = seminorm(conv, SeminormSpec("RL", k=k, l=l, p=b.q), cfg)
    add_row("RL", lhs_rl, r_gamma * l_eta * lam_K)

    return BoundReport(group.name, k, l, rows, all(r["pass"] for r in rows))
