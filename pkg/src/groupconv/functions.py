"""Compactly supported test functions and their invariant derivative calculus.

Lie-group test functions are stored through their chart representative.
Functions built from sympy expressions (bumps, polynomials) differentiate
exactly: applying an invariant field means multiplying the closed-form
chart coefficients of the field into the partial derivatives of the
expression.  Structural wrappers (translates, involution, scalar algebra)
differentiate through exact rules:

    L_v.(tau^L_g f) = tau^L_g (L_v.f)
    R_v.(tau^L_g f) = tau^L_g (R_{Ad_g v}.f)
    L_v.(f^*) = -delta'(v) f^* - (R_v.f)^*      (and L <-> R swapped)

so no finite differencing enters unless a function carries no exact data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import sympy as sp

from .errors import CapabilityError, DomainError, UsageError
from .groups import DiscreteGroupModel, GroupModel, LieGroupModel
from .support import (SupportParam, box_array, box_contains_point, box_hull,
                      box_center_halfwidth)

__all__ = [
    "VectorFieldSpec", "TestFunction", "SymbolicChartFunction",
    "CallableFunction", "DiscreteFunction", "bump", "translate", "star",
    "invariant_derivative", "iterated_derivative", "from_chart_expr",
    "flow_points", "fd_flow_derivative",
]


@dataclass(frozen=True)
class VectorFieldSpec:
    """An invariant vector field: side "left" or "right" through vector v."""
    side: str
    vector: tuple

    def __post_init__(self):
        if self.side not in ("left", "right"):
            raise UsageError(f"field side must be left or right, got {self.side!r}")
        object.__setattr__(self, "vector", tuple(float(c) for c in self.vector))

    @property
    def v(self) -> np.ndarray:
        return np.asarray(self.vector, dtype=float)

    def key(self):
        return (self.side, self.vector)


def _as_points(pts, m):
    pts = np.asarray(pts, dtype=float)
    if pts.shape[-1] != m:
        raise UsageError(f"points must have last axis {m}, got {pts.shape}")
    return pts


class TestFunction:
    """Base class: a compactly supported function on a group, valued in R^d."""

    group: GroupModel
    order: float            # smoothness order; math.inf for bump/polynomial built
    dim: int

    def __init__(self, group, order, dim):
        self.group = group
        self.order = order
        self.dim = dim
        self._derive_cache = {}

    # -- evaluation ---------------------------------------------------------
    def values(self, pts) -> np.ndarray:
        """Vectorized evaluation at group points (..., m) -> (..., dim)."""
        raise NotImplementedError

    def value(self, g) -> np.ndarray:
        return self.values(np.asarray(g, dtype=float)[None, :])[0]

    # -- support ------------------------------------------------------------
    @property
    def support_param(self) -> SupportParam:
        raise NotImplementedError

    def support_box(self, per_axis: int = 7, pad: float = 0.05) -> np.ndarray:
        """Chart bounding box of the support (exact for plain functions)."""
        return self.support_param.image_box(self.group, per_axis, pad)

    # -- calculus -----------------------------------------------------------
    def derive(self, field: VectorFieldSpec) -> "TestFunction":
        key = field.key()
        cached = self._derive_cache.get(key)
        if cached is None:
            cached = self._derive(field)
            self._derive_cache[key] = cached
        return cached

    def _derive(self, field: VectorFieldSpec) -> "TestFunction":
        raise CapabilityError(
            f"{type(self).__name__} carries no exact derivative data")

    def _require_order(self):
        if self.order < 1:
            raise CapabilityError("function order is 0 and no exact derivative given")

    # -- algebra --------------------------------------------------------------
    def __mul__(self, c):
        return ScaledFunction(float(c), self)

    __rmul__ = __mul__

    def __neg__(self):
        return ScaledFunction(-1.0, self)

    def __add__(self, other):
        return SumFunction([self, other])


class SymbolicChartFunction(TestFunction):
    """Function given by sympy expressions in chart coordinates.

    ``mask`` restricts evaluation to the open region where the expression
    is meaningful; values vanish outside.  Two kinds: ("ball", center,
    radius) for radial bumps and ("box", box) for polynomial patches.
    """

    def __init__(self, group: LieGroupModel, exprs, mask, order=math.inf):
        if group.is_discrete:
            raise UsageError("SymbolicChartFunction needs a Lie group")
        exprs = list(exprs) if isinstance(exprs, (list, tuple)) else [exprs]
        super().__init__(group, order, len(exprs))
        self.exprs = [sp.sympify(e) for e in exprs]
        self.mask = mask
        self._lambdas = None
        if mask[0] == "ball":
            _, center, radius = mask
            center = np.asarray(center, dtype=float)
            box = np.stack([center - radius, center + radius], axis=-1)
        elif mask[0] == "box":
            box = box_array(mask[1])
        else:
            raise UsageError(f"unknown mask kind {mask[0]!r}")
        self._box = box
        self._param = SupportParam(box, None)

    @property
    def support_param(self):
        return self._param

    def _mask_of(self, q):
        if self.mask[0] == "ball":
            _, center, radius = self.mask
            s = np.sum((q - np.asarray(center)) ** 2, axis=-1) / radius ** 2
            return s < 1.0 - 1e-12
        b = self._box
        return np.all((q >= b[:, 0]) & (q <= b[:, 1]), axis=-1)

    def _compiled(self):
        if self._lambdas is None:
            syms = self.group.chart_syms
            self._lambdas = [sp.lambdify(syms, e, modules="numpy")
                             for e in self.exprs]
        return self._lambdas

    def values(self, pts):
        pts = _as_points(pts, self.group.dimension)
        q = self.group.to_chart(pts)
        flat = q.reshape(-1, q.shape[-1])
        inside = self._mask_of(flat)
        out = np.zeros((flat.shape[0], self.dim))
        if np.any(inside):
            cols = flat[inside].T
            with np.errstate(all="ignore"):
                for j, fn in enumerate(self._compiled()):
                    vals = fn(*cols)
                    out[inside, j] = vals
        return out.reshape(q.shape[:-1] + (self.dim,))

    def _derive(self, field):
        self._require_order()
        coeffs = self.group.sym_field_coeffs(field.side, field.v)
        syms = self.group.chart_syms
        new_exprs = []
        for e in self.exprs:
            new_exprs.append(sp.Add(*[c * sp.diff(e, s)
                                      for c, s in zip(coeffs, syms)]))
        order = self.order if self.order == math.inf else self.order - 1
        return SymbolicChartFunction(self.group, new_exprs, self.mask, order)


class ScaledFunction(TestFunction):
    def __init__(self, c: float, base: TestFunction):
        super().__init__(base.group, base.order, base.dim)
        self.c = float(c)
        self.base = base

    @property
    def support_param(self):
        return self.base.support_param

    def values(self, pts):
        return self.c * self.base.values(pts)

    def value(self, g):
        return self.c * self.base.value(g)

    def _derive(self, field):
        return ScaledFunction(self.c, self.base.derive(field))


class SumFunction(TestFunction):
    def __init__(self, parts):
        parts = list(parts)
        group = parts[0].group
        dim = parts[0].dim
        for p in parts[1:]:
            if p.group is not group or p.dim != dim:
                raise UsageError("sum parts must share group and dimension")
        order = min(p.order for p in parts)
        super().__init__(group, order, dim)
        self.parts = parts
        boxes = [p.support_box() for p in parts]
        self._param = SupportParam(box_hull(*boxes), None)

    @property
    def support_param(self):
        return self._param

    def values(self, pts):
        out = self.parts[0].values(pts)
        for p in self.parts[1:]:
            out = out + p.values(pts)
        return out

    def _derive(self, field):
        return SumFunction([p.derive(field) for p in self.parts])


class LeftTranslateFunction(TestFunction):
    """tau^L_g(f): x -> f(g x); support maps K -> g^{-1} K."""

    def __init__(self, base: TestFunction, g):
        super().__init__(base.group, base.order, base.dim)
        self.base = base
        self.g = np.asarray(g, dtype=float)
        ginv = base.group.inverse(self.g)
        self._param = base.support_param.compose_left(base.group, ginv)

    @property
    def support_param(self):
        return self._param

    def values(self, pts):
        pts = _as_points(pts, self.group.dimension)
        moved = self.group.multiply(np.broadcast_to(self.g, pts.shape), pts)
        return self.base.values(moved)

    def _derive(self, field):
        if field.side == "left":
            return LeftTranslateFunction(self.base.derive(field), self.g)
        w = self.group.adjoint(self.g) @ field.v
        inner = self.base.derive(VectorFieldSpec("right", tuple(w)))
        return LeftTranslateFunction(inner, self.g)


class RightTranslateFunction(TestFunction):
    """tau^R_g(f): x -> f(x g); support maps K -> K g^{-1}."""

    def __init__(self, base: TestFunction, g):
        super().__init__(base.group, base.order, base.dim)
        self.base = base
        self.g = np.asarray(g, dtype=float)
        ginv = base.group.inverse(self.g)
        self._param = base.support_param.compose_right(base.group, ginv)

    @property
    def support_param(self):
        return self._param

    def values(self, pts):
        pts = _as_points(pts, self.group.dimension)
        moved = self.group.multiply(pts, np.broadcast_to(self.g, pts.shape))
        return self.base.values(moved)

    def _derive(self, field):
        if field.side == "right":
            return RightTranslateFunction(self.base.derive(field), self.g)
        ginv = self.group.inverse(self.g)
        w = self.group.adjoint(ginv) @ field.v
        inner = self.base.derive(VectorFieldSpec("left", tuple(w)))
        return RightTranslateFunction(inner, self.g)


class StarFunction(TestFunction):
    """f^*(x) = Delta(x^{-1}) f(x^{-1}); support maps K -> K^{-1}."""

    def __init__(self, base: TestFunction):
        super().__init__(base.group, base.order, base.dim)
        self.base = base
        self._param = base.support_param.compose_inverse(base.group)

    @property
    def support_param(self):
        return self._param

    def values(self, pts):
        pts = _as_points(pts, self.group.dimension)
        inv = self.group.inverse(pts)
        vals = self.base.values(inv)
        return vals * self.group.modular(inv)[..., None]

    def _derive(self, field):
        delta_dot = self.group.modular_derivative(field.v)
        opposite = "right" if field.side == "left" else "left"
        inner = self.base.derive(VectorFieldSpec(opposite, field.vector))
        parts = [ScaledFunction(-1.0, StarFunction(inner))]
        if delta_dot != 0.0:
            parts.append(ScaledFunction(-delta_dot, StarFunction(self.base)))
        return parts[0] if len(parts) == 1 else SumFunction(parts)


class _FDFlowDerivative(TestFunction):
    """Richardson central flow difference; last-resort derivative path."""

    def __init__(self, base: TestFunction, field: VectorFieldSpec, step: float):
        super().__init__(base.group,
                         base.order - 1 if base.order != math.inf else math.inf,
                         base.dim)
        self.base = base
        self.field = field
        self.step = step

    @property
    def support_param(self):
        return self.base.support_param

    def values(self, pts):
        pts = _as_points(pts, self.group.dimension)
        h = self.step

        def probe(t):
            return self.base.values(flow_points(self.group, self.field, pts, t))

        d1 = (probe(h) - probe(-h)) / (2 * h)
        d2 = (probe(h / 2) - probe(-h / 2)) / h
        return (4.0 * d2 - d1) / 3.0

    def _derive(self, field):
        self.base._require_order()
        return _FDFlowDerivative(self, field, self.step)


class CallableFunction(TestFunction):
    """Plain-callable function with declared support box and finite order.

    ``fn`` maps group points (..., m) -> (..., dim).  If ``chart_gradient``
    is given (callable q -> (..., m, dim)), first derivatives are exact.
    """

    def __init__(self, group, fn, box, order, dim=1, chart_gradient=None):
        super().__init__(group, order, dim)
        self.fn = fn
        self.chart_gradient = chart_gradient
        self._param = SupportParam(box_array(box), None)

    @property
    def support_param(self):
        return self._param

    def values(self, pts):
        pts = _as_points(pts, self.group.dimension)
        out = np.asarray(self.fn(pts), dtype=float)
        if out.shape != pts.shape[:-1] + (self.dim,):
            out = out.reshape(pts.shape[:-1] + (self.dim,))
        return out

    def _derive(self, field):
        self._require_order()
        if self.chart_gradient is not None:
            return _ChartGradientDerivative(self, field)
        _, hw = box_center_halfwidth(self._param.base_box)
        step = 1e-4 * float(np.mean(hw))
        return _FDFlowDerivative(self, field, step)


class _ChartGradientDerivative(TestFunction):
    """Contraction of an exact chart gradient with invariant field coefficients."""

    def __init__(self, base: CallableFunction, field: VectorFieldSpec):
        order = base.order - 1 if base.order != math.inf else math.inf
        super().__init__(base.group, order, base.dim)
        self.base = base
        self.field = field

    @property
    def support_param(self):
        return self.base.support_param

    def values(self, pts):
        pts = _as_points(pts, self.group.dimension)
        q = self.group.to_chart(pts)
        frame = (self.group.left_frame(q) if self.field.side == "left"
                 else self.group.right_frame(q))
        coeff = frame @ self.field.v                      # (..., m)
        grad = np.asarray(self.base.chart_gradient(q), dtype=float)
        return np.einsum("...k,...kd->...d", coeff, grad)

    def _derive(self, field):
        self.base._require_order()
        _, hw = box_center_halfwidth(self.base.support_param.base_box)
        step = 1e-4 * float(np.mean(hw))
        return _FDFlowDerivative(self, field, step)


class DiscreteFunction(TestFunction):
    """Finitely supported function on a discrete group (dict-backed)."""

    def __init__(self, group: DiscreteGroupModel, mapping: dict, dim=None):
        if not group.is_discrete:
            raise UsageError("DiscreteFunction needs a discrete group")
        mapping = {g: np.atleast_1d(np.asarray(v)) for g, v in mapping.items()}
        mapping = {g: v for g, v in mapping.items() if np.any(v != 0)}
        if dim is None:
            dim = next(iter(mapping.values())).shape[0] if mapping else 1
        super().__init__(group, 0, dim)
        self.mapping = mapping

    @property
    def support_set(self):
        return frozenset(self.mapping)

    def value(self, g):
        hit = self.mapping.get(g)
        if hit is None:
            return np.zeros(self.dim)
        return hit

    def values(self, elements):
        return np.stack([self.value(g) for g in elements])

    def _derive(self, field):
        raise CapabilityError("discrete functions have no smooth structure")


# ---------------------------------------------------------------------------
# Constructors and operations
# ---------------------------------------------------------------------------

def bump(group: LieGroupModel, radius: float, center=None, order=math.inf,
         amplitude: float = 1.0, dim: int = 1) -> SymbolicChartFunction:
    """Radial bump amplitude * exp(-1/(1 - |q - q_c|^2 / radius^2)).

    The support is the closed chart ball of the given radius around the
    center (a group element; default identity); the value at the center is
    amplitude * e^{-1}.  Centered bumps are even: h(phi^{-1}(q)) =
    h(phi^{-1}(-q)).
    """
    if group.is_discrete:
        raise UsageError("bump needs a Lie group")
    if radius <= 0:
        raise UsageError("bump radius must be positive")
    if center is None:
        center = group.identity
    c = group.to_chart(np.asarray(center, dtype=float))
    box = group.chart.box
    if np.any(c - radius < box[:, 0]) or np.any(c + radius > box[:, 1]):
        raise DomainError("bump ball does not fit inside the chart box")
    syms = group.chart_syms
    s = sp.Add(*[(sym - sp.Float(float(ck), 17)) ** 2
                 for sym, ck in zip(syms, c)]) / sp.Float(radius, 17) ** 2
    expr = sp.Float(amplitude, 17) * sp.exp(-1 / (1 - s))
    exprs = [expr] * dim if dim > 1 else [expr]
    return SymbolicChartFunction(group, exprs, ("ball", c, float(radius)), order)


def from_chart_expr(group, exprs, box, order=math.inf) -> SymbolicChartFunction:
    """Function from sympy chart expressions truncated to a chart box."""
    return SymbolicChartFunction(group, exprs, ("box", box_array(box)), order)


def translate(gamma: TestFunction, g, side: str) -> TestFunction:
    """tau^L_g or tau^R_g; identity translations return gamma itself."""
    if side not in ("left", "right"):
        raise UsageError("side must be left or right")
    if gamma.group.is_discrete:
        mapping = {}
        gm = gamma.group
        for x, v in gamma.mapping.items():
            # tau^L_g f (x) = f(gx): support moves to g^{-1} supp
            if side == "left":
                mapping[gm.multiply(gm.inverse(g), x)] = v
            else:
                mapping[gm.multiply(x, gm.inverse(g))] = v
        return DiscreteFunction(gm, mapping, gamma.dim)
    g = np.asarray(g, dtype=float)
    if gamma.group.elements_close(g, gamma.group.identity):
        return gamma
    cls = LeftTranslateFunction if side == "left" else RightTranslateFunction
    return cls(gamma, g)


def star(gamma: TestFunction) -> TestFunction:
    """gamma^*(x) = Delta(x^{-1}) gamma(x^{-1})."""
    if gamma.group.is_discrete:
        gm = gamma.group
        return DiscreteFunction(
            gm, {gm.inverse(x): v for x, v in gamma.mapping.items()}, gamma.dim)
    return StarFunction(gamma)


def invariant_derivative(gamma: TestFunction, field: VectorFieldSpec, g):
    """(X.gamma)(g) for an invariant field X, exact when gamma permits."""
    return gamma.derive(field).value(np.asarray(g, dtype=float))


def iterated_derivative(gamma: TestFunction, fields) -> TestFunction:
    """X_j ... X_1 . gamma for a list [X_1, ..., X_j]; [] returns gamma."""
    fields = list(fields)
    if gamma.order != math.inf and len(fields) > gamma.order:
        raise CapabilityError(
            f"requested {len(fields)} derivatives of an order-{gamma.order} function")
    out = gamma
    for field in fields:
        out = out.derive(field)
    return out


# ---------------------------------------------------------------------------
# Flow utilities (shared with identity checks)
# ---------------------------------------------------------------------------

def flow_points(group, field: VectorFieldSpec, pts, t: float):
    """Points moved time t along the field's flow: x exp(tv) (left-invariant
    fields flow by right multiplication) or exp(tv) x (right-invariant)."""
    pts = np.asarray(pts, dtype=float)
    step = group.exp_tangent(t * field.v)
    step = np.broadcast_to(step, pts.shape)
    if field.side == "left":
        return group.multiply(pts, step)
    return group.multiply(step, pts)


def fd_flow_derivative(value_fn, group, field, pts, step):
    """Richardson central difference of value_fn along the field flow.

    ``value_fn`` maps group points (N, m) -> array; this is the independent
    numerical side of derivative identity checks.
    """
    def probe(t):
        return np.asarray(value_fn(flow_points(group, field, pts, t)))

    d1 = (probe(step) - probe(-step)) / (2 * step)
    d2 = (probe(step / 2) - probe(-step / 2)) / step
    return (4.0 * d2 - d1) / 3.0
