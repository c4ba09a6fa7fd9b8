"""Support geometry: chart-coordinate boxes, sampled hulls of mapped sets,
and warped support parametrizations for translated functions.

A SupportParam describes how to integrate over the support of a function:
a base box in chart coordinates together with a map p -> group element.
For plain functions the map is just phi^{-1}; translates compose the group
action in front.  The Haar weight of a warped parametrization is computed
as rho(phi(y(p))) |det D(phi o y)(p)| via finite-difference Jacobians, so
quadrature never assumes the invariance identities it is used to test.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError


def box_array(box) -> np.ndarray:
    b = np.asarray(box, dtype=float)
    if b.ndim != 2 or b.shape[1] != 2:
        raise ValueError("box must have shape (m, 2)")
    return b


def box_center_halfwidth(box):
    b = box_array(box)
    return (b[:, 0] + b[:, 1]) / 2.0, (b[:, 1] - b[:, 0]) / 2.0


def box_widen(box, rel_margin: float) -> np.ndarray:
    c, hw = box_center_halfwidth(box)
    hw = hw * (1.0 + rel_margin)
    return np.stack([c - hw, c + hw], axis=-1)


def box_hull(*boxes) -> np.ndarray:
    bs = [box_array(b) for b in boxes]
    lo = np.min([b[:, 0] for b in bs], axis=0)
    hi = np.max([b[:, 1] for b in bs], axis=0)
    return np.stack([lo, hi], axis=-1)


def box_intersect(box_a, box_b):
    """Intersection box, or None if empty."""
    a, b = box_array(box_a), box_array(box_b)
    lo = np.maximum(a[:, 0], b[:, 0])
    hi = np.minimum(a[:, 1], b[:, 1])
    if np.any(hi <= lo):
        return None
    return np.stack([lo, hi], axis=-1)


def box_contains_point(box, q, pad: float = 0.0) -> bool:
    b = box_array(box)
    q = np.asarray(q, dtype=float)
    return bool(np.all(q >= b[:, 0] - pad) and np.all(q <= b[:, 1] + pad))


def box_negate(box) -> np.ndarray:
    b = box_array(box)
    return np.stack([-b[:, 1], -b[:, 0]], axis=-1)


def box_volume(box) -> float:
    b = box_array(box)
    return float(np.prod(b[:, 1] - b[:, 0]))


def sample_box(box, per_axis: int) -> np.ndarray:
    """Regular grid of shape (per_axis^m, m) over a box (includes corners)."""
    b = box_array(box)
    axes = [np.linspace(lo, hi, per_axis) for lo, hi in b]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([a.ravel() for a in mesh], axis=-1)


def mapped_hull(map_fn, box, per_axis: int = 7, pad: float = 0.05) -> np.ndarray:
    """Conservative axis-aligned bounding box of map_fn(box).

    map_fn must be vectorized over (N, m) arrays of chart points.  The true
    image may be curved, so the sampled bounding box is widened by ``pad``.
    """
    pts = sample_box(box, per_axis)
    img = np.asarray(map_fn(pts), dtype=float)
    lo, hi = img.min(axis=0), img.max(axis=0)
    c, hw = (lo + hi) / 2.0, (hi - lo) / 2.0
    hw = hw * (1.0 + pad) + 1e-12
    return np.stack([c - hw, c + hw], axis=-1)


@dataclass(frozen=True)
class SupportParam:
    """Parametrization of a compact support region of a Lie-group function.

    ``base_box``: chart box of parameters p.
    ``to_group``: p (..., m) -> group elements (..., m); None means phi^{-1}.
    ``from_chart``: inverse of the parametrization on chart coordinates,
    q = phi(y) -> p; used to clip warped rules to a target region.
    """
    base_box: np.ndarray
    to_group: callable = None
    from_chart: callable = None

    @property
    def trivial(self) -> bool:
        return self.to_group is None

    def group_points(self, group, p):
        if self.to_group is None:
            return group.from_chart(p)
        return self.to_group(p)

    def chart_image(self, group, p):
        """phi(y(p)) for the warped case; p itself for the trivial case."""
        if self.to_group is None:
            return np.asarray(p, dtype=float)
        return group.to_chart(self.to_group(p))

    def image_box(self, group, per_axis: int = 7, pad: float = 0.05) -> np.ndarray:
        """Bounding box (in chart coordinates) of the parametrized support."""
        if self.to_group is None:
            return box_array(self.base_box)
        return mapped_hull(lambda p: group.to_chart(self.to_group(p)),
                           self.base_box, per_axis, pad)

    def haar_weights(self, group, p, fd_step: float = 1e-5):
        """Haar density of the parametrization: rho(phi(y)) |det D(phi o y)|.

        Trivial parametrizations return rho(p) directly.  Warped ones use a
        Richardson-extrapolated central-difference Jacobian; the resulting
        weight carries the full transport factor so that no invariance
        property of the Haar measure is silently assumed.
        """
        p = np.asarray(p, dtype=float)
        if self.to_group is None:
            return group.haar_density(p, check=False)
        chart_map = lambda pts: group.to_chart(self.to_group(pts))
        img = chart_map(p)
        rho = group.haar_density(img, check=False)
        m = p.shape[-1]
        cols = []
        for k in range(m):
            e = np.zeros(m)
            e[k] = fd_step
            c1 = (chart_map(p + e) - chart_map(p - e)) / (2 * fd_step)
            c2 = (chart_map(p + e / 2) - chart_map(p - e / 2)) / fd_step
            cols.append((4.0 * c2 - c1) / 3.0)
        jac = np.stack(cols, axis=-1)
        det = np.abs(np.linalg.det(jac))
        if np.any(det < 1e-300):
            raise DomainError("degenerate support parametrization")
        return rho * det

    def compose_left(self, group, g) -> "SupportParam":
        """Parametrization of {g . y : y in support}."""
        g = np.asarray(g, dtype=float)
        ginv = group.inverse(g)
        inner = self.to_group
        inner_from = self.from_chart or (lambda q: np.asarray(q, float))
        if inner is None:
            fn = lambda p: group.multiply(np.broadcast_to(g, np.shape(p)),
                                          group.from_chart(p))
        else:
            fn = lambda p: group.multiply(np.broadcast_to(g, np.shape(p)), inner(p))
        back = lambda q: inner_from(group.to_chart(
            group.multiply(np.broadcast_to(ginv, np.shape(q)),
                           group.from_chart(q))))
        return SupportParam(box_array(self.base_box), fn, back)

    def compose_right(self, group, g) -> "SupportParam":
        """Parametrization of {y . g : y in support}."""
        g = np.asarray(g, dtype=float)
        ginv = group.inverse(g)
        inner = self.to_group
        inner_from = self.from_chart or (lambda q: np.asarray(q, float))
        if inner is None:
            fn = lambda p: group.multiply(group.from_chart(p),
                                          np.broadcast_to(g, np.shape(p)))
        else:
            fn = lambda p: group.multiply(inner(p), np.broadcast_to(g, np.shape(p)))
        back = lambda q: inner_from(group.to_chart(
            group.multiply(group.from_chart(q),
                           np.broadcast_to(ginv, np.shape(q)))))
        return SupportParam(box_array(self.base_box), fn, back)

    def compose_inverse(self, group) -> "SupportParam":
        """Parametrization of {y^{-1} : y in support}."""
        inner = self.to_group
        if inner is None:
            # inverse of a chart box is the negated box, exactly
            return SupportParam(box_negate(self.base_box), None)
        inner_from = self.from_chart or (lambda q: np.asarray(q, float))
        back = lambda q: inner_from(group.to_chart(
            group.inverse(group.from_chart(q))))
        return SupportParam(box_array(self.base_box),
                            lambda p: group.inverse(inner(p)), back)

    def clipped(self, group, region_box, per_axis: int = 3, pad: float = 0.07):
        """Restrict the parametrization to (a conservative superset of) the
        part of the support lying in a chart region; None if disjoint."""
        if self.to_group is None:
            inter = box_intersect(self.base_box, region_box)
            if inter is None:
                return None
            return SupportParam(inter, None)
        pre = mapped_hull(self.from_chart, region_box, per_axis, pad)
        inter = box_intersect(self.base_box, pre)
        if inter is None:
            return None
        return SupportParam(inter, self.to_group, self.from_chart)
