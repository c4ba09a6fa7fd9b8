"""Haar-measure quadrature on the catalog groups.

Lie groups: tensor Gauss-Legendre (or midpoint) rules over chart boxes,
with the Haar density folded into the weights.  Warped supports (translates)
integrate by pulling back to their base box with the full transport factor
rho(phi(y(p))) |det D(phi o y)(p)|; see support.SupportParam.haar_weights.
Discrete groups: counting measure, exact sums.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .config import DEFAULT_CONFIG, NumericsConfig
from .errors import DomainError, UsageError
from .functions import DiscreteFunction, TestFunction
from .support import SupportParam, box_array, box_volume
from .vecnorms import ABS

__all__ = ["QuadratureRule", "make_rule", "integrate", "haar_volume",
           "inversion_pushforward_residual"]


@lru_cache(maxsize=64)
def _leggauss(n: int):
    return np.polynomial.legendre.leggauss(n)


def _axis_nodes(lo: float, hi: float, n: int, scheme: str):
    if scheme == "gauss-legendre":
        t, w = _leggauss(n)
        mid, half = (hi + lo) / 2.0, (hi - lo) / 2.0
        return mid + half * t, half * w
    if scheme == "midpoint":
        edges = np.linspace(lo, hi, n + 1)
        return (edges[:-1] + edges[1:]) / 2.0, np.full(n, (hi - lo) / n)
    raise UsageError(f"unknown quadrature scheme {scheme!r}")


@dataclass(frozen=True)
class QuadratureRule:
    """Precomputed nodes and Haar-weighted weights over a support region."""
    group: object
    scheme: str
    points_per_axis: int
    param: SupportParam
    nodes_param: np.ndarray     # (N, m) parameter-space nodes
    points: np.ndarray          # (N, m) group elements
    weights: np.ndarray         # (N,) Lebesgue weights x Haar transport

    def __post_init__(self):
        if np.any(self.weights <= 0):
            raise DomainError("quadrature weights must be strictly positive")


def make_rule(group, support, points_per_axis: int,
              scheme: str = "gauss-legendre") -> QuadratureRule:
    """Build a rule over a chart box or a SupportParam."""
    if isinstance(support, SupportParam):
        param = support
    else:
        param = SupportParam(box_array(support), None)
    box = box_array(param.base_box)
    if not group.chart.contains(box.T):
        raise DomainError(f"{group.name}: support box escapes the chart domain")
    axes, wts = [], []
    for lo, hi in box:
        x, w = _axis_nodes(float(lo), float(hi), points_per_axis, scheme)
        axes.append(x)
        wts.append(w)
    mesh = np.meshgrid(*axes, indexing="ij")
    nodes = np.stack([a.ravel() for a in mesh], axis=-1)
    wmesh = np.meshgrid(*wts, indexing="ij")
    weights = np.prod(np.stack([a.ravel() for a in wmesh], axis=-1), axis=-1)
    weights = weights * param.haar_weights(group, nodes)
    return QuadratureRule(group, scheme, points_per_axis, param,
                          nodes, param.group_points(group, nodes), weights)


def _resolve_support(f, support):
    if support is not None:
        return support
    if isinstance(f, TestFunction):
        return f.support_param
    raise UsageError("integrate needs an explicit support for raw callables")


def integrate(f, support=None, cfg: NumericsConfig = DEFAULT_CONFIG,
              points_per_axis: int | None = None,
              low: bool = False) -> np.ndarray:
    """Integral of f against Haar measure over its (compact) support.

    f may be a TestFunction or a vectorized callable on group points; raw
    callables need an explicit support (box / SupportParam for Lie groups,
    finite element iterable for discrete groups).  Returns a vector of the
    target dimension (shape (dim,)), or a scalar array for 1-d targets.
    """
    group = f.group if isinstance(f, TestFunction) else None
    if group is not None and group.is_discrete:
        elements = support if support is not None else f.support_set
        total = np.zeros(f.dim)
        for g in elements:
            total = total + f.value(g)
        return total
    if group is None and support is None:
        raise UsageError("integrate needs a TestFunction or explicit support")
    if group is None:
        raise UsageError("raw-callable integration requires integrate_callable")
    supp = _resolve_support(f, support)
    n = points_per_axis or cfg.quad_n(group.dimension, low=low)
    rule = make_rule(group, supp, n, cfg.scheme)
    vals = f.values(rule.points)
    return np.einsum("n,nd->d", rule.weights, vals)


def integrate_callable(group, fn, support, cfg: NumericsConfig = DEFAULT_CONFIG,
                       points_per_axis: int | None = None) -> np.ndarray:
    """Integrate a vectorized callable on group points over a box/param."""
    if group.is_discrete:
        return np.sum([np.atleast_1d(fn(g)) for g in support], axis=0)
    n = points_per_axis or cfg.quad_n(group.dimension)
    rule = make_rule(group, support, n, cfg.scheme)
    vals = np.asarray(fn(rule.points), dtype=float)
    if vals.ndim == 1:
        vals = vals[:, None]
    return np.einsum("n,nd->d", rule.weights, vals)


def haar_volume(group, support, cfg: NumericsConfig = DEFAULT_CONFIG,
                points_per_axis: int | None = None) -> float:
    """lambda_G of a chart box (Lie) or cardinality of a finite set (discrete)."""
    if group.is_discrete:
        return float(len(list(support)))
    n = points_per_axis or cfg.quad_n(group.dimension)
    rule = make_rule(group, support, n, cfg.scheme)
    return float(np.sum(rule.weights))


def inversion_pushforward_residual(f: TestFunction,
                                   cfg: NumericsConfig = DEFAULT_CONFIG,
                                   points_per_axis: int | None = None) -> float:
    """|int f(y^{-1}) Delta(y^{-1}) dlambda(y) - int f dlambda| normalized.

    Realizes the image-measure identity of the inversion map; the residual
    is divided by max(1, int |f|).  Discrete groups are exactly symmetric
    under inversion, so the residual vanishes identically there.
    """
    group = f.group
    if group.is_discrete:
        direct = integrate(f, cfg=cfg)
        inv_support = [group.inverse(g) for g in f.support_set]
        flipped = np.sum([np.atleast_1d(f.value(group.inverse(y)))
                          for y in inv_support], axis=0)
        denom = max(1.0, float(np.sum([np.abs(f.value(g)).max()
                                       for g in f.support_set])))
        return float(np.abs(flipped - direct).max() / denom)
    n = points_per_axis or cfg.quad_n(group.dimension)
    direct = integrate(f, cfg=cfg, points_per_axis=n)
    inv_param = f.support_param.compose_inverse(group)
    if not group.chart.contains(box_array(inv_param.base_box).T):
        raise DomainError("inverted support escapes the chart domain")
    rule = make_rule(group, inv_param, n, cfg.scheme)
    y_inv = group.inverse(rule.points)
    vals = f.values(y_inv) * group.modular(y_inv)[..., None]
    flipped = np.einsum("n,nd->d", rule.weights, vals)
    rule_f = make_rule(group, f.support_param, n, cfg.scheme)
    abs_mass = float(np.sum(rule_f.weights
                            * np.abs(f.values(rule_f.points)).max(axis=-1)))
    return float(np.abs(flipped - direct).max() / max(1.0, abs_mass))
