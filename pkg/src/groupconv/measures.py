"""Compactly supported complex measures: finite atomic part plus an
optional density against Haar measure, with convolution mu * nu = m_*(mu x nu).

The representable subclass (atoms + continuous density) is closed under
the operations used here: atomic x atomic convolution expands into point
masses at pairwise products, densities convolve through the convolution
engine, and mixed products become weighted translates of the density.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_CONFIG, NumericsConfig
from .errors import CapabilityError, UsageError
from .functions import (DiscreteFunction, ScaledFunction, SumFunction,
                        TestFunction, translate)
from .quadrature import integrate, make_rule
from .seminorms import SeminormSpec, seminorm
from .vecnorms import ABS

__all__ = ["FiniteMeasure", "conv_measures", "total_variation",
           "embed_density", "fuvsm_check", "FuvsmReport"]

_MERGE_TOL = 1e-9


class FiniteMeasure:
    """Atomic part: list of (element, complex weight); optional density part.

    Atom points are pairwise distinct: Lie-group points closer than 1e-9 in
    chart coordinates merge by adding weights, discrete points merge on
    equality.  Densities are scalar (dim 1) or complex-as-R^2 (dim 2)
    test functions against lambda_G.
    """

    def __init__(self, group, atoms=(), density: TestFunction | None = None):
        self.group = group
        if density is not None:
            if density.group is not group:
                raise UsageError("density lives on a different group")
            if density.dim not in (1, 2):
                raise UsageError("density must be scalar or complex (dim 2)")
        self.density = density
        self.atoms = self._merge(list(atoms))

    def _merge(self, atoms):
        merged = []
        for point, weight in atoms:
            if weight == 0:
                continue
            hit = None
            for idx, (p, _) in enumerate(merged):
                if self.group.is_discrete:
                    same = p == point
                else:
                    same = bool(np.max(np.abs(np.asarray(p, float)
                                              - np.asarray(point, float)))
                                <= _MERGE_TOL)
                if same:
                    hit = idx
                    break
            if hit is None:
                merged.append([point, weight])
            else:
                merged[hit][1] = merged[hit][1] + weight
        return [(p, w) for p, w in merged if w != 0]

    @property
    def is_atomic(self) -> bool:
        return self.density is None

    @property
    def is_zero(self) -> bool:
        return not self.atoms and self.density is None

    def scale(self, c) -> "FiniteMeasure":
        dens = None
        if self.density is not None:
            dens = ScaledFunction(c, self.density)
        return FiniteMeasure(self.group, [(p, c * w) for p, w in self.atoms], dens)

    def to_json(self) -> dict:
        atoms = []
        for p, w in self.atoms:
            point = (self.group.encode(p) if self.group.is_discrete
                     else np.asarray(p, float).tolist())
            atoms.append({"point": point,
                          "re": float(np.real(w)), "im": float(np.imag(w))})
        return {"atoms": atoms,
                "density": None if self.density is None else "attached"}

    def __repr__(self):
        d = "+density" if self.density is not None else ""
        return f"FiniteMeasure({self.group.name}, {len(self.atoms)} atoms{d})"


def _density_values_complex(density, pts):
    vals = density.values(pts)
    if vals.shape[-1] == 1:
        return vals[..., 0].astype(complex)
    return vals[..., 0] + 1j * vals[..., 1]


def total_variation(mu: FiniteMeasure, cfg: NumericsConfig = DEFAULT_CONFIG) -> float:
    """||mu|| = sum |weights| + int |density| dlambda (mutually singular parts)."""
    tv = sum(abs(w) for _, w in mu.atoms)
    if mu.density is not None:
        dens = mu.density
        if mu.group.is_discrete:
            tv += sum(_abs_discrete(dens, g) for g in dens.support_set)
        else:
            n = cfg.quad_n(mu.group.dimension)
            rule = make_rule(mu.group, dens.support_param, n, cfg.scheme)
            vals = np.abs(_density_values_complex(dens, rule.points))
            tv += float(np.sum(rule.weights * vals))
    return float(tv)


def _abs_discrete(density, g):
    v = density.value(g)
    if v.shape[0] == 1:
        return abs(complex(v[0]))
    return abs(complex(v[0], v[1]))


def embed_density(gamma: TestFunction) -> FiniteMeasure:
    """Lift a test function to the measure gamma (.) lambda_G (no atoms)."""
    if gamma.dim not in (1, 2):
        raise UsageError("embed_density needs a scalar or complex function")
    return FiniteMeasure(gamma.group, [], gamma)


def _translate_density(group, point, weight, density, side):
    """delta_point * (density (.) lambda) or the right-sided counterpart."""
    if side == "left":
        # (delta_x * gamma lambda) has density z -> gamma(x^{-1} z)
        moved = translate(density, group.inverse(point), "left")
        return _scale_fn(moved, weight)
    # (gamma lambda * delta_x): density z -> Delta(x^{-1}) gamma(z x^{-1})
    xinv = group.inverse(point)
    moved = translate(density, xinv, "right")
    factor = weight * (1.0 if group.is_discrete
                       else float(group.modular(np.asarray(xinv, float))))
    return _scale_fn(moved, factor)


class _ComplexScale(TestFunction):
    """(re c * f, im c * f) as a dim-2 function; lifts real densities under
    complex atom weights."""

    def __init__(self, c: complex, base: TestFunction):
        super().__init__(base.group, base.order, 2)
        self.c = complex(c)
        self.base = base

    @property
    def support_param(self):
        return self.base.support_param

    def values(self, pts):
        v = self.base.values(pts)[..., 0]
        return np.stack([self.c.real * v, self.c.imag * v], axis=-1)

    def _derive(self, field):
        return _ComplexScale(self.c, self.base.derive(field))


def _scale_fn(fn, c):
    c = complex(c)
    if isinstance(fn, DiscreteFunction):
        if c.imag != 0:
            if fn.dim == 1:
                return DiscreteFunction(
                    fn.group,
                    {g: np.array([c.real * v[0], c.imag * v[0]])
                     for g, v in fn.mapping.items()}, 2)
            raise CapabilityError("complex weights on complex densities")
        return DiscreteFunction(fn.group,
                                {g: c.real * v for g, v in fn.mapping.items()},
                                fn.dim)
    if c.imag != 0:
        if fn.dim != 1:
            raise CapabilityError("complex weights on complex densities")
        return _ComplexScale(c, fn)
    return ScaledFunction(c.real, fn)


def _sum_densities(parts):
    parts = [p for p in parts if p is not None]
    if not parts:
        return None
    if len(parts) == 1:
        return parts[0]
    if parts[0].group.is_discrete:
        out = parts[0]
        for p in parts[1:]:
            mapping = dict(out.mapping)
            for g, v in p.mapping.items():
                mapping[g] = mapping.get(g, 0) + v
            out = DiscreteFunction(out.group, mapping, out.dim)
        return out
    return SumFunction(parts)


def conv_measures(mu: FiniteMeasure, nu: FiniteMeasure,
                  cfg: NumericsConfig = DEFAULT_CONFIG) -> FiniteMeasure:
    """mu * nu = m_*(mu x nu) on the atoms+density subclass.

    atomic x atomic: sum over pairs of weighted point masses at products;
    density x density: delegates to the convolution engine;
    atomic x density (either order): weighted translates of the density.
    """
    if mu.group is not nu.group:
        raise UsageError("measures must share a group model")
    group = mu.group
    atoms = []
    for p, w in mu.atoms:
        for q, v in nu.atoms:
            atoms.append((group.multiply(p, q), w * v))

    densities = []
    if mu.density is not None and nu.density is not None:
        from .convolution import convolve, scalar_multiplication
        if mu.density.dim != 1 or nu.density.dim != 1:
            raise CapabilityError("density x density needs scalar densities")
        densities.append(convolve(scalar_multiplication(),
                                  mu.density, nu.density, cfg))
    if nu.density is not None:
        for p, w in mu.atoms:
            densities.append(_translate_density(group, p, w, nu.density, "left"))
    if mu.density is not None:
        for q, v in nu.atoms:
            densities.append(_translate_density(group, q, v, mu.density, "right"))

    return FiniteMeasure(group, atoms, _sum_densities(densities))


@dataclass
class FuvsmReport:
    group: str
    max_deviation: float
    tolerance: float
    passed: bool


def fuvsm_check(gamma: TestFunction, eta: TestFunction,
                cfg: NumericsConfig = DEFAULT_CONFIG,
                tol: float = 1e-6) -> FuvsmReport:
    """Function/measure compatibility:
    (gamma . lambda) * (eta . lambda) = (gamma * eta) . lambda.

    Compares the density produced by measure convolution against the
    convolution engine on the standard grid (exactly, on discrete groups).
    """
    if gamma.dim != 1 or eta.dim != 1:
        raise UsageError("fuvsm_check needs scalar functions")
    from .convolution import convolve, scalar_multiplication
    group = gamma.group
    measure_side = conv_measures(embed_density(gamma), embed_density(eta), cfg)
    if measure_side.atoms:
        raise AssertionError("density convolution produced atoms")
    engine_side = convolve(scalar_multiplication(), gamma, eta, cfg)
    dens = measure_side.density
    if group.is_discrete:
        pts = set(dens.support_set) | set(engine_side.support_set)
        dev = max((float(np.max(np.abs(dens.value(g) - engine_side.value(g))))
                   for g in pts), default=0.0)
        scale = max((float(np.max(np.abs(engine_side.value(g)))) for g in pts),
                    default=0.0)
    else:
        from .support import sample_box
        box = engine_side.support_box()
        pts = group.from_chart(sample_box(box, cfg.conv_grid_n(group.dimension)))
        a = dens.values(pts)
        b = engine_side.values(pts)
        dev = float(np.max(np.abs(a - b)))
        scale = float(np.max(np.abs(b)))
    rel = 0.0 if scale == 0 else dev / scale
    return FuvsmReport(group.name, rel, tol, rel <= tol)
