"""Concrete group models: R^n, the affine ax+b group, the Heisenberg group,
and discrete groups (Z, Z^2, S3, length-capped F2).

Lie groups expose a global logarithmic chart with phi(1)=0 and
phi(x^{-1}) = -phi(x) (exponential coordinates), vectorized group law and
inversion on arrays of shape (..., m), the Haar density of the chart
pushforward of lambda_G, and closed-form coefficient fields of the left-
and right-invariant frames in chart coordinates.  The latter exist both as
fast numpy callables (quadrature) and as sympy expressions (exact iterated
derivatives of test functions).

Haar normalization: the chart density satisfies rho(0) = 1, i.e.
lambda_G matches Lebesgue measure on the Lie algebra at the identity.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import sympy as sp

from .errors import DomainError, UsageError, WordCapError

__all__ = [
    "GroupModel", "LieGroupModel", "DiscreteGroupModel", "Chart",
    "Rn", "AffineGroup", "HeisenbergGroup",
    "IntegersZ", "LatticeZ2", "SymmetricS3", "FreeGroupF2",
    "get_group", "CATALOG_IDS",
]


@dataclass(frozen=True)
class Chart:
    """Logarithmic chart descriptor: box image Q in the Lie algebra, maps."""
    box: np.ndarray          # shape (m, 2): [lo, hi] per axis
    forward: callable        # group coords (..., m) -> chart coords (..., m)
    backward: callable       # chart coords (..., m) -> group coords (..., m)

    def contains(self, q, pad: float = 0.0) -> bool:
        q = np.asarray(q, dtype=float)
        lo = self.box[:, 0] - pad
        hi = self.box[:, 1] + pad
        return bool(np.all(q >= lo) and np.all(q <= hi))


class GroupModel(abc.ABC):
    """A concrete group with multiplication, inversion and Haar structure."""

    name: str
    dimension: int           # chart dimension m; 0 for discrete groups
    is_discrete: bool

    @abc.abstractmethod
    def multiply(self, g, h):
        ...

    @abc.abstractmethod
    def inverse(self, g):
        ...

    @property
    @abc.abstractmethod
    def identity(self):
        ...

    @abc.abstractmethod
    def modular(self, g):
        """Modular function Delta_G determined by lambda_G(Ex) = Delta_G(x) lambda_G(E)."""

    @abc.abstractmethod
    def elements_close(self, g, h) -> bool:
        ...

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


# ---------------------------------------------------------------------------
# Lie groups
# ---------------------------------------------------------------------------

class LieGroupModel(GroupModel):
    is_discrete = False

    #: sympy chart coordinate symbols, fixed per dimension
    @property
    def chart_syms(self):
        return _chart_syms(self.dimension)

    # -- chart ------------------------------------------------------------
    chart: Chart

    def to_chart(self, g):
        return self.chart.forward(np.asarray(g, dtype=float))

    def from_chart(self, q):
        return self.chart.backward(np.asarray(q, dtype=float))

    def exp_tangent(self, q):
        """One-parameter flows: exp(v) = phi^{-1}(v) in a logarithmic chart."""
        return self.from_chart(q)

    # -- frames and Haar density -------------------------------------------
    @abc.abstractmethod
    def left_frame(self, q):
        """Matrix (..., m, m) whose k-th column is the left-invariant field
        through basis vector e_k, expressed in chart coordinates at q.

        This equals the Jacobian at 0 of p -> phi(phi^{-1}(q) phi^{-1}(p)).
        """

    @abc.abstractmethod
    def right_frame(self, q):
        ...

    def haar_density(self, q, check: bool = True):
        """Density rho of the chart pushforward of lambda_G, rho(0) = 1."""
        q = np.asarray(q, dtype=float)
        if check and not self.chart.contains(q):
            raise DomainError(f"{self.name}: chart point outside box: {q!r}")
        det = np.linalg.det(self.left_frame(q))
        if np.any(np.abs(det) < 1e-300):
            raise ArithmeticError("singular translation Jacobian")
        return 1.0 / np.abs(det)

    # -- invariant field coefficients, symbolic -----------------------------
    @abc.abstractmethod
    def sym_field_coeffs(self, side: str, v) -> list:
        """Chart coefficients of the invariant field through v, as sympy
        expressions in ``chart_syms``.  ``side`` is "left" or "right"."""

    # -- group-level derivatives -------------------------------------------
    @abc.abstractmethod
    def adjoint(self, g) -> np.ndarray:
        """Matrix of Ad_g on the Lie algebra (chart tangent at 0)."""

    @abc.abstractmethod
    def modular_derivative(self, v) -> float:
        """d/dt Delta(exp(t v)) at t = 0."""

    # -- misc ---------------------------------------------------------------
    def elements_close(self, g, h) -> bool:
        return bool(np.allclose(np.asarray(g, float), np.asarray(h, float),
                                rtol=1e-12, atol=1e-12))

    def basis(self) -> np.ndarray:
        """Ordered Lie algebra basis: standard basis of chart coordinates."""
        return np.eye(self.dimension)


@lru_cache(maxsize=None)
def _chart_syms(m: int):
    return sp.symbols(f"q0:{m}", real=True)


class Rn(LieGroupModel):
    """Euclidean R^m under addition; the chart is the identity."""

    def __init__(self, m: int, box_half_width: float = 16.0):
        if m < 1:
            raise UsageError("Rn needs m >= 1")
        self.dimension = m
        self.name = f"Rn:{m}"
        box = np.array([[-box_half_width, box_half_width]] * m, dtype=float)
        self.chart = Chart(box, lambda g: np.asarray(g, float).copy(),
                           lambda q: np.asarray(q, float).copy())

    @property
    def identity(self):
        return np.zeros(self.dimension)

    def multiply(self, g, h):
        return np.asarray(g, float) + np.asarray(h, float)

    def inverse(self, g):
        return -np.asarray(g, float)

    def modular(self, g):
        g = np.asarray(g, float)
        return np.ones(g.shape[:-1])

    def left_frame(self, q):
        q = np.asarray(q, float)
        return np.broadcast_to(np.eye(self.dimension),
                               q.shape[:-1] + (self.dimension, self.dimension))

    right_frame = left_frame

    def sym_field_coeffs(self, side, v):
        return [sp.Float(float(vk), 17) for vk in np.asarray(v, float)]

    def adjoint(self, g):
        return np.eye(self.dimension)

    def modular_derivative(self, v):
        return 0.0


# -- affine helpers ---------------------------------------------------------

def _expm1_ratio(u):
    """(e^u - 1)/u, stable, = 1 at u = 0."""
    u = np.asarray(u, dtype=float)
    safe = np.where(u == 0.0, 1.0, u)
    return np.where(u == 0.0, 1.0, np.expm1(u) / safe)


def _phi_aff(u):
    """(B(u) - 1)/u with B(u) = u/(1 - e^{-u}); smooth, value 1/2 at 0."""
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < 1e-3
    us = np.where(small, 1.0, u)
    exact = (us / (-np.expm1(-us)) - 1.0) / us
    series = 0.5 + u / 12.0 - u ** 3 / 720.0
    return np.where(small, series, exact)


_AFF_SERIES_DEGREE = 40


@lru_cache(maxsize=None)
def _bminus(k: int):
    """Bernoulli numbers with B_1 = -1/2 (generating function u/(e^u - 1)),
    independent of the sympy convention for bernoulli(1)."""
    if k == 1:
        return sp.Rational(-1, 2)
    return sp.bernoulli(k)


@lru_cache(maxsize=None)
def _phi_aff_poly(sym):
    """Taylor polynomial of _phi_aff, i.e. of (u/(1-e^{-u}) - 1)/u; exact
    rational coefficients.  Valid to ~1e-17 on |u| <= 2.5 (nearest
    singularities of the generating function sit at 2 pi i)."""
    terms = []
    for k in range(1, _AFF_SERIES_DEGREE + 1):
        coeff = (-1) ** k * _bminus(k) / sp.factorial(k)
        if coeff != 0:
            terms.append(coeff * sym ** (k - 1))
    return sp.Add(*terms)


@lru_cache(maxsize=None)
def _psi_aff_poly(sym):
    """Taylor polynomial of (u/(e^u - 1) - 1)/u."""
    terms = []
    for k in range(1, _AFF_SERIES_DEGREE + 1):
        coeff = _bminus(k) / sp.factorial(k)
        if coeff != 0:
            terms.append(coeff * sym ** (k - 1))
    return sp.Add(*terms)


class AffineGroup(LieGroupModel):
    """The ax+b group: elements (a, b), a > 0, law (a,b)(a',b') = (aa', ab'+b).

    Left Haar measure is da db / a^2 up to scale; the group is not
    unimodular, Delta(a, b) = 1/a.  The chart is exponential coordinates
    (u, w) with phi^{-1}(u, w) = (e^u, w (e^u - 1)/u).
    """

    dimension = 2
    name = "affine"

    def __init__(self, box_half_width: float = 2.5):
        box = np.array([[-box_half_width, box_half_width]] * 2, dtype=float)
        self.chart = Chart(box, self._phi, self._phi_inv)

    @property
    def identity(self):
        return np.array([1.0, 0.0])

    def _validate(self, g):
        g = np.asarray(g, dtype=float)
        if np.any(g[..., 0] <= 0.0):
            raise DomainError("affine element needs a > 0")
        return g

    def multiply(self, g, h):
        g, h = np.asarray(g, float), np.asarray(h, float)
        return np.stack([g[..., 0] * h[..., 0],
                         g[..., 0] * h[..., 1] + g[..., 1]], axis=-1)

    def inverse(self, g):
        g = self._validate(g)
        return np.stack([1.0 / g[..., 0], -g[..., 1] / g[..., 0]], axis=-1)

    def modular(self, g):
        g = np.asarray(g, float)
        return 1.0 / g[..., 0]

    @staticmethod
    def _phi(g):
        g = np.asarray(g, float)
        u = np.log(g[..., 0])
        return np.stack([u, g[..., 1] / _expm1_ratio(u)], axis=-1)

    @staticmethod
    def _phi_inv(q):
        q = np.asarray(q, float)
        u = q[..., 0]
        return np.stack([np.exp(u), q[..., 1] * _expm1_ratio(u)], axis=-1)

    def left_frame(self, q):
        q = np.asarray(q, float)
        u, w = q[..., 0], q[..., 1]
        pa = _phi_aff(u)
        zero = np.zeros_like(u)
        one = np.ones_like(u)
        row0 = np.stack([one, zero], axis=-1)
        row1 = np.stack([-w * pa, 1.0 + u * pa], axis=-1)
        return np.stack([row0, row1], axis=-2)

    def right_frame(self, q):
        q = np.asarray(q, float)
        u, w = q[..., 0], q[..., 1]
        pa = -_phi_aff(-u)
        zero = np.zeros_like(u)
        one = np.ones_like(u)
        row0 = np.stack([one, zero], axis=-1)
        row1 = np.stack([-w * pa, 1.0 + u * pa], axis=-1)
        return np.stack([row0, row1], axis=-2)

    def sym_field_coeffs(self, side, v):
        v = np.asarray(v, float)
        u, w = self.chart_syms
        poly = _phi_aff_poly(u) if side == "left" else _psi_aff_poly(u)
        v0 = sp.Float(float(v[0]), 17)
        v1 = sp.Float(float(v[1]), 17)
        return [v0, v1 + poly * (u * v1 - w * v0)]

    def adjoint(self, g):
        g = self._validate(g)
        a, b = float(g[0]), float(g[1])
        return np.array([[1.0, 0.0], [-b, a]])

    def modular_derivative(self, v):
        # Delta(exp(t v)) = e^{-t v_0}
        return -float(np.asarray(v, float)[0])


class HeisenbergGroup(LieGroupModel):
    """3-dimensional Heisenberg group in upper-triangular matrix coordinates.

    (x, y, z) stands for the matrix [[1, x, z], [0, 1, y], [0, 0, 1]]:
    law (x,y,z)(x',y',z') = (x+x', y+y', z+z'+x y'), nilpotent and
    unimodular.  The chart phi(x,y,z) = (x, y, z - xy/2) is exponential.
    """

    dimension = 3
    name = "heisenberg"

    def __init__(self, box_half_width: float = 3.0):
        box = np.array([[-box_half_width, box_half_width]] * 3, dtype=float)
        self.chart = Chart(box, self._phi, self._phi_inv)

    @property
    def identity(self):
        return np.zeros(3)

    def multiply(self, g, h):
        g, h = np.asarray(g, float), np.asarray(h, float)
        return np.stack([g[..., 0] + h[..., 0],
                         g[..., 1] + h[..., 1],
                         g[..., 2] + h[..., 2] + g[..., 0] * h[..., 1]], axis=-1)

    def inverse(self, g):
        g = np.asarray(g, float)
        return np.stack([-g[..., 0], -g[..., 1],
                         g[..., 0] * g[..., 1] - g[..., 2]], axis=-1)

    def modular(self, g):
        g = np.asarray(g, float)
        return np.ones(g.shape[:-1])

    @staticmethod
    def _phi(g):
        g = np.asarray(g, float)
        return np.stack([g[..., 0], g[..., 1],
                         g[..., 2] - g[..., 0] * g[..., 1] / 2.0], axis=-1)

    @staticmethod
    def _phi_inv(q):
        q = np.asarray(q, float)
        return np.stack([q[..., 0], q[..., 1],
                         q[..., 2] + q[..., 0] * q[..., 1] / 2.0], axis=-1)

    def left_frame(self, q):
        q = np.asarray(q, float)
        q0, q1 = q[..., 0], q[..., 1]
        z = np.zeros_like(q0)
        o = np.ones_like(q0)
        return np.stack([np.stack([o, z, z], -1),
                         np.stack([z, o, z], -1),
                         np.stack([-q1 / 2, q0 / 2, o], -1)], axis=-2)

    def right_frame(self, q):
        q = np.asarray(q, float)
        q0, q1 = q[..., 0], q[..., 1]
        z = np.zeros_like(q0)
        o = np.ones_like(q0)
        return np.stack([np.stack([o, z, z], -1),
                         np.stack([z, o, z], -1),
                         np.stack([q1 / 2, -q0 / 2, o], -1)], axis=-2)

    def sym_field_coeffs(self, side, v):
        v = np.asarray(v, float)
        s0, s1, _ = self.chart_syms
        sign = 1 if side == "left" else -1
        v0 = sp.Float(float(v[0]), 17)
        v1 = sp.Float(float(v[1]), 17)
        v2 = sp.Float(float(v[2]), 17)
        return [v0, v1, v2 + sign * (s0 * v1 - s1 * v0) / 2]

    def adjoint(self, g):
        g = np.asarray(g, float)
        x, y = float(g[0]), float(g[1])
        return np.array([[1.0, 0.0, 0.0],
                         [0.0, 1.0, 0.0],
                         [-y, x, 1.0]])

    def modular_derivative(self, v):
        return 0.0


# ---------------------------------------------------------------------------
# Discrete groups
# ---------------------------------------------------------------------------

class DiscreteGroupModel(GroupModel):
    is_discrete = True
    dimension = 0

    def modular(self, g):
        return 1.0

    def elements_close(self, g, h) -> bool:
        return g == h

    def encode(self, g):
        """Canonical JSON-friendly encoding of an element."""
        return g

    def decode(self, data):
        return data


class IntegersZ(DiscreteGroupModel):
    name = "Z"

    @property
    def identity(self):
        return 0

    def multiply(self, g, h):
        return g + h

    def inverse(self, g):
        return -g


class LatticeZ2(DiscreteGroupModel):
    name = "Z2"

    @property
    def identity(self):
        return (0, 0)

    def multiply(self, g, h):
        return (g[0] + h[0], g[1] + h[1])

    def inverse(self, g):
        return (-g[0], -g[1])

    def encode(self, g):
        return list(g)

    def decode(self, data):
        return tuple(int(x) for x in data)


class SymmetricS3(DiscreteGroupModel):
    """S3 as permutation tuples (sigma(0), sigma(1), sigma(2)); composition
    (sigma tau)(i) = sigma(tau(i))."""

    name = "S3"

    @property
    def identity(self):
        return (0, 1, 2)

    def multiply(self, g, h):
        return tuple(g[h[i]] for i in range(3))

    def inverse(self, g):
        inv = [0, 0, 0]
        for i, gi in enumerate(g):
            inv[gi] = i
        return tuple(inv)

    def elements(self):
        import itertools
        return [p for p in itertools.permutations(range(3))]

    def encode(self, g):
        return list(g)

    def decode(self, data):
        return tuple(int(x) for x in data)


_F2_INVERSE = {"a": "A", "A": "a", "b": "B", "B": "b"}


class FreeGroupF2(DiscreteGroupModel):
    """Free group on {a, b} with reduced words capped at a fixed length.

    Products whose reduced length exceeds the cap raise WordCapError
    rather than truncating: exactness is part of the contract.
    """

    def __init__(self, cap: int):
        if cap < 1:
            raise UsageError("F2 cap must be >= 1")
        self.cap = cap
        self.name = f"F2:len{cap}"

    @property
    def identity(self):
        return ""

    def validate(self, w: str):
        if len(w) > self.cap:
            raise WordCapError(f"word {w!r} exceeds cap {self.cap}")
        for i, ch in enumerate(w):
            if ch not in _F2_INVERSE:
                raise UsageError(f"bad letter {ch!r} in word {w!r}")
            if i > 0 and _F2_INVERSE[ch] == w[i - 1]:
                raise UsageError(f"word {w!r} is not reduced")
        return w

    def multiply(self, g, h):
        out = list(g)
        for ch in h:
            if out and out[-1] == _F2_INVERSE[ch]:
                out.pop()
            else:
                out.append(ch)
        w = "".join(out)
        if len(w) > self.cap:
            raise WordCapError(
                f"product {g!r}*{h!r} has reduced length {len(w)} > cap {self.cap}")
        return w

    def inverse(self, g):
        return "".join(_F2_INVERSE[ch] for ch in reversed(g))


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------

CATALOG_IDS = ("Rn:<m>", "affine", "heisenberg", "Z", "Z2", "S3", "F2:len<cap>")


@lru_cache(maxsize=None)
def get_group(group_id: str) -> GroupModel:
    """Resolve a catalog identifier like "Rn:2", "affine", "F2:len4"."""
    gid = group_id.strip()
    if gid.startswith("Rn:"):
        try:
            m = int(gid.split(":", 1)[1])
        except ValueError:
            raise UsageError(f"bad Rn id: {group_id!r}") from None
        return Rn(m)
    if gid == "affine":
        return AffineGroup()
    if gid == "heisenberg":
        return HeisenbergGroup()
    if gid == "Z":
        return IntegersZ()
    if gid == "Z2":
        return LatticeZ2()
    if gid == "S3":
        return SymmetricS3()
    if gid.startswith("F2:len"):
        try:
            cap = int(gid[len("F2:len"):])
        except ValueError:
            raise UsageError(f"bad F2 id: {group_id!r}") from None
        return FreeGroupF2(cap)
    raise UsageError(f"unknown group id: {group_id!r}")
