"""Exact convolution on countable discrete groups, direct-sum seminorms,
and the product-estimates machinery for bilinear maps.

Arithmetic here is plain Python over finite dicts: integer or Fraction
inputs convolve without rounding, which is what the exactness contracts
require.  The floating-point bound reports live beside them and share the
same kernels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from numbers import Number

import numpy as np

from .errors import UsageError
from .groups import DiscreteGroupModel
from .vecnorms import ABS, VectorSeminorm

__all__ = [
    "FinSuppSeq", "conv_discrete", "DirectSumSeminorm",
    "ProductEstimateCertificate", "product_estimate_witness",
    "verify_product_estimate", "continuity_bound_discrete",
]


class FinSuppSeq:
    """Finitely supported map group -> R^d; zero entries are never stored.

    Values are tuples of Python numbers so that integer and Fraction
    arithmetic stays exact through convolution.
    """

    def __init__(self, group: DiscreteGroupModel, mapping: dict, dim: int | None = None):
        if not group.is_discrete:
            raise UsageError("FinSuppSeq needs a discrete group")
        self.group = group
        clean = {}
        for g, v in mapping.items():
            vec = tuple(v) if isinstance(v, (tuple, list)) else (v,)
            if any(c != 0 for c in vec):
                clean[g] = vec
        self.mapping = clean
        if dim is None:
            dim = len(next(iter(clean.values()))) if clean else 1
        self.dim = dim
        for vec in clean.values():
            if len(vec) != dim:
                raise UsageError("inconsistent value dimensions")

    @property
    def support(self):
        return frozenset(self.mapping)

    def __getitem__(self, g):
        return self.mapping.get(g, (0,) * self.dim)

    def __eq__(self, other):
        return (isinstance(other, FinSuppSeq) and self.group is other.group
                and self.mapping == other.mapping)

    def __len__(self):
        return len(self.mapping)

    def __repr__(self):
        return f"FinSuppSeq({self.group.name}, {len(self.mapping)} pts)"

    def scale(self, c) -> "FinSuppSeq":
        return FinSuppSeq(self.group,
                          {g: tuple(c * x for x in v)
                           for g, v in self.mapping.items()}, self.dim)

    def add(self, other: "FinSuppSeq") -> "FinSuppSeq":
        if other.group is not self.group or other.dim != self.dim:
            raise UsageError("mismatched sequences")
        out = dict(self.mapping)
        for g, v in other.mapping.items():
            if g in out:
                out[g] = tuple(a + b for a, b in zip(out[g], v))
            else:
                out[g] = v
        return FinSuppSeq(self.group, out, self.dim)

    def to_json(self) -> list:
        enc = self.group.encode
        return [{"element": enc(g), "vector": list(v)}
                for g, v in sorted(self.mapping.items(), key=lambda kv: repr(kv[0]))]

    @classmethod
    def from_json(cls, group, data) -> "FinSuppSeq":
        return cls(group, {group.decode(item["element"]): tuple(item["vector"])
                           for item in data})


def _apply_bilinear_exact(tensor, x, y):
    """b(x, y) with Python arithmetic; exact for int/Fraction entries."""
    d1, d2, d = len(tensor), len(tensor[0]), len(tensor[0][0])
    out = []
    for k in range(d):
        acc = 0
        for i in range(d1):
            xi = x[i]
            if xi == 0:
                continue
            for j in range(d2):
                c = tensor[i][j][k]
                if c != 0 and y[j] != 0:
                    acc += c * xi * y[j]
        out.append(acc)
    return tuple(out)


def _tensor_as_lists(b):
    t = b.tensor
    d1, d2, d = t.shape
    out = []
    for i in range(d1):
        rows = []
        for j in range(d2):
            entries = []
            for k in range(d):
                c = t[i, j, k]
                ci = int(round(c))
                entries.append(ci if ci == c else float(c))
            rows.append(entries)
        out.append(rows)
    return out


def conv_discrete(b, gamma: FinSuppSeq, eta: FinSuppSeq) -> FinSuppSeq:
    """(gamma *_b eta)(x) = sum_y b(gamma(y), eta(y^{-1} x)), exact.

    Counting measure is the Haar measure of a discrete group, so this is
    the plain group-algebra product twisted by b.  The support of the
    result is contained in supp(gamma) supp(eta) exactly.
    """
    if gamma.group is not eta.group:
        raise UsageError("sequences must share a group model")
    if gamma.dim != b.d1 or eta.dim != b.d2:
        raise UsageError("dimension mismatch between b and operands")
    group = gamma.group
    tensor = _tensor_as_lists(b)
    acc = {}
    for y, gv in gamma.mapping.items():
        for z, ev in eta.mapping.items():
            x = group.multiply(y, z)
            contrib = _apply_bilinear_exact(tensor, gv, ev)
            if x in acc:
                acc[x] = tuple(a + c for a, c in zip(acc[x], contrib))
            else:
                acc[x] = contrib
    return FinSuppSeq(group, acc, b.dim)


@dataclass(frozen=True)
class DirectSumSeminorm:
    """Seminorm on a finite direct sum: sum or max of per-index seminorms.

    ``assignment`` maps an element to its seminorm; unmapped elements get
    ``default``.
    """
    mode: str = "sum"
    default: VectorSeminorm = field(default_factory=lambda: ABS)
    assignment: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in ("sum", "max"):
            raise UsageError("mode must be 'sum' or 'max'")

    def seminorm_at(self, g) -> VectorSeminorm:
        return self.assignment.get(g, self.default)

    def apply(self, seq: FinSuppSeq) -> float:
        terms = [self.seminorm_at(g).scalar(np.asarray(v, dtype=float))
                 for g, v in seq.mapping.items()]
        if not terms:
            return 0.0
        return float(sum(terms) if self.mode == "sum" else max(terms))


@dataclass(frozen=True)
class ProductEstimateCertificate:
    """Witness sequences a, c with a[i] * c[j] >= C[i][j] for all i, j <= N."""
    size: int
    required: np.ndarray
    a: np.ndarray
    c: np.ndarray

    def check(self) -> bool:
        return bool(np.all(self.a[:, None] * self.c[None, :]
                           >= self.required - 1e-12))


def product_estimate_witness(required) -> ProductEstimateCertificate:
    """Witness for a truncated product-estimate system.

    Given required constants C[i][j] >= 0, returns a[i] = c[i] =
    max(1, max_{k,l <= i} C[k][l]).  For i >= j this gives a[i] >= C[i][j]
    and c[j] >= 1, hence a[i] c[j] >= C[i][j]; the case i < j is symmetric.
    """
    C = np.asarray(required, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise UsageError("required constants must form a square matrix")
    if np.any(C < 0):
        raise UsageError("required constants must be non-negative")
    n = C.shape[0]
    a = np.empty(n)
    running = 1.0
    for i in range(n):
        running = max(running, float(np.max(C[: i + 1, : i + 1])))
        a[i] = running
    cert = ProductEstimateCertificate(n, C, a, a.copy())
    if not cert.check():
        raise AssertionError("witness construction violated its own invariant")
    return cert


@dataclass
class ProductEstimateReport:
    checked: int
    violations: list
    passed: bool


def verify_product_estimate(b, p_grid, q_grid, samples: int,
                            target=None, rng=None,
                            scale: float = 2.0) -> ProductEstimateReport:
    """Sample-check p_{i,j}(b(x, y)) <= p_i(x) q_j(y) for seminorm grids.

    ``target`` maps (i, j) to the target-space seminorm p_{i,j}; by default
    the certified q of b is used for every pair.  Violations are returned
    with witnesses.
    """
    rng = rng or np.random.default_rng(0)
    violations = []
    checked = 0
    for i, p_i in enumerate(p_grid):
        for j, q_j in enumerate(q_grid):
            p_ij = target(i, j) if target is not None else b.q
            xs = rng.uniform(-scale, scale, size=(samples, b.d1))
            ys = rng.uniform(-scale, scale, size=(samples, b.d2))
            lhs = p_ij.apply(b.apply(xs, ys))
            rhs = p_i.apply(xs) * q_j.apply(ys)
            checked += samples
            bad = lhs > rhs * (1 + 1e-12) + 1e-15
            for idx in np.nonzero(bad)[0]:
                violations.append({"i": i, "j": j,
                                   "x": xs[idx].tolist(), "y": ys[idx].tolist(),
                                   "lhs": float(lhs[idx]), "rhs": float(rhs[idx])})
    return ProductEstimateReport(checked, violations, not violations)


@dataclass
class DiscreteBoundReport:
    lhs: float
    rhs: float
    block_size: int
    passed: bool


def continuity_bound_discrete(b, gamma: FinSuppSeq, eta: FinSuppSeq,
                              block_gamma, block_eta,
                              p=ABS, q=ABS, target=ABS) -> DiscreteBoundReport:
    """Block bound behind discrete continuity: for gamma supported in K_i and
    eta in K_j,

        sup target((gamma *_b eta)(x)) <= |K_i| sup p(gamma) sup q(eta),

    counting measure giving lambda(K_i) = |K_i|.  Operands escaping their
    declared blocks are a usage error.
    """
    block_gamma = set(block_gamma)
    block_eta = set(block_eta)
    if not gamma.support <= block_gamma:
        raise UsageError("gamma escapes its declared block")
    if not eta.support <= block_eta:
        raise UsageError("eta escapes its declared block")
    conv = conv_discrete(b, gamma, eta)
    lhs = max((target.scalar(np.asarray(v, float))
               for v in conv.mapping.values()), default=0.0)
    sup_g = max((p.scalar(np.asarray(v, float))
                 for v in gamma.mapping.values()), default=0.0)
    sup_e = max((q.scalar(np.asarray(v, float))
                 for v in eta.mapping.values()), default=0.0)
    rhs = len(block_gamma) * sup_g * sup_e
    return DiscreteBoundReport(float(lhs), float(rhs), len(block_gamma),
                               lhs <= rhs * (1 + 1e-12))
