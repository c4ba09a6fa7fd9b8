"""The seminorm families on spaces of compactly supported functions.

Families (p is a named seminorm on the target space):

    L,  k:      max over words X_j ... X_1 of left-invariant basis fields,
                j <= k, of sup p(X_j ... X_1 . f)
    R,  k:      same with right-invariant fields
    LR, k, l:   sup p(X_i ... X_1 . Y_j ... Y_1 . f), X left (i <= k),
                Y right (j <= l)
    RL, k, l:   X right (i <= k), Y left (j <= l)
    L_local, l: L-family sup restricted to a compact window K
    L1:         int p(f) dlambda_G

Suprema are evaluated as maxima over grids covering the declared support
(plus a margin); the L1 family integrates by Haar quadrature.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_CONFIG, NumericsConfig
from .errors import CapabilityError, UsageError
from .functions import TestFunction, VectorFieldSpec, iterated_derivative
from .support import box_array, box_widen, sample_box
from .vecnorms import ABS, VectorSeminorm, parse_vector_seminorm

__all__ = ["SeminormSpec", "seminorm", "parse_seminorm_spec",
           "grid_sup", "field_words"]

_FAMILIES = ("L", "R", "LR", "RL", "L1", "L_local")


@dataclass(frozen=True)
class SeminormSpec:
    family: str
    k: int = 0
    l: int = 0
    p: VectorSeminorm = field(default_factory=lambda: ABS)
    window: object = None        # chart box, L_local only

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise UsageError(f"unknown seminorm family {self.family!r}")
        if self.k < 0 or self.l < 0:
            raise UsageError("derivative orders must be non-negative")
        if self.family == "L_local" and self.window is None:
            raise UsageError("L_local needs a window box")

    def format(self) -> str:
        p = self.p.format()
        if self.family in ("L", "R"):
            return f"{self.family}:k={self.k},p={p}"
        if self.family in ("LR", "RL"):
            return f"{self.family}:k={self.k},l={self.l},p={p}"
        if self.family == "L1":
            return f"L1:p={p}"
        return f"L_local:l={self.l},p={p}"


def parse_seminorm_spec(text: str, window=None) -> SeminormSpec:
    """Parse spec strings like "L:k=2,p=abs" or "LR:k=1,l=2,p=abs"."""
    try:
        family, _, rest = text.strip().partition(":")
        kwargs = {"k": 0, "l": 0, "p": ABS}
        # weighted seminorms ("p=w:1.0,2.0") carry commas of their own, so
        # bare tokens continue the previous key's value
        items = []
        for tok in rest.split(",") if rest else []:
            if "=" in tok:
                items.append(tok.split("=", 1))
            elif items:
                items[-1][1] += "," + tok
            else:
                raise UsageError(f"bad seminorm spec {text!r}")
        for key, val in items:
            key = key.strip()
            if key == "k":
                kwargs["k"] = int(val)
            elif key == "l":
                kwargs["l"] = int(val)
            elif key == "p":
                kwargs["p"] = parse_vector_seminorm(val)
            else:
                raise UsageError(f"unknown seminorm key {key!r}")
    except ValueError as exc:
        raise UsageError(f"bad seminorm spec {text!r}: {exc}") from None
    return SeminormSpec(family, kwargs["k"], kwargs["l"], kwargs["p"],
                        window=window)


def field_words(group, side: str, max_len: int):
    """All words (tuples of VectorFieldSpec) over basis fields, length <= max_len."""
    basis = group.basis()
    fields = [VectorFieldSpec(side, tuple(v)) for v in basis]
    words = [()]
    for j in range(1, max_len + 1):
        words.extend(itertools.product(fields, repeat=j))
    return words


def _eval_grid(f: TestFunction, cfg: NumericsConfig, box=None) -> np.ndarray:
    group = f.group
    m = group.dimension
    if box is None:
        box = box_widen(f.support_box(), cfg.grid_margin)
    n = cfg.conv_grid_n(m) if getattr(f, "expensive_eval", False) else cfg.grid_n(m)
    return group.from_chart(sample_box(box, n))


def grid_sup(f: TestFunction, p: VectorSeminorm, cfg: NumericsConfig,
             box=None) -> float:
    """sup_x p(f(x)) approximated as a maximum over the evaluation grid."""
    pts = _eval_grid(f, cfg, box)
    return float(np.max(p.apply(f.values(pts))))


def _check_orders(f: TestFunction, total: int):
    if f.order != math.inf and total > f.order:
        raise CapabilityError(
            f"seminorm needs {total} derivatives, function has order {f.order}")


def seminorm(f: TestFunction, spec: SeminormSpec,
             cfg: NumericsConfig = DEFAULT_CONFIG) -> float:
    """Evaluate a seminorm family member on a test function."""
    group = f.group
    if group.is_discrete:
        return _seminorm_discrete(f, spec)

    if spec.family == "L1":
        from .quadrature import make_rule
        n = cfg.quad_n(group.dimension)
        rule = make_rule(group, f.support_param, n, cfg.scheme)
        vals = spec.p.apply(f.values(rule.points))
        return float(np.sum(rule.weights * vals))

    if spec.family in ("L", "R"):
        _check_orders(f, spec.k)
        side = "left" if spec.family == "L" else "right"
        best = 0.0
        for word in field_words(group, side, spec.k):
            g = iterated_derivative(f, word)
            best = max(best, grid_sup(g, spec.p, cfg))
        return best

    if spec.family in ("LR", "RL"):
        _check_orders(f, spec.k + spec.l)
        outer = "left" if spec.family == "LR" else "right"
        inner = "right" if spec.family == "LR" else "left"
        best = 0.0
        for inner_word in field_words(group, inner, spec.l):
            g_in = iterated_derivative(f, inner_word)
            for outer_word in field_words(group, outer, spec.k):
                g = iterated_derivative(g_in, outer_word)
                best = max(best, grid_sup(g, spec.p, cfg))
        return best

    # L_local
    _check_orders(f, spec.l)
    window = box_array(spec.window)
    best = 0.0
    for word in field_words(group, "left", spec.l):
        g = iterated_derivative(f, word)
        best = max(best, grid_sup(g, spec.p, cfg, box=window))
    return best


def _seminorm_discrete(f: TestFunction, spec: SeminormSpec) -> float:
    if spec.family in ("L", "R", "LR", "RL") and (spec.k or spec.l):
        raise CapabilityError("discrete groups carry no invariant derivatives")
    values = [f.value(g) for g in f.support_set]
    if not values:
        return 0.0
    if spec.family == "L1":
        return float(np.sum([spec.p.scalar(v) for v in values]))
    if spec.family == "L_local":
        window = set(spec.window)
        vals = [spec.p.scalar(f.value(g)) for g in window]
        return float(max(vals, default=0.0))
    return float(max(spec.p.scalar(v) for v in values))
