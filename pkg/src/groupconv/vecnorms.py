"""Named seminorms on finite-dimensional target spaces R^d.

These play the role of the continuous seminorms p on the (here always
finite-dimensional) value spaces.  Every seminorm evaluates vectorized:
``apply`` maps an array of shape (..., d) to shape (...).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import UsageError


@dataclass(frozen=True)
class VectorSeminorm:
    name: str
    dim: int | None = None              # None: any dimension
    weights: tuple = ()

    def apply(self, values) -> np.ndarray:
        v = np.asarray(values, dtype=float)
        if v.ndim == 0:
            v = v.reshape(1)
        if self.name == "abs":
            return np.max(np.abs(v), axis=-1)
        if self.name == "eucl":
            return np.sqrt(np.sum(v * v, axis=-1))
        if self.name == "weighted":
            w = np.asarray(self.weights, dtype=float)
            if w.shape[0] != v.shape[-1]:
                raise UsageError("weight length does not match dimension")
            return np.max(np.abs(v) * w, axis=-1)
        if self.name == "op2":
            if v.shape[-1] != 4:
                raise UsageError("op2 seminorm needs d=4 (2x2 matrices)")
            mats = v.reshape(v.shape[:-1] + (2, 2))
            return np.linalg.norm(mats, ord=2, axis=(-2, -1))
        raise UsageError(f"unknown seminorm {self.name!r}")

    def __call__(self, values):
        return self.apply(values)

    def scalar(self, value) -> float:
        return float(self.apply(np.atleast_1d(np.asarray(value, dtype=float))))

    def format(self) -> str:
        if self.name == "weighted":
            return "w:" + ",".join(repr(float(w)) for w in self.weights)
        return self.name


ABS = VectorSeminorm("abs")
EUCL = VectorSeminorm("eucl")
OP2 = VectorSeminorm("op2", dim=4)


def parse_vector_seminorm(text: str) -> VectorSeminorm:
    """Parse "abs" | "eucl" | "op2" | "w:1.0,2.0,...". """
    text = text.strip()
    if text in ("abs", "eucl", "op2"):
        return VectorSeminorm(text, dim=4 if text == "op2" else None)
    if text.startswith("w:"):
        weights = tuple(float(tok) for tok in text[2:].split(","))
        if not weights or any(w < 0 for w in weights):
            raise UsageError(f"bad weighted seminorm spec: {text!r}")
        return VectorSeminorm("weighted", weights=weights)
    raise UsageError(f"unknown seminorm spec: {text!r}")
