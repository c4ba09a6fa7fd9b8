"""Numerics configuration: quadrature resolutions, grids, steps, tolerances.

All knobs live in one immutable dataclass so that experiment reports can
record the exact settings they ran with.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace, asdict
from pathlib import Path

from .errors import UsageError

#: quadrature points per axis by chart dimension (Gauss-Legendre tensor grids)
DEFAULT_QUAD_POINTS = {1: 64, 2: 64, 3: 40}

#: cheaper setting used for inequality (bound) checks, where slack is large
LOW_QUAD_POINTS = {1: 32, 2: 32, 3: 20}

#: evaluation-grid points per axis for convolution results, by dimension
DEFAULT_CONV_GRID = {1: 9, 2: 5, 3: 3}


@dataclass(frozen=True)
class NumericsConfig:
    # quadrature
    scheme: str = "gauss-legendre"          # or "midpoint" (diagnostics)
    quad_points: dict = field(default_factory=lambda: dict(DEFAULT_QUAD_POINTS))
    quad_points_low: dict = field(default_factory=lambda: dict(LOW_QUAD_POINTS))

    # seminorm grids over supports of plain (non-convolution) functions
    grid_points_per_axis: int = 64
    grid_points_per_axis_3d: int = 24       # 64^3 grids are wasteful; override if needed
    grid_margin: float = 0.02               # relative margin added around support boxes

    # evaluation grids for convolution results (each point costs one quadrature)
    conv_grid_points: dict = field(default_factory=lambda: dict(DEFAULT_CONV_GRID))

    # finite differences (Richardson-extrapolated central differences)
    fd_step: float = 1e-4                   # relative to support radius, 1st order exact-free path
    deriv_check_step: float = 0.005          # flow step for Eq.-8-vs-FD identity checks

    # hull construction for mapped supports
    hull_samples_per_axis: int = 7
    hull_pad: float = 0.05

    # tolerances
    identity_tol: float = 1e-6
    deriv_tol: float = 1e-5
    bound_slack: float = 1e-6
    support_eps: float = 1e-9

    def quad_n(self, dim: int, low: bool = False) -> int:
        table = self.quad_points_low if low else self.quad_points
        try:
            return int(table[dim])
        except KeyError:
            return int(table[max(table)])

    def grid_n(self, dim: int) -> int:
        if dim >= 3:
            return self.grid_points_per_axis_3d
        return self.grid_points_per_axis

    def conv_grid_n(self, dim: int) -> int:
        try:
            return int(self.conv_grid_points[dim])
        except KeyError:
            return int(self.conv_grid_points[max(self.conv_grid_points)])

    def with_updates(self, **kwargs) -> "NumericsConfig":
        return replace(self, **kwargs)

    def to_dict(self) -> dict:
        return asdict(self)


DEFAULT_CONFIG = NumericsConfig()

# keys accepted in key=value config files / CLI overrides
_INT_KEYS = {
    "quadrature.points_per_axis": None,      # special: sets all dims
    "grid.points_per_axis": "grid_points_per_axis",
    "grid.points_per_axis_3d": "grid_points_per_axis_3d",
}
_FLOAT_KEYS = {
    "quadrature.tolerance": "identity_tol",
    "identity.tolerance": "identity_tol",
    "deriv.tolerance": "deriv_tol",
    "bound.slack": "bound_slack",
    "fd.step": "fd_step",
}
_STR_KEYS = {"quadrature.scheme": "scheme"}


def apply_config_entries(cfg: NumericsConfig, entries: dict) -> NumericsConfig:
    """Apply key=value overrides (config file or CLI) to a NumericsConfig."""
    for key, raw in entries.items():
        if key in _INT_KEYS:
            n = int(raw)
            if key == "quadrature.points_per_axis":
                cfg = cfg.with_updates(quad_points={1: n, 2: n, 3: n})
            else:
                cfg = cfg.with_updates(**{_INT_KEYS[key]: n})
        elif key in _FLOAT_KEYS:
            cfg = cfg.with_updates(**{_FLOAT_KEYS[key]: float(raw)})
        elif key in _STR_KEYS:
            val = str(raw)
            if key == "quadrature.scheme" and val not in ("gauss-legendre", "midpoint"):
                raise UsageError(f"unknown quadrature scheme: {val!r}")
            cfg = cfg.with_updates(**{_STR_KEYS[key]: val})
        else:
            raise UsageError(f"unknown config key: {key!r}")
    return cfg


def load_config_file(path: str | Path) -> dict:
    """Parse a simple key=value config file (comments with '#')."""
    entries = {}
    text = Path(path).read_text()
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, val = line.split("=", 1)
        entries[key.strip()] = val.strip()
    return entries
