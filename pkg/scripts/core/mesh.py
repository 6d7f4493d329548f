"""
mesh.py - Structured uniform grids with ghost layers

This module handles:
- GridSpec construction and cell-centre coordinates
- Field containers: component-major numpy arrays over the ghosted index space
- The three boundary fills (periodic, extrap0, extrap1), periodic with
  optional additive jumps for potentials that carry a mean field
- The shared index helpers: interior slices, shifted views and the
  fourth-order first derivative used by the flux and curl operators

Array layout: a field with ``comps`` components on an ``ndim``-dimensional
grid is stored as ``values[c, i, j(, k)]`` with ``ghost`` layers on both
sides of every axis. Interior cell ``i`` (0-based) lives at array index
``ghost + i`` and has centre ``a + (i + 1/2)·Δ``.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from scripts.core.errors import InvalidGridError

GHOST = 6
POLICIES = ("periodic", "extrap0", "extrap1")

Policy = Tuple[str, str]
PolicyLike = Union[str, Sequence[Union[str, Sequence[str]]]]


class GridSpec(BaseModel):
    """Uniform structured grid with ``ghost`` layers on every side."""

    model_config = ConfigDict(frozen=True)

    dims: Tuple[int, ...]
    bounds: Tuple[Tuple[float, float], ...]
    ghost: int = GHOST

    @field_validator("dims")
    @classmethod
    def _positive_dims(cls, v: Tuple[int, ...]) -> Tuple[int, ...]:
        if not v or any(int(n) < 1 for n in v):
            raise ValueError(f"every extent must be >= 1, got {v}")
        return tuple(int(n) for n in v)

    @field_validator("ghost")
    @classmethod
    def _non_negative_ghost(cls, v: int) -> int:
        if v < 0:
            raise ValueError(f"ghost must be >= 0, got {v}")
        return v

    @model_validator(mode="after")
    def _consistent(self) -> "GridSpec":
        if len(self.bounds) != len(self.dims):
            raise ValueError(f"{len(self.dims)} extents but {len(self.bounds)} intervals")
        for lo, hi in self.bounds:
            if not np.isfinite(lo) or not np.isfinite(hi) or not hi > lo:
                raise ValueError(f"degenerate interval [{lo}, {hi}]")
        return self

    # ── geometry ─────────────────────────────────────────────────────────
    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def widths(self) -> Tuple[float, ...]:
        return tuple((hi - lo) / n for (lo, hi), n in zip(self.bounds, self.dims))

    @property
    def lengths(self) -> Tuple[float, ...]:
        return tuple(hi - lo for lo, hi in self.bounds)

    @property
    def shape(self) -> Tuple[int, ...]:
        """Ghosted cell shape (without the component axis)."""
        return tuple(n + 2 * self.ghost for n in self.dims)

    @property
    def interior(self) -> Tuple[slice, ...]:
        """Slices selecting interior cells of a cell-shaped array."""
        g = self.ghost
        return tuple(slice(g, g + n) for n in self.dims)

    @property
    def cinterior(self) -> Tuple[slice, ...]:
        """Same as ``interior`` for a component-major array."""
        return (slice(None),) + self.interior

    def centers(self, axis: int) -> np.ndarray:
        """Cell centres along ``axis`` including ghost cells."""
        lo, _ = self.bounds[axis]
        h = self.widths[axis]
        idx = np.arange(self.shape[axis]) - self.ghost
        return lo + (idx + 0.5) * h

    def coordinates(self, interior: bool = False) -> Tuple[np.ndarray, ...]:
        """Broadcast-ready coordinate arrays (``indexing='ij'``)."""
        axes = [self.centers(d) for d in range(self.ndim)]
        if interior:
            g = self.ghost
            axes = [a[g:g + n] for a, n in zip(axes, self.dims)]
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def refined(self, factor: int = 2) -> "GridSpec":
        return GridSpec(dims=tuple(n * factor for n in self.dims), bounds=self.bounds,
                        ghost=self.ghost)

    def __str__(self) -> str:
        return f"{self.ndim}-d grid {'x'.join(map(str, self.dims))}, ghost = {self.ghost}"


def build_grid(dims: Iterable[int], bounds: Sequence, ghost: int = GHOST) -> GridSpec:
    """Validate extents and intervals and return a GridSpec.

    ``bounds`` is one (lo, hi) pair per axis; a bare pair is accepted for 1D.

    Raises:
        InvalidGridError: zero extents, degenerate bounds or negative ghost
    """
    dims = tuple(dims)
    bounds = list(bounds)
    if len(bounds) == 2 and np.isscalar(bounds[0]) and len(dims) == 1:
        bounds = [bounds]
    try:
        return GridSpec(dims=dims, bounds=tuple(tuple(float(v) for v in b) for b in bounds),
                        ghost=ghost)
    except (ValueError, TypeError) as e:
        raise InvalidGridError(f"invalid grid dims={dims} bounds={bounds}: {e}") from e


class Field:
    """A component-major array living on a GridSpec.

    Args:
        spec: The grid
        values: Array of shape ``(comps, *spec.shape)``
    """

    def __init__(self, spec: GridSpec, values: np.ndarray):
        values = np.asarray(values, dtype=float)
        if values.ndim != spec.ndim + 1 or values.shape[1:] != spec.shape:
            raise InvalidGridError(
                f"field shape {values.shape} does not match (comps, {spec.shape})")
        self.spec = spec
        self.values = values

    @classmethod
    def zeros(cls, spec: GridSpec, comps: int) -> "Field":
        return cls(spec, np.zeros((comps,) + spec.shape))

    @property
    def comps(self) -> int:
        return self.values.shape[0]

    @property
    def interior(self) -> np.ndarray:
        return self.values[self.spec.cinterior]

    def copy(self) -> "Field":
        return Field(self.spec, self.values.copy())

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.values).all())


# ── boundary fills ───────────────────────────────────────────────────────
def normalize_policies(policies: PolicyLike, ndim: int) -> Tuple[Policy, ...]:
    """Expand a policy description into one (low, high) pair per axis.

    Accepts a single name for every side, one name per axis, or explicit
    pairs.
    """
    if isinstance(policies, str):
        pairs = [(policies, policies)] * ndim
    else:
        pairs = [(p, p) if isinstance(p, str) else tuple(p) for p in policies]
    if len(pairs) != ndim:
        raise InvalidGridError(f"need {ndim} boundary policies, got {len(pairs)}")
    for lo, hi in pairs:
        for name in (lo, hi):
            if name not in POLICIES:
                raise InvalidGridError(f"unknown boundary policy '{name}'")
        if (lo == "periodic") != (hi == "periodic"):
            raise InvalidGridError("periodic must be set on both sides of an axis")
    return tuple(pairs)


def _take(values: np.ndarray, axis: int, index) -> tuple:
    sl = [slice(None)] * values.ndim
    sl[axis] = index
    return tuple(sl)


def _fill_axis(values: np.ndarray, axis: int, n: int, g: int, policy: Policy,
               jump: Optional[np.ndarray]) -> None:
    """Fill the ghosts of one array axis in place (axis counts the component axis)."""
    low, high = policy
    if low == "periodic":
        idx = np.arange(values.shape[axis])
        wraps = np.floor_divide(idx - g, n)
        src = g + np.mod(idx - g, n)
        ghosts = (idx < g) | (idx >= g + n)
        filled = np.take(values, src[ghosts], axis=axis)
        if jump is not None:
            k = wraps[ghosts].reshape([1] * axis + [-1] + [1] * (values.ndim - axis - 1))
            j = np.asarray(jump, dtype=float).reshape([-1] + [1] * (values.ndim - 1))
            filled = filled + k * j
        values[_take(values, axis, np.flatnonzero(ghosts))] = filled
        return

    for side, name in (("low", low), ("high", high)):
        if name == "extrap1" and n < 2:
            name = "extrap0"
        if side == "low":
            edge, inward, layers = g, 1, range(g - 1, -1, -1)
        else:
            edge, inward, layers = g + n - 1, -1, range(g + n, 2 * g + n)
        if name == "extrap0":
            for k in layers:
                values[_take(values, axis, k)] = values[_take(values, axis, edge)]
        else:
            # repeated two-point extrapolation, one layer at a time
            for k in layers:
                values[_take(values, axis, k)] = (2.0 * values[_take(values, axis, k + inward)]
                                                  - values[_take(values, axis, k + 2 * inward)])


def fill_ghosts(values: np.ndarray, spec: GridSpec, policies: PolicyLike,
                jumps: Optional[Sequence[Optional[Sequence[float]]]] = None) -> np.ndarray:
    """In-place boundary fill of a component-major array.

    Axes are filled in order, each over the full extent of the others, so
    edge and corner ghosts are consistent. With periodic policies the
    ghost ``i`` receives the wrapped interior value plus ``k·J_d`` where
    ``k`` is the number of periods crossed and ``J_d`` the per-component
    jump of axis ``d`` (zero when ``jumps`` is None).
    """
    if spec.ghost < 1:
        raise InvalidGridError("boundary fill needs ghost >= 1")
    if values.shape[1:] != spec.shape:
        raise InvalidGridError(f"array shape {values.shape} does not match {spec.shape}")
    pairs = normalize_policies(policies, spec.ndim)
    for d in range(spec.ndim):
        jump = None if jumps is None else jumps[d]
        _fill_axis(values, d + 1, spec.dims[d], spec.ghost, pairs[d], jump)
    return values


def fill_boundary(field: Field, policies: PolicyLike,
                  jumps: Optional[Sequence[Optional[Sequence[float]]]] = None) -> Field:
    """Return a copy of ``field`` with every ghost layer filled.

    Args:
        field: Field whose interior is authoritative
        policies: 'periodic' | 'extrap0' | 'extrap1', per axis or per side
        jumps: Optional per-axis additive offsets for periodic potentials

    Returns:
        New Field; the input is left untouched
    """
    out = field.copy()
    fill_ghosts(out.values, out.spec, policies, jumps)
    return out


# ── stencil helpers ──────────────────────────────────────────────────────
def shifted(a: np.ndarray, axis: int, k: int) -> np.ndarray:
    """``result[..., i, ...] = a[..., i + k, ...]`` along ``axis`` (wrapping).

    Wrapped values only pollute the outermost ``|k|`` layers, which every
    caller treats as garbage ghosts.
    """
    if k == 0:
        return a
    return np.roll(a, -k, axis=axis)


def _sl(ndim: int, axis: int, start, stop) -> tuple:
    sl = [slice(None)] * ndim
    sl[axis] = slice(start, stop)
    return tuple(sl)


def d4(a: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Fourth-order first derivative along ``axis`` of an array.

    Central (A_{i-2} - 8A_{i-1} + 8A_{i+1} - A_{i+2})/12h everywhere it fits;
    the two outermost layers on each side use the one-sided five-point
    fourth-order stencils so the result is defined on the whole array.
    """
    n = a.shape[axis]
    if n < 5:
        raise InvalidGridError(f"d4 needs at least 5 points along axis {axis}, got {n}")
    nd = a.ndim
    out = np.empty_like(a, dtype=float)
    s = lambda lo, hi: a[_sl(nd, axis, lo, hi)]
    out[_sl(nd, axis, 2, n - 2)] = (s(0, n - 4) - 8.0 * s(1, n - 3)
                                    + 8.0 * s(3, n - 1) - s(4, n)) / (12.0 * h)

    p = [a[_sl(nd, axis, i, i + 1)] for i in range(5)]
    out[_sl(nd, axis, 0, 1)] = (-25 * p[0] + 48 * p[1] - 36 * p[2] + 16 * p[3] - 3 * p[4]) / (12.0 * h)
    out[_sl(nd, axis, 1, 2)] = (-3 * p[0] - 10 * p[1] + 18 * p[2] - 6 * p[3] + p[4]) / (12.0 * h)

    m = [a[_sl(nd, axis, n - 1 - i, n - i)] for i in range(5)]
    out[_sl(nd, axis, n - 1, n)] = (25 * m[0] - 48 * m[1] + 36 * m[2] - 16 * m[3] + 3 * m[4]) / (12.0 * h)
    out[_sl(nd, axis, n - 2, n - 1)] = (3 * m[0] + 10 * m[1] - 18 * m[2] + 6 * m[3] - m[4]) / (12.0 * h)
    return out
