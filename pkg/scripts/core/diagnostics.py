"""
diagnostics.py - Error norms, convergence orders and run monitors

This module handles:
- L∞ errors against a reference field and observed orders of accuracy
- Relative total-energy conservation error (compensated summation)
- The fourth-order discrete divergence of B
- Run monitors: extrema of ρ and p, shock-front position, line slices,
  field rotation for shock-tube comparisons
- Schlieren images of ln ρ (or any positive field)

Every reduction is independent of thread count: sums use math.fsum and
maxima are order-insensitive.
"""

from __future__ import annotations

import math
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from scripts.core import physics
from scripts.core.errors import InvalidGridError
from scripts.core.mesh import GridSpec, d4

SCHLIEREN_FLAT_TOL = 1e-12


def linf_error(numeric: np.ndarray, reference: np.ndarray, spec: Optional[GridSpec] = None,
               comps: Optional[Sequence[int]] = None) -> float:
    """max over (interior) cells and selected components of |numeric - reference|.

    Args:
        numeric, reference: Component-major arrays of equal shape
        spec: When given, only interior cells are compared
        comps: Component indices to include (all when None)
    """
    numeric = np.asarray(numeric, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if numeric.shape != reference.shape:
        raise InvalidGridError(f"shape mismatch {numeric.shape} vs {reference.shape}")
    diff = numeric - reference
    if comps is not None:
        diff = diff[list(comps)]
    if spec is not None:
        diff = diff[(slice(None),) + spec.interior]
    return float(np.max(np.abs(diff))) if diff.size else 0.0


def observed_order(errors: Sequence[float], ratio: float = 2.0) -> List[float]:
    """log_ratio(e_k / e_{k+1}) for successive refinements.

    Raises:
        ValueError: fewer than two errors or a non-positive error
    """
    errors = [float(e) for e in errors]
    if len(errors) < 2:
        raise ValueError("need at least two errors for an observed order")
    if any(not e > 0 for e in errors):
        raise ValueError(f"errors must be positive, got {errors}")
    return [math.log(a / b) / math.log(ratio) for a, b in zip(errors, errors[1:])]


def _fsum(values: np.ndarray) -> float:
    return math.fsum(np.ravel(values).tolist())


def total(values: np.ndarray, spec: Optional[GridSpec] = None) -> float:
    """Compensated sum over (interior) cells of a cell array."""
    if spec is not None:
        values = values[spec.interior]
    return _fsum(values)


def energy_conservation_error(E_now: np.ndarray, E_init: np.ndarray,
                              spec: Optional[GridSpec] = None) -> float:
    """|Σ(ℰⁿ - ℰ⁰)| / Σℰ⁰ over interior cells.

    Raises:
        ValueError: the initial total energy is zero
    """
    E_now = np.asarray(E_now, dtype=float)
    E_init = np.asarray(E_init, dtype=float)
    if E_now.shape != E_init.shape:
        raise InvalidGridError(f"shape mismatch {E_now.shape} vs {E_init.shape}")
    if spec is not None:
        E_now, E_init = E_now[spec.interior], E_init[spec.interior]
    base = _fsum(E_init)
    if base == 0.0:
        raise ValueError("initial total energy is zero")
    return abs(_fsum(E_now - E_init)) / abs(base)


def discrete_divergence(B: np.ndarray, spec: GridSpec) -> np.ndarray:
    """Σ_d D4_d B^d on interior cells; B holds at least ``ndim`` components."""
    div = np.zeros(B.shape[1:])
    for d in range(spec.ndim):
        div += d4(B[d], d, spec.widths[d])
    return div[spec.interior]


def max_divergence(B: np.ndarray, spec: GridSpec) -> Tuple[float, float]:
    """(max |div B|, max |B|) over interior cells."""
    div = discrete_divergence(B, spec)
    inner = B[(slice(None),) + spec.interior]
    bmax = float(np.max(np.sqrt(np.sum(inner * inner, axis=0))))
    return float(np.max(np.abs(div))), bmax


def extrema(q: np.ndarray, spec: GridSpec, gamma: float = physics.GAMMA) -> Tuple[float, float]:
    """(min ρ, min p) over interior cells."""
    inner = q[spec.cinterior]
    with np.errstate(divide="ignore", invalid="ignore"):
        p = physics.raw_pressure(inner, gamma)
    return float(np.min(inner[physics.RHO])), float(np.min(p))


def shock_front_position(q: np.ndarray, spec: GridSpec) -> float:
    """x of the rightmost cell whose |∂x ρ| exceeds half its maximum."""
    rho = q[physics.RHO]
    grad = np.abs(d4(rho, 0, spec.widths[0]))[spec.interior]
    axes = tuple(range(1, grad.ndim))
    profile = np.max(grad, axis=axes) if axes else grad
    peak = float(np.max(profile))
    if peak == 0.0:
        return float("nan")
    idx = int(np.flatnonzero(profile > 0.5 * peak)[-1])
    g = spec.ghost
    return float(spec.centers(0)[g + idx])


def line_slice(field: np.ndarray, spec: GridSpec, axis: int, coordinate: Sequence[float]
               ) -> Tuple[np.ndarray, np.ndarray]:
    """Sample a cell array along ``axis`` through the cell nearest ``coordinate``.

    ``coordinate`` gives a position on every other axis, in axis order.

    Returns:
        (centres along ``axis``, values), interior cells only
    """
    g = spec.ghost
    others = [d for d in range(spec.ndim) if d != axis]
    if len(coordinate) != len(others):
        raise InvalidGridError(f"need {len(others)} coordinates, got {len(coordinate)}")
    index: list = [None] * spec.ndim
    index[axis] = slice(g, g + spec.dims[axis])
    for d, c in zip(others, coordinate):
        centres = spec.centers(d)[g:g + spec.dims[d]]
        index[d] = g + int(np.argmin(np.abs(centres - c)))
    xs = spec.centers(axis)[g:g + spec.dims[axis]]
    return xs, np.asarray(field)[tuple(index)]


def perp_parallel_components(B: np.ndarray, phi: float) -> Tuple[np.ndarray, np.ndarray]:
    """Rotate in-plane (B^x, B^y) into (B_⊥, B_∥) for a front normal at angle φ."""
    c, s = math.cos(phi), math.sin(phi)
    return B[0] * c + B[1] * s, -B[0] * s + B[1] * c


def schlieren(field: np.ndarray, spec: GridSpec, k: float = 20.0, log_scale: bool = True
              ) -> np.ndarray:
    """exp(-k |∇ f| / max |∇ f|) on interior cells, f = ln(field) by default."""
    f = np.log(field) if log_scale else np.asarray(field, dtype=float)
    grad2 = np.zeros_like(f)
    for d in range(spec.ndim):
        grad2 += d4(f, d, spec.widths[d]) ** 2
    mag = np.sqrt(grad2)[spec.interior]
    peak = float(np.max(mag))
    # gradients at roundoff level of f count as a flat field
    noise = SCHLIEREN_FLAT_TOL * max(1.0, float(np.max(np.abs(f)))) / min(spec.widths)
    if peak <= noise:
        return np.ones_like(mag)
    return np.exp(-k * mag / peak)


def summarize_orders(rows: Iterable[dict], key: str) -> List[Optional[float]]:
    """Observed orders aligned with ``rows`` (None for the first row)."""
    errors = [r[key] for r in rows]
    if len(errors) < 2:
        return [None] * len(errors)
    return [None] + observed_order(errors)
