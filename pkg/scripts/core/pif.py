"""
pif.py - Time-averaged fluxes and the single conservative update

This module handles:
- Third-order Taylor approximation of the time-averaged fluxes, with the
  temporal derivatives replaced by spatial ones (Cauchy-Kovalevskaya)
- The conservative update from interface fluxes
- The CFL time step from global signal speeds
"""

from __future__ import annotations

from typing import List, NamedTuple, Optional, Sequence

import numpy as np

from scripts.core import physics
from scripts.core.errors import DegenerateStateError
from scripts.core.mesh import GridSpec, PolicyLike, d4, fill_ghosts
from scripts.core.weno import global_alpha
from scripts.utils.logging_helper import get_logger

log = get_logger()


class TimeAvgFlux(NamedTuple):
    """Per-cell time-averaged fluxes plus the Taylor coefficients of q.

    ``fluxes[d]`` has shape (8, *spec.shape); ``q_t`` and ``q_tt`` are the
    first and second time derivatives of the state, reused by the
    potential update.
    """

    fluxes: List[np.ndarray]
    q_t: np.ndarray
    q_tt: np.ndarray


def _divergence(fields: Sequence[np.ndarray], spec: GridSpec) -> np.ndarray:
    out = np.zeros_like(fields[0])
    for d, (f, h) in enumerate(zip(fields, spec.widths)):
        out += d4(f, 1 + d, h)
    return out


def time_avg_fluxes(q: np.ndarray, spec: GridSpec, dt: float, gamma: float = physics.GAMMA,
                    policies: Optional[PolicyLike] = None) -> TimeAvgFlux:
    """Taylor-approximated time averages F = f + Δt/2 f_t + Δt²/6 f_tt.

    q_t = -Σ ∂_d f_d,  f_t = J q_t,  q_tt = -Σ ∂_d f_t,d,
    f_tt = H(q_t, q_t) + J q_tt, with fourth-order spatial derivatives.

    The ghosts of q_t and q_tt are refilled with ``policies`` before they
    are differentiated again; the nested stencils reach four cells past
    each reconstructed cell, one more than the ghost layer.

    Args:
        q: Boundary-filled state (8, *spec.shape), admissible everywhere
        spec: Grid
        dt: Time step
        policies: Boundary policy of q; None leaves the one-sided edge
            values of q_t and q_tt in the ghosts
    """
    nd = spec.ndim
    f = [physics.flux(q, d, gamma) for d in range(nd)]
    q_t = -_divergence(f, spec)
    if policies is not None:
        fill_ghosts(q_t, spec, policies)
    f_t = [physics.flux_dir_derivative(q, q_t, d, gamma, order=1) for d in range(nd)]
    q_tt = -_divergence(f_t, spec)
    if policies is not None:
        fill_ghosts(q_tt, spec, policies)

    fluxes = []
    for d in range(nd):
        f_tt = (physics.flux_dir_derivative(q, q_t, d, gamma, order=2)
                + physics.flux_dir_derivative(q, q_tt, d, gamma, order=1))
        fluxes.append(f[d] + (0.5 * dt) * f_t[d] + (dt * dt / 6.0) * f_tt)
    return TimeAvgFlux(fluxes, q_t, q_tt)


def conservative_update(q: np.ndarray, interface_fluxes: Sequence[np.ndarray],
                        spec: GridSpec, dt: float) -> np.ndarray:
    """q^{n+1} = q^n - Σ_d Δt/Δ_d (F̂_{+1/2} - F̂_{-1/2}) on interior cells.

    ``interface_fluxes[d]`` comes from ``weno.reconstruct_interface`` (or the
    limiter); ghost cells of the result keep their old values.
    """
    out = q.copy()
    inner = out[spec.cinterior]
    for d, (Fh, h) in enumerate(zip(interface_fluxes, spec.widths)):
        ax = 1 + d
        n = Fh.shape[ax]
        hi = Fh[tuple([slice(None)] * ax + [slice(1, n)])]
        lo = Fh[tuple([slice(None)] * ax + [slice(0, n - 1)])]
        inner -= (dt / h) * (hi - lo)
    out[spec.cinterior] = inner
    return out


def global_alphas(q: np.ndarray, spec: GridSpec, gamma: float = physics.GAMMA) -> List[float]:
    return [global_alpha(q, spec, d, gamma) for d in range(spec.ndim)]


def compute_dt(q: np.ndarray, spec: GridSpec, cfl: float, gamma: float = physics.GAMMA,
               alphas: Optional[Sequence[float]] = None) -> float:
    """Δt = cfl / Σ_d (α_d / Δ_d).

    Raises:
        DegenerateStateError: every signal speed is zero
    """
    alphas = global_alphas(q, spec, gamma) if alphas is None else alphas
    rate = sum(a / h for a, h in zip(alphas, spec.widths))
    if not rate > 0:
        raise DegenerateStateError("zero signal speed everywhere; no finite time step")
    return cfl / rate
