"""
limiter.py - Positivity-preserving flux limiter

This module handles:
- Global Lax-Friedrichs interface fluxes and the first-order update q_LF
- Per-cell flux-difference vectors C_I (one per cell side)
- Density limiting parameters Λ^ρ and the vertex-shrinking bisection
  that makes the whole box [0, Λ] pressure-admissible
- Combination into one θ per interface and the blended fluxes

Sides are ordered low/high per axis: (L, R, D, U[, B, F]) = side 2d for
the low face of axis d and 2d + 1 for the high face.
"""

from __future__ import annotations

from typing import List, NamedTuple, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from scripts.core import physics
from scripts.core.errors import PositivityFloorError
from scripts.core.mesh import GridSpec
from scripts.core.pif import conservative_update
from scripts.utils.logging_helper import get_logger
from scripts.utils.parallel import chunk_map

log = get_logger()

DENOM_EPS = 1e-12
BISECTIONS = 10


class PositivityFloors(BaseModel):
    model_config = ConfigDict(frozen=True)

    eps_rho: float = 1e-12
    eps_p: float = 1e-12

    @field_validator("eps_rho", "eps_p")
    @classmethod
    def _positive(cls, v: float) -> float:
        if not v > 0:
            raise ValueError(f"positivity floors must be > 0, got {v}")
        return v


class LimiterCoeffs(NamedTuple):
    """Interior-cell limiter data.

    ``C`` has shape (2·ndim, 8, *dims): the update q_LF + Σ_I θ_I C_I is the
    high-order update at θ ≡ 1 and q_LF at θ ≡ 0. ``q_lf`` is (8, *dims).
    """

    q_lf: np.ndarray
    C: np.ndarray


# ── Lax-Friedrichs ───────────────────────────────────────────────────────
def lf_flux(qL: np.ndarray, qR: np.ndarray, axis: int, alpha: float,
            gamma: float = physics.GAMMA) -> np.ndarray:
    """½(f(qR) + f(qL) - α (qR - qL))."""
    return 0.5 * (physics.flux(qR, axis, gamma) + physics.flux(qL, axis, gamma)
                  - alpha * (qR - qL))


def lf_interface_fluxes(q: np.ndarray, spec: GridSpec, axis: int, alpha: float,
                        gamma: float = physics.GAMMA) -> np.ndarray:
    """LF fluxes on the ``dims[axis] + 1`` interior interfaces along ``axis``.

    Same layout as ``weno.reconstruct_interface``.
    """
    g = spec.ghost
    m = spec.dims[axis]
    sel = list(spec.cinterior)
    sel[1 + axis] = slice(g - 1, g + m)
    left = q[tuple(sel)]
    sel[1 + axis] = slice(g, g + m + 1)
    right = q[tuple(sel)]
    return lf_flux(left, right, axis, alpha, gamma)


def _first_violation(q: np.ndarray, floors: PositivityFloors, gamma: float):
    rho = q[physics.RHO]
    with np.errstate(divide="ignore", invalid="ignore"):
        p = physics.raw_pressure(q, gamma)
    bad = ~((rho > floors.eps_rho) & (p > floors.eps_p))
    if not bad.any():
        return None
    cell = tuple(int(i) for i in np.argwhere(bad)[0])
    return cell, float(rho[cell]), float(p[cell])


def lf_update(q: np.ndarray, spec: GridSpec, dt: float, alphas: Sequence[float],
              floors: PositivityFloors, gamma: float = physics.GAMMA
              ) -> Tuple[np.ndarray, List[np.ndarray]]:
    """First-order global Lax-Friedrichs update.

    Returns:
        (q_LF on the full ghosted array, LF interface fluxes per axis)

    Raises:
        PositivityFloorError: q_LF falls below a floor (CFL too large or a
            counterexample to the first-order positivity property)
    """
    f_low = [lf_interface_fluxes(q, spec, d, alphas[d], gamma) for d in range(spec.ndim)]
    q_lf = conservative_update(q, f_low, spec, dt)
    hit = _first_violation(q_lf[spec.cinterior], floors, gamma)
    if hit is not None:
        cell, rho, p = hit
        log.error("Lax-Friedrichs update below floors at cell %s (rho=%.3e, p=%.3e)", cell, rho, p)
        raise PositivityFloorError("Lax-Friedrichs update violates positivity floors",
                                   cell=cell, rho=rho, pressure=p)
    return q_lf, f_low


def limiter_coefficients(q_lf: np.ndarray, high: Sequence[np.ndarray],
                         low: Sequence[np.ndarray], spec: GridSpec, dt: float) -> LimiterCoeffs:
    """C_low,d = Δt/Δ_d (F̂-f̂) at the cell's low face, C_high,d = -Δt/Δ_d (F̂-f̂) at its high face."""
    nd = spec.ndim
    C = np.empty((2 * nd, physics.NCOMP) + tuple(spec.dims))
    for d in range(nd):
        diff = (dt / spec.widths[d]) * (high[d] - low[d])
        n = diff.shape[1 + d]
        lo = [slice(None)] * (nd + 1)
        hi = [slice(None)] * (nd + 1)
        lo[1 + d] = slice(0, n - 1)
        hi[1 + d] = slice(1, n)
        C[2 * d] = diff[tuple(lo)]
        C[2 * d + 1] = -diff[tuple(hi)]
    return LimiterCoeffs(q_lf[spec.cinterior], C)


# ── limiting parameters ──────────────────────────────────────────────────
def lambda_density(rho_lf: np.ndarray, C_rho: np.ndarray, floors: PositivityFloors) -> np.ndarray:
    """Λ^ρ per side.

    Λ^ρ_I = min(1, (ρ_LF - ε_ρ) / (ε + Σ_{J: C_J<0} |C_J|)) where C_I < 0, else 1.

    Args:
        rho_lf: Density of q_LF, shape (*cells)
        C_rho: Density component of the C vectors, shape (sides, *cells)

    Raises:
        PositivityFloorError: ρ(q_LF) is not above the density floor
    """
    rho_lf = np.asarray(rho_lf, dtype=float)
    C_rho = np.asarray(C_rho, dtype=float)
    if np.any(rho_lf <= floors.eps_rho):
        raise PositivityFloorError("q_LF density at or below the floor",
                                   rho=float(np.min(rho_lf)))
    negative = np.where(C_rho < 0, -C_rho, 0.0).sum(axis=0)
    cap = np.minimum(1.0, (rho_lf - floors.eps_rho) / (DENOM_EPS + negative))
    return np.where(C_rho < 0, cap[None], 1.0)


def _vertex_states(q_lf: np.ndarray, C: np.ndarray, weights: np.ndarray) -> np.ndarray:
    # q_LF + Σ_I w_I C_I for (sides, n) weights and (sides, 8, n) C
    return q_lf + np.einsum("sn,scn->cn", weights, C)


def shrink_for_pressure(q_lf: np.ndarray, C: np.ndarray, lam_rho: np.ndarray,
                        floors: PositivityFloors, gamma: float = physics.GAMMA,
                        iterations: int = BISECTIONS, threads: int = 1) -> np.ndarray:
    """Shrink the Λ^ρ box so that every vertex has p ≥ ε_p.

    Each vertex A^k of [0, Λ^ρ] is kept if admissible, otherwise scaled
    by the largest r found by bisection (rounded down to the admissible
    end) with p(q(rA^k)) ≥ ε_p. Λ_I is the minimum over vertices with
    k_I = 1 of their I-th coordinate.

    Args:
        q_lf: (8, *cells)
        C: (sides, 8, *cells)
        lam_rho: (sides, *cells)

    Returns:
        Λ with the shape of ``lam_rho``.

    Raises:
        PositivityFloorError: the pressure of q_LF is not above the floor
    """
    cells = q_lf.shape[1:]
    sides = C.shape[0]
    qf = np.ascontiguousarray(q_lf.reshape(physics.NCOMP, -1))
    Cf = np.ascontiguousarray(C.reshape(sides, physics.NCOMP, -1))
    lr = np.ascontiguousarray(lam_rho.reshape(sides, -1))
    if np.any(physics.raw_pressure(qf, gamma) <= floors.eps_p):
        raise PositivityFloorError("q_LF pressure at or below the floor")

    total = qf.shape[1]
    shrink = np.ones((sides, total))
    bits = np.array([[(k >> i) & 1 for i in range(sides)] for k in range(1, 2 ** sides)], dtype=float)

    def admissible(q: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            p = physics.raw_pressure(q, gamma)
        return (q[physics.RHO] > 0) & (p >= floors.eps_p)

    def sweep(lo: int, hi: int) -> None:
        q0 = qf[:, lo:hi]
        Cc = Cf[:, :, lo:hi]
        lam = lr[:, lo:hi]
        worst = np.ones((sides, hi - lo))
        for k in bits:
            vertex = k[:, None] * lam
            r = np.ones(hi - lo)
            bad = ~admissible(_vertex_states(q0, Cc, vertex))
            if bad.any():
                idx = np.flatnonzero(bad)
                low = np.zeros(idx.size)
                high = np.ones(idx.size)
                qb, Cb, vb = q0[:, idx], Cc[:, :, idx], vertex[:, idx]
                for _ in range(iterations):
                    mid = 0.5 * (low + high)
                    ok = admissible(_vertex_states(qb, Cb, mid[None] * vb))
                    low = np.where(ok, mid, low)
                    high = np.where(ok, high, mid)
                r[idx] = low
            on = k.astype(bool)
            worst[on] = np.minimum(worst[on], r[None])
        shrink[:, lo:hi] = worst

    chunk_map(sweep, total, threads=threads, chunk=4096)
    return (lr * shrink).reshape((sides,) + cells)


def combine_thetas(lam: np.ndarray, spec: GridSpec, periodic: Sequence[bool]) -> List[np.ndarray]:
    """θ per interface = min of the facing Λ values of the two adjacent cells.

    On periodic axes the boundary interfaces pair with the wrapped cell;
    otherwise they use the interior cell's Λ only.

    Args:
        lam: (2·ndim, *dims) per-side Λ of interior cells
        periodic: Per-axis flag

    Returns:
        One array per axis with ``dims[d] + 1`` entries along axis d.
    """
    thetas = []
    nd = spec.ndim
    for d in range(nd):
        low, high = lam[2 * d], lam[2 * d + 1]
        m = spec.dims[d]

        def part(a, start, stop):
            sl = [slice(None)] * nd
            sl[d] = slice(start, stop)
            return a[tuple(sl)]

        inner = np.minimum(part(high, 0, m - 1), part(low, 1, m))
        first = part(low, 0, 1)
        last = part(high, m - 1, m)
        if periodic[d]:
            first = np.minimum(first, part(high, m - 1, m))
            last = np.minimum(last, part(low, 0, 1))
        thetas.append(np.concatenate([first, inner, last], axis=d))
    return thetas


def apply_limited_fluxes(high: np.ndarray, low: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """F̃ = θ(F̂ - f̂) + f̂, θ broadcast over components."""
    return theta[None] * (high - low) + low


def limit_fluxes(q_lf: np.ndarray, high: Sequence[np.ndarray], low: Sequence[np.ndarray],
                 spec: GridSpec, dt: float, periodic: Sequence[bool], floors: PositivityFloors,
                 gamma: float = physics.GAMMA, threads: int = 1):
    """Full limiter pass: C vectors, Λ^ρ, pressure shrink, θ, blended fluxes.

    Returns:
        (limited interface fluxes per axis, θ per axis)
    """
    coeffs = limiter_coefficients(q_lf, high, low, spec, dt)
    lam_rho = lambda_density(coeffs.q_lf[physics.RHO], coeffs.C[:, physics.RHO], floors)
    lam = shrink_for_pressure(coeffs.q_lf, coeffs.C, lam_rho, floors, gamma, threads=threads)
    thetas = combine_thetas(lam, spec, periodic)
    limited = [apply_limited_fluxes(high[d], low[d], thetas[d]) for d in range(spec.ndim)]
    return limited, thetas
