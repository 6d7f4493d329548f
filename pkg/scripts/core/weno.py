"""
weno.py - Fifth-order WENO kernels

This module handles:
- The classical WENO5 interface value (Jiang–Shu weights)
- Hamilton-Jacobi one-sided derivatives built from divided differences
- Characteristic-wise reconstruction of interface fluxes with a global
  Lax-Friedrichs splitting
"""

from __future__ import annotations

from typing import Tuple

import numpy as np

from scripts.core import physics
from scripts.core.mesh import GridSpec, shifted
from scripts.utils.logging_helper import get_logger
from scripts.utils.parallel import chunk_map

log = get_logger()

EPS_WENO = 1e-6
LINEAR_WEIGHTS = (0.1, 0.6, 0.3)


def weno5(v1, v2, v3, v4, v5, eps: float = EPS_WENO):
    """Upwind WENO5 value at the right face of the centre cell ``v3``.

    The stencil runs from two cells upwind (``v1``) to two cells
    downwind (``v5``). Works elementwise on arrays.
    """
    p0 = (2.0 * v1 - 7.0 * v2 + 11.0 * v3) / 6.0
    p1 = (-v2 + 5.0 * v3 + 2.0 * v4) / 6.0
    p2 = (2.0 * v3 + 5.0 * v4 - v5) / 6.0

    b0 = 13.0 / 12.0 * (v1 - 2.0 * v2 + v3) ** 2 + 0.25 * (v1 - 4.0 * v2 + 3.0 * v3) ** 2
    b1 = 13.0 / 12.0 * (v2 - 2.0 * v3 + v4) ** 2 + 0.25 * (v2 - v4) ** 2
    b2 = 13.0 / 12.0 * (v3 - 2.0 * v4 + v5) ** 2 + 0.25 * (3.0 * v3 - 4.0 * v4 + v5) ** 2

    d0, d1, d2 = LINEAR_WEIGHTS
    a0 = d0 / (eps + b0) ** 2
    a1 = d1 / (eps + b1) ** 2
    a2 = d2 / (eps + b2) ** 2
    return (a0 * p0 + a1 * p1 + a2 * p2) / (a0 + a1 + a2)


def hj_weno_derivative(d1, d2, d3, d4, d5, eps: float = EPS_WENO):
    """WENO5 one-sided derivative from five divided differences.

    For the left-biased derivative at cell i pass (D_{i-3}, ..., D_{i+1});
    for the right-biased one pass (D_{i+2}, D_{i+1}, D_i, D_{i-1}, D_{i-2}),
    where D_k = (A_{k+1} - A_k)/Δx. The Hamilton-Jacobi combination is
    algebraically the WENO5 interface value of those differences.
    """
    return weno5(d1, d2, d3, d4, d5, eps)


def hj_one_sided_derivatives(A: np.ndarray, axis: int, h: float) -> Tuple[np.ndarray, np.ndarray]:
    """Return (∂A⁻, ∂A⁺) along array ``axis`` on the whole array.

    Values in the outer three layers on each side are wrap-around garbage.
    """
    D = (shifted(A, axis, 1) - A) / h
    Dm = [shifted(D, axis, k) for k in (-3, -2, -1, 0, 1)]
    minus = hj_weno_derivative(*Dm)
    Dp = [shifted(D, axis, k) for k in (2, 1, 0, -1, -2)]
    plus = hj_weno_derivative(*Dp)
    return minus, plus


def global_alpha(q: np.ndarray, spec: GridSpec, axis: int, gamma: float) -> float:
    """Largest signal speed along ``axis`` over interior cells."""
    return float(np.max(physics.max_signal_speed(q[spec.cinterior], axis, gamma)))


def reconstruct_interface(F: np.ndarray, q: np.ndarray, spec: GridSpec, axis: int,
                          alpha: float, gamma: float = physics.GAMMA, threads: int = 1,
                          chunk: int = 16384) -> np.ndarray:
    """Characteristic WENO5 reconstruction of interface fluxes along ``axis``.

    Each cell flux is split as F± = ½(F ± α q) with the single global α;
    the six cells around an interface are projected with the left
    eigenvectors at the interface mean state, reconstructed upwind (F⁺)
    and downwind (F⁻), and projected back.

    Args:
        F: Time-averaged cell fluxes, shape (8, *spec.shape)
        q: Boundary-filled state, shape (8, *spec.shape)
        spec: Grid with ghost >= 3
        axis: Direction of the interfaces
        alpha: Global splitting speed for this direction
        threads: Worker threads (results do not depend on this)

    Returns:
        Interface fluxes of shape (8, ...) with the interior extent in every
        transverse direction and ``dims[axis] + 1`` interfaces along ``axis``;
        entry j sits between interior cells j-1 and j.
    """
    g = spec.ghost
    if g < 3:
        raise ValueError("interface reconstruction needs ghost >= 3")
    m = spec.dims[axis]

    sel = [slice(None)] + [s if d != axis else slice(None) for d, s in enumerate(spec.interior)]
    Fa = np.moveaxis(F[tuple(sel)], 1 + axis, 1)
    qa = np.moveaxis(q[tuple(sel)], 1 + axis, 1)
    rest = Fa.shape[2:]
    Fa = Fa.reshape(physics.NCOMP, Fa.shape[1], -1)
    qa = qa.reshape(physics.NCOMP, qa.shape[1], -1)
    width = Fa.shape[2]
    total = (m + 1) * width
    out = np.empty((total, physics.NCOMP))

    def stencil(arr, j, r):
        # (n, 6, 8): cells k-2 .. k+3 around interface k+1/2, k = g-1+j
        return np.stack([arr[:, g - 3 + s + j, r].T for s in range(6)], axis=1)

    def sweep(lo: int, hi: int) -> None:
        j, r = np.divmod(np.arange(lo, hi), width)
        Fs = stencil(Fa, j, r)
        qs = stencil(qa, j, r)
        L, R, _ = physics.eigensystem(qs[:, 2].T, qs[:, 3].T, axis, gamma)
        wF = np.einsum("nij,nsj->nsi", L, Fs)
        wq = np.einsum("nij,nsj->nsi", L, qs)
        fplus = 0.5 * (wF + alpha * wq)
        fminus = 0.5 * (wF - alpha * wq)
        hp = weno5(*(fplus[:, s] for s in range(5)))
        hm = weno5(*(fminus[:, s] for s in (5, 4, 3, 2, 1)))
        out[lo:hi] = np.einsum("nij,nj->ni", R, hp + hm)

    chunk_map(sweep, total, threads=threads, chunk=chunk)

    flux_hat = out.T.reshape((physics.NCOMP, m + 1) + rest)
    return np.moveaxis(flux_hat, 1, 1 + axis)
