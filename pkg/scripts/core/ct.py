"""
ct.py - Unstaggered constrained transport

This module handles:
- The Hamilton-Jacobi right-hand side of the Weyl-gauge potential
  equation A_t = u × (∇ × A): Lax-Friedrichs numerical Hamiltonian on
  WENO one-sided derivatives (2D), plus the product terms, own-direction
  dissipation and artificial resistivity of the weakly hyperbolic 3D system
- The Lax-Wendroff (third-order Taylor) potential step, whose second and
  third time derivatives come from a Cauchy-Kovalevskaya expansion
  evaluated with compact central stencils
- The fourth-order discrete curl that replaces B
- The energy correction applied when the magnetic field is replaced

Potential arrays are component-major: (1, *shape) holding A^z in 2D and
(3, *shape) holding (A^x, A^y, A^z) in 3D.
"""

from __future__ import annotations

from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from scripts.core import physics
from scripts.core.mesh import GridSpec, d4, shifted
from scripts.core.weno import hj_one_sided_derivatives
from scripts.utils.logging_helper import get_logger

log = get_logger()

EPS_SMOOTH = 1e-8


class ResistivityParams(BaseModel):
    """Artificial resistivity of the 3D potential update."""

    model_config = ConfigDict(frozen=True)

    nu: float = 0.01
    eps_smooth: float = EPS_SMOOTH

    @field_validator("nu")
    @classmethod
    def _nu_non_negative(cls, v: float) -> float:
        if v < 0:
            raise ValueError(f"nu must be >= 0, got {v}")
        return v

    @field_validator("eps_smooth")
    @classmethod
    def _eps_positive(cls, v: float) -> float:
        if not v > 0:
            raise ValueError(f"eps_smooth must be > 0, got {v}")
        return v


def potential_components(ndim: int) -> Tuple[int, ...]:
    """Vector components of A stored on a grid of dimension ``ndim``."""
    return (2,) if ndim == 2 else (0, 1, 2)


def velocity(q: np.ndarray) -> np.ndarray:
    return q[physics.MOM] / q[physics.RHO]


def velocity_alphas(q: np.ndarray, spec: GridSpec) -> Tuple[float, ...]:
    """Global max |u^d| over interior cells, the Hamiltonian's dissipation speeds."""
    u = velocity(q[spec.cinterior])
    return tuple(float(np.max(np.abs(u[d]))) for d in range(spec.ndim))


# ── first time derivative ────────────────────────────────────────────────
def hj_rhs_2d(A: np.ndarray, u: np.ndarray, alphas: Sequence[float],
              spec: GridSpec) -> np.ndarray:
    """∂_t A^z from the Lax-Friedrichs numerical Hamiltonian.

    H = u^x (∂xA⁻ + ∂xA⁺)/2 + u^y (∂yA⁻ + ∂yA⁺)/2
        - α^x (∂xA⁺ - ∂xA⁻)/2 - α^y (∂yA⁺ - ∂yA⁻)/2,   ∂_t A^z = -H.

    Args:
        A: (1, *shape) or (*shape) potential, boundary-filled
        u: Velocity (3, *shape)
        alphas: (α^x, α^y)

    Returns:
        Array of A's cell shape; the outer three layers are garbage.
    """
    Az = A[0] if A.ndim == spec.ndim + 1 else A
    rhs = np.zeros_like(Az)
    for d in range(2):
        dm, dp = hj_one_sided_derivatives(Az, d, spec.widths[d])
        rhs -= u[d] * 0.5 * (dm + dp)
        rhs += alphas[d] * 0.5 * (dp - dm)
    return rhs


def smoothness_gamma(dA_minus, dA_plus, dx: float, eps_smooth: float = EPS_SMOOTH):
    """γ = |a⁻/(a⁻ + a⁺) - ½| with a^∓ = (ε + (Δx ∂A^∓)²)^-2, in [0, ½]."""
    am = (eps_smooth + (dx * dA_minus) ** 2) ** -2
    ap = (eps_smooth + (dx * dA_plus) ** 2) ** -2
    return np.abs(am / (am + ap) - 0.5)


def hj_rhs_3d(A: np.ndarray, u: np.ndarray, alphas: Sequence[float],
              res: ResistivityParams, dt: float, spec: GridSpec) -> np.ndarray:
    """∂_t A for the 3D potential, per component a:

    Σ_{b≠a} [ -u^b (∂_b A^a⁻ + ∂_b A^a⁺)/2 + α^b (∂_b A^a⁺ - ∂_b A^a⁻)/2
              + u^b (∂_a A^b⁻ + ∂_a A^b⁺)/2 ]
    + 2 ν γ^a (A^a_{-1} - 2 A^a + A^a_{+1}) / Δt   (second difference along a)

    Returns:
        (3, *shape); the outer three layers are garbage.
    """
    if not dt > 0:
        raise ValueError("resistive potential update needs dt > 0")
    one_sided: Dict[Tuple[int, int], Tuple[np.ndarray, np.ndarray]] = {}
    for comp in range(3):
        for d in range(3):
            one_sided[(comp, d)] = hj_one_sided_derivatives(A[comp], d, spec.widths[d])

    rhs = np.zeros_like(A)
    for a in range(3):
        for b in range(3):
            if b == a:
                continue
            own_m, own_p = one_sided[(a, b)]
            cross_m, cross_p = one_sided[(b, a)]
            rhs[a] -= u[b] * 0.5 * (own_m + own_p)
            rhs[a] += alphas[b] * 0.5 * (own_p - own_m)
            rhs[a] += u[b] * 0.5 * (cross_m + cross_p)
        if res.nu > 0:
            dm, dp = one_sided[(a, a)]
            gam = smoothness_gamma(dm, dp, spec.widths[a], res.eps_smooth)
            second = shifted(A[a], a, -1) - 2.0 * A[a] + shifted(A[a], a, 1)
            rhs[a] += 2.0 * res.nu * gam * second / dt
    return rhs


# ── Cauchy-Kovalevskaya expansion ────────────────────────────────────────
class CentralStencils:
    """Compact central differences up to third order on a uniform grid.

    ``derivative(U, axes)`` returns ∂_{axes} U for a cell array U, where
    ``axes`` lists one to three grid axes (repeats allowed). Only
    immediate neighbours are used except for the pure third derivative,
    which reaches two cells out.
    """

    def __init__(self, spec: GridSpec):
        self.h = spec.widths
        self.ndim = spec.ndim

    def _at(self, U: np.ndarray, offsets: Dict[int, int]) -> np.ndarray:
        out = U
        for ax, k in offsets.items():
            out = shifted(out, ax, k)
        return out

    def derivative(self, U: np.ndarray, axes: Sequence[int]) -> np.ndarray:
        counts: Dict[int, int] = {}
        for ax in axes:
            counts[ax] = counts.get(ax, 0) + 1
        order = len(axes)
        h = self.h

        if order == 1:
            (a,) = counts
            return (self._at(U, {a: 1}) - self._at(U, {a: -1})) / (2.0 * h[a])

        if order == 2:
            if len(counts) == 1:
                (a,) = counts
                return (self._at(U, {a: -1}) - 2.0 * U + self._at(U, {a: 1})) / h[a] ** 2
            a, b = sorted(counts)
            return (self._at(U, {a: 1, b: 1}) - self._at(U, {a: 1, b: -1})
                    - self._at(U, {a: -1, b: 1}) + self._at(U, {a: -1, b: -1})) / (4.0 * h[a] * h[b])

        if order == 3:
            if len(counts) == 1:
                (a,) = counts
                return (-self._at(U, {a: -2}) + 2.0 * self._at(U, {a: -1})
                        - 2.0 * self._at(U, {a: 1}) + self._at(U, {a: 2})) / (2.0 * h[a] ** 3)
            if len(counts) == 2:
                a = next(ax for ax, c in counts.items() if c == 2)
                b = next(ax for ax, c in counts.items() if c == 1)
                return (2.0 * self._at(U, {b: -1}) - 2.0 * self._at(U, {b: 1})
                        - self._at(U, {a: -1, b: -1}) + self._at(U, {a: -1, b: 1})
                        - self._at(U, {a: 1, b: -1}) + self._at(U, {a: 1, b: 1})) / (2.0 * h[a] ** 2 * h[b])
            a, b, c = sorted(counts)
            total = 0.0
            for sa in (-1, 1):
                for sb in (-1, 1):
                    for sc in (-1, 1):
                        total = total + sa * sb * sc * self._at(U, {a: sa, b: sb, c: sc})
            return total / (8.0 * h[a] * h[b] * h[c])

        raise ValueError(f"no central stencil for derivative order {order}")


def _is_zero(x) -> bool:
    return isinstance(x, float) and x == 0.0


def _mul(*factors):
    out = 1.0
    for f in factors:
        if _is_zero(f):
            return 0.0
        out = out * f
    return out


class CauchyKovalevskaya:
    """Second and third time derivatives of A under A_t^a = Σ_b u^b W(a,b).

    W(a,b) = ∂_a A^b - ∂_b A^a. Derivatives along axes the grid does not
    have, and potential components it does not store, are the float 0.0
    and drop out of every product. All spatial derivatives are memoised.

    Args:
        stencils: Central stencil table of the grid
        A: Potential components, mapping vector index -> cell array
        u, u_t, u_tt: Velocity and its first two time derivatives (3, *shape)
    """

    def __init__(self, stencils: CentralStencils, A: Dict[int, np.ndarray],
                 u: np.ndarray, u_t: np.ndarray, u_tt: np.ndarray):
        self.st = stencils
        self.nd = stencils.ndim
        self.A = A
        self.u, self.u_t, self.u_tt = u, u_t, u_tt
        self._d: Dict[tuple, object] = {}
        self._dAt: Dict[tuple, object] = {}
        self._dAtt: Dict[tuple, object] = {}
        self._ddAt: Dict[tuple, object] = {}

    def _deriv(self, key, field, axes):
        axes = tuple(sorted(axes))
        if any(ax >= self.nd for ax in axes):
            return 0.0
        k = (key, axes)
        if k not in self._d:
            self._d[k] = self.st.derivative(field, axes)
        return self._d[k]

    def dA(self, axes, comp):
        if comp not in self.A:
            return 0.0
        return self._deriv(("A", comp), self.A[comp], axes)

    def du(self, axes, comp):
        return self._deriv(("u", comp), self.u[comp], axes)

    def dut(self, axes, comp):
        return self._deriv(("ut", comp), self.u_t[comp], axes)

    def W(self, a, b):
        if a == b:
            return 0.0
        return self.dA((a,), b) - self.dA((b,), a)

    def dW(self, c, a, b):
        """∂_c W(a,b)."""
        if a == b:
            return 0.0
        return self.dA((c, a), b) - self.dA((c, b), a)

    def ddW(self, c, d, a, b):
        """∂_c ∂_d W(a,b)."""
        if a == b:
            return 0.0
        return self.dA((c, d, a), b) - self.dA((c, d, b), a)

    def A_t(self, a):
        return sum((_mul(self.u[b], self.W(a, b)) for b in range(3)), 0.0)

    def dAt(self, c, d):
        """∂_c A_t^d."""
        if c >= self.nd:
            return 0.0
        key = (c, d)
        if key not in self._dAt:
            total = 0.0
            for e in range(3):
                total = total + _mul(self.du((c,), e), self.W(d, e)) + _mul(self.u[e], self.dW(c, d, e))
            self._dAt[key] = total
        return self._dAt[key]

    def ddAt(self, c, d, e):
        """∂_c ∂_d A_t^e."""
        if c >= self.nd or d >= self.nd:
            return 0.0
        key = (min(c, d), max(c, d), e)
        if key not in self._ddAt:
            total = 0.0
            for f in range(3):
                total = (total
                         + _mul(self.du((c, d), f), self.W(e, f))
                         + _mul(self.du((c,), f), self.dW(d, e, f))
                         + _mul(self.du((d,), f), self.dW(c, e, f))
                         + _mul(self.u[f], self.ddW(c, d, e, f)))
            self._ddAt[key] = total
        return self._ddAt[key]

    def dAtt(self, c, d):
        """∂_c A_tt^d."""
        if c >= self.nd:
            return 0.0
        key = (c, d)
        if key not in self._dAtt:
            total = 0.0
            for e in range(3):
                if e == d:
                    continue
                total = (total
                         + _mul(self.dut((c,), e), self.W(d, e))
                         + _mul(self.u_t[e], self.dW(c, d, e))
                         + _mul(self.du((c,), e), self.dAt(d, e) - self.dAt(e, d))
                         + _mul(self.u[e], self.ddAt(c, d, e) - self.ddAt(c, e, d)))
            self._dAtt[key] = total
        return self._dAtt[key]

    def A_tt(self, a):
        total = 0.0
        for b in range(3):
            if b == a:
                continue
            total = (total + _mul(self.u_t[b], self.W(a, b))
                     + _mul(self.u[b], self.dAt(a, b) - self.dAt(b, a)))
        return total

    def A_ttt(self, a):
        total = 0.0
        for b in range(3):
            if b == a:
                continue
            total = (total + _mul(self.u_tt[b], self.W(a, b))
                     + _mul(2.0 * self.u_t[b], self.dAt(a, b) - self.dAt(b, a))
                     + _mul(self.u[b], self.dAtt(a, b) - self.dAtt(b, a)))
        return total


def velocity_time_derivatives(q: np.ndarray, q_t: np.ndarray, q_tt: np.ndarray):
    """u, u_t and u_tt from the state and its Taylor coefficients.

    u_t = (m_t - u ρ_t)/ρ,  u_tt = (m_tt - u ρ_tt - 2 u_t ρ_t)/ρ.
    """
    rho, rho_t, rho_tt = q[physics.RHO], q_t[physics.RHO], q_tt[physics.RHO]
    u = q[physics.MOM] / rho
    u_t = (q_t[physics.MOM] - u * rho_t) / rho
    u_tt = (q_tt[physics.MOM] - u * rho_tt - 2.0 * u_t * rho_t) / rho
    return u, u_t, u_tt


def _as_array(x, like: np.ndarray) -> np.ndarray:
    return np.zeros_like(like) if _is_zero(x) else x


def potential_taylor_step(A: np.ndarray, q: np.ndarray, q_t: np.ndarray, q_tt: np.ndarray,
                          spec: GridSpec, dt: float, res: Optional[ResistivityParams] = None,
                          alphas: Optional[Sequence[float]] = None) -> np.ndarray:
    """A^{n+1} = A + Δt A_t + Δt²/2 A_tt + Δt³/6 A_ttt.

    A_t is the WENO Hamilton-Jacobi right-hand side (with resistivity in
    3D); A_tt and A_ttt come from the Cauchy-Kovalevskaya expansion with
    u_t, u_tt taken from the fluid's q_t, q_tt.

    Args:
        A: Boundary-filled potential, (1, *shape) in 2D or (3, *shape) in 3D
        q, q_t, q_tt: State and its time derivatives (8, *shape)
        spec: Grid (2D or 3D)
        dt: Time step
        res: Resistivity (3D only; defaults to ν = 0.01)
        alphas: HJ dissipation speeds; max |u^d| over the interior if None

    Returns:
        New potential, valid at least three cells in from the array edge.
    """
    if spec.ndim not in (2, 3):
        raise ValueError(f"potential update needs a 2D or 3D grid, got {spec.ndim}D")
    alphas = velocity_alphas(q, spec) if alphas is None else alphas
    u, u_t, u_tt = velocity_time_derivatives(q, q_t, q_tt)
    comps = potential_components(spec.ndim)

    if spec.ndim == 2:
        first = hj_rhs_2d(A, u, alphas, spec)[None]
    else:
        first = hj_rhs_3d(A, u, alphas, res or ResistivityParams(), dt, spec)

    ck = CauchyKovalevskaya(CentralStencils(spec), {c: A[i] for i, c in enumerate(comps)},
                            u, u_t, u_tt)
    out = np.empty_like(A)
    for i, c in enumerate(comps):
        a_tt = _as_array(ck.A_tt(c), A[i])
        a_ttt = _as_array(ck.A_ttt(c), A[i])
        out[i] = A[i] + dt * first[i] + (0.5 * dt * dt) * a_tt + (dt ** 3 / 6.0) * a_ttt
    return out


def potential_taylor_step_2d(A, q, q_t, q_tt, spec, dt, alphas=None):
    return potential_taylor_step(A, q, q_t, q_tt, spec, dt, alphas=alphas)


def potential_taylor_step_3d(A, q, q_t, q_tt, spec, dt, res=None, alphas=None):
    return potential_taylor_step(A, q, q_t, q_tt, spec, dt, res=res, alphas=alphas)


# ── curl, divergence, energy ─────────────────────────────────────────────
def curl_B(A: np.ndarray, spec: GridSpec) -> np.ndarray:
    """Fourth-order discrete curl of the potential.

    Returns (2, *shape) = (B^x, B^y) in 2D and (3, *shape) in 3D.
    """
    h = spec.widths
    if spec.ndim == 2:
        Az = A[0]
        return np.stack([d4(Az, 1, h[1]), -d4(Az, 0, h[0])])
    Ax, Ay, Az = A
    return np.stack([
        d4(Az, 1, h[1]) - d4(Ay, 2, h[2]),
        d4(Ax, 2, h[2]) - d4(Az, 0, h[0]),
        d4(Ay, 0, h[0]) - d4(Ax, 1, h[1]),
    ])


def energy_correction(E_star: np.ndarray, B_star: np.ndarray, B_new: np.ndarray) -> np.ndarray:
    """ℰ = ℰ* + ½(|B_new|² - |B*|²), which leaves the pressure unchanged."""
    return E_star + 0.5 * (np.sum(B_new * B_new, axis=0) - np.sum(B_star * B_star, axis=0))
