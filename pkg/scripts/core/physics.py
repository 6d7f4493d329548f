"""
physics.py - Ideal-MHD state algebra

This module handles:
- Conserved <-> primitive conversion and the ideal-gas EOS
- Physical fluxes along any axis
- Fast magnetosonic signal speeds
- The characteristic eigensystem of the flux Jacobian at an interface
- Directional flux derivatives (Jacobian-vector and Hessian forms) by
  state-space central differences

All functions are vectorised: a state is an array whose leading axis has
length 8 in the order (rho, rho u^x, rho u^y, rho u^z, E, B^x, B^y, B^z);
any trailing shape is carried through. Primitive states use
(rho, u^x, u^y, u^z, p, B^x, B^y, B^z).
"""

from __future__ import annotations

import numpy as np

from scripts.core.errors import DegenerateStateError
from scripts.utils.logging_helper import get_logger

log = get_logger()

GAMMA = 5.0 / 3.0
NCOMP = 8

RHO, MX, MY, MZ, ENER, BX, BY, BZ = range(NCOMP)
MOM = slice(MX, MZ + 1)
MAG = slice(BX, BZ + 1)

COMPONENT_NAMES = ("rho", "rho_ux", "rho_uy", "rho_uz", "energy", "Bx", "By", "Bz")

# first-order and second-order state-space step scales
JVP_EPS = 6e-6
HESS_EPS = 1e-4
MAX_EPS_HALVINGS = 20

# tangential direction fallback when |B_perp| is tiny
BETA_TOL = 1e-12


def _check_density(rho: np.ndarray, what: str) -> None:
    if np.any(rho == 0):
        raise DegenerateStateError(f"zero density in {what}")


def pressure(q: np.ndarray, gamma: float = GAMMA) -> np.ndarray:
    """Thermal pressure p = (γ-1)(E - ρ|u|²/2 - |B|²/2).

    Raises:
        DegenerateStateError: any density is exactly zero
    """
    q = np.asarray(q, dtype=float)
    _check_density(q[RHO], "pressure")
    return raw_pressure(q, gamma)


def raw_pressure(q: np.ndarray, gamma: float = GAMMA) -> np.ndarray:
    """Pressure without validation (limiter vertices, bisection points)."""
    kinetic = 0.5 * (q[MX] ** 2 + q[MY] ** 2 + q[MZ] ** 2) / q[RHO]
    magnetic = 0.5 * (q[BX] ** 2 + q[BY] ** 2 + q[BZ] ** 2)
    return (gamma - 1.0) * (q[ENER] - kinetic - magnetic)


def to_primitive(q: np.ndarray, gamma: float = GAMMA) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    _check_density(q[RHO], "to_primitive")
    w = np.empty_like(q)
    w[RHO] = q[RHO]
    w[MOM] = q[MOM] / q[RHO]
    w[ENER] = raw_pressure(q, gamma)
    w[MAG] = q[MAG]
    return w


def to_conserved(w: np.ndarray, gamma: float = GAMMA) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    q = np.empty_like(w)
    q[RHO] = w[RHO]
    q[MOM] = w[RHO] * w[MOM]
    q[ENER] = (w[ENER] / (gamma - 1.0)
               + 0.5 * w[RHO] * (w[1] ** 2 + w[2] ** 2 + w[3] ** 2)
               + 0.5 * (w[BX] ** 2 + w[BY] ** 2 + w[BZ] ** 2))
    q[MAG] = w[MAG]
    return q


def is_admissible(q: np.ndarray, gamma: float = GAMMA, eps_rho: float = 0.0,
                  eps_p: float = 0.0) -> np.ndarray:
    """Boolean mask of states with ρ > eps_rho and p > eps_p."""
    q = np.asarray(q, dtype=float)
    ok = q[RHO] > eps_rho
    with np.errstate(divide="ignore", invalid="ignore"):
        p = raw_pressure(q, gamma)
    return ok & (p > eps_p)


def flux(q: np.ndarray, axis: int, gamma: float = GAMMA) -> np.ndarray:
    """Physical flux of the ideal-MHD system along ``axis``."""
    q = np.asarray(q, dtype=float)
    rho = q[RHO]
    u = q[MOM] / rho
    B = q[MAG]
    p = raw_pressure(q, gamma)
    ptot = p + 0.5 * (B[0] ** 2 + B[1] ** 2 + B[2] ** 2)
    uB = u[0] * B[0] + u[1] * B[1] + u[2] * B[2]
    un = u[axis]
    Bn = B[axis]

    f = np.empty_like(q)
    f[RHO] = q[MX + axis]
    for i in range(3):
        f[MX + i] = q[MX + i] * un - B[i] * Bn
    f[MX + axis] += ptot
    f[ENER] = un * (q[ENER] + ptot) - Bn * uB
    for i in range(3):
        f[BX + i] = un * B[i] - Bn * u[i]
    return f


def wave_speeds(q: np.ndarray, axis: int, gamma: float = GAMMA):
    """Return (c_s, c_a, c_f) along ``axis`` for admissible states.

    Raises:
        DegenerateStateError: non-positive density or negative pressure
    """
    q = np.asarray(q, dtype=float)
    rho = q[RHO]
    if np.any(rho <= 0):
        raise DegenerateStateError("non-positive density in wave speed evaluation")
    p = raw_pressure(q, gamma)
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise DegenerateStateError("negative or non-finite pressure in wave speed evaluation")
    a2 = gamma * p / rho
    b2 = (q[BX] ** 2 + q[BY] ** 2 + q[BZ] ** 2) / rho
    bn2 = q[BX + axis] ** 2 / rho
    s = a2 + b2
    root = np.sqrt(np.maximum(s * s - 4.0 * a2 * bn2, 0.0))
    cf2 = 0.5 * (s + root)
    cs2 = np.maximum(0.5 * (s - root), 0.0)
    return np.sqrt(cs2), np.sqrt(bn2), np.sqrt(cf2)


def max_signal_speed(q: np.ndarray, axis: int, gamma: float = GAMMA) -> np.ndarray:
    """|u_axis| + c_f, the largest characteristic speed magnitude."""
    _, _, cf = wave_speeds(q, axis, gamma)
    return np.abs(q[MX + axis] / q[RHO]) + cf


# ── eigensystem ──────────────────────────────────────────────────────────
def _rotation(axis: int):
    """Normal and the two tangential axes in cyclic order."""
    return axis, (axis + 1) % 3, (axis + 2) % 3


def eigensystem(qL: np.ndarray, qR: np.ndarray, axis: int, gamma: float = GAMMA):
    """Characteristic decomposition of the ``axis`` flux Jacobian.

    Evaluated at the arithmetic mean of ``qL`` and ``qR``. Right
    eigenvectors follow the Roe–Balsara normalisation in primitive
    variables, mapped to conserved variables through ∂q/∂w; the left
    eigenvectors are their numerical inverse.

    Args:
        qL, qR: States of shape (8, ...)
        axis: 0, 1 or 2

    Returns:
        (L, R, speeds) with shapes (..., 8, 8), (..., 8, 8), (..., 8).
        Columns of R (rows of L) are ordered u-c_f, u-c_a, u-c_s, u,
        u+c_s, u+c_a, u+c_f, then the normal-field wave with speed 0.
        Only the first seven speeds are ascending; the eighth is always
        zero and sits last whatever the sign of u.

    Raises:
        DegenerateStateError: the mean state is not admissible
    """
    qm = 0.5 * (np.asarray(qL, dtype=float) + np.asarray(qR, dtype=float))
    batch = qm.shape[1:]
    qm = qm.reshape(NCOMP, -1)
    rho = qm[RHO]
    if np.any(rho <= 0):
        raise DegenerateStateError("non-positive density in interface mean state")
    w = to_primitive(qm, gamma)
    p = w[ENER]
    if np.any(p <= 0) or not np.all(np.isfinite(p)):
        raise DegenerateStateError("non-positive pressure in interface mean state")

    n, t1, t2 = _rotation(axis)
    vn, vt1, vt2 = w[1 + n], w[1 + t1], w[1 + t2]
    Bn, Bt1, Bt2 = w[BX + n], w[BX + t1], w[BX + t2]

    sq = np.sqrt(rho)
    a2 = gamma * p / rho
    a = np.sqrt(a2)
    ca2 = Bn ** 2 / rho
    bt2 = (Bt1 ** 2 + Bt2 ** 2) / rho
    s = a2 + ca2 + bt2
    root = np.sqrt(np.maximum(s * s - 4.0 * a2 * ca2, 0.0))
    cf2 = 0.5 * (s + root)
    cs2 = np.maximum(0.5 * (s - root), 0.0)
    cf, cs, ca = np.sqrt(cf2), np.sqrt(cs2), np.sqrt(ca2)

    Bt = np.sqrt(Bt1 ** 2 + Bt2 ** 2)
    Bmag = np.sqrt(Bn ** 2 + Bt ** 2)
    flat = Bt < BETA_TOL * (1.0 + Bmag)
    safe_Bt = np.where(flat, 1.0, Bt)
    beta1 = np.where(flat, np.sqrt(0.5), Bt1 / safe_Bt)
    beta2 = np.where(flat, np.sqrt(0.5), Bt2 / safe_Bt)

    spread = cf2 - cs2
    triple = spread < BETA_TOL * s
    safe_spread = np.where(triple, 1.0, spread)
    alpha_f = np.where(triple, 1.0, np.sqrt(np.clip((a2 - cs2) / safe_spread, 0.0, 1.0)))
    alpha_s = np.where(triple, 0.0, np.sqrt(np.clip((cf2 - a2) / safe_spread, 0.0, 1.0)))

    sgn = np.where(Bn >= 0, 1.0, -1.0)
    Cff, Css = cf * alpha_f, cs * alpha_s
    Qf, Qs = Cff * sgn, Css * sgn
    Af, As = a * alpha_f * sq, a * alpha_s * sq

    m = rho.shape[0]
    zero = np.zeros(m)
    one = np.ones(m)

    # primitive right eigenvectors, rows (rho, vn, vt1, vt2, p, Bn, Bt1, Bt2)
    cols = [
        [rho * alpha_f, -Cff, Qs * beta1, Qs * beta2, rho * a2 * alpha_f, zero, As * beta1, As * beta2],
        [zero, zero, -beta2, beta1, zero, zero, -beta2 * sgn * sq, beta1 * sgn * sq],
        [rho * alpha_s, -Css, -Qf * beta1, -Qf * beta2, rho * a2 * alpha_s, zero, -Af * beta1, -Af * beta2],
        [one, zero, zero, zero, zero, zero, zero, zero],
        [rho * alpha_s, Css, Qf * beta1, Qf * beta2, rho * a2 * alpha_s, zero, -Af * beta1, -Af * beta2],
        [zero, zero, -beta2, beta1, zero, zero, beta2 * sgn * sq, -beta1 * sgn * sq],
        [rho * alpha_f, Cff, -Qs * beta1, -Qs * beta2, rho * a2 * alpha_f, zero, As * beta1, As * beta2],
        [zero, zero, zero, zero, zero, one, zero, zero],
    ]
    Rw = np.stack([np.stack(c, axis=-1) for c in cols], axis=-1)  # (m, row, col)

    # ∂q/∂w in the rotated frame
    M = np.zeros((m, NCOMP, NCOMP))
    M[:, 0, 0] = 1.0
    M[:, 1, 0], M[:, 1, 1] = vn, rho
    M[:, 2, 0], M[:, 2, 2] = vt1, rho
    M[:, 3, 0], M[:, 3, 3] = vt2, rho
    M[:, 4, 0] = 0.5 * (vn ** 2 + vt1 ** 2 + vt2 ** 2)
    M[:, 4, 1], M[:, 4, 2], M[:, 4, 3] = rho * vn, rho * vt1, rho * vt2
    M[:, 4, 4] = 1.0 / (gamma - 1.0)
    M[:, 4, 5], M[:, 4, 6], M[:, 4, 7] = Bn, Bt1, Bt2
    M[:, 5, 5] = M[:, 6, 6] = M[:, 7, 7] = 1.0

    Rrot = M @ Rw
    perm = [RHO, MX + n, MX + t1, MX + t2, ENER, BX + n, BX + t1, BX + t2]
    R = np.empty_like(Rrot)
    R[:, perm, :] = Rrot
    L = np.linalg.inv(R)

    speeds = np.stack([vn - cf, vn - ca, vn - cs, vn, vn + cs, vn + ca, vn + cf, zero], axis=-1)
    return (L.reshape(batch + (NCOMP, NCOMP)), R.reshape(batch + (NCOMP, NCOMP)),
            speeds.reshape(batch + (NCOMP,)))


# ── directional derivatives ──────────────────────────────────────────────
def _inadmissible_pair(q: np.ndarray, v: np.ndarray, eps: np.ndarray, gamma: float) -> np.ndarray:
    """Cells where q ± εv loses a density or pressure that q itself has."""
    bad = np.zeros(q.shape[1:], dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        p0 = raw_pressure(q, gamma)
        for sign in (1.0, -1.0):
            qs = q + sign * eps * v
            bad |= qs[RHO] <= 0
            bad |= (p0 > 0) & ~(raw_pressure(qs, gamma) > 0)
    return bad


def flux_dir_derivative(q: np.ndarray, v: np.ndarray, axis: int, gamma: float = GAMMA,
                        order: int = 1) -> np.ndarray:
    """Directional derivative of the ``axis`` flux along ``v``.

    order 1: J(q)·v ≈ (f(q+εv) - f(q-εv)) / 2ε
    order 2: H(q)[v, v] ≈ (f(q+εv) - 2f(q) + f(q-εv)) / ε²

    ε is scaled per cell as base·max(1, |q|)/|v| and halved (up to
    MAX_EPS_HALVINGS times) where a perturbed density or pressure would
    be ≤ 0 while the unperturbed one is positive.

    Raises:
        DegenerateStateError: a perturbed state stays inadmissible
    """
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    qn = np.sqrt(np.sum(q * q, axis=0))
    vn = np.sqrt(np.sum(v * v, axis=0))
    live = vn > 0
    base = JVP_EPS if order == 1 else HESS_EPS
    eps = np.where(live, base * np.maximum(1.0, qn) / np.where(live, vn, 1.0), 0.0)

    bad = live & _inadmissible_pair(q, v, eps, gamma)
    halvings = 0
    while np.any(bad):
        if halvings == MAX_EPS_HALVINGS:
            raise DegenerateStateError("perturbed state stays inadmissible in flux derivative")
        eps = np.where(bad, 0.5 * eps, eps)
        halvings += 1
        bad = live & _inadmissible_pair(q, v, eps, gamma)
    if halvings:
        log.warning("flux derivative step shrunk %d times to keep the perturbed states admissible",
                    halvings)

    fp = flux(q + eps * v, axis, gamma)
    fm = flux(q - eps * v, axis, gamma)
    safe = np.where(live, eps, 1.0)
    if order == 1:
        out = (fp - fm) / (2.0 * safe)
    else:
        out = (fp - 2.0 * flux(q, axis, gamma) + fm) / (safe * safe)
    return np.where(live, out, 0.0)
