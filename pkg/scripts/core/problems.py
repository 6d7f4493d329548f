"""
problems.py - Initial-condition catalog

This module handles:
- ProblemSpec records (domain, boundary policies, γ, CT/limiter needs,
  rotation angles, default final time and mesh) for every problem id
- Initial conserved state and magnetic potential on a grid
- Exact solutions for the travelling Alfvén waves
- Additive periodic jumps of potentials that carry a mean field
"""

from __future__ import annotations

import math
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from scripts.core import physics
from scripts.core.errors import InvalidGridError
from scripts.core.mesh import GridSpec, build_grid

PHI = math.atan(0.5)
THETA = math.atan(0.5)
SQRT_4PI = math.sqrt(4.0 * math.pi)


class ProblemSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: str
    dim: int
    bounds: Tuple[Tuple[float, float], ...]
    q_boundary: str
    a_boundary: str
    gamma: float = physics.GAMMA
    ct_required: bool = True
    pp_required: bool = False
    phi: Optional[float] = None
    theta_rot: Optional[float] = None
    t_final: float
    default_mesh: Tuple[int, ...]
    description: str = ""

    @property
    def periodic(self) -> bool:
        return self.q_boundary == "periodic"


def _alfven2d_bounds() -> Tuple[Tuple[float, float], ...]:
    return ((0.0, 1.0 / math.cos(PHI)), (0.0, 1.0 / math.sin(PHI)))


def _alfven3d_bounds() -> Tuple[Tuple[float, float], ...]:
    cp, sp, ct, st = math.cos(PHI), math.sin(PHI), math.cos(THETA), math.sin(THETA)
    return ((0.0, 1.0 / (cp * ct)), (0.0, 1.0 / (sp * ct)), (0.0, 1.0 / st))


CATALOG: Dict[str, ProblemSpec] = {
    p.id: p for p in [
        ProblemSpec(id="alfven2d", dim=2, bounds=_alfven2d_bounds(), q_boundary="periodic",
                    a_boundary="periodic", phi=PHI, t_final=1.0, default_mesh=(32, 64),
                    description="Smooth circularly polarised Alfvén wave, rotated by arctan(1/2)"),
        ProblemSpec(id="alfven3d", dim=3, bounds=_alfven3d_bounds(), q_boundary="periodic",
                    a_boundary="periodic", phi=PHI, theta_rot=THETA, t_final=1.0,
                    default_mesh=(16, 32, 32),
                    description="Alfvén wave travelling along a doubly rotated direction"),
        ProblemSpec(id="shocktube2d", dim=2, bounds=((-1.2, 1.2), (-1.0, 1.0)),
                    q_boundary="extrap0", a_boundary="extrap1", phi=PHI, t_final=0.3,
                    default_mesh=(180, 150),
                    description="Rotated Brio-Wu type shock tube"),
        ProblemSpec(id="orszagtang", dim=2, bounds=((0.0, 2 * math.pi), (0.0, 2 * math.pi)),
                    q_boundary="periodic", a_boundary="periodic", t_final=3.0,
                    default_mesh=(192, 192), description="Orszag-Tang vortex"),
        ProblemSpec(id="rotor", dim=2, bounds=((0.0, 1.0), (0.0, 1.0)), q_boundary="extrap0",
                    a_boundary="extrap1", pp_required=True, t_final=0.27,
                    default_mesh=(200, 200), description="Very low β rotor"),
        ProblemSpec(id="cloudshock2d", dim=2, bounds=((0.0, 1.0), (0.0, 1.0)),
                    q_boundary="extrap0", a_boundary="extrap1", pp_required=True,
                    t_final=0.06, default_mesh=(128, 128),
                    description="Shock hitting a dense cloud"),
        ProblemSpec(id="cloudshock3d", dim=3, bounds=((0.0, 1.0),) * 3, q_boundary="extrap0",
                    a_boundary="extrap1", pp_required=True, t_final=0.06,
                    default_mesh=(64, 64, 64), description="Shock hitting a dense sphere"),
        ProblemSpec(id="blast2d", dim=2, bounds=((-0.5, 0.5),) * 2, q_boundary="extrap0",
                    a_boundary="extrap1", pp_required=True, t_final=0.01,
                    default_mesh=(128, 128), description="Blast wave in a low β background"),
        ProblemSpec(id="blast3d", dim=3, bounds=((-0.5, 0.5),) * 3, q_boundary="extrap0",
                    a_boundary="extrap1", pp_required=True, t_final=0.01,
                    default_mesh=(75, 75, 75), description="Spherical blast wave, low β"),
    ]
}


def get_problem(problem_id: str) -> ProblemSpec:
    try:
        return CATALOG[problem_id]
    except KeyError:
        raise KeyError(f"unknown problem '{problem_id}'; choose from {', '.join(CATALOG)}") from None


def problem_grid(problem: ProblemSpec, mesh: Optional[Tuple[int, ...]] = None) -> GridSpec:
    return build_grid(mesh or problem.default_mesh, problem.bounds)


def _check_grid(problem: ProblemSpec, grid: GridSpec) -> None:
    if grid.ndim != problem.dim:
        raise InvalidGridError(f"{problem.id} is {problem.dim}D, grid is {grid.ndim}D")
    if not np.allclose(np.array(grid.bounds), np.array(problem.bounds), rtol=1e-12, atol=1e-12):
        raise InvalidGridError(f"{problem.id} needs domain {problem.bounds}, got {grid.bounds}")


def _primitive(grid: GridSpec) -> np.ndarray:
    return np.zeros((physics.NCOMP,) + grid.shape)


# ── Alfvén waves ─────────────────────────────────────────────────────────
def _alfven_basis(dim: int):
    if dim == 2:
        cp, sp = math.cos(PHI), math.sin(PHI)
        return np.array([cp, sp, 0.0]), np.array([-sp, cp, 0.0]), np.array([0.0, 0.0, 1.0])
    cp, sp, ct, st = math.cos(PHI), math.sin(PHI), math.cos(THETA), math.sin(THETA)
    e1 = np.array([cp * ct, sp * ct, -st])
    e2 = np.array([-sp, cp, 0.0])
    return e1, e2, np.cross(e1, e2)


def _project(vec: np.ndarray, xs) -> np.ndarray:
    return sum(vec[d] * xs[d] for d in range(len(xs)))


def _alfven(problem: ProblemSpec, grid: GridSpec, t: float = 0.0):
    e1, e2, e3 = _alfven_basis(problem.dim)
    xs = grid.coordinates()
    xi = _project(e1, xs) + t
    eta = _project(e2, xs)
    two_pi = 2.0 * math.pi
    s, c = np.sin(two_pi * xi), np.cos(two_pi * xi)

    w = _primitive(grid)
    w[physics.RHO] = 1.0
    w[physics.ENER] = 0.1
    for i in range(3):
        w[1 + i] = 0.1 * s * e2[i] + 0.1 * c * e3[i]
        w[physics.BX + i] = e1[i] + 0.1 * s * e2[i] + 0.1 * c * e3[i]
    q = physics.to_conserved(w, problem.gamma)

    scalar = eta + 0.1 * c / two_pi
    if problem.dim == 2:
        A = scalar[None].copy()
    else:
        A = np.stack([scalar * e3[i] + 0.1 * s / two_pi * e2[i] for i in range(3)])
    return q, A


def _alfven_jumps(problem: ProblemSpec, grid: GridSpec) -> List[np.ndarray]:
    _, e2, e3 = _alfven_basis(problem.dim)
    jumps = []
    for d, length in enumerate(grid.lengths):
        offset = e2[d] * length
        jumps.append(np.array([offset]) if problem.dim == 2 else offset * e3)
    return jumps


# ── shocks and vortices ──────────────────────────────────────────────────
def _shock_tube(problem: ProblemSpec, grid: GridSpec):
    x, y = grid.coordinates()
    cp, sp = math.cos(PHI), math.sin(PHI)
    xi = x * cp + y * sp
    eta = -x * sp + y * cp
    left = xi < 0
    # (rho, u_perp, u_par, u_z, p, B_perp, B_par, B_z)
    L = (1.0, -0.4, 0.0, 0.0, 1.0, 0.75, 1.0, 0.0)
    R = (0.2, -0.4, 0.0, 0.0, 0.1, 0.75, -1.0, 0.0)
    st = [np.where(left, a, b) for a, b in zip(L, R)]

    w = _primitive(grid)
    w[physics.RHO] = st[0]
    w[1], w[2], w[3] = st[1] * cp - st[2] * sp, st[1] * sp + st[2] * cp, st[3]
    w[physics.ENER] = st[4]
    w[physics.BX], w[physics.BY], w[physics.BZ] = st[5] * cp - st[6] * sp, st[5] * sp + st[6] * cp, st[7]
    q = physics.to_conserved(w, problem.gamma)
    A = (0.75 * eta + np.abs(xi))[None]
    return q, A


def _orszag_tang(problem: ProblemSpec, grid: GridSpec):
    x, y = grid.coordinates()
    g = problem.gamma
    w = _primitive(grid)
    w[physics.RHO] = g * g
    w[1] = -np.sin(y)
    w[2] = np.sin(x)
    w[physics.ENER] = g
    w[physics.BX] = -np.sin(y)
    w[physics.BY] = np.sin(2.0 * x)
    A = (0.5 * np.cos(2.0 * x) + np.cos(y))[None]
    return physics.to_conserved(w, g), A


def _rotor(problem: ProblemSpec, grid: GridSpec):
    x, y = grid.coordinates()
    r = np.sqrt((x - 0.5) ** 2 + (y - 0.5) ** 2)
    r0, r1 = 0.1, 0.115
    taper = (23.0 - 200.0 * r) / 3.0
    inside = r <= r0
    ring = (r > r0) & (r < r1)
    weight = np.where(inside, 1.0, np.where(ring, taper, 0.0))

    w = _primitive(grid)
    w[physics.RHO] = np.where(inside, 10.0, np.where(ring, 1.0 + 9.0 * taper, 1.0))
    w[1] = weight * (-10.0 * y + 5.0)
    w[2] = weight * (10.0 * x - 5.0)
    w[physics.ENER] = 1e-8
    bx = 2.5 / SQRT_4PI
    w[physics.BX] = bx
    A = (bx * y)[None]
    return physics.to_conserved(w, problem.gamma), A


CLOUD_POST = (3.86859, 11.2536, 0.0, 0.0, 167.345, 0.0, 2.1826182, -2.1826182)
CLOUD_PRE_B = 0.56418958
SHOCK_X = 0.05


def _cloud_shock(problem: ProblemSpec, grid: GridSpec):
    xs = grid.coordinates()
    x = xs[0]
    centre = (0.25, 0.5, 0.5)[:problem.dim]
    r = np.sqrt(sum((xs[d] - centre[d]) ** 2 for d in range(problem.dim)))
    post = x < SHOCK_X
    cloud = (~post) & (r < 0.15)

    w = _primitive(grid)
    w[physics.RHO] = np.where(post, CLOUD_POST[0], np.where(cloud, 10.0, 1.0))
    w[1] = np.where(post, CLOUD_POST[1], 0.0)
    w[physics.ENER] = np.where(post, CLOUD_POST[4], 1.0)
    w[physics.BY] = np.where(post, CLOUD_POST[6], CLOUD_PRE_B)
    w[physics.BZ] = np.where(post, CLOUD_POST[7], CLOUD_PRE_B)
    q = physics.to_conserved(w, problem.gamma)

    kink = x <= SHOCK_X
    Az = np.where(kink, -2.1826182 * x + 0.080921431, -CLOUD_PRE_B * x)
    if problem.dim == 2:
        return q, Az[None]
    # B^z = ∂x A^y, continuous at the shock position
    offset = SHOCK_X * (CLOUD_PRE_B - CLOUD_POST[7])
    Ay = np.where(kink, CLOUD_POST[7] * x + offset, CLOUD_PRE_B * x)
    return q, np.stack([np.zeros_like(x), Ay, Az])


def _blast(problem: ProblemSpec, grid: GridSpec):
    xs = grid.coordinates()
    r = np.sqrt(sum(c ** 2 for c in xs))
    b = 100.0 / SQRT_4PI / math.sqrt(2.0)
    w = _primitive(grid)
    w[physics.RHO] = 1.0
    w[physics.ENER] = np.where(r < 0.1, 0.1, 1000.0)
    w[physics.BX] = b
    w[physics.BY] = b
    q = physics.to_conserved(w, problem.gamma)
    Az = b * (xs[1] - xs[0])
    if problem.dim == 2:
        return q, Az[None]
    zero = np.zeros_like(Az)
    return q, np.stack([zero, zero, Az])


INITIALIZERS: Dict[str, Callable] = {
    "alfven2d": _alfven,
    "alfven3d": _alfven,
    "shocktube2d": _shock_tube,
    "orszagtang": _orszag_tang,
    "rotor": _rotor,
    "cloudshock2d": _cloud_shock,
    "cloudshock3d": _cloud_shock,
    "blast2d": _blast,
    "blast3d": _blast,
}


def initial_state(problem: ProblemSpec, grid: GridSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Initial (q, A) sampled at every cell centre, ghosts included.

    Raises:
        InvalidGridError: the grid does not cover the problem's domain
    """
    _check_grid(problem, grid)
    return INITIALIZERS[problem.id](problem, grid)


def _family_init(name: str, family: Callable):
    def init(problem: ProblemSpec, grid: GridSpec) -> Tuple[np.ndarray, np.ndarray]:
        if INITIALIZERS.get(problem.id) is not family:
            raise ValueError(f"problem '{problem.id}' does not belong to {name}")
        return initial_state(problem, grid)
    init.__name__ = name
    return init


# named entry points per problem family
alfven_init = _family_init("alfven_init", _alfven)
shock_tube_init = _family_init("shock_tube_init", _shock_tube)
orszag_tang_init = _family_init("orszag_tang_init", _orszag_tang)
rotor_init = _family_init("rotor_init", _rotor)
cloud_shock_init = _family_init("cloud_shock_init", _cloud_shock)
blast_init = _family_init("blast_init", _blast)


def has_exact_solution(problem: ProblemSpec) -> bool:
    return problem.id in ("alfven2d", "alfven3d")


def exact_solution(problem: ProblemSpec, grid: GridSpec, t: float) -> Tuple[np.ndarray, np.ndarray]:
    """Exact (q, A) at time t: the initial wave translated along -e1 at unit speed."""
    if not has_exact_solution(problem):
        raise ValueError(f"no exact solution for problem '{problem.id}'")
    _check_grid(problem, grid)
    return _alfven(problem, grid, t)


def potential_jumps(problem: ProblemSpec, grid: GridSpec) -> Optional[List[np.ndarray]]:
    """Per-axis additive jumps of A across one period (None if A is periodic)."""
    if problem.a_boundary != "periodic" or not has_exact_solution(problem):
        return None
    return _alfven_jumps(problem, grid)
