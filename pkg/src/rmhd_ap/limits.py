"""Reference solvers: the discrete non-equilibrium and equilibrium diffusion
limits of the AP scheme, and a fully explicit kinetic solver.

The limit solvers share the explicit MHD substep with the coupled module and
solve the remaining stiff equations with the same banded Newton iteration.
Wall values enter through ghost cells: J_ghost = <b>, T_ghost = T_wall, and the
fluid Dirichlet ghost states.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ConfigurationError
from .coupled import Problem, State, _sources, newton_banded
from .decomposition import decompose
from .mhd import BY, BZ, EN, MX, MY, MZ, RHO, conserved_to_primitive, explicit_mhd_update
from .quadrature import moment
from .ugks import FOUR_PI, source_g, upwind


@dataclass
class LimitState:
    '''Fluid conserved variables plus J (None for the equilibrium closure).'''
    U: np.ndarray
    J: np.ndarray | None
    t: float = 0.0

    def copy(self) -> "LimitState":
        return LimitState(self.U.copy(), None if self.J is None else self.J.copy(), self.t)

    def radiation_temperature(self, params) -> np.ndarray:
        if self.J is None:
            s = conserved_to_primitive(self.U, params.Bx, params.gamma)
            return s.p / (params.R_ideal * s.rho)
        return np.maximum(FOUR_PI * self.J, 0.0) ** 0.25


def _with_ghosts(a, left, right):
    return np.concatenate([[left], a, [right]])


def _fluid_substep(state: LimitState, dt, prob: Problem):
    p = prob.params
    U = state.U
    prim = conserved_to_primitive(U, p.Bx, p.gamma)
    T0 = prim.p / (p.R_ideal * prim.rho)
    if prob.frozen_fluid:
        return U.copy(), np.zeros((U.shape[0] + 1, 7)), prim, T0
    U1, F = explicit_mhd_update(U, dt, prob.mesh.dx, p.Bx, p.gamma, prob.ghostL, prob.ghostR,
                                predictor=prob.predictor)
    return U1, F, prim, T0


def _kinetic_terms(U1, prim0, p):
    rho1 = U1[:, RHO]
    kin0 = prim0.rho * (prim0.vx ** 2 + prim0.vy ** 2 + prim0.vz ** 2) \
        + p.Bx ** 2 + prim0.By ** 2 + prim0.Bz ** 2
    vy1, vz1 = U1[:, MY] / rho1, U1[:, MZ] / rho1
    B2_1 = p.Bx ** 2 + U1[:, BY] ** 2 + U1[:, BZ] ** 2
    return rho1, kin0, vy1, vz1, B2_1


def _assemble(U1, v, T, p):
    U = U1.copy()
    rho = U[:, RHO]
    U[:, MX] = rho * v
    v2 = v ** 2 + (U[:, MY] / rho) ** 2 + (U[:, MZ] / rho) ** 2
    U[:, EN] = p.a_coeff * rho * T + 0.5 * rho * v2 + 0.5 * (p.Bx ** 2 + U[:, BY] ** 2 + U[:, BZ] ** 2)
    return U


def _ghost_vx(prob: Problem):
    return prob.ghostL[MX] / prob.ghostL[RHO], prob.ghostR[MX] / prob.ghostR[RHO]


def noneq_limit_step(state: LimitState, dt: float, prob: Problem,
                     tol: float = 1e-10, max_iter: int = 200) -> LimitState:
    '''
    One step of the non-equilibrium diffusion limit: explicit fluid transport,
    implicit J diffusion, relaxation c*sigma_a*(T^4 - 4 pi J) and radiation
    pressure/advection, solved jointly for (J, vx, T).
    '''
    p, m = prob.params, prob.mesh
    dx, c, P0, a = m.dx, p.c, p.P0, p.a_coeff
    U1, F, prim0, T0 = _fluid_substep(state, dt, prob)
    rho1, kin0, vy1, vz1, B2_1 = _kinetic_terms(U1, prim0, p)
    sa, ss, _, ss_f = prob.opacity(m.centers, m.interfaces, prim0.rho, T0)
    J0 = state.J
    JL, JR = 0.5 * float(np.sum(prob.bL * prob.quad.weights)), 0.5 * float(np.sum(prob.bR * prob.quad.weights))
    vL, vR = _ghost_vx(prob)
    F2, F5 = F[:, MX], F[:, EN]
    frozen = prob.frozen_fluid

    def res(x):
        J, v, T = x[:, 0], x[:, 1], x[:, 2]
        Jg = _with_ghosts(J, JL, JR)
        vg = _with_ghosts(v, vL, vR)
        vJ = 0.5 * (vg[1:] + vg[:-1]) * 0.5 * (Jg[1:] + Jg[:-1])
        dif = c / (3.0 * ss_f) * (Jg[1:] - Jg[:-1]) / dx
        cen = (Jg[2:] - Jg[:-2]) / dx
        r = np.empty(x.shape, dtype=np.result_type(x, float))
        r[:, 0] = (FOUR_PI * (J - J0) / dt - FOUR_PI / dx * (dif[1:] - dif[:-1])
                   + 16 * np.pi / 3 * (vJ[1:] - vJ[:-1]) / dx
                   - c * sa * (T ** 4 - FOUR_PI * J) - 2 * np.pi / 3 * v * cen)
        if frozen:
            r[:, 1] = rho1 * (v - prim0.vx) / dt
            r[:, 2] = a * rho1 * (T - T0) / dt + P0 * c * sa * (T ** 4 - FOUR_PI * J)
        else:
            r[:, 1] = (rho1 * v - state.U[:, MX]) / dt + (F2[1:] - F2[:-1]) / dx \
                + 2 * np.pi * P0 / 3 * cen
            kin1 = rho1 * (v * v + vy1 ** 2 + vz1 ** 2) + B2_1
            r[:, 2] = (a * (rho1 * T - prim0.rho * T0) / dt + (kin1 - kin0) / (2 * dt)
                       + FOUR_PI * P0 * (J - J0) / dt + (F5[1:] - F5[:-1]) / dx
                       + 16 * np.pi * P0 / 3 * (vJ[1:] - vJ[:-1]) / dx
                       - FOUR_PI * P0 / dx * (dif[1:] - dif[:-1]))
        return r

    def scales(x):
        return np.array([np.max(np.abs(x[:, 0])) + 1e-300, np.max(np.abs(x[:, 1])) + 1.0,
                         np.max(np.abs(x[:, 2]))])

    x0 = np.stack([J0, prim0.vx, T0], axis=1)
    x, _, _ = newton_banded(res, x0, scales, tol, max_iter, nonneg=(0,), positive=(2,))
    return LimitState(_assemble(U1, x[:, 1], x[:, 2], p), x[:, 0], state.t + dt)


def eq_limit_step(state: LimitState, dt: float, prob: Problem,
                  tol: float = 1e-10, max_iter: int = 200) -> LimitState:
    '''
    One step of the equilibrium diffusion limit (4 pi J = T^4): radiation
    energy P0 T^4 and pressure P0 T^4/3 folded into the fluid, T^4 diffusion
    with coefficient c/(3 sigma_a).
    '''
    p, m = prob.params, prob.mesh
    dx, c, P0, a = m.dx, p.c, p.P0, p.a_coeff
    U1, F, prim0, T0 = _fluid_substep(state, dt, prob)
    rho1, kin0, vy1, vz1, B2_1 = _kinetic_terms(U1, prim0, p)
    _, _, sa_f, _ = prob.opacity(m.centers, m.interfaces, prim0.rho, T0)
    vL, vR = _ghost_vx(prob)
    F2, F5 = F[:, MX], F[:, EN]
    frozen = prob.frozen_fluid

    def res(x):
        v, T = x[:, 0], x[:, 1]
        T4g = _with_ghosts(T ** 4, prob.T_L ** 4, prob.T_R ** 4)
        vg = _with_ghosts(v, vL, vR)
        vT = 0.5 * (vg[1:] + vg[:-1]) * 0.5 * (T4g[1:] + T4g[:-1])
        dif = c / (3.0 * sa_f) * (T4g[1:] - T4g[:-1]) / dx
        r = np.empty(x.shape, dtype=np.result_type(x, float))
        if frozen:
            r[:, 0] = rho1 * (v - prim0.vx) / dt
            r[:, 1] = (a * rho1 * (T - T0) / dt + P0 * (T ** 4 - T0 ** 4) / dt
                       + 4 * P0 / 3 * (vT[1:] - vT[:-1]) / dx - P0 / dx * (dif[1:] - dif[:-1]))
        else:
            r[:, 0] = (rho1 * v - state.U[:, MX]) / dt + (F2[1:] - F2[:-1]) / dx \
                + P0 / 6 * (T4g[2:] - T4g[:-2]) / dx
            kin1 = rho1 * (v * v + vy1 ** 2 + vz1 ** 2) + B2_1
            r[:, 1] = (a * (rho1 * T - prim0.rho * T0) / dt + (kin1 - kin0) / (2 * dt)
                       + P0 * (T ** 4 - T0 ** 4) / dt + (F5[1:] - F5[:-1]) / dx
                       + 4 * P0 / 3 * (vT[1:] - vT[:-1]) / dx - P0 / dx * (dif[1:] - dif[:-1]))
        return r

    def scales(x):
        return np.array([np.max(np.abs(x[:, 0])) + 1.0, np.max(np.abs(x[:, 1]))])

    x0 = np.stack([prim0.vx, T0], axis=1)
    x, _, _ = newton_banded(res, x0, scales, tol, max_iter, positive=(1,))
    return LimitState(_assemble(U1, x[:, 0], x[:, 1], p), None, state.t + dt)


def explicit_kinetic_step(state: State, dt: float, prob: Problem,
                          implicit_collisions: bool = False) -> State:
    '''
    Forward-Euler, first-order upwind update of every ordinate with all
    couplings explicit. Requires dt < dx / C.

    With implicit_collisions the loss term -C(La sa + Ls ss) I is taken at the
    new level (gain terms stay explicit), which removes the dt < 1/(C sigma)
    restriction in very opaque material while keeping transport explicit.
    '''
    p, m, quad = prob.params, prob.mesh, prob.quad
    C, dx = p.curlyC, m.dx
    if not dt < dx / C:
        raise ConfigurationError(
            f"explicit kinetic solver needs dt < dx/C = {dx / C:.6g}, got dt = {dt:.6g}")
    n = quad.nodes
    U, I = state.U, state.I
    prim = conserved_to_primitive(U, p.Bx, p.gamma)
    T0 = prim.p / (p.R_ideal * prim.rho)
    T4 = T0 ** 4
    sa, ss, _, _ = prob.opacity(m.centers, m.interfaces, prim.rho, T0)
    cell = decompose(I, quad)
    la, ls = p.La * sa, p.Ls * ss
    e = lambda a: np.asarray(a)[:, None]

    flux = np.empty((m.nx + 1, quad.order))
    flux[1:-1] = C * n * upwind(I[:-1], I[1:], quad)
    flux[0] = C * n * np.where(n > 0, prob.bL, I[0])
    flux[-1] = C * n * np.where(n < 0, prob.bR, I[-1])
    G = source_g(n, T4, cell.J, cell.R, cell.Q, cell.K_Q, prim.vx, sa, ss, p)
    if implicit_collisions:
        gain = e(C * la * T4 / FOUR_PI + C * ls * cell.J) + G
        I1 = (I - dt / dx * (flux[1:] - flux[:-1]) + dt * gain) / (1.0 + dt * e(C * (la + ls)))
    else:
        rhs = e(C * la) * (e(T4 / FOUR_PI) - I) + e(C * ls) * (e(cell.J) - I) + G
        I1 = I - dt / dx * (flux[1:] - flux[:-1]) + dt * rhs

    S_re, S_rp = _sources(cell.J, cell.R, prim.vx, T4, cell.K_Q, sa, ss, p)
    if prob.frozen_fluid:
        U1 = U.copy()
        T1 = T0 - dt * C * p.P0 * S_re / (p.a_coeff * prim.rho)
        U1 = _assemble(U1, prim.vx, T1, p)
    else:
        U1, _ = explicit_mhd_update(U, dt, dx, p.Bx, p.gamma, prob.ghostL, prob.ghostR,
                                    predictor=prob.predictor)
        U1[:, MX] -= dt * p.P0 * S_rp
        U1[:, EN] -= dt * C * p.P0 * S_re
    return State(U1, I1, state.t + dt)
