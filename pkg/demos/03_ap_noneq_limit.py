"""Asymptotic preservation in the non-equilibrium scaling: with mesh and time
step fixed, the kinetic solution approaches the diffusion-limit solver as eps
shrinks, without resolving the photon mean free path."""
import numpy as np

from rmhd_ap.coupled import ConstantOpacity, Problem, State, step
from rmhd_ap.core import Mesh1D, NondimParams
from rmhd_ap.decomposition import decompose
from rmhd_ap.limits import LimitState, noneq_limit_step
from rmhd_ap.mhd import FluidState, conserved_to_primitive, primitive_to_conserved
from rmhd_ap.quadrature import build_quadrature

quad = build_quadrature(8)
nx, dt, nsteps = 100, 0.002, 50


def setup(eps):
    p = NondimParams.from_regime("noneq", eps, 1.0, P0=0.1, gamma=5 / 3)
    mesh = Mesh1D(0.0, 1.0, nx)
    x = mesh.centers
    g = np.exp(-100 * (x - 0.5) ** 2)
    rho, T, v = 1 + 0.2 * g, 1 + 0.5 * g, g * (x - 0.5)
    z = np.zeros(nx)
    U = primitive_to_conserved(FluidState(rho, v, z, z, z, z, rho * T), p.gamma)
    I = np.repeat((T ** 4 / (4 * np.pi))[:, None], 8, axis=1)
    b = lambda Tb: np.full(8, Tb ** 4 / (4 * np.pi))
    prob = Problem(mesh, p, quad, ConstantOpacity(1.0, 10.0), U[0].copy(), U[-1].copy(),
                   b(T[0]), b(T[-1]), T[0], T[-1])
    return State(U, I), prob


def fields(U, J, p):
    s = conserved_to_primitive(U, p.Bx, p.gamma)
    return np.array([s.rho, s.vx, s.p / s.rho, 4 * np.pi * J])


s, prob = setup(1e-4)
ls = LimitState(s.U.copy(), decompose(s.I, quad).J)
for _ in range(nsteps):
    ls = noneq_limit_step(ls, dt, prob)
ref = fields(ls.U, ls.J, prob.params)

print("eps      L1 distance to limit   macro iterations (max)")
for eps in (1e-2, 1e-3, 1e-4):
    s, prob = setup(eps)
    its = 0
    for _ in range(nsteps):
        s, info = step(s, dt, prob)
        its = max(its, info.iterations)
    d = np.abs(fields(s.U, decompose(s.I, quad).J, prob.params) - ref).sum() / nx
    print(f"{eps:7.0e}  {d:.3e}              {its}")
