"""Equilibrium scaling: one large step drives radiation onto the Planck
function, and the leftover gap 4 pi J - T^4 shrinks with eps."""
import numpy as np

from rmhd_ap.coupled import ConstantOpacity, Problem, State, step
from rmhd_ap.core import Mesh1D, NondimParams
from rmhd_ap.decomposition import decompose
from rmhd_ap.mhd import FluidState, conserved_to_primitive, primitive_to_conserved
from rmhd_ap.quadrature import build_quadrature

quad = build_quadrature(8)
nx = 100
for eps in (1e-2, 1e-3, 1e-4, 1e-6):
    p = NondimParams.from_regime("eq", eps, 1.0, P0=0.1, gamma=5 / 3)
    mesh = Mesh1D(0.0, 1.0, nx)
    x = mesh.centers
    T = 1 + 0.5 * np.exp(-100 * (x - 0.5) ** 2)
    z = np.zeros(nx)
    U = primitive_to_conserved(FluidState(1 + z, z, z, z, z, z, T), p.gamma)
    I = np.repeat((1.5 * T ** 4 / (4 * np.pi))[:, None], 8, axis=1)   # 50% too much radiation
    b = lambda Tb: np.full(8, Tb ** 4 / (4 * np.pi))
    prob = Problem(mesh, p, quad, ConstantOpacity(1.0, 1.0), U[0].copy(), U[-1].copy(),
                   b(T[0]), b(T[-1]), T[0], T[-1])
    s1, info = step(State(U, I), 0.002, prob)
    st = conserved_to_primitive(s1.U, 0.0, p.gamma)
    gap = np.abs(4 * np.pi * decompose(s1.I, quad).J - (st.p / st.rho) ** 4).max()
    print(f"eps={eps:7.0e}  max|4piJ - T^4| = {gap:.3e}  (Newton iterations: {info.iterations})")
