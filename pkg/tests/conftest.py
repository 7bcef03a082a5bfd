import numpy as np
import pytest

from rmhd_ap.coupled import ConstantOpacity, Problem, State
from rmhd_ap.core import Mesh1D, NondimParams
from rmhd_ap.mhd import FluidState, primitive_to_conserved
from rmhd_ap.quadrature import build_quadrature
from rmhd_ap.ugks import FOUR_PI


def make_problem(nx=8, regime="noneq", eps=1e-2, c=1.0, P0=0.0, sa=1.0, ss=1.0, gamma=5 / 3,
                 Bx=0.0, order=8, a=0.0, b=1.0, frozen=False, rho=None, vx=None, p=None,
                 J=None, Q=None, R=None, **kw):
    '''Small coupled problem with explicit per-cell initial data.'''
    params = NondimParams.from_regime(regime, eps, c, P0=P0, gamma=gamma, Bx=Bx,
                                      La=kw.pop("La", None), Ls=kw.pop("Ls", None),
                                      curlyC=kw.pop("curlyC", None))
    mesh = Mesh1D(a, b, nx)
    quad = build_quadrature(order)
    one = np.ones(nx)
    rho = one if rho is None else np.asarray(rho, float)
    vx = 0 * one if vx is None else np.asarray(vx, float)
    p = one if p is None else np.asarray(p, float)
    fs = FluidState(rho, vx, 0 * one, 0 * one, 0 * one, 0 * one, p, Bx)
    U = primitive_to_conserved(fs, gamma)
    T = p / rho
    J = T ** 4 / FOUR_PI if J is None else np.asarray(J, float)
    I = J[:, None] + np.zeros(order)
    if R is not None:
        I = I + quad.nodes * np.asarray(R, float)[:, None]
    if Q is not None:
        I = I + Q
    bL = np.full(order, kw.pop("JbL", J[0]))
    bR = np.full(order, kw.pop("JbR", J[-1]))
    prob = Problem(mesh, params, quad, kw.pop("opacity", ConstantOpacity(sa, ss)),
                   U[0].copy(), U[-1].copy(), bL, bR, float(T[0]), float(T[-1]),
                   frozen_fluid=frozen, **kw)
    return prob, State(U, I, 0.0)


@pytest.fixture
def quad8():
    return build_quadrature(8)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
