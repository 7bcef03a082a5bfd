import numpy as np
import pytest

from rmhd_ap.core import ConfigurationError
from rmhd_ap.coupled import ConstantOpacity
from rmhd_ap.limits import LimitState, eq_limit_step, explicit_kinetic_step, noneq_limit_step
from rmhd_ap.mhd import RHO, explicit_mhd_update, conserved_to_primitive
from rmhd_ap.ugks import FOUR_PI

from conftest import make_problem


def test_uniform_states_unchanged():
    prob, s = make_problem(nx=8, P0=0.2, p=np.full(8, 1.2))
    J = s.I.mean(axis=1)
    ls = LimitState(s.U, J)
    for _ in range(5):
        ls = noneq_limit_step(ls, 0.05, prob)
    np.testing.assert_allclose(ls.U, s.U, rtol=1e-13, atol=1e-15)
    np.testing.assert_allclose(ls.J, J, rtol=1e-13)
    es = LimitState(s.U, None)
    for _ in range(5):
        es = eq_limit_step(es, 0.05, prob)
    np.testing.assert_allclose(es.U, s.U, rtol=1e-13, atol=1e-15)
    s2 = explicit_kinetic_step(s, 0.5 * prob.mesh.dx / prob.params.curlyC, prob)
    np.testing.assert_allclose(s2.I, s.I, rtol=1e-13)
    np.testing.assert_allclose(s2.U, s.U, rtol=1e-13, atol=1e-15)


def test_pure_diffusion_decays_at_discrete_eigenvalue():
    '''Lowest Dirichlet mode of J with v = 0, sigma_a = 0 and frozen fluid.'''
    N, c, ss = 40, 1.0, 0.5
    k = np.arange(1, N + 1)
    J0 = np.sin(np.pi * k / (N + 1))
    prob, s = make_problem(nx=N, regime="noneq", eps=1.0, c=c, frozen=True, J=J0,
                           opacity=ConstantOpacity(0.0, ss), JbL=0.0, JbR=0.0)
    dx = prob.mesh.dx
    D = c / (3 * ss)
    lam = 4 / dx ** 2 * np.sin(np.pi / (2 * (N + 1))) ** 2
    dt, nsteps = 2e-3, 100
    st = LimitState(s.U, J0)
    for _ in range(nsteps):
        st = noneq_limit_step(st, dt, prob)
    # implicit Euler on the exact eigenvector: amplitude (1 + dt D lam)^-n, shape unchanged
    amp = (1 + dt * D * lam) ** -nsteps
    np.testing.assert_allclose(st.J, amp * J0, rtol=1e-8, atol=1e-12)
    # and within 1% of the continuous heat kernel on the effective length (N+1) dx
    cont = np.exp(-D * (np.pi / ((N + 1) * dx)) ** 2 * dt * nsteps)
    assert amp == pytest.approx(cont, rel=0.01)


def test_eq_limit_without_coupling_is_pure_mhd():
    from rmhd_ap.scenarios import build, preset
    spec = preset("brio-wu")
    prob, s = build(spec, 64)
    dx = prob.mesh.dx
    st, U = LimitState(s.U, None), s.U
    for _ in range(10):
        st = eq_limit_step(st, 0.2 * dx, prob)
        U, _ = explicit_mhd_update(U, 0.2 * dx, dx, spec.Bx, spec.gamma, prob.ghostL, prob.ghostR)
    np.testing.assert_allclose(st.U, U, atol=1e-10)


def test_eq_limit_energy_balance_frozen():
    N = 40
    x = (np.arange(N) + 0.5) / N
    T = 1 + 0.5 * np.exp(-100 * (x - 0.5) ** 2)
    P0, sa = 0.5, 2.0
    prob, s = make_problem(nx=N, regime="eq", eps=0.1, c=1.0, P0=P0, sa=sa, ss=1.0, p=T,
                           frozen=True)
    p, dx = prob.params, prob.mesh.dx
    dt = 1e-3

    def energy(U):
        st = conserved_to_primitive(U, p.Bx, p.gamma)
        Tm = st.p / st.rho
        return np.sum(p.a_coeff * st.rho * Tm + P0 * Tm ** 4) * dx, Tm

    st = LimitState(s.U, None)
    E0, _ = energy(s.U)
    wall = 0.0
    for _ in range(50):
        st = eq_limit_step(st, dt, prob)
        _, Tm = energy(st.U)
        Dc = p.c / (3 * sa)
        # net inflow through both walls, evaluated at the new level
        wall += dt * P0 * Dc * ((prob.T_R ** 4 - Tm[-1] ** 4) - (Tm[0] ** 4 - prob.T_L ** 4)) / dx
    E1, _ = energy(st.U)
    assert abs(E1 - E0 - wall) < 1e-10


def test_noneq_limit_conserves_mass():
    N = 32
    x = (np.arange(N) + 0.5) / N
    rho = 1 + 0.2 * np.exp(-80 * (x - 0.5) ** 2)
    prob, s = make_problem(nx=N, eps=1e-3, P0=0.1, rho=rho, vx=0.1 * np.sin(2 * np.pi * x))
    st = LimitState(s.U, s.I.mean(axis=1))
    m0 = st.U[:, RHO].sum()
    dx = prob.mesh.dx
    from rmhd_ap.mhd import mhd_fluxes
    total_wall = 0.0
    for _ in range(10):
        F = mhd_fluxes(st.U, prob.params.Bx, prob.params.gamma, prob.ghostL, prob.ghostR,
                       0.01 / dx)
        total_wall += 0.01 * (F[-1, RHO] - F[0, RHO])
        st = noneq_limit_step(st, 0.01, prob)
    assert st.U[:, RHO].sum() * dx == pytest.approx(m0 * dx - total_wall, abs=1e-13)


def test_noneq_limit_approaches_eq_limit_as_opacity_grows():
    N = 24
    x = (np.arange(N) + 0.5) / N
    T = 1 + 0.3 * np.exp(-60 * (x - 0.5) ** 2)
    gaps = []
    for sigma in (1e2, 1e3, 1e4):
        prob, s = make_problem(nx=N, regime="noneq", eps=1.0, c=1.0, P0=0.5, sa=sigma, ss=sigma,
                               p=T, frozen=True)
        a = LimitState(s.U, s.I.mean(axis=1))
        b = LimitState(s.U, None)
        for _ in range(10):
            a = noneq_limit_step(a, 1e-3, prob)
            b = eq_limit_step(b, 1e-3, prob)
        gaps.append(np.abs(a.radiation_temperature(prob.params) ** 4
                           - b.radiation_temperature(prob.params) ** 4).sum() / N)
    assert gaps[0] > gaps[1] > gaps[2]


def test_explicit_solver_enforces_light_cfl():
    prob, s = make_problem(nx=8)
    with pytest.raises(ConfigurationError, match="dx/C"):
        explicit_kinetic_step(s, prob.mesh.dx / prob.params.curlyC, prob)


def test_free_streaming_front():
    N = 200
    x = (np.arange(N) + 0.5) / N
    prob, s = make_problem(nx=N, regime="noneq", eps=1.0, c=1.0, frozen=True,
                           opacity=ConstantOpacity(0.0, 0.0), J=np.where(x < 0.3, 1.0, 0.0),
                           JbL=1.0, JbR=0.0)
    dx = prob.mesh.dx
    dt = 0.5 * dx
    st = s
    for _ in range(100):
        st = explicit_kinetic_step(st, dt, prob)
    t = 100 * dt
    for m, nm in enumerate(prob.quad.nodes):
        if nm <= 0.2:
            continue
        front = 0.3 + nm * t
        crossing = x[np.argmin(np.abs(st.I[:, m] - 0.5))]
        assert abs(crossing - front) <= 2 * dx, (nm, crossing, front)
