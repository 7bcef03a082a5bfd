"""UGKS interface machinery: exponential coefficients, upwinded source, micro
flux and its angular moments, and wall fluxes.

All functions are vectorized over interfaces and stay complex-safe in the
macroscopic unknowns (J, R, T^4, vx) so the macro Jacobian can be formed by
complex-step differentiation.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .core import InvalidArgumentError, NondimParams
from .quadrature import Quadrature

FOUR_PI = 4.0 * np.pi
TAYLOR_CUT = 1e-4
_SERIES_CUT = 2.0
_NSERIES = 30

_k = np.arange(_NSERIES)
_S1 = np.array([(-1.0) ** k / factorial(k + 1) for k in _k])
_S2 = np.array([(-1.0) ** k / factorial(k + 2) for k in _k])
_S3 = np.array([(-1.0) ** k * (k + 1) / factorial(k + 3) for k in _k])


def _phis(x, taylor_terms: int = 4):
    '''
    phi1 = (1-e^-x)/x, phi2 = (x-(1-e^-x))/x^2,
    phi3 = (x(1+e^-x) - 2(1-e^-x))/x^3, evaluated without cancellation.
    '''
    x = np.asarray(x, dtype=float)
    small = x < TAYLOR_CUT
    mid = (~small) & (x < _SERIES_CUT)
    big = x >= _SERIES_CUT
    p1, p2, p3 = (np.empty_like(x) for _ in range(3))
    if small.any():
        xs = x[small]
        pw = xs[..., None] ** np.arange(taylor_terms)
        p1[small] = pw @ _S1[:taylor_terms]
        p2[small] = pw @ _S2[:taylor_terms]
        p3[small] = pw @ _S3[:taylor_terms]
    if mid.any():
        xm = x[mid]
        pw = xm[..., None] ** _k
        p1[mid] = pw @ _S1
        p2[mid] = pw @ _S2
        p3[mid] = pw @ _S3
    if big.any():
        xb = x[big]
        E = -np.expm1(-xb)
        p1[big] = E / xb
        p2[big] = (xb - E) / xb ** 2
        p3[big] = (xb * (2.0 - E) - 2.0 * E) / xb ** 3
    return p1, p2, p3


@dataclass
class UgksCoeffs:
    A: np.ndarray
    C1: np.ndarray
    C2: np.ndarray
    D1: np.ndarray
    D2: np.ndarray
    F: np.ndarray
    mu: np.ndarray


def ugks_coefficients(dt: float, sigma_a, sigma_s, params: NondimParams) -> UgksCoeffs:
    '''Flux coefficients at one or many interfaces; sigma values are unscaled.'''
    if not dt > 0:
        raise InvalidArgumentError("dt must be positive")
    C = params.curlyC
    la = params.La * np.asarray(sigma_a, dtype=float)
    ls = params.Ls * np.asarray(sigma_s, dtype=float)
    mu = C * (la + ls)
    if np.any(~(mu > 0)):
        raise InvalidArgumentError("decay rate mu = C(La sa + Ls ss) must be positive")
    x = mu * dt
    p1, p2, p3 = _phis(x)
    return UgksCoeffs(
        A=C * p1,
        C1=C * C * ls * dt * p2,
        C2=C * C * la * dt * p2,
        D1=-C ** 3 * ls * dt * dt * p3,
        D2=-C ** 3 * la * dt * dt * p3,
        F=C * dt * p2,
        mu=mu,
    )


def source_g(n, T4, J, R, Q, K_Q, vx, sigma_a, sigma_s, params: NondimParams):
    '''
    Per-ordinate velocity source G. Cell arrays broadcast against the ordinate
    axis, which is last; Q carries that axis.
    '''
    la = params.La * sigma_a
    ls = params.Ls * sigma_s
    e = lambda a: np.asarray(a)[..., None]
    return (3.0 * e(la * vx * (T4 / FOUR_PI - J)) * n
            + e(vx * (la + ls)) * n * (4.0 * e(J) + n * e(R) + Q)
            - e((2.0 / 3.0) * ls * vx * R
                + (la - ls) * vx * vx / params.curlyC * (4.0 / 3.0 * J + K_Q)))


def g_hat(G_i, G_ip1, vx_i, vx_ip1):
    '''
    Upwind choice of the interface source. When vx_i >= vx_ip1, pick G_i if
    (G_ip1 - G_i)/(vx_ip1 - vx_i) > 0, else G_ip1 (equal velocities select
    G_ip1). When vx_i < vx_ip1, pick G_i for vx_i > 0, G_ip1 for vx_ip1 < 0,
    and 0 otherwise.
    '''
    G_i = np.asarray(G_i)
    G_ip1 = np.asarray(G_ip1)
    vi = np.asarray(vx_i, dtype=float)
    vj = np.asarray(vx_ip1, dtype=float)
    if G_i.ndim > vi.ndim:
        vi = vi[..., None]
        vj = vj[..., None]
    dG = (G_ip1 - G_i).real
    compress = vi >= vj
    # ratio > 0 with negative denominator means dG < 0; a zero denominator counts as <= 0
    pick_i_c = (vi > vj) & (dG < 0)
    out_c = np.where(pick_i_c, G_i, G_ip1)
    out_e = np.where(vi > 0, G_i, np.where(vj < 0, G_ip1, 0.0 * G_i))
    return np.where(compress, out_c, out_e)


@dataclass
class InterfaceData:
    '''
    Data at interfaces i+1/2 between cells i (left) and i+1 (right).
    sigma_a, sigma_s are unscaled interface opacities.
    '''
    J_L: np.ndarray
    J_R: np.ndarray
    T4_L: np.ndarray
    T4_R: np.ndarray
    sigma_a: np.ndarray
    sigma_s: np.ndarray
    vx: np.ndarray
    dx: float
    K_Q: np.ndarray = 0.0
    R: np.ndarray = 0.0
    Q3: np.ndarray = 0.0

    @property
    def J_half(self):
        return 0.5 * (self.J_L + self.J_R)

    @property
    def T4_half(self):
        return 0.5 * (self.T4_L + self.T4_R)

    @property
    def dJ_plus(self):
        return (self.J_half - self.J_L) / (0.5 * self.dx)

    @property
    def dJ_minus(self):
        return (self.J_R - self.J_half) / (0.5 * self.dx)

    @property
    def dT4_plus(self):
        return (self.T4_half - self.T4_L) / (0.5 * self.dx)

    @property
    def dT4_minus(self):
        return (self.T4_R - self.T4_half) / (0.5 * self.dx)

    def g_interface(self, quad: Quadrature, params: NondimParams, Q_half=0.0):
        '''G evaluated with interface-averaged arguments.'''
        Q_half = np.zeros(np.shape(self.J_L) + (quad.order,)) + Q_half
        return source_g(quad.nodes, self.T4_half, self.J_half, self.R, Q_half, self.K_Q,
                        self.vx, self.sigma_a, self.sigma_s, params)


def upwind(I_left, I_right, quad: Quadrature):
    return np.where(quad.nodes > 0, I_left, I_right)


def micro_flux(iface: InterfaceData, coeffs: UgksCoeffs, I_up, G_hat, quad: Quadrature):
    '''
    Per-ordinate interface flux zeta(n). I_up is the upwinded intensity and
    G_hat the per-ordinate interface source (both carry the ordinate axis last).
    '''
    n = quad.nodes
    e = lambda a: np.asarray(a)[..., None]
    pos = n > 0
    dJ = np.where(pos, e(iface.dJ_plus), e(iface.dJ_minus))
    dT = np.where(pos, e(iface.dT4_plus), e(iface.dT4_minus))
    return (e(coeffs.A) * n * I_up
            + e(coeffs.C1 * iface.J_half + coeffs.C2 / FOUR_PI * iface.T4_half) * n
            + e(coeffs.F) * n * G_hat
            + n * n * (e(coeffs.D1) * dJ + e(coeffs.D2 / FOUR_PI) * dT))


def upwind_moments(coeffs: UgksCoeffs, I_left, I_right, quad: Quadrature):
    '''Sum_m w A n I_up and Sum_m w A n^2 I_up.'''
    Iu = upwind(I_left, I_right, quad)
    w, n = quad.weights, quad.nodes
    A = np.asarray(coeffs.A)
    return A * (Iu @ (w * n)), A * (Iu @ (w * n * n))


def flux_moment0(iface: InterfaceData, coeffs: UgksCoeffs, I_left, I_right,
                 quad: Quadrature, params: NondimParams, up0=None):
    '''Closed-form integral of zeta over n in [-1, 1].'''
    if up0 is None:
        up0 = upwind_moments(coeffs, I_left, I_right, quad)[0]
    la = params.La * iface.sigma_a
    ls = params.Ls * iface.sigma_s
    v = iface.vx
    Jh = iface.J_half
    dx = iface.dx
    return (up0
            + 2.0 * coeffs.D1 / 3.0 * (iface.J_R - iface.J_L) / dx
            + coeffs.D2 / (6.0 * np.pi) * (iface.T4_R - iface.T4_L) / dx
            + coeffs.F * (2.0 * la * v * (iface.T4_half / FOUR_PI - Jh)
                          + v * (la + ls) * (8.0 / 3.0 * Jh + 2.0 * iface.K_Q)))


def flux_moment1(iface: InterfaceData, coeffs: UgksCoeffs, I_left, I_right,
                 quad: Quadrature, params: NondimParams, up1=None):
    '''Closed-form integral of n*zeta over n in [-1, 1].'''
    if up1 is None:
        up1 = upwind_moments(coeffs, I_left, I_right, quad)[1]
    la = params.La * iface.sigma_a
    ls = params.Ls * iface.sigma_s
    v = iface.vx
    Jh = iface.J_half
    return (up1
            + coeffs.C1 / 3.0 * (iface.J_L + iface.J_R)
            + coeffs.C2 / (12.0 * np.pi) * (iface.T4_L + iface.T4_R)
            + coeffs.F * (v * (la + ls) * (0.4 * iface.R + 2.0 * iface.Q3)
                          - 4.0 / 9.0 * ls * v * iface.R
                          - 2.0 * (la - ls) * v * v / (3.0 * params.curlyC)
                          * (4.0 / 3.0 * Jh + iface.K_Q)))


def boundary_micro_flux(side: str, b, T4_bnd, J_cell, T4_cell, I_cell, G_cell,
                        coeffs: UgksCoeffs, quad: Quadrature, params: NondimParams, dx: float):
    '''
    Per-ordinate wall flux. Incoming ordinates carry the prescribed inflow
    C n b; outgoing ordinates use the UGKS flux built from the adjacent cell
    and the half-cell reconstruction J_wall = (<b> + J_cell)/2.
    '''
    n = quad.nodes
    b = np.asarray(b, dtype=float)
    Jb = 0.5 * (b @ quad.weights)
    Jh = 0.5 * (Jb + J_cell)
    T4h = 0.5 * (T4_bnd + T4_cell)
    if side == "left":
        inc = n > 0
        dJ = (J_cell - Jh) / (0.5 * dx)
        dT = (T4_cell - T4h) / (0.5 * dx)
    elif side == "right":
        inc = n < 0
        dJ = (Jh - J_cell) / (0.5 * dx)
        dT = (T4h - T4_cell) / (0.5 * dx)
    else:
        raise InvalidArgumentError(f"side must be 'left' or 'right', got {side!r}")
    e = lambda a: np.asarray(a)[..., None]
    out = (e(coeffs.A) * n * I_cell
           + e(coeffs.C1 * Jh + coeffs.C2 / FOUR_PI * T4h) * n
           + e(coeffs.F) * n * G_cell
           + n * n * e(coeffs.D1 * dJ + coeffs.D2 / FOUR_PI * dT))
    return np.where(inc, params.curlyC * n * b, out)


def boundary_flux_moments(side: str, b, T4_bnd, J_cell, T4_cell, I_cell, G_cell,
                          coeffs: UgksCoeffs, quad: Quadrature, params: NondimParams, dx: float):
    '''(integral of zeta, integral of n zeta) at a wall, by quadrature.'''
    z = boundary_micro_flux(side, b, T4_bnd, J_cell, T4_cell, I_cell, G_cell,
                            coeffs, quad, params, dx)
    return z @ quad.weights, z @ (quad.weights * quad.nodes)
