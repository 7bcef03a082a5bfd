"""Ideal MHD convection: state conversions, minmod reconstruction and Roe fluxes.

Conserved ordering is (rho, rho*vx, rho*vy, rho*vz, E, By, Bz); Bx is a run constant.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .core import PositivityError

log = logging.getLogger(__name__)

RHO, MX, MY, MZ, EN, BY, BZ = range(7)
NVAR = 7


@dataclass
class FluidState:
    '''Primitive fluid fields; each attribute is an array over cells (or a scalar).'''
    rho: np.ndarray
    vx: np.ndarray
    vy: np.ndarray
    vz: np.ndarray
    By: np.ndarray
    Bz: np.ndarray
    p: np.ndarray
    Bx: float = 0.0

    def temperature(self, R_ideal: float):
        return self.p / (R_ideal * self.rho)

    def internal_energy(self, gamma: float):
        return self.p / (gamma - 1.0)

    def total_energy(self, gamma: float):
        v2 = self.vx ** 2 + self.vy ** 2 + self.vz ** 2
        b2 = self.Bx ** 2 + self.By ** 2 + self.Bz ** 2
        return self.p / (gamma - 1.0) + 0.5 * self.rho * v2 + 0.5 * b2

    def total_pressure(self):
        return self.p + 0.5 * (self.Bx ** 2 + self.By ** 2 + self.Bz ** 2)

    def copy(self) -> "FluidState":
        return FluidState(*(np.array(getattr(self, k), dtype=float) for k in
                            ("rho", "vx", "vy", "vz", "By", "Bz", "p")), Bx=self.Bx)


def primitive_to_conserved(s: FluidState, gamma: float) -> np.ndarray:
    rho = np.asarray(s.rho, dtype=float)
    U = np.empty(rho.shape + (NVAR,))
    U[..., RHO] = rho
    U[..., MX] = rho * s.vx
    U[..., MY] = rho * s.vy
    U[..., MZ] = rho * s.vz
    U[..., EN] = s.total_energy(gamma)
    U[..., BY] = s.By
    U[..., BZ] = s.Bz
    return U


def _pressure(U, Bx, gamma):
    rho = U[..., RHO]
    ke = 0.5 * (U[..., MX] ** 2 + U[..., MY] ** 2 + U[..., MZ] ** 2) / rho
    me = 0.5 * (Bx ** 2 + U[..., BY] ** 2 + U[..., BZ] ** 2)
    return (gamma - 1.0) * (U[..., EN] - ke - me)


def conserved_to_primitive(U, Bx: float, gamma: float, check: bool = True) -> FluidState:
    U = np.asarray(U, dtype=float)
    rho = U[..., RHO]
    p = _pressure(U, Bx, gamma)
    if check:
        _check_positive(rho, "density")
        _check_positive(p, "pressure")
    return FluidState(rho, U[..., MX] / rho, U[..., MY] / rho, U[..., MZ] / rho,
                      U[..., BY], U[..., BZ], p, Bx=Bx)


def _check_positive(a, what):
    a = np.atleast_1d(a)
    bad = ~(a > 0)
    if bad.any():
        i = int(np.argmax(bad))
        raise PositivityError(f"nonpositive {what} {a[i]:.6g}", cell=i)


def analytic_flux(U, Bx: float, gamma: float) -> np.ndarray:
    U = np.asarray(U, dtype=float)
    rho = U[..., RHO]
    vx, vy, vz = U[..., MX] / rho, U[..., MY] / rho, U[..., MZ] / rho
    By, Bz = U[..., BY], U[..., BZ]
    p = _pressure(U, Bx, gamma)
    pstar = p + 0.5 * (Bx ** 2 + By ** 2 + Bz ** 2)
    F = np.empty_like(U)
    F[..., RHO] = U[..., MX]
    F[..., MX] = U[..., MX] * vx + pstar - Bx ** 2
    F[..., MY] = U[..., MY] * vx - Bx * By
    F[..., MZ] = U[..., MZ] * vx - Bx * Bz
    F[..., EN] = (U[..., EN] + pstar) * vx - Bx * (Bx * vx + By * vy + Bz * vz)
    F[..., BY] = By * vx - Bx * vy
    F[..., BZ] = Bz * vx - Bx * vz
    return F


def fast_speed(U, Bx: float, gamma: float) -> np.ndarray:
    rho = U[..., RHO]
    p = np.maximum(_pressure(U, Bx, gamma), 0.0)
    a2 = gamma * p / rho
    b2 = (Bx ** 2 + U[..., BY] ** 2 + U[..., BZ] ** 2) / rho
    bx2 = Bx ** 2 / rho
    disc = np.sqrt(np.maximum((a2 + b2) ** 2 - 4 * a2 * bx2, 0.0))
    return np.sqrt(0.5 * (a2 + b2 + disc))


def minmod(a, b):
    return np.where(a * b > 0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


def reconstruct_linear(cells) -> tuple[np.ndarray, np.ndarray]:
    '''
    Minmod-limited linear traces.

    `cells` has shape (n, ...) with n >= 2. Returns (left, right) states at the
    n-1 interior interfaces; the end cells use zero slope.
    '''
    u = np.asarray(cells, dtype=float)
    if u.shape[0] < 2:
        raise ValueError("reconstruction needs at least two cells")
    slope = np.zeros_like(u)
    if u.shape[0] > 2:
        slope[1:-1] = minmod(u[1:-1] - u[:-2], u[2:] - u[1:-1])
    left = u[:-1] + 0.5 * slope[:-1]
    right = u[1:] - 0.5 * slope[1:]
    return left, right


def roe_eigensystem(UL, UR, Bx: float, gamma: float):
    '''
    Roe-averaged eigenvalues and right eigenvectors (columns) for adiabatic MHD,
    The sound speed carries the (2 - gamma) X correction for the jump in the
    transverse field, which makes F_R - F_L = R diag(lam) R^-1 (U_R - U_L) exact.
    Returns (lam, Rm, cf, ok) with lam (...,7), Rm (...,7,7).
    '''
    g1, g2 = gamma - 1.0, gamma - 2.0
    rl, rr = UL[..., RHO], UR[..., RHO]
    sl, sr = np.sqrt(rl), np.sqrt(rr)
    isum = 1.0 / (sl + sr)
    pl, pr = _pressure(UL, Bx, gamma), _pressure(UR, Bx, gamma)
    d = sl * sr
    v1 = (UL[..., MX] / sl + UR[..., MX] / sr) * isum
    v2 = (UL[..., MY] / sl + UR[..., MY] / sr) * isum
    v3 = (UL[..., MZ] / sl + UR[..., MZ] / sr) * isum
    b2 = (UL[..., BY] * sr + UR[..., BY] * sl) * isum
    b3 = (UL[..., BZ] * sr + UR[..., BZ] * sl) * isum
    pbl = 0.5 * (Bx ** 2 + UL[..., BY] ** 2 + UL[..., BZ] ** 2)
    pbr = 0.5 * (Bx ** 2 + UR[..., BY] ** 2 + UR[..., BZ] ** 2)
    h = ((UL[..., EN] + pl + pbl) / sl + (UR[..., EN] + pr + pbr) / sr) * isum
    X = 0.5 * ((UL[..., BY] - UR[..., BY]) ** 2 + (UL[..., BZ] - UR[..., BZ]) ** 2) * isum ** 2

    vsq = v1 * v1 + v2 * v2 + v3 * v3
    btsq = b2 * b2 + b3 * b3
    bt_starsq = btsq
    vaxsq = Bx * Bx / d
    hp = h - (vaxsq + btsq / d)
    raw_asq = g1 * (hp - 0.5 * vsq) - g2 * X
    ok = np.isfinite(raw_asq) & (raw_asq > 0)
    twid_asq = np.where(ok, raw_asq, 1.0)
    ct2 = bt_starsq / d
    tsum = vaxsq + ct2 + twid_asq
    tdif = vaxsq + ct2 - twid_asq
    cf2_cs2 = np.sqrt(np.maximum(tdif * tdif + 4.0 * twid_asq * ct2, 0.0))
    cfsq = 0.5 * (tsum + cf2_cs2)
    cf = np.sqrt(cfsq)
    cssq = twid_asq * vaxsq / cfsq
    cs = np.sqrt(cssq)
    ca = np.sqrt(vaxsq)

    bt = np.sqrt(btsq)
    has_bt = bt > 0
    bet2 = np.where(has_bt, b2 / np.where(has_bt, bt, 1.0), 1.0)
    bet3 = np.where(has_bt, b3 / np.where(has_bt, bt, 1.0), 0.0)
    bet2s, bet3s = bet2, bet3
    bet_starsq = bet2s ** 2 + bet3s ** 2
    bt_star = np.sqrt(np.maximum(bt_starsq, 0.0))

    dfs = cfsq - cssq
    safe = np.where(dfs > 0, dfs, 1.0)
    af = np.sqrt(np.clip((twid_asq - cssq) / safe, 0.0, None))
    as_ = np.sqrt(np.clip((cfsq - twid_asq) / safe, 0.0, None))
    c1 = dfs <= 0
    c2 = (~c1) & (twid_asq - cssq <= 0)
    c3 = (~c1) & (~c2) & (cfsq - twid_asq <= 0)
    af = np.where(c1 | c3, 1.0, np.where(c2, 0.0, af))
    as_ = np.where(c1 | c3, 0.0, np.where(c2, 1.0, as_))

    sqrtd = np.sqrt(d)
    isqrtd = 1.0 / sqrtd
    s = 1.0 if Bx >= 0 else -1.0
    twid_a = np.sqrt(twid_asq)
    qf = cf * af * s
    qs = cs * as_ * s
    afp = af * twid_a * isqrtd
    asp = as_ * twid_a * isqrtd
    afpbb = afp * bt_star * bet_starsq
    aspbb = asp * bt_star * bet_starsq
    vb = v2 * bet2s + v3 * bet3s

    shp = v1.shape
    Rm = np.zeros(shp + (NVAR, NVAR))
    # fast, minus
    Rm[..., :, 0] = np.stack([af, af * (v1 - cf), af * v2 + qs * bet2s, af * v3 + qs * bet3s,
                              af * (hp - v1 * cf) + qs * vb + aspbb,
                              asp * bet2s, asp * bet3s], axis=-1)
    # Alfven, minus
    Rm[..., :, 1] = np.stack([0 * v1, 0 * v1, -bet3, bet2, -(v2 * bet3 - v3 * bet2),
                              -bet3 * s * isqrtd, bet2 * s * isqrtd], axis=-1)
    # slow, minus
    Rm[..., :, 2] = np.stack([as_, as_ * (v1 - cs), as_ * v2 - qf * bet2s, as_ * v3 - qf * bet3s,
                              as_ * (hp - v1 * cs) - qf * vb - afpbb,
                              -afp * bet2s, -afp * bet3s], axis=-1)
    # entropy
    Rm[..., :, 3] = np.stack([1 + 0 * v1, v1, v2, v3, 0.5 * vsq + g2 * X / g1,
                              0 * v1, 0 * v1], axis=-1)
    # slow, plus
    Rm[..., :, 4] = np.stack([as_, as_ * (v1 + cs), as_ * v2 + qf * bet2s, as_ * v3 + qf * bet3s,
                              as_ * (hp + v1 * cs) + qf * vb - afpbb,
                              -afp * bet2s, -afp * bet3s], axis=-1)
    # Alfven, plus
    Rm[..., :, 5] = np.stack([0 * v1, 0 * v1, bet3, -bet2, v2 * bet3 - v3 * bet2,
                              -bet3 * s * isqrtd, bet2 * s * isqrtd], axis=-1)
    # fast, plus
    Rm[..., :, 6] = np.stack([af, af * (v1 + cf), af * v2 - qs * bet2s, af * v3 - qs * bet3s,
                              af * (hp + v1 * cf) - qs * vb + aspbb,
                              asp * bet2s, asp * bet3s], axis=-1)
    lam = np.stack([v1 - cf, v1 - ca, v1 - cs, v1, v1 + cs, v1 + ca, v1 + cf], axis=-1)
    return lam, Rm, cf, ok


def lax_friedrichs_flux(UL, UR, Bx: float, gamma: float) -> np.ndarray:
    FL, FR = analytic_flux(UL, Bx, gamma), analytic_flux(UR, Bx, gamma)
    smax = np.maximum(np.abs(UL[..., MX] / UL[..., RHO]) + fast_speed(UL, Bx, gamma),
                      np.abs(UR[..., MX] / UR[..., RHO]) + fast_speed(UR, Bx, gamma))
    return 0.5 * (FL + FR) - 0.5 * smax[..., None] * (UR - UL)


def hll_flux(UL, UR, Bx: float, gamma: float) -> np.ndarray:
    '''Two-wave HLL flux with Davis speed estimates.'''
    FL, FR = analytic_flux(UL, Bx, gamma), analytic_flux(UR, Bx, gamma)
    vl, vr = UL[..., MX] / UL[..., RHO], UR[..., MX] / UR[..., RHO]
    cl, cr = fast_speed(UL, Bx, gamma), fast_speed(UR, Bx, gamma)
    sL = np.minimum(vl - cl, vr - cr)[..., None]
    sR = np.maximum(vl + cl, vr + cr)[..., None]
    mid = (sR * FL - sL * FR + sL * sR * (UR - UL)) / (sR - sL)
    return np.where(sL >= 0, FL, np.where(sR <= 0, FR, mid))


def roe_flux(UL, UR, Bx: float, gamma: float, entropy_fix: float = 0.1) -> np.ndarray:
    '''
    Roe flux F = (F_L + F_R)/2 - 1/2 sum_k |lam_k| a_k r_k, with a Harten
    entropy fix of width entropy_fix * c_fast. Interfaces whose Roe average is
    not admissible fall back to the local Lax-Friedrichs flux.
    '''
    UL = np.asarray(UL, dtype=float)
    UR = np.asarray(UR, dtype=float)
    scalar = UL.ndim == 1
    if scalar:
        UL, UR = UL[None], UR[None]
    FL, FR = analytic_flux(UL, Bx, gamma), analytic_flux(UR, Bx, gamma)
    lam, Rm, cf, ok = roe_eigensystem(UL, UR, Bx, gamma)
    dU = UR - UL
    with np.errstate(all="ignore"):
        alpha = np.linalg.solve(np.where(ok[..., None, None], Rm, np.eye(NVAR)), dU[..., None])[..., 0]
    delta = (entropy_fix * cf)[..., None]
    alam = np.abs(lam)
    if entropy_fix > 0:
        alam = np.where(alam < delta, (lam * lam + delta * delta) / (2 * np.where(delta > 0, delta, 1.0)), alam)
    diss = np.einsum("...ij,...j->...i", Rm, alam * alpha)
    F = 0.5 * (FL + FR) - 0.5 * diss
    bad = ~ok | ~np.all(np.isfinite(F), axis=-1)
    if bad.any():
        log.info("Roe average not admissible at %d interface(s); using Lax-Friedrichs", int(bad.sum()))
        F[bad] = lax_friedrichs_flux(UL[bad], UR[bad], Bx, gamma)
    return F[0] if scalar else F


def _interface_states(U, ghostL, ghostR, Bx, gamma, dtdx=None):
    ext = np.concatenate([ghostL[None], ghostL[None], U, ghostR[None], ghostR[None]], axis=0)
    slope = np.zeros_like(ext)
    slope[1:-1] = minmod(ext[1:-1] - ext[:-2], ext[2:] - ext[1:-1])
    lo = ext - 0.5 * slope   # trace at the left face of each cell
    hi = ext + 0.5 * slope   # trace at the right face
    if dtdx is not None:
        # Hancock half step: both traces move by the cell's own flux difference
        bad = ~((lo[:, RHO] > 0) & (hi[:, RHO] > 0)
                & (_pressure(lo, Bx, gamma) > 0) & (_pressure(hi, Bx, gamma) > 0))
        lo[bad] = ext[bad]
        hi[bad] = ext[bad]
        corr = 0.5 * dtdx * (analytic_flux(hi, Bx, gamma) - analytic_flux(lo, Bx, gamma))
        lo = lo - corr
        hi = hi - corr
    # physical interfaces sit between ext[k] and ext[k+1] for k = 1..n+1
    left, right = hi[1:-2].copy(), lo[2:-1].copy()
    for side, base in ((left, ext[1:-2]), (right, ext[2:-1])):
        bad = ~((side[:, RHO] > 0) & (_pressure(side, Bx, gamma) > 0))
        if bad.any():
            side[bad] = base[bad]
    return left, right


def mhd_fluxes(U, Bx: float, gamma: float, ghostL=None, ghostR=None,
               dtdx: float | None = None) -> np.ndarray:
    '''
    Roe fluxes at the n+1 interfaces of an n-cell array with Dirichlet ghosts.
    Passing dtdx = dt/dx enables the MUSCL-Hancock half-step predictor.
    '''
    U = np.asarray(U, dtype=float)
    ghostL = U[0] if ghostL is None else np.asarray(ghostL, dtype=float)
    ghostR = U[-1] if ghostR is None else np.asarray(ghostR, dtype=float)
    left, right = _interface_states(U, ghostL, ghostR, Bx, gamma, dtdx)
    return roe_flux(left, right, Bx, gamma)


def cfl_number(U, dt: float, dx: float, Bx: float, gamma: float) -> float:
    v = np.abs(U[:, MX] / U[:, RHO])
    return float(np.max(v + fast_speed(U, Bx, gamma)) * dt / dx)


def explicit_mhd_update(U, dt: float, dx: float, Bx: float, gamma: float,
                        ghostL=None, ghostR=None, warn: bool = True, predictor: bool = True):
    '''
    One forward-Euler conservative step of all seven components.

    Returns (U_new, F) where F holds the interface fluxes used. The coupled
    scheme keeps only rho, rho*vy, rho*vz, By, Bz from U_new.
    '''
    U = np.asarray(U, dtype=float)
    if warn:
        cfl = cfl_number(U, dt, dx, Bx, gamma)
        if cfl > 1.0:
            warnings.warn(f"fluid CFL number {cfl:.3f} exceeds 1", RuntimeWarning, stacklevel=2)
    F = mhd_fluxes(U, Bx, gamma, ghostL, ghostR, dt / dx if predictor else None)
    Unew = U - dt / dx * (F[1:] - F[:-1])
    _check_positive(Unew[:, RHO], "density")
    return Unew, F
