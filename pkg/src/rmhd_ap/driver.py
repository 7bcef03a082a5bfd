"""Time loop, CSV output, error norms and convergence studies."""
from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import InvalidArgumentError, RmhdError, SolverError, worker_count
from .coupled import State, step
from .decomposition import decompose
from .limits import LimitState, eq_limit_step, explicit_kinetic_step, noneq_limit_step
from .mhd import conserved_to_primitive
from .quadrature import moment
from .scenarios import MODES, ScenarioSpec, build
from .ugks import FOUR_PI

log = logging.getLogger(__name__)

COLUMNS = ("x", "rho", "vx", "vy", "vz", "By", "Bz", "p", "T", "T_r", "J", "R",
           "abs_mean_Q", "abs_mean_nQ")


@dataclass
class OutputFrame:
    time: float
    data: dict[str, np.ndarray]

    @property
    def nx(self) -> int:
        return len(self.data["x"])

    def __getitem__(self, key):
        return self.data[key]


@dataclass
class RunResult:
    frames: list[OutputFrame]
    steps: int = 0
    iterations: list[int] = field(default_factory=list)
    q_mean: list[float] = field(default_factory=list)
    q_flux: list[float] = field(default_factory=list)
    q_mean_raw: list[float] = field(default_factory=list)
    q_flux_raw: list[float] = field(default_factory=list)
    J_norm: list[float] = field(default_factory=list)
    gs_correction: list[float] = field(default_factory=list)

    @property
    def final(self) -> OutputFrame:
        return self.frames[-1]


def make_frame(t, mesh, params, quad, U, I=None, J=None) -> OutputFrame:
    s = conserved_to_primitive(U, params.Bx, params.gamma)
    T = s.p / (params.R_ideal * s.rho)
    z = np.zeros(mesh.nx)
    if I is not None:
        cell = decompose(I, quad)
        J, R = cell.J, cell.R
        mq, mnq = np.abs(moment(cell.Q, 0, quad)), np.abs(moment(cell.Q, 1, quad))
    else:
        J = T ** 4 / FOUR_PI if J is None else J
        R, mq, mnq = z, z, z
    data = dict(x=mesh.centers, rho=s.rho, vx=s.vx, vy=s.vy, vz=s.vz, By=s.By, Bz=s.Bz, p=s.p,
                T=T, T_r=np.maximum(FOUR_PI * J, 0.0) ** 0.25, J=J, R=R,
                abs_mean_Q=mq, abs_mean_nQ=mnq)
    return OutputFrame(float(t), {k: np.array(data[k], dtype=float) for k in COLUMNS})


def _schedule(t_end, dt, frames):
    '''Step sizes landing exactly on every requested output time and t_end.'''
    marks = sorted({float(f) for f in frames if 0 < f < t_end} | {float(t_end)})
    t = 0.0
    for m in marks:
        n = max(1, math.ceil((m - t) / dt - 1e-9))
        h = (m - t) / n
        for _ in range(n):
            yield h, False
        t = m
        yield 0.0, True


def run(spec: ScenarioSpec, nx: int | None = None, dt: float | None = None,
        dt_factor: float | None = None, mode: str | None = None, t_end: float | None = None,
        frames=(), eps: float | None = None) -> RunResult:
    '''
    Advance `spec` to t_end with a fixed step (dt, or dt_factor*dx) using the
    selected solver. Frames are emitted at t=0, at each requested time and at
    t_end.
    '''
    if eps is not None:
        spec = spec.with_(eps=eps)
    mode = spec.mode if mode is None else mode
    if mode not in MODES:
        raise InvalidArgumentError(f"unknown mode {mode!r}; expected one of {MODES}")
    t_end = spec.t_end if t_end is None else t_end
    prob, state = build(spec, nx,
                        frozen=mode == "frozen" or (spec.mode == "frozen" and mode != "coupled"))
    mesh, p, quad = prob.mesh, prob.params, prob.quad
    if dt is None:
        dt = (spec.dt_factor if dt_factor is None else dt_factor) * mesh.dx
    if not dt > 0:
        raise InvalidArgumentError("dt must be positive")
    res = RunResult([make_frame(0.0, mesh, p, quad, state.U, state.I)])
    if t_end <= 0:
        return res
    limit = mode in ("noneq-limit", "eq-limit")
    if limit:
        J0 = decompose(state.I, quad).J if mode == "noneq-limit" else None
        lstate = LimitState(state.U, J0, 0.0)
    t = 0.0
    nstep = 0
    for h, emit in _schedule(t_end, dt, frames):
        if emit:
            if limit:
                res.frames.append(make_frame(t, mesh, p, quad, lstate.U, None, lstate.J))
            else:
                res.frames.append(make_frame(t, mesh, p, quad, state.U, state.I))
            continue
        try:
            if mode == "noneq-limit":
                lstate = noneq_limit_step(lstate, h, prob)
            elif mode == "eq-limit":
                lstate = eq_limit_step(lstate, h, prob)
            elif mode == "explicit":
                state = explicit_kinetic_step(state, h, prob)
            else:
                state, info = step(state, h, prob)
                res.iterations.append(info.iterations)
                res.q_mean.append(info.q_mean)
                res.q_flux.append(info.q_flux)
                res.q_mean_raw.append(info.q_mean_raw)
                res.q_flux_raw.append(info.q_flux_raw)
                res.J_norm.append(info.J_norm)
                res.gs_correction.append(info.gs_correction)
        except RmhdError as exc:
            raise SolverError(f"{type(exc).__name__}: {exc}", nstep + 1, t) from exc
        t += h
        nstep += 1
    res.steps = nstep
    if res.gs_correction and max(res.gs_correction) > 1e-8:
        log.warning("largest Ghat Gauss-Seidel correction over the run: %.3e",
                    max(res.gs_correction))
    return res


def write_csv(frame: OutputFrame, path) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(COLUMNS)
            cols = [frame.data[c] for c in COLUMNS]
            for row in zip(*cols):
                w.writerow(["%.17g" % v for v in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def read_csv(path) -> OutputFrame:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    head, body = rows[0], rows[1:]
    arr = np.array([[float(v) for v in r] for r in body]).reshape(len(body), len(head))
    return OutputFrame(float("nan"), {h: arr[:, k] for k, h in enumerate(head)})


ERROR_FIELDS = ("rho", "p", "vx", "vy", "By", "T")


def restrict(values, factor: int):
    '''Cell-average a fine-grid array onto a grid `factor` times coarser.'''
    v = np.asarray(values, dtype=float)
    if v.size % factor:
        raise InvalidArgumentError("fine grid size is not a multiple of the coarse size")
    return v.reshape(-1, factor).mean(axis=1)


def error_norms(coarse: OutputFrame, fine: OutputFrame, dx: float | None = None) -> dict:
    '''
    L1 differences (cell-width weighted) between a coarse frame and a fine
    frame restricted onto it by exact cell averaging.
    '''
    if not math.isclose(coarse.time, fine.time, rel_tol=1e-12, abs_tol=1e-300):
        raise InvalidArgumentError(f"frame times differ: {coarse.time} vs {fine.time}")
    nc, nf = coarse.nx, fine.nx
    if nf % nc:
        raise InvalidArgumentError(f"fine grid ({nf}) is not a refinement of coarse ({nc})")
    r = nf // nc
    if dx is None:
        x = coarse["x"]
        dx = float(x[1] - x[0]) if nc > 1 else 1.0
    return {f: float(np.sum(np.abs(coarse[f] - restrict(fine[f], r))) * dx) for f in ERROR_FIELDS}


def convergence_study(spec: ScenarioSpec, nx_list, dt_rule=None, mode: str | None = None,
                      out=None) -> list[dict]:
    '''
    Run every resolution in nx_list and compare consecutive pairs. dt_rule
    maps dx to dt (default: spec.dt_factor * dx). Each row holds the two
    resolutions, the L1 error per field and, from the second row on, the
    observed order log2(e_prev / e).
    '''
    nx_list = [int(n) for n in nx_list]
    if len(nx_list) < 2 or any(b <= a or b % a for a, b in zip(nx_list, nx_list[1:])):
        raise InvalidArgumentError("nx_list must be increasing with each entry dividing the next")
    L = spec.b - spec.a
    dt_rule = dt_rule or (lambda dx: spec.dt_factor * dx)

    def one(n):
        return run(spec, nx=n, dt=dt_rule(L / n), mode=mode).final

    with ThreadPoolExecutor(max_workers=worker_count()) as ex:
        finals = list(ex.map(one, nx_list))
    rows = []
    for k in range(len(nx_list) - 1):
        e = error_norms(finals[k], finals[k + 1])
        row = {"nx": nx_list[k], "nx_fine": nx_list[k + 1]}
        row.update({f"err_{f}": v for f, v in e.items()})
        if rows:
            for f in ERROR_FIELDS:
                prev, cur = rows[-1][f"err_{f}"], e[f]
                row[f"order_{f}"] = (math.log(prev / cur) / math.log(nx_list[k] / nx_list[k - 1])
                                     if prev > 0 and cur > 0 else float("nan"))
        rows.append(row)
    if out is not None:
        keys = ["nx", "nx_fine"] + [f"err_{f}" for f in ERROR_FIELDS] + \
               [f"order_{f}" for f in ERROR_FIELDS]
        with open(out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(keys)
            for row in rows:
                w.writerow(["%.17g" % row[k] if isinstance(row.get(k), float) else row.get(k, "")
                            for k in keys])
    return rows
