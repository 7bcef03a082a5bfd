"""Benchmark presets, opacity fields, initial/boundary data and the flat
key=value scenario file format."""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

import numpy as np

from .core import ConfigurationError, InvalidArgumentError, Mesh1D, NondimParams
from .mhd import FluidState, primitive_to_conserved
from .quadrature import build_quadrature
from .ugks import FOUR_PI

PRIMITIVES = ("rho", "vx", "vy", "vz", "By", "Bz", "p")


class OpacityField:
    '''
    sigma(x, rho, T) from a short descriptor string:

      const:<v>              constant
      multiscale             [3 + 10(tanh(1-11x) + tanh(1+11x))]^2.5
      powerlaw:<k>:<m>       rho^k T^m (depends on the current state)
      table:<v1>;<v2>;...    one value per cell

    Interface values use the closed form at the interface when one exists;
    state-dependent and tabulated fields average the two neighbouring cells
    (walls take the adjacent cell).
    '''

    def __init__(self, descriptor: str):
        self.descriptor = descriptor.strip()
        kind, _, rest = self.descriptor.partition(":")
        self.kind = kind
        try:
            if kind == "const":
                self.value = float(rest)
                if self.value < 0:
                    raise ValueError("negative opacity")
            elif kind == "multiscale":
                if rest:
                    raise ValueError("multiscale takes no arguments")
            elif kind == "powerlaw":
                k, m = rest.split(":")
                self.k, self.m = float(k), float(m)
            elif kind == "table":
                self.table = np.array([float(v) for v in rest.split(";")])
                if np.any(self.table < 0):
                    raise ValueError("negative opacity")
            else:
                raise ValueError(f"unknown opacity kind {kind!r}")
        except ValueError as exc:
            raise ConfigurationError(f"bad opacity descriptor {descriptor!r}: {exc}") from exc

    @property
    def state_dependent(self) -> bool:
        return self.kind == "powerlaw"

    def at(self, x, rho=None, T=None):
        x = np.asarray(x, dtype=float)
        if self.kind == "const":
            return np.full(x.shape, self.value)
        if self.kind == "multiscale":
            return (3.0 + 10.0 * (np.tanh(1 - 11 * x) + np.tanh(1 + 11 * x))) ** 2.5
        if self.kind == "powerlaw":
            return np.asarray(rho, dtype=float) ** self.k * np.asarray(T, dtype=float) ** self.m
        if self.table.size != x.size:
            raise InvalidArgumentError(
                f"opacity table has {self.table.size} entries for {x.size} cells")
        return self.table.copy()

    def cells_and_faces(self, xc, xf, rho, T):
        c = self.at(xc, rho, T)
        if self.kind in ("const", "multiscale"):
            return c, self.at(xf)
        f = np.empty(c.size + 1)
        f[1:-1] = 0.5 * (c[:-1] + c[1:])
        f[0], f[-1] = c[0], c[-1]
        return c, f

    def __repr__(self):
        return f"OpacityField({self.descriptor!r})"


class ScenarioOpacity:
    '''Callable used by the solvers: (xc, xf, rho, T) -> (sa_c, ss_c, sa_f, ss_f).'''

    def __init__(self, sigma_a: OpacityField, sigma_s: OpacityField):
        self.sigma_a, self.sigma_s = sigma_a, sigma_s

    def __call__(self, xc, xf, rho, T):
        sa_c, sa_f = self.sigma_a.cells_and_faces(xc, xf, rho, T)
        ss_c, ss_f = self.sigma_s.cells_and_faces(xc, xf, rho, T)
        return sa_c, ss_c, sa_f, ss_f


def _tuple(v, n, key):
    if isinstance(v, str):
        v = [s for s in v.replace(";", ",").split(",") if s.strip()]
    try:
        out = tuple(float(s) for s in v)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"{key}: expected {n} numbers") from exc
    if len(out) != n:
        raise ConfigurationError(f"{key}: expected {n} numbers, got {len(out)}")
    return out


@dataclass(frozen=True)
class ScenarioSpec:
    '''
    A complete run description. `left`/`right` are primitive states
    (rho, vx, vy, vz, By, Bz, p) for a Riemann problem at x0; `initial = blob`
    selects the opaque-blob density profile at unit pressure instead.
    Temperatures follow T = p / (R_ideal rho). Tr_left/Tr_right default to the
    material temperature. T_L/T_R are the wall material temperatures used in
    the interface reconstruction (default: boundary-cell temperatures);
    Trad_L/Trad_R set the isotropic inflow b = Trad^4/(4 pi) (default: the
    boundary-cell radiation temperatures).
    '''
    name: str
    a: float
    b: float
    regime: str = "noneq"
    eps: float = 1.0
    c: float = 1.0
    P0: float = 0.0
    gamma: float = 5.0 / 3.0
    R_ideal: float = 1.0
    Bx: float = 0.0
    La: float | None = None
    Ls: float | None = None
    curlyC: float | None = None
    sigma_a: str = "const:1"
    sigma_s: str = "const:1"
    initial: str = "riemann"
    left: tuple = (1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0)
    right: tuple = (1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0)
    x0: float = 0.0
    Tr_left: float | None = None
    Tr_right: float | None = None
    T_L: float | None = None
    T_R: float | None = None
    Trad_L: float | None = None
    Trad_R: float | None = None
    mode: str = "coupled"
    t_end: float = 0.1
    dt_factor: float = 0.2
    nx: int = 100
    quad_order: int = 8

    def __post_init__(self):
        if not self.b > self.a:
            raise ConfigurationError("domain needs b > a")
        if not self.t_end >= 0:
            raise ConfigurationError("t_end must be nonnegative")
        if self.initial not in ("riemann", "blob"):
            raise ConfigurationError(f"unknown initial kind {self.initial!r}")
        if self.mode not in MODES:
            raise ConfigurationError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if not self.dt_factor > 0:
            raise ConfigurationError("dt_factor must be positive")
        object.__setattr__(self, "left", _tuple(self.left, 7, "left"))
        object.__setattr__(self, "right", _tuple(self.right, 7, "right"))
        OpacityField(self.sigma_a)
        OpacityField(self.sigma_s)
        self.params()

    def params(self) -> NondimParams:
        try:
            return NondimParams.from_regime(self.regime, self.eps, self.c, P0=self.P0,
                                            gamma=self.gamma, R_ideal=self.R_ideal, Bx=self.Bx,
                                            La=self.La, Ls=self.Ls, curlyC=self.curlyC)
        except InvalidArgumentError as exc:
            raise ConfigurationError(str(exc)) from exc

    def opacity(self) -> ScenarioOpacity:
        return ScenarioOpacity(OpacityField(self.sigma_a), OpacityField(self.sigma_s))

    def with_(self, **kw) -> "ScenarioSpec":
        return replace(self, **kw)


MODES = ("coupled", "frozen", "noneq-limit", "eq-limit", "explicit")


def blob_density(x):
    return 1.0 + 5.5 * (np.tanh(1 - 17 * np.asarray(x)) + np.tanh(1 + 17 * np.asarray(x)))


def initial_fluid(spec: ScenarioSpec, mesh: Mesh1D) -> tuple[FluidState, np.ndarray]:
    '''Primitive initial state and the initial radiation temperature per cell.'''
    x = mesh.centers
    if spec.initial == "blob":
        rho = blob_density(x)
        zero = np.zeros_like(x)
        fs = FluidState(rho, zero, zero, zero, zero, zero, np.ones_like(x), spec.Bx)
        Tr = 1.0 / (spec.R_ideal * rho)
        return fs, Tr
    L = np.array(spec.left)
    R = np.array(spec.right)
    prim = np.where((x < spec.x0)[:, None], L, R)
    fs = FluidState(*(prim[:, k].copy() for k in range(7)), spec.Bx)
    T = fs.p / (spec.R_ideal * fs.rho)
    Tr = T.copy()
    if spec.Tr_left is not None:
        Tr[x < spec.x0] = spec.Tr_left
    if spec.Tr_right is not None:
        Tr[x >= spec.x0] = spec.Tr_right
    return fs, Tr


def build(spec: ScenarioSpec, nx: int | None = None, frozen: bool | None = None):
    '''Assemble (Problem, State) for the coupled and reference solvers.'''
    from .coupled import Problem, State

    nx = spec.nx if nx is None else int(nx)
    if nx < 4:
        raise InvalidArgumentError("nx must be at least 4")
    mesh = Mesh1D(spec.a, spec.b, nx)
    p = spec.params()
    quad = build_quadrature(spec.quad_order)
    fs, Tr = initial_fluid(spec, mesh)
    U = primitive_to_conserved(fs, p.gamma)
    T = fs.p / (p.R_ideal * fs.rho)
    T_L = float(T[0]) if spec.T_L is None else float(spec.T_L)
    T_R = float(T[-1]) if spec.T_R is None else float(spec.T_R)
    TrL = float(Tr[0]) if spec.Trad_L is None else float(spec.Trad_L)
    TrR = float(Tr[-1]) if spec.Trad_R is None else float(spec.Trad_R)
    bL = np.full(quad.order, TrL ** 4 / FOUR_PI)
    bR = np.full(quad.order, TrR ** 4 / FOUR_PI)
    I = np.repeat((Tr ** 4 / FOUR_PI)[:, None], quad.order, axis=1)
    if frozen is None:
        frozen = spec.mode == "frozen"
    prob = Problem(mesh, p, quad, spec.opacity(), U[0].copy(), U[-1].copy(), bL, bR, T_L, T_R,
                   frozen_fluid=frozen)
    return prob, State(U, I, 0.0)


def evaluate_opacity(spec: ScenarioSpec, x, rho=None, T=None):
    '''(sigma_a, sigma_s) at points x; state-dependent fields need rho and T.'''
    x = np.asarray(x, dtype=float)
    sa, ss = OpacityField(spec.sigma_a), OpacityField(spec.sigma_s)
    if (sa.state_dependent or ss.state_dependent) and (rho is None or T is None):
        if spec.initial == "blob":
            rho = blob_density(x)
            T = 1.0 / (spec.R_ideal * rho)
        else:
            raise InvalidArgumentError("state-dependent opacity needs rho and T")
    return sa.at(x, rho, T), ss.at(x, rho, T)


# unit-scaled runs use l = 1 cm and a_inf = 3 cm/s, so time is measured in units of
# 1/3 s and the scaled light speed is 3e10 / 3 = 1e10
_STIFF_C = 1.0e10
_BRIO_L = (1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0)
_BRIO_R = (0.125, 0.0, 0.0, 0.0, -1.0, 0.0, 0.1)
STIFF_SIGMAS = {1: (1.0, 1.0), 2: (1e3, 1e-3), 3: (1e-3, 1e3)}


def stiff_case(k: int = 1) -> ScenarioSpec:
    if k not in STIFF_SIGMAS:
        raise InvalidArgumentError(f"stiff case must be 1, 2 or 3, got {k}")
    sa, ss = STIFF_SIGMAS[k]
    return replace(PRESETS["stiff-cases"], name=f"stiff-cases-{k}",
                   sigma_a=f"const:{sa!r}", sigma_s=f"const:{ss!r}")


PRESETS: dict[str, ScenarioSpec] = {
    "brio-wu": ScenarioSpec(
        name="brio-wu", a=-1.0, b=1.0, regime="noneq", eps=1e-5, c=0.1, P0=0.0, gamma=2.0,
        R_ideal=1.0, Bx=0.75, sigma_a=f"const:{1/3!r}", sigma_s=f"const:{1/3!r}",
        left=_BRIO_L, right=_BRIO_R, t_end=0.2, dt_factor=0.2, nx=800),
    "opaque-blob": ScenarioSpec(
        name="opaque-blob", a=-0.4, b=0.4, regime="unit", eps=1.0, c=5000.0, P0=0.0,
        La=1.0, Ls=1.0, curlyC=5000.0, sigma_a="powerlaw:2:-3.5", sigma_s="const:0",
        initial="blob", Trad_L=6.0, mode="frozen", t_end=10.0, dt_factor=0.01, nx=800),
    "radshock-m1.2": ScenarioSpec(
        name="radshock-m1.2", a=-0.02, b=0.02, regime="noneq", eps=1.0, c=3e6, P0=1e-4,
        gamma=5 / 3, R_ideal=0.6, sigma_a=f"const:{1/3!r}", sigma_s="const:1000000.0",
        left=(1.0, 1.2, 0, 0, 0, 0, 0.6),
        right=(1.298088, 0.9244363, 0, 0, 0, 0, 0.6 * 1.298088 * 1.194888),
        Tr_left=1.0, Tr_right=1.194888, t_end=0.04, dt_factor=0.2, nx=32),
    "radshock-m2": ScenarioSpec(
        name="radshock-m2", a=-0.02, b=0.02, regime="noneq", eps=1.0, c=3e6, P0=1e-4,
        gamma=5 / 3, R_ideal=0.6, sigma_a=f"const:{1/3!r}", sigma_s="const:1000000.0",
        left=(1.0, 2.0, 0, 0, 0, 0, 0.6),
        right=(2.287066, 0.874482876, 0, 0, 0, 0, 0.6 * 2.287066 * 2.077223),
        Tr_left=1.0, Tr_right=2.077223, t_end=0.04, dt_factor=0.2, nx=32),
    "stiff-cases": ScenarioSpec(
        name="stiff-cases", a=-1.0, b=1.0, regime="unit", eps=1.0, c=_STIFF_C, P0=1e-4,
        gamma=2.0, R_ideal=1.0, Bx=0.75, La=1.0, Ls=1.0, curlyC=_STIFF_C,
        sigma_a="const:1.0", sigma_s="const:1.0", left=_BRIO_L, right=_BRIO_R,
        t_end=2.034e-4, dt_factor=1e-4, nx=200),
    "multiscale-sigma": ScenarioSpec(
        name="multiscale-sigma", a=-1.0, b=1.0, regime="unit", eps=1.0, c=_STIFF_C, P0=1e-4,
        gamma=2.0, R_ideal=1.0, Bx=0.75, La=1.0, Ls=1.0, curlyC=_STIFF_C,
        sigma_a=f"const:{1/3!r}", sigma_s="multiscale", left=_BRIO_L, right=_BRIO_R,
        t_end=2.0e-7, dt_factor=2.0e-7, nx=800),
}


def preset(name: str) -> ScenarioSpec:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; valid presets: {', '.join(PRESETS)}") from None


# ---- key=value files -------------------------------------------------------

_FIELDS = {f.name: f for f in fields(ScenarioSpec)}
_FLOAT_KEYS = {"a", "b", "eps", "c", "P0", "gamma", "R_ideal", "Bx", "La", "Ls", "curlyC",
               "x0", "Tr_left", "Tr_right", "T_L", "T_R", "Trad_L", "Trad_R", "t_end", "dt_factor"}
_INT_KEYS = {"nx", "quad_order"}


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ",".join(repr(float(x)) for x in v)
    return str(v)


def dumps(spec: ScenarioSpec) -> str:
    lines = [f"# scenario {spec.name}"]
    for name in _FIELDS:
        v = getattr(spec, name)
        if v is None:
            continue
        lines.append(f"{name} = {_fmt(v)}")
    return "\n".join(lines) + "\n"


def loads(text: str, base: ScenarioSpec | None = None) -> ScenarioSpec:
    '''
    Parse a key=value scenario. A `preset = <name>` line (or `base`) supplies
    defaults that later keys override. Unknown keys are errors.
    '''
    kv: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected key = value, got {raw!r}")
        key, _, val = (s.strip() for s in line.partition("="))
        if key == "preset":
            try:
                base = preset(val)
            except KeyError as exc:
                raise ConfigurationError(f"line {lineno}: {exc.args[0]}") from None
            continue
        if key not in _FIELDS:
            raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
        if key in kv:
            raise ConfigurationError(f"line {lineno}: duplicate key {key!r}")
        try:
            if val.lower() == "none":
                kv[key] = None
            elif key in _FLOAT_KEYS:
                kv[key] = float(val)
            elif key in _INT_KEYS:
                kv[key] = int(val)
            elif key in ("left", "right"):
                kv[key] = _tuple(val, 7, key)
            else:
                kv[key] = val
        except ValueError as exc:
            raise ConfigurationError(f"line {lineno}: bad value for {key}: {val!r}") from exc
    if base is None:
        missing = [k for k in ("name", "a", "b") if k not in kv]
        if missing:
            raise ConfigurationError(f"missing required keys: {', '.join(missing)}")
        return ScenarioSpec(**kv)
    return replace(base, **kv)


def load(path) -> ScenarioSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            return loads(fh.read())
    except OSError as exc:
        raise ConfigurationError(f"cannot read scenario file {path}: {exc}") from exc


def save(spec: ScenarioSpec, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(spec))
