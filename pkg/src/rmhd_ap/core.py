"""Shared parameter and mesh types, error classes and regime scalings."""
from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

import numpy as np

REGIMES = ("noneq", "eq", "unit")


class RmhdError(Exception):
    """Base class for every error raised by the package."""


class InvalidArgumentError(RmhdError, ValueError):
    pass


class NumericError(RmhdError, ArithmeticError):
    def __init__(self, msg: str, cell: int | None = None):
        super().__init__(msg if cell is None else f"{msg} (cell {cell})")
        self.cell = cell


class PositivityError(NumericError):
    pass


class ConvergenceError(RmhdError):
    def __init__(self, msg: str, residual: float = float("nan"), iterations: int = 0):
        super().__init__(f"{msg}; final residual {residual:.3e} after {iterations} iterations")
        self.residual = residual
        self.iterations = iterations


class ConfigurationError(RmhdError, ValueError):
    pass


class SolverError(RmhdError):
    """Wraps a failure inside a time loop with step/time context."""

    def __init__(self, msg: str, step: int, time: float):
        super().__init__(f"step {step}, t={time:.6g}: {msg}")
        self.step = step
        self.time = time


def derive_regime(regime: str, eps: float, c: float,
                  La: float | None = None, Ls: float | None = None,
                  curlyC: float | None = None) -> tuple[float, float, float]:
    '''
    Return the scaling triple (La, Ls, curlyC) for a regime tag.

    "noneq" gives (eps, 1/eps, c/eps), "eq" gives (1/eps, eps, c/eps).
    "unit" passes the explicit La, Ls, curlyC through (defaulting to 1, 1, c).
    '''
    if not (eps > 0 and c > 0):
        raise InvalidArgumentError(f"eps and c must be positive, got eps={eps}, c={c}")
    if regime == "noneq":
        return eps, 1.0 / eps, c / eps
    if regime == "eq":
        return 1.0 / eps, eps, c / eps
    if regime == "unit":
        La = 1.0 if La is None else La
        Ls = 1.0 if Ls is None else Ls
        curlyC = c if curlyC is None else curlyC
        if La <= 0 or Ls <= 0 or curlyC <= 0:
            raise InvalidArgumentError("La, Ls and curlyC must be positive")
        return La, Ls, curlyC
    raise InvalidArgumentError(f"unknown regime {regime!r}; expected one of {REGIMES}")


@dataclass(frozen=True)
class NondimParams:
    '''
    Nondimensional constants of the coupled system.

    curlyC is the scaled light speed, P0 the radiation/flow coupling, La and Ls
    multiply the absorption and scattering opacities.
    '''
    curlyC: float
    P0: float
    La: float
    Ls: float
    eps: float = 1.0
    c: float = 1.0
    gamma: float = 5.0 / 3.0
    R_ideal: float = 1.0
    Bx: float = 0.0
    a_coeff: float = field(init=False)

    def __post_init__(self):
        if not self.curlyC > 0:
            raise InvalidArgumentError("curlyC must be positive")
        if not (0 < self.eps <= 1):
            raise InvalidArgumentError("eps must lie in (0, 1]")
        if self.gamma <= 1:
            raise InvalidArgumentError("gamma must exceed 1")
        if self.R_ideal <= 0 or self.La <= 0 or self.Ls <= 0 or self.P0 < 0:
            raise InvalidArgumentError("R_ideal, La, Ls must be positive and P0 nonnegative")
        object.__setattr__(self, "a_coeff", self.R_ideal / (self.gamma - 1.0))

    @classmethod
    def from_regime(cls, regime: str, eps: float, c: float, P0: float = 0.0,
                    gamma: float = 5.0 / 3.0, R_ideal: float = 1.0, Bx: float = 0.0,
                    La: float | None = None, Ls: float | None = None,
                    curlyC: float | None = None) -> "NondimParams":
        La_, Ls_, C_ = derive_regime(regime, eps, c, La, Ls, curlyC)
        return cls(curlyC=C_, P0=P0, La=La_, Ls=Ls_, eps=eps, c=c, gamma=gamma,
                   R_ideal=R_ideal, Bx=Bx)

    def with_(self, **kw) -> "NondimParams":
        return replace(self, **kw)


@dataclass(frozen=True)
class Mesh1D:
    a: float
    b: float
    nx: int

    def __post_init__(self):
        if self.nx < 1 or not self.b > self.a:
            raise InvalidArgumentError("mesh needs nx >= 1 and b > a")

    @property
    def dx(self) -> float:
        return (self.b - self.a) / self.nx

    @property
    def interfaces(self) -> np.ndarray:
        # x_{i-1/2} = a + (i-1) dx, i = 1..nx+1
        return self.a + np.arange(self.nx + 1) * self.dx

    @property
    def centers(self) -> np.ndarray:
        xf = self.interfaces
        return 0.5 * (xf[:-1] + xf[1:])


def worker_count() -> int:
    '''Worker cap from RMHD_THREADS (default 1; invalid values fall back to 1).'''
    raw = os.environ.get("RMHD_THREADS", "").strip()
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)
