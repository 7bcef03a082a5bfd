"""Gauss-Legendre discrete ordinates on [-1, 1] and angular moments."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import InvalidArgumentError


@dataclass(frozen=True, eq=False)
class Quadrature:
    order: int
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def pos(self) -> np.ndarray:
        return self.nodes > 0

    @property
    def neg(self) -> np.ndarray:
        return self.nodes < 0


def _legendre(n: int, x: np.ndarray):
    # three-term recurrence; returns P_n(x) and P_n'(x)
    p0 = np.ones_like(x)
    p1 = x.copy()
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    return p1, dp


def build_quadrature(order: int = 8) -> Quadrature:
    '''
    Gauss-Legendre rule with `order` nodes, computed by Newton iteration.

    Order must be even and at least 2 so that no ordinate sits at n = 0.
    '''
    if not isinstance(order, (int, np.integer)) or order < 2 or order % 2:
        raise InvalidArgumentError(f"quadrature order must be an even integer >= 2, got {order!r}")
    n = int(order)
    k = np.arange(1, n + 1)
    x = np.cos(np.pi * (k - 0.25) / (n + 0.5))
    for _ in range(100):
        p, dp = _legendre(n, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    _, dp = _legendre(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order_idx = np.argsort(x)
    x, w = x[order_idx], w[order_idx]
    # enforce exact symmetry
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return Quadrature(n, x, w)


def moment(values, k: int, quad: Quadrature):
    '''<n^k f> = 1/2 sum_m w_m n_m^k f_m; the last axis of `values` runs over ordinates.'''
    f = np.asarray(values, dtype=float)
    if f.shape[-1:] != (quad.order,):
        raise InvalidArgumentError(f"expected {quad.order} ordinate values, got shape {f.shape}")
    if k not in (0, 1, 2, 3):
        raise InvalidArgumentError(f"moment order must be 0..3, got {k}")
    return 0.5 * (f * (quad.weights * quad.nodes ** k)).sum(axis=-1)
