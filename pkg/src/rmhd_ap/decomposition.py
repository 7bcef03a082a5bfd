"""Split of the intensity into I = J + n R + Q with <Q> = <nQ> = 0."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import NumericError
from .quadrature import Quadrature, moment


@dataclass
class CellRadiation:
    '''
    Decomposed intensity. Arrays may carry leading cell axes; the ordinate
    axis is last for `intensity` and `Q`.
    '''
    intensity: np.ndarray
    J: np.ndarray
    R: np.ndarray
    Q: np.ndarray
    K_Q: np.ndarray
    Q3: np.ndarray


def decompose(I, quad: Quadrature) -> CellRadiation:
    I = np.asarray(I, dtype=float)
    if not np.all(np.isfinite(I)):
        bad = np.argwhere(~np.isfinite(I))[0]
        raise NumericError("non-finite intensity", cell=int(bad[0]) if I.ndim > 1 else None)
    J = moment(I, 0, quad)
    R = 3.0 * moment(I, 1, quad)
    n = quad.nodes
    Q = I - J[..., None] - n * R[..., None]
    return CellRadiation(I.copy(), J, R, Q, moment(Q, 2, quad), moment(Q, 3, quad))


def recompose(cell: CellRadiation, quad: Quadrature) -> np.ndarray:
    J = np.asarray(cell.J, dtype=float)
    R = np.asarray(cell.R, dtype=float)
    return J[..., None] + quad.nodes * R[..., None] + cell.Q


def constraint_norms(Q, quad: Quadrature) -> tuple[float, float]:
    '''L2 norms over cells of <Q> and <nQ>.'''
    return (float(np.linalg.norm(moment(Q, 0, quad))),
            float(np.linalg.norm(moment(Q, 1, quad))))
