"""Chebyshev interpolants of scalar functions, evaluated at symmetric matrices."""

from __future__ import annotations

from typing import Callable

import numpy as np
from numpy.polynomial import chebyshev as C


def interpolant(f: Callable[[np.ndarray], np.ndarray], a: float, b: float, degree: int) -> np.ndarray:
    """Chebyshev coefficients of the degree-``degree`` interpolant of f on [a, b]."""
    half, mid = 0.5 * (b - a), 0.5 * (b + a)
    return C.chebinterpolate(lambda x: f(half * x + mid), degree)


def sup_error(f: Callable[[np.ndarray], np.ndarray], coef: np.ndarray, a: float, b: float,
              samples: int = 2001) -> float:
    t = np.linspace(a, b, samples)
    x = (2.0 * t - (a + b)) / (b - a)
    return float(np.max(np.abs(C.chebval(x, coef) - f(t))))


def matrix_chebval(m: np.ndarray, coef: np.ndarray, a: float, b: float) -> np.ndarray:
    """sum_k c_k T_k(X) at X = (2M - (a+b)I)/(b-a), by Clenshaw's recurrence."""
    size = m.shape[0]
    eye = np.eye(size)
    x = (2.0 * m - (a + b) * eye) / (b - a)
    b1 = np.zeros_like(m)
    b2 = np.zeros_like(m)
    for c in coef[:0:-1]:
        b1, b2 = 2.0 * x @ b1 - b2 + c * eye, b1
    return x @ b1 - b2 + coef[0] * eye


def adaptive(f: Callable[[np.ndarray], np.ndarray], a: float, b: float, target: float,
             start: int = 8, max_degree: int = 4096) -> tuple[np.ndarray, int, float]:
    """Double the degree until the sampled sup error on [a, b] drops below ``target``."""
    degree = start
    while True:
        coef = interpolant(f, a, b, degree)
        err = sup_error(f, coef, a, b)
        if err <= target or degree >= max_degree:
            return coef, degree, err
        degree *= 2
