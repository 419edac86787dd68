"""Random operators of each structural class, all scaled to operator norm one."""

from __future__ import annotations

import numpy as np

from .clifford_module import CliffordOperator, adjoint, compose, operator_norm
from .config import DEFAULT_TOLERANCES, Tolerances, scale_of
from .decompositions import complete_imaginary, polar
from .functional_calculus import random_normal_operator, random_self_adjoint

__all__ = ["KINDS", "generate", "MAX_ROWS"]

KINDS = ("self-adjoint", "positive", "anti-self-adjoint", "unitary", "imaginary", "normal", "generic")

# real dimension m * 2^n guarded at desk scale
MAX_ROWS = 512


def _unit(t: CliffordOperator) -> CliffordOperator:
    return t.scale(1.0 / scale_of(operator_norm(t)))


def generate(kind: str, n: int, m: int, rng: np.random.Generator,
             tol: Tolerances = DEFAULT_TOLERANCES) -> CliffordOperator:
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}; choose from {', '.join(KINDS)}")
    if not (0 <= n <= 6 and 1 <= m <= 8) or m << n > MAX_ROWS:
        raise ValueError(f"size guard: need n <= 6, 1 <= m <= 8 and m * 2^n <= {MAX_ROWS}")
    if kind == "self-adjoint":
        return random_self_adjoint(n, m, rng)
    g = CliffordOperator.random(n, m, rng)
    if kind == "positive":
        return _unit(compose(adjoint(g), g))
    if kind == "anti-self-adjoint":
        return _unit((g - adjoint(g)).scale(0.5))
    if kind == "unitary":
        return polar(g, extend_kernel=True, tol=tol).U
    if kind == "imaginary":
        if n == 0 and m % 2:
            raise ValueError("an imaginary operator on R^m needs m even")
        zero = CliffordOperator.zero(n, m)
        return complete_imaginary(zero, CliffordOperator.identity(n, m), rng=rng, tol=tol)
    if kind == "normal":
        return random_normal_operator(n, m, rng, tol=tol)
    return _unit(g)
