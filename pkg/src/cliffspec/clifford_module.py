"""Vectors and right-linear operators on H_n = R^m (x) R_{0,n}.

Coordinates of a vector are stored as a ``(2^n, m)`` array whose row ``alpha``
is the real component ``x_alpha``; flattening in C order gives the index
``alpha * m + i`` used by the real representation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .clifford_core import (
    CliffordNumber,
    _conj_signs,
    _product_tables,
    clifford_mul,
    left_matrix,
    right_matrix,
)
from .config import DEFAULT_TOLERANCES, Tolerances

__all__ = [
    "CliffordVector",
    "CliffordOperator",
    "CommutantError",
    "inner_product",
    "module_norm",
    "right_mul",
    "left_mul",
    "apply",
    "compose",
    "diff_norm",
    "commutator_norm",
    "operator_power",
    "real_polynomial",
    "operators_close",
    "real_rep",
    "from_real_rep",
    "commutant_violation",
    "right_mult_rep",
    "adjoint",
    "operator_norm",
    "is_normal",
    "is_self_adjoint",
    "is_anti_self_adjoint",
    "is_positive",
    "is_unitary",
    "is_imaginary",
    "is_projection",
    "submodule_projection",
    "orthonormal_expansion",
    "is_orthonormal_module_basis",
    "polarization_constant",
]


class CommutantError(ValueError):
    """A real matrix fails to commute with the right action of R_{0,n}."""

    def __init__(self, violation: float, tol: float):
        super().__init__(f"matrix is not right-linear: max commutator entry {violation:.3e} > {tol:.1e}")
        self.violation = violation


@dataclass(frozen=True, eq=False)
class CliffordVector:
    n: int
    m: int
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.coeffs, dtype=float)
        if arr.shape != (1 << self.n, self.m):
            arr = arr.reshape(1 << self.n, self.m)
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @classmethod
    def zero(cls, n: int, m: int) -> "CliffordVector":
        return cls(n, m, np.zeros((1 << n, m)))

    @classmethod
    def from_flat(cls, n: int, m: int, flat: np.ndarray) -> "CliffordVector":
        return cls(n, m, np.asarray(flat, dtype=float).reshape(1 << n, m))

    @classmethod
    def unit(cls, n: int, m: int, i: int) -> "CliffordVector":
        c = np.zeros((1 << n, m))
        c[0, i] = 1.0
        return cls(n, m, c)

    @classmethod
    def random(cls, n: int, m: int, rng: np.random.Generator) -> "CliffordVector":
        return cls(n, m, rng.standard_normal((1 << n, m)))

    @property
    def flat(self) -> np.ndarray:
        return self.coeffs.reshape(-1)

    def _check(self, other: "CliffordVector") -> None:
        if (self.n, self.m) != (other.n, other.m):
            raise ValueError(f"shape mismatch: (n={self.n}, m={self.m}) vs (n={other.n}, m={other.m})")

    def __add__(self, other: "CliffordVector") -> "CliffordVector":
        self._check(other)
        return CliffordVector(self.n, self.m, self.coeffs + other.coeffs)

    def __sub__(self, other: "CliffordVector") -> "CliffordVector":
        self._check(other)
        return CliffordVector(self.n, self.m, self.coeffs - other.coeffs)

    def __neg__(self) -> "CliffordVector":
        return CliffordVector(self.n, self.m, -self.coeffs)

    def scale(self, c: float) -> "CliffordVector":
        return CliffordVector(self.n, self.m, self.coeffs * c)

    def __mul__(self, a: CliffordNumber) -> "CliffordVector":
        return right_mul(self, a)

    def __rmul__(self, a: CliffordNumber) -> "CliffordVector":
        return left_mul(a, self)


@dataclass(frozen=True, eq=False)
class CliffordOperator:
    """T = sum_alpha e_alpha T_alpha with real m x m blocks ``blocks[alpha]``."""

    n: int
    m: int
    blocks: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.blocks, dtype=float)
        if arr.shape != (1 << self.n, self.m, self.m):
            raise ValueError(f"expected blocks of shape {(1 << self.n, self.m, self.m)}, got {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "blocks", arr)

    @property
    def size(self) -> int:
        return self.m << self.n

    @classmethod
    def zero(cls, n: int, m: int) -> "CliffordOperator":
        return cls(n, m, np.zeros((1 << n, m, m)))

    @classmethod
    def identity(cls, n: int, m: int) -> "CliffordOperator":
        b = np.zeros((1 << n, m, m))
        b[0] = np.eye(m)
        return cls(n, m, b)

    @classmethod
    def real(cls, n: int, matrix: np.ndarray) -> "CliffordOperator":
        """Operator whose only block is the scalar block."""
        matrix = np.asarray(matrix, dtype=float)
        m = matrix.shape[0]
        b = np.zeros((1 << n, m, m))
        b[0] = matrix
        return cls(n, m, b)

    @classmethod
    def left_mult(cls, a: CliffordNumber, m: int) -> "CliffordOperator":
        """x -> a x, the operator with blocks a_alpha I_m."""
        return cls(a.n, m, a.coeffs[:, None, None] * np.eye(m)[None])

    @classmethod
    def random(cls, n: int, m: int, rng: np.random.Generator) -> "CliffordOperator":
        return cls(n, m, rng.standard_normal((1 << n, m, m)))

    def __add__(self, other: "CliffordOperator") -> "CliffordOperator":
        self._check(other)
        return CliffordOperator(self.n, self.m, self.blocks + other.blocks)

    def __sub__(self, other: "CliffordOperator") -> "CliffordOperator":
        self._check(other)
        return CliffordOperator(self.n, self.m, self.blocks - other.blocks)

    def __neg__(self) -> "CliffordOperator":
        return CliffordOperator(self.n, self.m, -self.blocks)

    def scale(self, c: float) -> "CliffordOperator":
        return CliffordOperator(self.n, self.m, self.blocks * float(c))

    def __matmul__(self, other: "CliffordOperator | CliffordVector"):
        if isinstance(other, CliffordVector):
            return apply(self, other)
        self._check(other)
        return compose(self, other)

    def _check(self, other: "CliffordOperator") -> None:
        if (self.n, self.m) != (other.n, other.m):
            raise ValueError(f"shape mismatch: (n={self.n}, m={self.m}) vs (n={other.n}, m={other.m})")

    @property
    def T(self) -> "CliffordOperator":
        return adjoint(self)

    @property
    def rep(self) -> np.ndarray:
        return real_rep(self)

    def __repr__(self) -> str:
        return f"CliffordOperator(n={self.n}, m={self.m}, nonzero_blocks={int(np.count_nonzero(np.abs(self.blocks).sum(axis=(1, 2))))})"


@lru_cache(maxsize=None)
def _left_basis(n: int) -> np.ndarray:
    """Stack of Lambda(e_alpha), the left-multiplication matrices of basis elements."""
    size = 1 << n
    out = np.zeros((size, size, size))
    for alpha in range(size):
        out[alpha] = left_matrix(CliffordNumber.basis(n, alpha))
    out.setflags(write=False)
    return out


def _lift(coef_matrix: np.ndarray, m: int) -> np.ndarray:
    return np.kron(coef_matrix, np.eye(m))


@lru_cache(maxsize=None)
def _right_generator_reps(n: int, m: int) -> tuple[np.ndarray, ...]:
    reps = []
    for j in range(n):
        r = _lift(right_matrix(CliffordNumber.basis(n, 1 << j)), m)
        r.setflags(write=False)
        reps.append(r)
    return tuple(reps)


def right_mult_rep(a: CliffordNumber, m: int) -> np.ndarray:
    """Real matrix of x -> x a on H_n."""
    return _lift(right_matrix(a), m)


def inner_product(x: CliffordVector, y: CliffordVector) -> CliffordNumber:
    """<x, y> = sum_{alpha,beta} <x_alpha, y_beta> conj(e_beta) e_alpha."""
    x._check(y)
    n = x.n
    gram = x.coeffs @ y.coeffs.T  # gram[alpha, beta] = <x_alpha, y_beta>
    index, sign = _product_tables(n)
    cs = _conj_signs(n)
    # conj(e_beta) e_alpha = cs[beta] sign[beta, alpha] e_{beta ^ alpha}
    weights = (cs[:, None] * sign) * gram.T
    out = np.bincount(index.ravel(), weights=weights.ravel(), minlength=1 << n)
    return CliffordNumber(n, out)


def module_norm(x: CliffordVector) -> float:
    return float(np.linalg.norm(x.coeffs))


def right_mul(x: CliffordVector, a: CliffordNumber) -> CliffordVector:
    if a.n != x.n:
        raise ValueError("dimension mismatch between vector and scalar")
    return CliffordVector(x.n, x.m, right_matrix(a) @ x.coeffs)


def left_mul(a: CliffordNumber, x: CliffordVector) -> CliffordVector:
    if a.n != x.n:
        raise ValueError("dimension mismatch between vector and scalar")
    return CliffordVector(x.n, x.m, left_matrix(a) @ x.coeffs)


def apply(t: CliffordOperator, x: CliffordVector) -> CliffordVector:
    """(Tx)_gamma = sum over e_alpha e_beta = +-e_gamma of +- T_alpha x_beta."""
    if (t.n, t.m) != (x.n, x.m):
        raise ValueError("operator and vector shapes differ")
    lam = _left_basis(t.n)
    out = np.einsum("agb,aij,bj->gi", lam, t.blocks, x.coeffs, optimize=True)
    return CliffordVector(x.n, x.m, out)


def compose(s: CliffordOperator, t: CliffordOperator) -> CliffordOperator:
    """Block form of ST: e_alpha S_alpha e_beta T_beta = sign e_{alpha^beta} S_alpha T_beta."""
    index, sign = _product_tables(s.n)
    prods = np.einsum("aij,bjk->abik", s.blocks, t.blocks, optimize=True)
    prods *= sign[:, :, None, None]
    out = np.zeros_like(s.blocks)
    np.add.at(out, index, prods)
    return CliffordOperator(s.n, s.m, out)


def real_rep(t: CliffordOperator) -> np.ndarray:
    lam = _left_basis(t.n)
    size = t.size
    # sum_alpha kron(Lambda_alpha, T_alpha)
    out = np.einsum("agb,aij->gibj", lam, t.blocks, optimize=True)
    return out.reshape(size, size)


def commutant_violation(n: int, m: int, matrix: np.ndarray) -> float:
    worst = 0.0
    for r in _right_generator_reps(n, m):
        worst = max(worst, float(np.max(np.abs(matrix @ r - r @ matrix), initial=0.0)))
    return worst


def from_real_rep(n: int, m: int, matrix: np.ndarray, tol: float | None = DEFAULT_TOLERANCES.comm_tol,
                  relative: bool = True) -> CliffordOperator:
    """Pull a commutant matrix back to block form.

    ``tol=None`` skips validation (used where membership holds by
    construction).
    """
    size = m << n
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape != (size, size):
        raise ValueError(f"expected a {size}x{size} matrix, got {matrix.shape}")
    if tol is not None:
        viol = commutant_violation(n, m, matrix)
        bound = tol * max(1.0, float(np.max(np.abs(matrix), initial=0.0))) if relative else tol
        if viol > bound:
            raise CommutantError(viol, bound)
    lam = _left_basis(n)
    blocks = np.einsum("agb,gibj->aij", lam, matrix.reshape(1 << n, m, 1 << n, m), optimize=True)
    return CliffordOperator(n, m, blocks / (1 << n))


def adjoint(t: CliffordOperator) -> CliffordOperator:
    """T* = sum conj(e_alpha) T_alpha^T, whose real representation is rep(T)^T."""
    return CliffordOperator(t.n, t.m, _conj_signs(t.n)[:, None, None] * np.transpose(t.blocks, (0, 2, 1)))


def operator_norm(t: CliffordOperator) -> float:
    if t.size == 0:
        return 0.0
    return float(np.linalg.norm(real_rep(t), 2))


def _sym_gap(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.T), initial=0.0))


def _tol_scale(m: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(m), initial=0.0)))


def is_normal(t: CliffordOperator, tol: float = DEFAULT_TOLERANCES.eq_tol) -> bool:
    m = real_rep(t)
    return float(np.max(np.abs(m @ m.T - m.T @ m), initial=0.0)) <= tol * _tol_scale(m) ** 2


def is_self_adjoint(t: CliffordOperator, tol: float = DEFAULT_TOLERANCES.eq_tol) -> bool:
    m = real_rep(t)
    return _sym_gap(m) <= tol * _tol_scale(m)


def is_anti_self_adjoint(t: CliffordOperator, tol: float = DEFAULT_TOLERANCES.eq_tol) -> bool:
    m = real_rep(t)
    return float(np.max(np.abs(m + m.T), initial=0.0)) <= tol * _tol_scale(m)


def is_positive(t: CliffordOperator, tol: float = DEFAULT_TOLERANCES.psd_tol) -> bool:
    m = real_rep(t)
    scale = _tol_scale(m)
    if _sym_gap(m) > DEFAULT_TOLERANCES.eq_tol * scale:
        return False
    return bool(np.linalg.eigvalsh(0.5 * (m + m.T)).min() >= -tol * scale)


def is_unitary(t: CliffordOperator, tol: float = DEFAULT_TOLERANCES.eq_tol) -> bool:
    m = real_rep(t)
    eye = np.eye(m.shape[0])
    return max(float(np.max(np.abs(m.T @ m - eye), initial=0.0)),
               float(np.max(np.abs(m @ m.T - eye), initial=0.0))) <= tol


def is_imaginary(t: CliffordOperator, tol: float = DEFAULT_TOLERANCES.eq_tol) -> bool:
    return is_anti_self_adjoint(t, tol) and is_unitary(t, tol)


def is_projection(t: CliffordOperator, tol: float = DEFAULT_TOLERANCES.eq_tol) -> bool:
    m = real_rep(t)
    return _sym_gap(m) <= tol and float(np.max(np.abs(m @ m - m), initial=0.0)) <= tol


def _module_span_matrix(generators: Sequence[CliffordVector]) -> np.ndarray:
    n = generators[0].n
    cols = []
    for v in generators:
        for alpha in range(1 << n):
            cols.append(right_mul(v, CliffordNumber.basis(n, alpha)).flat)
    return np.array(cols).T


def submodule_projection(generators: Sequence[CliffordVector],
                         tol: Tolerances = DEFAULT_TOLERANCES) -> CliffordOperator:
    """Orthogonal projection onto the right submodule spanned by ``generators``."""
    if not generators:
        raise ValueError("at least one generator is required")
    n, m = generators[0].n, generators[0].m
    span = _module_span_matrix(generators)
    u, s, _ = np.linalg.svd(span, full_matrices=False)
    rank = int(np.sum(s > max(span.shape) * np.finfo(float).eps * max(s[0], 1.0))) if s.size else 0
    basis = u[:, :rank]
    return from_real_rep(n, m, basis @ basis.T, tol=tol.comm_tol)


def is_orthonormal_module_basis(basis: Sequence[CliffordVector], tol: float = 1e-10) -> bool:
    if not basis:
        return False
    n = basis[0].n
    for i, a in enumerate(basis):
        for j, b in enumerate(basis):
            target = CliffordNumber.scalar(n, 1.0 if i == j else 0.0)
            if not inner_product(a, b).allclose(target, tol):
                return False
    return True


def orthonormal_expansion(x: CliffordVector, basis: Sequence[CliffordVector],
                          tol: float = 1e-10) -> CliffordVector:
    """x = sum_i xi_i <x, xi_i> over a module-orthonormal basis."""
    if not is_orthonormal_module_basis(basis, tol):
        raise ValueError("basis is not module orthonormal")
    out = CliffordVector.zero(x.n, x.m)
    for xi in basis:
        out = out + right_mul(xi, inner_product(x, xi))
    return out


def polarization_constant(n: int, m: int = 2, samples: int = 100,
                          rng: np.random.Generator | None = None) -> tuple[float, float]:
    """Least-squares constant c with c<x,y> = sum_alpha (|x+y e_a|^2 - |x-y e_a|^2) e_a.

    Here |z|^2 means the Clifford-valued <z, z>.  Returns ``(c, residual)``
    with the residual relative to the right-hand side.
    """
    if samples < 100:
        raise ValueError("polarization_constant needs at least 100 samples")
    rng = np.random.default_rng(0) if rng is None else rng
    lhs, rhs = [], []
    basis = [CliffordNumber.basis(n, a) for a in range(1 << n)]
    for _ in range(samples):
        x = CliffordVector.random(n, m, rng)
        y = CliffordVector.random(n, m, rng)
        total = CliffordNumber.zero(n)
        for e in basis:
            ye = right_mul(y, e)
            plus, minus = x + ye, x - ye
            total = total + clifford_mul(inner_product(plus, plus) - inner_product(minus, minus), e)
        lhs.append(inner_product(x, y).coeffs)
        rhs.append(total.coeffs)
    lv = np.concatenate(lhs)
    rv = np.concatenate(rhs)
    c = float(lv @ rv / (lv @ lv))
    residual = float(np.linalg.norm(rv - c * lv) / max(np.linalg.norm(rv), np.finfo(float).tiny))
    return c, residual


def operators_close(a: CliffordOperator, b: CliffordOperator, tol: float) -> bool:
    return float(np.max(np.abs(a.blocks - b.blocks), initial=0.0)) <= tol


def diff_norm(a: CliffordOperator, b: CliffordOperator) -> float:
    """Operator norm of a - b."""
    return operator_norm(a - b)


def commutator_norm(a: CliffordOperator, b: CliffordOperator) -> float:
    ra, rb = real_rep(a), real_rep(b)
    return float(np.linalg.norm(ra @ rb - rb @ ra, 2))


def operator_power(t: CliffordOperator, k: int) -> CliffordOperator:
    out = CliffordOperator.identity(t.n, t.m)
    for _ in range(k):
        out = compose(out, t)
    return out


def real_polynomial(t: CliffordOperator, coeffs: Iterable[float]) -> CliffordOperator:
    """sum_k c_k T^k by Horner's rule."""
    coeffs = list(coeffs)
    out = CliffordOperator.zero(t.n, t.m)
    eye = CliffordOperator.identity(t.n, t.m)
    for c in reversed(coeffs):
        out = compose(out, t) + eye.scale(c)
    return out
