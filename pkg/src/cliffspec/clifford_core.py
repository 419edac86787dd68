"""Arithmetic in the Clifford algebra R_{0,n}.

Basis elements ``e_alpha`` are indexed by bitmasks: bit ``j-1`` set means the
generator ``e_j`` occurs in the (ascending) product.  Generators square to -1
and anticommute.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Mapping, Sequence

import numpy as np

from .config import DEFAULT_TOLERANCES

MAX_N = 12

__all__ = [
    "CliffordNumber",
    "Paravector",
    "SliceUnit",
    "basis_key",
    "parse_basis_key",
    "grade",
    "product_sign",
    "clifford_mul",
    "clifford_conj",
    "clifford_abs",
    "chi",
    "chi_generators",
    "chi_inverse",
    "left_matrix",
    "right_matrix",
    "is_psd_clifford",
    "is_self_adjoint_clifford",
    "sa_dimension",
    "slice_embed",
    "psd_function",
]


def _check_n(n: int) -> None:
    if not (0 <= n <= MAX_N):
        raise ValueError(f"algebra dimension n must lie in [0, {MAX_N}], got {n}")


def grade(index: int) -> int:
    return int(index).bit_count()


def product_sign(a: int, b: int) -> int:
    """Sign s with e_a e_b = s e_{a xor b}."""
    swaps = 0
    x = a >> 1
    while x:
        swaps += (x & b).bit_count()
        x >>= 1
    # each repeated generator contributes e_j^2 = -1
    swaps += (a & b).bit_count()
    return -1 if swaps & 1 else 1


@lru_cache(maxsize=None)
def _product_tables(n: int) -> tuple[np.ndarray, np.ndarray]:
    size = 1 << n
    i = np.arange(size, dtype=np.int64)[:, None]
    j = np.arange(size, dtype=np.int64)[None, :]
    swaps = np.zeros((size, size), dtype=np.int64)
    shifted = i >> 1
    for _ in range(n):
        swaps += np.bitwise_count(shifted & j)
        shifted = shifted >> 1
    swaps += np.bitwise_count(i & j)
    sign = np.where(swaps % 2 == 0, 1.0, -1.0)
    index = np.bitwise_xor(i, j)
    sign.setflags(write=False)
    index.setflags(write=False)
    return index, sign


@lru_cache(maxsize=None)
def _conj_signs(n: int) -> np.ndarray:
    k = np.bitwise_count(np.arange(1 << n, dtype=np.int64))
    signs = np.where((k * (k + 1) // 2) % 2 == 0, 1.0, -1.0)
    signs.setflags(write=False)
    return signs


def basis_key(index: int, n: int) -> str:
    """Ascending generator labels; comma separated once labels exceed one digit."""
    labels = [str(j + 1) for j in range(n) if index >> j & 1]
    return ",".join(labels) if n >= 10 else "".join(labels)


def parse_basis_key(key: str, n: int) -> int:
    key = key.strip()
    if not key:
        return 0
    parts = key.split(",") if "," in key else list(key)
    index = 0
    previous = 0
    for part in parts:
        j = int(part)
        if not (1 <= j <= n):
            raise ValueError(f"generator label {j} outside 1..{n} in key {key!r}")
        if j <= previous:
            raise ValueError(f"basis key {key!r} must list generators in ascending order")
        previous = j
        index |= 1 << (j - 1)
    return index


@dataclass(frozen=True, eq=False)
class CliffordNumber:
    """Element of R_{0,n}; ``coeffs[alpha]`` is the coefficient of e_alpha."""

    n: int
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        _check_n(self.n)
        arr = np.array(self.coeffs, dtype=float).reshape(-1)
        if arr.shape[0] != 1 << self.n:
            raise ValueError(f"expected {1 << self.n} coefficients, got {arr.shape[0]}")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @classmethod
    def zero(cls, n: int) -> "CliffordNumber":
        return cls(n, np.zeros(1 << n))

    @classmethod
    def scalar(cls, n: int, value: float) -> "CliffordNumber":
        c = np.zeros(1 << n)
        c[0] = value
        return cls(n, c)

    @classmethod
    def basis(cls, n: int, index: int | str) -> "CliffordNumber":
        if isinstance(index, str):
            index = parse_basis_key(index, n)
        if not (0 <= index < 1 << n):
            raise ValueError(f"basis index {index} has bits above position {n}")
        c = np.zeros(1 << n)
        c[index] = 1.0
        return cls(n, c)

    @classmethod
    def from_dict(cls, n: int, terms: Mapping[str, float]) -> "CliffordNumber":
        c = np.zeros(1 << n)
        for key, value in terms.items():
            c[parse_basis_key(key, n)] += float(value)
        return cls(n, c)

    def to_dict(self) -> dict[str, float]:
        return {basis_key(i, self.n): float(v) for i, v in enumerate(self.coeffs) if v != 0.0}

    @property
    def scalar_part(self) -> float:
        return float(self.coeffs[0])

    def conj(self) -> "CliffordNumber":
        return clifford_conj(self)

    def __abs__(self) -> float:
        return clifford_abs(self)

    def _coerce(self, other: object) -> "CliffordNumber | None":
        if isinstance(other, CliffordNumber):
            if other.n != self.n:
                raise ValueError(f"dimension mismatch: R_{self.n} vs R_{other.n}")
            return other
        return None

    def __add__(self, other: object) -> "CliffordNumber":
        if isinstance(other, (int, float)):
            other = CliffordNumber.scalar(self.n, other)
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return CliffordNumber(self.n, self.coeffs + o.coeffs)

    __radd__ = __add__

    def __sub__(self, other: object) -> "CliffordNumber":
        if isinstance(other, (int, float)):
            other = CliffordNumber.scalar(self.n, other)
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return CliffordNumber(self.n, self.coeffs - o.coeffs)

    def __rsub__(self, other: object) -> "CliffordNumber":
        return (-self) + other

    def __neg__(self) -> "CliffordNumber":
        return CliffordNumber(self.n, -self.coeffs)

    def __mul__(self, other: object) -> "CliffordNumber":
        if isinstance(other, (int, float, np.floating)):
            return CliffordNumber(self.n, self.coeffs * float(other))
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return clifford_mul(self, o)

    def __rmul__(self, other: object) -> "CliffordNumber":
        if isinstance(other, (int, float, np.floating)):
            return CliffordNumber(self.n, self.coeffs * float(other))
        return NotImplemented

    def __truediv__(self, other: float) -> "CliffordNumber":
        return CliffordNumber(self.n, self.coeffs / float(other))

    def allclose(self, other: "CliffordNumber", tol: float = DEFAULT_TOLERANCES.eq_tol) -> bool:
        return self.n == other.n and float(np.max(np.abs(self.coeffs - other.coeffs), initial=0.0)) <= tol

    def __repr__(self) -> str:
        terms = self.to_dict()
        return f"CliffordNumber(n={self.n}, {terms or {'': 0.0}})"


def clifford_mul(a: CliffordNumber, b: CliffordNumber) -> CliffordNumber:
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: R_{a.n} vs R_{b.n}")
    index, sign = _product_tables(a.n)
    weights = sign * np.outer(a.coeffs, b.coeffs)
    out = np.bincount(index.ravel(), weights=weights.ravel(), minlength=1 << a.n)
    return CliffordNumber(a.n, out)


def clifford_conj(a: CliffordNumber) -> CliffordNumber:
    """Clifford conjugation: reversal composed with the grade involution."""
    return CliffordNumber(a.n, a.coeffs * _conj_signs(a.n))


def clifford_abs(a: CliffordNumber) -> float:
    return float(np.linalg.norm(a.coeffs))


def left_matrix(a: CliffordNumber) -> np.ndarray:
    """Matrix of b -> a b on coefficient vectors."""
    index, sign = _product_tables(a.n)
    size = 1 << a.n
    out = np.zeros((size, size))
    cols = np.broadcast_to(np.arange(size), (size, size))
    # for fixed b the map alpha -> alpha xor b is a bijection, so no collisions
    out[index, cols] = sign * a.coeffs[:, None]
    return out


def right_matrix(a: CliffordNumber) -> np.ndarray:
    """Matrix of b -> b a on coefficient vectors."""
    index, sign = _product_tables(a.n)
    size = 1 << a.n
    out = np.zeros((size, size))
    rows_b = np.broadcast_to(np.arange(size)[:, None], (size, size))
    out[index, rows_b] = sign * a.coeffs[None, :]
    return out


@lru_cache(maxsize=None)
def chi_generators(n: int) -> tuple[np.ndarray, ...]:
    """Images of e_1..e_n under chi, built by the doubling recursion."""
    _check_n(n)
    if n == 0:
        return ()
    gens = [np.array([[0.0, -1.0], [1.0, 0.0]])]
    for _ in range(1, n):
        d = gens[0].shape[0]
        eye = np.eye(d)
        zero = np.zeros((d, d))
        gens = [np.block([[g, zero], [zero, -g]]) for g in gens]
        gens.append(np.block([[zero, -eye], [eye, zero]]))
    for g in gens:
        g.setflags(write=False)
    return tuple(gens)


@lru_cache(maxsize=4096)
def _chi_basis(n: int, index: int) -> np.ndarray:
    gens = chi_generators(n)
    out = np.eye(1 << n)
    for j in range(n):
        if index >> j & 1:
            out = out @ gens[j]
    out.setflags(write=False)
    return out


def chi(a: CliffordNumber) -> np.ndarray:
    out = np.zeros((1 << a.n, 1 << a.n))
    for index in np.flatnonzero(a.coeffs):
        out += a.coeffs[index] * _chi_basis(a.n, int(index))
    return out


def chi_inverse(n: int, matrix: np.ndarray) -> CliffordNumber:
    """Recover a from chi(a); basis images are Frobenius-orthogonal with norm^2 2^n."""
    size = 1 << n
    coeffs = np.array([np.sum(_chi_basis(n, i) * matrix) for i in range(size)]) / size
    return CliffordNumber(n, coeffs)


def is_psd_clifford(a: CliffordNumber, tol: float = DEFAULT_TOLERANCES.psd_tol) -> bool:
    m = chi(a)
    if np.max(np.abs(m - m.T), initial=0.0) > tol:
        return False
    return bool(np.linalg.eigvalsh(0.5 * (m + m.T)).min() >= -tol)


def is_self_adjoint_clifford(a: CliffordNumber, tol: float = DEFAULT_TOLERANCES.eq_tol) -> bool:
    return clifford_abs(a - a.conj()) <= tol


def sa_dimension(n: int) -> int:
    """Number of basis elements fixed by conjugation (grades 0 and 3 mod 4)."""
    _check_n(n)
    return int(np.sum(_conj_signs(n) > 0))


@dataclass(frozen=True)
class Paravector:
    """Point s = s0 + sum_i s_i e_i of R^{n+1}."""

    s0: float
    s_vec: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "s0", float(self.s0))
        object.__setattr__(self, "s_vec", tuple(float(x) for x in self.s_vec))

    @property
    def n(self) -> int:
        return len(self.s_vec)

    def to_clifford(self) -> CliffordNumber:
        c = np.zeros(1 << self.n)
        c[0] = self.s0
        for j, x in enumerate(self.s_vec):
            c[1 << j] = x
        return CliffordNumber(self.n, c)

    @property
    def real(self) -> float:
        return self.s0

    @property
    def imag_norm(self) -> float:
        return float(np.linalg.norm(self.s_vec)) if self.s_vec else 0.0

    def __abs__(self) -> float:
        return float(np.hypot(self.s0, self.imag_norm))

    def conj(self) -> "Paravector":
        return Paravector(self.s0, tuple(-x for x in self.s_vec))

    @classmethod
    def from_clifford(cls, a: CliffordNumber, tol: float = DEFAULT_TOLERANCES.eq_tol) -> "Paravector":
        mask = np.array([grade(i) >= 2 for i in range(1 << a.n)], dtype=bool)
        if np.any(np.abs(a.coeffs[mask]) > tol):
            raise ValueError("Clifford number has components of grade >= 2")
        return cls(a.coeffs[0], tuple(a.coeffs[1 << j] for j in range(a.n)))


@dataclass(frozen=True)
class SliceUnit:
    """Unit 1-vector I = sum_i I_i e_i, so that I^2 = -1."""

    components: tuple[float, ...]
    tol: float = DEFAULT_TOLERANCES.eq_tol

    def __post_init__(self) -> None:
        comps = tuple(float(x) for x in self.components)
        object.__setattr__(self, "components", comps)
        if not comps or abs(sum(x * x for x in comps) - 1.0) > self.tol:
            raise ValueError(f"slice unit must have unit length, got components {comps}")

    @property
    def n(self) -> int:
        return len(self.components)

    def to_clifford(self) -> CliffordNumber:
        return Paravector(0.0, self.components).to_clifford()

    @classmethod
    def normalized(cls, vec: Sequence[float]) -> "SliceUnit":
        v = np.asarray(vec, dtype=float)
        norm = np.linalg.norm(v)
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return cls(tuple(v / norm))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "SliceUnit":
        if n < 1:
            raise ValueError("slice units exist only for n >= 1")
        return cls.normalized(rng.standard_normal(n))

    @classmethod
    def axis(cls, n: int, j: int) -> "SliceUnit":
        v = [0.0] * n
        v[j - 1] = 1.0
        return cls(tuple(v))


def slice_embed(u: float, v: float, unit: SliceUnit) -> CliffordNumber:
    """The element u + v I of the slice plane C_I."""
    i_clif = unit.to_clifford()
    square = i_clif * i_clif
    if clifford_abs(square + 1.0) > unit.tol:
        raise ValueError("slice unit does not square to -1")
    return CliffordNumber.scalar(unit.n, u) + i_clif * float(v)


def psd_function(a: CliffordNumber, f: Callable[[np.ndarray], np.ndarray],
                 tol: float = DEFAULT_TOLERANCES.eq_tol) -> CliffordNumber:
    """Apply f to a self-adjoint Clifford number through its left-regular matrix.

    f(L_a) lies in the algebra generated by L_a, hence equals L_c for the
    Clifford number c = f(L_a) e_0.
    """
    if not is_self_adjoint_clifford(a, tol):
        raise ValueError("psd_function needs a self-adjoint Clifford number")
    lm = left_matrix(a)
    w, v = np.linalg.eigh(0.5 * (lm + lm.T))
    fm = (v * f(w)) @ v.T
    return CliffordNumber(a.n, fm[:, 0])
