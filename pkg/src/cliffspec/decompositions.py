"""Positive square roots, polar and additive decompositions, imaginary operators."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from . import _chebyshev
from .clifford_core import SliceUnit, left_matrix, psd_function
from .clifford_module import (
    CliffordOperator,
    CliffordVector,
    adjoint,
    apply,
    commutator_norm,
    compose,
    diff_norm,
    from_real_rep,
    inner_product,
    is_anti_self_adjoint,
    is_imaginary,
    is_normal,
    is_positive,
    is_self_adjoint,
    module_norm,
    operator_norm,
    real_rep,
    right_mul,
    right_mult_rep,
)
from .config import DEFAULT_TOLERANCES, Tolerances, scale_of

__all__ = [
    "PolarDecomposition",
    "NormalDecomposition",
    "ImaginarySplitting",
    "ImaginaryCompletionError",
    "NotPositiveError",
    "positive_sqrt",
    "positive_sqrt_chebyshev",
    "sqrt_convergence",
    "polar",
    "additive_decomposition",
    "complete_imaginary",
    "eigen_projections",
    "split_imaginary",
    "plus_module_basis",
    "j_expansion",
    "check_decomposition",
]


class NotPositiveError(ValueError):
    pass


class ImaginaryCompletionError(RuntimeError):
    """No nonsingular skew commutant element was found on the kernel."""


def _sym(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


def _check_positive(t: CliffordOperator, tol: Tolerances) -> np.ndarray:
    m = real_rep(t)
    scale = max(1.0, float(np.max(np.abs(m), initial=0.0)))
    if float(np.max(np.abs(m - m.T), initial=0.0)) > tol.eq_tol * scale:
        raise NotPositiveError("operator is not self-adjoint")
    w = np.linalg.eigvalsh(_sym(m))
    if w.size and w.min() < -tol.psd_tol * scale:
        raise NotPositiveError(f"operator is not positive: minimum eigenvalue {w.min():.3e}")
    return _sym(m)


def positive_sqrt(t: CliffordOperator, tol: Tolerances = DEFAULT_TOLERANCES) -> CliffordOperator:
    """The unique positive square root, through a symmetric eigendecomposition."""
    m = _check_positive(t, tol)
    w, v = np.linalg.eigh(m)
    root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T
    return from_real_rep(t.n, t.m, _sym(root), tol=tol.comm_tol)


def positive_sqrt_chebyshev(t: CliffordOperator, target: float = 1e-7, max_degree: int = 4096,
                            tol: Tolerances = DEFAULT_TOLERANCES) -> tuple[CliffordOperator, int, float]:
    """Square root as a polynomial in T.

    The interpolation interval is the convex hull of the spectrum, so the
    result depends on the eigenvectors only through polynomial arithmetic.
    Returns the operator, the degree used and the sampled sup error on the
    interval.
    """
    m = _check_positive(t, tol)
    w = np.linalg.eigvalsh(m)
    a, b = max(float(w[0]), 0.0), max(float(w[-1]), 0.0)
    if b - a <= 1e-14 * max(b, 1.0):
        return CliffordOperator.identity(t.n, t.m).scale(np.sqrt(b)), 0, 0.0
    coef, degree, err = _chebyshev.adaptive(lambda x: np.sqrt(np.clip(x, 0.0, None)), a, b, target,
                                            max_degree=max_degree)
    root = _chebyshev.matrix_chebval(m, coef, a, b)
    return from_real_rep(t.n, t.m, _sym(root), tol=tol.comm_tol), degree, err


def sqrt_convergence(t: CliffordOperator, degrees: Sequence[int],
                     tol: Tolerances = DEFAULT_TOLERANCES) -> list[float]:
    """Operator-norm errors of fixed-degree Chebyshev roots against the eigen path."""
    m = _check_positive(t, tol)
    ref = real_rep(positive_sqrt(t, tol))
    w = np.linalg.eigvalsh(m)
    a, b = max(float(w[0]), 0.0), max(float(w[-1]), 0.0)
    if b - a <= 1e-14 * max(b, 1.0):
        return [0.0 for _ in degrees]
    out = []
    for d in degrees:
        coef = _chebyshev.interpolant(lambda x: np.sqrt(np.clip(x, 0.0, None)), a, b, d)
        out.append(float(np.linalg.norm(_chebyshev.matrix_chebval(m, coef, a, b) - ref, 2)))
    return out


@dataclass(frozen=True)
class PolarDecomposition:
    Q: CliffordOperator
    U: CliffordOperator
    kernel_projection: CliffordOperator
    unitary_extension: bool
    residual: float


def polar(t: CliffordOperator, extend_kernel: bool | None = None, zero_tol: float | None = None,
          tol: Tolerances = DEFAULT_TOLERANCES) -> PolarDecomposition:
    """T = U Q with Q = |T| and U a partial isometry from ran Q onto ran T.

    With ``extend_kernel`` U is the identity on ker Q; for normal T this
    makes U unitary (ker T = ker T*).  By default the extension is used
    exactly when T is normal.
    """
    norm = operator_norm(t)
    if extend_kernel is None:
        extend_kernel = is_normal(t, tol.eq_tol)
    m = real_rep(t)
    w, s, vt = np.linalg.svd(m)
    # |T| = V S V^T; a square root of T*T would turn rounding noise eps into sqrt(eps)
    q = from_real_rep(t.n, t.m, _sym((vt.T * s) @ vt), tol=tol.comm_tol)
    cut = tol.decomp_tol * scale_of(norm) if zero_tol is None else zero_tol
    keep = s > cut
    u_rep = w[:, keep] @ vt[keep]
    v0 = vt[~keep].T
    p0 = v0 @ v0.T
    if extend_kernel:
        u_rep = u_rep + p0
    u = from_real_rep(t.n, t.m, u_rep, tol=tol.comm_tol)
    k = from_real_rep(t.n, t.m, _sym(p0), tol=tol.comm_tol)
    residual = diff_norm(t, compose(u, q))
    return PolarDecomposition(Q=q, U=u, kernel_projection=k, unitary_extension=extend_kernel, residual=residual)


def eigen_projections(t: CliffordOperator, rel_gap: float = DEFAULT_TOLERANCES.cluster_gap,
                      tol: Tolerances = DEFAULT_TOLERANCES) -> list[tuple[float, np.ndarray]]:
    """Clustered eigenvalues and real eigenprojections of a self-adjoint operator."""
    m = real_rep(t)
    if float(np.max(np.abs(m - m.T), initial=0.0)) > tol.eq_tol * max(1.0, float(np.max(np.abs(m), initial=0.0))):
        raise ValueError("eigen_projections needs a self-adjoint operator")
    w, v = np.linalg.eigh(_sym(m))
    gap = rel_gap * scale_of(float(np.max(np.abs(w), initial=0.0)))
    clusters: list[list[int]] = [[0]] if w.size else []
    for k in range(1, w.size):
        if w[k] - w[k - 1] > gap:
            clusters.append([k])
        else:
            clusters[-1].append(k)
    out = []
    for c in clusters:
        vc = v[:, c]
        out.append((float(np.mean(w[c])), vc @ vc.T))
    return out


def complete_imaginary(j0: CliffordOperator, kernel_projection: CliffordOperator,
                       commuting_projections: Sequence[CliffordOperator] = (),
                       rng: np.random.Generator | None = None, max_attempts: int = 32,
                       tol: Tolerances = DEFAULT_TOLERANCES, report: dict | None = None) -> CliffordOperator:
    """Extend a partial imaginary J0 by an imaginary operator on its kernel.

    Random right-linear G is compressed to the kernel (and block-diagonalised
    along ``commuting_projections``), its skew part S is taken, and when S is
    nonsingular on the kernel K = S (-S^2)^{-1/2} is added to J0.  K commutes
    with everything S commutes with.
    """
    rng = np.random.default_rng() if rng is None else rng
    n, m = j0.n, j0.m
    p = _sym(real_rep(kernel_projection))
    w, v = np.linalg.eigh(p)
    basis = v[:, w > 0.5]
    k = basis.shape[1]
    info = {"kernel_dim": k, "attempts": 0, "success": True}
    if report is not None:
        report.update(info)
    if k == 0:
        return j0
    blocks = [_sym(p @ real_rep(c) @ p) for c in commuting_projections] or [p]
    blocks = [b for b in blocks if np.trace(b) > 0.5]
    for attempt in range(1, max_attempts + 1):
        g = real_rep(CliffordOperator.random(n, m, rng))
        x = sum(b @ g @ b for b in blocks)
        s = 0.5 * (x - x.T)
        sk = basis.T @ s @ basis
        lam, vec = np.linalg.eigh(_sym(-sk @ sk))
        if lam.min() > 1e-8 * max(lam.max(), np.finfo(float).tiny):
            kk = sk @ (vec / np.sqrt(lam)) @ vec.T
            kk = 0.5 * (kk - kk.T)
            j_rep = real_rep(j0) + basis @ kk @ basis.T
            if report is not None:
                report.update({"attempts": attempt})
            return from_real_rep(n, m, j_rep, tol=tol.comm_tol)
    if report is not None:
        report.update({"attempts": max_attempts, "success": False})
    raise ImaginaryCompletionError(
        f"no nonsingular skew commutant element on a kernel of real dimension {k} after {max_attempts} draws")


@dataclass(frozen=True)
class NormalDecomposition:
    """T = A + J B; J is imaginary when ``complete`` and a partial isometry otherwise."""

    A: CliffordOperator
    B: CliffordOperator
    J: CliffordOperator
    complete: bool
    residual: float
    commutator_norms: dict
    completion: dict = field(default_factory=dict)


def additive_decomposition(t: CliffordOperator, rng: np.random.Generator | None = None,
                           complete: bool | None = None,
                           tol: Tolerances = DEFAULT_TOLERANCES) -> NormalDecomposition:
    """Split T into A = Re T, B = |Im T| and the phase of Im T.

    For normal T the phase is completed on ker B to an imaginary operator
    commuting with A, so that A, B and J commute pairwise.
    """
    norm = operator_norm(t)
    scale = scale_of(norm)
    adj = adjoint(t)
    a = (t + adj).scale(0.5)
    y = (t - adj).scale(0.5)
    normal = is_normal(t, tol.eq_tol)
    if complete is None:
        complete = normal
    pol = polar(y, extend_kernel=False, zero_tol=tol.decomp_tol * scale, tol=tol)
    b = pol.Q
    j = pol.U
    completion: dict = {"kernel_dim": 0, "attempts": 0, "success": True}
    if complete:
        projs = []
        if normal:
            projs = [from_real_rep(t.n, t.m, pr, tol=tol.comm_tol) for _, pr in eigen_projections(a, tol=tol)]
        j = complete_imaginary(pol.U, pol.kernel_projection, projs, rng=rng, tol=tol, report=completion)
    residual = diff_norm(t, a + compose(j, b))
    comms = {
        "AB": commutator_norm(a, b),
        "AJ": commutator_norm(a, j),
        "BJ": commutator_norm(b, j),
    }
    return NormalDecomposition(A=a, B=b, J=j, complete=complete, residual=residual,
                               commutator_norms=comms, completion=completion)


@dataclass(frozen=True)
class ImaginarySplitting:
    """Real orthonormal bases (as columns) of H_+(J, I) and H_-(J, I)."""

    unit: SliceUnit
    plus_basis: np.ndarray
    minus_basis: np.ndarray
    report: dict

    @property
    def dims(self) -> tuple[int, int]:
        return self.plus_basis.shape[1], self.minus_basis.shape[1]


def _anticommuting_unit(unit: SliceUnit) -> SliceUnit | None:
    """A unit 1-vector orthogonal to I; orthogonal 1-vectors anticommute."""
    if unit.n < 2:
        return None
    vec = np.asarray(unit.components)
    candidate = np.zeros(unit.n)
    candidate[int(np.argmin(np.abs(vec)))] = 1.0
    candidate -= (candidate @ vec) * vec
    return SliceUnit.normalized(candidate)


def split_imaginary(j: CliffordOperator, unit: SliceUnit,
                    tol: Tolerances = DEFAULT_TOLERANCES) -> ImaginarySplitting:
    """H_+- = {x : J x = x (+-I)} as kernels of rep(J) -+ R_I."""
    if not is_imaginary(j, tol.eq_tol):
        raise ValueError("split_imaginary needs an imaginary operator (unitary and anti self-adjoint)")
    if unit.n != j.n:
        raise ValueError("slice unit and operator live over different algebras")
    mj = real_rep(j)
    r_i = right_mult_rep(unit.to_clifford(), j.m)
    plus = scipy.linalg.null_space(mj - r_i, rcond=1e-10)
    minus = scipy.linalg.null_space(mj + r_i, rcond=1e-10)
    size = j.size
    joint = np.hstack([plus, minus])
    rank = int(np.linalg.matrix_rank(joint, tol=1e-8)) if joint.size else 0
    report: dict = {
        "dim_plus": plus.shape[1],
        "dim_minus": minus.shape[1],
        "both_nontrivial": plus.shape[1] > 0 and minus.shape[1] > 0,
        "equal_dims": plus.shape[1] == minus.shape[1],
        "direct_sum": rank == size and plus.shape[1] + minus.shape[1] == size,
        "trivial_intersection": rank == plus.shape[1] + minus.shape[1],
    }
    # projector formulas x -> (x -+ J x I)/2
    p_plus = 0.5 * (np.eye(size) - r_i @ mj)
    p_minus = 0.5 * (np.eye(size) + r_i @ mj)
    report["projector_plus_residual"] = float(np.linalg.norm((mj - r_i) @ p_plus, 2))
    report["projector_minus_residual"] = float(np.linalg.norm((mj + r_i) @ p_minus, 2))
    report["projector_sum_residual"] = float(np.linalg.norm(p_plus + p_minus - np.eye(size), 2))
    other = _anticommuting_unit(unit)
    if other is not None and plus.shape[1] > 0:
        mapped = right_mult_rep(other.to_clifford(), j.m) @ plus
        report["anticommuting_map_into_minus"] = float(np.linalg.norm((mj + r_i) @ mapped, 2))
        report["anticommuting_map_rank"] = int(np.linalg.matrix_rank(mapped, tol=1e-8))
    else:
        report["anticommuting_map_into_minus"] = None
        report["anticommuting_map_rank"] = None
    return ImaginarySplitting(unit=unit, plus_basis=plus, minus_basis=minus, report=report)


def plus_module_basis(j: CliffordOperator, unit: SliceUnit, rng: np.random.Generator | None = None,
                      max_draws: int | None = None, tol: float = 1e-10) -> list[CliffordVector]:
    """Module-orthonormal basis of H_n all of whose members lie in H_+(J, I).

    Module Gram-Schmidt: inner products of H_+ vectors commute with I, so
    orthogonalising and normalising by <w, w>^{-1/2} stays inside H_+.
    """
    rng = np.random.default_rng() if rng is None else rng
    n, m = j.n, j.m
    i_clif = unit.to_clifford()
    draws = 8 * m + 8 if max_draws is None else max_draws
    basis: list[CliffordVector] = []
    for _ in range(draws):
        if len(basis) == m:
            break
        x = CliffordVector.random(n, m, rng)
        w = (x - right_mul(apply(j, x), i_clif)).scale(0.5)
        floor = 1e-6 * module_norm(w) ** 2
        for eta in basis:
            w = w - right_mul(eta, inner_product(w, eta))
        gram = inner_product(w, w)
        gram = (gram + gram.conj()) * 0.5
        lam = np.linalg.eigvalsh(_sym(left_matrix(gram)))
        if lam[0] <= max(1e-6 * lam[-1], floor):
            continue
        basis.append(right_mul(w, psd_function(gram, lambda z: 1.0 / np.sqrt(z))))
    if len(basis) < m:
        raise RuntimeError(f"found only {len(basis)} of {m} module basis vectors inside H_+")
    return basis


def j_expansion(x: CliffordVector, basis: Sequence[CliffordVector], unit: SliceUnit) -> CliffordVector:
    """sum_i eta_i I <x, eta_i>."""
    i_clif = unit.to_clifford()
    out = CliffordVector.zero(x.n, x.m)
    for eta in basis:
        out = out + right_mul(eta, i_clif * inner_product(x, eta))
    return out


def check_decomposition(dec: NormalDecomposition, t: CliffordOperator,
                        tol: Tolerances = DEFAULT_TOLERANCES) -> dict:
    scale = scale_of(operator_norm(t))
    bound = tol.decomp_tol * scale
    return {
        "residual": dec.residual,
        "residual_ok": dec.residual <= bound,
        "A_self_adjoint": is_self_adjoint(dec.A, tol.eq_tol),
        "B_positive": is_positive(dec.B, tol.psd_tol),
        "J_imaginary": is_imaginary(dec.J, tol.eq_tol) if dec.complete else None,
        "J_partial_anti_self_adjoint": is_anti_self_adjoint(dec.J, tol.eq_tol),
        "commutators_ok": all(v <= bound for v in dec.commutator_norms.values()),
    }
