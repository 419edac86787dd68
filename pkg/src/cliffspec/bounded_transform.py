"""The bounded transform Z_T = T (I + T*T)^{-1/2} and the spectral theorem routed through it."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .clifford_module import (
    CliffordOperator,
    adjoint,
    commutator_norm,
    compose,
    diff_norm,
    from_real_rep,
    is_normal,
    is_positive,
    operator_norm,
    real_rep,
)
from .config import DEFAULT_TOLERANCES, Tolerances, scale_of
from .decompositions import additive_decomposition, positive_sqrt
from .functional_calculus import spectral_theorem_normal
from .s_spectrum import SpectralPoint
from .spectral_measure import SpectralMeasureFS, pushforward_measure, spectral_integral

__all__ = [
    "TransformPair",
    "bounded_transform",
    "transform_report",
    "psi",
    "psi_point",
    "inverse_transform",
    "unbounded_path_spectral_theorem",
]

# inverse_transform refuses supports closer than this to the unit circle
_EDGE = 1e-6


@dataclass(frozen=True)
class TransformPair:
    """C_T = (I + T*T)^{-1} and Z_T = T C_T^{1/2}; ``condition`` is that of I + T*T."""

    C: CliffordOperator
    Z: CliffordOperator
    T: CliffordOperator
    condition: float


def bounded_transform(t: CliffordOperator, tol: Tolerances = DEFAULT_TOLERANCES) -> TransformPair:
    m = real_rep(t)
    g = np.eye(m.shape[0]) + m.T @ m
    factor = scipy.linalg.cho_factor(g)
    c = scipy.linalg.cho_solve(factor, np.eye(m.shape[0]))
    c = 0.5 * (c + c.T)
    c_op = from_real_rep(t.n, t.m, c, tol=tol.comm_tol)
    z = compose(t, positive_sqrt(c_op, tol))
    return TransformPair(C=c_op, Z=z, T=t, condition=float(np.linalg.cond(g)))


def transform_report(pair: TransformPair, tol: Tolerances = DEFAULT_TOLERANCES) -> dict:
    """Contraction, C_T = I - Z*Z, positivity of C_T and I - C_T, and Z_{T*} = (Z_T)*."""
    z, c, t = pair.Z, pair.C, pair.T
    eye = CliffordOperator.identity(t.n, t.m)
    adj_pair = bounded_transform(adjoint(t), tol)
    report = {
        "norm_Z": operator_norm(z),
        "identity_residual": diff_norm(c, eye - compose(adjoint(z), z)),
        "C_positive": is_positive(c, tol.psd_tol),
        "I_minus_C_positive": is_positive(eye - c, tol.psd_tol),
        "adjoint_residual": diff_norm(adj_pair.Z, adjoint(z)),
        "condition": pair.condition,
    }
    if is_normal(t, tol.eq_tol):
        report["Z_normal_residual"] = commutator_norm(z, adjoint(z))
    return report


def psi(z: complex) -> complex:
    """lambda (1 - |lambda|^2)^{-1/2}, the inverse of lambda -> lambda (1 + |lambda|^2)^{-1/2}."""
    r2 = abs(z) ** 2
    if r2 >= 1.0:
        raise ValueError(f"psi is only defined on the open unit disk, got |z| = {abs(z):.17g}")
    return complex(z) / np.sqrt(1.0 - r2)


def psi_point(p: SpectralPoint) -> SpectralPoint:
    return SpectralPoint.fold(psi(p.complex))


def _check_inside(e: SpectralMeasureFS) -> None:
    worst = max((abs(lab) for lab in e.support()), default=0.0)
    if worst >= 1.0 - _EDGE:
        raise ValueError(f"spectral support reaches |lambda| = {worst:.12g}; needs |lambda| < 1 - {_EDGE}")


def inverse_transform(z: CliffordOperator, rng: np.random.Generator | None = None,
                      tol: Tolerances = DEFAULT_TOLERANCES) -> CliffordOperator:
    """T = psi(Z) through the spectral measure of the normal contraction Z."""
    e, j = spectral_theorem_normal(z, rng=rng, tol=tol)
    _check_inside(e)
    return spectral_integral(e, j, psi)


def unbounded_path_spectral_theorem(t: CliffordOperator, rng: np.random.Generator | None = None,
                                    tol: Tolerances = DEFAULT_TOLERANCES,
                                    report: dict | None = None) -> tuple[SpectralMeasureFS, CliffordOperator]:
    """Spectral measure of T obtained by pushing the measure of Z_T forward under psi.

    ``report`` receives the reconstruction residual, the comparison with the
    direct spectral theorem and the Z-level commutators of A, B and J.
    """
    if not is_normal(t, tol.eq_tol):
        raise ValueError("unbounded_path_spectral_theorem needs a normal operator")
    pair = bounded_transform(t, tol)
    e_z, j = spectral_theorem_normal(pair.Z, rng=rng, tol=tol)
    _check_inside(e_z)
    f = pushforward_measure(e_z, psi_point)
    if report is not None:
        scale = scale_of(operator_norm(t))
        direct, _ = spectral_theorem_normal(t, rng=rng, tol=tol)
        report.update(_compare_measures(f, direct, tol.spec_merge_tol * scale))
        report["reconstruction"] = diff_norm(t, spectral_integral(f, j, lambda z: z))
        report["circles_preserved"] = len(f) == len(e_z)
        dec = additive_decomposition(t, rng=rng, tol=tol)
        zs = {k: bounded_transform(op, tol).Z for k, op in (("A", dec.A), ("B", dec.B), ("J", dec.J))}
        report["strong_commutators"] = {
            "AB": commutator_norm(zs["A"], zs["B"]),
            "AJ": commutator_norm(zs["A"], zs["J"]),
            "BJ": commutator_norm(zs["B"], zs["J"]),
        }
    return f, j


def _compare_measures(f: SpectralMeasureFS, e: SpectralMeasureFS, merge_tol: float) -> dict:
    """Match atoms by point and report the worst point and projection discrepancies."""
    unmatched = list(e.atoms)
    point_gap = 0.0
    proj_gap = 0.0
    matched = True
    for lab, p in f.atoms:
        best = min(range(len(unmatched)), key=lambda k: abs(unmatched[k][0].complex - lab.complex), default=None)
        if best is None:
            matched = False
            break
        other, q = unmatched.pop(best)
        point_gap = max(point_gap, abs(other.complex - lab.complex))
        proj_gap = max(proj_gap, diff_norm(p, q))
    matched = matched and not unmatched and point_gap <= merge_tol
    return {"points_match": matched, "point_gap": point_gap, "projection_gap": proj_gap}
