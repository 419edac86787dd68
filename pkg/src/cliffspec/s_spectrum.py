"""S-spectrum, S-resolvents and spectral radius of right-linear operators.

Q_s(T) depends on s only through Re(s) and |s|, so the spectrum is determined
by canonical slice points (u, v) with v >= 0.  Over the complexification,
rep(Q_s) = (M - (u + iv))(M - (u - iv)) with M = rep(T); hence Q_s(T) is
singular exactly when u +- iv is an eigenvalue of M.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .clifford_core import Paravector
from .clifford_module import (
    CliffordOperator,
    adjoint,
    compose,
    from_real_rep,
    is_anti_self_adjoint,
    is_normal,
    is_positive,
    is_self_adjoint,
    is_unitary,
    operator_norm,
    real_rep,
)
from .config import DEFAULT_TOLERANCES, Tolerances, scale_of

__all__ = [
    "SpectralPoint",
    "SpectrumSet",
    "SingularityError",
    "q_operator",
    "q_rep",
    "sigma_min_q",
    "resolvent_grid",
    "s_spectrum",
    "fold_eigenvalues",
    "s_resolvent_left",
    "s_resolvent_right",
    "spectral_radius",
    "neumann_partial_sum",
    "classify_spectrum",
    "spectrum_location_checks",
]


@dataclass(frozen=True, order=True)
class SpectralPoint:
    """Canonical representative u + v S of an axially symmetric sphere."""

    u: float
    v: float

    def __post_init__(self) -> None:
        if self.v < 0:
            raise ValueError(f"canonical spectral points need v >= 0, got {self.v}")
        object.__setattr__(self, "u", float(self.u))
        object.__setattr__(self, "v", float(self.v))

    @classmethod
    def fold(cls, z: complex) -> "SpectralPoint":
        return cls(float(np.real(z)), abs(float(np.imag(z))))

    @property
    def complex(self) -> complex:
        return complex(self.u, self.v)

    def __abs__(self) -> float:
        return float(np.hypot(self.u, self.v))

    def close(self, other: "SpectralPoint", tol: float) -> bool:
        return abs(self.u - other.u) <= tol and abs(self.v - other.v) <= tol


@dataclass(frozen=True)
class SpectrumSet:
    """Sorted spectral points with real-representation multiplicities."""

    points: tuple[SpectralPoint, ...]
    multiplicities: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        mult = self.multiplicities or tuple(1 for _ in self.points)
        if len(mult) != len(self.points):
            raise ValueError("one multiplicity per point is required")
        order = sorted(range(len(self.points)), key=lambda k: (self.points[k].u, self.points[k].v))
        object.__setattr__(self, "points", tuple(self.points[k] for k in order))
        object.__setattr__(self, "multiplicities", tuple(int(mult[k]) for k in order))

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    @property
    def total_multiplicity(self) -> int:
        return sum(self.multiplicities)

    def contains(self, p: SpectralPoint, tol: float) -> bool:
        return any(q.close(p, tol) for q in self.points)

    def matches(self, other: "SpectrumSet | Iterable[SpectralPoint]", tol: float) -> bool:
        """Set equality up to ``tol`` in each coordinate (multiplicities ignored)."""
        others = list(other.points if isinstance(other, SpectrumSet) else other)
        return all(any(p.close(q, tol) for q in others) for p in self.points) and \
            all(any(q.close(p, tol) for p in self.points) for q in others)

    def to_json(self) -> dict:
        return {"points": [{"u": p.u, "v": p.v, "multiplicity": k}
                           for p, k in zip(self.points, self.multiplicities)]}


class SingularityError(ValueError):
    def __init__(self, message: str, sigma_min: float):
        super().__init__(message)
        self.sigma_min = sigma_min


def _as_paravector(s: Paravector | complex | float, n: int) -> Paravector:
    if isinstance(s, Paravector):
        if s.n != n:
            raise ValueError(f"paravector lives in R^{s.n + 1}, operator needs R^{n + 1}")
        return s
    z = complex(s)
    if n == 0:
        if z.imag != 0:
            raise ValueError("n = 0 admits only real spectral parameters")
        return Paravector(z.real, ())
    vec = [0.0] * n
    vec[0] = z.imag
    return Paravector(z.real, tuple(vec))


def q_rep(m_rep: np.ndarray, u: float, abs_s: float) -> np.ndarray:
    return m_rep @ m_rep - 2.0 * u * m_rep + abs_s ** 2 * np.eye(m_rep.shape[0])


def q_operator(t: CliffordOperator, s: Paravector | complex | float) -> CliffordOperator:
    """Q_s(T) = T^2 - 2 Re(s) T + |s|^2 I."""
    p = _as_paravector(s, t.n)
    eye = CliffordOperator.identity(t.n, t.m)
    return compose(t, t) - t.scale(2.0 * p.real) + eye.scale(abs(p) ** 2)


def sigma_min_q(m_rep: np.ndarray, u: float, v: float) -> float:
    return float(np.linalg.svd(q_rep(m_rep, u, float(np.hypot(u, v))), compute_uv=False)[-1])


def resolvent_grid(t: CliffordOperator, u_range: tuple[float, float], v_range: tuple[float, float],
                   steps: int) -> np.ndarray:
    """Rows (u, v, sigma_min(Q_s), ||Q_s^{-1}||) over a steps x steps grid, u-major.

    The second column is the resolvent-set witness used by the grid oracle:
    Q_s is invertible exactly off the spectrum, with ||Q_s^{-1}|| = 1 / sigma_min.
    """
    if steps < 1:
        raise ValueError("grid needs at least one step")
    m = real_rep(t)
    us = np.linspace(u_range[0], u_range[1], steps)
    vs = np.linspace(v_range[0], v_range[1], steps)
    rows = np.empty((steps * steps, 4))
    k = 0
    for u in us:
        for v in vs:
            smin = sigma_min_q(m, float(u), float(v))
            rows[k] = (u, v, smin, np.inf if smin == 0.0 else 1.0 / smin)
            k += 1
    return rows


def _eigenvalues(m: np.ndarray) -> np.ndarray:
    if m.size == 0:
        return np.zeros(0, dtype=complex)
    scale = _abs_scale(m)
    if np.max(np.abs(m - m.T), initial=0.0) <= 1e-14 * scale:
        return np.linalg.eigvalsh(0.5 * (m + m.T)).astype(complex)
    if np.max(np.abs(m + m.T), initial=0.0) <= 1e-14 * scale:
        # skew: eigenvalues are i times those of the Hermitian matrix -i M
        k = 0.5 * (m - m.T)
        return 1j * np.linalg.eigvalsh(-1j * k)
    return np.linalg.eigvals(m)


def _abs_scale(m: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(m), initial=0.0)))


def fold_eigenvalues(eigs: Sequence[complex], merge_tol: float) -> SpectrumSet:
    """Fold eigenvalues to (Re, |Im|) and merge clusters closer than ``merge_tol``."""
    pts = [SpectralPoint.fold(z) for z in eigs]
    pts.sort()
    groups: list[list[SpectralPoint]] = []
    used = [False] * len(pts)
    for i, p in enumerate(pts):
        if used[i]:
            continue
        group = [p]
        used[i] = True
        # single linkage along the sorted order
        changed = True
        while changed:
            changed = False
            for j in range(i + 1, len(pts)):
                if not used[j] and any(q.close(pts[j], merge_tol) for q in group):
                    group.append(pts[j])
                    used[j] = True
                    changed = True
        groups.append(group)
    reps = []
    for g in groups:
        reps.append(SpectralPoint(float(np.mean([q.u for q in g])), float(np.mean([q.v for q in g]))))
    return SpectrumSet(tuple(reps), tuple(len(g) for g in groups))


def s_spectrum(t: CliffordOperator, tol: Tolerances = DEFAULT_TOLERANCES) -> SpectrumSet:
    m = real_rep(t)
    eigs = _eigenvalues(m)
    if not np.all(np.isfinite(eigs)):
        raise np.linalg.LinAlgError("eigensolver returned non-finite values")
    return fold_eigenvalues(eigs, tol.spec_merge_tol * scale_of(operator_norm(t)))


def _check_resolvent_point(t: CliffordOperator, p: Paravector, tol: Tolerances) -> np.ndarray:
    spec = s_spectrum(t, tol)
    scale = scale_of(operator_norm(t))
    target = SpectralPoint(p.real, p.imag_norm)
    q = q_rep(real_rep(t), p.real, abs(p))
    if spec.contains(target, tol.spec_merge_tol * scale):
        smin = float(np.linalg.svd(q, compute_uv=False)[-1])
        raise SingularityError(
            f"s = ({target.u:.6g}, {target.v:.6g}) lies in the S-spectrum (sigma_min(Q_s) = {smin:.3e})", smin)
    return q


def s_resolvent_left(t: CliffordOperator, s: Paravector | complex | float,
                     tol: Tolerances = DEFAULT_TOLERANCES) -> CliffordOperator:
    """S_L^{-1}(s, T) = -Q_s(T)^{-1} (T - s_bar I), with s_bar acting by left multiplication."""
    p = _as_paravector(s, t.n)
    q = _check_resolvent_point(t, p, tol)
    shift = real_rep(t) - real_rep(CliffordOperator.left_mult(p.conj().to_clifford(), t.m))
    return from_real_rep(t.n, t.m, -np.linalg.solve(q, shift), tol=None)


def s_resolvent_right(t: CliffordOperator, s: Paravector | complex | float,
                      tol: Tolerances = DEFAULT_TOLERANCES) -> CliffordOperator:
    """S_R^{-1}(s, T) = -(T - s_bar I) Q_s(T)^{-1}."""
    p = _as_paravector(s, t.n)
    q = _check_resolvent_point(t, p, tol)
    shift = real_rep(t) - real_rep(CliffordOperator.left_mult(p.conj().to_clifford(), t.m))
    return from_real_rep(t.n, t.m, -np.linalg.solve(q.T, shift.T).T, tol=None)


def neumann_partial_sum(t: CliffordOperator, s: Paravector | complex | float, terms: int) -> CliffordOperator:
    """sum_{i < terms} T^i s^{-i-1}, the powers of s acting by left multiplication."""
    p = _as_paravector(s, t.n)
    s_inv = p.conj().to_clifford() / (abs(p) ** 2)
    power = s_inv
    term_rep = np.eye(t.size)
    m = real_rep(t)
    total = np.zeros((t.size, t.size))
    for _ in range(terms):
        total += term_rep @ real_rep(CliffordOperator.left_mult(power, t.m))
        term_rep = term_rep @ m
        power = power * s_inv
    return from_real_rep(t.n, t.m, total, tol=None)


def spectral_radius(t: CliffordOperator, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    spec = s_spectrum(t, tol)
    return max((abs(p) for p in spec.points), default=0.0)


def classify_spectrum(t: CliffordOperator, tol: Tolerances = DEFAULT_TOLERANCES) -> dict:
    """Split the spectrum into point, residual and continuous parts.

    In finite dimension Q_s(T) is injective iff it is surjective, so every
    spectral point is a point of the point spectrum.
    """
    spec = s_spectrum(t, tol)
    m = real_rep(t)
    scale = scale_of(operator_norm(t))
    deficiency = []
    for p in spec.points:
        sv = np.linalg.svd(q_rep(m, p.u, abs(p)), compute_uv=False)
        # Q_s is quadratic in T, and defective eigenvalues shift by ~sqrt(eps)
        thresh = max(1e-6 * scale ** 2, sv[0] * 1e-10)
        deficiency.append(int(np.sum(sv <= thresh)))
    report = {
        "point": list(spec.points),
        "residual": [],
        "continuous": [],
        "approximate_point": list(spec.points),
        "compression": list(spec.points),
        "rank_deficiency": deficiency,
        "normal_checks": None,
    }
    if is_normal(t, tol.eq_tol):
        adj = s_spectrum(adjoint(t), tol)
        report["normal_checks"] = {
            "point_spectrum_matches_adjoint": spec.matches(adj, tol.spec_merge_tol * scale),
            "residual_empty": True,
        }
    return report


def spectrum_location_checks(t: CliffordOperator, tol: Tolerances = DEFAULT_TOLERANCES) -> dict:
    """Verify where the spectrum lies for each structural class the operator belongs to."""
    spec = s_spectrum(t, tol)
    scale = scale_of(operator_norm(t))
    loc_tol = max(tol.spec_merge_tol * scale, 1e-9 * scale)
    checks: dict[str, dict] = {}

    def record(name: str, holds: bool, predicate: bool) -> None:
        violations = [] if holds else [{"u": p.u, "v": p.v} for p in spec.points]
        checks[name] = {"applies": predicate, "holds": holds, "violations": violations if predicate else []}

    sa = is_self_adjoint(t, tol.eq_tol)
    record("self_adjoint_real_spectrum", all(p.v <= loc_tol for p in spec), sa)
    pos = is_positive(t, tol.psd_tol)
    record("positive_nonnegative_spectrum", all(p.v <= loc_tol and p.u >= -loc_tol for p in spec), pos)
    asa = is_anti_self_adjoint(t, tol.eq_tol)
    record("anti_self_adjoint_imaginary_spectrum", all(abs(p.u) <= loc_tol for p in spec), asa)
    uni = is_unitary(t, tol.eq_tol)
    record("unitary_unit_circle", all(abs(abs(p) - 1.0) <= loc_tol for p in spec), uni)
    ok = all(c["holds"] for c in checks.values() if c["applies"])
    return {"spectrum": spec.to_json(), "checks": checks, "ok": ok}
