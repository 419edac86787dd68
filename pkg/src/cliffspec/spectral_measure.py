"""Finite-support R_n-valued measures and projection-valued spectral measures.

At finite support every sigma-algebra question reduces to sums over atoms:
E(M) is the sum of the atom projections whose label lies in M.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

from .clifford_core import CliffordNumber, SliceUnit, clifford_abs, clifford_mul, is_psd_clifford
from .clifford_module import (
    CliffordOperator,
    CliffordVector,
    apply,
    compose,
    inner_product,
    operator_norm,
    real_rep,
)
from .config import DEFAULT_TOLERANCES, Tolerances, scale_of
from .s_spectrum import SpectralPoint, SpectrumSet, s_spectrum

__all__ = [
    "RnMeasure",
    "JordanDecomposition",
    "SpectralMeasureFS",
    "jordan_decomposition",
    "total_variation",
    "partition_variation",
    "integrate",
    "pushforward_scalar_measure",
    "validate_spectral_measure",
    "measure_of_vector",
    "measure_of_pair",
    "l2_bound_report",
    "product_measure",
    "pushforward_measure",
    "spectral_integral",
    "label_to_complex",
    "intrinsic_violation",
    "support_vs_spectrum",
]


@dataclass(frozen=True)
class RnMeasure:
    """Discrete R_n-valued measure: ``nu(M) = sum of values of atoms in M``."""

    n: int
    atoms: tuple[tuple[Hashable, CliffordNumber], ...]

    def __post_init__(self) -> None:
        labels = [lab for lab, _ in self.atoms]
        if len(set(labels)) != len(labels):
            raise ValueError("atom labels must be distinct")
        for _, value in self.atoms:
            if value.n != self.n:
                raise ValueError("atom value lives in a different Clifford algebra")
        object.__setattr__(self, "atoms", tuple(self.atoms))

    @property
    def labels(self) -> list[Hashable]:
        return [lab for lab, _ in self.atoms]

    def of(self, labels: Iterable[Hashable]) -> CliffordNumber:
        chosen = set(labels)
        out = CliffordNumber.zero(self.n)
        for lab, value in self.atoms:
            if lab in chosen:
                out = out + value
        return out

    def total(self) -> CliffordNumber:
        return self.of(self.labels)


@dataclass(frozen=True)
class JordanDecomposition:
    """Per-component positive and negative parts; ``positive[k, alpha]`` is mu_+^(alpha) at atom k."""

    labels: tuple[Hashable, ...]
    positive: np.ndarray
    negative: np.ndarray

    def component(self, alpha: int, sign: int) -> list[tuple[Hashable, float]]:
        arr = self.positive if sign > 0 else self.negative
        return [(lab, float(arr[k, alpha])) for k, lab in enumerate(self.labels)]

    def recombine(self, n: int) -> RnMeasure:
        return RnMeasure(n, tuple((lab, CliffordNumber(n, self.positive[k] - self.negative[k]))
                                  for k, lab in enumerate(self.labels)))


def jordan_decomposition(nu: RnMeasure) -> JordanDecomposition:
    values = np.array([v.coeffs for _, v in nu.atoms]).reshape(len(nu.atoms), 1 << nu.n)
    return JordanDecomposition(tuple(nu.labels), np.clip(values, 0.0, None), np.clip(-values, 0.0, None))


def total_variation(nu: RnMeasure) -> float:
    """sum over atoms of |nu({w})|; the finest partition attains the supremum."""
    return float(sum(clifford_abs(v) for _, v in nu.atoms))


def partition_variation(nu: RnMeasure, partition: Sequence[Sequence[Hashable]]) -> float:
    return float(sum(clifford_abs(nu.of(block)) for block in partition))


def label_to_complex(label: Hashable) -> complex:
    if isinstance(label, SpectralPoint):
        return label.complex
    if isinstance(label, (int, float, complex, np.number)):
        return complex(label)
    raise TypeError(f"cannot read label {label!r} as a slice-plane point")


def integrate(nu: RnMeasure, f: Callable[[Hashable], complex], unit: SliceUnit,
              side: str = "left") -> CliffordNumber:
    """sum Re f nu + sum Im f I nu (left) or sum nu Re f + sum nu I Im f (right)."""
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    i_clif = unit.to_clifford()
    out = CliffordNumber.zero(nu.n)
    for lab, value in nu.atoms:
        z = complex(f(lab))
        if not np.isfinite(z):
            raise ValueError(f"integrand is not finite at atom {lab!r}")
        im = clifford_mul(i_clif, value) if side == "left" else clifford_mul(value, i_clif)
        out = out + value * z.real + im * z.imag
    return out


def pushforward_scalar_measure(nu: RnMeasure, psi: Callable[[Hashable], Hashable]) -> RnMeasure:
    """nu' = nu o psi^{-1}; atoms with equal image are summed."""
    merged: dict[Hashable, CliffordNumber] = {}
    for lab, value in nu.atoms:
        key = psi(lab)
        merged[key] = merged[key] + value if key in merged else value
    return RnMeasure(nu.n, tuple(merged.items()))


@dataclass(frozen=True)
class SpectralMeasureFS:
    """Atoms (label, projection); labels are usually canonical slice points."""

    n: int
    m: int
    atoms: tuple[tuple[Hashable, CliffordOperator], ...]

    def __post_init__(self) -> None:
        labels = [lab for lab, _ in self.atoms]
        if len(set(labels)) != len(labels):
            raise ValueError("atom labels must be distinct")
        for _, p in self.atoms:
            if (p.n, p.m) != (self.n, self.m):
                raise ValueError("projection shape differs from the ambient module")
        object.__setattr__(self, "atoms", tuple(self.atoms))

    @property
    def labels(self) -> list[Hashable]:
        return [lab for lab, _ in self.atoms]

    @property
    def projections(self) -> list[CliffordOperator]:
        return [p for _, p in self.atoms]

    def __len__(self) -> int:
        return len(self.atoms)

    def of(self, labels: Iterable[Hashable]) -> CliffordOperator:
        chosen = set(labels)
        out = CliffordOperator.zero(self.n, self.m)
        for lab, p in self.atoms:
            if lab in chosen:
                out = out + p
        return out

    def where(self, predicate: Callable[[Hashable], bool]) -> CliffordOperator:
        return self.of(lab for lab in self.labels if predicate(lab))

    def support(self, tol: float = 0.5) -> list[Hashable]:
        """Labels of atoms with a nonzero projection (rank read off the trace)."""
        return [lab for lab, p in self.atoms if np.trace(real_rep(p)) > tol]


def validate_spectral_measure(e: SpectralMeasureFS, rng: np.random.Generator | None = None,
                              samples: int = 5, tol: Tolerances = DEFAULT_TOLERANCES) -> dict:
    rng = np.random.default_rng(0) if rng is None else rng
    violations: list[str] = []
    reps = [real_rep(p) for p in e.projections]
    size = e.m << e.n
    eye = np.eye(size)
    for k, r in enumerate(reps):
        if np.max(np.abs(r - r.T), initial=0.0) > tol.eq_tol:
            violations.append(f"atom {k}: projection not self-adjoint")
        if np.max(np.abs(r @ r - r), initial=0.0) > tol.eq_tol:
            violations.append(f"atom {k}: projection not idempotent")
    for i, j in product(range(len(reps)), repeat=2):
        if i < j and np.max(np.abs(reps[i] @ reps[j]), initial=0.0) > tol.eq_tol:
            violations.append(f"atoms {i},{j}: projections not orthogonal")
    total = sum(reps) if reps else np.zeros((size, size))
    if np.max(np.abs(total - eye), initial=0.0) > tol.eq_tol:
        violations.append("projections do not sum to the identity")
    for _ in range(samples):
        x = CliffordVector.random(e.n, e.m, rng)
        scale = float(np.sum(x.coeffs ** 2))
        values = [inner_product(apply(p, x), x) for p in e.projections]
        for k, v in enumerate(values):
            if not is_psd_clifford(v, max(tol.psd_tol, 1e-12 * scale) * 10):
                violations.append(f"atom {k}: <E x, x> is not a positive Clifford number")
                break
        acc = CliffordNumber.zero(e.n)
        for v in values:
            acc = acc + v
        if not acc.allclose(inner_product(x, x), tol.eq_tol * max(1.0, scale)):
            violations.append("E_x(Omega) differs from <x, x>")
    return {"valid": not violations, "violations": violations, "atoms": len(e.atoms)}


def measure_of_pair(e: SpectralMeasureFS, x: CliffordVector, y: CliffordVector) -> RnMeasure:
    """E_{x,y}(M) = <E(M) x, y>."""
    return RnMeasure(e.n, tuple((lab, inner_product(apply(p, x), y)) for lab, p in e.atoms))


def measure_of_vector(e: SpectralMeasureFS, x: CliffordVector) -> RnMeasure:
    return measure_of_pair(e, x, x)


def l2_bound_report(e: SpectralMeasureFS, x: CliffordVector, y: CliffordVector, slack: float = 1e-9) -> dict:
    """Per atom, compare |E_{x,y}({w})| with sqrt(Re E_x({w})) sqrt(Re E_y({w})).

    The bound needs |<u, v>| <= ||u|| ||v||, i.e. a multiplicative norm on
    R_n, which holds for n <= 2 only.  For n >= 3 ``max_ratio`` may reach
    sqrt(2) (x = y = 1 + e_123 already does), and ``holds`` reports the truth.
    Rank-one atoms give equality, so ``slack`` must cover the projection error.
    """
    exy = measure_of_pair(e, x, y)
    ex = measure_of_vector(e, x)
    ey = measure_of_vector(e, y)
    worst = -np.inf
    ratio = 0.0
    for (_, vxy), (_, vx), (_, vy) in zip(exy.atoms, ex.atoms, ey.atoms):
        bound = np.sqrt(max(vx.scalar_part, 0.0)) * np.sqrt(max(vy.scalar_part, 0.0))
        value = clifford_abs(vxy)
        worst = max(worst, value - bound)
        if bound > 0:
            ratio = max(ratio, value / bound)
    scale = 1.0 + float(np.sum(x.coeffs ** 2) + np.sum(y.coeffs ** 2))
    return {"max_excess": float(worst), "max_ratio": float(ratio), "holds": bool(worst <= slack * scale)}


def product_measure(e1: SpectralMeasureFS, e2: SpectralMeasureFS,
                    tol: Tolerances = DEFAULT_TOLERANCES) -> SpectralMeasureFS:
    """Atoms ((p, q), P Q) for commuting spectral measures."""
    if (e1.n, e1.m) != (e2.n, e2.m):
        raise ValueError("spectral measures act on different modules")
    for _, p in e1.atoms:
        rp = real_rep(p)
        for _, q in e2.atoms:
            rq = real_rep(q)
            if np.max(np.abs(rp @ rq - rq @ rp), initial=0.0) > tol.eq_tol:
                raise ValueError("product measure needs commuting projections")
    atoms = []
    for (lp, p), (lq, q) in product(e1.atoms, e2.atoms):
        pq = compose(p, q)
        if np.trace(real_rep(pq)) > 0.5:
            atoms.append(((lp, lq), pq))
    return SpectralMeasureFS(e1.n, e1.m, tuple(atoms))


def pushforward_measure(e: SpectralMeasureFS, psi: Callable[[Hashable], Hashable],
                        merge_tol: float | None = None) -> SpectralMeasureFS:
    """F(M) = E(psi^{-1}(M)); images closer than ``merge_tol`` are identified.

    Merging only applies to slice-point images; other labels must match exactly.
    """
    images = [(psi(lab), p) for lab, p in e.atoms]
    if merge_tol is None:
        scale = max((abs(im) for im, _ in images if isinstance(im, SpectralPoint)), default=1.0)
        merge_tol = DEFAULT_TOLERANCES.spec_merge_tol * scale_of(scale)
    order = sorted(range(len(images)), key=lambda k: _sort_key(images[k][0]))
    merged: list[tuple[Hashable, CliffordOperator]] = []
    for k in order:
        im, p = images[k]
        for idx, (lab, acc) in enumerate(merged):
            same = lab.close(im, merge_tol) if isinstance(im, SpectralPoint) and isinstance(lab, SpectralPoint) \
                else lab == im
            if same:
                merged[idx] = (lab, acc + p)
                break
        else:
            merged.append((im, p))
    return SpectralMeasureFS(e.n, e.m, tuple(merged))


def _sort_key(label: Hashable):
    if isinstance(label, SpectralPoint):
        return (0, label.u, label.v, "")
    return (1, 0.0, 0.0, repr(label))


def spectral_integral(e: SpectralMeasureFS, j: CliffordOperator, f: Callable[[complex], complex]) -> CliffordOperator:
    """sum_k (Re f(l_k) I + Im f(l_k) J) E_k."""
    out = np.zeros((e.m << e.n, e.m << e.n))
    jr = real_rep(j)
    for lab, p in e.atoms:
        pr = real_rep(p)
        if np.trace(pr) <= 0.5:
            continue
        z = complex(f(label_to_complex(lab)))
        if not np.isfinite(z):
            raise ValueError(f"function is not finite on the atom at {lab!r}")
        out += z.real * pr + z.imag * (jr @ pr)
    return CliffordOperator.zero(e.n, e.m) if not e.atoms else _pull(e, out)


def _pull(e: SpectralMeasureFS, m: np.ndarray) -> CliffordOperator:
    from .clifford_module import from_real_rep

    return from_real_rep(e.n, e.m, m, tol=DEFAULT_TOLERANCES.comm_tol)


def intrinsic_violation(f: Callable[[complex], complex], points: Iterable[complex]) -> float:
    """max |f(conj z) - conj f(z)| over the given points."""
    worst = 0.0
    for z in points:
        a, b = complex(f(np.conj(z))), np.conj(complex(f(z)))
        worst = max(worst, abs(a - b))
    return worst


def support_vs_spectrum(e: SpectralMeasureFS, f: Callable[[complex], complex], j: CliffordOperator,
                        tol: Tolerances = DEFAULT_TOLERANCES) -> dict:
    """Compare the spectrum of the spectral integral with the folded image of the support."""
    pts = [label_to_complex(lab) for lab in e.support()]
    violation = intrinsic_violation(f, pts)
    fvals = [complex(f(z)) for z in pts]
    scale = max([abs(z) for z in fvals] + [1.0])
    if violation > tol.eq_tol * scale:
        raise ValueError(f"function is not intrinsic on the support (violation {violation:.3e})")
    op = spectral_integral(e, j, f)
    direct = s_spectrum(op, tol)
    merge = tol.spec_merge_tol * scale_of(operator_norm(op))
    mapped = SpectrumSet(tuple(SpectralPoint.fold(z) for z in fvals))
    return {
        "operator": op,
        "spectrum": direct,
        "mapped_support": mapped,
        "agree": direct.matches(mapped, merge),
        "intrinsic_violation": violation,
    }
