"""Spectral theorems and functional calculi for finite-dimensional normal operators."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _chebyshev
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
    is_unitary,
    module_norm,
    operator_norm,
    real_polynomial,
    real_rep,
)
from .config import DEFAULT_TOLERANCES, Tolerances, scale_of
from .decompositions import additive_decomposition, complete_imaginary, eigen_projections
from .s_spectrum import SpectralPoint, SpectrumSet, s_spectrum
from .spectral_measure import (
    SpectralMeasureFS,
    intrinsic_violation,
    label_to_complex,
    product_measure,
    spectral_integral,
    validate_spectral_measure,
)

__all__ = [
    "IntrinsicFunction",
    "NotIntrinsicError",
    "CalculusResult",
    "SpectralMappingResult",
    "REGISTRY",
    "parse_function",
    "spectral_theorem_self_adjoint",
    "continuous_calculus_sa",
    "spectral_theorem_normal",
    "normal_theorem_report",
    "reconstruction_error",
    "borel_calculus",
    "calculus_laws",
    "spectral_mapping",
    "classify_subclass",
    "random_self_adjoint",
    "random_normal_operator",
]


class NotIntrinsicError(ValueError):
    """f(conj z) differs from conj f(z) on a sampled or supporting point."""


def _psi_bt(z: complex) -> complex:
    r2 = abs(z) ** 2
    if r2 >= 1.0:
        return complex(np.inf, 0.0)
    return z / np.sqrt(1.0 - r2)


def _inv(z: complex) -> complex:
    return complex(np.inf, 0.0) if z == 0 else 1.0 / z


_NAMED: dict[str, tuple[Callable[[complex], complex], str]] = {
    "sqrt": (lambda z: complex(np.sqrt(complex(z))), "principal branch; cut along the negative real axis"),
    "exp": (lambda z: complex(np.exp(complex(z))), "entire"),
    "sin": (lambda z: complex(np.sin(complex(z))), "entire"),
    "inv": (_inv, "punctured plane"),
    "psi_bt": (_psi_bt, "open unit disk"),
    "abs2": (lambda z: complex(abs(z) ** 2), "entire, real valued"),
}


@dataclass(frozen=True)
class IntrinsicFunction:
    """A named registry function or a real polynomial ``sum c_k z^k``."""

    name: str
    coeffs: tuple[float, ...] = ()
    domain: str = ""

    def __call__(self, z: complex) -> complex:
        if self.name == "poly":
            acc = 0j
            for c in reversed(self.coeffs):
                acc = acc * z + c
            return complex(acc)
        return _NAMED[self.name][0](complex(z))

    @classmethod
    def poly(cls, coeffs: Sequence[float]) -> "IntrinsicFunction":
        coeffs = tuple(float(c) for c in coeffs)
        if not coeffs:
            raise ValueError("a polynomial needs at least one coefficient")
        return cls("poly", coeffs, "entire")

    @classmethod
    def named(cls, name: str) -> "IntrinsicFunction":
        if name not in _NAMED:
            raise KeyError(f"unknown function {name!r}; known: {sorted(_NAMED)}")
        return cls(name, (), _NAMED[name][1])

    def symmetry_violation(self, points: Sequence[complex]) -> float:
        return intrinsic_violation(self, points)

    def check(self, rng: np.random.Generator | None = None, samples: int = 32, radius: float = 0.9,
              tol: float = 1e-12) -> bool:
        """Sampled check of f(conj z) = conj f(z) away from the branch cut."""
        rng = np.random.default_rng(0) if rng is None else rng
        r = radius * np.sqrt(rng.uniform(0, 1, samples))
        theta = rng.uniform(-0.95 * np.pi, 0.95 * np.pi, samples)
        pts = [complex(z) for z in r * np.exp(1j * theta) if z != 0]
        vals = [abs(self(z)) for z in pts]
        return self.symmetry_violation(pts) <= tol * max([1.0] + vals)

    def to_json(self) -> str:
        return "poly:" + ",".join(repr(c) for c in self.coeffs) if self.name == "poly" else self.name


REGISTRY = {name: IntrinsicFunction.named(name) for name in _NAMED}


def parse_function(spec: str) -> IntrinsicFunction:
    """``"exp"`` or ``"poly:c0,c1,..."`` (coefficients in increasing degree)."""
    spec = spec.strip()
    if spec.startswith("poly:"):
        body = spec[5:].strip().strip('"')
        try:
            return IntrinsicFunction.poly([float(c) for c in body.split(",") if c.strip()])
        except ValueError as exc:
            raise ValueError(f"bad polynomial coefficients in {spec!r}") from exc
    return IntrinsicFunction.named(spec)


@dataclass(frozen=True)
class CalculusResult:
    operator: CliffordOperator
    measure: SpectralMeasureFS
    J: CliffordOperator
    function: str = ""


def spectral_theorem_self_adjoint(t: CliffordOperator, tol: Tolerances = DEFAULT_TOLERANCES,
                                  rel_gap: float | None = None) -> SpectralMeasureFS:
    """Atoms ((t_k, 0), E_k) from the clustered eigenvalues of the symmetric representation."""
    if not is_self_adjoint(t, tol.eq_tol):
        raise ValueError("spectral_theorem_self_adjoint needs a self-adjoint operator")
    gap = tol.cluster_gap if rel_gap is None else rel_gap
    atoms = []
    for value, proj in eigen_projections(t, rel_gap=gap, tol=tol):
        atoms.append((SpectralPoint(value, 0.0), from_real_rep(t.n, t.m, proj, tol=tol.comm_tol)))
    return SpectralMeasureFS(t.n, t.m, tuple(atoms))


def reconstruction_error(t: CliffordOperator, e: SpectralMeasureFS, j: CliffordOperator | None = None) -> float:
    j = CliffordOperator.zero(t.n, t.m) if j is None else j
    return diff_norm(t, spectral_integral(e, j, lambda z: z))


def continuous_calculus_sa(t: CliffordOperator, f: Callable[[np.ndarray], np.ndarray],
                           target: float = 1e-10, tol: Tolerances = DEFAULT_TOLERANCES,
                           report: dict | None = None) -> CliffordOperator:
    """f(T) as the limit of Chebyshev interpolants p_j(T) on [min sigma, max sigma].

    ``f`` must accept real numpy arrays.  When ``report`` is given it receives the
    interpolation degree, the cross-check against sum f(t_k) E_k and the norm identity.
    """
    if not is_self_adjoint(t, tol.eq_tol):
        raise ValueError("continuous_calculus_sa needs a self-adjoint operator")
    m = real_rep(t)
    w = np.linalg.eigvalsh(0.5 * (m + m.T))
    lo, hi = float(w[0]), float(w[-1])
    if hi - lo <= 1e-14 * scale_of(max(abs(lo), abs(hi))):
        out = CliffordOperator.identity(t.n, t.m).scale(float(np.asarray(f(np.array([lo])))[0]))
        coef_degree, err = 0, 0.0
    else:
        coef, coef_degree, err = _chebyshev.adaptive(f, lo, hi, target)
        out = from_real_rep(t.n, t.m, _chebyshev.matrix_chebval(m, coef, lo, hi), tol=tol.comm_tol)
    if report is not None:
        e = spectral_theorem_self_adjoint(t, tol)

        def f_scalar(z: complex) -> float:
            return float(np.asarray(f(np.array([z.real])))[0])

        direct = spectral_integral(e, CliffordOperator.zero(t.n, t.m), f_scalar)
        fvals = [f_scalar(lab.u) for lab in e.labels]
        report.update({
            "degree": coef_degree,
            "interpolation_error": err,
            "cross_check": diff_norm(out, direct),
            "norm": operator_norm(out),
            "max_abs_on_spectrum": max(abs(v) for v in fvals),
        })
    return out


def spectral_theorem_normal(t: CliffordOperator, rng: np.random.Generator | None = None,
                            tol: Tolerances = DEFAULT_TOLERANCES) -> tuple[SpectralMeasureFS, CliffordOperator]:
    """E and J with T = sum (Re l_k I + Im l_k J) E_k.

    T = A + J B is decomposed, E_A and E_B are formed and multiplied, and the
    pair (t, u) of eigenvalues of A and B becomes the slice point (t, u).
    """
    if not is_normal(t, tol.eq_tol):
        raise ValueError("spectral_theorem_normal needs a normal operator")
    dec = additive_decomposition(t, rng=rng, complete=True, tol=tol)
    e_a = spectral_theorem_self_adjoint(dec.A, tol)
    e_b = spectral_theorem_self_adjoint(dec.B, tol)
    prod = product_measure(e_a, e_b, tol=_product_tol(tol, t))
    labels = [SpectralPoint(pa.u, max(pb.u, 0.0)) for pa, pb in prod.labels]
    projs, j = _polish(t.n, t.m, [real_rep(p) for p in prod.projections], real_rep(dec.J), tol)
    return SpectralMeasureFS(t.n, t.m, tuple(zip(labels, projs))), j


def _polish(n: int, m: int, projs: list[np.ndarray], j: np.ndarray,
            tol: Tolerances) -> tuple[list[CliffordOperator], CliffordOperator]:
    """Round near-orthogonal projections to an exact resolution of the identity.

    Eigenprojections of B across a gap g carry errors of order eps ||T|| / g,
    so the products P Q miss I and J by that much.  The label-weighted sum
    sum k P_k has eigenvalues within that error of the integers k; grouping its
    eigenvectors by the nearest integer gives exact orthogonal projections.
    J is then pinched onto the blocks and rounded back to an imaginary operator.
    """
    weighted = sum((k + 1) * p for k, p in enumerate(projs))
    w, v = np.linalg.eigh(0.5 * (weighted + weighted.T))
    slot = np.clip(np.rint(w).astype(int) - 1, 0, len(projs) - 1)
    exact = []
    for k, p in enumerate(projs):
        vk = v[:, slot == k]
        if vk.shape[1] != int(round(np.trace(p))):
            raise ValueError("product atoms are too far from orthogonal projections to round")
        exact.append(vk @ vk.T)
    pinched = sum(p @ j @ p for p in exact)
    pinched = 0.5 * (pinched - pinched.T)
    u, _, vt = np.linalg.svd(pinched)
    unit = u @ vt
    unit = 0.5 * (unit - unit.T)
    return ([from_real_rep(n, m, 0.5 * (p + p.T), tol=tol.comm_tol) for p in exact],
            from_real_rep(n, m, unit, tol=tol.comm_tol))


def _product_tol(tol: Tolerances, t: CliffordOperator) -> Tolerances:
    # eigenprojections of A and B commute up to rounding amplified by small spectral gaps
    return tol.with_(eq_tol=max(tol.eq_tol, 1e-7))


def normal_theorem_report(t: CliffordOperator, e: SpectralMeasureFS, j: CliffordOperator,
                          tol: Tolerances = DEFAULT_TOLERANCES, rng: np.random.Generator | None = None) -> dict:
    scale = scale_of(operator_norm(t))
    merge = tol.spec_merge_tol * scale
    recon = reconstruction_error(t, e, j)
    spec = s_spectrum(t, tol)
    support = SpectrumSet(tuple(e.support()))
    comm = max((commutator_norm(j, p) for p in e.projections), default=0.0)
    valid = validate_spectral_measure(e, rng=rng, tol=tol)
    return {
        "reconstruction": recon,
        "reconstruction_ok": recon <= tol.decomp_tol * scale,
        "support_matches_spectrum": spec.matches(support, merge),
        "J_imaginary": is_imaginary(j, tol.eq_tol),
        "J_commutes_with_E": comm <= tol.eq_tol * 10,
        "J_commutator": comm,
        "measure_valid": valid["valid"],
        "measure_violations": valid["violations"],
    }


def borel_calculus(e: SpectralMeasureFS, j: CliffordOperator, f: Callable[[complex], complex],
                   tol: Tolerances = DEFAULT_TOLERANCES, name: str = "") -> CalculusResult:
    comm = max((commutator_norm(j, p) for p in e.projections), default=0.0)
    if comm > tol.comm_tol:
        raise ValueError(f"J does not commute with the spectral measure (residual {comm:.3e})")
    return CalculusResult(spectral_integral(e, j, f), e, j, name)


def calculus_laws(e: SpectralMeasureFS, j: CliffordOperator, f: Callable[[complex], complex],
                  g: Callable[[complex], complex], rng: np.random.Generator | None = None,
                  samples: int = 3) -> dict:
    """Residuals of conjugation, multiplicativity, additivity, norm and J-recovery laws."""
    rng = np.random.default_rng(0) if rng is None else rng
    fi = spectral_integral(e, j, f)
    gi = spectral_integral(e, j, g)
    conj = spectral_integral(e, j, lambda z: np.conj(f(z)))
    prod = spectral_integral(e, j, lambda z: f(z) * g(z))
    add = spectral_integral(e, j, lambda z: f(z) + g(z))
    unit = spectral_integral(e, j, lambda z: 1j)
    sup = max(abs(complex(f(label_to_complex(lab)))) for lab in e.support())
    vec_err = 0.0
    for _ in range(samples):
        x = CliffordVector.random(e.n, e.m, rng)
        lhs = module_norm(apply(fi, x)) ** 2
        rhs = sum(abs(complex(f(label_to_complex(lab)))) ** 2 * inner_product(apply(p, x), x).scalar_part
                  for lab, p in e.atoms if lab in set(e.support()))
        vec_err = max(vec_err, abs(lhs - rhs) / max(1.0, rhs))
    return {
        "conjugation": diff_norm(conj, adjoint(fi)),
        "multiplicative": diff_norm(prod, compose(fi, gi)),
        "additive": diff_norm(add, fi + gi),
        "norm_gap": abs(operator_norm(fi) - sup),
        "unit_is_J": diff_norm(unit, j),
        "vector_norm": vec_err,
        "normality": commutator_norm(fi, adjoint(fi)),
    }


@dataclass(frozen=True)
class SpectralMappingResult:
    direct: SpectrumSet
    mapped: SpectrumSet
    agree: bool
    intrinsic_violation: float = 0.0
    operator: CliffordOperator | None = field(default=None, compare=False)


def spectral_mapping(e: SpectralMeasureFS, j: CliffordOperator, f: Callable[[complex], complex],
                     tol: Tolerances = DEFAULT_TOLERANCES) -> SpectralMappingResult:
    """sigma_S of f(T) computed from the operator and from the folded image of the support."""
    pts = [label_to_complex(lab) for lab in e.support()]
    vals = [complex(f(z)) for z in pts]
    scale = max([abs(v) for v in vals] + [1.0])
    violation = intrinsic_violation(f, pts)
    if violation > tol.eq_tol * scale:
        raise NotIntrinsicError(f"function is not intrinsic on the support (violation {violation:.3e})")
    op = spectral_integral(e, j, f)
    direct = s_spectrum(op, tol)
    mapped = SpectrumSet(tuple(SpectralPoint.fold(v) for v in vals))
    merge = tol.spec_merge_tol * scale_of(operator_norm(op))
    return SpectralMappingResult(direct, mapped, direct.matches(mapped, merge), violation, op)


_CLASSES = ("self_adjoint", "positive", "anti_self_adjoint", "unitary", "imaginary")


def classify_subclass(t: CliffordOperator, tol: Tolerances = DEFAULT_TOLERANCES,
                      location_tol: float | None = None) -> dict:
    """Per class: operator predicate, spectrum-location label and whether they agree."""
    if not is_normal(t, tol.eq_tol):
        raise ValueError("classify_subclass needs a normal operator")
    spec = s_spectrum(t, tol)
    scale = scale_of(operator_norm(t))
    lt = max(1e-9 * scale, tol.spec_merge_tol * scale) if location_tol is None else location_tol
    pts = list(spec.points)
    predicates = {
        "self_adjoint": is_self_adjoint(t, tol.eq_tol),
        "positive": is_positive(t, tol.psd_tol),
        "anti_self_adjoint": is_anti_self_adjoint(t, tol.eq_tol),
        "unitary": is_unitary(t, tol.eq_tol),
        "imaginary": is_imaginary(t, tol.eq_tol),
    }
    locations = {
        "self_adjoint": all(p.v <= lt for p in pts),
        "positive": all(p.v <= lt and p.u >= -lt for p in pts),
        "anti_self_adjoint": all(abs(p.u) <= lt for p in pts),
        "unitary": all(abs(abs(p) - 1.0) <= lt for p in pts),
        "imaginary": bool(pts) and all(abs(p.u) <= lt and abs(p.v - 1.0) <= lt for p in pts),
    }
    out = {c: {"predicate": predicates[c], "spectrum": locations[c], "agree": predicates[c] == locations[c]}
           for c in _CLASSES}
    out["labels"] = sorted(c for c in _CLASSES if predicates[c])
    out["spectrum_points"] = spec.to_json()
    return out


def random_self_adjoint(n: int, m: int, rng: np.random.Generator) -> CliffordOperator:
    g = CliffordOperator.random(n, m, rng)
    s = (g + adjoint(g)).scale(0.5)
    return s.scale(1.0 / scale_of(operator_norm(s)))


def random_normal_operator(n: int, m: int, rng: np.random.Generator, degree: int = 3,
                           kernel: bool | None = None, self_adjoint: bool = False,
                           tol: Tolerances = DEFAULT_TOLERANCES) -> CliffordOperator:
    """T = p(S) + J r(S)^2 with S random self-adjoint and J imaginary commuting with S.

    ``kernel=True`` forces r to vanish at one eigenvalue of S, so that the
    imaginary part has a kernel; ``None`` flips a coin.  The result has norm one.
    """
    if n < 1:
        raise ValueError("a normal operator with nonreal spectrum needs n >= 1 (R_0 has no imaginary unit)")
    s = random_self_adjoint(n, m, rng)
    projs = eigen_projections(s, tol=tol)
    pieces = [from_real_rep(n, m, pr, tol=tol.comm_tol) for _, pr in projs]
    zero = CliffordOperator.zero(n, m)
    j = complete_imaginary(zero, CliffordOperator.identity(n, m), pieces, rng=rng, tol=tol)
    p = rng.standard_normal(degree + 1)
    out = real_polynomial(s, p)
    if not self_adjoint:
        r = rng.standard_normal(degree)
        if kernel is None:
            kernel = bool(rng.integers(2))
        if kernel:
            root = projs[int(rng.integers(len(projs)))][0]
            r = np.polynomial.polynomial.polymul(r, [-root, 1.0])
        rs = real_polynomial(s, r)
        out = out + compose(j, compose(rs, rs))
    return out.scale(1.0 / scale_of(operator_norm(out)))
