import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cliffspec.clifford_core import CliffordNumber, SliceUnit, clifford_abs, clifford_mul, is_psd_clifford
from cliffspec.clifford_module import (
    CliffordOperator,
    CliffordVector,
    commutator_norm,
    compose,
    diff_norm,
    inner_product,
    real_polynomial,
)
from cliffspec.functional_calculus import (
    random_normal_operator,
    random_self_adjoint,
    spectral_theorem_normal,
    spectral_theorem_self_adjoint,
)
from cliffspec.s_spectrum import SpectralPoint
from cliffspec.spectral_measure import (
    RnMeasure,
    SpectralMeasureFS,
    integrate,
    jordan_decomposition,
    l2_bound_report,
    measure_of_pair,
    measure_of_vector,
    partition_variation,
    product_measure,
    pushforward_measure,
    pushforward_scalar_measure,
    spectral_integral,
    support_vs_spectrum,
    total_variation,
    validate_spectral_measure,
)
from strategies import seeds


def _random_measure(n, atoms, rng):
    return RnMeasure(n, tuple((k, CliffordNumber(n, rng.standard_normal(1 << n))) for k in range(atoms)))


def _set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for k in range(len(part)):
            yield part[:k] + [[first] + part[k]] + part[k + 1:]
        yield [[first]] + part


def test_jordan_split_of_single_atom():
    nu = RnMeasure(1, (("w", CliffordNumber(1, [-1.0, 1.0])),))
    jd = jordan_decomposition(nu)
    assert jd.component(0, +1) == [("w", 0.0)]
    assert jd.component(0, -1) == [("w", 1.0)]
    assert jd.component(1, +1) == [("w", 1.0)]
    np.testing.assert_array_equal(jd.recombine(1).total().coeffs, nu.total().coeffs)


def test_total_variation_of_single_atom():
    a = CliffordNumber(2, [3.0, 0.0, 4.0, 0.0])
    assert total_variation(RnMeasure(2, ((0, a),))) == 5.0


@pytest.mark.parametrize("atoms", [2, 4, 6])
def test_atomic_sum_dominates_every_partition(atoms):
    rng = np.random.default_rng(atoms)
    nu = _random_measure(2, atoms, rng)
    tv = total_variation(nu)
    best = max(partition_variation(nu, p) for p in _set_partitions(list(range(atoms))))
    assert best == pytest.approx(tv)


def test_duplicate_labels_rejected():
    a = CliffordNumber.scalar(0, 1.0)
    with pytest.raises(ValueError):
        RnMeasure(0, ((1, a), (1, a)))


@given(st.integers(1, 3), seeds, st.floats(-3, 3))
def test_integrate_constants(n, seed, c):
    rng = np.random.default_rng(seed)
    nu = _random_measure(n, 4, rng)
    unit = SliceUnit.random(n, rng)
    total = nu.total()
    assert integrate(nu, lambda _: 1.0, unit).allclose(total, 1e-12)
    assert integrate(nu, lambda _: c, unit, side="right").allclose(total * c, 1e-10)


@given(st.integers(1, 3), seeds)
def test_left_and_right_integrals_place_the_unit(n, seed):
    rng = np.random.default_rng(seed)
    nu = _random_measure(n, 3, rng)
    unit = SliceUnit.random(n, rng)
    i = unit.to_clifford()
    left = integrate(nu, lambda _: 1j, unit, "left")
    right = integrate(nu, lambda _: 1j, unit, "right")
    assert left.allclose(clifford_mul(i, nu.total()), 1e-10)
    assert right.allclose(clifford_mul(nu.total(), i), 1e-10)


@given(seeds)
def test_scalar_pushforward_change_of_variables(seed):
    rng = np.random.default_rng(seed)
    nu = _random_measure(2, 6, rng)
    relabel = {k: int(rng.integers(3)) for k in range(6)}
    pushed = pushforward_scalar_measure(nu, relabel.__getitem__)
    values = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    unit = SliceUnit.random(2, rng)
    lhs = integrate(pushed, lambda k: values[k], unit)
    rhs = integrate(nu, lambda k: values[relabel[k]], unit)
    assert lhs.allclose(rhs, 1e-10)


def _identity_measure(n, m):
    return SpectralMeasureFS(n, m, ((SpectralPoint(0.5, 0.0), CliffordOperator.identity(n, m)),))


def test_single_identity_atom_is_valid():
    assert validate_spectral_measure(_identity_measure(2, 2))["valid"]


def test_non_orthogonal_atoms_named():
    p = CliffordOperator.real(0, np.array([[1.0, 0.0], [0.0, 0.0]]))
    q = CliffordOperator.real(0, np.array([[0.5, 0.5], [0.5, 0.5]]))
    e = SpectralMeasureFS(0, 2, ((SpectralPoint(0, 0), p), (SpectralPoint(1, 0), q)))
    rep = validate_spectral_measure(e)
    assert not rep["valid"]
    assert any("not orthogonal" in v for v in rep["violations"])


@pytest.mark.parametrize("n,m", [(0, 3), (1, 2), (2, 2), (3, 1)])
def test_eigenprojections_are_valid(n, m):
    e = spectral_theorem_self_adjoint(random_self_adjoint(n, m, np.random.default_rng(n + 7 * m)))
    assert validate_spectral_measure(e)["valid"]


def test_measure_of_identity_atom_is_inner_product():
    rng = np.random.default_rng(0)
    x, y = CliffordVector.random(2, 2, rng), CliffordVector.random(2, 2, rng)
    mu = measure_of_pair(_identity_measure(2, 2), x, y)
    assert mu.atoms[0][1].allclose(inner_product(x, y), 1e-12)


@given(st.integers(1, 2), st.integers(1, 3), seeds)
def test_l2_bound_with_multiplicative_norm(n, m, seed):
    rng = np.random.default_rng(seed)
    t = random_normal_operator(n, m, rng)
    e, _ = spectral_theorem_normal(t, rng=rng)
    x, y = CliffordVector.random(n, m, rng), CliffordVector.random(n, m, rng)
    assert l2_bound_report(e, x, y)["holds"]


def test_l2_bound_fails_without_multiplicative_norm():
    # n = 3: <x, x> = (1 + e123)^2 = 2 + 2 e123 has norm 2 sqrt 2 against ||x||^2 = 2
    x = CliffordVector(3, 1, np.array([[1.0], [0], [0], [0], [0], [0], [0], [1.0]]))
    rep = l2_bound_report(_identity_measure(3, 1), x, x)
    assert not rep["holds"]
    assert rep["max_ratio"] == pytest.approx(np.sqrt(2.0), rel=1e-14)


@given(st.integers(1, 3), st.integers(1, 3), seeds)
def test_cauchy_schwarz_with_dimension_factor(n, m, seed):
    rng = np.random.default_rng(seed)
    t = random_normal_operator(n, m, rng)
    e, _ = spectral_theorem_normal(t, rng=rng)
    x, y = CliffordVector.random(n, m, rng), CliffordVector.random(n, m, rng)
    for _, v in measure_of_vector(e, x).atoms:
        assert is_psd_clifford(v, 1e-9)
    # |sum f g dE_{x,y}| <= 2^n ||f||_2 ||g||_2 in the E_x, E_y weights
    f = rng.standard_normal(len(e))
    g = rng.standard_normal(len(e))
    exy = measure_of_pair(e, x, y)
    lhs = clifford_abs(sum((exy.atoms[k][1] * (f[k] * g[k]) for k in range(len(e))), CliffordNumber.zero(n)))
    ex = [v.scalar_part for _, v in measure_of_vector(e, x).atoms]
    ey = [v.scalar_part for _, v in measure_of_vector(e, y).atoms]
    rhs = (1 << n) * np.sqrt(np.sum(f ** 2 * ex)) * np.sqrt(np.sum(g ** 2 * ey))
    assert lhs <= rhs + 1e-9


def test_product_with_trivial_measure():
    e = spectral_theorem_self_adjoint(random_self_adjoint(1, 2, np.random.default_rng(1)))
    prod = product_measure(e, _identity_measure(1, 2))
    assert len(prod) == len(e)
    for (lab, p), (elab, q) in zip(prod.atoms, e.atoms):
        assert lab[0] is elab and diff_norm(p, q) <= 1e-14


def test_product_rejects_non_commuting():
    a = spectral_theorem_self_adjoint(CliffordOperator.real(0, np.diag([1.0, 2.0])))
    b = spectral_theorem_self_adjoint(CliffordOperator.real(0, np.array([[0.0, 1.0], [1.0, 0.0]])))
    with pytest.raises(ValueError):
        product_measure(a, b)


def test_product_atoms_orthogonal_and_valid():
    rng = np.random.default_rng(5)
    s = random_self_adjoint(2, 2, rng)
    a = spectral_theorem_self_adjoint(real_polynomial(s, [0.0, 0.0, 1.0]))
    b = spectral_theorem_self_adjoint(real_polynomial(s, [0.0, 1.0, 0.0, 1.0]))
    prod = product_measure(a, b)
    assert len(prod) <= len(a) * len(b)
    for (_, p), (_, q) in itertools.combinations(prod.atoms, 2):
        assert diff_norm(compose(p, q), CliffordOperator.zero(2, 2)) <= 1e-9
    assert validate_spectral_measure(prod)["valid"]


def test_pushforward_identity_and_constant():
    e = spectral_theorem_self_adjoint(random_self_adjoint(1, 3, np.random.default_rng(2)))
    same = pushforward_measure(e, lambda p: p)
    assert len(same) == len(e)
    const = pushforward_measure(e, lambda p: SpectralPoint(7.0, 0.0))
    assert len(const) == 1
    assert diff_norm(const.projections[0], CliffordOperator.identity(1, 3)) <= 1e-12


@given(st.integers(1, 2), seeds)
def test_pushforward_change_of_variables(n, seed):
    rng = np.random.default_rng(seed)
    t = random_normal_operator(n, 2, rng)
    e, j = spectral_theorem_normal(t, rng=rng)

    def psi(p):
        return SpectralPoint.fold(p.complex ** 2)

    def h(z):
        return np.exp(z) + z

    pushed = pushforward_measure(e, psi)
    lhs = spectral_integral(pushed, j, h)
    rhs = spectral_integral(e, j, lambda z: h(psi(SpectralPoint.fold(z)).complex))
    assert diff_norm(lhs, rhs) <= 1e-9


def test_support_vs_spectrum_identity_function():
    rng = np.random.default_rng(3)
    t = random_normal_operator(2, 2, rng)
    e, j = spectral_theorem_normal(t, rng=rng)
    rep = support_vs_spectrum(e, lambda z: z, j)
    assert rep["agree"]


def test_support_vs_spectrum_constant():
    rng = np.random.default_rng(4)
    e, j = spectral_theorem_normal(random_normal_operator(1, 2, rng), rng=rng)
    rep = support_vs_spectrum(e, lambda z: 2.5, j)
    assert rep["agree"] and rep["spectrum"].matches([SpectralPoint(2.5, 0.0)], 1e-9)


def test_square_on_imaginary_measure():
    j = CliffordOperator.left_mult(CliffordNumber.basis(2, 1), 1)
    e = SpectralMeasureFS(2, 1, ((SpectralPoint(0.0, 1.0), CliffordOperator.identity(2, 1)),))
    rep = support_vs_spectrum(e, lambda z: z * z, j)
    assert rep["agree"] and rep["spectrum"].matches([SpectralPoint(-1.0, 0.0)], 1e-12)


def test_non_intrinsic_function_rejected():
    j = CliffordOperator.left_mult(CliffordNumber.basis(2, 1), 1)
    e = SpectralMeasureFS(2, 1, ((SpectralPoint(0.0, 1.0), CliffordOperator.identity(2, 1)),))
    with pytest.raises(ValueError):
        support_vs_spectrum(e, lambda z: 1j * z, j)


@given(st.integers(1, 2), seeds)
def test_commutation_transfer(n, seed):
    rng = np.random.default_rng(seed)
    t = random_normal_operator(n, 2, rng)
    e, j = spectral_theorem_normal(t, rng=rng)
    w = real_polynomial(t, rng.standard_normal(3))
    assert all(commutator_norm(w, p) <= 1e-8 for p in e.projections)
    for f in (np.exp, lambda z: z ** 3 - 1j * z):
        assert commutator_norm(w, spectral_integral(e, j, f)) <= 1e-8


def test_disjoint_groupings_add():
    e = spectral_theorem_self_adjoint(random_self_adjoint(1, 3, np.random.default_rng(8)))
    labels = e.labels
    left, right = labels[: len(labels) // 2], labels[len(labels) // 2:]
    assert diff_norm(e.of(left) + e.of(right), e.of(labels)) <= 1e-14
    assert diff_norm(e.of(labels), CliffordOperator.identity(1, 3)) <= 1e-10
