from math import comb

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import _oracles as oracle
from cliffspec.clifford_core import (
    CliffordNumber,
    Paravector,
    SliceUnit,
    basis_key,
    chi,
    chi_inverse,
    clifford_abs,
    clifford_conj,
    clifford_mul,
    is_psd_clifford,
    is_self_adjoint_clifford,
    left_matrix,
    parse_basis_key,
    product_sign,
    psd_function,
    right_matrix,
    sa_dimension,
    slice_embed,
)
from strategies import clifford_numbers, clifford_pairs

# sign of e_i e_j for n = 3, derived by reducing generator words
SIGNS_N3 = [
    [1, 1, 1, 1, 1, 1, 1, 1],
    [1, -1, 1, -1, 1, -1, 1, -1],
    [1, -1, -1, 1, 1, -1, -1, 1],
    [1, 1, -1, -1, 1, 1, -1, -1],
    [1, -1, -1, 1, -1, 1, 1, -1],
    [1, 1, -1, -1, -1, -1, 1, 1],
    [1, 1, 1, 1, -1, -1, -1, -1],
    [1, -1, 1, -1, -1, 1, -1, 1],
]


def test_sign_table_matches_frozen_word_reduction():
    got = [[product_sign(i, j) for j in range(8)] for i in range(8)]
    assert got == SIGNS_N3


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_sign_table_matches_oracle(n):
    table = oracle.sign_table(n)
    assert all(product_sign(i, j) == table[i][j] for i in range(1 << n) for j in range(1 << n))


def test_frozen_product_n2():
    # (1 + 2e1 - e2 + 0.5e12)(e1 + 3e2 - 2e12), reduced word by word
    a = CliffordNumber(2, [1.0, 2.0, -1.0, 0.5])
    b = CliffordNumber(2, [0.0, 1.0, 3.0, -2.0])
    np.testing.assert_allclose(clifford_mul(a, b).coeffs, [2.0, 1.5, 7.5, 5.0], atol=1e-15)


def test_frozen_conjugation_n3():
    a = CliffordNumber(3, np.arange(8.0) + 1)
    np.testing.assert_array_equal(clifford_conj(a).coeffs, [1, -2, -3, -4, -5, -6, -7, 8])


@pytest.mark.parametrize("j", [1, 2, 3])
def test_generators_square_to_minus_one(j):
    e = CliffordNumber.basis(3, 1 << (j - 1))
    assert (e * e).allclose(CliffordNumber.scalar(3, -1.0), 0.0)


def test_generators_anticommute():
    e1, e2 = CliffordNumber.basis(2, "1"), CliffordNumber.basis(2, "2")
    assert (e1 * e2 + e2 * e1).allclose(CliffordNumber.zero(2), 0.0)
    assert (e1 * e2).allclose(CliffordNumber.basis(2, "12"), 0.0)


@given(clifford_pairs())
def test_product_agrees_with_oracle(pair):
    a, b = pair
    np.testing.assert_allclose(clifford_mul(a, b).coeffs, oracle.product(a.coeffs, b.coeffs, a.n), atol=1e-12)


@given(clifford_pairs(max_n=3), st.data())
def test_associativity(pair, data):
    a, b = pair
    c = data.draw(clifford_numbers(n=a.n))
    assert ((a * b) * c).allclose(a * (b * c), 1e-10)


@given(clifford_pairs())
def test_conjugation_is_anti_automorphism(pair):
    a, b = pair
    assert clifford_conj(a * b).allclose(clifford_conj(b) * clifford_conj(a), 1e-10)
    np.testing.assert_array_equal(clifford_conj(clifford_conj(a)).coeffs, a.coeffs)


@given(clifford_numbers())
def test_conjugation_matches_oracle(a):
    np.testing.assert_array_equal(clifford_conj(a).coeffs, oracle.conj(a.coeffs, a.n))


@given(clifford_numbers())
def test_abs_is_euclidean(a):
    assert clifford_abs(a) == pytest.approx(float(np.linalg.norm(a.coeffs)))


@given(clifford_pairs())
def test_chi_is_homomorphism_and_transposes_conjugate(pair):
    a, b = pair
    assert np.abs(chi(a * b) - chi(a) @ chi(b)).max() <= 1e-10
    np.testing.assert_array_equal(chi(clifford_conj(a)), chi(a).T)


@given(clifford_numbers(max_n=5))
def test_chi_inverse_round_trip(a):
    np.testing.assert_allclose(chi_inverse(a.n, chi(a)).coeffs, a.coeffs, atol=1e-12)


@pytest.mark.parametrize("n", [0, 1, 2, 3, 4])
def test_chi_basis_orthogonality(n):
    size = 1 << n
    mats = [chi(CliffordNumber.basis(n, i)) for i in range(size)]
    gram = np.array([[np.sum(p * q) for q in mats] for p in mats])
    np.testing.assert_array_equal(gram, size * np.eye(size))


@given(clifford_numbers(max_n=4))
def test_b_conj_b_is_positive(b):
    p = b * clifford_conj(b)
    assert is_psd_clifford(p, 1e-10 * max(1.0, clifford_abs(b) ** 2))


def test_negative_scalar_is_not_positive():
    assert not is_psd_clifford(CliffordNumber.scalar(2, -1.0))
    assert not is_psd_clifford(CliffordNumber.basis(2, "1"))


@pytest.mark.parametrize("n,expected", [(0, 1), (1, 1), (2, 1), (3, 2), (4, 6), (5, 16)])
def test_sa_dimension_counts_fixed_blades(n, expected):
    # grades 0 and 3 mod 4 are fixed by conjugation
    assert expected == sum(comb(n, k) for k in range(n + 1) if k % 4 in (0, 3))
    assert sa_dimension(n) == expected


@given(clifford_numbers(max_n=4))
def test_left_and_right_matrices(a):
    b = CliffordNumber(a.n, np.linspace(-1, 1, 1 << a.n))
    np.testing.assert_allclose(left_matrix(a) @ b.coeffs, (a * b).coeffs, atol=1e-12)
    np.testing.assert_allclose(right_matrix(a) @ b.coeffs, (b * a).coeffs, atol=1e-12)


@pytest.mark.parametrize("index,n,key", [(0, 3, ""), (1, 3, "1"), (5, 3, "13"), (7, 3, "123"), (0b1000000001, 10, "1,10")])
def test_basis_keys_round_trip(index, n, key):
    assert basis_key(index, n) == key
    assert parse_basis_key(key, n) == index


@pytest.mark.parametrize("key", ["21", "4", "11", "0"])
def test_bad_basis_keys(key):
    with pytest.raises(ValueError):
        parse_basis_key(key, 3)


def test_dictionary_form():
    a = CliffordNumber.from_dict(2, {"": 1.0, "1": 0.5, "12": -2.0})
    assert a.to_dict() == {"": 1.0, "1": 0.5, "12": -2.0}


@given(st.lists(st.floats(-3, 3), min_size=3, max_size=3).filter(lambda v: np.linalg.norm(v) > 1e-3))
def test_slice_units_square_to_minus_one(vec):
    unit = SliceUnit.normalized(vec)
    i = unit.to_clifford()
    assert (i * i).allclose(CliffordNumber.scalar(3, -1.0), 1e-12)


def test_slice_embed_and_paravector():
    unit = SliceUnit.axis(2, 2)
    z = slice_embed(1.5, 2.0, unit)
    np.testing.assert_array_equal(z.coeffs, [1.5, 0.0, 2.0, 0.0])
    p = Paravector.from_clifford(z)
    assert p.real == 1.5 and p.imag_norm == 2.0 and abs(p) == 2.5


def test_paravector_rejects_higher_grades():
    with pytest.raises(ValueError):
        Paravector.from_clifford(CliffordNumber.basis(2, "12"))


@given(clifford_numbers(max_n=3))
def test_psd_square_root(b):
    p = b * clifford_conj(b)
    root = psd_function(p, lambda w: np.sqrt(np.clip(w, 0, None)))
    assert is_self_adjoint_clifford(root, 1e-9)
    assert (root * root).allclose(p, 1e-8 * max(1.0, clifford_abs(p)))
