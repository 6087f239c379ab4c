import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weakthermo import FockSpace, NonHermitianError, expectation, fock_operators, hermitian_exp, tensor
from weakthermo.linalg import I2, SX, SZ, number_operator

from conftest import random_hermitian, random_unit


def taylor_exp(m, s, terms=30):
    out = np.eye(len(m), dtype=complex)
    term = np.eye(len(m), dtype=complex)
    for k in range(1, terms):
        term = term @ (s * m) / k
        out = out + term
    return out


def test_exp_of_zero_is_identity():
    np.testing.assert_array_equal(hermitian_exp(np.zeros((2, 2)), 1.0), np.eye(2))


def test_exp_diagonal():
    beta = 0.37
    got = hermitian_exp(np.diag([1.0, -1.0]), -beta)
    np.testing.assert_allclose(got, np.diag([math.exp(-beta), math.exp(beta)]), rtol=1e-15, atol=0)


def test_exp_matches_taylor_series(rng):
    m = random_hermitian(rng, 4, scale=2.0)
    got = hermitian_exp(m, -0.3)
    np.testing.assert_allclose(got, taylor_exp(m, -0.3), rtol=0, atol=1e-10)
    got = hermitian_exp(m, -0.3j)
    np.testing.assert_allclose(got, taylor_exp(m, -0.3j), rtol=0, atol=1e-10)


def test_exp_rejects_non_hermitian():
    with pytest.raises(NonHermitianError, match="not Hermitian"):
        hermitian_exp(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(NonHermitianError):
        hermitian_exp(np.array([[np.nan, 0.0], [0.0, 1.0]]))


def test_tensor_examples():
    np.testing.assert_array_equal(tensor(np.eye(2), np.eye(3)), np.eye(6))
    sigma_z = 2 * SZ
    np.testing.assert_array_equal(tensor(sigma_z, np.diag([0, 1])), np.diag([0, 1, 0, -1]))


def test_sz_z_on_up_vacuum():
    sigma = 0.7
    space = FockSpace(4, sigma)
    _, _, z, _ = fock_operators(space)
    up0 = np.zeros(8, dtype=complex)
    up0[0] = 1.0
    expected = np.zeros(8, dtype=complex)
    expected[1] = sigma / 2  # |up> (x) |1>
    np.testing.assert_allclose(tensor(SZ, z) @ up0, expected, atol=1e-15)


def test_ladder_d2():
    a, adag, _, _ = fock_operators(FockSpace(2))
    np.testing.assert_array_equal(a, np.array([[0, 1], [0, 0]]))
    np.testing.assert_array_equal(adag, a.T)


@pytest.mark.parametrize("dim", [2, 5, 16])
def test_canonical_commutator_away_from_corner(dim):
    _, _, z, p = fock_operators(FockSpace(dim, 1.3))
    comm = z @ p - p @ z
    np.testing.assert_allclose(comm[: dim - 1, : dim - 1], 1j * np.eye(dim - 1), atol=1e-14)
    # the truncation corner is where the identity breaks
    assert abs(comm[-1, -1] - 1j) > 0.5


def test_vacuum_position_variance():
    sigma = 2.5
    _, _, z, _ = fock_operators(FockSpace(6, sigma))
    assert (z @ z)[0, 0].real == pytest.approx(sigma**2, rel=1e-15)


def test_expectation_examples():
    sigma = 1.7
    _, _, z, _ = fock_operators(FockSpace(4, sigma))
    vac = np.array([1, 0, 0, 0], dtype=complex)
    assert expectation(vac, z) == 0.0
    assert expectation(np.array([1, 0], dtype=complex), SZ) == 0.5
    plus = np.array([1, 1, 0, 0], dtype=complex) / math.sqrt(2)
    assert expectation(plus, z) == pytest.approx(sigma, rel=1e-15)


def test_expectation_errors():
    with pytest.raises(ValueError, match="dimension"):
        expectation(np.array([1, 0, 0], dtype=complex), SZ)
    with pytest.raises(ValueError, match="normalized"):
        expectation(np.array([1, 1], dtype=complex), SZ)


def test_fock_space_validation():
    with pytest.raises(ValueError):
        FockSpace(1)
    with pytest.raises(ValueError):
        FockSpace(4, 0.0)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 6), s=st.floats(-5, 5))
def test_exp_inverse_property(seed, n, s):
    m = random_hermitian(np.random.default_rng(seed), n)
    prod = hermitian_exp(m, s) @ hermitian_exp(m, -s)
    np.testing.assert_allclose(prod, np.eye(n), atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_tensor_associative(seed):
    # small Gaussian integers keep every product exact, so ordering errors cannot hide
    rng = np.random.default_rng(seed)
    a, b, c = (rng.integers(-9, 10, size=(k, k)) + 1j * rng.integers(-9, 10, size=(k, k)) for k in (2, 3, 2))
    np.testing.assert_array_equal(tensor(tensor(a, b), c), tensor(a, tensor(b, c)))


@given(dim=st.integers(2, 64))
def test_number_operator_exact(dim):
    a, adag, _, _ = fock_operators(FockSpace(dim))
    n = adag @ a
    np.testing.assert_array_equal(n - np.diag(np.diag(n)), 0)
    # sqrt(k)**2 is exact only up to rounding
    np.testing.assert_allclose(np.diag(n), np.arange(dim), rtol=4e-16, atol=0)
    np.testing.assert_array_equal(number_operator(FockSpace(dim)), np.diag(np.arange(dim)))


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 8))
def test_expectation_of_hermitian_is_real(seed, n):
    rng = np.random.default_rng(seed)
    m = random_hermitian(rng, n, scale=10.0)
    v = random_unit(rng, n)
    val = expectation(v, m)
    assert isinstance(val, float)
    assert abs(np.vdot(v, m @ v).imag) <= 1e-12 * 10


def test_spin_operator_algebra():
    np.testing.assert_allclose(SX @ SX, I2 / 4)
    np.testing.assert_allclose(SZ @ SX - SX @ SZ, 1j * np.array([[0, -0.5j], [0.5j, 0]]))
