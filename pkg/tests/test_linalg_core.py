import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from entrimur import linalg_core as la


def test_pauli_tensor_entry():
    assert la.tensor(la.SIGMA1, la.SIGMA2)[0, 3] == -1j


def test_partial_trace_of_bell_state_is_maximally_mixed():
    v = np.array([1, 0, 0, 1]) / math.sqrt(2)
    rho = np.outer(v, v)
    assert la.allclose(la.partial_trace(rho, (2, 2), 1), np.eye(2) / 2, 1e-14)
    assert la.allclose(la.partial_trace(rho, (2, 2), 2), np.eye(2) / 2, 1e-14)


def test_partial_trace_of_product():
    rng = np.random.default_rng(1)
    a, b = la.random_density(2, rng), la.random_density(3, rng)
    ab = la.tensor(a, b)
    assert la.allclose(la.partial_trace(ab, (2, 3), 2), a, 1e-13)
    assert la.allclose(la.partial_trace(ab, (2, 3), 1), b, 1e-13)


def test_partial_trace_rejects_bad_dims():
    with pytest.raises(la.LinalgError):
        la.partial_trace(np.eye(4), (2, 3), 1)
    with pytest.raises(la.LinalgError):
        la.partial_trace(np.eye(4), (2, 2), 3)


@pytest.mark.parametrize("d,n", [(2, 2), (3, 2), (2, 3), (3, 3)])
def test_symmetric_projector_rank_and_idempotence(d, n):
    S = la.symmetric_projector(d, n)
    assert la.allclose(S @ S, S, 1e-12)
    assert round(np.trace(S).real) == la.symmetric_dimension(d, n)


def test_symmetric_projector_small_cases():
    assert round(np.trace(la.symmetric_projector(2, 2)).real) == 3
    assert round(np.trace(la.symmetric_projector(3, 3)).real) == 10
    with pytest.raises(la.LinalgError):
        la.symmetric_projector(1, 2)


def test_swap_operator():
    P = la.permutation_operator(2, (1, 0))
    a, b = np.random.default_rng(0).standard_normal((2, 2)), np.eye(2)[::-1]
    assert la.allclose(P @ la.tensor(a, b) @ P.T, la.tensor(b, a), 1e-14)


def test_min_eigenvalue_and_errors():
    assert la.min_eigenvalue(np.diag([2.0, -1.0])) == pytest.approx(-1.0)
    with pytest.raises(la.LinalgError):
        la.min_eigenvalue(np.array([[0, 1], [0, 0]]))
    with pytest.raises(la.LinalgError):
        la.as_matrix(np.ones(3))
    with pytest.raises(la.LinalgError):
        la.as_matrix([[np.nan, 0], [0, 1]])


def test_is_psd_tolerance():
    assert la.is_psd(np.diag([1.0, -1e-12]))
    assert not la.is_psd(np.diag([1.0, -1e-6]))
    assert not la.is_psd(np.array([[1, 1], [0, 1]]))


@given(st.integers(2, 5), st.integers(0, 10**6))
def test_psd_sqrt_squares_back(d, seed):
    rng = np.random.default_rng(seed)
    rho = la.random_density(d, rng)
    r = la.psd_sqrt(rho)
    assert la.allclose(r @ r, rho, 1e-10)


@given(st.integers(2, 5), st.integers(0, 10**6))
def test_psd_project_is_nearest_and_psd(d, seed):
    rng = np.random.default_rng(seed)
    h = la.random_hermitian(d, rng)
    p = la.psd_project(h)
    assert la.is_psd(p)
    assert la.allclose(la.psd_project(p), p, 1e-10)


@given(st.integers(2, 6), st.integers(0, 10**6))
def test_random_unitary_is_unitary(d, seed):
    U = la.random_unitary(d, np.random.default_rng(seed))
    assert la.allclose(U @ U.conj().T, np.eye(d), 1e-12)


def test_kernel_basis():
    K = la.kernel_basis(np.diag([1.0, 0.0, 0.0]))
    assert K.shape == (3, 2)
    assert la.allclose(np.diag([1.0, 0, 0]) @ K, np.zeros((3, 2)), 1e-14)


def test_projector():
    assert la.allclose(la.projector([1, 1]), np.full((2, 2), 0.5), 1e-15)
    with pytest.raises(la.LinalgError):
        la.projector([0, 0])
