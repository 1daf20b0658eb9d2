"""Small dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` arrays of complex dtype.  Hermitian and PSD
checks take explicit tolerances; the defaults below are module level and can
be overridden per call.
"""

from __future__ import annotations

import itertools
from math import comb, factorial

import numpy as np

PSD_TOL = 1e-9
HERM_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA1, SIGMA2, SIGMA3)


class LinalgError(ValueError):
    """Raised on malformed matrices (shape, non-finite entries, non-Hermitian)."""


def as_matrix(m, square: bool = True) -> np.ndarray:
    """Return ``m`` as a finite complex 2-d array."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise LinalgError(f"expected a matrix, got shape {a.shape}")
    if square and a.shape[0] != a.shape[1]:
        raise LinalgError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise LinalgError("matrix has non-finite entries")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def herm_part(m: np.ndarray) -> np.ndarray:
    """(m + m*)/2, broadcasting over leading axes."""
    return 0.5 * (m + dagger(m))


def is_hermitian(m, tol: float = HERM_TOL) -> bool:
    a = np.asarray(m, dtype=complex)
    return bool(np.max(np.abs(a - dagger(a)), initial=0.0) <= tol)


def as_hermitian(m, tol: float = HERM_TOL) -> np.ndarray:
    """Validate Hermiticity within ``tol`` and return the exactly Hermitian part."""
    a = as_matrix(m)
    if not is_hermitian(a, tol):
        raise LinalgError("matrix is not Hermitian within tolerance")
    return herm_part(a)


def allclose(a, b, atol: float) -> bool:
    """Entrywise comparison with an explicit absolute tolerance."""
    a = np.asarray(a)
    b = np.asarray(b)
    return a.shape == b.shape and bool(np.max(np.abs(a - b), initial=0.0) <= atol)


def tensor(*mats) -> np.ndarray:
    """Kronecker product of one or more matrices (left to right)."""
    if not mats:
        raise LinalgError("tensor needs at least one factor")
    out = np.asarray(mats[0], dtype=complex)
    for m in mats[1:]:
        out = np.kron(out, np.asarray(m, dtype=complex))
    return out


def partial_trace(m, dims: tuple[int, int], which: int) -> np.ndarray:
    """Trace out factor ``which`` (1 or 2) of a bipartite operator.

    ``dims = (d1, d2)`` are the factor dimensions, with ``m`` acting on
    C^d1 (x) C^d2 in Kronecker order.
    """
    a = np.asarray(m, dtype=complex)
    d1, d2 = int(dims[0]), int(dims[1])
    if a.shape[-2:] != (d1 * d2, d1 * d2):
        raise LinalgError(f"shape {a.shape} does not match dims {dims}")
    t = a.reshape(a.shape[:-2] + (d1, d2, d1, d2))
    if which == 1:
        return np.einsum("...ajak->...jk", t)
    if which == 2:
        return np.einsum("...ajbj->...ab", t)
    raise LinalgError("which must be 1 or 2")


def permutation_operator(d: int, perm) -> np.ndarray:
    """Unitary permuting the tensor factors of (C^d)^{(x)n}.

    Factor ``k`` of the input lands in slot ``perm[k]`` of the output.
    """
    n = len(perm)
    D = d**n
    idx = np.indices((d,) * n).reshape(n, -1)
    out_idx = np.empty_like(idx)
    for k, pk in enumerate(perm):
        out_idx[pk] = idx[k]
    rows = np.ravel_multi_index(tuple(out_idx), (d,) * n)
    P = np.zeros((D, D), dtype=complex)
    P[rows, np.arange(D)] = 1.0
    return P


def symmetric_projector(d: int, n: int) -> np.ndarray:
    """Projector onto the symmetric subspace of (C^d)^{(x)n}.

    Built as the average of the n! factor permutations; its rank is
    binomial(d+n-1, n).
    """
    if d < 2 or n < 2:
        raise LinalgError("symmetric_projector needs d >= 2 and n >= 2")
    S = sum(permutation_operator(d, p) for p in itertools.permutations(range(n)))
    return herm_part(S / factorial(n))


def symmetric_dimension(d: int, n: int) -> int:
    return comb(d + n - 1, n)


def eigh(h) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian eigendecomposition (ascending eigenvalues)."""
    return np.linalg.eigh(herm_part(np.asarray(h, dtype=complex)))


def min_eigenvalue(h, herm_tol: float = HERM_TOL) -> float:
    a = as_matrix(h)
    if not is_hermitian(a, herm_tol):
        raise LinalgError("min_eigenvalue needs a Hermitian matrix")
    return float(np.linalg.eigvalsh(herm_part(a))[0])


def is_psd(h, psd_tol: float = PSD_TOL, herm_tol: float = HERM_TOL) -> bool:
    a = np.asarray(h, dtype=complex)
    if not is_hermitian(a, herm_tol):
        return False
    return bool(np.linalg.eigvalsh(herm_part(a)).min() >= -psd_tol)


def psd_sqrt(h) -> np.ndarray:
    """Square root of a PSD matrix, negative eigenvalues clipped to zero."""
    w, v = eigh(h)
    return (v * np.sqrt(np.clip(w, 0.0, None))[..., None, :]) @ dagger(v)


def psd_project(h) -> np.ndarray:
    """Frobenius-nearest PSD matrix (batched over leading axes)."""
    w, v = np.linalg.eigh(herm_part(np.asarray(h, dtype=complex)))
    return (v * np.clip(w, 0.0, None)[..., None, :]) @ dagger(v)


def kernel_basis(h, thresh: float = 1e-9) -> np.ndarray:
    """Orthonormal columns spanning eigenvectors with eigenvalue below ``thresh``."""
    w, v = eigh(h)
    return v[:, w < thresh]


def operator_norm(m) -> float:
    return float(np.linalg.norm(np.asarray(m, dtype=complex), 2))


def projector(vec) -> np.ndarray:
    """|v><v| / <v|v>."""
    v = np.asarray(vec, dtype=complex).ravel()
    nrm = np.vdot(v, v).real
    if nrm <= 0:
        raise LinalgError("zero vector has no projector")
    return np.outer(v, v.conj()) / nrm


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar random unitary via QR with phase correction."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return herm_part(z)


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    r = d if rank is None else rank
    g = rng.standard_normal((d, r)) + 1j * rng.standard_normal((d, r))
    rho = g @ g.conj().T
    return herm_part(rho / np.trace(rho).real)


def random_pure_vector(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)
