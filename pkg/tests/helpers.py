import numpy as np

from entrimur import linalg_core as la
from entrimur.quantum_objects import Instrument, Observable


def random_observable(d, k, rng, sharp=False, outcomes=None):
    outs = tuple(range(k)) if outcomes is None else tuple(outcomes)
    if sharp:
        U = la.random_unitary(d, rng)
        return Observable(outs[:d], [np.outer(U[:, i], U[:, i].conj()) for i in range(d)])
    G = rng.standard_normal((k, d, d)) + 1j * rng.standard_normal((k, d, d))
    P = G @ la.dagger(G)
    w, V = np.linalg.eigh(P.sum(0))
    T = (V / np.sqrt(w)) @ V.conj().T
    return Observable(outs, T @ P @ T)


def random_instrument(d, k, rng, n_kraus=2):
    K = rng.standard_normal((k * n_kraus, d, d)) + 1j * rng.standard_normal((k * n_kraus, d, d))
    S = np.einsum("kba,kbc->ac", K.conj(), K)
    w, V = np.linalg.eigh(S)
    K = K @ ((V / np.sqrt(w)) @ V.conj().T)
    return Instrument.from_kraus(range(k), [list(K[i * n_kraus:(i + 1) * n_kraus]) for i in range(k)])


def random_distribution(n, rng):
    w = rng.exponential(size=n)
    return w / w.sum()
