"""Fixture pairs that are compatible but not sequentially compatible.

Both cases come with an explicit joint observable whose marginals are the
targets.  ``hw_example_1`` lives in C^3 with |X| = 2, |Y| = 5;
``hw_example_2`` is built from two noncommuting projections.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg_core as la
from .quantum_objects import BiObservable, Observable, ObjectError, marginal


@dataclass(frozen=True)
class GalleryCase:
    name: str
    targets: tuple
    provided_joint: BiObservable | None
    notes: str = ""
    params: dict = field(default_factory=dict)

    def marginal_error(self) -> float:
        """Largest entrywise deviation between the joint's marginals and the targets."""
        if self.provided_joint is None:
            return float("nan")
        a, b = self.targets
        e1 = np.abs(marginal(self.provided_joint, 1).effects - a.effects).max()
        e2 = np.abs(marginal(self.provided_joint, 2).effects - b.effects).max()
        return float(max(e1, e2))


def hw_example_1() -> GalleryCase:
    r2 = np.sqrt(2.0)
    A = np.array([np.diag([2.0, 0.0, 1.0]) / 2, np.diag([0.0, 2.0, 1.0]) / 2])
    B = np.array([
        np.array([[2, 0, -r2], [0, 0, 0], [-r2, 0, 1]]) / 4,
        np.array([[0, 0, 0], [0, 1, -2], [0, -2, 4]]) / 10,
        np.diag([0.0, 1.0, 0.0]) / 2,
        np.array([[0, 0, 0], [0, 4, 2], [0, 2, 1]]) / 10,
        np.array([[2, 0, r2], [0, 0, 0], [r2, 0, 1]]) / 4,
    ])
    xs, ys = (1, 2), (1, 2, 3, 4, 5)
    M = np.zeros((2, 5, 3, 3))
    for (x, y) in ((1, 1), (1, 5), (2, 2), (2, 3), (2, 4)):
        M[x - 1, y - 1] = B[y - 1]
    a = Observable(xs, A)
    b = Observable(ys, B)
    joint = BiObservable(xs, ys, M)
    return GalleryCase("hw_example_1", (a, b), joint,
                       notes="compatible; an instrument for B leaves A undisturbed, "
                             "none for A leaves B undisturbed")


def default_projections():
    """Rank-one qubit projections along z and at 45 degrees in the x-z plane."""
    P = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
    Q = 0.5 * (la.I2 + (la.SIGMA1 + la.SIGMA3) / np.sqrt(2.0))
    return P, Q


def hw_example_2(lam: float = 0.6, p_proj=None, q_proj=None) -> GalleryCase:
    if not 0.5 < lam <= 2.0 / 3.0:
        raise ObjectError("lambda must lie in (1/2, 2/3]")
    if p_proj is None and q_proj is None:
        p_proj, q_proj = default_projections()
    P = la.as_hermitian(p_proj)
    Q = la.as_hermitian(q_proj)
    for R in (P, Q):
        if not la.allclose(R @ R, R, 1e-10):
            raise ObjectError("P and Q must be orthogonal projections")
    if la.allclose(P @ Q, Q @ P, 1e-10):
        raise ObjectError("P and Q must not commute")
    eye = np.eye(P.shape[0])
    M = np.array([
        [(1 - lam) * eye, (2 * lam - 1) * P],
        [(2 * lam - 1) * Q, (1 - 1.5 * lam) * (P + Q) + 0.5 * lam * (2 * eye - P - Q)],
    ])
    a = Observable((1, 2), [lam * P + (1 - lam) * (eye - P), lam * (eye - P) + (1 - lam) * P])
    b = Observable((1, 2), [lam * Q + (1 - lam) * (eye - Q), lam * (eye - Q) + (1 - lam) * Q])
    joint = BiObservable((1, 2), (1, 2), M)
    return GalleryCase("hw_example_2", (a, b), joint,
                       notes="compatible by construction; no instrument for A leaves B undisturbed",
                       params={"lambda": lam})
