"""Relative and Shannon entropies, error functions and divergence tests.

Every exposed value is in bits.  ``math.inf`` plays the role of the
extended-real +inf.
"""

from __future__ import annotations

import math

import numpy as np

from . import linalg_core as la
from .quantum_objects import (BiObservable, MultiObservable, Observable, ObjectError,
                              ProbabilityDistribution, as_state, marginal)

SUPPORT_EPS = 1e-12
KERNEL_THRESH = 1e-9
LOG2E = 1.0 / math.log(2.0)


def s_func(u: float, v: float) -> float:
    """u log(u/v) with the conventions s(0, v) = 0 and s(u>0, 0) = +inf."""
    slack = 1e-12
    if not (-slack <= u <= 1 + slack and -slack <= v <= 1 + slack):
        raise ValueError(f"s_func arguments must lie in [0, 1], got ({u}, {v})")
    u = min(max(u, 0.0), 1.0)
    v = min(max(v, 0.0), 1.0)
    if u == 0.0:
        return 0.0
    if v == 0.0:
        return math.inf
    return u * math.log2(u / v)


def rel_entropy_array(p, q, eps: float = SUPPORT_EPS) -> float:
    """S(p||q) for plain weight arrays with the support threshold ``eps``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    supp = p >= eps
    if np.any(q[supp] < eps):
        return math.inf
    ps, qs = p[supp], q[supp]
    return float(np.sum(ps * np.log2(ps / qs)))


def _weights(p):
    return p.weights if isinstance(p, ProbabilityDistribution) else np.asarray(p, dtype=float)


def rel_entropy(p, q, eps: float = SUPPORT_EPS) -> float:
    """Relative entropy S(p||q) in bits; +inf iff supp p is not inside supp q."""
    if isinstance(p, ProbabilityDistribution) and isinstance(q, ProbabilityDistribution):
        if p.outcomes != q.outcomes:
            raise ObjectError("relative entropy needs identical outcome sets")
    pw, qw = _weights(p), _weights(q)
    if pw.shape != qw.shape:
        raise ObjectError("relative entropy needs distributions of equal length")
    return rel_entropy_array(pw, qw, eps)


def shannon(p) -> float:
    w = _weights(p)
    w = w[w > 0]
    return float(-np.sum(w * np.log2(w)))


def _probs(effects: np.ndarray, rho: np.ndarray) -> np.ndarray:
    w = np.einsum("ab,...ba->...", rho, effects).real
    return np.clip(w, 0.0, 1.0)


def error_function_multi(targets, m: MultiObservable, rho) -> float:
    """sum_i S(A_i^rho || M_[i]^rho)."""
    targets = list(targets)
    if len(targets) != m.n_factors:
        raise ObjectError("one target per factor of m is required")
    rho = as_state(rho)
    total = 0.0
    for i, a in enumerate(targets, start=1):
        if a.dim != m.dim or rho.dim != m.dim:
            raise ObjectError("dimension mismatch")
        if a.outcomes != m.outcome_sets[i - 1]:
            raise ObjectError(f"outcomes of target {i} do not match factor {i} of m")
        mi = marginal(m, i)
        total += rel_entropy_array(_probs(a.effects, rho.matrix), _probs(mi.effects, rho.matrix))
        if math.isinf(total):
            return math.inf
    return total


def error_function(a: Observable, b: Observable, m: BiObservable, rho) -> float:
    """S(A^rho || M_[1]^rho) + S(B^rho || M_[2]^rho)."""
    return error_function_multi([a, b], m, rho)


def kernel_violation(targets, m: MultiObservable, thresh: float = KERNEL_THRESH):
    """First (factor, outcome index, vector) with ker M_[i](x) not inside ker A_i(x).

    The vector lies in the kernel of the marginal effect and gives the target
    effect its largest weight there, so it is a state of infinite error.
    Returns ``None`` when every kernel inclusion holds.
    """
    for i, a in enumerate(targets, start=1):
        mi = marginal(m, i)
        for k in range(len(a.outcomes)):
            K = la.kernel_basis(mi.effects[k], thresh)
            if K.shape[1] == 0:
                continue
            restricted = la.herm_part(K.conj().T @ a.effects[k] @ K)
            w, v = np.linalg.eigh(restricted)
            if w[-1] > thresh:
                return i, k, K @ v[:, -1]
    return None


def divergence_finiteness_multi(targets, m: MultiObservable, thresh: float = KERNEL_THRESH) -> bool:
    return kernel_violation(targets, m, thresh) is None


def divergence_finiteness(a: Observable, b: Observable, m: BiObservable,
                          thresh: float = KERNEL_THRESH) -> bool:
    """True iff ker M_[1](x) is in ker A(x) and ker M_[2](y) is in ker B(y) for all x, y."""
    return divergence_finiteness_multi([a, b], m, thresh)


def max_rel_entropy_mixture(lam: float, q) -> float:
    """max_p S(p || lam p + (1-lam) q) = log 1/(lam + (1-lam) min q), for lam in (0, 1]."""
    if not 0.0 < lam <= 1.0:
        raise ValueError("lambda must lie in (0, 1]; use max_rel_entropy_trivial for lambda = 0")
    qmin = float(np.min(_weights(q)))
    return -math.log2(lam + (1.0 - lam) * qmin)


def max_rel_entropy_trivial(q) -> float:
    """The lam = 0 case: log 1/min q when q has full support, else +inf."""
    qmin = float(np.min(_weights(q)))
    return math.inf if qmin <= 0.0 else -math.log2(qmin)
