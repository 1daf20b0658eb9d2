"""Closed-form bounds around the incompatibility degree.

Upper bounds come from approximate cloning and from the uniform
bi-observable (the Shannon cap); lower bounds for the preparation side come
from the operator-norm bound on products of square roots of effects.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import linalg_core as la
from .minimax_solver import SolverConfig, _effect_seeds, sphere_search
from .quantum_objects import Instrument, MultiObservable, BiObservable, Observable, ObjectError

LN2 = math.log(2.0)
TRADEOFF_SLACK = 1e-6


def _same_dim(obs) -> int:
    dims = {o.dim for o in obs}
    if len(dims) != 1:
        raise ObjectError("observables must act on the same space")
    return dims.pop()


def cloning_lambda(d: int, n: int = 2) -> float:
    return (d + n) / (n * (d + 1))


def _cloning_adjoint(X: np.ndarray, d: int, n: int, S: np.ndarray) -> np.ndarray:
    """Phi*(X) = c Tr_{2..n}[S_n X S_n] with c = d! n! / (d+n-1)!."""
    c = math.factorial(d) * math.factorial(n) / math.factorial(d + n - 1)
    Y = S @ X @ S
    return c * la.partial_trace(Y, (d, d ** (n - 1)), 2)


def cloning_multiobservable(targets) -> MultiObservable:
    """Phi*(A_1 x ... x A_n) for the optimal n-cloning channel Phi."""
    targets = list(targets)
    if not targets:
        raise ObjectError("at least one observable is required")
    d = _same_dim(targets)
    n = len(targets)
    if n == 1:
        a = targets[0]
        return MultiObservable([a.outcomes], a.effects)
    S = la.symmetric_projector(d, n)
    sizes = [len(a.outcomes) for a in targets]
    eff = np.empty(tuple(sizes) + (d, d), dtype=complex)
    for idx in itertools.product(*(range(s) for s in sizes)):
        X = la.tensor(*(a.effects[i] for a, i in zip(targets, idx)))
        eff[idx] = _cloning_adjoint(X, d, n, S)
    return MultiObservable([a.outcomes for a in targets], eff)


def cloning_biobservable(a: Observable, b: Observable) -> BiObservable:
    """M_cl = Phi*(A x B) for Phi(rho) = 2/(d+1) S2 (rho x I) S2."""
    return BiObservable.from_multi(cloning_multiobservable([a, b]))


def cloning_instrument(a: Observable) -> Instrument:
    """J_x(rho) = Tr_1[(A(x) x I) Phi(rho)]; for any B, J*(B) is the cloning bi-observable."""
    d = a.dim
    S = la.symmetric_projector(d, 2)
    c = 2.0 / (d + 1)

    def outcome_map(k):
        Ak = la.tensor(a.effects[k], np.eye(d))
        return lambda r: c * la.partial_trace(Ak @ S @ la.tensor(r, np.eye(d)) @ S, (d, d), 1)

    return Instrument.from_maps(a.outcomes, [outcome_map(k) for k in range(len(a.outcomes))], d)


def cloning_upper_bound(targets) -> float:
    """sum_i log[n(d+1) / (d + n + (n-1) min_x Tr A_i(x))]."""
    targets = list(targets)
    if not targets:
        raise ObjectError("at least one observable is required")
    d = _same_dim(targets)
    n = len(targets)
    total = 0.0
    for a in targets:
        tmin = float(np.min(np.trace(a.effects, axis1=-2, axis2=-1).real))
        total += math.log2(n * (d + 1) / (d + n + (n - 1) * tmin))
    return total


# ---------------------------------------------------------------------------
# entropies minimised over states


def _entropy_fgrad(p):
    p = np.clip(p, 0.0, 1.0)
    live = p > 1e-300
    lp = np.log(np.where(live, p, 1.0))
    val = -np.sum(np.where(live, p * lp, 0.0)) / LN2
    grad = np.where(live, -(lp + 1.0), 700.0) / LN2
    return float(val), grad


def _min_entropy_sum(obs, cfg: SolverConfig, stream: int) -> float:
    stack = np.concatenate([o.effects for o in obs])
    d = stack.shape[-1]
    seeds = _effect_seeds([o.effects for o in obs])
    rng = cfg.rng(stream)
    seeds += [la.random_pure_vector(d, rng) for _ in range(cfg.restarts)]
    res = sphere_search(stack, _entropy_fgrad, seeds, maximize=False,
                        ftol=cfg.inner_tol * 1e-4, threads=cfg.threads)
    return max(float(res[0][0]), 0.0)


def prep_coefficient(a: Observable, b: Observable, cfg: SolverConfig | None = None) -> float:
    """Best found min over states of H(A^rho) + H(B^rho) (an upper estimate of the minimum)."""
    _same_dim([a, b])
    return _min_entropy_sum([a, b], cfg or SolverConfig(), stream=7)


def min_entropy(a: Observable, cfg: SolverConfig | None = None) -> float:
    return _min_entropy_sum([a], cfg or SolverConfig(), stream=8)


def shannon_cap(a: Observable, cfg: SolverConfig | None = None) -> float:
    """log|X| - min H(A^rho); bounds both Icomp(A, B) and Iad(A, B) from above."""
    return math.log2(len(a.outcomes)) - min_entropy(a, cfg)


def kp_lower_bound(a: Observable, b: Observable) -> float:
    """-log max_{x,y} ||A(x)^{1/2} B(y)^{1/2}||^2."""
    _same_dim([a, b])
    ra = [la.psd_sqrt(e) for e in a.effects]
    rb = [la.psd_sqrt(e) for e in b.effects]
    c = max(la.operator_norm(x @ y) ** 2 for x in ra for y in rb)
    return -math.log2(c) if c > 0 else math.inf


def tradeoff_rhs(a: Observable, b: Observable) -> float:
    return math.log2(len(a.outcomes)) + math.log2(len(b.outcomes))


def tradeoff_check(a: Observable, b: Observable, icomp_upper: float, prep: float,
                   slack: float = TRADEOFF_SLACK) -> bool:
    """icomp + prep <= log|X| + log|Y| (up to ``slack``)."""
    return icomp_upper + prep <= tradeoff_rhs(a, b) + slack


@dataclass
class BoundReport:
    cloning2: float
    cloningN: float | None
    shannon_cap: float
    kp_lower: float
    prep_coeff: float
    tradeoff_rhs: float

    def __post_init__(self):
        for k, v in asdict(self).items():
            if v is not None and not math.isfinite(v):
                raise ValueError(f"bound {k} is not finite")
        if self.cloning2 > 2.0 + 1e-12:
            raise ValueError("two-observable cloning bound exceeds 2")

    LABELS = {
        "cloning2": "upper bound on Icomp and Iad from optimal 2-cloning",
        "cloningN": "upper bound on the n-ary Icomp from optimal n-cloning",
        "shannon_cap": "upper bound log|X| - min H(A^rho)",
        "kp_lower": "lower bound on the preparation coefficient from effect overlaps",
        "prep_coeff": "min over states of H(A^rho) + H(B^rho), best found",
        "tradeoff_rhs": "log|X| + log|Y|, cap on Icomp + preparation coefficient",
    }

    def to_dict(self) -> dict:
        return {k: {"value": v, "label": self.LABELS[k]} for k, v in asdict(self).items()}


def bound_report(a: Observable, b: Observable, extra=(), cfg: SolverConfig | None = None) -> BoundReport:
    cfg = cfg or SolverConfig()
    extra = list(extra)
    return BoundReport(
        cloning2=cloning_upper_bound([a, b]),
        cloningN=cloning_upper_bound([a, b] + extra) if extra else None,
        shannon_cap=min(shannon_cap(a, cfg), shannon_cap(b, cfg)),
        kp_lower=kp_lower_bound(a, b),
        prep_coeff=prep_coefficient(a, b, cfg),
        tradeoff_rhs=tradeoff_rhs(a, b),
    )
