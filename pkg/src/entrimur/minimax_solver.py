"""Certified brackets for entropic divergences and incompatibility indices.

The quantities handled here are

* ``D(A, B || M) = sup_rho [S(A^rho || M_[1]^rho) + S(B^rho || M_[2]^rho)]``,
  computed by :func:`max_over_states` (a search over pure states),
* ``Icomp(A, B) = inf_M D(A, B || M)`` over all bi-observables
  (:func:`icomp`), its n-ary analogue (:func:`icomp_multi`), and
* ``Iad(A, B)``, the same infimum restricted to sequential measurements
  ``M(x, y) = J*_x[B(y)]`` (:func:`iad`).

Outer problems are solved by an exchange (cutting-plane) loop.  A finite
atlas of pure states replaces the supremum, which turns the outer problem
into a convex program over the POVM set or over the Choi spectrahedron of
instruments.  That program is solved through a smooth surjective
parametrisation of the feasible set

    X_b = T K_b K_b* T,   T = S^{-1/2},   S = sum_b K_b K_b*

(with ``T`` replaced by ``T (x) 1`` and ``S`` by its output partial trace
for instruments), minimising a log-sum-exp smoothing of the max over the
atlas with L-BFGS under a decreasing temperature.  Because the feasible
set is convex and the atlas objective is convex, a supporting-hyperplane
argument gives a lower bound that is valid whatever the quality of the
final point: see :func:`_certificate`.  The candidate's divergence,
evaluated by the inner maximiser, is the upper bound.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from . import linalg_core as la
from .entropy import SUPPORT_EPS, kernel_violation
from .quantum_objects import (BiObservable, Instrument, MultiObservable, Observable,
                              ObjectError, State, marginal)

LN2 = math.log(2.0)


def _env_threads() -> int:
    try:
        return max(1, int(os.environ.get("ENTRIMUR_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class SolverConfig:
    """Knobs of the inner maximiser and of the exchange loop."""

    restarts: int = 32
    inner_tol: float = 1e-7
    outer_tol: float = 1e-4
    max_exchange_rounds: int = 200
    seed: int = 0xC0FFEE
    step_schedule: str = "lbfgs-continuation"
    threads: int = field(default_factory=_env_threads)
    repair_weight: float = 1e-6
    max_new_states: int = 8
    trace_path: str | None = None

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.inner_tol <= 0 or self.outer_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_exchange_rounds < 1:
            raise ValueError("max_exchange_rounds must be >= 1")
        if self.step_schedule not in SCHEDULES:
            raise ValueError(f"unknown step schedule {self.step_schedule!r}")

    def rng(self, stream: int = 0) -> np.random.Generator:
        """Counter-based generator; ``stream`` selects an independent substream."""
        return np.random.Generator(np.random.Philox(key=self.seed & (2**64 - 1), counter=stream))


# temperature ladders for the smoothed max
SCHEDULES = {
    "lbfgs-continuation": (1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7),
    "lbfgs-fast": (1e-2, 1e-4, 1e-6),
}


@dataclass
class Bracket:
    """Certified enclosure ``lower <= value <= upper`` of a minimax index."""

    lower: float
    upper: float
    witness_measurement: MultiObservable | None
    witness_states: list
    rounds_used: int
    saturated: bool = False
    witness_instrument: Instrument | None = None
    history: list = field(default_factory=list)

    @property
    def gap(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lower - slack <= value <= self.upper + slack

    def overlaps(self, other: "Bracket", slack: float = 0.0) -> bool:
        return self.lower <= other.upper + slack and other.lower <= self.upper + slack


class StateAtlas:
    """Growing list of pure state vectors (deduplicated up to phase)."""

    def __init__(self, dim: int, fidelity_tol: float = 1e-10):
        self.dim = dim
        self.fidelity_tol = fidelity_tol
        self._vecs: list[np.ndarray] = []

    def __len__(self):
        return len(self._vecs)

    def add(self, vec) -> bool:
        v = np.asarray(vec, dtype=complex).ravel()
        v = v / np.linalg.norm(v)
        for u in self._vecs:
            if abs(np.vdot(u, v)) ** 2 > 1.0 - self.fidelity_tol:
                return False
        self._vecs.append(v)
        return True

    def extend(self, vecs) -> int:
        return sum(self.add(v) for v in vecs)

    def vectors(self) -> np.ndarray:
        return np.array(self._vecs)

    def densities(self) -> np.ndarray:
        V = self.vectors()
        return np.einsum("ka,kb->kab", V, V.conj())

    def states(self) -> list[State]:
        return [State.pure(v) for v in self._vecs]


# ---------------------------------------------------------------------------
# pure-state search engine


def _effect_seeds(stacks) -> list[np.ndarray]:
    seeds = []
    for e in stacks:
        e = np.asarray(e).reshape(-1, e.shape[-1], e.shape[-1])
        _, v = np.linalg.eigh(la.herm_part(e))
        seeds.extend(v[k][:, i] for k in range(len(e)) for i in range(e.shape[-1]))
    return seeds


def sphere_search(stack: np.ndarray, fgrad, seeds, maximize: bool = True,
                  ftol: float = 1e-12, threads: int = 1, maxiter: int = 500):
    """Local optimisation of ``f(p)`` with ``p_j = <psi|E_j|psi>`` over unit vectors.

    ``fgrad(p) -> (value, dvalue/dp)``.  Every seed is refined by L-BFGS on
    the normalised parametrisation ``psi = v/|v|``, which is equivalent to
    ascent along the sphere.  Returns ``[(value, unit vector)]`` sorted best
    first.
    """
    d = stack.shape[-1]
    sign = -1.0 if maximize else 1.0

    def obj(z):
        v = z[:d] + 1j * z[d:]
        n = np.vdot(v, v).real
        if not n > 1e-200:
            return math.inf, np.zeros_like(z)
        Ev = stack @ v
        p = (Ev @ v.conj()).real / n
        val, dp = fgrad(p)
        g = 2.0 * (dp @ Ev - (dp @ p) * v) / n
        return sign * val, sign * np.concatenate([g.real, g.imag])

    def run(v0):
        v0 = np.asarray(v0, dtype=complex)
        z0 = np.concatenate([v0.real, v0.imag])
        r = minimize(obj, z0, jac=True, method="L-BFGS-B",
                     options=dict(maxiter=maxiter, ftol=ftol, gtol=1e-10))
        v = r.x[:d] + 1j * r.x[d:]
        nv = np.linalg.norm(v)
        v = v / nv if np.isfinite(nv) and nv > 1e-100 else v0 / np.linalg.norm(v0)
        p = np.einsum("a,jab,b->j", v.conj(), stack, v).real
        return fgrad(p)[0], v

    if threads > 1 and len(seeds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(run, seeds))
    else:
        results = [run(s) for s in seeds]
    results.sort(key=lambda t: -t[0] if maximize else t[0])
    return results


def _dedupe(results, tol: float = 1e-8):
    kept = []
    for val, v in results:
        if all(abs(np.vdot(u, v)) ** 2 < 1.0 - tol for _, u in kept):
            kept.append((val, v))
    return kept


def _error_fgrad(n_each: int):
    """Objective sum_j s(p_j, q_j) on the stacked vector (p, q)."""

    def fgrad(pq):
        p = np.clip(pq[:n_each], 0.0, 1.0)
        q = np.clip(pq[n_each:], 1e-300, 1.0)
        live = p > 1e-300
        ps = np.where(live, p, 1.0)
        lr = np.log(ps / q)
        val = np.sum(np.where(live, p * lr, 0.0)) / LN2
        dp = np.where(live, lr + 1.0, 0.0) / LN2
        dq = np.where(live, -p / q, 0.0) / LN2
        return val, np.concatenate([dp, dq])

    return fgrad


def _check_shapes(targets, m: MultiObservable):
    if len(targets) != m.n_factors:
        raise ObjectError("one target observable per factor is required")
    for i, a in enumerate(targets):
        if a.dim != m.dim:
            raise ObjectError("dimension mismatch")
        if a.outcomes != m.outcome_sets[i]:
            raise ObjectError(f"outcomes of target {i + 1} do not match factor {i + 1}")


def _inner_maxima(targets, m: MultiObservable, cfg: SolverConfig, stream: int = 0,
                  extra_seeds=()):
    """All refined local maxima of the error function for a finite-divergence ``m``."""
    T = np.concatenate([a.effects for a in targets])
    Q = np.concatenate([marginal(m, i).effects for i in range(1, m.n_factors + 1)])
    stack = np.concatenate([T, Q])
    seeds = _effect_seeds([T, m.flat_effects()]) + list(extra_seeds)
    rng = cfg.rng(stream)
    for _ in range(cfg.restarts):
        seeds.append(la.random_pure_vector(m.dim, rng))
    res = sphere_search(stack, _error_fgrad(len(T)), seeds, maximize=True,
                        ftol=cfg.inner_tol * 1e-4, threads=cfg.threads)
    return _dedupe(res)


def max_over_states_multi(targets, m: MultiObservable, cfg: SolverConfig | None = None,
                          stream: int = 0, extra_seeds=()) -> tuple[float, State]:
    """sup over states of the n-ary error function, with a maximising pure state."""
    cfg = cfg or SolverConfig()
    targets = list(targets)
    _check_shapes(targets, m)
    bad = kernel_violation(targets, m)
    if bad is not None:
        return math.inf, State.pure(bad[2])
    best = _inner_maxima(targets, m, cfg, stream, extra_seeds)[0]
    # a sum of relative entropies; rounding can push it a hair below zero
    return max(float(best[0]), 0.0), State.pure(best[1])


def max_over_states(a: Observable, b: Observable, m: BiObservable,
                    cfg: SolverConfig | None = None) -> tuple[float, State]:
    """Entropic divergence D(A, B || M) and a state attaining it.

    Returns ``(+inf, witness)`` when a kernel inclusion fails.  Otherwise the
    value is the best local maximum found from eigenvector seeds and
    ``cfg.restarts`` random starts, a lower estimate of the supremum.
    """
    return max_over_states_multi([a, b], m, cfg)


def divergence(a: Observable, b: Observable, m: BiObservable, cfg: SolverConfig | None = None) -> float:
    return max_over_states(a, b, m, cfg)[0]


# ---------------------------------------------------------------------------
# restricted convex problem


def _fn_herm(S, f, fp):
    """f(S) and the data for its Frechet derivative (Daleckii-Krein)."""
    w, V = np.linalg.eigh(S)
    fw = f(w)
    dw = w[:, None] - w[None, :]
    same = np.abs(dw) <= 1e-12 * max(1.0, float(np.abs(w).max()))
    safe = np.where(same, 1.0, dw)
    gam = np.where(same, fp(w)[:, None] * np.ones_like(dw), (fw[:, None] - fw[None, :]) / safe)
    return (V * fw) @ V.conj().T, V, gam


def _dk(V, gam, H):
    return V @ ((V.conj().T @ H @ V) * gam) @ V.conj().T


class _Feasible:
    """POVM set or Choi spectrahedron with the factorised parametrisation."""

    def __init__(self, kind: str, n_blocks: int, d_in: int, d_out: int = 1):
        self.kind = kind
        self.n = n_blocks
        self.d_in = d_in
        self.d_out = d_out
        self.D = d_in * d_out

    def embed(self, T):
        return T if self.kind == "povm" else np.kron(T, np.eye(self.d_out))

    def reduce(self, X):
        if self.kind == "povm":
            return X
        return la.partial_trace(X, (self.d_in, self.d_out), 2)

    def unpack(self, z):
        n, D = self.n, self.D
        z = z.reshape(2, n, D, D)
        return z[0] + 1j * z[1]

    def pack(self, K):
        return np.concatenate([K.real.ravel(), K.imag.ravel()])

    def blocks(self, K):
        P = K @ la.dagger(K)
        S = la.herm_part(self.reduce(P.sum(axis=0)))
        T, V, gam = _fn_herm(S, lambda w: w ** -0.5, lambda w: -0.5 * w ** -1.5)
        ET = self.embed(T)
        return ET @ P @ ET, (P, T, ET, V, gam)

    def pullback(self, G, cache, K):
        P, T, ET, V, gam = cache
        X = P @ ET @ G
        H = la.herm_part(self.reduce((X + la.dagger(X)).sum(axis=0)))
        Z = _dk(V, gam, H)
        W = ET @ G @ ET + self.embed(Z)
        return self.pack(2.0 * W @ K)

    def initial(self, rng) -> np.ndarray:
        n, D = self.n, self.D
        K = np.broadcast_to(np.eye(D), (n, D, D)) + 0.05 * (
            rng.standard_normal((n, D, D)) + 1j * rng.standard_normal((n, D, D)))
        return self.pack(K)

    def uniform_blocks(self):
        if self.kind == "povm":
            return np.broadcast_to(np.eye(self.D) / self.n, (self.n, self.D, self.D)).copy()
        # Choi blocks of rho -> rho / n
        v = np.eye(self.d_in).reshape(-1)
        return np.broadcast_to(np.outer(v, v) / self.n, (self.n, self.D, self.D)).copy()

    def lower_linear(self, G, X) -> float:
        """A lower bound on min over the feasible set of sum_b Re Tr(G_b X_b).

        Any Hermitian Y with G_b - embed(Y) >= 0 for all b gives
        sum_b Tr(G_b X_b) >= Tr Y on the feasible set.  Y is built from the
        stationarity condition G_b X_b = embed(Y) X_b and shifted down
        until dual feasible.
        """
        Ybar = la.herm_part(self.reduce(np.einsum("bij,bjk->ik", G, X)))
        shift = np.linalg.eigvalsh(self.embed(Ybar)[None] - la.herm_part(G)).max()
        return float(np.trace(Ybar).real - shift * Ybar.shape[0])


class _Problem:
    """Targets, joint outcome shape and the map from blocks to joint effects."""

    def __init__(self, targets, kind: str = "povm", second: Observable | None = None):
        self.targets = list(targets)
        self.d = self.targets[0].dim
        for a in self.targets:
            if a.dim != self.d:
                raise ObjectError("all targets must share the dimension")
        self.shape = tuple(len(a) for a in self.targets)
        self.N = int(np.prod(self.shape))
        self.kind = kind
        self.second = second
        if kind == "povm":
            self.feasible = _Feasible("povm", self.N, self.d)
        else:
            self.feasible = _Feasible("choi", self.shape[0], self.d, self.d)
            self.Bfx = np.asarray(second.effects)

    def joint(self, X):
        if self.kind == "povm":
            return X
        d = self.d
        C4 = X.reshape(len(X), d, d, d, d)
        M = np.einsum("yab,xjbia->xyij", self.Bfx, C4)
        return M.reshape(-1, d, d)

    def joint_adjoint(self, G):
        if self.kind == "povm":
            return G
        d = self.d
        G = G.reshape(self.shape[0], self.shape[1], d, d)
        out = np.einsum("xyji,yab->xiajb", G, self.Bfx)
        return out.reshape(self.shape[0], d * d, d * d)

    def setup(self, rho):
        p = [np.einsum("kab,xba->kx", rho, a.effects).real for a in self.targets]
        return [np.clip(pi, 0.0, 1.0) for pi in p]

    def atlas_values(self, M, rho, p):
        """Error function at each atlas state and its derivative in t = Tr(rho M_j)."""
        K = len(rho)
        t = np.einsum("kab,jba->kj", rho, M).real.reshape((K,) + self.shape)
        n = len(self.shape)
        E = np.zeros(K)
        g = np.zeros((K,) + self.shape)
        for i in range(n):
            axes = tuple(1 + a for a in range(n) if a != i)
            q = np.clip(t.sum(axis=axes), 0.0, None)
            pi = p[i]
            live = pi > SUPPORT_EPS
            qs = np.maximum(q, 1e-300)
            with np.errstate(divide="ignore"):
                terms = np.where(live, pi * np.log(np.where(live, pi, 1.0) / qs), 0.0)
            E += terms.sum(axis=1) / LN2
            c = np.where(live, -pi / qs, 0.0) / LN2
            shp = [K] + [1] * n
            shp[1 + i] = self.shape[i]
            g = g + c.reshape(shp)
        return E, g.reshape(K, -1)

    def measurement(self, X):
        M = self.joint(X)
        if len(self.shape) == 2:
            return BiObservable(self.targets[0].outcomes, self.targets[1].outcomes,
                                M.reshape(self.shape + (self.d, self.d)), sum_tol=1e-8)
        return MultiObservable([a.outcomes for a in self.targets],
                               M.reshape(self.shape + (self.d, self.d)), sum_tol=1e-8)

    def instrument(self, X):
        if self.kind != "choi":
            return None
        return Instrument(self.targets[0].outcomes, X, self.d, self.d, sum_tol=1e-8)


def _smoothed(E, mu):
    m = E.max()
    e = np.exp((E - m) / mu)
    s = e.sum()
    return m + mu * math.log(s), e / s


def _certificate(prob: _Problem, X, rho, p, w) -> float:
    """Lower bound on min over the feasible set of max_k E_k.

    For weights w in the simplex, g(X) = sum_k w_k E_k(X) is convex and
    smaller than the max, so min g >= g(Xbar) + min <grad g(Xbar), X - Xbar>.
    """
    M = prob.joint(X)
    E, g = prob.atlas_values(M, rho, p)
    if not np.all(np.isfinite(E)):
        return -math.inf
    GM = np.einsum("kj,kab->jab", w[:, None] * g, rho)
    G = prob.joint_adjoint(GM)
    lin = float(np.einsum("bij,bji->", G, X).real)
    return float(w @ E) - lin + prob.feasible.lower_linear(G, X)


def _stage_certificate(prob: _Problem, X, rho, p, mus=(1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8)):
    E, _ = prob.atlas_values(prob.joint(X), rho, p)
    if not np.all(np.isfinite(E)):
        return -math.inf, E
    cert = -math.inf
    for mu in mus:
        _, w = _smoothed(E, mu)
        cert = max(cert, _certificate(prob, X, rho, p, w))
    return cert, E


def _restricted_solve(prob: _Problem, rho, p, z0, schedule, target_gap: float):
    """Minimise the smoothed atlas max; stop once the certified gap is below target.

    Returns the parameters, the final feasible blocks, the best certificate
    met along the way (every stage end is a feasible point) and the index of
    the last stage run.
    """
    feas = prob.feasible

    def obj(z, mu):
        K = feas.unpack(z)
        X, cache = feas.blocks(K)
        E, g = prob.atlas_values(prob.joint(X), rho, p)
        f, w = _smoothed(E, mu)
        GM = np.einsum("kj,kab->jab", w[:, None] * g, rho)
        return f, feas.pullback(prob.joint_adjoint(GM), cache, K)

    z = z0
    best = -math.inf
    X = None
    stage = 0
    for stage, mu in enumerate(schedule):
        with np.errstate(over="ignore", invalid="ignore"):
            r = minimize(obj, z, args=(mu,), jac=True, method="L-BFGS-B",
                         options=dict(maxiter=3000, ftol=1e-15, gtol=1e-13))
        if np.all(np.isfinite(r.x)):
            z = r.x
        X = la.herm_part(feas.blocks(feas.unpack(z))[0])
        cert, E = _stage_certificate(prob, X, rho, p)
        best = max(best, cert)
        if np.all(np.isfinite(E)) and E.max() - best <= target_gap:
            break
    return z, X, best, stage


def _repair(prob: _Problem, X, weight: float):
    return (1.0 - weight) * X + weight * prob.feasible.uniform_blocks()


def _exchange(prob: _Problem, cfg: SolverConfig) -> Bracket:
    atlas = StateAtlas(prob.d)
    atlas.extend(_effect_seeds([a.effects for a in prob.targets]))
    rng = cfg.rng(10**6)
    z = prob.feasible.initial(rng)
    lower, upper = 0.0, math.inf
    witness = witness_X = None
    witness_states: list = []
    history = []
    schedule = SCHEDULES[cfg.step_schedule]
    rounds = 0
    start = 0
    trace = open(cfg.trace_path, "a") if cfg.trace_path else None
    try:
        for rounds in range(1, cfg.max_exchange_rounds + 1):
            rho = atlas.densities()
            p = prob.setup(rho)
            # warm rounds skip the coarse smoothing stages already passed
            z, X, cert, stop = _restricted_solve(prob, rho, p, z, schedule[start:],
                                                 0.2 * cfg.outer_tol)
            start = max(0, start + stop - 1)
            # the certificate is taken at the raw optimiser output; repairing
            # first would spoil the linearisation
            lower = max(lower, cert)
            E, _ = prob.atlas_values(prob.joint(X), rho, p)
            if not np.all(np.isfinite(E)) or _violates(prob, X):
                X = _repair(prob, X, cfg.repair_weight)
                E, _ = prob.atlas_values(prob.joint(X), rho, p)

            cand = prob.measurement(X)
            maxima = _inner_maxima(prob.targets, cand, cfg, stream=rounds,
                                   extra_seeds=list(atlas.vectors()))
            dval = max(float(maxima[0][0]), 0.0)
            if dval < upper:
                upper = dval
                witness, witness_X = cand, X
                witness_states = [State.pure(v) for val, v in maxima
                                  if val >= dval - 10 * cfg.inner_tol]
            rec = {"round": rounds, "lower": lower, "upper": upper, "atlas_size": len(atlas),
                   "round_lower": cert, "round_upper": dval, "restricted_value": float(E.max())}
            history.append(rec)
            if trace:
                trace.write(json.dumps({k: rec[k] for k in ("round", "lower", "upper", "atlas_size")}) + "\n")
            if upper - lower <= cfg.outer_tol:
                break
            fresh = [v for val, v in maxima if val > E.max() + cfg.inner_tol][: cfg.max_new_states]
            if atlas.extend(fresh) == 0:
                break
    finally:
        if trace:
            trace.close()
    saturated = rounds >= cfg.max_exchange_rounds and upper - lower > cfg.outer_tol
    return Bracket(lower=float(lower), upper=float(upper), witness_measurement=witness,
                   witness_states=witness_states, rounds_used=rounds, saturated=saturated,
                   witness_instrument=prob.instrument(witness_X) if witness_X is not None else None,
                   history=history)


def _violates(prob: _Problem, X) -> bool:
    return kernel_violation(prob.targets, prob.measurement(X)) is not None


# ---------------------------------------------------------------------------
# public entry points


def icomp_multi(targets, cfg: SolverConfig | None = None) -> Bracket:
    """Bracket for Icomp(A_1, ..., A_n) over multi-observables on X_1 x ... x X_n."""
    cfg = cfg or SolverConfig()
    targets = list(targets)
    if len(targets) < 2:
        raise ObjectError("icomp needs at least two observables")
    return _exchange(_Problem(targets), cfg)


def icomp(a: Observable, b: Observable, cfg: SolverConfig | None = None) -> Bracket:
    """Bracket for the entropic incompatibility degree Icomp(A, B)."""
    if a.dim != b.dim:
        raise ObjectError("observables must act on the same space")
    return icomp_multi([a, b], cfg)


def iad(a: Observable, b: Observable, cfg: SolverConfig | None = None) -> Bracket:
    """Bracket for the error/disturbance coefficient Iad(A, B).

    The decision variable is an instrument J with outcomes in X; the
    candidate bi-observable is M(x, y) = J*_x[B(y)].
    """
    cfg = cfg or SolverConfig()
    if a.dim != b.dim:
        raise ObjectError("observables must act on the same space")
    return _exchange(_Problem([a, b], kind="choi", second=b), cfg)


def with_overrides(cfg: SolverConfig, **kw) -> SolverConfig:
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
