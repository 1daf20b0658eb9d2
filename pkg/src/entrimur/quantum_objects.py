"""Observables (POVMs), states, joint observables and instruments.

All objects are immutable value types wrapping read-only numpy arrays.

Conventions
-----------
* Outcome sets are ordered tuples of labels (ints or strings).
* A multi-observable on X1 x ... x Xn stores its effects in an array of
  shape ``(|X1|, ..., |Xn|, d, d)``; flattening is row-major.
* Factor indices for marginals are 1-based, as in ``M_[1]``, ``M_[2]``.
* Instruments are stored through Choi blocks on C^d_in (x) C^d_out,
  ``C_x = sum_ij |i><j| (x) J_x(|i><j|)``.  With this choice
  ``J_x(rho) = Tr_1[(rho^T (x) 1) C_x]`` and
  ``J*_x(F) = Tr_2[(1 (x) F) C_x]^T``, so that
  ``Tr{J_x(rho) F} = Tr{rho J*_x(F)}``.
"""

from __future__ import annotations

import itertools
import json
from math import prod

import numpy as np

from . import linalg_core as la

SUM_TOL = 1e-9
TRACE_TOL = 1e-10


class ObjectError(ValueError):
    """Invalid quantum object or mismatched shapes."""


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.flags.writeable = False
    return a


def _check_outcomes(outcomes) -> tuple:
    out = tuple(outcomes)
    if len(set(out)) != len(out):
        raise ObjectError("outcome labels must be distinct")
    return out


# ---------------------------------------------------------------------------
# distributions and states


class ProbabilityDistribution:
    """Probability vector on an ordered outcome set."""

    def __init__(self, outcomes, weights, tol: float = TRACE_TOL):
        self.outcomes = _check_outcomes(outcomes)
        w = np.array(weights, dtype=float).ravel()
        if len(w) != len(self.outcomes):
            raise ObjectError("one weight per outcome required")
        if np.any(~np.isfinite(w)) or np.any(w < -tol):
            raise ObjectError("weights must be finite and nonnegative")
        if abs(w.sum() - 1.0) > tol:
            raise ObjectError(f"weights sum to {w.sum()!r}, not 1")
        w = np.clip(w, 0.0, None)
        w.flags.writeable = False
        self.weights = w

    def __len__(self):
        return len(self.outcomes)

    def __getitem__(self, x):
        return float(self.weights[self.outcomes.index(x)])

    def __repr__(self):
        return f"ProbabilityDistribution({dict(zip(self.outcomes, self.weights.tolist()))})"

    @classmethod
    def uniform(cls, outcomes):
        outcomes = tuple(outcomes)
        return cls(outcomes, np.full(len(outcomes), 1.0 / len(outcomes)))

    @classmethod
    def delta(cls, outcomes, x):
        outcomes = tuple(outcomes)
        w = np.zeros(len(outcomes))
        w[outcomes.index(x)] = 1.0
        return cls(outcomes, w)

    def product(self, other: "ProbabilityDistribution") -> "ProbabilityDistribution":
        outs = [(x, y) for x in self.outcomes for y in other.outcomes]
        return ProbabilityDistribution(outs, np.outer(self.weights, other.weights).ravel())


class State:
    """Density operator: PSD with unit trace."""

    def __init__(self, matrix, psd_tol: float = la.PSD_TOL, validate: bool = True):
        m = la.as_hermitian(matrix)
        if validate:
            if abs(np.trace(m).real - 1.0) > TRACE_TOL:
                raise ObjectError("state must have unit trace")
            if la.min_eigenvalue(m) < -psd_tol:
                raise ObjectError("state must be positive semidefinite")
        self.matrix = _freeze(m)
        self.dim = m.shape[0]

    @classmethod
    def pure(cls, vec) -> "State":
        return cls(la.projector(vec))

    @classmethod
    def maximally_mixed(cls, d: int) -> "State":
        return cls(np.eye(d) / d)

    @classmethod
    def bloch(cls, r) -> "State":
        r = np.asarray(r, dtype=float)
        return cls(0.5 * (la.I2 + sum(ri * s for ri, s in zip(r, la.PAULI))))

    def is_pure(self, tol: float = 1e-9) -> bool:
        return abs(np.trace(self.matrix @ self.matrix).real - 1.0) <= tol

    def vector(self) -> np.ndarray:
        """Dominant eigenvector (the state vector when pure)."""
        w, v = la.eigh(self.matrix)
        return v[:, -1]

    def conjugate(self, u) -> "State":
        """U* rho U, the action dual to ``Observable.conjugate``."""
        u = np.asarray(u, dtype=complex)
        return State(u.conj().T @ self.matrix @ u)

    def __repr__(self):
        return f"State(dim={self.dim})"


def as_state(rho) -> State:
    return rho if isinstance(rho, State) else State(rho)


# ---------------------------------------------------------------------------
# observables


def _validate_effects(effects: np.ndarray, psd_tol: float, sum_tol: float) -> None:
    d = effects.shape[-1]
    flat = effects.reshape(-1, d, d)
    if not np.all(np.isfinite(flat)):
        raise ObjectError("effects must be finite")
    if np.max(np.abs(flat - la.dagger(flat)), initial=0.0) > la.HERM_TOL:
        raise ObjectError("effects must be Hermitian")
    if np.linalg.eigvalsh(la.herm_part(flat)).min() < -psd_tol:
        raise ObjectError("effects must be positive semidefinite")
    if np.max(np.abs(flat.sum(axis=0) - np.eye(d))) > sum_tol:
        raise ObjectError("effects must sum to the identity")


class MultiObservable:
    """POVM on a product outcome set X1 x ... x Xn."""

    def __init__(self, outcome_sets, effects, psd_tol: float = la.PSD_TOL,
                 sum_tol: float = SUM_TOL, validate: bool = True):
        sets = tuple(_check_outcomes(s) for s in outcome_sets)
        e = np.asarray(effects, dtype=complex)
        shape = tuple(len(s) for s in sets)
        if e.ndim == 3 and len(sets) > 1 and e.shape[0] == prod(shape):
            e = e.reshape(shape + e.shape[-2:])
        if e.shape[:-2] != shape or e.shape[-1] != e.shape[-2]:
            raise ObjectError(f"effects shape {e.shape} does not match outcomes {shape}")
        e = la.herm_part(e) if validate else e
        if validate:
            _validate_effects(e, psd_tol, sum_tol)
        self.outcome_sets = sets
        self.effects = _freeze(e)
        self.dim = e.shape[-1]

    @property
    def n_factors(self) -> int:
        return len(self.outcome_sets)

    @property
    def shape(self) -> tuple:
        return tuple(len(s) for s in self.outcome_sets)

    def flat_effects(self) -> np.ndarray:
        return self.effects.reshape(-1, self.dim, self.dim)

    def outcomes(self) -> list:
        """Product outcomes in row-major order."""
        return list(itertools.product(*self.outcome_sets))

    def effect(self, *labels) -> np.ndarray:
        idx = tuple(s.index(x) for s, x in zip(self.outcome_sets, labels))
        return self.effects[idx]

    def marginal(self, i: int) -> "Observable":
        return marginal(self, i)

    def conjugate(self, u) -> "MultiObservable":
        u = np.asarray(u, dtype=complex)
        return type(self)._rebuild(self, la.dagger(u) @ self.effects @ u)

    @classmethod
    def _rebuild(cls, like, effects):
        return MultiObservable(like.outcome_sets, effects)

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim}, shape={self.shape})"


class BiObservable(MultiObservable):
    """POVM on X x Y."""

    def __init__(self, outcomes1, outcomes2, effects, **kw):
        super().__init__((outcomes1, outcomes2), effects, **kw)

    @property
    def outcomes1(self):
        return self.outcome_sets[0]

    @property
    def outcomes2(self):
        return self.outcome_sets[1]

    @classmethod
    def _rebuild(cls, like, effects):
        return BiObservable(like.outcomes1, like.outcomes2, effects)

    @classmethod
    def from_multi(cls, m: MultiObservable) -> "BiObservable":
        if m.n_factors != 2:
            raise ObjectError("need exactly two factors")
        return cls(m.outcome_sets[0], m.outcome_sets[1], m.effects)


class Observable:
    """POVM on a single finite outcome set."""

    def __init__(self, outcomes, effects, psd_tol: float = la.PSD_TOL,
                 sum_tol: float = SUM_TOL, validate: bool = True):
        outs = _check_outcomes(outcomes)
        e = np.asarray(effects, dtype=complex)
        if e.ndim != 3 or e.shape[0] != len(outs) or e.shape[1] != e.shape[2]:
            raise ObjectError(f"effects shape {e.shape} does not match {len(outs)} outcomes")
        if validate:
            e = la.herm_part(e)
            _validate_effects(e, psd_tol, sum_tol)
        self.outcomes = outs
        self.effects = _freeze(e)
        self.dim = e.shape[-1]

    def __len__(self):
        return len(self.outcomes)

    def __getitem__(self, x) -> np.ndarray:
        return self.effects[self.outcomes.index(x)]

    def __repr__(self):
        return f"Observable(dim={self.dim}, outcomes={self.outcomes})"

    def conjugate(self, u) -> "Observable":
        """Observable with effects U* A(x) U."""
        u = np.asarray(u, dtype=complex)
        return Observable(self.outcomes, la.dagger(u) @ self.effects @ u)

    def relabel(self, mapping) -> "Observable":
        """Rename outcomes; ``mapping`` is a dict or a callable."""
        f = mapping if callable(mapping) else mapping.__getitem__
        return Observable([f(x) for x in self.outcomes], self.effects)

    def permuted(self, order) -> "Observable":
        """Reorder the outcome list by index permutation ``order``."""
        order = list(order)
        return Observable([self.outcomes[i] for i in order], self.effects[order])

    def is_sharp(self, tol: float = 1e-9) -> bool:
        e = self.effects
        return bool(np.max(np.abs(e @ e - e)) <= tol)


def outcome_distribution(o, rho) -> ProbabilityDistribution:
    """A^rho(x) = Tr{rho A(x)}; works for Observable and multi-observables."""
    rho = as_state(rho)
    if rho.dim != o.dim:
        raise ObjectError("dimension mismatch between observable and state")
    if isinstance(o, MultiObservable):
        effects, outcomes = o.flat_effects(), o.outcomes()
    else:
        effects, outcomes = o.effects, o.outcomes
    w = np.einsum("ab,xba->x", rho.matrix, effects).real
    w = np.clip(w, 0.0, 1.0)
    drift = abs(w.sum() - 1.0)
    if 0 < drift < 1e-9:
        w = w / w.sum()
    return ProbabilityDistribution(outcomes, w, tol=max(TRACE_TOL, drift * 1.01))


def marginal(m: MultiObservable, i: int) -> Observable:
    """The i-th marginal (1-based) obtained by summing the other factors."""
    if not 1 <= i <= m.n_factors:
        raise ObjectError(f"factor index {i} out of range 1..{m.n_factors}")
    axes = tuple(k for k in range(m.n_factors) if k != i - 1)
    return Observable(m.outcome_sets[i - 1], m.effects.sum(axis=axes))


def trivial_observable(p: ProbabilityDistribution, d: int) -> Observable:
    """T(x) = p(x) 1."""
    return Observable(p.outcomes, p.weights[:, None, None] * np.eye(d)[None])


def uniform_observable(outcomes, d: int) -> Observable:
    return trivial_observable(ProbabilityDistribution.uniform(outcomes), d)


def uniform_multiobservable(outcome_sets, d: int) -> MultiObservable:
    shape = tuple(len(s) for s in outcome_sets)
    e = np.broadcast_to(np.eye(d) / prod(shape), shape + (d, d))
    if len(shape) == 2:
        return BiObservable(outcome_sets[0], outcome_sets[1], e)
    return MultiObservable(outcome_sets, e)


def product_biobservable(a: Observable, p: ProbabilityDistribution) -> BiObservable:
    """M(x, y) = A(x) p(y)."""
    e = a.effects[:, None] * p.weights[None, :, None, None]
    return BiObservable(a.outcomes, p.outcomes, e)


def noisy_version(o: Observable, lam: float, rho0=None) -> Observable:
    """lam*A(x) + (1-lam)*A^{rho0}(x)*1, with rho0 = 1/d by default."""
    rho0 = State.maximally_mixed(o.dim) if rho0 is None else as_state(rho0)
    p0 = outcome_distribution(o, rho0).weights
    e = lam * o.effects + (1.0 - lam) * p0[:, None, None] * np.eye(o.dim)[None]
    try:
        return Observable(o.outcomes, e)
    except ObjectError as exc:
        raise ObjectError(f"noisy version with lambda={lam} is not positive") from exc


# ---------------------------------------------------------------------------
# instruments


class Instrument:
    """Outcome-indexed CP maps, trace preserving in total, in Choi form."""

    def __init__(self, outcomes, choi_blocks, dim_in: int, dim_out: int | None = None,
                 psd_tol: float = la.PSD_TOL, sum_tol: float = SUM_TOL, validate: bool = True):
        outs = _check_outcomes(outcomes)
        dim_out = dim_in if dim_out is None else dim_out
        c = np.asarray(choi_blocks, dtype=complex)
        D = dim_in * dim_out
        if c.shape != (len(outs), D, D):
            raise ObjectError(f"choi blocks shape {c.shape} != {(len(outs), D, D)}")
        if validate:
            c = la.herm_part(c)
            if np.linalg.eigvalsh(c).min() < -psd_tol:
                raise ObjectError("choi blocks must be positive semidefinite")
            red = la.partial_trace(c.sum(axis=0), (dim_in, dim_out), 2)
            if np.max(np.abs(red - np.eye(dim_in))) > sum_tol:
                raise ObjectError("instrument is not trace preserving")
        self.outcomes = outs
        self.choi = _freeze(c)
        self.dim_in = dim_in
        self.dim_out = dim_out

    def __repr__(self):
        return f"Instrument(dim_in={self.dim_in}, dim_out={self.dim_out}, outcomes={self.outcomes})"

    def _block(self, x) -> np.ndarray:
        return self.choi[self.outcomes.index(x)]

    def apply(self, x, rho) -> np.ndarray:
        """J_x[rho] (unnormalised post-measurement operator)."""
        r = np.asarray(rho.matrix if isinstance(rho, State) else rho, dtype=complex)
        if r.shape != (self.dim_in, self.dim_in):
            raise ObjectError("input dimension mismatch")
        big = np.kron(r.T, np.eye(self.dim_out)) @ self._block(x)
        return la.partial_trace(big, (self.dim_in, self.dim_out), 1)

    def adjoint_apply(self, x, f) -> np.ndarray:
        return adjoint_apply(self, x, f)

    def channel(self, rho) -> np.ndarray:
        return sum(self.apply(x, rho) for x in self.outcomes)

    def observable(self) -> Observable:
        """The observable implemented by the instrument, x -> J*_x[1]."""
        eye = np.eye(self.dim_out)
        return Observable(self.outcomes, [adjoint_apply(self, x, eye) for x in self.outcomes])

    @classmethod
    def from_kraus(cls, outcomes, kraus) -> "Instrument":
        """``kraus[k]`` is a list of Kraus operators for outcome k."""
        outcomes = tuple(outcomes)
        blocks = []
        for ks in kraus:
            ks = [np.asarray(k, dtype=complex) for k in ks]
            dout, din = ks[0].shape
            blk = np.zeros((din * dout, din * dout), dtype=complex)
            for k in ks:
                vec = sum(np.kron(np.eye(din)[i], k[:, i]) for i in range(din))
                blk += np.outer(vec, vec.conj())
            blocks.append(blk)
        return cls(outcomes, blocks, din, dout)

    @classmethod
    def from_maps(cls, outcomes, maps, dim_in: int, dim_out: int | None = None) -> "Instrument":
        """Build Choi blocks by applying callables to the matrix units."""
        dim_out = dim_in if dim_out is None else dim_out
        blocks = []
        for f in maps:
            blk = np.zeros((dim_in * dim_out, dim_in * dim_out), dtype=complex)
            for i in range(dim_in):
                for j in range(dim_in):
                    e = np.zeros((dim_in, dim_in), dtype=complex)
                    e[i, j] = 1.0
                    blk += np.kron(e, np.asarray(f(e), dtype=complex))
            blocks.append(blk)
        return cls(outcomes, blocks, dim_in, dim_out)


def adjoint_apply(j: Instrument, x, f) -> np.ndarray:
    """J*_x[F], the Heisenberg-picture action of outcome x."""
    f = np.asarray(f, dtype=complex)
    if f.shape != (j.dim_out, j.dim_out):
        raise ObjectError("output dimension mismatch")
    big = np.kron(np.eye(j.dim_in), f) @ j._block(x)
    return la.partial_trace(big, (j.dim_in, j.dim_out), 2).T


def identity_instrument(d: int, outcome=0) -> Instrument:
    return Instrument.from_kraus([outcome], [[np.eye(d)]])


def uniform_instrument(outcomes, d: int) -> Instrument:
    """U_x[rho] = u(x) rho."""
    outcomes = tuple(outcomes)
    s = np.sqrt(1.0 / len(outcomes))
    return Instrument.from_kraus(outcomes, [[s * np.eye(d)] for _ in outcomes])


def luders_instrument(a: Observable) -> Instrument:
    """J_x[rho] = A(x)^{1/2} rho A(x)^{1/2}."""
    return Instrument.from_kraus(a.outcomes, [[la.psd_sqrt(e)] for e in a.effects])


def sequential_measurement(j: Instrument, b: Observable) -> BiObservable:
    """M(x, y) = J*_x[B(y)]."""
    if j.dim_out != b.dim:
        raise ObjectError("instrument output dimension must match the observable")
    e = [[adjoint_apply(j, x, b.effects[k]) for k in range(len(b))] for x in j.outcomes]
    return BiObservable(j.outcomes, b.outcomes, np.array(e))


def sharp_b_instrument(m: BiObservable, b: Observable, tol: float = 1e-9) -> Instrument:
    """Instrument J_x[rho] = sum_y Tr{rho M(x,y)} B(y)/Tr{B(y)} for sharp B.

    Its sequential measurement followed by B reproduces ``m``.
    """
    if not b.is_sharp(tol):
        raise ObjectError("b must be sharp")
    if m.outcomes2 != b.outcomes:
        raise ObjectError("second outcome set of m must equal the outcomes of b")
    if m.dim != b.dim:
        raise ObjectError("dimension mismatch")
    d = b.dim
    traces = np.trace(b.effects, axis1=1, axis2=2).real
    live = traces > tol
    if np.any(np.abs(m.effects[:, ~live]) > tol):
        raise ObjectError("m has weight on outcomes where b vanishes")
    blocks = np.zeros((len(m.outcomes1), d * d, d * d), dtype=complex)
    for xi in range(len(m.outcomes1)):
        for yi in np.flatnonzero(live):
            blocks[xi] += np.kron(m.effects[xi, yi].T, b.effects[yi] / traces[yi])
    return Instrument(m.outcomes1, blocks, d, d)


# ---------------------------------------------------------------------------
# JSON serialization


def _mat_to_json(m) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def _mat_from_json(rows) -> np.ndarray:
    a = np.asarray(rows, dtype=float)
    if a.ndim < 3 or a.shape[-1] != 2:
        raise ObjectError("matrix entries must be [re, im] pairs")
    return a[..., 0] + 1j * a[..., 1]


def _label(x):
    if isinstance(x, (bool, np.bool_)):
        raise ObjectError("outcome labels must be integers or strings")
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, str):
        return x
    raise ObjectError(f"outcome label {x!r} is not JSON serializable")


def to_json_obj(obj) -> dict:
    """Plain-dict form of an Observable, BiObservable, MultiObservable or State."""
    if isinstance(obj, Observable):
        return {"kind": "observable", "dim": obj.dim,
                "outcomes": [_label(x) for x in obj.outcomes],
                "effects": [_mat_to_json(e) for e in obj.effects]}
    if isinstance(obj, MultiObservable):
        kind = "biobservable" if isinstance(obj, BiObservable) else "multiobservable"
        return {"kind": kind, "dim": obj.dim,
                "outcomes": [[_label(x) for x in s] for s in obj.outcome_sets],
                "effects": [_mat_to_json(e) for e in obj.flat_effects()]}
    if isinstance(obj, State):
        return {"kind": "state", "dim": obj.dim, "matrix": _mat_to_json(obj.matrix)}
    raise ObjectError(f"cannot serialize {type(obj).__name__}")


def from_json_obj(data: dict):
    if not isinstance(data, dict) or "dim" not in data:
        raise ObjectError("expected an object with a 'dim' field")
    d = int(data["dim"])
    kind = data.get("kind")
    if kind == "state" or (kind is None and "matrix" in data):
        m = _mat_from_json([data["matrix"]])[0]
        if m.shape != (d, d):
            raise ObjectError("state matrix does not match dim")
        return State(m)
    if "outcomes" not in data or "effects" not in data:
        raise ObjectError("observable needs 'outcomes' and 'effects'")
    outs = data["outcomes"]
    eff = _mat_from_json(data["effects"])
    if eff.shape[1:] != (d, d):
        raise ObjectError("effect matrices do not match dim")
    nested = len(outs) > 0 and all(isinstance(s, list) for s in outs)
    if kind in ("biobservable", "multiobservable") or (kind is None and nested):
        if len(outs) == 2 and kind != "multiobservable":
            return BiObservable(outs[0], outs[1], eff)
        return MultiObservable(outs, eff)
    return Observable(outs, eff)


def dumps(obj, **kw) -> str:
    return json.dumps(to_json_obj(obj), **kw)


def loads(text: str):
    return from_json_obj(json.loads(text))
