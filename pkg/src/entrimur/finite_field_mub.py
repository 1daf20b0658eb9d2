"""Finite fields GF(p^n), their Fourier transform and the Fourier-conjugate MUB pair.

Elements are integers 0..p^n-1 read as base-p coefficient vectors
(least significant digit = constant term).  Arithmetic goes through full
addition and multiplication tables, which is fine for the p^n <= 64 cap.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import linalg_core as la
from .minimax_solver import SolverConfig, max_over_states_multi
from .quantum_objects import BiObservable, Observable, ObjectError, as_state, noisy_version

MAX_FIELD_SIZE = 64
MAX_SANDWICH_DIM = 8


class FieldError(ValueError):
    pass


def is_prime(p: int) -> bool:
    p = int(p)
    if p < 2:
        return False
    return all(p % k for k in range(2, math.isqrt(p) + 1))


# polynomials over Z_p: coefficient lists, constant term first


def _poly_mod(a, m, p):
    a = list(a)
    dm = len(m) - 1
    while len(a) - 1 >= dm and any(a):
        if a[-1] % p == 0:
            a.pop()
            continue
        c = a[-1] * pow(m[-1], -1, p) % p
        shift = len(a) - 1 - dm
        for i, mi in enumerate(m):
            a[shift + i] = (a[shift + i] - c * mi) % p
        a.pop()
    return [x % p for x in a]


def _monic_polys(deg, p):
    # lexicographic in (c0, c1, ..., c_{deg-1}), leading coefficient 1
    for coeffs in itertools.product(range(p), repeat=deg):
        yield list(coeffs) + [1]


def is_irreducible(poly, p: int) -> bool:
    """Exhaustive check: no monic factor of degree 1..deg/2 divides ``poly``."""
    deg = len(poly) - 1
    if deg < 1:
        return False
    if deg == 1:
        return True
    for k in range(1, deg // 2 + 1):
        for f in _monic_polys(k, p):
            if not any(_poly_mod(poly, f, p)):
                return False
    return True


@dataclass(frozen=True)
class FiniteField:
    p: int
    n: int
    modulus: tuple

    @property
    def size(self) -> int:
        return self.p**self.n

    d = size

    def digits(self, x: int) -> list:
        return [(x // self.p**k) % self.p for k in range(self.n)]

    def encode(self, digits) -> int:
        return sum(int(c) % self.p * self.p**k for k, c in enumerate(digits))

    @cached_property
    def add_table(self) -> np.ndarray:
        q = self.size
        t = np.empty((q, q), dtype=np.int64)
        for x in range(q):
            dx = self.digits(x)
            for y in range(q):
                t[x, y] = self.encode([a + b for a, b in zip(dx, self.digits(y))])
        return t

    @cached_property
    def mul_table(self) -> np.ndarray:
        q = self.size
        t = np.empty((q, q), dtype=np.int64)
        for x in range(q):
            dx = self.digits(x)
            for y in range(q):
                dy = self.digits(y)
                prod = [0] * (2 * self.n - 1)
                for i, a in enumerate(dx):
                    for j, b in enumerate(dy):
                        prod[i + j] += a * b
                r = _poly_mod(prod, list(self.modulus), self.p)
                t[x, y] = self.encode(r + [0] * (self.n - len(r)))
        return t

    @cached_property
    def neg_table(self) -> np.ndarray:
        return np.array([self.encode([-c for c in self.digits(x)]) for x in range(self.size)])

    @cached_property
    def inv_table(self) -> np.ndarray:
        inv = np.zeros(self.size, dtype=np.int64)
        for x in range(1, self.size):
            inv[x] = int(np.nonzero(self.mul_table[x] == 1)[0][0])
        return inv

    def check(self, x: int) -> int:
        if not 0 <= int(x) < self.size:
            raise FieldError(f"{x} is not an element of GF({self.p}^{self.n})")
        return int(x)

    def add(self, x, y):
        return int(self.add_table[self.check(x), self.check(y)])

    def sub(self, x, y):
        return self.add(x, self.neg(y))

    def neg(self, x):
        return int(self.neg_table[self.check(x)])

    def mul(self, x, y):
        return int(self.mul_table[self.check(x), self.check(y)])

    def inv(self, x):
        if self.check(x) == 0:
            raise FieldError("zero has no inverse")
        return int(self.inv_table[x])

    def pow(self, x, k: int):
        r = 1
        for _ in range(k):
            r = self.mul(r, x)
        return r

    @cached_property
    def trace_table(self) -> np.ndarray:
        out = np.empty(self.size, dtype=np.int64)
        for x in range(self.size):
            t, y = 0, x
            for _ in range(self.n):
                t = self.add(t, y)
                y = self.pow(y, self.p)
            if t >= self.p:
                raise FieldError("trace left the prime subfield; modulus is not irreducible")
            out[x] = t
        return out

    @cached_property
    def character(self) -> np.ndarray:
        """chi[z, t] = exp(2 pi i tr(z t)/p)."""
        tr = self.trace_table[self.mul_table]
        return np.exp(2j * np.pi * tr / self.p)


def field_construct(p: int, n: int = 1) -> FiniteField:
    if not is_prime(p):
        raise FieldError(f"{p} is not prime")
    if n < 1:
        raise FieldError("degree must be at least 1")
    if p**n > MAX_FIELD_SIZE:
        raise FieldError(f"field size {p}^{n} exceeds the cap {MAX_FIELD_SIZE}")
    for poly in _monic_polys(n, p):
        if is_irreducible(poly, p):
            return FiniteField(p, n, tuple(poly))
    raise FieldError("no irreducible polynomial found")  # unreachable for valid input


def field_trace(f: FiniteField, x: int) -> int:
    return int(f.trace_table[f.check(x)])


def fourier(f: FiniteField) -> np.ndarray:
    """F[z, t] = exp(-2 pi i tr(z t)/p)/sqrt(d)."""
    return f.character.conj() / math.sqrt(f.size)


@dataclass(frozen=True)
class PhasePoint:
    u1: int
    u2: int


def weyl(f: FiniteField, u) -> np.ndarray:
    """W(u) phi(z) = exp(2 pi i tr(u2 (z - u1))/p) phi(z - u1)."""
    u1, u2 = (u.u1, u.u2) if isinstance(u, PhasePoint) else u
    u1, u2 = f.check(u1), f.check(u2)
    d = f.size
    W = np.zeros((d, d), dtype=complex)
    for z in range(d):
        w = f.sub(z, u1)
        W[z, w] = f.character[u2, w]
    return W


def squeeze(f: FiniteField, a: int) -> np.ndarray:
    """D(a) phi(z) = phi(a^{-1} z)."""
    if f.check(a) == 0:
        raise FieldError("squeeze needs a nonzero element")
    ainv = f.inv(a)
    D = np.zeros((f.size, f.size), dtype=complex)
    for z in range(f.size):
        D[z, f.mul(ainv, z)] = 1.0
    return D


def mub_pair(f: FiniteField):
    """Q from the standard basis, P(y) = F* Q(y) F."""
    d = f.size
    F = fourier(f)
    Q = np.array([np.diag(np.eye(d)[x]).astype(complex) for x in range(d)])
    P = la.dagger(F)[None] @ Q @ F[None]
    outs = tuple(range(d))
    return Observable(outs, Q), Observable(outs, P)


def covariant_phase_space_obs(f: FiniteField, tau) -> BiObservable:
    """M_tau(x, y) = W(x, y) tau W(x, y)* / d."""
    tau = as_state(tau)
    d = f.size
    if tau.dim != d:
        raise ObjectError("generator dimension does not match the field size")
    eff = np.empty((d, d, d, d), dtype=complex)
    for x in range(d):
        for y in range(d):
            W = weyl(f, (x, y))
            eff[x, y] = W @ tau.matrix @ la.dagger(W) / d
    outs = tuple(range(d))
    return BiObservable(outs, outs, eff)


def convolution_marginal(f: FiniteField, tau) -> np.ndarray:
    """x -> sum_z Q^tau(z - x) Q(z), the first marginal predicted for M_tau."""
    qt = np.diag(as_state(tau).matrix).real
    d = f.size
    out = np.zeros((d, d, d), dtype=complex)
    for x in range(d):
        for z in range(d):
            out[x, z, z] = qt[f.sub(z, x)]
    return out


def mub_lambda(d: int) -> float:
    r = math.sqrt(d)
    return 1.0 - r / (2.0 * (r + 1.0))


def optimal_mub_measurement(f: FiniteField, check: bool = True):
    """(M0, lambda0) with M0(x, y) = |psi_xy><psi_xy| / (2(d + sqrt d))."""
    d = f.size
    F = fourier(f)
    eye = np.eye(d)
    eff = np.empty((d, d, d, d), dtype=complex)
    for x in range(d):
        for y in range(d):
            psi = eye[x] + f.character[x, y].conj() * (F @ eye[f.neg(y)])
            eff[x, y] = np.outer(psi, psi.conj()) / (2 * (d + math.sqrt(d)))
    outs = tuple(range(d))
    m0 = BiObservable(outs, outs, eff)
    lam = mub_lambda(d)
    if check:
        q, p = mub_pair(f)
        from .quantum_objects import marginal
        for i, t in ((1, q), (2, p)):
            if not la.allclose(marginal(m0, i).effects, noisy_version(t, lam).effects, 1e-10):
                raise ObjectError(f"marginal {i} of M0 is not the expected noisy version")
    return m0, lam


def mub_bounds(d: int):
    r = math.sqrt(d)
    return math.log2(2 * r / (r + 1)), 2 * math.log2(2 * (d + 1) / (d + 3))


def mub_bound_sandwich(f: FiniteField, cfg: SolverConfig | None = None, max_dim: int = MAX_SANDWICH_DIM):
    """(lower, value, upper): the closed-form bounds around the divergence of M0."""
    cfg = cfg or SolverConfig()
    d = f.size
    if d > max_dim:
        raise FieldError(f"d = {d} exceeds the sandwich cap {max_dim}")
    m0, _ = optimal_mub_measurement(f)
    q, p = mub_pair(f)
    lower, upper = mub_bounds(d)
    seeds = list(np.eye(d, dtype=complex)) + list(fourier(f).T)
    value, _ = max_over_states_multi([q, p], m0, cfg, extra_seeds=seeds)
    slack = 10 * cfg.inner_tol
    if not (lower - slack <= value <= upper + slack):
        raise ArithmeticError(f"sandwich violated: {lower} <= {value} <= {upper}")
    return lower, value, upper
