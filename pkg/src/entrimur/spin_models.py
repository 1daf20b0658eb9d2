"""Spin-1/2 targets in the i-j plane and their covariant approximate joint measurements.

Two sharp spin components at angle ``alpha`` are placed symmetrically about
the first-quadrant bisector n.  The D2-covariant bi-observables form a
three-parameter family (gamma, c1, c2); the optimal ones sit on the line
c = (1, gamma)/sqrt(2), which turns the incompatibility degree into a
two-parameter min-max over gamma and the equatorial angle phi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from . import linalg_core as la
from .minimax_solver import SolverConfig, sphere_search
from .quantum_objects import BiObservable, MultiObservable, Observable, ObjectError

SPIN_OUTCOMES = (1, -1)
SQRT2 = math.sqrt(2.0)
PHI_GRID = 720
GAMMA_GRID = 201
ORTH_VALUE = math.log2(2.0 * (2.0 - SQRT2))
THREE_SPIN_VALUE = math.log2(3.0 - math.sqrt(3.0))


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (0.0 <= alpha <= math.pi / 2 + 1e-15):
        raise ObjectError(f"alpha must lie in [0, pi/2], got {alpha}")
    return min(alpha, math.pi / 2)


@dataclass(frozen=True)
class SpinPairConfig:
    alpha: float
    a1: float
    a2: float
    a: np.ndarray
    b: np.ndarray
    n: np.ndarray
    m: np.ndarray

    @classmethod
    def from_alpha(cls, alpha: float) -> "SpinPairConfig":
        alpha = _check_alpha(alpha)
        s, c = math.sin(alpha), math.cos(alpha)
        a1 = math.sqrt((1 + s) / 2)
        a2 = c / math.sqrt(2 * (1 + s))
        return cls(alpha, a1, a2,
                   np.array([a1, a2, 0.0]), np.array([a2, a1, 0.0]),
                   np.array([1.0, 1.0, 0.0]) / SQRT2, np.array([-1.0, 1.0, 0.0]) / SQRT2)


@dataclass(frozen=True)
class CovariantParams:
    gamma: float
    c1: float
    c2: float

    def __post_init__(self):
        lo = SQRT2 * abs(self.c1 + self.c2) - 1
        hi = 1 - SQRT2 * abs(self.c1 - self.c2)
        if not (lo - 1e-12 <= self.gamma <= hi + 1e-12):
            raise ObjectError(f"gamma={self.gamma} violates {lo:.6g} <= gamma <= {hi:.6g}")

    @classmethod
    def optimal(cls, gamma: float) -> "CovariantParams":
        return cls(gamma, 1 / SQRT2, gamma / SQRT2)


def spin_observable(vec) -> Observable:
    """x -> (I + x v.sigma)/2; |v| < 1 gives a noisy component."""
    v = np.asarray(vec, dtype=float)
    s = sum(vi * p for vi, p in zip(v, la.PAULI))
    return Observable(SPIN_OUTCOMES, [(la.I2 + x * s) / 2 for x in SPIN_OUTCOMES])


def target_pair(alpha: float):
    cfg = SpinPairConfig.from_alpha(alpha)
    return spin_observable(cfg.a), spin_observable(cfg.b)


def covariant_biobservable(p: CovariantParams) -> BiObservable:
    g, c1, c2 = p.gamma, p.c1, p.c2
    eff = np.array([[((1 + g * x * y) * la.I2 + (c1 * x + c2 * y) * la.SIGMA1
                      + (c2 * x + c1 * y) * la.SIGMA2) / 4
                     for y in SPIN_OUTCOMES] for x in SPIN_OUTCOMES])
    return BiObservable(SPIN_OUTCOMES, SPIN_OUTCOMES, eff)


def m_gamma(gamma: float) -> BiObservable:
    if not -1.0 <= gamma <= 1.0:
        raise ObjectError("gamma must lie in [-1, 1]")
    return covariant_biobservable(CovariantParams.optimal(gamma))


def m_plus_minus():
    """The sharp joint measurements along n and along m whose mixtures give M_gamma."""
    n = np.array([1.0, 1.0, 0.0]) / SQRT2
    m = np.array([-1.0, 1.0, 0.0]) / SQRT2
    An, Am = spin_observable(n), spin_observable(-m)
    Bn, Bm = spin_observable(n), spin_observable(m)
    plus = np.array([[An.effects[i] @ Bn.effects[j] for j in range(2)] for i in range(2)])
    minus = np.array([[Am.effects[i] @ Bm.effects[j] for j in range(2)] for i in range(2)])
    return (BiObservable(SPIN_OUTCOMES, SPIN_OUTCOMES, plus),
            BiObservable(SPIN_OUTCOMES, SPIN_OUTCOMES, minus))


# ---------------------------------------------------------------------------
# closed-form error function on the equator


def _rel2(p, q):
    """Binary relative entropy in bits, vectorised, with the +inf convention."""
    p = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
    q = np.clip(np.asarray(q, dtype=float), 0.0, 1.0)
    out = np.zeros(np.broadcast(p, q).shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        for pp, qq in ((p, q), (1 - p, 1 - q)):
            pp, qq = np.broadcast_arrays(pp, qq)
            term = np.where(pp > 1e-15, pp * np.log2(np.where(pp > 0, pp, 1.0) / qq), 0.0)
            term = np.where((pp > 1e-15) & (qq <= 0), np.inf, term)
            out = out + term
    return out


def error_on_equator(alpha: float, gamma: float, phi):
    """Error function of M_gamma at rho(phi) for the pair at angle alpha."""
    cfg = SpinPairConfig.from_alpha(alpha)
    a1, a2 = cfg.a1, cfg.a2
    phi = np.asarray(phi, dtype=float)
    c, s = np.cos(phi), np.sin(phi)
    pa = (1 + a1 * c + a2 * s) / 2
    pb = (1 + a2 * c + a1 * s) / 2
    qa = (1 + (c + gamma * s) / SQRT2) / 2
    qb = (1 + (gamma * c + s) / SQRT2) / 2
    return _rel2(pa, qa) + _rel2(pb, qb)


def canonical_phi(phi: float) -> float:
    """Representative in [-pi/4, pi/4] of the orbit {phi, pi/2-phi, phi+pi, 3pi/2-phi}."""
    p = (phi + math.pi / 4) % math.pi - math.pi / 4
    if p > math.pi / 4:
        p = math.pi / 2 - p
    return p


def _max_phi(alpha: float, gamma: float, xatol: float = 1e-10):
    grid = np.linspace(0.0, 2 * math.pi, PHI_GRID, endpoint=False)
    v = error_on_equator(alpha, gamma, grid)
    if np.isinf(v).any():
        i = int(np.argmax(v))
        return math.inf, float(grid[i])
    h = grid[1] - grid[0]
    peaks = [i for i in range(PHI_GRID) if v[i] >= v[i - 1] and v[i] >= v[(i + 1) % PHI_GRID]]
    peaks = sorted(peaks, key=lambda i: -v[i])[:6]
    best, arg = -math.inf, 0.0
    for i in peaks:
        r = minimize_scalar(lambda t: -float(error_on_equator(alpha, gamma, t)),
                            bounds=(grid[i] - h, grid[i] + h), method="bounded",
                            options={"xatol": xatol})
        val = -float(r.fun)
        cand, at = (val, float(r.x)) if val >= v[i] else (float(v[i]), float(grid[i]))
        if cand > best:
            best, arg = cand, at
    return best, arg % (2 * math.pi)


def equator_max(alpha: float, gamma: float):
    """(max over phi, canonical maximiser) for M_gamma."""
    val, phi = _max_phi(alpha, gamma)
    return val, canonical_phi(phi)


def qubit_minimax(alpha: float, cfg: SolverConfig | None = None):
    """min over gamma of max over phi; returns (value, gamma*, phi*)."""
    alpha = _check_alpha(alpha)
    tol = (cfg or SolverConfig()).inner_tol
    gammas = np.linspace(-1.0, 1.0, GAMMA_GRID)
    vals = np.array([_max_phi(alpha, g)[0] for g in gammas])
    i = int(np.argmin(vals))
    lo, hi = gammas[max(i - 1, 0)], gammas[min(i + 1, GAMMA_GRID - 1)]
    r = minimize_scalar(lambda g: _max_phi(alpha, g)[0], bounds=(lo, hi), method="bounded",
                        options={"xatol": min(tol, 1e-9)})
    g_star, v_star = (float(r.x), float(r.fun)) if r.fun <= vals[i] else (float(gammas[i]), float(vals[i]))
    _, phi = _max_phi(alpha, g_star)
    return v_star, g_star, canonical_phi(phi)


def analytic_lower_bound(alpha: float):
    """Closed-form lower bound (LB, gamma, ell) on Icomp for the pair at angle alpha."""
    alpha = _check_alpha(alpha)
    if alpha == 0.0:
        return 0.0, 1.0, 1.0
    cfg = SpinPairConfig.from_alpha(alpha)
    a1, a2 = cfg.a1, cfg.a2
    s, c = math.sin(alpha), math.cos(alpha)
    u = (1 + math.sqrt(1 + s)) * s / 2
    r = math.sqrt(u * u + 8 * (1 + u) * a2 * a2)
    if a2 < 1e-15:
        ell = 0.0  # orthogonal case: the minimum sits at ell = 0
    else:
        ell = (r - u) / (2 * SQRT2 * a2)
    gamma = (SQRT2 * ell - a2) / a1
    w = 0.5 + r / (4 * SQRT2 * a1) + (s / 8) * (3 / (SQRT2 * a1) - 1)
    val = -math.log2(w)
    for sign in (1, -1):
        p = 0.5 * (1 + sign * c)
        if p > 0:
            val += p * math.log2((1 + sign * c) / (1 + sign * ell))
    return val, gamma, ell


def comparison_points(alpha: float, cfg: SolverConfig | None = None) -> dict:
    """BLW, NV, LB and minimax points for the pair at angle alpha."""
    sp = SpinPairConfig.from_alpha(alpha)
    out = {}
    for name, g in (("blw", SQRT2 * sp.a2), ("nv", sp.a2 / sp.a1)):
        v, phi = equator_max(sp.alpha, g)
        out[name] = (g, v, phi)
    lb, g_lb, _ = analytic_lower_bound(sp.alpha)
    out["lb"] = (g_lb, lb)
    v, g, phi = qubit_minimax(sp.alpha, cfg)
    out["icomp"] = (g, v, phi)
    return out


def spin_scan(alphas, cfg: SolverConfig | None = None) -> list:
    """Rows (alpha, lb, icomp_value, gamma_star, phi_star)."""
    rows = []
    for a in alphas:
        lb = analytic_lower_bound(a)[0]
        v, g, phi = qubit_minimax(a, cfg)
        rows.append((float(a), lb, v, g, phi))
    return rows


# ---------------------------------------------------------------------------
# three orthogonal spins


def three_spin_family(c: float) -> MultiObservable:
    """(1/8)[I + c(x s1 + y s2 + z s3)]; a POVM for |c| <= 1/sqrt(3)."""
    if abs(c) > 1 / math.sqrt(3) + 1e-12:
        raise ObjectError("|c| must not exceed 1/sqrt(3)")
    eff = np.array([[[(la.I2 + c * (x * la.SIGMA1 + y * la.SIGMA2 + z * la.SIGMA3)) / 8
                      for z in SPIN_OUTCOMES] for y in SPIN_OUTCOMES] for x in SPIN_OUTCOMES])
    return MultiObservable([SPIN_OUTCOMES] * 3, eff)


def three_spin_m1() -> MultiObservable:
    m0 = three_spin_family(1 / math.sqrt(3))
    eff = np.zeros_like(m0.effects)
    for x, y, z in ((1, 1, -1), (1, -1, 1), (-1, 1, 1), (-1, -1, -1)):
        i, j, k = (SPIN_OUTCOMES.index(t) for t in (x, y, z))
        eff[i, j, k] = 2 * m0.effects[i, j, k]
    return MultiObservable([SPIN_OUTCOMES] * 3, eff)


def _three_spin_error(c: float, r):
    """Error function of the O-covariant family at Bloch vectors r (..., 3)."""
    r = np.asarray(r, dtype=float)
    return sum(_rel2((1 + r[..., i]) / 2, (1 + c * r[..., i]) / 2) for i in range(3))


def _rel2_grad(p, q):
    """Partial derivatives of the binary relative entropy in (p, q), in bits."""
    with np.errstate(divide="ignore", invalid="ignore"):
        dp = np.where(p > 1e-15, np.log2(np.where(p > 0, p, 1.0) / q), 0.0) \
            - np.where(1 - p > 1e-15, np.log2(np.where(1 - p > 0, 1 - p, 1.0) / (1 - q)), 0.0)
        dq = -(p / q - (1 - p) / (1 - q)) / math.log(2.0)
    return dp, dq


def _three_spin_divergence(c: float, cfg: SolverConfig):
    """Max over pure states: a Fibonacci-sphere scan polished on the sphere."""
    n = 4000
    k = np.arange(n) + 0.5
    z = 1 - 2 * k / n
    t = math.pi * (1 + 5**0.5) * k
    pts = np.stack([np.sqrt(1 - z * z) * np.cos(t), np.sqrt(1 - z * z) * np.sin(t), z], -1)
    v = _three_spin_error(c, pts)
    seeds = [_bloch_to_vec(pts[i]) for i in np.argsort(-v)[:16]]

    def fgrad(r):
        p, q = (1 + r) / 2, (1 + c * r) / 2
        dp, dq = _rel2_grad(p, q)
        return float(_rel2(p, q).sum()), 0.5 * dp + 0.5 * c * dq

    val, vec = sphere_search(np.array(la.PAULI), fgrad, seeds, maximize=True,
                             ftol=cfg.inner_tol * 1e-3)[0]
    return float(max(val, v.max())), vec


def _bloch_to_vec(r):
    th = math.acos(max(-1.0, min(1.0, r[2])))
    ph = math.atan2(r[1], r[0])
    return np.array([math.cos(th / 2), np.exp(1j * ph) * math.sin(th / 2)])


def three_spin_suite(cfg: SolverConfig | None = None) -> dict:
    cfg = cfg or SolverConfig()
    targets = tuple(spin_observable(e) for e in np.eye(3))
    cmax = 1 / math.sqrt(3)
    cs = np.linspace(-cmax, cmax, 21)
    # Pauli eigenstates give log 2/(1+c); the scan below checks they are global maxima
    pauli = np.array([math.log2(2 / (1 + c)) if c > -1 else math.inf for c in cs])
    i = int(np.argmin(pauli))
    r = minimize_scalar(lambda c: math.log2(2 / (1 + c)), bounds=(cs[max(i - 1, 0)], cmax),
                        method="bounded", options={"xatol": 1e-12})
    c_star = cmax if r.fun >= pauli[i] - 1e-15 else float(r.x)
    scan_val, scan_vec = _three_spin_divergence(c_star, cfg)
    pauli_val = math.log2(2 / (1 + c_star))
    return {
        "targets": targets,
        "m0": three_spin_family(cmax),
        "m1": three_spin_m1(),
        "family": three_spin_family,
        "c_star": c_star,
        "icomp": max(pauli_val, scan_val),
        "pauli_value": pauli_val,
        "scan_value": scan_val,
        "scan_state": scan_vec,
    }
