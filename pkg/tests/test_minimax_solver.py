import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from entrimur import linalg_core as la
from entrimur.entropy import error_function
from entrimur.minimax_solver import (Bracket, SolverConfig, StateAtlas, _Feasible, _Problem,
                                     iad, icomp, icomp_multi, max_over_states, with_overrides)
from entrimur.quantum_objects import (BiObservable, ObjectError, Observable,
                                      ProbabilityDistribution, marginal, product_biobservable,
                                      sequential_measurement)
from entrimur.spin_models import ORTH_VALUE, target_pair

from helpers import random_observable

FAST = SolverConfig(restarts=8, step_schedule="lbfgs-fast")


def check_bracket(b: Bracket):
    assert b.lower <= b.upper + 1e-12
    lows = [h["lower"] for h in b.history]
    ups = [h["upper"] for h in b.history]
    assert all(x <= y + 1e-15 for x, y in zip(lows, lows[1:]))
    assert all(x >= y - 1e-15 for x, y in zip(ups, ups[1:]))
    assert b.lower == pytest.approx(lows[-1]) and b.upper == pytest.approx(ups[-1])
    assert b.rounds_used == len(b.history)


def _fd_check(feas, rng, n_dirs=4):
    z = feas.initial(rng)
    G = np.array([la.random_hermitian(feas.D, rng) for _ in range(feas.n)])

    def f(z):
        X, cache = feas.blocks(feas.unpack(z))
        return float(np.einsum("bij,bji->", G, X).real), cache

    val, cache = f(z)
    grad = feas.pullback(G, cache, feas.unpack(z))
    h = 1e-6
    for _ in range(n_dirs):
        u = rng.standard_normal(z.shape)
        fd = (f(z + h * u)[0] - f(z - h * u)[0]) / (2 * h)
        assert fd == pytest.approx(grad @ u, rel=1e-5, abs=1e-7)


@settings(max_examples=15)
@given(st.integers(2, 3), st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_povm_parametrisation_gradient(d, n, seed):
    _fd_check(_Feasible("povm", n, d), np.random.default_rng(seed))


@settings(max_examples=15)
@given(st.integers(2, 3), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_choi_parametrisation_gradient(d, n, seed):
    _fd_check(_Feasible("choi", n, d, d), np.random.default_rng(seed))


@settings(max_examples=20)
@given(st.integers(2, 3), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_parametrisation_is_feasible(d, n, seed):
    rng = np.random.default_rng(seed)
    for feas in (_Feasible("povm", n, d), _Feasible("choi", n, d, d)):
        X, _ = feas.blocks(feas.unpack(feas.initial(rng) * 3))
        assert np.linalg.eigvalsh(la.herm_part(X)).min() > -1e-12
        assert la.allclose(feas.reduce(X.sum(0)), np.eye(d), 1e-10)


def test_choi_joint_adjoint_is_adjoint():
    rng = np.random.default_rng(2)
    a, b = random_observable(2, 3, rng), random_observable(2, 2, rng)
    prob = _Problem([a, b], kind="choi", second=b)
    X = rng.standard_normal((3, 4, 4)) + 1j * rng.standard_normal((3, 4, 4))
    G = rng.standard_normal((6, 2, 2)) + 1j * rng.standard_normal((6, 2, 2))
    lhs = np.einsum("jab,jba->", G, prob.joint(X))
    rhs = np.einsum("bij,bji->", prob.joint_adjoint(G), X)
    assert lhs == pytest.approx(rhs, abs=1e-10)


def test_state_atlas_dedupes():
    at = StateAtlas(2)
    v = np.array([1.0, 1j]) / math.sqrt(2)
    assert at.add(v)
    assert not at.add(np.exp(0.3j) * v)
    assert len(at) == 1


def test_config_validation_and_overrides():
    with pytest.raises(ValueError):
        SolverConfig(restarts=0)
    with pytest.raises(ValueError):
        SolverConfig(step_schedule="nope")
    c = with_overrides(SolverConfig(), seed=5, restarts=None)
    assert c.seed == 5 and c.restarts == SolverConfig().restarts


def test_orthogonal_spins_bracket():
    x, y = target_pair(math.pi / 2)
    b = icomp(x, y)
    check_bracket(b)
    assert b.contains(ORTH_VALUE, 1e-9)
    assert b.gap <= SolverConfig().outer_tol
    assert not b.saturated


def test_iad_orthogonal_spins_matches_icomp():
    x, y = target_pair(math.pi / 2)
    b = iad(x, y)
    check_bracket(b)
    assert b.contains(ORTH_VALUE, 1e-9)
    J = b.witness_instrument
    assert la.allclose(sequential_measurement(J, y).effects, b.witness_measurement.effects, 1e-7)


def test_commuting_pair_is_compatible():
    z = Observable((0, 1), [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])
    b = icomp(z, z)
    check_bracket(b)
    assert b.upper <= 1e-4 and b.lower >= 0


def test_witness_divergence_equals_upper():
    rng = np.random.default_rng(11)
    a, b = random_observable(2, 3, rng), random_observable(2, 2, rng, sharp=True)
    br = icomp(a, b, FAST)
    check_bracket(br)
    val, state = max_over_states(a, b, br.witness_measurement)
    assert val == pytest.approx(br.upper, abs=1e-6)
    assert error_function(a, b, br.witness_measurement, state.matrix) == pytest.approx(val, abs=1e-9)


def test_unitary_and_relabel_invariance_of_brackets():
    rng = np.random.default_rng(12)
    a, b = random_observable(2, 2, rng), random_observable(2, 3, rng)
    U = la.random_unitary(2, rng)
    b0 = icomp(a, b, FAST)
    b1 = icomp(a.conjugate(U), b.conjugate(U), FAST)
    b2 = icomp(a.relabel({0: "p", 1: "q"}), b.permuted([1, 2, 0]), FAST)
    b3 = icomp(b, a, FAST)
    for other in (b1, b2, b3):
        check_bracket(other)
        assert b0.overlaps(other, 1e-6)


def test_determinism():
    rng = np.random.default_rng(13)
    a, b = random_observable(2, 3, rng), random_observable(2, 2, rng)
    r1, r2 = icomp(a, b, FAST), icomp(a, b, FAST)
    assert (r1.lower, r1.upper, r1.rounds_used) == (r2.lower, r2.upper, r2.rounds_used)


def test_kernel_violation_gives_infinite_divergence():
    z = Observable((0, 1), [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])
    x = Observable((0, 1), [np.full((2, 2), 0.5), np.array([[0.5, -0.5], [-0.5, 0.5]])])
    m = product_biobservable(z, ProbabilityDistribution((0, 1), [1.0, 0.0]))
    val, witness = max_over_states(z, x, m)
    assert val == math.inf
    assert error_function(z, x, m, witness.matrix) == math.inf


def test_three_observable_bracket_and_trace_log(tmp_path):
    x, y = target_pair(math.pi / 2)
    z = Observable((1, -1), [(la.I2 + s * la.SIGMA3) / 2 for s in (1, -1)])
    path = tmp_path / "trace.jsonl"
    b = icomp_multi([x, y, z], with_overrides(SolverConfig(), trace_path=str(path)))
    check_bracket(b)
    assert b.contains(math.log2(3 - math.sqrt(3)), 1e-9)
    lines = [json.loads(s) for s in path.read_text().splitlines()]
    assert len(lines) == b.rounds_used
    assert set(lines[0]) == {"round", "lower", "upper", "atlas_size"}


def test_input_validation():
    x, _ = target_pair(0.3)
    with pytest.raises(ObjectError):
        icomp_multi([x])
    with pytest.raises(ObjectError):
        icomp(x, random_observable(3, 2, np.random.default_rng(0)))


@pytest.mark.parametrize("seed", range(10))
def test_iad_equals_icomp_for_sharp_second(seed):
    rng = np.random.default_rng(1000 + seed)
    a, b = random_observable(2, 3, rng), random_observable(2, 2, rng, sharp=True)
    cfg = SolverConfig()
    bc, bi = icomp(a, b, cfg), iad(a, b, cfg)
    check_bracket(bc)
    check_bracket(bi)
    assert abs(bc.upper - bi.upper) <= 2 * cfg.outer_tol
    assert abs(bc.lower - bi.lower) <= 2 * cfg.outer_tol


@pytest.mark.parametrize("seed", range(10))
def test_icomp_monotone_under_adding_observable(seed):
    rng = np.random.default_rng(2000 + seed)
    a, b, c = (random_observable(2, 2, rng) for _ in range(3))
    cfg = SolverConfig()
    two, three = icomp(a, b, cfg), icomp_multi([a, b, c], cfg)
    check_bracket(two)
    check_bracket(three)
    assert three.upper >= two.lower - 1e-9
