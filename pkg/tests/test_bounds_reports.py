import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from entrimur import linalg_core as la
from entrimur.bounds_reports import (BoundReport, bound_report, cloning_biobservable,
                                     cloning_instrument, cloning_lambda, cloning_multiobservable,
                                     cloning_upper_bound, kp_lower_bound, prep_coefficient,
                                     shannon_cap, tradeoff_check, tradeoff_rhs)
from entrimur.minimax_solver import icomp
from entrimur.quantum_objects import (ObjectError, Observable, marginal, noisy_version,
                                      sequential_measurement, uniform_observable)
from entrimur.spin_models import ORTH_VALUE, spin_observable, target_pair

from helpers import random_observable


@settings(max_examples=20)
@given(st.integers(2, 4), st.integers(2, 3), st.integers(2, 3), st.integers(0, 2**32 - 1))
def test_cloning_marginals_are_noisy_versions(d, k1, k2, seed):
    rng = np.random.default_rng(seed)
    a, b = random_observable(d, k1, rng), random_observable(d, k2, rng)
    m = cloning_biobservable(a, b)
    lam = cloning_lambda(d)
    assert lam == pytest.approx((d + 2) / (2 * (d + 1)))
    assert la.allclose(marginal(m, 1).effects, noisy_version(a, lam).effects, 1e-10)
    assert la.allclose(marginal(m, 2).effects, noisy_version(b, lam).effects, 1e-10)


def test_cloning_of_identical_sharp_pair_still_noisy():
    z = spin_observable([0, 0, 1])
    m = cloning_biobservable(z, z)
    assert la.allclose(marginal(m, 1).effects, noisy_version(z, 2 / 3).effects, 1e-12)
    assert not la.allclose(marginal(m, 1).effects, z.effects, 1e-3)


def test_n_cloning_reduces_to_binary():
    rng = np.random.default_rng(3)
    a, b = random_observable(3, 2, rng), random_observable(3, 3, rng)
    assert la.allclose(cloning_multiobservable([a, b]).effects, cloning_biobservable(a, b).effects, 1e-12)
    assert cloning_upper_bound([a, b]) == pytest.approx(
        sum(math.log2(2 * 4 / (3 + 2 + min(np.trace(o.effects, axis1=1, axis2=2).real)))
            for o in (a, b)))


@pytest.mark.parametrize("d", [2, 3])
def test_three_cloning_marginals(d):
    rng = np.random.default_rng(d)
    obs = [random_observable(d, 2, rng) for _ in range(3)]
    m = cloning_multiobservable(obs)
    lam = cloning_lambda(d, 3)
    for i, o in enumerate(obs, start=1):
        assert la.allclose(marginal(m, i).effects, noisy_version(o, lam).effects, 1e-10)


def test_cloning_instrument_is_sequential():
    rng = np.random.default_rng(4)
    a, b = random_observable(2, 3, rng), random_observable(2, 2, rng)
    J = cloning_instrument(a)
    assert la.allclose(sequential_measurement(J, b).effects, cloning_biobservable(a, b).effects, 1e-12)


def test_cloning_bound_values():
    x, y = target_pair(math.pi / 2)
    assert cloning_upper_bound([x, y]) == pytest.approx(2 * math.log2(6 / 5), abs=1e-12)
    z = spin_observable([0, 0, 1])
    assert cloning_upper_bound([x, y, z]) <= 3 * math.log2(9 / 5)
    assert cloning_upper_bound([x, y, z]) <= 3 * math.log2(3)


def test_cloning_bound_dominates_brackets():
    rng = np.random.default_rng(5)
    for _ in range(3):
        a, b = random_observable(2, 2, rng), random_observable(2, 3, rng)
        assert icomp(a, b).upper <= cloning_upper_bound([a, b]) + 1e-9


def test_kp_bound_cases():
    z = spin_observable([0, 0, 1])
    x = spin_observable([1, 0, 0])
    assert kp_lower_bound(z, x) == pytest.approx(1.0, abs=1e-12)
    assert kp_lower_bound(z, z) == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=15)
@given(st.integers(2, 3), st.integers(0, 2**32 - 1))
def test_prep_above_kp(d, seed):
    rng = np.random.default_rng(seed)
    a, b = random_observable(d, 2, rng), random_observable(d, 3, rng)
    assert prep_coefficient(a, b) >= kp_lower_bound(a, b) - 1e-6


def test_prep_coefficient_cases():
    z = spin_observable([0, 0, 1])
    assert prep_coefficient(z, z) == pytest.approx(0.0, abs=1e-8)
    u3, u2 = uniform_observable((0, 1, 2), 2), uniform_observable((0, 1), 2)
    assert prep_coefficient(u3, u2) == pytest.approx(math.log2(3) + 1.0, abs=1e-12)


def test_tradeoff_saturated_by_uniform_pair():
    u3, u2 = uniform_observable((0, 1, 2), 2), uniform_observable((0, 1), 2)
    prep = prep_coefficient(u3, u2)
    assert tradeoff_check(u3, u2, 0.0, prep)
    assert prep == pytest.approx(tradeoff_rhs(u3, u2))
    assert not tradeoff_check(u3, u2, 1e-3, prep)


def test_tradeoff_spin_pair():
    x, y = target_pair(math.pi / 2)
    prep = prep_coefficient(x, y)
    assert tradeoff_check(x, y, ORTH_VALUE, prep)


def test_shannon_cap_dominates_bracket():
    rng = np.random.default_rng(6)
    a, b = random_observable(2, 3, rng), random_observable(2, 2, rng)
    br = icomp(a, b)
    assert br.upper <= min(shannon_cap(a), shannon_cap(b)) + 1e-9


def test_report_fields_and_validation():
    x, y = target_pair(math.pi / 2)
    z = spin_observable([0, 0, 1])
    rep = bound_report(x, y, [z])
    d = rep.to_dict()
    assert set(d) == {"cloning2", "cloningN", "shannon_cap", "kp_lower", "prep_coeff", "tradeoff_rhs"}
    assert all("label" in v for v in d.values())
    with pytest.raises(ValueError):
        BoundReport(2.5, None, 1.0, 1.0, 1.0, 2.0)
    with pytest.raises(ValueError):
        BoundReport(1.0, None, math.inf, 1.0, 1.0, 2.0)
    with pytest.raises(ObjectError):
        cloning_upper_bound([x, random_observable(3, 2, np.random.default_rng(0))])
