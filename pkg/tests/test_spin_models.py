import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from entrimur import linalg_core as la
from entrimur.entropy import error_function, error_function_multi
from entrimur.minimax_solver import SolverConfig, icomp
from entrimur.quantum_objects import ObjectError, marginal, noisy_version
from entrimur.spin_models import (ORTH_VALUE, THREE_SPIN_VALUE, CovariantParams, SpinPairConfig,
                                  analytic_lower_bound, canonical_phi, comparison_points,
                                  covariant_biobservable, equator_max, error_on_equator,
                                  m_gamma, m_plus_minus, qubit_minimax, spin_observable,
                                  target_pair, three_spin_family, three_spin_m1,
                                  three_spin_suite)

alphas = st.floats(0.0, math.pi / 2)
gammas = st.floats(-1.0, 1.0)


def rho_phi(phi, z=0.0):
    return (la.I2 + math.cos(phi) * la.SIGMA1 + math.sin(phi) * la.SIGMA2 + z * la.SIGMA3) / 2


@given(alphas)
def test_config_invariants(alpha):
    c = SpinPairConfig.from_alpha(alpha)
    assert c.a1**2 + c.a2**2 == pytest.approx(1.0, abs=1e-12)
    assert float(c.a @ c.b) == pytest.approx(math.cos(alpha), abs=1e-12)


def test_target_pair_endpoints():
    x, y = target_pair(math.pi / 2)
    assert la.allclose(x.effects[0], (la.I2 + la.SIGMA1) / 2, 1e-15)
    assert la.allclose(y.effects[0], (la.I2 + la.SIGMA2) / 2, 1e-15)
    a, b = target_pair(0.0)
    assert la.allclose(a.effects, b.effects, 1e-15)
    with pytest.raises(ObjectError):
        target_pair(2.0)


def test_covariant_family_special_cases():
    m0 = covariant_biobservable(CovariantParams(0.0, 1 / math.sqrt(2), 0.0))
    assert la.allclose(m0.effects, m_gamma(0.0).effects, 1e-15)
    s = 1 / math.sqrt(2)
    for i, x in enumerate((1, -1)):
        for j, y in enumerate((1, -1)):
            assert la.allclose(m0.effects[i, j], (la.I2 + s * x * la.SIGMA1 + s * y * la.SIGMA2) / 4, 1e-15)
    with pytest.raises(ObjectError):
        CovariantParams(0.9, 0.5, -0.5)


def test_boundary_parameter_is_singular():
    c1, c2 = 0.3, 0.2
    g = math.sqrt(2) * abs(c1 + c2) - 1
    m = covariant_biobservable(CovariantParams(g, c1, c2))
    smallest = min(np.linalg.eigvalsh(e).min() for e in m.flat_effects())
    assert abs(smallest) < 1e-12


def test_d4_form():
    c1 = 0.4
    m = covariant_biobservable(CovariantParams(0.0, c1, 0.0))
    assert la.allclose(m.effects[0, 1], (la.I2 + c1 * (la.SIGMA1 - la.SIGMA2)) / 4, 1e-15)


@given(gammas)
def test_m_gamma_is_mixture_of_sharp_joints(g):
    mp, mm = m_plus_minus()
    mix = (1 + g) / 2 * mp.effects + (1 - g) / 2 * mm.effects
    assert la.allclose(m_gamma(g).effects, mix, 1e-12)


def test_m_plus_is_product_of_n_projectors():
    mp, _ = m_plus_minus()
    n = np.array([1, 1, 0]) / math.sqrt(2)
    P = spin_observable(n)
    assert la.allclose(m_gamma(1.0).effects, mp.effects, 1e-12)
    assert la.allclose(mp.effects[0, 0], P.effects[0], 1e-12)


@given(gammas)
def test_m_gamma_marginals(g):
    m = m_gamma(g)
    c = np.array([1.0, g, 0.0]) / math.sqrt(2)
    assert la.allclose(marginal(m, 1).effects, spin_observable(c).effects, 1e-12)
    assert la.allclose(marginal(m, 2).effects, spin_observable(c[[1, 0, 2]]).effects, 1e-12)


@given(alphas, gammas, st.floats(0, 2 * math.pi), st.floats(-1, 1))
def test_equatorial_reduction(alpha, g, phi, z):
    a, b = target_pair(alpha)
    m = m_gamma(g)
    closed = float(error_on_equator(alpha, g, phi))
    direct = error_function(a, b, m, rho_phi(phi))
    if math.isinf(closed):
        assert math.isinf(direct)
        return
    assert direct == pytest.approx(closed, abs=1e-10)
    r = math.sqrt(max(0.0, 1 - z * z))
    mixed = (la.I2 + r * (math.cos(phi) * la.SIGMA1 + math.sin(phi) * la.SIGMA2)) / 2
    lifted = (la.I2 + r * (math.cos(phi) * la.SIGMA1 + math.sin(phi) * la.SIGMA2) + z * la.SIGMA3) / 2
    assert error_function(a, b, m, lifted) == pytest.approx(error_function(a, b, m, mixed), abs=1e-10)


@given(gammas)
def test_d2_covariance(g):
    m = m_gamma(g)
    n = np.array([1, 1, 0]) / math.sqrt(2)
    U = -1j * (n[0] * la.SIGMA1 + n[1] * la.SIGMA2)
    for i in range(2):
        for j in range(2):
            assert la.allclose(U @ m.effects[i, j] @ U.conj().T, m.effects[j, i], 1e-10)


def test_canonical_phi_orbit():
    for phi in (0.3, -0.2, 0.7):
        orbit = (phi, math.pi / 2 - phi, phi + math.pi, 3 * math.pi / 2 - phi)
        reps = {round(canonical_phi(p), 12) for p in orbit}
        assert len(reps) == 1
        assert -math.pi / 4 - 1e-12 <= reps.pop() <= math.pi / 4 + 1e-12


def test_lower_bound_values():
    lb, g, ell = analytic_lower_bound(math.pi / 4)
    assert lb == pytest.approx(0.110081045, abs=1e-8)
    assert g == pytest.approx(0.795558753, abs=1e-8)
    assert analytic_lower_bound(math.pi / 2)[0] == pytest.approx(ORTH_VALUE, abs=1e-12)
    assert analytic_lower_bound(0.0) == (0.0, 1.0, 1.0)
    assert analytic_lower_bound(1e-6)[0] < 1e-9
    assert analytic_lower_bound(math.pi / 2 - 1e-7)[0] == pytest.approx(ORTH_VALUE, abs=1e-6)


def test_lower_bound_is_attained_at_predicted_state():
    alpha = math.pi / 4
    lb, g, _ = analytic_lower_bound(alpha)
    assert float(error_on_equator(alpha, g, math.pi / 4 - alpha / 2)) == pytest.approx(lb, abs=1e-10)


def test_minimax_endpoints():
    v, g, phi = qubit_minimax(math.pi / 2)
    assert v == pytest.approx(ORTH_VALUE, abs=1e-8)
    assert abs(g) < 1e-6 and abs(phi) < 1e-4
    v0, g0, _ = qubit_minimax(0.0)
    assert v0 < 1e-10 and g0 == pytest.approx(1.0)


@pytest.mark.parametrize("alpha", np.linspace(0.05, math.pi / 2 - 0.05, 20))
def test_lower_bound_below_minimax(alpha):
    cfg = SolverConfig()
    assert analytic_lower_bound(alpha)[0] <= qubit_minimax(alpha, cfg)[0] + cfg.inner_tol


@pytest.mark.parametrize("alpha", [0.3, math.pi / 4, 1.2])
def test_minimax_inside_generic_bracket(alpha):
    a, b = target_pair(alpha)
    br = icomp(a, b)
    v = qubit_minimax(alpha)[0]
    assert br.contains(v, 1e-6)


def test_comparison_ordering():
    pts = comparison_points(math.pi / 4)
    assert pts["lb"][1] <= pts["icomp"][1] <= pts["blw"][1] <= pts["nv"][1]
    s = SpinPairConfig.from_alpha(math.pi / 4)
    assert pts["blw"][0] == pytest.approx(math.sqrt(2) * s.a2)
    assert pts["nv"][0] == pytest.approx(s.a2 / s.a1)


def test_equator_max_phi_is_canonical():
    v, phi = equator_max(math.pi / 4, 0.5)
    assert -math.pi / 4 <= phi <= math.pi / 4


def test_three_spin_family_and_m1():
    m0, m1 = three_spin_family(1 / math.sqrt(3)), three_spin_m1()
    nonzero = [e for e in m1.flat_effects() if np.abs(e).max() > 1e-14]
    assert len(nonzero) == 4
    assert all(np.linalg.matrix_rank(e, tol=1e-10) == 1 for e in nonzero)
    assert la.allclose(sum(nonzero), np.eye(2), 1e-12)
    for i in (1, 2, 3):
        assert la.allclose(marginal(m0, i).effects, marginal(m1, i).effects, 1e-12)
        target = spin_observable(np.eye(3)[i - 1])
        assert la.allclose(marginal(m0, i).effects, noisy_version(target, 1 / math.sqrt(3)).effects, 1e-12)
    with pytest.raises(ObjectError):
        three_spin_family(0.6)


def test_three_spin_suite_value():
    r = three_spin_suite()
    assert r["icomp"] == pytest.approx(THREE_SPIN_VALUE, abs=1e-6)
    assert r["scan_value"] <= r["pauli_value"] + 1e-6
    targets = r["targets"]
    val = error_function_multi(targets, r["m1"], np.diag([1.0, 0.0]))
    assert val == pytest.approx(THREE_SPIN_VALUE, abs=1e-12)
