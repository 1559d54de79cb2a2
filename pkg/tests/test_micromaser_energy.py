import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdynlab.micromaser import (
    FullSystemOracle,
    MicromaserParams,
    energy_cumulative_perfect_reversed_order,
    energy_step_perfect_reversed_order,
    energy_variation_leaky,
    energy_variation_perfect,
    energy_variation_perfect_cumulative,
    entropy_production,
    gibbs_state,
    leaky_energy_jump,
    leaky_energy_limit,
    leaky_limit_bounds,
    leaky_pumping_part,
    photon_number_closed,
    relative_entropy,
)
from qdynlab.operators import number_op

PERFECT = MicromaserParams(eps=1.0, lam=0.3, tau=1.0, p=0.4, cutoff=20)
LEAKY = MicromaserParams(eps=1.0, lam=0.3, tau=1.0, p=0.4, sigma=0.3, cutoff=20)


def gauge_invariant_state(params):
    return gibbs_state(1.5, params.eps, params.cutoff)


def n_of(rho, params):
    return float(np.real(np.trace(number_op(params.space) @ rho)))


# ---------------------------------------------------------------- perfect cavity


@pytest.fixture(scope="module")
def perfect_run():
    rho0 = gauge_invariant_state(PERFECT)
    oracle = FullSystemOracle(PERFECT, 2)
    return oracle, oracle.run(rho0), oracle.run(rho0, order="reversed")


def test_perfect_energy_trivial_cases():
    for params in (PERFECT.replace(p=0.0), PERFECT.replace(p=1.0), PERFECT.replace(tau=2 * math.pi)):
        for n in (2, 3, 10):
            assert energy_variation_perfect(params, n) == 0.0
            assert energy_variation_perfect_cumulative(params, n) == 0.0
    with pytest.raises(ValueError):
        energy_variation_perfect(PERFECT, 1)


def test_perfect_cumulative_is_sum_of_steps():
    for n in range(2, 12):
        steps = sum(energy_variation_perfect(PERFECT, k) for k in range(2, n + 1))
        assert energy_variation_perfect_cumulative(PERFECT, n) == pytest.approx(steps, rel=1e-14)
        rev = sum(energy_step_perfect_reversed_order(PERFECT, k) for k in range(2, n + 1))
        assert energy_cumulative_perfect_reversed_order(PERFECT, n) == pytest.approx(rev, abs=1e-15)


def test_perfect_energy_against_full_system(perfect_run):
    oracle, states, _ = perfect_run
    step = oracle.energy_after_entry(states, 3) - oracle.energy_before_exit(states, 2)
    cum = oracle.energy_after_entry(states, 3) - oracle.energy_after_entry(states, 1)
    assert energy_variation_perfect(PERFECT, 3) == pytest.approx(step, abs=1e-10)
    assert energy_variation_perfect_cumulative(PERFECT, 3) == pytest.approx(cum, abs=1e-10)


def test_reversed_order_formula_matches_reversed_propagation(perfect_run):
    oracle, _, states = perfect_run
    step = oracle.energy_after_entry(states, 3) - oracle.energy_before_exit(states, 2)
    assert energy_step_perfect_reversed_order(PERFECT, 3) == pytest.approx(step, abs=1e-10)


@pytest.mark.xfail(strict=True, reason="the cosine-difference step belongs to the reversed propagator order")
def test_cosine_difference_step_against_forward_dynamics(perfect_run):
    oracle, states, _ = perfect_run
    step = oracle.energy_after_entry(states, 3) - oracle.energy_before_exit(states, 2)
    assert energy_step_perfect_reversed_order(PERFECT, 3) == pytest.approx(step, abs=1e-7)


# ---------------------------------------------------------------- leaky cavity


@pytest.fixture(scope="module")
def leaky_run():
    rho0 = gauge_invariant_state(LEAKY)
    oracle = FullSystemOracle(LEAKY, 3)
    return oracle, oracle.run(rho0), n_of(rho0, LEAKY)


def test_leaky_components_against_full_system(leaky_run):
    oracle, states, n0 = leaky_run
    e0 = oracle.energy_before_exit(states, 0)
    for n in (1, 2, 3):
        rec = energy_variation_leaky(LEAKY, n, n0)
        before, after = oracle.energy_before_exit(states, n), oracle.energy_after_entry(states, n)
        prev = oracle.energy_before_exit(states, n - 1)
        assert rec.in_cavity_step == pytest.approx(before - after, abs=1e-9)
        assert rec.jump == pytest.approx(after - prev, abs=1e-9)
        assert rec.extended_step == pytest.approx(before - prev, abs=1e-9)
        assert rec.cumulative == pytest.approx(before - e0, abs=1e-9)


def test_leaky_telescoping_and_limit():
    n0 = 0.7
    running = 0.0
    for n in range(1, 60):
        rec = energy_variation_leaky(LEAKY, n, n0)
        running += rec.extended_step
        assert abs(running - rec.cumulative) <= 1e-12
    far = energy_variation_leaky(LEAKY, 3000, n0)
    assert far.cumulative == pytest.approx(leaky_energy_limit(LEAKY, n0), abs=1e-10)
    assert far.limit == leaky_energy_limit(LEAKY, n0)


def test_leaky_no_excited_atoms_is_trivial():
    params = LEAKY.replace(p=0.0)
    for n in (1, 2, 9):
        rec = energy_variation_leaky(params, n, 0.0)
        assert (rec.in_cavity_step, rec.jump, rec.extended_step, rec.cumulative, rec.limit) == (0, 0, 0, 0, 0)


def test_leaky_in_cavity_step_vanishes_without_leak():
    for sigma in (1e-4, 1e-6, 1e-8):
        rec = energy_variation_leaky(LEAKY.replace(sigma=sigma), 4, 0.5)
        assert abs(rec.in_cavity_step) <= 20 * sigma


def test_leaky_jump_constant_in_n():
    assert energy_variation_leaky(LEAKY, 2).jump == energy_variation_leaky(LEAKY, 9).jump == leaky_energy_jump(LEAKY)
    assert energy_variation_leaky(LEAKY, 1).jump == 0.0


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.05, 2.0), st.floats(0.1, 6.0), st.floats(0.0, 3.0))
def test_pumping_part_within_bounds(p, sigma, tau, n0):
    params = MicromaserParams(eps=1.0, lam=0.3, tau=tau, p=p, sigma=sigma)
    lo, hi = leaky_limit_bounds(params, n0)
    val = leaky_pumping_part(params, n0)
    assert lo - 1e-12 <= val <= hi + 1e-12


@pytest.mark.xfail(strict=True, reason="the full asymptotic variation carries -eps p K, pushing it below the lower estimate")
def test_full_limit_within_bounds_at_p_one():
    params = LEAKY.replace(p=1.0)
    lo, hi = leaky_limit_bounds(params)
    assert lo <= leaky_energy_limit(params) <= hi


def test_leaky_requires_leak():
    with pytest.raises(ValueError):
        energy_variation_leaky(PERFECT, 2)
    with pytest.raises(ValueError):
        leaky_energy_limit(PERFECT)


# ---------------------------------------------------------------- entropy


def test_gibbs_state_normalized():
    rho = gibbs_state(0.7, 1.3, 25)
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-15)
    assert np.all(np.diff(np.diag(rho).real) < 0)
    with pytest.raises(ValueError):
        gibbs_state(0.0, 1.0, 5)


def test_relative_entropy_basics():
    rho = gibbs_state(1.0, 1.0, 10)
    assert relative_entropy(rho, rho) == pytest.approx(0.0, abs=1e-13)
    sigma = gibbs_state(2.0, 1.0, 10)
    p, q = np.diag(rho).real, np.diag(sigma).real
    assert relative_entropy(rho, sigma) == pytest.approx(float(np.sum(p * np.log(p / q))), rel=1e-10)
    vacuum = np.zeros_like(rho)
    vacuum[0, 0] = 1.0
    assert relative_entropy(rho, vacuum) == math.inf
    assert relative_entropy(vacuum, rho) == pytest.approx(-math.log(rho[0, 0].real), rel=1e-12)


def test_entropy_trivial_cases():
    assert entropy_production(PERFECT, 1.0, 0) == 0.0
    res = PERFECT.replace(tau=2 * math.pi)
    assert all(entropy_production(res, 1.0, n) == 0.0 for n in range(6))
    with pytest.raises(ValueError):
        entropy_production(LEAKY, 1.0, 1)


def test_entropy_against_full_system_relative_entropy():
    params = PERFECT.replace(lam=0.2, cutoff=15)
    rho0 = gibbs_state(1.0, params.eps, params.cutoff)
    n0 = n_of(rho0, params)
    oracle = FullSystemOracle(params, 2)
    states = oracle.run(rho0)
    for n in (0, 1, 2):
        assert entropy_production(params, 1.0, n, n0) == pytest.approx(
            relative_entropy(states[n], states[0]), abs=1e-6
        )


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(0.1, 6.0), st.integers(0, 200), st.floats(0.2, 3.0))
def test_second_law(p, tau, n, beta):
    params = MicromaserParams(eps=1.0, lam=0.3, tau=tau, p=p)
    assert entropy_production(params, beta, n) >= -1e-15
    assert photon_number_closed(params, n, 0.2) >= 0.2 - 1e-15
