import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gaussmagic.fidelity import (
    NetSpec,
    delta_closed_form,
    delta_recursion,
    fidelity_upper_bound,
    gaussian_fidelity,
    haar_random_even_state,
    net_cardinality_bound,
)
from gaussmagic.states import (
    EvenParityState,
    apply_circuit,
    lambda_residual_norm,
    random_brickwork_circuit,
    random_gaussian,
)


def m_test_state() -> EvenParityState:
    r = 1 / np.sqrt(2)
    return EvenParityState.from_amplitude_map(4, {0: r, 15: r}).rescaled_to_unit()


def test_gaussian_target_reaches_one(rng):
    for n in (4, 6):
        target = random_gaussian(n, rng)
        result = gaussian_fidelity(target, restarts=4, seed=1)
        assert result.value >= 1.0 - 1e-9


def test_magic_state_fidelity_is_half():
    result = gaussian_fidelity(m_test_state(), restarts=10, seed=0)
    assert result.value == pytest.approx(0.5, abs=1e-6)
    assert result.converged


def test_witness_is_gaussian_and_normalized():
    result = gaussian_fidelity(m_test_state(), restarts=4, seed=0)
    assert lambda_residual_norm(result.witness) < 1e-9
    assert result.witness.norm() == pytest.approx(1.0, abs=1e-9)


def test_fidelity_unitary_invariance(rng):
    # conjugating the target by a matchgate circuit cannot change the value
    target = m_test_state()
    circuit = random_brickwork_circuit(4, rng)
    moved = apply_circuit(target, circuit)
    a = gaussian_fidelity(target, restarts=8, seed=3).value
    b = gaussian_fidelity(moved, restarts=8, seed=3).value
    assert a == pytest.approx(b, abs=1e-6)


def test_restart_monotonicity():
    target = haar_random_even_state(4, seed=5)
    v1 = gaussian_fidelity(target, restarts=1, seed=7).value
    v8 = gaussian_fidelity(target, restarts=8, seed=7).value
    assert v8 >= v1 - 1e-12


def test_seed_determinism_and_thread_independence():
    target = haar_random_even_state(4, seed=2)
    a = gaussian_fidelity(target, restarts=4, seed=11, threads=1)
    b = gaussian_fidelity(target, restarts=4, seed=11, threads=2)
    assert a.value == b.value


def test_rejects_unnormalized_target():
    amps = np.zeros(8, dtype=np.complex128)
    amps[0] = 2.0
    with pytest.raises(ValueError):
        gaussian_fidelity(EvenParityState(4, amps), restarts=1, seed=0)


def test_haar_state_properties():
    s = haar_random_even_state(6, seed=4)
    assert s.norm() == pytest.approx(1.0, abs=1e-12)
    t = haar_random_even_state(6, seed=4)
    assert np.array_equal(s.amplitudes, t.amplitudes)


@given(st.integers(min_value=4, max_value=10))
def test_haar_fidelity_in_unit_interval(seed):
    target = haar_random_even_state(4, seed=seed)
    value = gaussian_fidelity(target, restarts=1, seed=0, maxiter=60).value
    assert 0.0 <= value <= 1.0 + 1e-12


# ---------------------------------------------------------------------------
# Covering-net bounds


@pytest.mark.parametrize("n", [4, 6, 8])
def test_delta_recursion_matches_closed_form(n):
    for w in range(2, n + 1, 2):
        for eta in (1e-3, 2.0**-20):
            rec = delta_recursion(n, w, eta)
            closed = delta_closed_form(n, w, eta)
            assert rec == pytest.approx(closed, rel=1e-12)


def test_delta_base_case():
    assert delta_recursion(8, 2, 0.125) == 0.125


def test_delta_rejects_odd_weight():
    with pytest.raises(ValueError):
        delta_recursion(8, 3, 0.1)


def test_net_cardinality_frozen():
    card = net_cardinality_bound(4, 4)
    assert card.total_log2 == 356.0


def test_net_spec_defaults():
    spec = NetSpec(4, 4)
    assert spec.eta == 2.0 ** -(16 + 4)
    assert spec.cardinality_log2_bound == 356.0
    assert spec.region_log2_bound() == pytest.approx(2 * 16 + 1 + 16 * 20)


def test_fidelity_upper_bound_values():
    # decreasing in n, scaling linear in (1 + delta)
    assert fidelity_upper_bound(8, 0.5) == pytest.approx(
        2.0 ** (2 - 8) * 1.5 * 8**4
    )
    assert fidelity_upper_bound(12, 0.5) < fidelity_upper_bound(8, 0.5)
    with pytest.raises(ValueError):
        fidelity_upper_bound(4, -1.0)
