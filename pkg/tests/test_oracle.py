import numpy as np
import pytest
from hypothesis import given, strategies as st

import closed_forms as cf
from noonsim.errors import BoundsError, IntegrityError
from noonsim.hamiltonian import DeviceParams
from noonsim.hilbert import BasisLabel, Slot, SpaceConfig, Transition, basis_index, ket
from noonsim.oracle import (
    check_rung_support,
    compose,
    expected_state,
    format_state,
    ideal_phase_correction,
    ideal_pi_pulse,
    ideal_swap,
    noon_state,
    unitarity_error,
)
from noonsim.protocol import ProtocolSpec, build_segments


def test_pump_on_initial_superposition(cfg44):
    out = ideal_pi_pulse(Transition.EA, cfg44).apply(cf.vec(cf.start(), cfg44), cfg44)
    np.testing.assert_allclose(out, cf.vec(cf.after_first_pump(), cfg44), atol=1e-15)


@pytest.mark.parametrize("N", [1, 2, 3])
def test_branch_exchange(N):
    cfg = SpaceConfig(N + 2, 3)
    out = ideal_pi_pulse(Transition.GE, cfg).apply(cf.vec(cf.after_first_part(N), cfg), cfg)
    np.testing.assert_allclose(out, cf.vec(cf.after_branch_exchange(N), cfg), atol=1e-15)


@pytest.mark.parametrize("transition", list(Transition))
def test_pulse_twice_is_minus_identity_on_pair(transition, cfg44):
    u = ideal_pi_pulse(transition, cfg44).matrix(cfg44)
    uu = u @ u
    for n1 in range(4):
        for n2 in range(4):
            for level in ("g", "e", "a"):
                i = basis_index(BasisLabel.of(level, n1, n2), cfg44)
                on_pair = level in (transition.lower.name, transition.upper.name)
                assert uu[i, i] == pytest.approx(-1 if on_pair else 1)
    assert np.max(np.abs(uu - np.diag(np.diag(uu)))) == 0


def test_first_swap(cfg44):
    psi = cf.vec(cf.after_first_pump(), cfg44)
    out = ideal_swap(Slot.r1, Transition.EA, 1, cfg44).apply(psi, cfg44)
    np.testing.assert_allclose(out, cf.vec(cf.after_first_swap(), cfg44), atol=1e-15)


@pytest.mark.parametrize("N", [1, 2, 4])
def test_second_swap(N):
    cfg = SpaceConfig(N + 2, 4)
    out = ideal_swap(Slot.r2, Transition.EA, 1, cfg).apply(cf.vec(cf.after_second_pump(N), cfg), cfg)
    np.testing.assert_allclose(out, cf.vec(cf.after_second_swap(N), cfg), atol=1e-15)


@pytest.mark.parametrize("N,M", [(1, 1), (2, 3), (5, 4)])
def test_final_swap_produces_noon(N, M):
    cfg = SpaceConfig(N + 2, M + 2)
    out = ideal_swap(Slot.r2, Transition.GE, M, cfg).apply(cf.vec(cf.after_correction(N, M), cfg), cfg)
    np.testing.assert_allclose(out, cf.vec(cf.noon(N, M), cfg), atol=1e-15)


def test_swap_rung_bounds(cfg44):
    with pytest.raises(BoundsError):
        ideal_swap(Slot.r1, Transition.EA, 4, cfg44)
    with pytest.raises(BoundsError):
        ideal_swap(Slot.r2, Transition.GE, 0, cfg44)


@given(st.integers(2, 6), st.integers(2, 6), st.data())
def test_gates_are_unitary(d1, d2, data):
    cfg = SpaceConfig(d1, d2)
    resonator = data.draw(st.sampled_from(list(Slot)[1:]))
    transition = data.draw(st.sampled_from(list(Transition)))
    rung = data.draw(st.integers(1, cfg.slot_dim(resonator) - 1))
    phase = data.draw(st.floats(-np.pi, np.pi))
    for gate in (
        ideal_swap(resonator, transition, rung, cfg),
        ideal_pi_pulse(transition, cfg, phase),
        ideal_phase_correction(phase, 2 * phase, cfg),
    ):
        assert unitarity_error(gate, cfg) < 1e-14


def test_apply_matches_matrix(cfg44):
    rng = np.random.default_rng(11)
    psi = rng.normal(size=cfg44.dim) + 1j * rng.normal(size=cfg44.dim)
    gate = ideal_swap(Slot.r1, Transition.GE, 2, cfg44)
    np.testing.assert_allclose(gate.apply(psi, cfg44), gate.matrix(cfg44) @ psi, atol=1e-15)


def test_rung_support_guard(cfg44):
    gate = ideal_swap(Slot.r1, Transition.EA, 1, cfg44)
    assert check_rung_support(gate, cf.vec(cf.after_first_pump(), cfg44), cfg44) == 0.0
    # |a,1,0> would also be moved by the physical coupling
    stray = ket(cfg44, (np.sqrt(0.5), "a", 0, 0), (np.sqrt(0.5), "a", 1, 0))
    with pytest.raises(IntegrityError):
        check_rung_support(gate, stray, cfg44)


def test_expected_state_examples():
    spec = ProtocolSpec(3, 2)
    cfg = SpaceConfig(5, 4)
    np.testing.assert_array_equal(expected_state(spec, 0), cf.vec(cf.start(), cfg))
    np.testing.assert_allclose(expected_state(spec, 6), cf.vec(cf.after_first_part(3), cfg), atol=1e-15)
    np.testing.assert_allclose(expected_state(spec, 11), noon_state(3, 2, cfg), atol=1e-15)
    with pytest.raises(BoundsError):
        expected_state(spec, 12)
    with pytest.raises(BoundsError):
        expected_state(spec, -1)


@given(st.integers(1, 5), st.integers(1, 5))
def test_oracle_final_fidelity_is_one(N, M):
    cfg = SpaceConfig(N + 2, M + 2)
    final = compose(build_segments(ProtocolSpec(N, M), DeviceParams.defaults()), cfg)[-1]
    assert abs(np.vdot(noon_state(N, M, cfg), final)) ** 2 == pytest.approx(1.0, abs=1e-15)


def test_format_state(cfg44):
    assert format_state(cf.vec(cf.after_first_pump(), cfg44), cfg44) == "0.707107|g,0,0> + -0.707107i|a,0,0>"
    assert format_state(np.zeros(cfg44.dim), cfg44) == "0"
