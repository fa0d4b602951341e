import numpy as np
import pytest
from hypothesis import given, strategies as st

from noonsim.errors import BoundsError, ConfigurationError, ShapeError, UnsupportedTransitionError
from noonsim.hilbert import (
    BasisLabel,
    Level,
    Slot,
    SpaceConfig,
    Transition,
    annihilation,
    basis_index,
    basis_label,
    creation,
    is_hermitian,
    is_unitary,
    ket,
    lift,
    projector,
    transition_lowering,
)

configs = st.builds(SpaceConfig, st.integers(2, 7), st.integers(2, 7))


def test_first_and_last_index(cfg44):
    assert basis_index(BasisLabel.of("g", 0, 0), cfg44) == 0
    assert basis_index(BasisLabel.of("a", 3, 3), cfg44) == cfg44.dim - 1


def test_index_by_enumeration(cfg44):
    # enumerate level-major, then n1, then n2 and locate |e,1,0>
    order = [(lv, n1, n2) for lv in "gea" for n1 in range(4) for n2 in range(4)]
    assert order.index(("e", 1, 0)) == 20
    assert basis_index(BasisLabel.of("e", 1, 0), cfg44) == 20


@given(configs, st.data())
def test_index_round_trip(cfg, data):
    i = data.draw(st.integers(0, cfg.dim - 1))
    assert basis_index(basis_label(i, cfg), cfg) == i


def test_out_of_range_label(cfg44):
    with pytest.raises(BoundsError):
        basis_index(BasisLabel.of("g", 4, 0), cfg44)
    with pytest.raises(BoundsError):
        basis_label(cfg44.dim, cfg44)


def test_truncation_must_have_two_levels():
    with pytest.raises(ConfigurationError):
        SpaceConfig(1, 3)
    with pytest.raises(ConfigurationError):
        annihilation(1)


@pytest.mark.parametrize("d", [2, 3, 6])
def test_annihilation_matrix_elements(d):
    a = annihilation(d)
    assert np.all(a @ np.eye(d)[:, 0] == 0)
    for n in range(1, d):
        assert a[n - 1, n] == np.sqrt(n)
    np.testing.assert_allclose(creation(d) @ a, np.diag(np.arange(d)), atol=1e-14)


def test_commutator_broken_only_at_top():
    d = 5
    a = annihilation(d)
    comm = a @ a.conj().T - a.conj().T @ a
    expect = np.eye(d)
    expect[d - 1, d - 1] = -(d - 1)
    np.testing.assert_allclose(comm, expect, atol=1e-14)


def test_transition_lowering():
    s_ea = transition_lowering("a", "e")
    np.testing.assert_array_equal(s_ea @ np.eye(3)[:, Level.a], np.eye(3)[:, Level.e])
    assert not np.any(s_ea @ np.eye(3)[:, Level.g])
    s_ge = transition_lowering("e", "g")
    np.testing.assert_array_equal(s_ge.conj().T @ s_ge, projector("e"))


@pytest.mark.parametrize("pair", [("a", "g"), ("g", "a"), ("g", "e"), ("e", "a")])
def test_unsupported_transition(pair):
    with pytest.raises(UnsupportedTransitionError):
        transition_lowering(*pair)


def test_transition_parse():
    assert Transition.parse("e<->a") is Transition.EA
    assert Transition.parse("ge") is Transition.GE
    with pytest.raises(UnsupportedTransitionError):
        Transition.parse("g<->a")


def test_lift_identity_and_commuting_slots(cfg44):
    for slot in Slot:
        np.testing.assert_array_equal(lift(np.eye(cfg44.slot_dim(slot)), slot, cfg44), np.eye(cfg44.dim))
    a1 = lift(annihilation(4), Slot.r1, cfg44)
    ad2 = lift(creation(4), Slot.r2, cfg44)
    np.testing.assert_array_equal(a1 @ ad2, ad2 @ a1)


def test_lift_matrix_element(cfg44):
    op = lift(creation(4), Slot.r1, cfg44) @ lift(transition_lowering("a", "e"), Slot.qutrit, cfg44)
    bra = ket(cfg44, (1, "e", 1, 0))
    k = ket(cfg44, (1, "a", 0, 0))
    assert np.vdot(bra, op @ k) == pytest.approx(1.0)


def test_lift_shape_error(cfg44):
    with pytest.raises(ShapeError):
        lift(np.eye(3), Slot.r1, cfg44)


def test_lift_preserves_hermiticity_and_same_slot_commutator():
    cfg = SpaceConfig(3, 5)
    a = annihilation(5)
    x = a + a.conj().T
    assert is_hermitian(lift(x, Slot.r2, cfg))
    comm = a @ a.conj().T - a.conj().T @ a
    la, lad = lift(a, Slot.r2, cfg), lift(a.conj().T, Slot.r2, cfg)
    np.testing.assert_allclose(la @ lad - lad @ la, lift(comm, Slot.r2, cfg), atol=1e-14)


@given(configs, st.integers(0, 2**32 - 1))
def test_unitary_preserves_norm(cfg, seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(cfg.dim, cfg.dim)) + 1j * rng.normal(size=(cfg.dim, cfg.dim))
    q, _ = np.linalg.qr(m)
    assert is_unitary(q)
    psi = rng.normal(size=cfg.dim) + 1j * rng.normal(size=cfg.dim)
    psi /= np.linalg.norm(psi)
    assert abs(np.linalg.norm(q @ psi) - 1) < 1e-10
