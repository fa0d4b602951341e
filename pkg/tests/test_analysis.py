import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import closed_forms as cf
from noonsim.analysis import (
    build_report,
    field_fidelity,
    fidelity,
    guard_population,
    photon_statistics,
    populations_table,
    purity,
    reduced_state,
)
from noonsim.dynamics import RunConfig, run_schedule
from noonsim.errors import ShapeError
from noonsim.hamiltonian import DeviceParams
from noonsim.hilbert import Slot, SpaceConfig, initial_state, lift, number
from noonsim.oracle import noon_state
from noonsim.protocol import ProtocolSpec, compile_schedule

spaces = st.builds(SpaceConfig, st.integers(2, 5), st.integers(2, 5))


def random_state(cfg, seed):
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=cfg.dim) + 1j * rng.normal(size=cfg.dim)
    return psi / np.linalg.norm(psi)


def test_fidelity_with_itself(cfg44):
    psi = cf.vec(cf.noon(2, 1), cfg44)
    assert fidelity(psi, psi) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("N,M", [(1, 1), (2, 3)])
def test_initial_state_orthogonal_to_noon(N, M):
    cfg = SpaceConfig(N + 2, M + 2)
    assert fidelity(initial_state(cfg), noon_state(N, M, cfg)) == 0.0


def test_fidelity_shape_mismatch():
    with pytest.raises(ShapeError):
        fidelity(np.ones(3), np.ones(4))


@given(spaces, st.integers(0, 2**32 - 1), st.floats(-np.pi, np.pi), st.floats(-np.pi, np.pi))
def test_fidelity_symmetric_and_phase_blind(cfg, seed, a, b):
    x, y = random_state(cfg, seed), random_state(cfg, seed + 1)
    f = fidelity(x, y)
    assert f == pytest.approx(fidelity(y, x), abs=1e-14)
    assert f == pytest.approx(fidelity(np.exp(1j * a) * x, np.exp(1j * b) * y), abs=1e-14)
    assert 0.0 <= f <= 1 + 1e-12


def test_product_state_reduces_to_ground(cfg44):
    rho = reduced_state(cf.vec([(1, "g", 0, 0)], cfg44), "qutrit", cfg44)
    expect = np.zeros((3, 3))
    expect[0, 0] = 1
    np.testing.assert_array_equal(rho, expect)


def test_noon_state_purities():
    cfg = SpaceConfig(5, 4)
    psi = cf.vec(cf.noon(3, 2), cfg)
    assert purity(reduced_state(psi, "qutrit", cfg)) == pytest.approx(1.0, abs=1e-15)
    assert purity(reduced_state(psi, "r1r2", cfg)) == pytest.approx(1.0, abs=1e-15)
    assert purity(reduced_state(psi, "r1", cfg)) == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("N", [1, 2, 5])
def test_end_of_first_part_is_entangled(N):
    cfg = SpaceConfig(N + 2, 3)
    psi = cf.vec(cf.after_first_part(N), cfg)
    assert purity(reduced_state(psi, "qutrit", cfg)) == pytest.approx(0.5, abs=1e-15)


@settings(max_examples=40)
@given(spaces, st.integers(0, 2**32 - 1), st.sampled_from(["qutrit", "r1", "r2", "r1r2"]))
def test_reduced_state_is_a_density_matrix(cfg, seed, sub):
    rho = reduced_state(random_state(cfg, seed), sub, cfg)
    np.testing.assert_allclose(rho, rho.conj().T, atol=1e-14)
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
    assert np.min(np.linalg.eigvalsh(rho)) > -1e-10


@settings(max_examples=30)
@given(spaces, st.integers(0, 2**32 - 1))
def test_reduced_state_reproduces_number_expectations(cfg, seed):
    psi = random_state(cfg, seed)
    for slot, sub, d in ((Slot.r1, "r1", cfg.d1), (Slot.r2, "r2", cfg.d2)):
        full = np.vdot(psi, lift(number(d), slot, cfg) @ psi).real
        local = np.trace(reduced_state(psi, sub, cfg) @ number(d)).real
        assert local == pytest.approx(full, abs=1e-10)
        assert photon_statistics(psi, sub, cfg) @ np.arange(d) == pytest.approx(full, abs=1e-10)


def test_photon_statistics_examples():
    cfg = SpaceConfig(5, 4)
    p = photon_statistics(cf.vec(cf.noon(3, 2), cfg), "r1", cfg)
    np.testing.assert_allclose(p, [0.5, 0, 0, 0.5, 0], atol=1e-15)
    np.testing.assert_array_equal(photon_statistics(cf.vec([(1, "g", 0, 0)], cfg), "r2", cfg), [1, 0, 0, 0])
    p = photon_statistics(cf.vec(cf.after_first_swap(), cfg), "r1", cfg)
    np.testing.assert_allclose(p, [0.5, 0.5, 0, 0, 0], atol=1e-15)


def test_field_fidelity_ignores_qutrit_phase():
    cfg = SpaceConfig(3, 3)
    psi = cf.vec([(cf.S, "e", 1, 0), (cf.S, "e", 0, 1)], cfg)
    assert fidelity(psi, noon_state(1, 1, cfg)) == 0.0
    assert field_fidelity(psi, 1, 1, cfg) == pytest.approx(1.0, abs=1e-15)


def test_guard_population():
    cfg = SpaceConfig(4, 4)
    psi = cf.vec([(0.6, "g", 2, 0), (0.8, "e", 3, 1)], cfg)
    assert guard_population(psi, 2, 2, cfg) == pytest.approx(0.64)
    assert guard_population(psi, 3, 2, cfg) == 0.0


@pytest.fixture(scope="module")
def pipeline():
    params = DeviceParams.defaults()
    sch = compile_schedule(ProtocolSpec(2, 1), params)
    run = RunConfig()
    traj = run_schedule(initial_state(sch.space), sch, run, params)
    return traj, sch, params, run


def test_report_contents(pipeline):
    report = build_report(*pipeline)
    assert report.final_fidelity >= 1 - 1e-9
    assert all(f >= 1 - 1e-9 for f in report.per_boundary_fidelity_vs_oracle)
    for dist in report.photon_distribution.values():
        assert sum(dist) == pytest.approx(1.0, abs=1e-9)
    assert report.max_guard_population < 1e-12


def test_report_rounding_and_determinism(pipeline):
    a = json.dumps(build_report(*pipeline).to_dict())
    b = json.dumps(build_report(*pipeline).to_dict())
    assert a == b
    doc = json.loads(a)
    assert doc["N"] == 2 and doc["mode"] == "ideal"
    for v in (doc["timing"]["schedule_sum_s"], doc["final_fidelity"], *doc["photon_distribution"]["r1"]):
        assert float(f"{v:.12g}") == v


def test_populations_table(pipeline):
    traj, sch, _, _ = pipeline
    table = populations_table(traj, sch)
    assert table.shape == (len(traj.sample_times), 7)
    np.testing.assert_allclose(table[:, 1:4].sum(axis=1), 1.0, atol=1e-10)
    assert table[-1, 6] == pytest.approx(1.0, abs=1e-9)
    assert table[-1, 4] == pytest.approx(1.0, abs=1e-9)
