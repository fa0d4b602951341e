"""Fidelities, reduced states, photon statistics and the run report."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from .errors import ShapeError
from .hamiltonian import DeviceParams, TWO_PI
from .hilbert import SpaceConfig, excitation_number
from .oracle import noon_state
from .protocol import Schedule, SegmentKind, TimingReport

SUBSYSTEMS = ("qutrit", "r1", "r2", "r1r2")
REPORT_FORMAT = "noonsim.report/1"
SIG_DIGITS = 12


def fidelity(state: np.ndarray, target: np.ndarray) -> float:
    """|<target|state>|^2 for pure states."""
    state, target = np.asarray(state), np.asarray(target)
    if state.shape != target.shape:
        raise ShapeError(f"state shape {state.shape} does not match target {target.shape}")
    return float(abs(np.vdot(target, state)) ** 2)


def _tensor(psi: np.ndarray, cfg: SpaceConfig) -> np.ndarray:
    psi = np.asarray(psi)
    if psi.shape != (cfg.dim,):
        raise ShapeError(f"expected a state of length {cfg.dim}, got {psi.shape}")
    return psi.reshape(3, cfg.d1, cfg.d2)


def reduced_state(psi: np.ndarray, subsystem: str, cfg: SpaceConfig) -> np.ndarray:
    """Partial trace onto ``qutrit``, ``r1``, ``r2`` or ``r1r2`` (field, r1-major)."""
    t = _tensor(psi, cfg)
    if subsystem == "qutrit":
        return np.einsum("imn,jmn->ij", t, t.conj())
    if subsystem == "r1":
        return np.einsum("qim,qjm->ij", t, t.conj())
    if subsystem == "r2":
        return np.einsum("qmi,qmj->ij", t, t.conj())
    if subsystem in ("r1r2", "field"):
        flat = t.reshape(3, cfg.d1 * cfg.d2)
        return flat.T @ flat.conj()
    raise ValueError(f"unknown subsystem {subsystem!r}; expected one of {SUBSYSTEMS}")


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.trace(rho @ rho)))


def photon_statistics(psi: np.ndarray, resonator: str, cfg: SpaceConfig) -> np.ndarray:
    p = np.abs(_tensor(psi, cfg)) ** 2
    if resonator == "r1":
        return p.sum(axis=(0, 2))
    if resonator == "r2":
        return p.sum(axis=(0, 1))
    raise ValueError(f"unknown resonator {resonator!r}")


def level_populations(psi: np.ndarray, cfg: SpaceConfig) -> np.ndarray:
    return (np.abs(_tensor(psi, cfg)) ** 2).sum(axis=(1, 2))


def field_fidelity(psi: np.ndarray, N: int, M: int, cfg: SpaceConfig) -> float:
    """<NOON| rho_field |NOON> after tracing out the qutrit."""
    noon = noon_state(N, M, cfg).reshape(3, -1)[0]
    rho = reduced_state(psi, "r1r2", cfg)
    return float(np.real(noon.conj() @ rho @ noon))


def guard_population(psi: np.ndarray, N: int, M: int, cfg: SpaceConfig) -> float:
    """Population with more than N photons in r1 or more than M in r2."""
    p = np.abs(_tensor(psi, cfg)) ** 2
    n1 = np.arange(cfg.d1)[None, :, None]
    n2 = np.arange(cfg.d2)[None, None, :]
    return float(p[np.broadcast_to((n1 > N) | (n2 > M), p.shape)].sum())


def max_deviation(states_a, states_b) -> np.ndarray:
    return np.array([float(np.max(np.abs(a - b))) for a, b in zip(states_a, states_b)])


def swap_excitation_drift(trajectory, schedule: Schedule) -> float:
    """Largest spread of <N_exc> within any swap segment (segment start included)."""
    n_exc = excitation_number(schedule.space)
    worst = 0.0
    for k, seg in enumerate(schedule.segments):
        if seg.kind is not SegmentKind.SwapSegment:
            continue
        start = trajectory.boundary_states[k]
        values = [float(np.real(np.vdot(start, n_exc * start)))]
        values += list(trajectory.excitation[trajectory.sample_segment == k])
        worst = max(worst, max(values) - min(values))
    return worst


def _round(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(f"{float(x):.{SIG_DIGITS}g}") + 0.0
    if isinstance(x, dict):
        return {k: _round(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_round(v) for v in x]
    return x


@dataclass
class RunReport:
    N: int
    M: int
    mode: str
    final_fidelity: float
    field_fidelity: float
    per_boundary_fidelity_vs_oracle: List[float]
    per_boundary_max_deviation: List[float]
    qutrit_purity_final: float
    photon_distribution: Dict[str, List[float]]
    timing: TimingReport
    max_norm_drift: float
    swap_excitation_drift: float
    max_guard_population: float
    parameters_hz: Dict[str, float]
    run_settings: Dict[str, object] = field(default_factory=dict)

    def to_dict(self) -> dict:
        body = {
            "format": REPORT_FORMAT,
            "N": self.N,
            "M": self.M,
            "mode": self.mode,
            "final_fidelity": self.final_fidelity,
            "field_fidelity": self.field_fidelity,
            "qutrit_purity_final": self.qutrit_purity_final,
            "per_boundary_fidelity_vs_oracle": self.per_boundary_fidelity_vs_oracle,
            "per_boundary_max_deviation": self.per_boundary_max_deviation,
            "photon_distribution": self.photon_distribution,
            "diagnostics": {
                "max_norm_drift": self.max_norm_drift,
                "swap_excitation_drift": self.swap_excitation_drift,
                "max_guard_population": self.max_guard_population,
            },
            "timing": self.timing.as_dict(),
            "parameters_hz": self.parameters_hz,
            "units": {
                "frequencies": "Hz in this echo; multiplied by 2*pi internally (rad/s)",
                "angular_per_hz": TWO_PI,
                "times": "s",
            },
            "run_settings": self.run_settings,
        }
        return _round(body)


def build_report(trajectory, schedule: Schedule, params: DeviceParams, run_cfg) -> RunReport:
    space = schedule.space
    N, M = schedule.spec.N, schedule.spec.M
    final = trajectory.final_state
    target = noon_state(N, M, space)
    settings = {
        "detuning_rad_per_s": run_cfg.detuning,
        "sample_points_per_segment": run_cfg.sample_points_per_segment,
        "norm_tolerance": run_cfg.norm_tolerance,
        "drive_leakage": run_cfg.drive_leakage,
        "resonant_cross_coupling": run_cfg.resonant_cross_coupling,
        "truncation": {"d1": space.d1, "d2": space.d2},
    }
    return RunReport(
        N=N,
        M=M,
        mode=run_cfg.mode.value,
        final_fidelity=fidelity(final, target),
        field_fidelity=field_fidelity(final, N, M, space),
        per_boundary_fidelity_vs_oracle=[
            fidelity(s, o) for s, o in zip(trajectory.boundary_states, schedule.expected_states)
        ],
        per_boundary_max_deviation=list(max_deviation(trajectory.boundary_states, schedule.expected_states)),
        qutrit_purity_final=purity(reduced_state(final, "qutrit", space)),
        photon_distribution={
            "r1": list(photon_statistics(final, "r1", space)),
            "r2": list(photon_statistics(final, "r2", space)),
        },
        timing=schedule.timing,
        max_norm_drift=float(np.max(trajectory.norm_drift)),
        swap_excitation_drift=swap_excitation_drift(trajectory, schedule),
        max_guard_population=max(guard_population(s, N, M, space) for s in trajectory.boundary_states),
        parameters_hz=params.to_hz(),
        run_settings=settings,
    )


def populations_table(trajectory, schedule: Schedule) -> np.ndarray:
    """Rows of (time_s, P_g, P_e, P_a, mean_n1, mean_n2, fidelity_to_target)."""
    space = schedule.space
    target = noon_state(schedule.spec.N, schedule.spec.M, space)
    n1 = np.arange(space.d1)
    n2 = np.arange(space.d2)
    rows = []
    for t, psi in zip(trajectory.sample_times, trajectory.sample_states):
        p = np.abs(psi.reshape(3, space.d1, space.d2)) ** 2
        rows.append(
            [
                t,
                *p.sum(axis=(1, 2)),
                float(p.sum(axis=(0, 2)) @ n1),
                float(p.sum(axis=(0, 1)) @ n2),
                fidelity(psi, target),
            ]
        )
    return np.array(rows)
