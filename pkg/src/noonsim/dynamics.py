"""Propagate states through a compiled schedule.

Every segment is exponentiated exactly from the Hermitian eigendecomposition
of its (time-independent) rotating-frame generator. States are kept in the
interaction picture of the piecewise free Hamiltonian, which is the frame the
oracle states are written in.

Two modes:

* ``ideal``: only the coupling a segment targets is switched on and drives
  address one transition; this must reproduce the oracle.
* ``finite_detuning``: idle resonators are parked a detuning ``Delta`` above
  the highest qutrit transition with both their couplings left on, and each
  drive also hits the other transition (detuned by the anharmonicity). The
  resonant resonator's coupling to the other transition is treated as tuned
  off (a tunable coupler) unless ``resonant_cross_coupling`` is set.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import List, Optional

import numpy as np
from scipy import linalg

from .errors import ConfigurationError, IntegrityError, NoonSimError, NumericalFailure, StepSizeError
from .hamiltonian import (
    COUPLINGS,
    DeviceParams,
    SegmentHamiltonian,
    Tuning,
    build_drive,
    build_static,
    drive_term,
    excitation_frame,
    qutrit_phase_gate,
    to_rotating_frame,
)
from .hilbert import Slot, SpaceConfig, Transition, excitation_number, is_hermitian
from .protocol import Schedule, ScheduleSegment, SegmentKind

DEFAULT_SAMPLES = 32


class Mode(enum.Enum):
    ideal = "ideal"
    finite_detuning = "finite_detuning"


@dataclass(frozen=True)
class RunConfig:
    mode: Mode = Mode.ideal
    detuning: Optional[float] = None
    sample_points_per_segment: int = DEFAULT_SAMPLES
    norm_tolerance: float = 1e-10
    drive_leakage: bool = True
    resonant_cross_coupling: bool = False

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.mode is Mode.finite_detuning and not (self.detuning and self.detuning > 0):
            raise ConfigurationError("finite_detuning mode needs a detuning > 0 (rad/s)")
        if int(self.sample_points_per_segment) < 1:
            raise ConfigurationError("sample_points_per_segment must be >= 1")
        if not self.norm_tolerance > 0:
            raise ConfigurationError("norm_tolerance must be > 0")

    @classmethod
    def finite(cls, detuning_over_g: float, params: DeviceParams, **kw) -> "RunConfig":
        return cls(Mode.finite_detuning, detuning_over_g * reference_coupling(params), **kw)


def reference_coupling(params: DeviceParams) -> float:
    """Coupling that detuning ratios (Delta/g) are quoted against: the largest one."""
    return max(params.g1_ge, params.g1_ea, params.g2_ge, params.g2_ea)


def parked_frequency(params: DeviceParams, detuning: float) -> float:
    return max(params.omega_ge, params.omega_ea) + detuning


def segment_tuning(seg: ScheduleSegment, params: DeviceParams, cfg: RunConfig) -> Tuning:
    if cfg.mode is Mode.ideal:
        idle = {Slot.r1: params.omega_r1, Slot.r2: params.omega_r2}
        active = frozenset()
    else:
        park = parked_frequency(params, cfg.detuning)
        idle = {Slot.r1: park, Slot.r2: park}
        active = frozenset(COUPLINGS)
    if seg.kind is SegmentKind.SwapSegment:
        idle[seg.resonator] = params.transition_frequency(seg.transition)
        if cfg.mode is Mode.ideal:
            active = frozenset({(seg.resonator, seg.transition)})
        elif not cfg.resonant_cross_coupling:
            active = frozenset(c for c in active if c[0] is not seg.resonator or c[1] is seg.transition)
    return Tuning(idle[Slot.r1], idle[Slot.r2], active)


def segment_hamiltonian(
    seg: ScheduleSegment, params: DeviceParams, space: SpaceConfig, cfg: RunConfig
) -> SegmentHamiltonian:
    """Rotating-frame generator for a drive or swap segment."""
    if seg.kind is SegmentKind.PhaseCorrection:
        raise ValueError("phase corrections are instantaneous and have no Hamiltonian")
    if cfg.mode is Mode.ideal and seg.kind is SegmentKind.DrivePulse:
        return build_drive(seg.transition, seg.amplitude, seg.phase, space, seg.duration)

    tuning = segment_tuning(seg, params, cfg)
    lab = build_static(params, space, tuning, seg.duration)
    if cfg.mode is Mode.ideal:
        # resonant: the free part commutes with the single active coupling
        return to_rotating_frame(lab, lab.frame.free, label=f"resonant {seg.describe()}")

    carrier = params.transition_frequency(seg.transition)
    moved = to_rotating_frame(lab, excitation_frame(carrier, space), label=f"N_exc @ {seg.describe()}")
    if seg.kind is SegmentKind.SwapSegment:
        return moved
    h = moved.matrix + drive_term(seg.transition, seg.amplitude, seg.phase, space)
    if cfg.drive_leakage:
        other = Transition.GE if seg.transition is Transition.EA else Transition.EA
        h = h + drive_term(other, seg.amplitude, seg.phase, space)
    return SegmentHamiltonian(h, moved.frame, seg.duration)


class SegmentPropagator:
    """exp(-iHt) from one eigendecomposition, followed by the frame's return phases."""

    def __init__(self, hamiltonian):
        if isinstance(hamiltonian, SegmentHamiltonian):
            matrix, self._frame = hamiltonian.matrix, hamiltonian.frame
        else:
            matrix, self._frame = np.asarray(hamiltonian, dtype=complex), None
            if not is_hermitian(matrix):
                raise IntegrityError("generator is not Hermitian")
        self.evals, self.evecs = linalg.eigh(matrix)

    def apply(self, psi: np.ndarray, t: float) -> np.ndarray:
        out = self.evecs @ (np.exp(-1j * self.evals * t) * (self.evecs.conj().T @ psi))
        if self._frame is not None:
            out = self._frame.return_phases(t) * out
        return out

    def matrix(self, t: float) -> np.ndarray:
        u = (self.evecs * np.exp(-1j * self.evals * t)) @ self.evecs.conj().T
        if self._frame is not None:
            u = self._frame.return_phases(t)[:, None] * u
        return u


def _check_norm(psi: np.ndarray, tol: float, segment_index=None) -> float:
    drift = abs(float(np.linalg.norm(psi)) - 1.0)
    if not np.all(np.isfinite(psi)):
        raise NumericalFailure("non-finite amplitude", segment_index)
    if drift > tol:
        raise NumericalFailure(f"norm drift {drift:.3e} exceeds {tol:.1e}", segment_index)
    return drift


def propagate_segment(
    state: np.ndarray, hamiltonian, duration: Optional[float] = None, norm_tolerance: float = 1e-10
) -> np.ndarray:
    """exp(-i H duration) state, returned to the interaction picture of H's frame."""
    if duration is None:
        duration = hamiltonian.duration
    _check_norm(state, norm_tolerance)
    out = SegmentPropagator(hamiltonian).apply(np.asarray(state, dtype=complex), duration)
    _check_norm(out, norm_tolerance)
    return out


@dataclass
class Trajectory:
    boundary_states: List[np.ndarray]
    boundary_times: np.ndarray
    sample_times: np.ndarray
    sample_states: np.ndarray
    sample_segment: np.ndarray
    norm_drift: np.ndarray
    excitation: np.ndarray
    mode: Mode = Mode.ideal

    @property
    def final_state(self) -> np.ndarray:
        return self.boundary_states[-1]


def run_schedule(
    initial: np.ndarray,
    schedule: Schedule,
    cfg: RunConfig,
    params: DeviceParams,
) -> Trajectory:
    space = schedule.space
    n_exc = excitation_number(space)
    psi = np.asarray(initial, dtype=complex)
    _check_norm(psi, cfg.norm_tolerance, 0)
    t0 = 0.0
    boundaries, times = [psi], [0.0]
    s_times, s_states, s_seg = [0.0], [psi], [-1]
    drifts = [abs(np.linalg.norm(psi) - 1.0)]
    for k, seg in enumerate(schedule.segments):
        try:
            if seg.kind is SegmentKind.PhaseCorrection:
                psi = qutrit_phase_gate(*seg.angles, space) * psi
                local = [(0.0, psi)]
            else:
                prop = SegmentPropagator(segment_hamiltonian(seg, params, space, cfg))
                n = int(cfg.sample_points_per_segment)
                local = [(seg.duration * j / n, prop.apply(psi, seg.duration * j / n)) for j in range(1, n + 1)]
                psi = local[-1][1]
            drifts.append(_check_norm(psi, cfg.norm_tolerance, k))
        except NumericalFailure as exc:
            if exc.segment_index is None:
                raise NumericalFailure(str(exc), k) from exc
            raise
        except NoonSimError as exc:
            raise NumericalFailure(f"{seg.describe()}: {exc}", k) from exc
        for t, state in local:
            s_times.append(t0 + t)
            s_states.append(state)
            s_seg.append(k)
        t0 += seg.duration
        boundaries.append(psi)
        times.append(t0)
    states = np.array(s_states)
    excitation = np.einsum("ij,j,ij->i", states.conj(), n_exc, states).real
    return Trajectory(
        boundaries,
        np.array(times),
        np.array(s_times),
        states,
        np.array(s_seg),
        np.array(drifts),
        excitation,
        cfg.mode,
    )


def rk4_evolve(matrix: np.ndarray, psi: np.ndarray, duration: float, dt: float) -> np.ndarray:
    """Classical fourth-order Runge-Kutta for d(psi)/dt = -i H psi, landing exactly on ``duration``."""
    steps = max(1, math.ceil(duration / dt - 1e-9))
    h = duration / steps
    gen = -1j * np.asarray(matrix, dtype=complex)
    y = np.asarray(psi, dtype=complex).copy()
    for _ in range(steps):
        k1 = gen @ y
        k2 = gen @ (y + 0.5 * h * k1)
        k3 = gen @ (y + 0.5 * h * k2)
        k4 = gen @ (y + h * k3)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def cross_validate(
    initial: np.ndarray,
    schedule: Schedule,
    cfg: RunConfig,
    params: DeviceParams,
    dt: float,
    instability_tolerance: float = 1e-6,
) -> float:
    """Max amplitude deviation between RK4 and exact boundary states."""
    if not dt > 0:
        raise StepSizeError("dt must be > 0")
    exact = run_schedule(initial, schedule, replace(cfg, sample_points_per_segment=1), params)
    space = schedule.space
    psi = np.asarray(initial, dtype=complex)
    worst = 0.0
    for k, seg in enumerate(schedule.segments):
        if seg.kind is SegmentKind.PhaseCorrection:
            psi = qutrit_phase_gate(*seg.angles, space) * psi
        else:
            h = segment_hamiltonian(seg, params, space, cfg)
            psi = h.frame.return_phases(seg.duration) * rk4_evolve(h.matrix, psi, seg.duration, dt)
            drift = abs(np.linalg.norm(psi) - 1.0)
            if drift > instability_tolerance or not np.all(np.isfinite(psi)):
                raise StepSizeError(f"RK4 norm drift {drift:.3e} at dt={dt:.3e}", k)
        worst = max(worst, float(np.max(np.abs(psi - exact.boundary_states[k + 1]))))
    return worst
