"""Compile (N, M, device) into the ordered pulse/swap schedule and its timing.

Schedule layout (``N`` photons into r1, ``M`` into r2)::

    first part,  j = 1..N   : pi(e<->a), swap(r1, e<->a, rung j)
    branch exchange         : pi(g<->e)
    second part, j = 1..M-1 : pi(e<->a), swap(r2, e<->a, rung j)
    final                   : phase correction, swap(r2, g<->e, rung M)

for ``2N + 2M + 1`` segments in total.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .errors import DomainError, TruncationError
from .hamiltonian import DeviceParams
from .hilbert import Slot, SpaceConfig, Transition

GUARD_LEVELS = 2
SCHEDULE_FORMAT = "noonsim.schedule/1"


class SegmentKind(enum.Enum):
    DrivePulse = "DrivePulse"
    SwapSegment = "SwapSegment"
    PhaseCorrection = "PhaseCorrection"


@dataclass(frozen=True)
class ProtocolSpec:
    N: int
    M: int

    def __post_init__(self):
        for name in ("N", "M"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise DomainError(f"{name} must be an integer >= 1, got {value!r}")

    @property
    def segment_count(self) -> int:
        return 2 * self.N + 2 * self.M + 1


@dataclass(frozen=True)
class ScheduleSegment:
    kind: SegmentKind
    duration: float
    transition: Optional[Transition] = None
    resonator: Optional[Slot] = None
    rung: Optional[int] = None
    amplitude: Optional[float] = None
    phase: float = 0.0
    angles: Optional[Tuple[float, float]] = None
    part: str = ""

    def describe(self) -> str:
        if self.kind is SegmentKind.DrivePulse:
            return f"pi pulse {self.transition.label}"
        if self.kind is SegmentKind.SwapSegment:
            return f"swap {self.resonator.value} {self.transition.label} rung {self.rung}"
        theta_g, theta_e = self.angles
        return f"phase correction (theta_g={theta_g:.6g}, theta_e={theta_e:.6g})"


@dataclass(frozen=True)
class TimingReport:
    """Operation times in seconds.

    The ``*_first``/``*_second`` terms and ``closed_form_total`` evaluate the
    closed-form totals with a j*pi/Omega drive term per step; ``schedule_sum``
    adds up the compiled segment durations (one pi pulse per step).
    """

    drive_time_first: float
    swap_time_first: float
    drive_time_second: float
    swap_time_second: float
    closed_form_total: float
    schedule_sum: float

    @property
    def discrepancy(self) -> float:
        return self.closed_form_total - self.schedule_sum

    @property
    def consistent(self) -> bool:
        return bool(np.isclose(self.closed_form_total, self.schedule_sum, rtol=1e-12, atol=0.0))

    def as_dict(self) -> dict:
        return {
            "drive_time_first_s": self.drive_time_first,
            "swap_time_first_s": self.swap_time_first,
            "drive_time_second_s": self.drive_time_second,
            "swap_time_second_s": self.swap_time_second,
            "closed_form_total_s": self.closed_form_total,
            "schedule_sum_s": self.schedule_sum,
            "discrepancy_s": self.discrepancy,
            "closed_form_matches_schedule": self.consistent,
            "note": (
                "closed_form_total counts j*pi/Omega_ea of drive time at step j; "
                "the compiled schedule applies one pi pulse per step, so the two "
                "agree only for N = M = 1 with equal drive amplitudes"
            ),
        }


@dataclass(frozen=True)
class Schedule:
    spec: ProtocolSpec
    space: SpaceConfig
    segments: Tuple[ScheduleSegment, ...]
    expected_states: Tuple[np.ndarray, ...]
    timing: TimingReport
    labels: Tuple[str, ...] = field(default=())

    def __len__(self):
        return len(self.segments)

    def boundary_times(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum([s.duration for s in self.segments])])

    def to_dict(self) -> dict:
        times = self.boundary_times()
        rows = []
        for k, seg in enumerate(self.segments):
            rows.append(
                {
                    "index": k,
                    "kind": seg.kind.value,
                    "part": seg.part,
                    "transition": seg.transition.label if seg.transition else None,
                    "resonator": seg.resonator.value if seg.resonator else None,
                    "rung": seg.rung,
                    "amplitude_rad_per_s": seg.amplitude,
                    "phase_rad": seg.phase if seg.kind is SegmentKind.DrivePulse else None,
                    "theta_g_rad": seg.angles[0] if seg.angles else None,
                    "theta_e_rad": seg.angles[1] if seg.angles else None,
                    "duration_s": seg.duration,
                    "start_s": float(times[k]),
                    "end_s": float(times[k + 1]),
                    "expected_state": self.labels[k + 1] if self.labels else None,
                }
            )
        return {
            "format": SCHEDULE_FORMAT,
            "N": self.spec.N,
            "M": self.spec.M,
            "truncation": {"d1": self.space.d1, "d2": self.space.d2},
            "basis_order": "level-major (g,e,a), then n1, then n2",
            "initial_state": self.labels[0] if self.labels else None,
            "segments": rows,
            "timing": self.timing.as_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)


def swap_duration(coupling: float, rung: int) -> float:
    """Full |upper, n-1> -> |lower, n> transfer time, pi / (2 g sqrt(n))."""
    return np.pi / (2.0 * coupling * np.sqrt(rung))


def pi_pulse_duration(amplitude: float) -> float:
    return np.pi / amplitude


def phase_correction_angles(N: int, M: int) -> Tuple[float, float]:
    """(theta_g, theta_e) for diag(e^{i theta_g}, e^{i theta_e}, 1) before the last swap.

    Before the correction the |e,0,M-1> branch carries (-1)^M i and the
    |g,N,0> branch carries -(-1)^N i; afterwards they must read i and 1.
    """
    ProtocolSpec(N, M)
    # e^{i theta_e} (-1)^M i = i  and  e^{i theta_g} (-(-1)^N i) = 1
    theta_e = 0.0 if M % 2 == 0 else np.pi
    theta_g = 0.5 * np.pi if N % 2 == 0 else 1.5 * np.pi
    return theta_g, theta_e


def build_segments(spec: ProtocolSpec, params: DeviceParams) -> List[ScheduleSegment]:
    ea, ge = Transition.EA, Transition.GE
    segs: List[ScheduleSegment] = []

    def pulse(transition, part):
        amp = params.drive_amplitude(transition)
        return ScheduleSegment(
            SegmentKind.DrivePulse, pi_pulse_duration(amp), transition=transition, amplitude=amp, part=part
        )

    def swap(resonator, transition, rung, part):
        g = params.coupling(resonator, transition)
        return ScheduleSegment(
            SegmentKind.SwapSegment,
            swap_duration(g, rung),
            transition=transition,
            resonator=resonator,
            rung=rung,
            part=part,
        )

    for j in range(1, spec.N + 1):
        segs += [pulse(ea, "first"), swap(Slot.r1, ea, j, "first")]
    segs.append(pulse(ge, "second"))
    for j in range(1, spec.M):
        segs += [pulse(ea, "second"), swap(Slot.r2, ea, j, "second")]
    segs.append(
        ScheduleSegment(
            SegmentKind.PhaseCorrection, 0.0, angles=phase_correction_angles(spec.N, spec.M), part="final"
        )
    )
    segs.append(swap(Slot.r2, ge, spec.M, "final"))
    return segs


def check_truncation(spec: ProtocolSpec, space: SpaceConfig, guard: int = GUARD_LEVELS) -> None:
    """Require d1 >= N + guard and d2 >= M + guard.

    With the default ``guard=2`` the levels N+1 (resp. M+1) exist, so leakage
    above the target photon number shows up as population instead of being
    clipped. ``guard=1`` is the bare minimum that can hold the protocol.
    """
    need1, need2 = spec.N + guard, spec.M + guard
    if space.d1 < need1 or space.d2 < need2:
        raise TruncationError(
            f"truncation d1={space.d1}, d2={space.d2} too small for N={spec.N}, M={spec.M} "
            f"(need d1 >= {need1}, d2 >= {need2})"
        )


def timing(spec: ProtocolSpec, params: DeviceParams, segments=None) -> TimingReport:
    omega = params.omega_drive_ea
    j1 = np.arange(1, spec.N + 1)
    j2 = np.arange(1, spec.M + 1)
    drive_first = float(np.sum(j1 * np.pi / omega))
    swap_first = float(np.sum(np.pi / (2.0 * params.g1_ea * np.sqrt(j1))))
    drive_second = float(np.sum(j2 * np.pi / omega))
    swap_second = float(np.sum(np.pi / (2.0 * params.g2_ea * np.sqrt(j2))))
    if segments is None:
        segments = build_segments(spec, params)
    return TimingReport(
        drive_first,
        swap_first,
        drive_second,
        swap_second,
        drive_first + swap_first + drive_second + swap_second,
        float(sum(s.duration for s in segments)),
    )


def compile_schedule(
    spec: ProtocolSpec,
    params: DeviceParams,
    space: Optional[SpaceConfig] = None,
    require_guard: bool = True,
) -> Schedule:
    """Ordered segments, oracle states at every boundary, and timing."""
    from . import oracle

    space = space or SpaceConfig.for_protocol(spec.N, spec.M, GUARD_LEVELS)
    check_truncation(spec, space, GUARD_LEVELS if require_guard else 1)
    segments = tuple(build_segments(spec, params))
    states = tuple(oracle.compose(segments, space))
    labels = tuple(oracle.format_state(s, space) for s in states)
    return Schedule(spec, space, segments, states, timing(spec, params, segments), labels)
