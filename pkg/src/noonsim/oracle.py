"""Closed-form ideal gates for each segment kind.

Each gate is a phased permutation written out label by label, so composing
them from the initial state gives the exact ideal state at every schedule
boundary, branch phases included.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .errors import BoundsError, IntegrityError
from .hilbert import (
    BasisLabel,
    Level,
    Slot,
    SpaceConfig,
    Transition,
    basis_index,
    basis_label,
    initial_state,
)

RUNG_SUPPORT_TOL = 1e-12


@dataclass(frozen=True)
class IdealGate:
    """Sparse action ``source -> (amplitude, target)``; identity off the support."""

    name: str
    action: Dict[BasisLabel, Tuple[complex, BasisLabel]]
    # labels the physical coupling would touch; used for the rung-occupancy check
    watched: Tuple[BasisLabel, ...] = ()

    def matrix(self, cfg: SpaceConfig) -> np.ndarray:
        u = np.eye(cfg.dim, dtype=complex)
        for src, (amp, dst) in self.action.items():
            i, j = basis_index(src, cfg), basis_index(dst, cfg)
            u[:, i] = 0.0
            u[j, i] = amp
        return u

    def apply(self, psi: np.ndarray, cfg: SpaceConfig) -> np.ndarray:
        out = psi.astype(complex).copy()
        moved = [(basis_index(src, cfg), amp, basis_index(dst, cfg)) for src, (amp, dst) in self.action.items()]
        for i, _, _ in moved:
            out[i] = 0.0
        for i, amp, j in moved:
            out[j] += amp * psi[i]
        return out


def ideal_pi_pulse(transition: Transition, cfg: SpaceConfig, phase: float = 0.0) -> IdealGate:
    lo, up = transition.lower, transition.upper
    fwd = -1j * np.exp(-1j * phase)
    back = -1j * np.exp(1j * phase)
    action = {}
    for n1 in range(cfg.d1):
        for n2 in range(cfg.d2):
            action[BasisLabel(lo, n1, n2)] = (fwd, BasisLabel(up, n1, n2))
            action[BasisLabel(up, n1, n2)] = (back, BasisLabel(lo, n1, n2))
    return IdealGate(f"pi {transition.label}", action)


def _with_photons(level: Level, resonator: Slot, n: int, other: int) -> BasisLabel:
    return BasisLabel(level, n, other) if resonator is Slot.r1 else BasisLabel(level, other, n)


def ideal_swap(resonator: Slot, transition: Transition, rung: int, cfg: SpaceConfig) -> IdealGate:
    """|upper, n-1> <-> -i |lower, n> on one resonator, for rung n only."""
    resonator = Slot(resonator)
    d_here = cfg.slot_dim(resonator)
    d_other = cfg.d2 if resonator is Slot.r1 else cfg.d1
    if rung < 1 or rung >= d_here:
        raise BoundsError(f"rung {rung} outside 1..{d_here - 1} for {resonator.value}")
    lo, up = transition.lower, transition.upper
    action = {}
    for m in range(d_other):
        src = _with_photons(up, resonator, rung - 1, m)
        dst = _with_photons(lo, resonator, rung, m)
        action[src] = (-1j, dst)
        action[dst] = (-1j, src)
    watched = []
    for m in range(d_other):
        for n in range(d_here):
            if n != rung - 1 and n + 1 < d_here:
                watched.append(_with_photons(up, resonator, n, m))
            if n not in (0, rung):
                watched.append(_with_photons(lo, resonator, n, m))
    return IdealGate(f"swap {resonator.value} {transition.label} rung {rung}", action, tuple(watched))


def ideal_phase_correction(theta_g: float, theta_e: float, cfg: SpaceConfig) -> IdealGate:
    action = {}
    for level, theta in ((Level.g, theta_g), (Level.e, theta_e)):
        for n1 in range(cfg.d1):
            for n2 in range(cfg.d2):
                lab = BasisLabel(level, n1, n2)
                action[lab] = (np.exp(1j * theta), lab)
    return IdealGate("phase correction", action)


def gate_for_segment(segment, cfg: SpaceConfig) -> IdealGate:
    from .protocol import SegmentKind

    if segment.kind is SegmentKind.DrivePulse:
        return ideal_pi_pulse(segment.transition, cfg, segment.phase)
    if segment.kind is SegmentKind.SwapSegment:
        return ideal_swap(segment.resonator, segment.transition, segment.rung, cfg)
    return ideal_phase_correction(*segment.angles, cfg)


def check_rung_support(gate: IdealGate, psi: np.ndarray, cfg: SpaceConfig) -> float:
    """Population on rungs the physical coupling would move but the ideal gate ignores."""
    if not gate.watched:
        return 0.0
    idx = [basis_index(lab, cfg) for lab in gate.watched]
    stray = float(np.sum(np.abs(psi[idx]) ** 2))
    if stray > RUNG_SUPPORT_TOL:
        raise IntegrityError(f"{gate.name}: population {stray:.3e} outside the targeted rung")
    return stray


def compose(segments: Sequence, cfg: SpaceConfig, psi0: np.ndarray = None) -> List[np.ndarray]:
    """Boundary states: the initial state followed by the state after each segment."""
    psi = initial_state(cfg) if psi0 is None else np.asarray(psi0, dtype=complex)
    states = [psi]
    for seg in segments:
        gate = gate_for_segment(seg, cfg)
        check_rung_support(gate, psi, cfg)
        psi = gate.apply(psi, cfg)
        states.append(psi)
    return states


def expected_state(spec, k: int, params=None, space: SpaceConfig = None) -> np.ndarray:
    """Ideal state at boundary ``k`` (0 = initial, len(schedule) = final)."""
    from .hamiltonian import DeviceParams
    from .protocol import GUARD_LEVELS, build_segments

    params = params or DeviceParams.defaults()
    segments = build_segments(spec, params)
    if not 0 <= k <= len(segments):
        raise BoundsError(f"boundary {k} outside 0..{len(segments)}")
    space = space or SpaceConfig.for_protocol(spec.N, spec.M, GUARD_LEVELS)
    return compose(segments[:k], space)[-1]


def noon_state(N: int, M: int, cfg: SpaceConfig) -> np.ndarray:
    """(|N,0> + |0,M>)/sqrt(2) with the qutrit in |g>."""
    psi = np.zeros(cfg.dim, dtype=complex)
    psi[basis_index(BasisLabel(Level.g, N, 0), cfg)] += 1 / np.sqrt(2)
    psi[basis_index(BasisLabel(Level.g, 0, M), cfg)] += 1 / np.sqrt(2)
    return psi


def _fmt_complex(z: complex) -> str:
    re, im = round(z.real, 6) + 0.0, round(z.imag, 6) + 0.0
    if im == 0:
        return f"{re:g}"
    if re == 0:
        return f"{im:g}i"
    return f"({re:g}{im:+g}i)"


def format_state(psi: np.ndarray, cfg: SpaceConfig, tol: float = 1e-9) -> str:
    """Compact ket string of the non-negligible amplitudes."""
    terms = [f"{_fmt_complex(psi[i])}|{basis_label(i, cfg)}>" for i in np.flatnonzero(np.abs(psi) > tol)]
    return " + ".join(terms) if terms else "0"


def unitarity_error(gate: IdealGate, cfg: SpaceConfig) -> float:
    u = gate.matrix(cfg)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(cfg.dim))))

