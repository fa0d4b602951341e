"""Segment Hamiltonians for the qutrit coupled to two tunable resonators.

Energies are angular frequencies (rad/s, hbar = 1) with E_g = 0 as the
reference. Between segments the resonator frequencies are retuned
instantaneously; within a segment every generator is time independent in
the rotating frame it carries.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import Optional

import numpy as np

from .errors import ConfigurationError, IntegrityError, UnsupportedFrameError
from .hilbert import (
    Level,
    Slot,
    SpaceConfig,
    Transition,
    annihilation,
    excitation_number,
    is_hermitian,
    lift,
    projector,
    sigma_minus,
)

TWO_PI = 2.0 * np.pi
RESONATORS = (Slot.r1, Slot.r2)
COUPLINGS = tuple((r, t) for r in RESONATORS for t in Transition)


@dataclass(frozen=True)
class DeviceParams:
    """Device constants, all angular frequencies in rad/s."""

    omega_ge: float
    omega_ea: float
    omega_r1: float
    omega_r2: float
    g1_ge: float
    g1_ea: float
    g2_ge: float
    g2_ea: float
    omega_drive_ge: float
    omega_drive_ea: float

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not np.isfinite(value) or value <= 0:
                raise ConfigurationError(f"{f.name} must be finite and > 0, got {value!r}")
        if self.omega_ge == self.omega_ea:
            raise ConfigurationError("qutrit transitions must differ (zero anharmonicity)")

    @classmethod
    def defaults(
        cls,
        g_hz: float = 50e6,
        anharmonicity_hz: float = 500e6,
        drive_hz: float = 25e6,
        omega_ge_hz: float = 6.0e9,
    ) -> "DeviceParams":
        """Representative circuit-QED magnitudes; every value is an angular frequency."""
        return cls.from_hz(
            omega_ge=omega_ge_hz,
            omega_ea=omega_ge_hz - anharmonicity_hz,
            omega_r1=omega_ge_hz + 1.0e9,
            omega_r2=omega_ge_hz + 1.5e9,
            g1_ge=g_hz,
            g1_ea=g_hz,
            g2_ge=g_hz,
            g2_ea=g_hz,
            omega_drive_ge=drive_hz,
            omega_drive_ea=drive_hz,
        )

    @classmethod
    def from_hz(cls, **values_hz: float) -> "DeviceParams":
        return cls(**{k: TWO_PI * float(v) for k, v in values_hz.items()})

    def to_hz(self) -> dict:
        return {f.name: getattr(self, f.name) / TWO_PI for f in fields(self)}

    def transition_frequency(self, transition: Transition) -> float:
        return self.omega_ge if transition is Transition.GE else self.omega_ea

    def coupling(self, resonator: Slot, transition: Transition) -> float:
        idx = "1" if Slot(resonator) is Slot.r1 else "2"
        suffix = "ge" if transition is Transition.GE else "ea"
        return getattr(self, f"g{idx}_{suffix}")

    def drive_amplitude(self, transition: Transition) -> float:
        return self.omega_drive_ge if transition is Transition.GE else self.omega_drive_ea

    @property
    def anharmonicity(self) -> float:
        """omega_ea - omega_ge (signed)."""
        return self.omega_ea - self.omega_ge

    def with_(self, **changes) -> "DeviceParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class Tuning:
    """Effective resonator frequencies and switched-on couplings for one segment."""

    omega_r1: float
    omega_r2: float
    active: frozenset = field(default_factory=lambda: frozenset(COUPLINGS))

    @classmethod
    def nominal(cls, params: DeviceParams, active=None) -> "Tuning":
        return cls(params.omega_r1, params.omega_r2, frozenset(COUPLINGS if active is None else active))

    def resonator_frequency(self, resonator: Slot) -> float:
        return self.omega_r1 if Slot(resonator) is Slot.r1 else self.omega_r2


@dataclass(frozen=True)
class RotatingFrame:
    """Diagonal frame generator plus the free energies it is measured against.

    ``residual`` (free minus generator) is what must be undone after
    propagating in this frame to return to the interaction picture of the
    segment's free Hamiltonian.
    """

    label: str
    generator: np.ndarray
    free: np.ndarray

    @property
    def residual(self) -> np.ndarray:
        return self.free - self.generator

    def return_phases(self, t: float) -> np.ndarray:
        return np.exp(1j * self.residual * t)


@dataclass(frozen=True)
class SegmentHamiltonian:
    matrix: np.ndarray
    frame: RotatingFrame
    duration: Optional[float] = None

    def __post_init__(self):
        if not is_hermitian(self.matrix, atol=_herm_atol(self.matrix)):
            raise IntegrityError(f"{self.frame.label} Hamiltonian is not Hermitian")
        if self.duration is not None and not self.duration > 0:
            raise ConfigurationError(f"segment duration must be > 0, got {self.duration!r}")


def _herm_atol(matrix: np.ndarray) -> float:
    # lab-frame entries reach ~1e10 rad/s; the 1e-12 bound is relative to that scale
    scale = max(1.0, float(np.max(np.abs(matrix))) if matrix.size else 1.0)
    return 1e-12 * scale


def free_diagonal(params: DeviceParams, cfg: SpaceConfig, tuning: Tuning) -> np.ndarray:
    energies = {Level.g: 0.0, Level.e: params.omega_ge, Level.a: params.omega_ge + params.omega_ea}
    n1 = np.arange(cfg.d1)
    n2 = np.arange(cfg.d2)
    field_part = (tuning.omega_r1 * n1)[:, None] + (tuning.omega_r2 * n2)[None, :]
    return np.concatenate([energies[lv] + field_part.ravel() for lv in Level])


def coupling_term(resonator: Slot, transition: Transition, cfg: SpaceConfig) -> np.ndarray:
    """a^dag sigma^- + a sigma^+ for one resonator and one qutrit transition."""
    a = lift(annihilation(cfg.slot_dim(resonator)), resonator, cfg)
    sm = lift(sigma_minus(transition), Slot.qutrit, cfg)
    x = a.conj().T @ sm
    return x + x.conj().T


def build_static(
    params: DeviceParams,
    cfg: SpaceConfig,
    tuning: Optional[Tuning] = None,
    duration: Optional[float] = None,
) -> SegmentHamiltonian:
    """Lab-frame RWA Hamiltonian for one segment's tuning."""
    tuning = tuning or Tuning.nominal(params)
    free = free_diagonal(params, cfg, tuning)
    h = np.diag(free).astype(complex)
    for resonator, transition in COUPLINGS:
        if (resonator, transition) in tuning.active:
            h += params.coupling(resonator, transition) * coupling_term(resonator, transition, cfg)
    zero = np.zeros(cfg.dim)
    return SegmentHamiltonian(h, RotatingFrame("lab", zero, free), duration)


def drive_term(
    transition: Transition, amplitude: float, phase: float, cfg: SpaceConfig
) -> np.ndarray:
    sm = lift(sigma_minus(transition), Slot.qutrit, cfg)
    half = 0.5 * amplitude
    return half * (np.exp(-1j * phase) * sm.conj().T + np.exp(1j * phase) * sm)


def build_drive(
    transition: Transition,
    amplitude: float,
    phase: float,
    cfg: SpaceConfig,
    duration: Optional[float] = None,
) -> SegmentHamiltonian:
    """Resonant drive in the frame rotating at the drive frequency.

    H = (amplitude/2)(exp(-i phase) sigma^+ + exp(i phase) sigma^-), so a
    pulse of length pi/amplitude maps |lower> -> -i exp(-i phase)|upper>.
    """
    transition = Transition.parse(transition) if isinstance(transition, str) else Transition(transition)
    zero = np.zeros(cfg.dim)
    h = drive_term(transition, amplitude, phase, cfg)
    return SegmentHamiltonian(h, RotatingFrame(f"drive {transition.label}", zero, zero), duration)


def to_rotating_frame(
    hamiltonian: SegmentHamiltonian, generator: np.ndarray, t: float = 0.0, label: str = "rotating"
) -> SegmentHamiltonian:
    """R H R^dag - G with R = exp(iGt); G must be diagonal.

    Accepts G either as a diagonal vector or as a square matrix.
    """
    g = np.asarray(generator)
    if g.ndim == 2:
        off = g - np.diag(np.diag(g))
        if np.any(np.abs(off) > 0):
            raise UnsupportedFrameError("frame generator must be diagonal in the product basis")
        g = np.diag(g)
    g = np.real_if_close(g).astype(float)
    r = np.exp(1j * g * t)
    h = hamiltonian.matrix
    moved = (r[:, None] * h * r.conj()[None, :]) - np.diag(g)
    frame = RotatingFrame(label, hamiltonian.frame.generator + g, hamiltonian.frame.free)
    return SegmentHamiltonian(moved, frame, hamiltonian.duration)


def excitation_frame(carrier: float, cfg: SpaceConfig) -> np.ndarray:
    """carrier * N_exc; commutes with every undriven segment Hamiltonian."""
    return carrier * excitation_number(cfg)


def qutrit_phase_gate(theta_g: float, theta_e: float, cfg: SpaceConfig) -> np.ndarray:
    """diag(exp(i theta_g), exp(i theta_e), 1) on the qutrit, as a diagonal vector."""
    q = np.array([np.exp(1j * theta_g), np.exp(1j * theta_e), 1.0])
    return np.repeat(q, cfg.d1 * cfg.d2)


def total_excitation_operator(cfg: SpaceConfig) -> np.ndarray:
    n1 = lift(np.diag(np.arange(cfg.d1)).astype(complex), Slot.r1, cfg)
    n2 = lift(np.diag(np.arange(cfg.d2)).astype(complex), Slot.r2, cfg)
    q = lift(projector(Level.e) + 2 * projector(Level.a), Slot.qutrit, cfg)
    return n1 + n2 + q
