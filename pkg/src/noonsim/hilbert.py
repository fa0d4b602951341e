"""Basis, states and elementary operators on qutrit x Fock(r1) x Fock(r2).

The joint basis is ordered level-major, then n1, then n2::

    index = level * d1 * d2 + n1 * d2 + n2

and that ordering is used everywhere, including file outputs.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import BoundsError, ConfigurationError, ShapeError, UnsupportedTransitionError

HERMITIAN_ATOL = 1e-12
UNITARY_ATOL = 1e-10


class Level(enum.IntEnum):
    g = 0
    e = 1
    a = 2


def as_level(level) -> Level:
    return Level[level] if isinstance(level, str) else Level(level)


class Transition(enum.Enum):
    """Allowed ladder transitions, stored as (lower, upper) level pairs."""

    GE = ("g", "e")
    EA = ("e", "a")

    @property
    def lower(self) -> Level:
        return Level[self.value[0]]

    @property
    def upper(self) -> Level:
        return Level[self.value[1]]

    @property
    def label(self) -> str:
        return f"{self.value[0]}<->{self.value[1]}"

    @classmethod
    def parse(cls, text: str) -> "Transition":
        key = text.replace("<->", "").replace("-", "").replace("_", "").lower()
        for t in cls:
            if key in ("".join(t.value), "".join(reversed(t.value))):
                return t
        raise UnsupportedTransitionError(f"unsupported transition {text!r}")


class Slot(enum.Enum):
    qutrit = "qutrit"
    r1 = "r1"
    r2 = "r2"


@dataclass(frozen=True)
class SpaceConfig:
    """Fock truncations (number of levels) of the two resonators."""

    d1: int
    d2: int

    def __post_init__(self):
        for name in ("d1", "d2"):
            value = getattr(self, name)
            if int(value) != value or value < 2:
                raise ConfigurationError(f"{name} must be an integer >= 2, got {value!r}")

    @property
    def dim(self) -> int:
        return 3 * self.d1 * self.d2

    @classmethod
    def for_protocol(cls, n: int, m: int, guard: int = 2) -> "SpaceConfig":
        """Smallest truncation holding n (m) photons with the requested margin."""
        return cls(n + guard, m + guard)

    def slot_dim(self, slot: Slot) -> int:
        return {Slot.qutrit: 3, Slot.r1: self.d1, Slot.r2: self.d2}[slot]


@dataclass(frozen=True)
class BasisLabel:
    level: Level
    n1: int
    n2: int

    def __str__(self):
        return f"{self.level.name},{self.n1},{self.n2}"

    @classmethod
    def of(cls, level, n1: int, n2: int) -> "BasisLabel":
        return cls(as_level(level), int(n1), int(n2))


def basis_index(label: BasisLabel, cfg: SpaceConfig) -> int:
    if not (0 <= label.n1 < cfg.d1 and 0 <= label.n2 < cfg.d2):
        raise BoundsError(f"label |{label}> outside truncation d1={cfg.d1}, d2={cfg.d2}")
    return int(label.level) * cfg.d1 * cfg.d2 + label.n1 * cfg.d2 + label.n2


def basis_label(index: int, cfg: SpaceConfig) -> BasisLabel:
    if not 0 <= index < cfg.dim:
        raise BoundsError(f"index {index} outside [0, {cfg.dim})")
    level, rest = divmod(index, cfg.d1 * cfg.d2)
    n1, n2 = divmod(rest, cfg.d2)
    return BasisLabel(Level(level), n1, n2)


def iter_basis(cfg: SpaceConfig) -> Iterator[BasisLabel]:
    for level in Level:
        for n1 in range(cfg.d1):
            for n2 in range(cfg.d2):
                yield BasisLabel(level, n1, n2)


def ket(cfg: SpaceConfig, *terms) -> np.ndarray:
    """Build a state from ``(amplitude, level, n1, n2)`` terms.

    Amplitudes are used as given; no normalisation is applied.
    """
    psi = np.zeros(cfg.dim, dtype=complex)
    for amp, level, n1, n2 in terms:
        psi[basis_index(BasisLabel.of(level, n1, n2), cfg)] += amp
    return psi


def initial_state(cfg: SpaceConfig) -> np.ndarray:
    """(|g> + |e>)/sqrt(2) with both resonators in vacuum."""
    s = 1 / np.sqrt(2)
    return ket(cfg, (s, "g", 0, 0), (s, "e", 0, 0))


def annihilation(d: int) -> np.ndarray:
    if d < 2:
        raise ConfigurationError(f"mode needs at least 2 levels, got {d}")
    return np.diag(np.sqrt(np.arange(1, d, dtype=float)), k=1).astype(complex)


def creation(d: int) -> np.ndarray:
    return annihilation(d).conj().T


def number(d: int) -> np.ndarray:
    return np.diag(np.arange(d, dtype=float)).astype(complex)


def transition_lowering(upper, lower) -> np.ndarray:
    """|lower><upper| on the qutrit; only g<->e and e<->a exist."""
    upper, lower = as_level(upper), as_level(lower)
    if (upper, lower) not in ((Level.e, Level.g), (Level.a, Level.e)):
        raise UnsupportedTransitionError(
            f"no lowering operator from {upper.name} to {lower.name} on a ladder qutrit"
        )
    op = np.zeros((3, 3), dtype=complex)
    op[lower, upper] = 1.0
    return op


def sigma_minus(transition: Transition) -> np.ndarray:
    return transition_lowering(transition.upper, transition.lower)


def sigma_plus(transition: Transition) -> np.ndarray:
    return sigma_minus(transition).conj().T


def projector(level) -> np.ndarray:
    level = as_level(level)
    op = np.zeros((3, 3), dtype=complex)
    op[level, level] = 1.0
    return op


def lift(op: np.ndarray, slot: Slot, cfg: SpaceConfig) -> np.ndarray:
    """Embed a single-subsystem operator into the full space."""
    slot = Slot(slot)
    op = np.asarray(op)
    want = cfg.slot_dim(slot)
    if op.shape != (want, want):
        raise ShapeError(f"{slot.value} operator must be {want}x{want}, got {op.shape}")
    factors = [np.eye(3), np.eye(cfg.d1), np.eye(cfg.d2)]
    factors[[Slot.qutrit, Slot.r1, Slot.r2].index(slot)] = op
    return np.kron(np.kron(factors[0], factors[1]), factors[2])


def excitation_number(cfg: SpaceConfig) -> np.ndarray:
    """n1 + n2 + |e><e| + 2|a><a|, as a diagonal vector."""
    d = np.empty(cfg.dim)
    for idx, lab in enumerate(iter_basis(cfg)):
        d[idx] = lab.n1 + lab.n2 + int(lab.level)
    return d


def is_hermitian(op: np.ndarray, atol: float = HERMITIAN_ATOL) -> bool:
    return bool(np.allclose(op, op.conj().T, rtol=0.0, atol=atol))


def is_unitary(op: np.ndarray, atol: float = UNITARY_ATOL) -> bool:
    return bool(np.allclose(op.conj().T @ op, np.eye(op.shape[0]), rtol=0.0, atol=atol))
