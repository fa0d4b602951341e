"""Strict YAML run configuration.

Every frequency in the file is in Hz (cycles per second) and is multiplied by
2*pi on load. Unknown keys anywhere are errors.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Optional, Tuple

import yaml

from .dynamics import Mode, RunConfig, reference_coupling
from .errors import ConfigurationError, DomainError
from .hamiltonian import DeviceParams
from .hilbert import SpaceConfig
from .protocol import ProtocolSpec

DEFAULT_DEVICE_HZ = DeviceParams.defaults().to_hz()
DEFAULT_DETUNING_OVER_G = 100.0
TRAJECTORY_KINDS = ("populations", "amplitudes")

_SECTIONS = {
    "protocol": {"N", "M"},
    "device": set(DEFAULT_DEVICE_HZ),
    "simulation": {
        "mode",
        "detuning_over_g",
        "sample_points_per_segment",
        "norm_tolerance",
        "drive_leakage",
        "resonant_cross_coupling",
        "truncation",
    },
    "output": {"directory", "trajectory"},
    "sweep": {"detuning_over_g", "NM"},
}


@dataclass(frozen=True)
class RunEntry:
    """One fully resolved simulation: protocol, device, run settings, truncation."""

    spec: ProtocolSpec
    params: DeviceParams
    run: RunConfig
    detuning_over_g: Optional[float]
    space: Optional[SpaceConfig] = None
    tag: str = "run"


@dataclass(frozen=True)
class RunConfigFile:
    N: int
    M: int
    device_hz: dict
    mode: Mode = Mode.ideal
    detuning_over_g: float = DEFAULT_DETUNING_OVER_G
    sample_points_per_segment: int = 32
    norm_tolerance: float = 1e-10
    drive_leakage: bool = True
    resonant_cross_coupling: bool = False
    truncation: Optional[Tuple[int, int]] = None
    output_dir: Path = Path("noonsim-out")
    trajectory: str = "populations"
    sweep_detuning_over_g: Tuple[float, ...] = ()
    sweep_nm: Tuple[Tuple[int, int], ...] = ()
    source: Optional[Path] = field(default=None, compare=False)

    def params(self) -> DeviceParams:
        return DeviceParams.from_hz(**self.device_hz)

    def entries(self) -> List[RunEntry]:
        params = self.params()
        nms = list(self.sweep_nm) or [(self.N, self.M)]
        ratios = list(self.sweep_detuning_over_g) or [self.detuning_over_g]
        if self.mode is Mode.ideal:
            ratios = ratios[:1]  # detuning has no effect in ideal mode
        out = []
        for n, m in nms:
            spec = ProtocolSpec(n, m)
            space = SpaceConfig(*self.truncation) if self.truncation else None
            for ratio in ratios:
                detuning = ratio * reference_coupling(params) if self.mode is Mode.finite_detuning else None
                run = RunConfig(
                    self.mode,
                    detuning,
                    self.sample_points_per_segment,
                    self.norm_tolerance,
                    self.drive_leakage,
                    self.resonant_cross_coupling,
                )
                tag = f"N{n}_M{m}"
                if self.mode is Mode.finite_detuning:
                    tag += f"_delta{ratio:g}g"
                out.append(RunEntry(spec, params, run, ratio if detuning else None, space, tag))
        return out

    def with_overrides(self, **kw) -> "RunConfigFile":
        kw = {k: v for k, v in kw.items() if v is not None}
        if "mode" in kw:
            kw["mode"] = Mode(kw["mode"])
        if "output_dir" in kw:
            kw["output_dir"] = Path(kw["output_dir"])
        out = replace(self, **kw)
        _validate(out)
        return out


def _number(value, where: str, kind=float):
    if isinstance(value, bool):
        raise ConfigurationError(f"{where}: expected a number, got {value!r}")
    try:
        number = kind(value) if not isinstance(value, str) else kind(float(value))
    except (TypeError, ValueError):
        raise ConfigurationError(f"{where}: expected a number, got {value!r}") from None
    if kind is int and float(value) != number:
        raise ConfigurationError(f"{where}: expected an integer, got {value!r}")
    return number


def _bool(value, where: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigurationError(f"{where}: expected true/false, got {value!r}")
    return value


def _section(doc: dict, name: str) -> dict:
    body = doc.get(name, {}) or {}
    if not isinstance(body, dict):
        raise ConfigurationError(f"[{name}] must be a mapping")
    unknown = set(body) - _SECTIONS[name]
    if unknown:
        raise ConfigurationError(f"[{name}] unknown keys: {', '.join(sorted(map(str, unknown)))}")
    return body


def parse_config(doc, source: Optional[Path] = None) -> RunConfigFile:
    if not isinstance(doc, dict):
        raise ConfigurationError("config must be a mapping of sections")
    unknown = set(doc) - set(_SECTIONS)
    if unknown:
        raise ConfigurationError(f"unknown sections: {', '.join(sorted(map(str, unknown)))}")
    proto = _section(doc, "protocol")
    if "N" not in proto or "M" not in proto:
        raise ConfigurationError("[protocol] needs both N and M")
    device = dict(DEFAULT_DEVICE_HZ)
    for key, value in _section(doc, "device").items():
        device[key] = _number(value, f"device.{key}")
    sim = _section(doc, "simulation")
    out = _section(doc, "output")
    sweep = _section(doc, "sweep")

    truncation = None
    if "truncation" in sim:
        t = sim["truncation"]
        if not isinstance(t, dict) or set(t) != {"d1", "d2"}:
            raise ConfigurationError("simulation.truncation must be a mapping with exactly d1 and d2")
        truncation = (_number(t["d1"], "truncation.d1", int), _number(t["d2"], "truncation.d2", int))

    try:
        mode = Mode(sim.get("mode", "ideal"))
    except ValueError:
        raise ConfigurationError(f"simulation.mode must be one of {[m.value for m in Mode]}") from None

    nm = []
    for item in sweep.get("NM", []) or []:
        if not isinstance(item, (list, tuple)) or len(item) != 2:
            raise ConfigurationError(f"sweep.NM entries must be [N, M] pairs, got {item!r}")
        nm.append((_number(item[0], "sweep.NM", int), _number(item[1], "sweep.NM", int)))
    ratios = tuple(_number(r, "sweep.detuning_over_g") for r in (sweep.get("detuning_over_g", []) or []))

    trajectory = out.get("trajectory", "populations")
    if trajectory not in TRAJECTORY_KINDS:
        raise ConfigurationError(f"output.trajectory must be one of {TRAJECTORY_KINDS}")

    cfg = RunConfigFile(
        N=_number(proto["N"], "protocol.N", int),
        M=_number(proto["M"], "protocol.M", int),
        device_hz=device,
        mode=mode,
        detuning_over_g=_number(sim.get("detuning_over_g", DEFAULT_DETUNING_OVER_G), "simulation.detuning_over_g"),
        sample_points_per_segment=_number(sim.get("sample_points_per_segment", 32), "sample_points_per_segment", int),
        norm_tolerance=_number(sim.get("norm_tolerance", 1e-10), "simulation.norm_tolerance"),
        drive_leakage=_bool(sim.get("drive_leakage", True), "simulation.drive_leakage"),
        resonant_cross_coupling=_bool(sim.get("resonant_cross_coupling", False), "simulation.resonant_cross_coupling"),
        truncation=truncation,
        output_dir=Path(str(out.get("directory", "noonsim-out"))),
        trajectory=trajectory,
        sweep_detuning_over_g=ratios,
        sweep_nm=tuple(nm),
        source=source,
    )
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfigFile) -> None:
    """Build every entry once so all range errors surface before any output is written."""
    try:
        cfg.entries()
    except DomainError as exc:
        raise ConfigurationError(str(exc)) from exc


def load_config(path) -> RunConfigFile:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"{path}: YAML parse error: {exc}") from exc
    return parse_config(doc, path)
