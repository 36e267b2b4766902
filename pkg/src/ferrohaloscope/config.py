"""INI run configuration: parsing, overrides, typed accessors and a stable digest.

Every key lives in ``section.key`` form.  Frequencies are ordinary Hz, fields
tesla, times seconds; the 2 pi conversion to angular units happens here.
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import ConfigError, DomainError
from .model import TWO_PI, AxionDrive, HybridParams, ModeSystem, larmor_frequency

DEFAULTS: dict[str, str] = {
    "system.omega_c_hz": "4.7e9",
    "system.omega_m_hz": "",
    "system.gamma_c_hz": "1.1e6",
    "system.gamma_m_hz": "3.5e6",
    "system.g_cm_hz": "26.5e6",
    "system.extra_modes": "",
    "drive.g_am_hz": "1e-7",
    "drive.n_a": "1e24",
    "drive.omega_a_hz": "",
    "sweep.quantity": "b0",
    "sweep.start": "0.160",
    "sweep.stop": "0.176",
    "sweep.points": "201",
    "sweep.branch": "lower",
    "sweep.omega_a_start_hz": "4.6e9",
    "sweep.omega_a_stop_hz": "4.8e9",
    "sweep.omega_a_points": "201",
    "pulse.amplitude": "1.0",
    "pulse.jitter": "0.0",
    "pulse.shots": "1",
    "pulse.t0_s": "0.0",
    "pulse.dt_s": "0",
    "heterodyne.lo_hz": "0",
    "heterodyne.lo_offset_hz": "5e6",
    "heterodyne.band_hz": "25e6",
    "heterodyne.band_limit": "false",
    "spectrum.b0_t": "0, 0.168",
    "spectrum.f_start_hz": "4.62e9",
    "spectrum.f_stop_hz": "4.78e9",
    "spectrum.points": "4001",
    "run.seed": "0",
}

SWEEP_QUANTITIES = ("b0", "omega_m", "omega_a", "omega_minus")


def _flatten(parser: configparser.ConfigParser) -> dict[str, str]:
    return {f"{sec}.{key}": val.strip() for sec in parser.sections() for key, val in parser[sec].items()}


def read_config_file(path: str | Path) -> dict[str, str]:
    """Read an INI file, or the ``# config:`` lines embedded in an emitted CSV."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if path.suffix.lower() == ".csv":
        values = {}
        for line in text.splitlines():
            if line.startswith("# config:"):
                key, _, val = line[len("# config:"):].partition("=")
                values[key.strip()] = val.strip()
        if not values:
            raise ConfigError(f"{path} carries no embedded configuration")
        return values
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return _flatten(parser)


def parse_overrides(items: Iterable[str]) -> dict[str, str]:
    out = {}
    for item in items:
        key, sep, val = item.partition("=")
        if not sep or "." not in key:
            raise ConfigError(f"override must look like section.key=value, got {item!r}")
        out[key.strip()] = val.strip()
    return out


@dataclass(frozen=True)
class SweepSpec:
    quantity: str
    start: float
    stop: float
    points: int

    def __post_init__(self):
        if self.quantity not in SWEEP_QUANTITIES:
            raise ConfigError(f"sweep quantity must be one of {SWEEP_QUANTITIES}, got {self.quantity!r}")
        if self.points < 2:
            raise ConfigError(f"sweep needs points >= 2, got {self.points}")
        if not self.start < self.stop:
            raise ConfigError(f"sweep needs start < stop, got {self.start} >= {self.stop}")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)


class RunConfig:
    """Resolved configuration.  ``values`` is the flat key map after defaults and overrides."""

    def __init__(self, values: Mapping[str, str]):
        unknown = sorted(set(values) - set(DEFAULTS))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        self.values = {**DEFAULTS, **values}

    @classmethod
    def load(cls, path=None, overrides: Mapping[str, str] = ()) -> "RunConfig":
        values = read_config_file(path) if path else {}
        values.update(dict(overrides))
        return cls(values)

    # raw access

    def get_float(self, key: str) -> float:
        raw = self.values[key]
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{key}: expected a number, got {raw!r}") from None

    def get_int(self, key: str) -> int:
        val = self.get_float(key)
        if val != int(val):
            raise ConfigError(f"{key}: expected an integer, got {self.values[key]!r}")
        return int(val)

    def get_bool(self, key: str) -> bool:
        raw = self.values[key].lower()
        if raw in ("1", "true", "yes", "on"):
            return True
        if raw in ("0", "false", "no", "off", ""):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {self.values[key]!r}")

    def get_list(self, key: str) -> list[float]:
        raw = self.values[key]
        try:
            return [float(v) for v in raw.replace(";", ",").split(",") if v.strip()]
        except ValueError:
            raise ConfigError(f"{key}: expected a comma-separated list of numbers, got {raw!r}") from None

    def canonical(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in sorted(self.values.items()))

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()

    # typed views

    @property
    def seed(self) -> int:
        return self.get_int("run.seed")

    def system(self, omega_m: float | None = None) -> HybridParams:
        if omega_m is None:
            raw = self.values["system.omega_m_hz"]
            omega_m = TWO_PI * float(raw) if raw else TWO_PI * self.get_float("system.omega_c_hz")
        try:
            return HybridParams(
                TWO_PI * self.get_float("system.omega_c_hz"),
                omega_m,
                TWO_PI * self.get_float("system.gamma_c_hz"),
                TWO_PI * self.get_float("system.gamma_m_hz"),
                TWO_PI * self.get_float("system.g_cm_hz"),
            )
        except DomainError as exc:
            raise ConfigError(f"system: {exc}") from exc

    def extra_modes(self) -> list[tuple[float, float, float]]:
        """Additional magnon modes as ``(offset, gamma, g)`` in rad/s; offset from the Kittel mode."""
        raw = self.values["system.extra_modes"]
        modes = []
        for chunk in raw.replace(";", ",").split(","):
            if not chunk.strip():
                continue
            parts = chunk.split(":")
            if len(parts) != 3:
                raise ConfigError(f"system.extra_modes entry must be offset_hz:gamma_hz:g_hz, got {chunk!r}")
            try:
                modes.append(tuple(TWO_PI * float(v) for v in parts))
            except ValueError:
                raise ConfigError(f"system.extra_modes: bad number in {chunk!r}") from None
        return modes

    def mode_system(self, omega_m: float) -> ModeSystem:
        p = self.system(omega_m)
        modes = [(omega_m, p.gamma_m, p.g_cm)]
        modes += [(omega_m + off, gamma, g) for off, gamma, g in self.extra_modes()]
        try:
            return ModeSystem(tuple(modes), p.omega_c, p.gamma_c)
        except DomainError as exc:
            raise ConfigError(f"system.extra_modes: {exc}") from exc

    def drive(self, omega_a: float | None = None) -> AxionDrive:
        if omega_a is None:
            raw = self.values["drive.omega_a_hz"]
            omega_a = TWO_PI * float(raw) if raw else TWO_PI * self.get_float("system.omega_c_hz")
        try:
            return AxionDrive(TWO_PI * self.get_float("drive.g_am_hz"), self.get_float("drive.n_a"), omega_a)
        except DomainError as exc:
            raise ConfigError(f"drive: {exc}") from exc

    def sweep(self) -> SweepSpec:
        return SweepSpec(
            self.values["sweep.quantity"],
            self.get_float("sweep.start"),
            self.get_float("sweep.stop"),
            self.get_int("sweep.points"),
        )

    def omega_a_sweep(self) -> SweepSpec:
        return SweepSpec(
            "omega_a",
            self.get_float("sweep.omega_a_start_hz"),
            self.get_float("sweep.omega_a_stop_hz"),
            self.get_int("sweep.omega_a_points"),
        )

    @property
    def branch(self) -> str:
        b = self.values["sweep.branch"]
        if b not in ("lower", "upper"):
            raise ConfigError(f"sweep.branch must be 'lower' or 'upper', got {b!r}")
        return b

    def omega_m_axis(self) -> tuple[np.ndarray, np.ndarray | None]:
        """Kittel frequencies (rad/s) for a b0/omega_m sweep, plus the fields when swept in tesla."""
        s = self.sweep()
        if s.quantity == "b0":
            b0 = s.values()
            try:
                return np.array([larmor_frequency(b) for b in b0]), b0
            except DomainError as exc:
                raise ConfigError(f"sweep: {exc}") from exc
        if s.quantity == "omega_m":
            return TWO_PI * s.values(), None
        raise ConfigError(f"this command sweeps b0 or omega_m, not {s.quantity}")
