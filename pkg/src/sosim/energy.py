"""Energy, battery, timing and CPU-load arithmetic for both architectures.

All defaults describe the reference hardware: a CC2420-class radio on a
2 V supply (carrier sense 32.5 mA / 2.9 ms, wake-up 13 mA / 13 ms,
transmit 30.5 mA / 1 ms), a 1 MHz microcontroller drawing 1.2 mA while
running and nothing while idle, and a coin cell modelled at 0.675 J.
Everything is a plain parameter; this is an analysis model, not embedded
code, so arithmetic is real-valued.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from typing import NamedTuple

from .errors import InvalidConfig, ZeroBaseline, ZeroConsumption


@dataclass(frozen=True)
class RadioProfile:
    """Per-transmission current/duration pairs (A, s) and supply voltage (V)."""

    csma_current: float = 0.0325      # carrier-sense listen
    csma_duration: float = 0.0029
    wake_current: float = 0.013       # controller wake-up
    wake_duration: float = 0.013
    tx_current: float = 0.0305        # actual frame transmission
    tx_duration: float = 0.001
    supply_voltage: float = 2.0


@dataclass(frozen=True)
class TimingProfile:
    """Per-event processing times (s) for the optimized and naive paths."""

    buffer_optimized: float = 0.000630     # incremental circular-buffer update
    classifier_optimized: float = 0.000346  # summing the wired weights
    buffer_naive: float = 0.0385           # full scan of 1800 slots
    classifier_naive: float = 0.01753      # unoptimized classifier pass


@dataclass(frozen=True)
class McuProfile:
    """Microcontroller run current (A) at supply voltage (V); idle draws nothing."""

    run_current: float = 0.0012
    supply_voltage: float = 2.0
    timing: TimingProfile = field(default_factory=TimingProfile)


@dataclass(frozen=True)
class BatteryProfile:
    """Usable battery energy in joules (coin-cell reference value)."""

    capacity: float = 0.675


@dataclass(frozen=True)
class ProfileSet:
    radio: RadioProfile = field(default_factory=RadioProfile)
    mcu: McuProfile = field(default_factory=McuProfile)
    battery: BatteryProfile = field(default_factory=BatteryProfile)

    @property
    def timing(self) -> TimingProfile:
        return self.mcu.timing


class CpuLoad(NamedTuple):
    load: float        # fraction of one core, capped at 1.0
    overloaded: bool   # True when the uncapped demand exceeded 1.0


class EnergyBreakdown(NamedTuple):
    processing: float  # joules
    transmit: float    # joules

    @property
    def total(self) -> float:
        return self.processing + self.transmit


def tx_event_energy(radio: RadioProfile) -> float:
    """Energy (J) to radio one event: sum of charge per phase times voltage."""
    charge = (
        radio.csma_current * radio.csma_duration
        + radio.wake_current * radio.wake_duration
        + radio.tx_current * radio.tx_duration
    )
    return charge * radio.supply_voltage


def mcu_event_energy(mcu: McuProfile, processing_time: float) -> float:
    """Energy (J) to process one event for `processing_time` seconds."""
    if processing_time < 0:
        raise InvalidConfig("processing_time must be non-negative")
    return mcu.run_current * processing_time * mcu.supply_voltage


def per_event_processing_time(
    timing: TimingProfile,
    buffer_optimized: bool = True,
    algorithm_optimized: bool = True,
) -> float:
    """Per-event time (s): buffer phase plus classifier phase, each variant."""
    buffer_time = timing.buffer_optimized if buffer_optimized else timing.buffer_naive
    algo_time = timing.classifier_optimized if algorithm_optimized else timing.classifier_naive
    return buffer_time + algo_time


def daily_energy_tx_all(events_per_day: float, radio: RadioProfile) -> float:
    """Daily energy (J) when every event is transmitted."""
    if events_per_day < 0:
        raise InvalidConfig("events_per_day must be non-negative")
    return events_per_day * tx_event_energy(radio)


def daily_energy_so(
    events_per_day: float,
    actions_per_day: float,
    mcu: McuProfile,
    radio: RadioProfile,
    processing_time: float,
) -> EnergyBreakdown:
    """Daily smart-object energy: local processing plus action transmissions."""
    if events_per_day < 0 or actions_per_day < 0:
        raise InvalidConfig("event and action counts must be non-negative")
    return EnergyBreakdown(
        processing=events_per_day * mcu_event_energy(mcu, processing_time),
        transmit=actions_per_day * tx_event_energy(radio),
    )


def battery_lifetime_days(daily_energy: float, battery: BatteryProfile) -> float:
    """Days one battery lasts at the given daily consumption."""
    if daily_energy <= 0:
        raise ZeroConsumption("battery lifetime is undefined for non-positive daily energy")
    return battery.capacity / daily_energy


def batteries_per_day(daily_energy: float, battery: BatteryProfile) -> float:
    return 1.0 / battery_lifetime_days(daily_energy, battery)


def cpu_load(events_per_second: float, processing_time: float) -> CpuLoad:
    """Processor utilisation for a given event rate; capped with an overload flag."""
    if events_per_second < 0:
        raise InvalidConfig("events_per_second must be non-negative")
    raw = events_per_second * processing_time
    return CpuLoad(load=min(raw, 1.0), overloaded=raw > 1.0)


def savings(baseline: float, candidate: float) -> float:
    """Percentage saved by `candidate` relative to `baseline`."""
    if baseline <= 0:
        raise ZeroBaseline("savings are undefined against a non-positive baseline")
    return 100.0 * (1.0 - candidate / baseline)


# ---------------------------------------------------------------------------
# Profile file format: flat `section.field = value` lines or nested JSON.
# ---------------------------------------------------------------------------

_SECTIONS = {"radio": RadioProfile, "mcu": McuProfile, "timing": TimingProfile, "battery": BatteryProfile}


def profiles_to_dict(profiles: ProfileSet) -> dict:
    return {
        "radio": asdict(profiles.radio),
        "mcu": {"run_current": profiles.mcu.run_current, "supply_voltage": profiles.mcu.supply_voltage},
        "timing": asdict(profiles.timing),
        "battery": asdict(profiles.battery),
    }


def profiles_from_dict(data: dict) -> ProfileSet:
    unknown = set(data) - set(_SECTIONS)
    if unknown:
        raise InvalidConfig(f"unknown profile sections: {sorted(unknown)}")
    try:
        radio = RadioProfile(**data.get("radio", {}))
        timing = TimingProfile(**data.get("timing", {}))
        mcu = McuProfile(timing=timing, **data.get("mcu", {}))
        battery = BatteryProfile(**data.get("battery", {}))
    except TypeError as exc:
        raise InvalidConfig(f"bad profile field: {exc}") from exc
    return ProfileSet(radio=radio, mcu=mcu, battery=battery)


def format_profiles(profiles: ProfileSet, json_format: bool = False) -> str:
    """Render profiles as reloadable text (key-value by default, or JSON)."""
    data = profiles_to_dict(profiles)
    if json_format:
        return json.dumps(data, indent=2) + "\n"
    lines = []
    for section, entries in data.items():
        for key, value in entries.items():
            lines.append(f"{section}.{key} = {value!r}")
    return "\n".join(lines) + "\n"


def parse_profiles(text: str) -> ProfileSet:
    """Parse either profile format back into a ProfileSet."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidConfig(f"bad JSON profile: {exc}") from exc
        return profiles_from_dict(data)
    data: dict[str, dict[str, float]] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line or "." not in line.split("=", 1)[0]:
            raise InvalidConfig(f"line {line_no}: expected section.field = value")
        key, _, value = line.partition("=")
        section, _, name = key.strip().partition(".")
        if section not in _SECTIONS:
            raise InvalidConfig(f"line {line_no}: unknown section {section!r}")
        try:
            data.setdefault(section, {})[name] = float(value.strip())
        except ValueError as exc:
            raise InvalidConfig(f"line {line_no}: {exc}") from exc
    return profiles_from_dict(data)
