"""Raw records -> simplified impulse events.

Sensors are modelled as 1 Hz samplers that transmit only activations:
each surviving record becomes a whole-second tick carrying just the
sensor identity.  OFF records are dropped (their count is kept for the
accounting) and repeated activations of one sensor inside one second
collapse to a single impulse, since a 1 Hz sampler cannot report twice.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime

from .errors import EmptyTrace, IdentityOverflow, UnregisteredSensor
from .trace import EventLog

IDENTITY_BYTES = 3
MAX_SENSOR_INDEX = (1 << (8 * IDENTITY_BYTES)) - 1

# Fixed origin for tick arithmetic; naive local time, so a day is exactly
# 86400 ticks and hour-of-day falls out of tick % 86400.
_EPOCH = datetime(1970, 1, 1)


def tick_of(stamp: datetime) -> int:
    """Whole-second tick of a timestamp (fractional seconds floored)."""
    delta = stamp - _EPOCH
    return delta.days * 86400 + delta.seconds


def hour_of_tick(tick: int) -> int:
    return (tick % 86400) // 3600


@dataclass(frozen=True, order=True)
class SensorEvent:
    """One impulse: a sensor activation quantized to a whole second."""

    tick: int
    sensor_index: int


@dataclass
class ImpulseStream:
    """Time-ordered impulses plus the quantization bookkeeping."""

    events: list[SensorEvent]
    dropped_off_events: int
    merged_duplicates: int
    first_tick: int
    last_tick: int

    @property
    def span_seconds(self) -> int:
        return self.last_tick - self.first_tick + 1

    @property
    def span_days(self) -> float:
        return self.span_seconds / 86400


def is_on_value(value: str) -> bool:
    """ON detection: literal ON (any case) or a numeric value > 0."""
    if value.upper() == "ON":
        return True
    try:
        return float(value) > 0
    except ValueError:
        return False


def quantize(log: EventLog, subset: set[int]) -> ImpulseStream:
    """Filter a log to `subset`, keep activations, floor to 1 Hz ticks.

    Output is ordered by (tick, sensor_index) with at most one event per
    pair; counts satisfy  subset ON records == events + merged_duplicates.
    An empty log is an error, a stream with zero surviving events is not.
    """
    if not log.records:
        raise EmptyTrace("cannot quantize an empty log")
    unknown = subset - set(log.registry.values())
    if unknown:
        raise UnregisteredSensor(f"subset indices {sorted(unknown)} not in registry")
    index_of = log.registry
    dropped = 0
    seen: set[SensorEvent] = set()
    merged = 0
    for record in log.records:
        sensor_index = index_of[record.sensor_id]
        if sensor_index not in subset:
            continue
        if not is_on_value(record.value):
            dropped += 1
            continue
        event = SensorEvent(tick=tick_of(record.timestamp), sensor_index=sensor_index)
        if event in seen:
            merged += 1
        else:
            seen.add(event)
    first, last = log.span  # non-empty by the check above
    return ImpulseStream(
        events=sorted(seen),
        dropped_off_events=dropped,
        merged_duplicates=merged,
        first_tick=tick_of(first),
        last_tick=tick_of(last),
    )


def encode_identity(sensor_index: int) -> bytes:
    """Big-endian 3-byte identity payload."""
    if sensor_index < 0 or sensor_index > MAX_SENSOR_INDEX:
        raise IdentityOverflow(f"sensor index {sensor_index} outside [0, 2^24)")
    return sensor_index.to_bytes(IDENTITY_BYTES, "big")


def decode_identity(payload: bytes) -> int:
    if len(payload) != IDENTITY_BYTES:
        raise IdentityOverflow(f"identity payload must be {IDENTITY_BYTES} bytes, got {len(payload)}")
    return int.from_bytes(payload, "big")
