"""Smart object core: event window plus per-action integer classifiers.

The window is a slotted circular buffer over the last N seconds.  Each
second exactly one entry is pushed (a sensor index, or None on an
event-free second), and a per-sensor occurrence count is maintained
incrementally, so scoring never traverses the buffer.

Each action has its own binary detector: integer weights per wired
sensor, a fixed-point scale for approximated log-likelihood ratios, an
overflow guard that halves everything when a 16-bit bound is exceeded,
and a data-driven threshold.  Detection is edge-triggered: an action is
emitted only when the score first rises above the threshold, not on
every second it stays there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import UnknownAction, UnregisteredSensor

DEFAULT_WINDOW_SECONDS = 1800
DEFAULT_SCALE = 256            # fixed-point multiplier for log ratios
DEFAULT_SMOOTHING = 1          # Laplace count
DEFAULT_WEIGHT_LIMIT = 2**15 - 1  # 16-bit signed register bound


class EventWindow:
    """Circular buffer of the last `size` entries with per-sensor counts.

    `head` indexes the oldest slot (the next one to be overwritten);
    `counts` holds the occurrences of each sensor currently buffered,
    with zero-count sensors absent.
    """

    __slots__ = ("size", "slots", "head", "counts", "last_entry")

    def __init__(self, size: int = DEFAULT_WINDOW_SECONDS):
        if size <= 0:
            raise ValueError("window size must be positive")
        self.size = size
        self.slots: list[int | None] = [None] * size
        self.head = 0
        self.counts: dict[int, int] = {}
        self.last_entry: int | None = None

    def push(self, entry: int | None) -> int | None:
        """Insert one entry, evicting and returning the oldest.

        The eviction decrement and insertion increment keep `counts`
        exact without scanning the slots.
        """
        self.last_entry = entry
        evicted = self.slots[self.head]
        if evicted is not None:
            remaining = self.counts[evicted] - 1
            if remaining:
                self.counts[evicted] = remaining
            else:
                del self.counts[evicted]
        if entry is not None:
            self.counts[entry] = self.counts.get(entry, 0) + 1
        self.slots[self.head] = entry
        self.head = (self.head + 1) % self.size
        return evicted

    def recount(self) -> dict[int, int]:
        """Brute-force recount of the slots (reference for the counts)."""
        fresh: dict[int, int] = {}
        for slot in self.slots:
            if slot is not None:
                fresh[slot] = fresh.get(slot, 0) + 1
        return fresh

    def contains(self, sensor_index: int) -> bool:
        return self.counts.get(sensor_index, 0) > 0


@dataclass
class ActionModel:
    """Binary detector for one action over a fixed sensor subset.

    Presence statistics: `positive_count` action instances seen,
    `positive_presence[i]` of them containing sensor i; the negative
    pair counts background snapshots the same way.  Weights are the
    scaled log ratios of those presence estimates, arithmetic-shifted
    right `scale_shift` times by the overflow guard.
    """

    action: str
    sensors: tuple[int, ...]
    scale: int = DEFAULT_SCALE
    smoothing: int = DEFAULT_SMOOTHING
    weight_limit: int = DEFAULT_WEIGHT_LIMIT
    weights: list[int] = field(default_factory=list)
    threshold: int = 1             # > max score of an untrained model, so it never fires
    positive_count: int = 0
    positive_presence: list[int] = field(default_factory=list)
    negative_count: int = 0
    negative_presence: list[int] = field(default_factory=list)
    scale_shift: int = 0
    above: bool = False

    def __post_init__(self) -> None:
        width = len(self.sensors)
        if not self.weights:
            self.weights = [0] * width
        if not self.positive_presence:
            self.positive_presence = [0] * width
        if not self.negative_presence:
            self.negative_presence = [0] * width

    # -- scoring ---------------------------------------------------------

    def score(self, window: EventWindow) -> int:
        """Sum the weights of sensors present in the window.

        Presence is binary: a sensor buffered twice contributes its
        weight once.  Runs over the wired subset only, never the slots.
        """
        total = 0
        counts = window.counts
        for i, sensor in enumerate(self.sensors):
            if counts.get(sensor, 0) > 0:
                total += self.weights[i]
        return total

    def score_full_scan(self, window: EventWindow) -> int:
        """Reference scorer that traverses every slot; must match score()."""
        present = {slot for slot in window.slots if slot is not None}
        total = 0
        for i, sensor in enumerate(self.sensors):
            if sensor in present:
                total += self.weights[i]
        return total

    def register_score(self, score: int) -> bool:
        """Update the edge latch; True exactly on a rising edge."""
        fire = score > self.threshold
        rising = fire and not self.above
        self.above = fire
        return rising

    # -- learning --------------------------------------------------------

    def _presence(self, window: EventWindow) -> list[bool]:
        return [window.counts.get(s, 0) > 0 for s in self.sensors]

    def learn(self, window: EventWindow) -> None:
        """Absorb one positive snapshot (window state at the action)."""
        present = self._presence(window)
        self.positive_count += 1
        for i, hit in enumerate(present):
            if hit:
                self.positive_presence[i] += 1
        self._refresh()

    def observe_negative(self, window: EventWindow) -> None:
        """Absorb one background snapshot (no instance of this action)."""
        present = self._presence(window)
        self.negative_count += 1
        for i, hit in enumerate(present):
            if hit:
                self.negative_presence[i] += 1
        self._refresh()

    def _refresh(self) -> None:
        """Recompute weights and threshold from the counts, then rebalance."""
        n, m, a = self.positive_count, self.negative_count, self.smoothing
        for i in range(len(self.sensors)):
            pos = (self.positive_presence[i] + a) / (n + 2 * a)
            neg = (self.negative_presence[i] + a) / (m + 2 * a)
            raw = round(self.scale * (math.log(pos) - math.log(neg)))
            self.weights[i] = raw >> self.scale_shift
        # Threshold: midpoint between the mean score of positive snapshots
        # and of negative snapshots under the current weights; both means
        # follow from the marginal presence counts.
        pos_mean = 0.0
        neg_mean = 0.0
        if n:
            pos_mean = sum(w * c for w, c in zip(self.weights, self.positive_presence)) / n
        if m:
            neg_mean = sum(w * d for w, d in zip(self.weights, self.negative_presence)) / m
        self.threshold = round((pos_mean + neg_mean) / 2)
        self.rescale()

    def rescale(self) -> None:
        """Halve weights and threshold until everything fits the register bound."""
        limit = self.weight_limit
        while any(abs(w) > limit for w in self.weights) or abs(self.threshold) > limit:
            self.weights = [w >> 1 for w in self.weights]
            self.threshold >>= 1
            self.scale_shift += 1

    # -- persistence -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "action": self.action,
            "sensors": list(self.sensors),
            "scale": self.scale,
            "smoothing": self.smoothing,
            "weight_limit": self.weight_limit,
            "weights": list(self.weights),
            "threshold": self.threshold,
            "positive_count": self.positive_count,
            "positive_presence": list(self.positive_presence),
            "negative_count": self.negative_count,
            "negative_presence": list(self.negative_presence),
            "scale_shift": self.scale_shift,
            "above": self.above,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ActionModel":
        return cls(
            action=data["action"],
            sensors=tuple(data["sensors"]),
            scale=data["scale"],
            smoothing=data["smoothing"],
            weight_limit=data["weight_limit"],
            weights=list(data["weights"]),
            threshold=data["threshold"],
            positive_count=data["positive_count"],
            positive_presence=list(data["positive_presence"]),
            negative_count=data["negative_count"],
            negative_presence=list(data["negative_presence"]),
            scale_shift=data["scale_shift"],
            above=data["above"],
        )


class SmartObject:
    """One sensor-adjacent node: a shared window plus per-action detectors.

    Single-owner state machine; calls on one object must be serialized,
    distinct objects are independent.
    """

    def __init__(
        self,
        sensors: Iterable[int],
        actions: Iterable[str] = (),
        *,
        window_size: int = DEFAULT_WINDOW_SECONDS,
        scale: int = DEFAULT_SCALE,
        smoothing: int = DEFAULT_SMOOTHING,
        weight_limit: int = DEFAULT_WEIGHT_LIMIT,
    ):
        self.sensors = tuple(sensors)
        self._sensor_set = set(self.sensors)
        self.window = EventWindow(window_size)
        self.scale = scale
        self.smoothing = smoothing
        self.weight_limit = weight_limit
        self.instances: dict[str, ActionModel] = {}
        for action in actions:
            self.add_action(action)

    def add_action(self, action: str) -> ActionModel:
        if action in self.instances:
            raise UnknownAction(f"action {action!r} already registered")
        model = ActionModel(
            action=action,
            sensors=self.sensors,
            scale=self.scale,
            smoothing=self.smoothing,
            weight_limit=self.weight_limit,
        )
        self.instances[action] = model
        return model

    def instance(self, action: str) -> ActionModel:
        try:
            return self.instances[action]
        except KeyError:
            raise UnknownAction(f"action {action!r} not registered") from None

    def predict(self, entry: int | None) -> list[str]:
        """Push one second's entry and return actions emitted on this tick.

        `entry` is the sensor that fired this second, or None when the
        second was event-free.  Emission is edge-triggered per instance.
        """
        if entry is not None and entry not in self._sensor_set:
            raise UnregisteredSensor(f"sensor index {entry} not wired to this object")
        self.window.push(entry)
        emitted = []
        for model in self.instances.values():
            if model.register_score(model.score(self.window)):
                emitted.append(model.action)
        return emitted

    def learn(self, action: str, window: EventWindow | None = None) -> ActionModel:
        """Train `action` on a positive window snapshot (default: own window)."""
        model = self.instance(action)
        model.learn(self.window if window is None else window)
        return model

    def observe_negative(self, action: str, window: EventWindow | None = None) -> ActionModel:
        """Feed `action` a background snapshot that contains no instance of it."""
        model = self.instance(action)
        model.observe_negative(self.window if window is None else window)
        return model

    def to_dict(self) -> dict:
        """Learned state as a JSON-safe document (window content excluded)."""
        return {
            "window_size": self.window.size,
            "sensors": list(self.sensors),
            "scale": self.scale,
            "smoothing": self.smoothing,
            "weight_limit": self.weight_limit,
            "instances": [model.to_dict() for model in self.instances.values()],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "SmartObject":
        so = cls(
            sensors=data["sensors"],
            window_size=data["window_size"],
            scale=data["scale"],
            smoothing=data["smoothing"],
            weight_limit=data["weight_limit"],
        )
        for entry in data["instances"]:
            model = ActionModel.from_dict(entry)
            if model.action in so.instances:
                raise UnknownAction(f"duplicate action {model.action!r} in dump")
            so.instances[model.action] = model
        return so
