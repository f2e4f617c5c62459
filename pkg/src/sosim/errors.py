"""Exception hierarchy shared across the package.

Everything raised on purpose derives from SosimError so callers (CLI,
service) can map domain failures to one exit code / HTTP status.
"""

from __future__ import annotations


class SosimError(Exception):
    """Base class for all domain errors."""


class MalformedLine(SosimError):
    """A trace line violating the record grammar."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class EmptyTrace(SosimError):
    """No usable records (zero well-formed lines, or span too short)."""


class IoFailure(SosimError):
    """Reading or writing an external file failed."""


class InvalidConfig(SosimError):
    """A synthetic-trace or profile configuration violates its invariants."""


class IdentityOverflow(SosimError):
    """Sensor index does not fit the 3-byte identity payload."""


class UnregisteredSensor(SosimError):
    """Event refers to a sensor the receiving component is not wired to."""


class UnknownAction(SosimError):
    """Action name not registered with the smart object."""


class ZeroConsumption(SosimError):
    """Battery lifetime is undefined for non-positive daily consumption."""


class ZeroBaseline(SosimError):
    """Savings are undefined against a non-positive baseline."""


class MismatchedSpan(SosimError):
    """Two architecture runs cover different time spans."""
