"""Error codes and finding records shared across the emulator.

Every fault surfaced to a caller carries a stable ``E_*`` code so that the
CLI, the HTTP service, and the serial protocol can report it uniformly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

# Topology / routing
E_PORT_RANGE = "E_PORT_RANGE"
E_FANOUT = "E_FANOUT"
E_FANIN = "E_FANIN"
E_NO_PATH = "E_NO_PATH"
E_LANE = "E_LANE"
E_UNKNOWN_ELEMENT = "E_UNKNOWN_ELEMENT"

# Timing
E_NO_PEAK = "E_NO_PEAK"

# Polarization control
E_STARVED = "E_STARVED"

# Control plane
E_UNROUTABLE = "E_UNROUTABLE"
E_RESOURCE = "E_RESOURCE"
E_CAPACITY = "E_CAPACITY"
E_CONFLICT = "E_CONFLICT"
E_DEVICE = "E_DEVICE"
E_UNKNOWN_HANDLE = "E_UNKNOWN_HANDLE"
E_NOT_FINISHED = "E_NOT_FINISHED"
E_EXPIRED = "E_EXPIRED"
E_SCHEMA = "E_SCHEMA"

# QKD
E_TIMEOUT = "E_TIMEOUT"
E_EMPTY = "E_EMPTY"
E_ABORT_QBER = "E_ABORT_QBER"
E_LENGTH = "E_LENGTH"

# QNIC / line code
E_SCOPE = "E_SCOPE"
E_CODE = "E_CODE"
E_DISPARITY = "E_DISPARITY"

# CLI / files
E_CORRUPT = "E_CORRUPT"
E_MISSING = "E_MISSING"
E_BIND = "E_BIND"


class EmulatorError(Exception):
    """Fault with a stable code, raised by operations that cannot proceed."""

    def __init__(self, code: str, message: str = ""):
        self.code = code
        self.message = message or code
        super().__init__(f"{code}: {self.message}" if message else code)


@dataclass(frozen=True)
class Finding:
    """One validation finding; validators return lists of these instead of raising."""

    code: str
    message: str
    element: str = ""

    def as_dict(self) -> dict:
        return {"code": self.code, "message": self.message, "element": self.element}


@dataclass
class FindingList:
    """Mutable accumulator used by validators."""

    findings: list[Finding] = field(default_factory=list)

    def add(self, code: str, message: str, element: str = "") -> None:
        self.findings.append(Finding(code, message, element))

    def extend(self, other: "FindingList | list[Finding]") -> None:
        self.findings.extend(other.findings if isinstance(other, FindingList) else other)

    def __bool__(self) -> bool:
        return bool(self.findings)

    def __iter__(self):
        return iter(self.findings)

    def __len__(self) -> int:
        return len(self.findings)

    def __getitem__(self, index):
        return self.findings[index]
