"""Bounded circular FIFO of patient records with monotonic serial numbers.

Mirrors the firmware data structure: a fixed slot array in SRAM, wrapping
head index, and a serial counter that survives only until power is lost.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

DEFAULT_CAPACITY = 64

# serial u16 + name 8 + age u8 + mobile 11 + temp u16 + bpm u8 + flags u8
RECORD_BYTES = 26

_NAME_RE = re.compile(r"^[A-Z0-9]{1,8}$")
_MOBILE_RE = re.compile(r"^[0-9]{11}$")

TEMP_MEASURED_MIN_DECI_C = 200
TEMP_MEASURED_MAX_DECI_C = 450
BPM_MAX = 250


class QueueFull(Exception):
    """Enqueue refused: every slot is occupied."""


class QueueEmpty(Exception):
    """Dequeue refused: no records are waiting."""


def validate_fields(
    name_code: str, age: int, mobile: str, temp_deci_c: int = 0, bpm: int = 0
) -> None:
    """Raise ValueError unless the demographic/vitals fields are storable."""
    if not isinstance(name_code, str) or not _NAME_RE.match(name_code):
        raise ValueError(f"name_code must be 1-8 chars of A-Z0-9, got {name_code!r}")
    if not 1 <= age <= 120:
        raise ValueError(f"age must be in [1, 120], got {age}")
    if not isinstance(mobile, str) or not _MOBILE_RE.match(mobile):
        raise ValueError(f"mobile must be exactly 11 digits, got {mobile!r}")
    # temp 0 means "not yet measured"; measured values sit in the sensor-
    # plausible 20.0-45.0 C window
    if temp_deci_c != 0 and not (
        TEMP_MEASURED_MIN_DECI_C <= temp_deci_c <= TEMP_MEASURED_MAX_DECI_C
    ):
        raise ValueError(f"temp_deci_c must be 0 or in [200, 450], got {temp_deci_c}")
    if not 0 <= bpm <= BPM_MAX:
        raise ValueError(f"bpm must be in [0, 250], got {bpm}")


@dataclass(frozen=True)
class PatientRecord:
    serial: int
    name_code: str
    age: int
    mobile: str
    temp_deci_c: int = 0
    bpm: int = 0

    def __post_init__(self) -> None:
        if self.serial < 1:
            raise ValueError(f"serial must be >= 1, got {self.serial}")
        validate_fields(self.name_code, self.age, self.mobile, self.temp_deci_c, self.bpm)


class PatientQueue:
    """Fixed-capacity FIFO; enqueue assigns serials 1, 2, 3, ..."""

    def __init__(self, capacity: int = DEFAULT_CAPACITY):
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self.slots: list[PatientRecord | None] = [None] * capacity
        self.head = 0
        self.count = 0
        self.next_serial = 1

    def __len__(self) -> int:
        return self.count

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PatientQueue):
            return NotImplemented
        return self.state() == other.state()

    def state(self) -> tuple:
        """Full state tuple, for exact before/after comparisons."""
        return (self.capacity, self.head, self.count, self.next_serial, tuple(self.slots))

    def enqueue(
        self, name_code: str, age: int, mobile: str, temp_deci_c: int = 0, bpm: int = 0
    ) -> int:
        """Append a record at the tail and return its assigned serial."""
        validate_fields(name_code, age, mobile, temp_deci_c, bpm)
        if self.count == self.capacity:
            raise QueueFull(f"all {self.capacity} slots occupied")
        record = PatientRecord(self.next_serial, name_code, age, mobile, temp_deci_c, bpm)
        self.slots[(self.head + self.count) % self.capacity] = record
        self.count += 1
        self.next_serial += 1
        return record.serial

    def dequeue(self) -> PatientRecord:
        """Remove and return the record at the head."""
        if self.count == 0:
            raise QueueEmpty("no records waiting")
        record = self.slots[self.head]
        assert record is not None
        self.slots[self.head] = None
        self.head = (self.head + 1) % self.capacity
        self.count -= 1
        return record

    def power_loss(self) -> None:
        """Model a power outage: volatile state clears, serials restart at 1."""
        self.slots = [None] * self.capacity
        self.head = 0
        self.count = 0
        self.next_serial = 1

    def serials(self) -> list[int]:
        """Serials currently queued, head first."""
        out = []
        for i in range(self.count):
            record = self.slots[(self.head + i) % self.capacity]
            assert record is not None
            out.append(record.serial)
        return out


def max_capacity(record_bytes: int, sram_budget_bytes: int) -> int:
    """How many records fit in the given SRAM budget."""
    if record_bytes < 1:
        raise ValueError(f"record_bytes must be >= 1, got {record_bytes}")
    if sram_budget_bytes < 0:
        raise ValueError(f"sram_budget_bytes must be >= 0, got {sram_budget_bytes}")
    return sram_budget_bytes // record_bytes
