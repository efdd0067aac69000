"""AVR-style UART timing model, patient-record frame codec, and channel.

The timing model reproduces the UBRR/U2X baud generator arithmetic; the
codec is a fixed 30-byte frame with a CRC-8 trailer; the channel delivers a
frame intact when the clock mismatch is tolerable and refuses otherwise.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import NamedTuple

from . import kernels
from .queue import PatientRecord

UBRR_MAX = 4095

SOF = 0x7E
VERSION = 0x01
PAYLOAD_LEN = 26
FRAME_LEN = 30

# start bit + 8 data + stop bit per byte
BITS_PER_FRAME = FRAME_LEN * 10

# total clock mismatch an 8N1 receiver tolerates before sampling drifts off
USABLE_ERROR_PCT = 2.0

_PAYLOAD_FMT = ">H8sB11sHBB"

FLAG_TEMP_MEASURED = 0x01
FLAG_BPM_MEASURED = 0x02


class BaudUnreachable(Exception):
    """Target baud too fast for the oscillator even at divisor 1."""


class LinkUnusable(Exception):
    """Baud mismatch beyond the receiver's tolerance; nothing gets through."""


class FrameError(Exception):
    """Base for decode failures."""


class BadSof(FrameError):
    """Missing start-of-frame marker or unknown version byte."""


class BadLength(FrameError):
    """Frame size or declared payload length is wrong."""


class BadCrc(FrameError):
    """Checksum mismatch."""


class BadField(FrameError):
    """Payload decoded but a field violates record invariants."""


def _divisor(u2x: bool) -> int:
    return 8 if u2x else 16


def ubrr_for(f_osc_hz: int, target_baud: int, u2x: bool = False) -> int:
    """Baud-rate register value: round(f_osc / (k * baud)) - 1, clamped."""
    if f_osc_hz < 1 or target_baud < 1:
        raise ValueError("f_osc_hz and target_baud must be positive")
    k = _divisor(u2x)
    div = (2 * f_osc_hz + k * target_baud) // (2 * k * target_baud)
    if div < 1:
        raise BaudUnreachable(f"{target_baud} baud needs divisor < 1 at {f_osc_hz} Hz")
    return min(div - 1, UBRR_MAX)


def actual_baud(f_osc_hz: int, ubrr: int, u2x: bool = False) -> float:
    """Baud the generator really produces for a register value."""
    if not 0 <= ubrr <= UBRR_MAX:
        raise ValueError(f"ubrr must be in [0, {UBRR_MAX}], got {ubrr}")
    return f_osc_hz / (_divisor(u2x) * (ubrr + 1))


def baud_error_pct(f_osc_hz: int, target_baud: int, u2x: bool = False) -> float:
    """Signed percentage deviation of the achievable baud from the target."""
    got = actual_baud(f_osc_hz, ubrr_for(f_osc_hz, target_baud, u2x), u2x)
    return 100.0 * (got - target_baud) / target_baud


@dataclass(frozen=True)
class UartConfig:
    f_osc_hz: int = 8_000_000
    target_baud: int = 9600
    u2x: bool = False

    @property
    def ubrr(self) -> int:
        return ubrr_for(self.f_osc_hz, self.target_baud, self.u2x)

    @property
    def actual_baud(self) -> float:
        return actual_baud(self.f_osc_hz, self.ubrr, self.u2x)

    @property
    def error_pct(self) -> float:
        return baud_error_pct(self.f_osc_hz, self.target_baud, self.u2x)

    @property
    def usable(self) -> bool:
        try:
            return abs(self.error_pct) <= USABLE_ERROR_PCT
        except BaudUnreachable:
            return False


def encode_frame(record: PatientRecord) -> bytes:
    """Serialize a record into the 30-byte wire frame."""
    if record.serial > 0xFFFF:
        raise ValueError(f"serial {record.serial} does not fit in 16 bits")
    flags = 0
    if record.temp_deci_c != 0:
        flags |= FLAG_TEMP_MEASURED
    if record.bpm != 0:
        flags |= FLAG_BPM_MEASURED
    payload = struct.pack(
        _PAYLOAD_FMT,
        record.serial,
        record.name_code.encode("ascii").ljust(8),
        record.age,
        record.mobile.encode("ascii"),
        record.temp_deci_c,
        record.bpm,
        flags,
    )
    body = bytes([VERSION, PAYLOAD_LEN]) + payload
    return bytes([SOF]) + body + bytes([kernels.crc8(body)])


def decode_frame(data: bytes) -> PatientRecord:
    """Parse and validate a frame; raises the first failing check in order
    SOF/version, length, CRC, field ranges."""
    if len(data) < 1 or data[0] != SOF:
        raise BadSof("missing 0x7E start-of-frame")
    if len(data) < 2 or data[1] != VERSION:
        raise BadSof(f"unsupported version byte {data[1]:#04x}" if len(data) > 1 else "truncated header")
    if len(data) != FRAME_LEN or data[2] != PAYLOAD_LEN:
        raise BadLength(f"expected {FRAME_LEN}-byte frame with length byte {PAYLOAD_LEN}")
    body, crc = data[1:-1], data[-1]
    if kernels.crc8(body) != crc:
        raise BadCrc(f"crc {crc:#04x} != computed {kernels.crc8(body):#04x}")
    serial, name, age, mobile, temp, bpm, _flags = struct.unpack(_PAYLOAD_FMT, data[3:-1])
    try:
        return PatientRecord(
            serial=serial,
            name_code=name.decode("ascii").rstrip(" "),
            age=age,
            mobile=mobile.decode("ascii"),
            temp_deci_c=temp,
            bpm=bpm,
        )
    except (ValueError, UnicodeDecodeError) as exc:
        raise BadField(str(exc)) from exc


class Delivered(NamedTuple):
    frame: bytes
    tx_time_ms: float


def channel_transmit(frame: bytes, link: UartConfig) -> Delivered:
    """Deliver a frame over the link, or refuse when the mismatch is fatal.

    An all-or-nothing model: within tolerance the frame arrives intact after
    one 8N1 transmit time; beyond it nothing coherent is received.
    """
    if not link.usable:
        raise LinkUnusable(
            f"baud error {link.error_pct:+.2f}% exceeds {USABLE_ERROR_PCT}% tolerance"
        )
    return Delivered(frame, BITS_PER_FRAME / link.actual_baud * 1000.0)
