"""Doctor's-corner logic: one button, dequeue, display, latency accounting.

A button press pulls the head record, ships it over the modeled link, and
renders what arrived.  Latency charges three machine terms: switch
debounce, 8N1 transmit time, and the character-by-character LCD update.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, NamedTuple, Optional

from .lcd import COLS, ROWS, LcdBuffer, lcd
from .queue import PatientQueue, PatientRecord, QueueEmpty
from .uart import UartConfig, channel_transmit, decode_frame, encode_frame

DEBOUNCE_MS = 20
LCD_MS_PER_CHAR = 2
LCD_CHARS = COLS * ROWS

NOTICE_EMPTY = "No Patients"
NOTICE_LINK_ERROR = "LINK ERROR"

PressOutcome = Literal["delivered", "queue_empty", "link_error"]


@dataclass(frozen=True)
class DoctorState:
    display: LcdBuffer = lcd()
    current: Optional[PatientRecord] = None
    last_latency_ms: Optional[float] = None


class PressResult(NamedTuple):
    state: DoctorState
    lcd: LcdBuffer
    latency_ms: float
    outcome: PressOutcome
    record: Optional[PatientRecord]


def initial_state() -> DoctorState:
    return DoctorState()


def render_record(record: PatientRecord) -> LcdBuffer:
    """Two compact rows: serial/age/temperature, then pulse and name."""
    row1 = f"S{record.serial} A{record.age} T{record.temp_deci_c // 10}.{record.temp_deci_c % 10}"
    row2 = f"P{record.bpm} {record.name_code}"
    return lcd(row1, row2)


def press_next(
    state: DoctorState,
    queue: PatientQueue,
    link: UartConfig,
    t_ms: int,
    debounce_ms: int = DEBOUNCE_MS,
    lcd_ms_per_char: int = LCD_MS_PER_CHAR,
) -> PressResult:
    """Handle one button press at virtual time t_ms.

    An unusable link refuses before touching the queue: that is a
    configuration fault and the waiting patient must not be lost.
    """
    base_ms = float(debounce_ms + LCD_CHARS * lcd_ms_per_char)

    if not link.usable:
        display = lcd(NOTICE_LINK_ERROR)
        new = DoctorState(display, None, base_ms)
        return PressResult(new, display, base_ms, "link_error", None)

    try:
        record = queue.dequeue()
    except QueueEmpty:
        display = lcd(NOTICE_EMPTY)
        new = DoctorState(display, None, base_ms)
        return PressResult(new, display, base_ms, "queue_empty", None)

    delivered = channel_transmit(encode_frame(record), link)
    received = decode_frame(delivered.frame)
    latency = base_ms + delivered.tx_time_ms
    display = render_record(received)
    new = DoctorState(display, received, latency)
    return PressResult(new, display, latency, "delivered", received)
