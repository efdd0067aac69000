"""Patient's-corner registration state machine.

A pure step function over immutable state: keypad events drive prompt
phases (name, age, mobile), sensor completions fill in vitals, and a
successful registration enqueues the record and shows the serial.  Name
entry uses phone-style multi-tap decoding.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import NamedTuple, Optional, Union

from .lcd import LcdBuffer, lcd
from .queue import PatientQueue, PatientRecord, QueueFull

KEYS = frozenset("0123456789ABCD*#")

MULTITAP = {
    "2": "ABC2",
    "3": "DEF3",
    "4": "GHI4",
    "5": "JKL5",
    "6": "MNO6",
    "7": "PQRS7",
    "8": "TUV8",
    "9": "WXYZ9",
    "0": " 0",
    "1": "1",
}

MULTITAP_TIMEOUT_MS = 1000
SERIAL_DWELL_MS = 5000
ERROR_DWELL_MS = 1500

NAME_MAX = 8
AGE_DIGITS_MAX = 3
MOBILE_DIGITS = 11

PROMPT_IDLE = "Press * to Start"
PROMPT_NAME = "Enter Name:"
PROMPT_AGE = "Enter Age:"
PROMPT_MOBILE = "Enter Mobile:"
PROMPT_TEMP = "Measuring Temp..."
PROMPT_PULSE = "Place Finger on Sensor"
PROMPT_QUEUE_FULL = "Queue Full"
NOTICE_INVALID = "Invalid, Retry"


class Phase(str, Enum):
    IDLE = "idle"
    ENTER_NAME = "enter_name"
    ENTER_AGE = "enter_age"
    ENTER_MOBILE = "enter_mobile"
    MEASURE_TEMP = "measure_temp"
    MEASURE_PULSE = "measure_pulse"
    SHOW_SERIAL = "show_serial"
    QUEUE_FULL_NOTICE = "queue_full_notice"


ENTRY_PHASES = frozenset({Phase.ENTER_NAME, Phase.ENTER_AGE, Phase.ENTER_MOBILE})
DWELL_PHASES = frozenset({Phase.SHOW_SERIAL, Phase.QUEUE_FULL_NOTICE})


class KeypadEvent(NamedTuple):
    key: str
    t_ms: int


@dataclass(frozen=True)
class SensorDone:
    t_ms: int
    temp_deci_c: Optional[int] = None
    bpm: Optional[int] = None


class Tick(NamedTuple):
    t_ms: int


BoothEvent = Union[KeypadEvent, SensorDone, Tick]


class Multitap(NamedTuple):
    key: str
    presses: int
    deadline_ms: int


@dataclass(frozen=True)
class BoothState:
    phase: Phase = Phase.IDLE
    name: str = ""
    age: str = ""
    mobile: str = ""
    tap: Optional[Multitap] = None
    temp_deci_c: int = 0
    bpm: int = 0
    serial: int = 0
    notice: str = ""
    notice_until_ms: int = -1
    dwell_until_ms: int = -1


@dataclass(frozen=True)
class StartTempMeasurement:
    pass


@dataclass(frozen=True)
class StartPulseMeasurement:
    pass


@dataclass(frozen=True)
class Enqueue:
    record: PatientRecord


BoothEffect = Union[StartTempMeasurement, StartPulseMeasurement, Enqueue, None]


class BoothStepResult(NamedTuple):
    state: BoothState
    lcd: LcdBuffer
    effect: BoothEffect


def initial_state() -> BoothState:
    return BoothState()


def candidate(tap: Multitap) -> str:
    """Character the pending multi-tap would commit right now."""
    chars = MULTITAP[tap.key]
    return chars[(tap.presses - 1) % len(chars)]


def multitap_decode(
    tap: Optional[Multitap], key: str, t_ms: int
) -> tuple[Multitap, Optional[str]]:
    """Advance the multi-tap decoder by one digit press.

    Same key within the timeout cycles the candidate; a different key or an
    expired timeout commits the old candidate and starts a new one.
    """
    if key not in MULTITAP:
        raise ValueError(f"multi-tap handles digits only, got {key!r}")
    if tap is not None and tap.key == key and t_ms <= tap.deadline_ms:
        return Multitap(key, tap.presses + 1, t_ms + MULTITAP_TIMEOUT_MS), None
    emitted = candidate(tap) if tap is not None else None
    return Multitap(key, 1, t_ms + MULTITAP_TIMEOUT_MS), emitted


def render_lcd(state: BoothState) -> LcdBuffer:
    """Pure projection of the state onto the 16x2 panel."""
    if state.phase is Phase.IDLE:
        return lcd(PROMPT_IDLE)
    if state.phase is Phase.ENTER_NAME:
        entry = state.name + (candidate(state.tap) if state.tap else "")
        row2 = state.notice or entry[-16:]
        return lcd(PROMPT_NAME, row2)
    if state.phase is Phase.ENTER_AGE:
        return lcd(PROMPT_AGE, state.notice or state.age[-16:])
    if state.phase is Phase.ENTER_MOBILE:
        return lcd(PROMPT_MOBILE, state.notice or state.mobile[-16:])
    if state.phase is Phase.MEASURE_TEMP:
        return lcd(PROMPT_TEMP)
    if state.phase is Phase.MEASURE_PULSE:
        return lcd(PROMPT_PULSE)
    if state.phase is Phase.SHOW_SERIAL:
        return lcd(f"Your Serial: {state.serial}")
    return lcd(PROMPT_QUEUE_FULL)


def _commit_char(state: BoothState, ch: Optional[str]) -> BoothState:
    # spaces have no place in a name code; a full buffer drops the char
    if ch is None or ch == " " or len(state.name) >= NAME_MAX:
        return state
    return replace(state, name=state.name + ch)


def _expire_timers(state: BoothState, t_ms: int) -> BoothState:
    if state.tap is not None and t_ms > state.tap.deadline_ms:
        state = _commit_char(state, candidate(state.tap))
        state = replace(state, tap=None)
    if state.notice and t_ms >= state.notice_until_ms:
        state = replace(state, notice="", notice_until_ms=-1)
    if state.phase in DWELL_PHASES and 0 <= state.dwell_until_ms <= t_ms:
        state = BoothState()
    return state


def _invalid(state: BoothState, t_ms: int) -> BoothState:
    return replace(state, notice=NOTICE_INVALID, notice_until_ms=t_ms + ERROR_DWELL_MS)


def next_deadline(state: BoothState) -> Optional[int]:
    """Earliest future time at which a timer changes this state, if any."""
    pending = []
    if state.tap is not None:
        pending.append(state.tap.deadline_ms + 1)  # commit fires strictly after
    if state.notice:
        pending.append(state.notice_until_ms)
    if state.phase in DWELL_PHASES and state.dwell_until_ms >= 0:
        pending.append(state.dwell_until_ms)
    return min(pending) if pending else None


def _step_key(state: BoothState, key: str, t_ms: int) -> BoothState:
    if state.phase is Phase.IDLE:
        if key == "*":
            return BoothState(phase=Phase.ENTER_NAME)
        return state

    if state.phase in ENTRY_PHASES and key == "C":
        return BoothState()

    if state.phase is Phase.ENTER_NAME:
        if key in MULTITAP:
            tap, emitted = multitap_decode(state.tap, key, t_ms)
            return replace(_commit_char(state, emitted), tap=tap)
        if key == "D":
            if state.tap is not None:
                return replace(state, tap=None)
            return replace(state, name=state.name[:-1])
        if key == "#":
            state = replace(_commit_char(state, candidate(state.tap)), tap=None) \
                if state.tap is not None else state
            if not state.name:
                return _invalid(state, t_ms)
            return replace(state, phase=Phase.ENTER_AGE, notice="", notice_until_ms=-1)
        return state

    if state.phase is Phase.ENTER_AGE:
        if key.isdigit():
            if len(state.age) < AGE_DIGITS_MAX:
                return replace(state, age=state.age + key)
            return state
        if key == "D":
            return replace(state, age=state.age[:-1])
        if key == "#":
            if state.age and 1 <= int(state.age) <= 120:
                return replace(state, phase=Phase.ENTER_MOBILE, notice="", notice_until_ms=-1)
            return _invalid(state, t_ms)
        return state

    if state.phase is Phase.ENTER_MOBILE:
        if key.isdigit():
            if len(state.mobile) < MOBILE_DIGITS:
                return replace(state, mobile=state.mobile + key)
            return state
        if key == "D":
            return replace(state, mobile=state.mobile[:-1])
        if key == "#":
            if len(state.mobile) == MOBILE_DIGITS:
                return replace(state, phase=Phase.MEASURE_TEMP, notice="", notice_until_ms=-1)
            return _invalid(state, t_ms)
        return state

    if state.phase in (Phase.MEASURE_TEMP, Phase.MEASURE_PULSE) and key == "C":
        return BoothState()

    return state


def booth_step(state: BoothState, event: BoothEvent, queue: PatientQueue) -> BoothStepResult:
    """Advance the booth by one event; may enqueue into the shared queue."""
    t_ms = event.t_ms
    state = _expire_timers(state, t_ms)
    effect: BoothEffect = None

    if isinstance(event, KeypadEvent):
        if event.key not in KEYS:
            raise ValueError(f"unknown key {event.key!r}")
        prior = state
        state = _step_key(state, event.key, t_ms)
        if state.phase is Phase.MEASURE_TEMP and prior.phase is not Phase.MEASURE_TEMP:
            effect = StartTempMeasurement()
    elif isinstance(event, SensorDone):
        if state.phase is Phase.MEASURE_TEMP and event.temp_deci_c is not None:
            state = replace(state, temp_deci_c=event.temp_deci_c, phase=Phase.MEASURE_PULSE)
            effect = StartPulseMeasurement()
        elif state.phase is Phase.MEASURE_PULSE and event.bpm is not None:
            try:
                serial = queue.enqueue(
                    state.name, int(state.age), state.mobile,
                    temp_deci_c=state.temp_deci_c, bpm=event.bpm,
                )
            except QueueFull:
                state = replace(
                    state, bpm=event.bpm, phase=Phase.QUEUE_FULL_NOTICE,
                    dwell_until_ms=t_ms + SERIAL_DWELL_MS,
                )
            else:
                record = PatientRecord(
                    serial, state.name, int(state.age), state.mobile,
                    state.temp_deci_c, event.bpm,
                )
                effect = Enqueue(record)
                state = replace(
                    state, bpm=event.bpm, serial=serial, phase=Phase.SHOW_SERIAL,
                    dwell_until_ms=t_ms + SERIAL_DWELL_MS,
                )
        # completions arriving in any other phase are stale; drop them
    elif not isinstance(event, Tick):
        raise TypeError(f"unsupported event {event!r}")

    return BoothStepResult(state, render_lcd(state), effect)
