"""Discrete-event simulation harness.

A virtual millisecond clock drives the booth FSM, the doctor button, the
shared queue, and a modeled sensor node.  Scenarios are text files of
timestamped events; runs are fully deterministic for a given seed, so logs
and reports are byte-identical across replays.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import asdict, dataclass
from typing import NamedTuple, Optional, Sequence

from . import booth as booth_fsm
from . import doctor as doctor_fsm
from . import kernels, vitals
from .booth import (
    BoothState,
    Enqueue,
    KeypadEvent,
    SensorDone,
    StartPulseMeasurement,
    StartTempMeasurement,
    Tick,
)
from .lcd import LcdBuffer
from .queue import PatientQueue
from .uart import BaudUnreachable, UartConfig, encode_frame

TEMP_SAMPLE_COUNT = 16
TEMP_SAMPLE_SPACING_MS = 10
TEMP_WINDOW_MS = TEMP_SAMPLE_COUNT * TEMP_SAMPLE_SPACING_MS
PULSE_WINDOW_MS = 10_000
PULSE_FS_HZ = 100
PULSE_NOISE = 0.05

DEFAULT_TRUTH_TEMP_DECI_C = 366
DEFAULT_TRUTH_BPM = 75

TARGETS = ("booth", "doctor", "power", "sensor")


class ParseError(Exception):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class ScenarioEvent(NamedTuple):
    t_ms: int
    target: str
    action: str
    args: dict


@dataclass(frozen=True)
class Scenario:
    events: tuple[ScenarioEvent, ...]


def _parse_args(tokens: Sequence[str], lineno: int) -> dict:
    args = {}
    for tok in tokens:
        if "=" not in tok:
            raise ParseError(lineno, f"expected key=value, got {tok!r}")
        k, v = tok.split("=", 1)
        args[k] = v
    return args


def load_scenario(text: str) -> Scenario:
    """Parse `<t_ms> <target> <action>[ key=value ...]` lines.

    Blank lines and `#` comments are skipped.  Times must be non-decreasing.
    Value-bearing actions also accept the inline form `set_temp_c=37.0`.
    """
    events: list[ScenarioEvent] = []
    prev_t = 0
    # only whole-line comments: '#' is also a keypad key, so no inline stripping
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) < 3:
            raise ParseError(lineno, "need at least `<t_ms> <target> <action>`")
        try:
            t_ms = int(parts[0])
        except ValueError:
            raise ParseError(lineno, f"bad timestamp {parts[0]!r}") from None
        if t_ms < 0:
            raise ParseError(lineno, "timestamp must be >= 0")
        if t_ms < prev_t:
            raise ParseError(lineno, f"time {t_ms} goes backwards (previous {prev_t})")
        target = parts[1]
        if target not in TARGETS:
            raise ParseError(lineno, f"unknown target {target!r}")
        action = parts[2]
        raw_args = _parse_args(parts[3:], lineno)
        if "=" in action:
            action, inline = action.split("=", 1)
            raw_args["v"] = inline

        args: dict = {}
        if target == "booth":
            if action != "key":
                raise ParseError(lineno, f"booth supports only `key`, got {action!r}")
            k = raw_args.get("k", raw_args.get("v"))
            if k is None or k not in booth_fsm.KEYS:
                raise ParseError(lineno, f"key needs k=<one of 0-9 A-D * #>, got {k!r}")
            args = {"k": k}
        elif target == "doctor":
            if action != "press" or raw_args:
                raise ParseError(lineno, "doctor supports only bare `press`")
        elif target == "power":
            if action != "loss" or raw_args:
                raise ParseError(lineno, "power supports only bare `loss`")
        else:  # sensor
            if action == "set_temp_c":
                try:
                    v = float(raw_args["v"])
                except (KeyError, ValueError):
                    raise ParseError(lineno, "set_temp_c needs a numeric value") from None
                if not 0.0 <= v <= 99.9:
                    raise ParseError(lineno, f"temperature {v} out of range")
                args = {"v": v}
            elif action == "set_bpm":
                try:
                    v = int(raw_args["v"])
                except (KeyError, ValueError):
                    raise ParseError(lineno, "set_bpm needs an integer value") from None
                if not 20 <= v <= 250:
                    raise ParseError(lineno, f"bpm {v} out of [20, 250]")
                args = {"v": v}
            elif action == "finger":
                v = raw_args.get("on", raw_args.get("v"))
                if v not in ("on", "off", "true", "false"):
                    raise ParseError(lineno, "finger needs on|off")
                args = {"on": v in ("on", "true")}
            else:
                raise ParseError(lineno, f"unknown sensor action {action!r}")
        events.append(ScenarioEvent(t_ms, target, action, args))
        prev_t = t_ms
    return Scenario(tuple(events))


@dataclass(frozen=True)
class SimConfig:
    f_osc_hz: int = 8_000_000
    target_baud: int = 9600
    u2x: bool = False
    vref_mv: int = 5000
    capacity: int = 64
    seed: int = 0


@dataclass
class MetricsReport:
    max_abs_temp_error_deci_c: Optional[int]
    max_abs_bpm_error: Optional[int]
    max_latency_ms: Optional[float]
    uart_error_pct: Optional[float]
    patients_processed: int
    queue_overflows: int

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def report_table(report: MetricsReport) -> str:
    """Fixed five-row summary, one line per headline figure."""
    def fmt(value: Optional[str]) -> str:
        return value if value is not None else "n/a"

    temp = None
    if report.max_abs_temp_error_deci_c is not None:
        temp = f"max error {report.max_abs_temp_error_deci_c / 10:.1f} C"
    pulse = None
    if report.max_abs_bpm_error is not None:
        pulse = f"max error {report.max_abs_bpm_error} BPM"
    latency = None
    if report.max_latency_ms is not None:
        latency = f"max {report.max_latency_ms:.1f} ms"
    uart = None
    if report.uart_error_pct is not None:
        uart = f"{report.uart_error_pct:+.2f}%"

    rows = [
        ("Temperature accuracy", fmt(temp)),
        ("Pulse accuracy", fmt(pulse)),
        ("Button-to-display latency", fmt(latency)),
        ("UART error", fmt(uart)),
        ("Operation mode", "Offline, stand-alone"),
    ]
    width = max(len(label) for label, _ in rows)
    return "\n".join(f"{label:<{width}}  {value}" for label, value in rows)


class SimCore:
    """Shared engine behind batch runs and the live gateway.

    All mutation enters through the command methods; internal completions
    (sensor windows, booth timers) live on one heap keyed by (time, seq) so
    replays are order-stable.
    """

    def __init__(self, config: SimConfig):
        self.config = config
        self.queue = PatientQueue(config.capacity)
        self.booth = booth_fsm.initial_state()
        self.doctor = doctor_fsm.initial_state()
        self.link = UartConfig(config.f_osc_hz, config.target_baud, config.u2x)
        self.t_ms = 0
        self.log: list[str] = []
        self.truth_temp_deci_c = DEFAULT_TRUTH_TEMP_DECI_C
        self.truth_bpm = DEFAULT_TRUTH_BPM
        self.finger_on = True
        self.last_frame: Optional[bytes] = None

        self._heap: list[tuple[int, int, tuple]] = []
        self._seq = 0
        self._meas_id = 0  # latest started measurement; older completions are stale
        self._tick_times: set[int] = set()
        self._rng = kernels.seed_state(config.seed)

        self._max_temp_err: Optional[int] = None
        self._max_bpm_err: Optional[int] = None
        self._max_latency: Optional[float] = None
        self._processed = 0
        self._overflows = 0

        self._booth_lcd: Optional[LcdBuffer] = None
        self._doctor_lcd: Optional[LcdBuffer] = None
        self._log_link()
        self._sync_booth_lcd(booth_fsm.render_lcd(self.booth))
        self._sync_doctor_lcd(self.doctor.display)

    # -- logging ---------------------------------------------------------

    def _log(self, source: str, text: str) -> None:
        self.log.append(f"{self.t_ms:>8} {source:<7} {text}")

    def _log_link(self) -> None:
        try:
            detail = f"err={self.link.error_pct:+.2f}% usable={str(self.link.usable).lower()}"
        except BaudUnreachable:
            detail = "err=unreachable usable=false"
        self._log(
            "link",
            f"cfg f_osc={self.link.f_osc_hz} baud={self.link.target_baud} "
            f"u2x={str(self.link.u2x).lower()} {detail}",
        )

    def _sync_booth_lcd(self, panel: LcdBuffer) -> None:
        if panel != self._booth_lcd:
            self._booth_lcd = panel
            self._log("booth", f"lcd |{panel.row1}|{panel.row2}|")

    def _sync_doctor_lcd(self, panel: LcdBuffer) -> None:
        if panel != self._doctor_lcd:
            self._doctor_lcd = panel
            self._log("doctor", f"lcd |{panel.row1}|{panel.row2}|")

    # -- deterministic randomness -----------------------------------------

    def _rand(self) -> int:
        self._rng, out = kernels.xorshift64star_next(self._rng)
        return out

    # -- scheduling --------------------------------------------------------

    def _schedule(self, t_ms: int, payload: tuple) -> None:
        heapq.heappush(self._heap, (t_ms, self._seq, payload))
        self._seq += 1

    def _schedule_booth_timers(self) -> None:
        deadline = booth_fsm.next_deadline(self.booth)
        if deadline is not None and deadline not in self._tick_times:
            self._tick_times.add(deadline)
            self._schedule(deadline, ("tick",))

    def advance_to(self, target_ms: int) -> None:
        """Fire every internal event due at or before target_ms, then land there."""
        if target_ms < self.t_ms:
            raise ValueError(f"cannot move clock back to {target_ms} from {self.t_ms}")
        while self._heap and self._heap[0][0] <= target_ms:
            t_ms, _seq, payload = heapq.heappop(self._heap)
            self.t_ms = t_ms
            self._dispatch(payload)
        self.t_ms = target_ms

    def drain(self) -> None:
        """Run out every remaining scheduled completion and timer."""
        while self._heap:
            t_ms, _seq, payload = heapq.heappop(self._heap)
            self.t_ms = t_ms
            self._dispatch(payload)

    def _dispatch(self, payload: tuple) -> None:
        kind = payload[0]
        if kind == "tick":
            self._tick_times.discard(self.t_ms)
            self._apply_booth(Tick(self.t_ms))
        elif kind == "temp_done":
            _, meas_id, est, truth = payload
            if meas_id != self._meas_id:
                return
            self._log("sensor", f"temp done est={est} err={abs(est - truth)}")
            err = abs(est - truth)
            if self._max_temp_err is None or err > self._max_temp_err:
                self._max_temp_err = err
            self._apply_booth(SensorDone(self.t_ms, temp_deci_c=est))
        elif kind == "pulse_done":
            _, meas_id, est, truth, had_finger = payload
            if meas_id != self._meas_id:
                return
            if had_finger:
                err = abs(est - truth)
                self._log("sensor", f"pulse done est={est} err={err}")
                if self._max_bpm_err is None or err > self._max_bpm_err:
                    self._max_bpm_err = err
            else:
                self._log("sensor", "pulse done est=0 finger=off")
            self._apply_booth(SensorDone(self.t_ms, bpm=est))
        else:
            raise AssertionError(f"unknown internal event {payload!r}")

    # -- booth plumbing ----------------------------------------------------

    def _apply_booth(self, event) -> None:
        prior_phase = self.booth.phase
        result = booth_fsm.booth_step(self.booth, event, self.queue)
        self.booth = result.state
        if isinstance(result.effect, StartTempMeasurement):
            self._start_temp()
        elif isinstance(result.effect, StartPulseMeasurement):
            self._start_pulse()
        elif isinstance(result.effect, Enqueue):
            self._log(
                "queue",
                f"enqueue serial={result.effect.record.serial} count={self.queue.count}",
            )
        elif (
            prior_phase is booth_fsm.Phase.MEASURE_PULSE
            and result.state.phase is booth_fsm.Phase.QUEUE_FULL_NOTICE
        ):
            self._overflows += 1
            self._log("queue", f"full rejected count={self.queue.count}")
        self._sync_booth_lcd(result.lcd)
        self._schedule_booth_timers()

    def _start_temp(self) -> None:
        self._meas_id += 1
        truth = self.truth_temp_deci_c
        vref = self.config.vref_mv
        adc_true = (2 * truth * 1024 + vref) // (2 * vref)
        adc_true = min(1023, max(0, adc_true))
        samples = []
        for _ in range(TEMP_SAMPLE_COUNT):
            noisy = adc_true + self._rand() % 3 - 1  # +/-1 LSB sensor noise
            samples.append(min(1023, max(0, noisy)))
        est = vitals.average_temperature(samples, vref)
        est = min(450, max(200, est))  # storable window
        self._log("sensor", f"temp start truth={truth}")
        self._schedule(self.t_ms + TEMP_WINDOW_MS, ("temp_done", self._meas_id, est, truth))

    def _start_pulse(self) -> None:
        self._meas_id += 1
        if not self.finger_on:
            self._log("sensor", "pulse start finger=off")
            self._schedule(
                self.t_ms + PULSE_WINDOW_MS,
                ("pulse_done", self._meas_id, 0, self.truth_bpm, False),
            )
            return
        truth = self.truth_bpm
        wave = vitals.synth_ppg(truth, PULSE_WINDOW_MS, PULSE_FS_HZ, PULSE_NOISE, self._rand())
        try:
            est = min(250, vitals.estimate_bpm(wave))
        except vitals.InsufficientBeats:
            est = 0
        self._log("sensor", f"pulse start truth={truth}")
        self._schedule(
            self.t_ms + PULSE_WINDOW_MS, ("pulse_done", self._meas_id, est, truth, True)
        )

    # -- external commands ---------------------------------------------------

    def key(self, k: str) -> None:
        self._log("booth", f"key {k}")
        self._apply_booth(KeypadEvent(k, self.t_ms))

    def press(self) -> None:
        result = doctor_fsm.press_next(self.doctor, self.queue, self.link, self.t_ms)
        self.doctor = result.state
        if result.outcome == "delivered":
            assert result.record is not None
            self.last_frame = encode_frame(result.record)
            self._processed += 1
            self._log(
                "doctor",
                f"press outcome=delivered serial={result.record.serial} "
                f"latency={result.latency_ms:.1f}ms",
            )
        else:
            self._log(
                "doctor", f"press outcome={result.outcome} latency={result.latency_ms:.1f}ms"
            )
        if self._max_latency is None or result.latency_ms > self._max_latency:
            self._max_latency = result.latency_ms
        self._sync_doctor_lcd(result.lcd)

    def power_loss(self) -> None:
        self.queue.power_loss()
        self.booth = BoothState()
        self.doctor = doctor_fsm.initial_state()
        self._meas_id += 1  # in-flight measurements die with the power
        self.last_frame = None
        self._log("power", "loss queue_cleared")
        self._sync_booth_lcd(booth_fsm.render_lcd(self.booth))
        self._sync_doctor_lcd(self.doctor.display)

    def set_truth_temp_c(self, value_c: float) -> None:
        self.truth_temp_deci_c = int(value_c * 10 + 0.5)
        self._log("sensor", f"truth temp_deci={self.truth_temp_deci_c}")

    def set_truth_bpm(self, value: int) -> None:
        if not 20 <= value <= 250:
            raise ValueError(f"bpm truth must be in [20, 250], got {value}")
        self.truth_bpm = value
        self._log("sensor", f"truth bpm={value}")

    def set_finger(self, on: bool) -> None:
        self.finger_on = on
        self._log("sensor", f"finger {'on' if on else 'off'}")

    def set_link(self, f_osc_hz: int, target_baud: int, u2x: bool) -> None:
        self.link = UartConfig(f_osc_hz, target_baud, u2x)
        self._log_link()

    def apply_scenario_event(self, event: ScenarioEvent) -> None:
        if event.target == "booth":
            self.key(event.args["k"])
        elif event.target == "doctor":
            self.press()
        elif event.target == "power":
            self.power_loss()
        elif event.action == "set_temp_c":
            self.set_truth_temp_c(event.args["v"])
        elif event.action == "set_bpm":
            self.set_truth_bpm(event.args["v"])
        else:
            self.set_finger(event.args["on"])

    # -- results ------------------------------------------------------------

    def metrics(self) -> MetricsReport:
        try:
            uart_err: Optional[float] = self.link.error_pct
        except BaudUnreachable:
            uart_err = None
        return MetricsReport(
            max_abs_temp_error_deci_c=self._max_temp_err,
            max_abs_bpm_error=self._max_bpm_err,
            max_latency_ms=self._max_latency,
            uart_error_pct=uart_err,
            patients_processed=self._processed,
            queue_overflows=self._overflows,
        )

    def snapshot(self) -> dict:
        try:
            error_pct: Optional[float] = self.link.error_pct
        except BaudUnreachable:
            error_pct = None
        assert self._booth_lcd is not None and self._doctor_lcd is not None
        return {
            "t_ms": self.t_ms,
            "booth": {
                "phase": self.booth.phase.value,
                "lcd_rows": [self._booth_lcd.row1, self._booth_lcd.row2],
            },
            "doctor": {
                "lcd_rows": [self._doctor_lcd.row1, self._doctor_lcd.row2],
                "last_latency_ms": self.doctor.last_latency_ms,
                "last_frame_hex": self.last_frame.hex() if self.last_frame else None,
            },
            "queue": {
                "count": self.queue.count,
                "capacity": self.queue.capacity,
                "next_serial": self.queue.next_serial,
                "serials": self.queue.serials(),
            },
            "link": {
                "f_osc": self.link.f_osc_hz,
                "baud": self.link.target_baud,
                "u2x": self.link.u2x,
                "error_pct": error_pct,
                "usable": self.link.usable,
            },
        }


def run(scenario: Scenario, config: SimConfig = SimConfig()) -> tuple[MetricsReport, list[str]]:
    """Execute a scenario to completion; returns (report, event log)."""
    core = SimCore(config)
    for event in scenario.events:
        core.advance_to(event.t_ms)
        core.apply_scenario_event(event)
    core.drain()
    return core.metrics(), list(core.log)
