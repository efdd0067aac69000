import pytest

from chamberline.doctor import (
    DoctorState,
    initial_state,
    press_next,
    render_record,
)
from chamberline.queue import PatientQueue, PatientRecord
from chamberline.uart import UartConfig

LINK_9600 = UartConfig(8_000_000, 9600, False)


def loaded_queue(n=2):
    q = PatientQueue()
    for i in range(n):
        q.enqueue(f"P{i}", 30 + i, f"{i:011d}", temp_deci_c=366, bpm=72)
    return q


class TestPress:
    def test_delivers_head_record(self):
        q = loaded_queue(2)
        result = press_next(initial_state(), q, LINK_9600, 1000)
        assert result.outcome == "delivered"
        assert result.record.serial == 1
        assert q.serials() == [2]

    def test_latency_decomposition_at_9600(self):
        q = loaded_queue(1)
        result = press_next(initial_state(), q, LINK_9600, 0)
        # 20 debounce + 31.2 transmit + 64 display
        assert result.latency_ms == pytest.approx(115.2, abs=0.01)
        assert result.latency_ms < 1200

    def test_empty_queue_notice(self):
        result = press_next(initial_state(), PatientQueue(), LINK_9600, 0)
        assert result.outcome == "queue_empty"
        assert result.lcd.row1 == "No Patients     "
        assert result.record is None
        assert result.latency_ms == pytest.approx(84.0)

    def test_unusable_link_keeps_patient_queued(self):
        q = loaded_queue(1)
        before = q.state()
        result = press_next(initial_state(), q, UartConfig(1_000_000, 38400, False), 0)
        assert result.outcome == "link_error"
        assert result.lcd.row1 == "LINK ERROR      "
        assert q.state() == before

    def test_state_carries_record_and_latency(self):
        q = loaded_queue(1)
        result = press_next(initial_state(), q, LINK_9600, 0)
        assert isinstance(result.state, DoctorState)
        assert result.state.current == result.record
        assert result.state.last_latency_ms == result.latency_ms

    def test_successive_presses_walk_the_fifo(self):
        q = loaded_queue(3)
        state = initial_state()
        seen = []
        for t in (0, 100, 200):
            result = press_next(state, q, LINK_9600, t)
            state = result.state
            seen.append(result.record.serial)
        assert seen == [1, 2, 3]


class TestDisplay:
    def test_row_format(self):
        record = PatientRecord(12, "AB", 34, "01712345678", 371, 72)
        panel = render_record(record)
        assert panel.row1 == "S12 A34 T37.1   "
        assert panel.row2 == "P72 AB          "

    def test_unmeasured_temp_renders_zero(self):
        record = PatientRecord(1, "A", 30, "01712345678", 0, 0)
        assert render_record(record).row1 == "S1 A30 T0.0     "

    def test_widest_record_still_fits(self):
        record = PatientRecord(65535, "ABCDEFGH", 120, "01712345678", 450, 250)
        panel = render_record(record)
        assert len(panel.row1) == 16 and len(panel.row2) == 16
        assert panel.row1.startswith("S65535 A120 T45")
        assert panel.row2 == "P250 ABCDEFGH   "


class TestLatencyMatrix:
    @pytest.mark.parametrize("baud", [9600, 19200, 38400])
    @pytest.mark.parametrize("u2x", [False, True])
    def test_every_usable_config_meets_bound(self, baud, u2x):
        link = UartConfig(8_000_000, baud, u2x)
        if not link.usable:
            pytest.skip("config not usable")
        result = press_next(initial_state(), loaded_queue(1), link, 0)
        assert result.outcome == "delivered"
        assert result.latency_ms < 1200
