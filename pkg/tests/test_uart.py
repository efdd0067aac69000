import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chamberline.queue import PatientRecord
from chamberline.uart import (
    FRAME_LEN,
    PAYLOAD_LEN,
    SOF,
    BadCrc,
    BadField,
    BadLength,
    BadSof,
    BaudUnreachable,
    FrameError,
    LinkUnusable,
    UartConfig,
    actual_baud,
    baud_error_pct,
    channel_transmit,
    decode_frame,
    encode_frame,
    ubrr_for,
)
from chamberline import kernels

BAUD_MATRIX = (2400, 4800, 9600, 19200, 38400, 57600, 115200)


class TestBaudMath:
    @pytest.mark.parametrize(
        "fosc,baud,u2x,expected",
        [(8_000_000, 9600, False, 51), (1_000_000, 38400, False, 1), (8_000_000, 38400, True, 25)],
    )
    def test_ubrr_known_points(self, fosc, baud, u2x, expected):
        assert ubrr_for(fosc, baud, u2x) == expected

    @pytest.mark.parametrize(
        "fosc,ubrr,u2x,expected",
        [
            (8_000_000, 51, False, 9615.38),
            (1_000_000, 1, False, 31250.0),
            (8_000_000, 25, True, 38461.54),
        ],
    )
    def test_actual_baud_known_points(self, fosc, ubrr, u2x, expected):
        assert actual_baud(fosc, ubrr, u2x) == pytest.approx(expected, abs=0.01)

    def test_error_at_9600_8mhz(self):
        assert baud_error_pct(8_000_000, 9600, False) == pytest.approx(0.16, abs=0.01)

    def test_error_at_38400_1mhz_is_large_negative(self):
        err = baud_error_pct(1_000_000, 38400, False)
        assert err == pytest.approx(-18.62, abs=0.05)

    def test_double_speed_recovers_38400_at_8mhz(self):
        assert baud_error_pct(8_000_000, 38400, True) == pytest.approx(0.16, abs=0.01)

    def test_unreachable_baud(self):
        with pytest.raises(BaudUnreachable):
            ubrr_for(1_000_000, 200_000, False)

    def test_register_clamped_at_4095(self):
        assert ubrr_for(8_000_000, 1, False) == 4095

    def test_u2x_never_worse_across_matrix(self):
        for fosc in (1_000_000, 8_000_000):
            for baud in BAUD_MATRIX:
                try:
                    slow = abs(baud_error_pct(fosc, baud, False))
                    fast = abs(baud_error_pct(fosc, baud, True))
                except BaudUnreachable:
                    continue
                assert fast <= slow + 1e-9

    def test_chosen_register_minimizes_error_among_neighbors(self):
        for fosc in (1_000_000, 8_000_000):
            for baud in BAUD_MATRIX:
                for u2x in (False, True):
                    try:
                        ubrr = ubrr_for(fosc, baud, u2x)
                    except BaudUnreachable:
                        continue
                    best = abs(actual_baud(fosc, ubrr, u2x) - baud)
                    for alt in (ubrr - 1, ubrr + 1):
                        if 0 <= alt <= 4095:
                            assert best <= abs(actual_baud(fosc, alt, u2x) - baud) + 1e-9


class TestUsability:
    def test_error_exactly_two_percent_is_usable(self):
        link = UartConfig(326_400, 1000, False)
        assert link.error_pct == pytest.approx(2.0, abs=1e-9)
        assert link.usable

    def test_just_over_two_percent_is_not(self):
        link = UartConfig(326_401, 1000, False)
        assert link.error_pct > 2.0
        assert not link.usable

    def test_default_config_usable(self):
        assert UartConfig().usable

    def test_1mhz_38400_not_usable(self):
        assert not UartConfig(1_000_000, 38400, False).usable


def make_record(**overrides) -> PatientRecord:
    base = dict(
        serial=1, name_code="A", age=1, mobile="00000000000", temp_deci_c=0, bpm=0
    )
    base.update(overrides)
    return PatientRecord(**base)


record_strategy = st.builds(
    PatientRecord,
    serial=st.integers(min_value=1, max_value=0xFFFF),
    name_code=st.text(
        alphabet="ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789", min_size=1, max_size=8
    ),
    age=st.integers(min_value=1, max_value=120),
    mobile=st.text(alphabet="0123456789", min_size=11, max_size=11),
    temp_deci_c=st.one_of(st.just(0), st.integers(min_value=200, max_value=450)),
    bpm=st.integers(min_value=0, max_value=250),
)


class TestCodec:
    def test_layout_of_minimal_record(self):
        frame = encode_frame(make_record())
        assert len(frame) == FRAME_LEN
        assert frame[0] == SOF
        assert frame[1] == 0x01
        assert frame[2] == PAYLOAD_LEN
        assert frame[3:5] == b"\x00\x01"  # serial, big endian
        assert frame[5:13] == b"A       "
        assert frame[14:25] == b"00000000000"
        assert frame[28] == 0  # flags: nothing measured

    def test_flags_track_measured_fields(self):
        assert encode_frame(make_record(temp_deci_c=366))[28] == 0x01
        assert encode_frame(make_record(bpm=75))[28] == 0x02
        assert encode_frame(make_record(temp_deci_c=366, bpm=75))[28] == 0x03

    def test_serial_must_fit_sixteen_bits(self):
        with pytest.raises(ValueError):
            encode_frame(make_record(serial=0x10000))

    @settings(max_examples=200, deadline=None)
    @given(record_strategy)
    def test_round_trip_identity(self, record):
        assert decode_frame(encode_frame(record)) == record

    @given(record_strategy, record_strategy)
    def test_distinct_records_distinct_payloads(self, a, b):
        if a != b:
            assert encode_frame(a) != encode_frame(b)

    def test_truncated_frame(self):
        frame = encode_frame(make_record())
        with pytest.raises(BadLength):
            decode_frame(frame[:29])

    def test_bad_sof(self):
        frame = bytearray(encode_frame(make_record()))
        frame[0] = 0x7D
        with pytest.raises(BadSof):
            decode_frame(bytes(frame))

    def test_unknown_version(self):
        frame = bytearray(encode_frame(make_record()))
        frame[1] = 0x02
        with pytest.raises(BadSof):
            decode_frame(bytes(frame))

    def test_payload_corruption_caught_by_crc(self):
        frame = bytearray(encode_frame(make_record()))
        frame[10] ^= 0x40
        with pytest.raises(BadCrc):
            decode_frame(bytes(frame))

    def test_valid_crc_bad_field(self):
        record = make_record()
        frame = bytearray(encode_frame(record))
        frame[13] = 0  # age byte -> 0, outside [1, 120]
        body = bytes(frame[1:-1])
        frame[-1] = kernels.crc8(body)
        with pytest.raises(BadField):
            decode_frame(bytes(frame))

    def test_every_single_bit_flip_detected(self):
        frame = encode_frame(make_record(serial=7, name_code="XY", age=42, bpm=80))
        for byte_i in range(FRAME_LEN):
            for bit in range(8):
                mutated = bytearray(frame)
                mutated[byte_i] ^= 1 << bit
                with pytest.raises(FrameError):
                    decode_frame(bytes(mutated))


class TestChannel:
    def test_delivery_at_9600(self):
        frame = encode_frame(make_record())
        delivered = channel_transmit(frame, UartConfig(8_000_000, 9600, False))
        assert delivered.frame == frame
        assert delivered.tx_time_ms == pytest.approx(31.2, abs=0.01)

    def test_unusable_link_refuses(self):
        frame = encode_frame(make_record())
        with pytest.raises(LinkUnusable):
            channel_transmit(frame, UartConfig(1_000_000, 38400, False))

    def test_boundary_error_still_delivers(self):
        frame = encode_frame(make_record())
        delivered = channel_transmit(frame, UartConfig(326_400, 1000, False))
        assert delivered.frame == frame
