# cython: language_level=3
"""Compiled sample-loop kernels.

Twin of `_kernels_py`; both must produce bit-identical output for every
input.  Integer-only arithmetic, with explicit 64-bit types in the loops.
"""

from libc.stdint cimport uint64_t, int64_t

cdef uint64_t _XS_MULT = 2685821657736338717UL
cdef uint64_t _SEED_ZERO_STATE = 0x9E3779B97F4A7C15UL

ADC_MAX = 1023
PPG_BASE = 400
PPG_PEAK = 700

cdef int64_t _CYCLE = 60000
cdef int64_t _RISE_END = 6000
cdef int64_t _FALL_END = 12000


cdef inline uint64_t _step(uint64_t s) nogil:
    s ^= s >> 12
    s ^= s << 25
    s ^= s >> 27
    return s


def xorshift64star_next(state):
    """Advance one step; returns (new_state, output)."""
    cdef uint64_t s = <uint64_t> state
    s = _step(s)
    return s, <uint64_t> (s * _XS_MULT)


def seed_state(seed):
    """Initial generator state for a seed; seed 0 gets a fixed nonzero state."""
    cdef uint64_t s = <uint64_t> seed
    if s == 0:
        s = _SEED_ZERO_STATE
    return s


def synth_ppg(bpm, duration_ms, fs_hz, noise_amp, seed):
    """Triangular photoplethysmogram samples on a 10-bit ADC scale.

    Each beat spends the first 20% of its period rising 400 -> 700 and the
    next 20% falling back; the rest is flat baseline.  noise_amp adds uniform
    integer noise in [-amp, +amp] from a deterministic generator, clamped to
    the ADC range.
    """
    if not 20 <= bpm <= 250:
        raise ValueError(f"bpm must be in [20, 250], got {bpm}")
    if duration_ms < 0:
        raise ValueError(f"duration_ms must be >= 0, got {duration_ms}")
    if not 50 <= fs_hz <= 1000:
        raise ValueError(f"fs_hz must be in [50, 1000], got {fs_hz}")
    if noise_amp < 0:
        raise ValueError(f"noise_amp must be >= 0, got {noise_amp}")

    cdef int64_t c_bpm = bpm
    cdef int64_t c_fs = fs_hz
    cdef int64_t c_amp = noise_amp
    cdef int64_t n = (<int64_t> duration_ms) * c_fs // 1000
    cdef uint64_t state = <uint64_t> seed_state(seed)
    cdef uint64_t span = <uint64_t> (2 * c_amp + 1)
    cdef int64_t i, t_ms, p, v

    out = []
    for i in range(n):
        t_ms = i * 1000 // c_fs
        p = (t_ms * c_bpm) % _CYCLE
        if p < _RISE_END:
            v = 400 + p // 20
        elif p < _FALL_END:
            v = 400 + (_FALL_END - p) // 20
        else:
            v = 400
        if c_amp:
            state = _step(state)
            v += <int64_t> ((state * _XS_MULT) % span) - c_amp
            if v < 0:
                v = 0
            elif v > 1023:
                v = 1023
        out.append(v)
    return out


def detect_beats(samples, fs_hz, threshold, refractory_ms):
    """Timestamps (ms) of rising threshold crossings, rate-limited.

    A crossing is prev < threshold <= current.  After an accepted beat,
    further crossings are ignored until refractory_ms has elapsed.  The
    first crossing is always accepted.
    """
    if not 50 <= fs_hz <= 1000:
        raise ValueError(f"fs_hz must be in [50, 1000], got {fs_hz}")
    if refractory_ms < 0:
        raise ValueError(f"refractory_ms must be >= 0, got {refractory_ms}")

    cdef int64_t c_fs = fs_hz
    cdef int64_t c_thr = threshold
    cdef int64_t c_ref = refractory_ms
    cdef int64_t last = -1
    cdef int64_t prev = c_thr
    cdef int64_t i = 0
    cdef int64_t cur, t_ms

    beats = []
    for sample in samples:
        cur = sample
        if prev < c_thr and c_thr <= cur:
            t_ms = i * 1000 // c_fs
            if last < 0 or t_ms - last >= c_ref:
                beats.append(t_ms)
                last = t_ms
        prev = cur
        i += 1
    return beats


def crc8(data):
    """CRC-8/ATM: polynomial 0x07, init 0x00, MSB first, no reflection."""
    cdef const unsigned char[::1] buf = data
    cdef unsigned int crc = 0
    cdef Py_ssize_t i
    cdef int bit
    for i in range(buf.shape[0]):
        crc ^= buf[i]
        for bit in range(8):
            if crc & 0x80:
                crc = ((crc << 1) ^ 0x07) & 0xFF
            else:
                crc = (crc << 1) & 0xFF
    return crc
