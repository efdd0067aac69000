"""Pure-Python sample-loop kernels.

Twin of the compiled extension `_kernels`; both must produce bit-identical
output for every input.  All arithmetic is integer-only so results do not
depend on floating point or platform.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_XS_MULT = 2685821657736338717
_SEED_ZERO_STATE = 0x9E3779B97F4A7C15

ADC_MAX = 1023
PPG_BASE = 400
PPG_PEAK = 700
_CYCLE = 60000  # phase units per beat at any bpm (ms * bpm)
_RISE_END = 6000
_FALL_END = 12000


def xorshift64star_next(state: int) -> tuple[int, int]:
    """Advance one step; returns (new_state, output)."""
    s = state & _MASK64
    s ^= s >> 12
    s ^= (s << 25) & _MASK64
    s ^= s >> 27
    out = (s * _XS_MULT) & _MASK64
    return s, out


def seed_state(seed: int) -> int:
    """Initial generator state for a seed; seed 0 gets a fixed nonzero state."""
    s = seed & _MASK64
    if s == 0:
        s = _SEED_ZERO_STATE
    return s


def synth_ppg(bpm: int, duration_ms: int, fs_hz: int, noise_amp: int, seed: int) -> list[int]:
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

    n = duration_ms * fs_hz // 1000
    state = seed_state(seed)
    span = 2 * noise_amp + 1
    out = []
    for i in range(n):
        t_ms = i * 1000 // fs_hz
        p = (t_ms * bpm) % _CYCLE
        if p < _RISE_END:
            v = PPG_BASE + p // 20
        elif p < _FALL_END:
            v = PPG_BASE + (_FALL_END - p) // 20
        else:
            v = PPG_BASE
        if noise_amp:
            state, r = xorshift64star_next(state)
            v += r % span - noise_amp
            if v < 0:
                v = 0
            elif v > ADC_MAX:
                v = ADC_MAX
        out.append(v)
    return out


def detect_beats(
    samples: list[int], fs_hz: int, threshold: int, refractory_ms: int
) -> list[int]:
    """Timestamps (ms) of rising threshold crossings, rate-limited.

    A crossing is prev < threshold <= current.  After an accepted beat,
    further crossings are ignored until refractory_ms has elapsed.  The
    first crossing is always accepted.
    """
    if not 50 <= fs_hz <= 1000:
        raise ValueError(f"fs_hz must be in [50, 1000], got {fs_hz}")
    if refractory_ms < 0:
        raise ValueError(f"refractory_ms must be >= 0, got {refractory_ms}")

    beats = []
    last = -1
    prev = threshold  # sample 0 alone can never cross
    for i, cur in enumerate(samples):
        if prev < threshold <= cur:
            t_ms = i * 1000 // fs_hz
            if last < 0 or t_ms - last >= refractory_ms:
                beats.append(t_ms)
                last = t_ms
        prev = cur
    return beats


def crc8(data: bytes) -> int:
    """CRC-8/ATM: polynomial 0x07, init 0x00, MSB first, no reflection."""
    crc = 0
    for byte in data:
        crc ^= byte
        for _ in range(8):
            if crc & 0x80:
                crc = ((crc << 1) ^ 0x07) & 0xFF
            else:
                crc = (crc << 1) & 0xFF
    return crc
