"""Sensor acquisition pipeline.

LM35 temperature conversion with window averaging, synthetic pulse-waveform
generation, threshold beat detection, and BPM estimation.  All conversions
are integer arithmetic with half-up rounding, matching what an 8-bit MCU
would compute.
"""

from __future__ import annotations

from typing import Iterable, NamedTuple, Sequence

from . import kernels

DEFAULT_VREF_MV = 5000
AVERAGE_WINDOW = 16

# midway between synthetic baseline 400 and peak 700
DEFAULT_THRESHOLD = 550
# shortest physiological inter-beat gap: 240 ms <=> 250 BPM
DEFAULT_REFRACTORY_MS = 240

INTERVAL_MIN_MS = 240
INTERVAL_MAX_MS = 3000

NOISE_FULL_SCALE = 300  # noise fraction 1.0 spans the full 300-count pulse height


class EmptyWindow(Exception):
    """Averaging window has no samples."""


class OutOfRange(Exception):
    """Beat interval outside the physiological window."""


class InsufficientBeats(Exception):
    """Too few beats detected to estimate a rate."""


class AdcSample(NamedTuple):
    t_ms: int
    value: int


def lm35_to_deci_celsius(adc: int, vref_mv: int = DEFAULT_VREF_MV) -> int:
    """Convert a 10-bit ADC reading of an LM35 (10 mV per degree C) to deci-C.

    millivolts = adc * vref / 1024, and 10 mV per degree means the millivolt
    count already is tenths of a degree.  Rounded half up.
    """
    if not 0 <= adc <= 1023:
        raise ValueError(f"adc must be in [0, 1023], got {adc}")
    if vref_mv < 1:
        raise ValueError(f"vref_mv must be >= 1, got {vref_mv}")
    return (adc * vref_mv + 512) // 1024


def _values(samples: Iterable[AdcSample | int]) -> list[int]:
    return [s.value if isinstance(s, AdcSample) else int(s) for s in samples]


def average_temperature(
    samples: Sequence[AdcSample | int], vref_mv: int = DEFAULT_VREF_MV
) -> int:
    """Mean the window (half-up) and convert the averaged ADC count."""
    values = _values(samples)
    if not values:
        raise EmptyWindow("no samples to average")
    n = len(values)
    mean = (2 * sum(values) + n) // (2 * n)
    return lm35_to_deci_celsius(mean, vref_mv)


def synth_ppg(
    bpm: int,
    duration_ms: int,
    fs_hz: int = 100,
    noise_amp: float = 0.0,
    seed: int = 0,
) -> list[AdcSample]:
    """Deterministic synthetic pulse waveform.

    Baseline 400 counts, peak 700, triangular pulse occupying the first 20%
    rise and next 20% fall of each beat period.  noise_amp is a fraction of
    the 300-count pulse height, realized as seeded uniform integer noise.
    """
    if not 0.0 <= noise_amp <= 1.0:
        raise ValueError(f"noise_amp must be in [0, 1], got {noise_amp}")
    amp = int(noise_amp * NOISE_FULL_SCALE + 0.5)
    values = kernels.synth_ppg(bpm, duration_ms, fs_hz, amp, seed)
    return [AdcSample(i * 1000 // fs_hz, v) for i, v in enumerate(values)]


def detect_beats(
    waveform: Sequence[AdcSample],
    threshold: int = DEFAULT_THRESHOLD,
    refractory_ms: int = DEFAULT_REFRACTORY_MS,
) -> list[int]:
    """Timestamps (ms) of rising threshold crossings, rate-limited.

    A beat fires on the first sample of each transition from below threshold
    to at-or-above, then the detector holds off for refractory_ms.  The
    first crossing is always accepted.
    """
    if refractory_ms < 0:
        raise ValueError(f"refractory_ms must be >= 0, got {refractory_ms}")
    beats: list[int] = []
    last = -1
    prev_t = -1
    prev_v = threshold  # the opening sample alone can never cross
    for t_ms, value in waveform:
        if t_ms <= prev_t:
            raise ValueError("sample timestamps must be strictly increasing")
        if prev_v < threshold <= value:
            if last < 0 or t_ms - last >= refractory_ms:
                beats.append(t_ms)
                last = t_ms
        prev_t = t_ms
        prev_v = value
    return beats


def bpm_from_interval(t_beat_ms: int) -> int:
    """BPM = 60000 / T_beat, rounded half up."""
    if not INTERVAL_MIN_MS <= t_beat_ms <= INTERVAL_MAX_MS:
        raise OutOfRange(f"interval {t_beat_ms} ms outside [240, 3000]")
    return (120000 + t_beat_ms) // (2 * t_beat_ms)


def estimate_bpm(
    waveform: Sequence[AdcSample],
    threshold: int = DEFAULT_THRESHOLD,
    refractory_ms: int = DEFAULT_REFRACTORY_MS,
) -> int:
    """BPM from the median inter-beat interval of the detected beats.

    The median shrugs off one missed or spurious beat; needs at least three
    beats (two intervals).
    """
    beats = detect_beats(waveform, threshold, refractory_ms)
    if len(beats) < 3:
        raise InsufficientBeats(f"need >= 3 beats, detected {len(beats)}")
    intervals = sorted(b - a for a, b in zip(beats, beats[1:]))
    n = len(intervals)
    # median kept in doubled form so the even case stays integer-exact
    if n % 2:
        med2 = 2 * intervals[n // 2]
    else:
        med2 = intervals[n // 2 - 1] + intervals[n // 2]
    return (240000 + med2) // (2 * med2)
