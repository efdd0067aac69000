"""Compare the compiled kernels against the pure-Python fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

Times the three hot paths (waveform synthesis, beat detection, frame CRC)
on identical inputs and prints per-call medians plus the speedup.  Both
backends must produce identical outputs; the run aborts if they diverge.
"""

from __future__ import annotations

import argparse
import statistics
import time

from chamberline import _kernels_py as pure

try:
    from chamberline import _kernels as compiled
except ImportError:
    compiled = None


def median_call_us(fn, args, repeat: int, inner: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        for _ in range(inner):
            fn(*args)
        times.append((time.perf_counter() - t0) / inner)
    return statistics.median(times) * 1e6


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=7, help="timing repetitions (default 7)")
    args = parser.parse_args()

    wave = pure.synth_ppg(75, 60_000, 500, 15, 42)
    frame = bytes(range(256)) * 4
    cases = [
        ("synth_ppg 60 s @ 500 Hz", "synth_ppg", (75, 60_000, 500, 15, 42), 5),
        ("detect_beats 30k samples", "detect_beats", (wave, 500, 550, 240), 5),
        ("crc8 1 KiB", "crc8", (frame,), 200),
    ]

    if compiled is None:
        print("compiled backend not built; showing pure-Python timings only")
    else:
        for _, name, call_args, _ in cases:
            if getattr(pure, name)(*call_args) != getattr(compiled, name)(*call_args):
                raise SystemExit(f"backend mismatch in {name}")

    header = f"{'kernel':<26} {'pure (us)':>12} {'compiled (us)':>14} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for label, name, call_args, inner in cases:
        pure_us = median_call_us(getattr(pure, name), call_args, args.repeat, inner)
        if compiled is None:
            print(f"{label:<26} {pure_us:>12.1f} {'n/a':>14} {'n/a':>9}")
        else:
            comp_us = median_call_us(getattr(compiled, name), call_args, args.repeat, inner)
            print(f"{label:<26} {pure_us:>12.1f} {comp_us:>14.1f} {pure_us / comp_us:>8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
