"""Shared scenario builders for the test suite."""

from __future__ import annotations

KEY_STRIDE_MS = 100

# timeline of one registration block, relative to the '*' press with 100 ms
# key spacing: last '#' at +1600 (1-key name, 2-digit age), temp window 160,
# pulse window 10000, then a 5000 ms serial dwell
REGISTRATION_SPAN_MS = 20_000


def registration_lines(
    t0: int,
    name_keys: tuple[str, ...] = ("2",),
    age: str = "30",
    mobile: str = "01712345678",
) -> tuple[list[str], int]:
    """Scenario lines for one full registration starting at t0.

    Returns (lines, t_of_last_key).  name_keys must avoid immediate same-key
    repeats; at 100 ms spacing each press commits the previous letter.
    """
    lines = []
    t = t0

    def key(k: str) -> None:
        nonlocal t
        lines.append(f"{t} booth key k={k}")
        t += KEY_STRIDE_MS

    key("*")
    for k in name_keys:
        key(k)
    key("#")
    for d in age:
        key(d)
    key("#")
    for d in mobile:
        key(d)
    key("#")
    return lines, t - KEY_STRIDE_MS


def stress_scenario(patients: int, press_gap_ms: int = 200) -> str:
    """Register `patients` people back to back, then press Next for each."""
    lines: list[str] = []
    t = 0
    for _ in range(patients):
        block, _last = registration_lines(t)
        lines.extend(block)
        t += REGISTRATION_SPAN_MS
    for i in range(patients):
        lines.append(f"{t + i * press_gap_ms} doctor press")
    return "\n".join(lines)
