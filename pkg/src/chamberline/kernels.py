"""Kernel dispatch: compiled extension when available, pure Python otherwise.

Set CHAMBERLINE_PURE=1 to force the pure-Python implementation.  Both
backends are bit-identical; the compiled one is just faster.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("CHAMBERLINE_PURE") == "1":
    _impl = _kernels_py
    BACKEND = "pure"
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "pure"

ADC_MAX = _kernels_py.ADC_MAX
PPG_BASE = _kernels_py.PPG_BASE
PPG_PEAK = _kernels_py.PPG_PEAK

xorshift64star_next = _impl.xorshift64star_next
seed_state = _impl.seed_state
synth_ppg = _impl.synth_ppg
detect_beats = _impl.detect_beats
crc8 = _impl.crc8
