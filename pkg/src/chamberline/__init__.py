"""Host-side simulator of a two-corner clinic kiosk.

The booth corner registers patients (keypad FSM, temperature and pulse
acquisition); the doctor corner dequeues them over a modeled UART link.
Batch scenario runs are deterministic; a live gateway serves interactive
clients.
"""

from .queue import PatientQueue, PatientRecord, QueueEmpty, QueueFull
from .sim import MetricsReport, Scenario, SimConfig, SimCore, load_scenario, run
from .uart import UartConfig

__version__ = "0.1.0"

__all__ = [
    "MetricsReport",
    "PatientQueue",
    "PatientRecord",
    "QueueEmpty",
    "QueueFull",
    "Scenario",
    "SimConfig",
    "SimCore",
    "UartConfig",
    "load_scenario",
    "run",
    "__version__",
]
