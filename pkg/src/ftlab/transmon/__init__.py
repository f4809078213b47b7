"""Pulse-level model of transmons coupled by resonators."""

from .compile import DriveSchedule, ScheduleEntry, compile_to_pulses
from .device import (
    TransmonDevice,
    TruncatedBasis,
    build_basis,
    dressed_qubit_freq,
    load_device,
    reduce_device,
    static_hamiltonian,
    transmon_eigensystem,
)
from .evolve import trotter_evolve
from .metrics import GateMetrics, gate_metrics
from .optimize import OptimizeResult, optimize_pulse
from .pulses import (
    CnotParams,
    Pulse,
    PulseLibrary,
    flattop_pulse,
    gaussian_pulse,
    load_pulse_library,
    pulse_waveform,
)
from .run import gate_matrix, run_circuit

__all__ = [
    "CnotParams",
    "DriveSchedule",
    "GateMetrics",
    "OptimizeResult",
    "Pulse",
    "PulseLibrary",
    "ScheduleEntry",
    "TransmonDevice",
    "TruncatedBasis",
    "build_basis",
    "compile_to_pulses",
    "dressed_qubit_freq",
    "flattop_pulse",
    "gaussian_pulse",
    "gate_matrix",
    "gate_metrics",
    "load_device",
    "load_pulse_library",
    "optimize_pulse",
    "pulse_waveform",
    "reduce_device",
    "run_circuit",
    "static_hamiltonian",
    "transmon_eigensystem",
    "trotter_evolve",
]
