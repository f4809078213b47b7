"""Fault-tolerance testbed for the [[4,2,2]] error-detecting code.

Three backends produce measurement distributions for the same logical
circuits: an ideal gate-level statevector simulator, a spin-qubit model
coupled to a spin-bath environment, and a pulse-level transmon model.
The analysis layer postselects encoded outcomes and compares statistical
distances against the bare (unencoded) runs.
"""

from importlib import import_module

__version__ = "0.1.0"

_SUBMODULES = (
    "analysis",
    "circuits",
    "cli",
    "errors",
    "numerics",
    "plotting",
    "registry",
    "spinbath",
    "statevector",
    "transmon",
)


def __getattr__(name):
    if name in _SUBMODULES:
        return import_module(f"{__name__}.{name}")
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
