"""Receiver-windowed CFO compensation for uplink OFDMA.

The raised-cosine receiver window confines carrier-frequency-offset interference
to a narrow band around the diagonal of the interference matrix, which is then
inverted with a quasi-banded LU plus a low-rank corner correction.
"""
from .exceptions import NearSingularPivotError, ScenarioError, SingularMatrixError
from .waveform import AllocationMap, OfdmaConfig, build_allocation
from .receiver import OfdmaReceiver, build_interference_matrix, make_window
from .solver import CGMMSE, BandedZF, DirectZF, NoCompensation, QuasiBandedZF

__version__ = "0.1.0"

__all__ = [
    "AllocationMap", "BandedZF", "CGMMSE", "DirectZF", "NearSingularPivotError",
    "NoCompensation", "OfdmaConfig", "OfdmaReceiver", "QuasiBandedZF", "ScenarioError",
    "SingularMatrixError", "build_allocation", "build_interference_matrix", "make_window",
]
