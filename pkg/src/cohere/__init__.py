"""Basis-independent ("total") quantum coherence toolkit."""

from .measures import (
    MeasureReport,
    basis_coherence_l1,
    basis_coherence_l2,
    basis_coherence_re,
    c2,
    c_re,
    c_skew,
    c_trace,
    measure_report,
    uniformizing_unitary,
)
from .qmat import InvalidStateError, NumericalError, PreconditionError
from .sampling import SeededStream

__all__ = [
    "InvalidStateError",
    "MeasureReport",
    "NumericalError",
    "PreconditionError",
    "SeededStream",
    "basis_coherence_l1",
    "basis_coherence_l2",
    "basis_coherence_re",
    "c2",
    "c_re",
    "c_skew",
    "c_trace",
    "measure_report",
    "uniformizing_unitary",
]
