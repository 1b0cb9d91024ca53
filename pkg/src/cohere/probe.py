"""DQC1-like probing schemes and the coherence cost of the probe qubit.

A probe qubit with Bloch vector ``P`` is rotated by a Hadamard, then
controls ``U`` on a system ``rho_s``. The probe's l2 total coherence drops
from ``|P|^2 / 2`` to ``(P1^2 + (P2^2 + P3^2) |Tr rho_s U|^2) / 2``; the drop
summed over a scheme's unitaries is its cost.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .measures import c2
from .qmat import (
    HADAMARD,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    PreconditionError,
    as_density,
    as_unitary,
    dagger,
    partial_trace,
)
from .swapcirc import controlled_unitary, generalized_swap


@dataclass(frozen=True)
class BlochVector:
    p1: float
    p2: float
    p3: float

    def __post_init__(self):
        if self.norm > 1 + 1e-12:
            raise PreconditionError(f"Bloch vector length {self.norm:.6g} exceeds 1")

    @classmethod
    def of(cls, p) -> "BlochVector":
        if isinstance(p, BlochVector):
            return p
        vals = [float(x) for x in p]
        if len(vals) != 3:
            raise PreconditionError("a Bloch vector has three components")
        return cls(*vals)

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.p1**2 + self.p2**2 + self.p3**2))

    @property
    def transverse_sq(self) -> float:
        """``P2^2 + P3^2``, the part of the probe that carries information."""
        return self.p2**2 + self.p3**2


def probe_state(p) -> np.ndarray:
    """``(1 + P . sigma) / 2``."""
    b = BlochVector.of(p)
    return (np.eye(2) + b.p1 * PAULI_X + b.p2 * PAULI_Y + b.p3 * PAULI_Z) / 2


def _check_system(rho_s, u) -> tuple[np.ndarray, np.ndarray]:
    rho_s, u = as_density(rho_s), as_unitary(u)
    if rho_s.shape != u.shape:
        raise PreconditionError(f"dimension mismatch: system {rho_s.shape}, unitary {u.shape}")
    return rho_s, u


def overlap(rho_s, u) -> complex:
    """``Tr(rho_s U)``; its modulus is at most one."""
    rho_s, u = _check_system(rho_s, u)
    return complex(np.trace(rho_s @ u))


def final_probe_closed(p, rho_s, u) -> np.ndarray:
    b = BlochVector.of(p)
    t = overlap(rho_s, u)
    return 0.5 * np.array([
        [1 + b.p1, (b.p3 + 1j * b.p2) * np.conj(t)],
        [(b.p3 - 1j * b.p2) * t, 1 - b.p1],
    ])


def final_probe_simulated(p, rho_s, u) -> np.ndarray:
    rho_s, u = _check_system(rho_s, u)
    rp = HADAMARD @ probe_state(p) @ HADAMARD
    gate = controlled_unitary(u)
    joint = gate @ np.kron(rp, rho_s) @ dagger(gate)
    return partial_trace(joint, (2, rho_s.shape[0]), keep="A")


def run_probe_circuit(p, rho_s, u) -> tuple[np.ndarray, np.ndarray]:
    """Final probe state, closed form and full simulation.

    Warns (does not fail) for schemes that cannot extract information:
    ``P2 = P3 = 0`` or ``U`` equal to the identity.
    """
    b = BlochVector.of(p)
    rho_s, u = _check_system(rho_s, u)
    if b.transverse_sq == 0:
        warnings.warn("P2 and P3 both vanish; the probe learns nothing", RuntimeWarning, stacklevel=2)
    if np.allclose(u, np.eye(u.shape[0]), atol=1e-12):
        warnings.warn("U is the identity; the probe learns nothing", RuntimeWarning, stacklevel=2)
    return final_probe_closed(b, rho_s, u), final_probe_simulated(b, rho_s, u)


def delta_c(p, rho_s, u) -> float:
    """Change of the probe's l2 total coherence caused by controlled-``U``."""
    b = BlochVector.of(p)
    t = overlap(rho_s, u)
    value = 0.5 * b.transverse_sq * (1 - abs(t) ** 2)
    # coherence can only drop since |Tr rho_s U| <= 1
    assert c2(final_probe_closed(b, rho_s, u)) <= c2(probe_state(b)) + 1e-12
    return max(value, 0.0)


@dataclass
class ProbeScheme:
    """A probe, a system and the ordered controlled unitaries applied.

    ``gates`` optionally lists a user-supplied gate-level decomposition; with
    ``mode="gates"`` the cost is summed over it instead of ``unitaries``.
    """

    bloch: BlochVector
    system: np.ndarray
    unitaries: list[np.ndarray] = field(default_factory=list)
    gates: list[np.ndarray] | None = None

    def __post_init__(self):
        self.bloch = BlochVector.of(self.bloch)
        self.system = as_density(self.system)
        n = self.system.shape[0]
        for u in list(self.unitaries) + list(self.gates or []):
            if np.shape(u) != (n, n):
                raise PreconditionError(f"every unitary must act on the system dimension {n}")


def probe_terms(scheme: ProbeScheme, mode: str = "unitaries") -> list[float]:
    if mode == "unitaries":
        ops = scheme.unitaries
    elif mode == "gates":
        if scheme.gates is None:
            raise PreconditionError("gate mode needs an explicit gate decomposition")
        ops = scheme.gates
    else:
        raise PreconditionError(f"unknown cost mode {mode!r}")
    return [delta_c(scheme.bloch, scheme.system, u) for u in ops]


def probe_cost(scheme: ProbeScheme, mode: str = "unitaries") -> float:
    """Sum of the coherence changes over the scheme's operations."""
    return float(sum(probe_terms(scheme, mode)))


def dqc1_delta(u, p3: float) -> tuple[complex, float]:
    """Normalized trace ``Tr U / 2^n`` and the DQC1 coherence change."""
    u = as_unitary(u)
    dim = u.shape[0]
    if dim < 1 or dim & (dim - 1):
        raise PreconditionError(f"DQC1 needs a 2^n-dimensional unitary, got {dim}")
    if abs(p3) > 1:
        raise PreconditionError("|P3| must not exceed 1")
    tau = complex(np.trace(u) / dim)
    return tau, 0.5 * p3**2 * (1 - abs(tau) ** 2)


def qom_overlap(rho1, rho2) -> tuple[float, float]:
    """Overlap ``Tr rho1 rho2`` and the coherence change of the two-copy swap probe."""
    rho1, rho2 = as_density(rho1), as_density(rho2)
    if rho1.shape != rho2.shape:
        raise PreconditionError("dimension mismatch")
    ov = float(np.real(np.trace(rho1 @ rho2)))
    return ov, 0.5 * (1 - ov**2)


def qom_delta_via_circuit(rho1, rho2) -> float:
    rho1, rho2 = as_density(rho1), as_density(rho2)
    d = rho1.shape[0]
    return delta_c((0, 0, 1), np.kron(rho1, rho2), generalized_swap(2, d))
