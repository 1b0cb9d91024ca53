"""Swap-test circuit for the moments ``Tr rho^k`` and spectrum recovery.

The circuit prepares a ``|+>`` probe, applies ``1 (+) V_k`` (controlled
cyclic shift of ``k`` copies of ``rho``) and measures ``sigma_x`` on the
probe. The simulation builds the full joint density matrix; nothing about
the outcome probability is assumed.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .measures import MeasureReport, report_from_spectrum
from .qmat import PreconditionError, as_density, as_unitary, dagger, kron_all, partial_trace
from .sampling import _rng

JOINT_DIM_CAP = 2**10


class InconsistentMomentsError(ValueError):
    """Power sums that no valid spectrum can produce (typically shot noise)."""


@dataclass(frozen=True)
class MomentVector:
    dim: int
    moments: tuple[float, ...]

    def __post_init__(self):
        m = self.moments
        if not m:
            raise PreconditionError("empty moment vector")
        if abs(m[0] - 1) > 1e-9:
            raise PreconditionError(f"first moment must be 1, got {m[0]}")


@dataclass(frozen=True)
class ShotRecord:
    shots: int
    plus_count: int

    def __post_init__(self):
        if not 0 <= self.plus_count <= self.shots:
            raise PreconditionError("plus_count must lie in [0, shots]")

    @property
    def estimate(self) -> float:
        """Unbiased estimate of ``Tr rho^k``."""
        return 2.0 * self.plus_count / self.shots - 1.0


def generalized_swap(copies: int, dim: int) -> np.ndarray:
    """Permutation ``V|psi_1,...,psi_k> = |psi_k, psi_1, ..., psi_{k-1}>``."""
    if copies < 1 or dim < 2:
        raise PreconditionError("need copies >= 1 and dim >= 2")
    total = dim**copies
    if total > JOINT_DIM_CAP:
        raise PreconditionError(f"dim^copies = {total} exceeds the cap {JOINT_DIM_CAP}")
    v = np.zeros((total, total), dtype=complex)
    for digits in itertools.product(range(dim), repeat=copies):
        src = int(np.ravel_multi_index(digits, (dim,) * copies))
        shifted = (digits[-1],) + digits[:-1]
        dst = int(np.ravel_multi_index(shifted, (dim,) * copies))
        v[dst, src] = 1
    return v


def controlled_unitary(u) -> np.ndarray:
    """``1 (+) U`` with the probe qubit (first tensor factor) as control."""
    u = as_unitary(u)
    return scipy.linalg.block_diag(np.eye(u.shape[0], dtype=complex), u)


def _check_cap(d: int, k: int) -> None:
    if k < 1:
        raise PreconditionError("copies must be >= 1")
    if 2 * d**k > JOINT_DIM_CAP:
        raise PreconditionError(f"joint dimension 2*{d}^{k} exceeds the cap {JOINT_DIM_CAP}")


def probe_after_swap_test(rho, k: int) -> np.ndarray:
    """Reduced probe state after the controlled-``V_k`` gate."""
    rho = as_density(rho)
    d = rho.shape[0]
    _check_cap(d, k)
    plus = np.full((2, 2), 0.5, dtype=complex)
    copies = kron_all([rho] * k)
    if d == 1:
        gate = np.eye(2, dtype=complex)
    else:
        gate = controlled_unitary(generalized_swap(k, d))
    joint = gate @ np.kron(plus, copies) @ dagger(gate)
    return partial_trace(joint, (2, d**k), keep="A")


def swap_test_probability(rho, k: int) -> float:
    """Probability of the ``+1`` outcome of ``sigma_x`` on the probe."""
    probe = probe_after_swap_test(rho, k)
    plus = np.array([1, 1], dtype=complex) / np.sqrt(2)
    return float(np.real(plus.conj() @ probe @ plus))


def moments_from_circuit(rho, k_max: int | None = None) -> MomentVector:
    rho = as_density(rho)
    n = rho.shape[0]
    k_max = n if k_max is None else k_max
    if not 1 <= k_max <= n:
        raise PreconditionError(f"k_max must lie in [1, {n}]")
    moments = tuple(2.0 * swap_test_probability(rho, k) - 1.0 for k in range(1, k_max + 1))
    return MomentVector(n, moments)


def sample_swap_test(rho, k: int, shots: int, stream) -> ShotRecord:
    if shots < 1:
        raise PreconditionError("shots must be >= 1")
    p = min(max(swap_test_probability(rho, k), 0.0), 1.0)
    return ShotRecord(int(shots), int(_rng(stream).binomial(shots, p)))


def elementary_symmetric(power_sums) -> np.ndarray:
    """Newton's identities: ``e_0 ... e_n`` from ``p_1 ... p_n``."""
    p = np.asarray(power_sums, dtype=float)
    e = np.zeros(p.size + 1)
    e[0] = 1.0
    for k in range(1, p.size + 1):
        acc = 0.0
        for i in range(1, k + 1):
            acc += (-1) ** (i - 1) * e[k - i] * p[i - 1]
        e[k] = acc / k
    return e


def _companion(coeffs: np.ndarray) -> np.ndarray:
    # monic x^n + c_1 x^{n-1} + ... + c_n
    n = coeffs.size - 1
    c = np.zeros((n, n))
    c[0, :] = -coeffs[1:]
    c[1:, :-1] = np.eye(n - 1)
    return c


def _merge_clusters(roots: np.ndarray, radius: float) -> np.ndarray:
    # A root of multiplicity m moves by ~eps^(1/m) under rounding, but the
    # centroid of its cluster stays accurate to ~eps.
    roots = roots[np.argsort(roots.real)]
    out = roots.copy()
    i = 0
    while i < roots.size:
        j = i + 1
        while j < roots.size and abs(roots[j] - roots[j - 1]) < radius:
            j += 1
        if j - i > 1:
            out[i:j] = roots[i:j].mean()
        i = j
    return out


CLUSTER_RADIUS = 1e-4


def spectrum_from_moments(m: MomentVector, noisy: bool = False) -> np.ndarray:
    """Eigenvalues (descending) from ``p_1 ... p_n`` via Newton's identities.

    The roots of ``x^n - e_1 x^{n-1} + ... + (-1)^n e_n`` are taken as the
    eigenvalues of its companion matrix.

    Raises:
        InconsistentMomentsError: a root has ``|imag| > 1e-6`` or real part
            below ``-1e-6``.
    """
    n = m.dim
    if len(m.moments) != n:
        raise PreconditionError(f"need exactly {n} moments for a {n}-dimensional state")
    if n > 8:
        raise PreconditionError("spectrum recovery is supported for n <= 8")
    if noisy and n > 4:
        warnings.warn(f"recovering an n={n} spectrum from noisy moments is ill-conditioned",
                      RuntimeWarning, stacklevel=2)
    if n == 1:
        return np.array([1.0])
    e = elementary_symmetric(m.moments)
    signs = (-1.0) ** np.arange(n + 1)
    roots = np.linalg.eigvals(_companion(signs * e))
    roots = _merge_clusters(roots, CLUSTER_RADIUS)
    if np.max(np.abs(roots.imag)) > 1e-6:
        raise InconsistentMomentsError(f"complex roots {roots}")
    lam = roots.real
    if lam.min() < -1e-6:
        raise InconsistentMomentsError(f"negative root {lam.min():.3g}")
    lam = np.clip(lam, 0.0, None)
    lam = lam / lam.sum()
    return np.sort(lam)[::-1]


def measures_from_moments(m: MomentVector, base: float = 2.0) -> MeasureReport:
    """All closed-form measures from circuit moments.

    ``c2`` is cross-checked: the spectral route must agree with the two-copy
    shortcut ``p_2 - 1/n`` to 1e-9.
    """
    n = m.dim
    rep = report_from_spectrum(spectrum_from_moments(m), base)
    if n >= 2:
        shortcut = m.moments[1] - 1.0 / n
        if abs(shortcut - rep.c2) > 1e-9:
            raise InconsistentMomentsError(
                f"c2 via spectrum {rep.c2:.12g} disagrees with p2 - 1/n = {shortcut:.12g}")
    return rep


def c2_from_two_copies(p2: float, n: int) -> float:
    return p2 - 1.0 / n
