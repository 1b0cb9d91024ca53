"""Maximization of basis-dependent coherence over the unitary group.

The search runs finite-difference gradient ascent in the Hermitian
exponential chart ``U = exp(iH(theta))``. The chart is re-centred at the
current iterate after every accepted step (``U <- exp(iH(step)) U``), which
keeps the parameterization away from the branch cuts of the matrix
logarithm.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from . import measures
from .qmat import PreconditionError, as_density, dagger, eigh
from .sampling import SeededStream, haar_unitaries, haar_unitary

log = logging.getLogger(__name__)

FD_STEP = 1e-6


@dataclass
class OptimizerConfig:
    restarts: int = 16
    max_iters: int = 2000
    step_init: float = 0.1
    tol: float = 1e-10
    stream: SeededStream = field(default_factory=lambda: SeededStream(0))

    def __post_init__(self):
        if self.restarts < 1:
            raise PreconditionError("restarts must be >= 1")
        if self.max_iters < 1:
            raise PreconditionError("max_iters must be >= 1")
        if not self.tol > 0 or not self.step_init > 0:
            raise PreconditionError("tol and step_init must be positive")


@dataclass
class OptimizationResult:
    value: float
    unitary: np.ndarray
    iterations: int
    converged: bool
    restart: int = 0
    trace: list[float] = field(default_factory=list, repr=False)


def hermitian_from_params(theta) -> np.ndarray:
    """Hermitian matrix from ``n^2`` reals.

    Layout: the ``n`` diagonal entries, then ``(re, im)`` for each upper
    off-diagonal entry ``(i, j), i < j`` in row-major order.
    """
    theta = np.asarray(theta, dtype=float).ravel()
    n = int(round(np.sqrt(theta.size)))
    if n < 1 or n * n != theta.size:
        raise PreconditionError(f"parameter count {theta.size} is not a perfect square")
    h = np.diag(theta[:n]).astype(complex)
    iu = np.triu_indices(n, 1)
    off = theta[n::2] + 1j * theta[n + 1::2]
    h[iu] = off
    h[(iu[1], iu[0])] = off.conj()
    return h


def params_from_hermitian(h) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    n = h.shape[0]
    iu = np.triu_indices(n, 1)
    off = h[iu]
    out = np.empty(n * n)
    out[:n] = np.real(np.diag(h))
    out[n::2] = off.real
    out[n + 1::2] = off.imag
    return out


def _expi(h: np.ndarray) -> np.ndarray:
    # exp(iH) through the spectral decomposition keeps the result unitary to rounding
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * w)) @ dagger(v)


def unitary_from_params(theta) -> np.ndarray:
    """``exp(i H(theta))``."""
    return _expi(hermitian_from_params(theta))


def params_from_unitary(u) -> np.ndarray:
    """Chart coordinates of ``u``: parameters of ``-i log(u)`` (principal branch)."""
    t, z = scipy.linalg.schur(np.asarray(u, dtype=complex), output="complex")
    phases = np.angle(np.diag(t))
    h = (z * phases) @ dagger(z)
    return params_from_hermitian((h + dagger(h)) / 2)


def _objective(name: str, rho: np.ndarray, base: float) -> Callable[[np.ndarray], float]:
    n = rho.shape[0]
    eye_n = np.eye(n) / n

    def rotated(u):
        return u @ rho @ dagger(u)

    if name == "l1":
        def f(u):
            r = rotated(u)
            return float(np.sum(np.abs(r)) - np.sum(np.abs(np.diag(r))))
    elif name == "l1_distance":
        def f(u):
            return float(np.sum(np.abs(rotated(u) - eye_n)))
    elif name == "l2":
        p = float(np.sum(np.abs(rho) ** 2))

        def f(u):
            return p - float(np.sum(np.real(np.diag(rotated(u))) ** 2))
    elif name == "re":
        s = measures.von_neumann_entropy(rho, base)

        def f(u):
            d = np.clip(np.real(np.diag(rotated(u))), 0.0, None)
            return measures.shannon_entropy(d, base) - s
    else:
        raise PreconditionError(f"unknown objective {name!r}")
    return f


OBJECTIVES = ("l1", "l1_distance", "l2", "re")


def _ascend(f, u0: np.ndarray, cfg: OptimizerConfig) -> tuple[np.ndarray, float, int, bool, list[float]]:
    n = u0.shape[0]
    m = n * n
    u = u0
    val = f(u)
    trace = [val]
    step = cfg.step_init
    for it in range(1, cfg.max_iters + 1):
        grad = np.empty(m)
        for k in range(m):
            e = np.zeros(m)
            e[k] = FD_STEP
            grad[k] = (f(unitary_from_params(e) @ u) - f(unitary_from_params(-e) @ u)) / (2 * FD_STEP)
        gnorm = float(np.linalg.norm(grad))
        if gnorm < 1e-12:
            return u, val, it, True, trace
        direction = grad / gnorm
        # backtracking: shrink until the objective improves
        while step > 1e-14:
            cand = unitary_from_params(step * direction) @ u
            cval = f(cand)
            if cval > val:
                break
            step *= 0.5
        else:
            return u, val, it, True, trace
        gain = cval - val
        u, val = cand, cval
        trace.append(val)
        step = min(step * 2.0, 1.0)
        if gain < cfg.tol:
            return u, val, it, True, trace
    return u, val, cfg.max_iters, False, trace


def maximize_over_basis(rho, objective: str = "l1", cfg: OptimizerConfig | None = None,
                        base: float = 2.0) -> OptimizationResult:
    """Multi-restart ascent of a basis-dependent coherence over all unitaries.

    Restart 0 starts at the uniformizing unitary of ``rho``; the others start
    at Haar-random unitaries drawn from ``cfg.stream`` (each unitary enters
    through its chart logarithm). The best value wins, ties going to the
    lowest restart index.
    """
    cfg = cfg if cfg is not None else OptimizerConfig()
    rho = as_density(rho)
    f = _objective(objective, rho, base)
    n = rho.shape[0]
    starts = [measures.uniformizing_unitary(rho)]
    starts += [unitary_from_params(params_from_unitary(haar_unitary(n, cfg.stream)))
               for _ in range(cfg.restarts - 1)]
    if n == 1:
        u = np.eye(1, dtype=complex)
        return OptimizationResult(f(u), u, 0, True, 0, [f(u)])

    best = None
    for idx, u0 in enumerate(starts):
        u, val, iters, conv, trace = _ascend(f, u0, cfg)
        if best is None or val > best.value:
            best = OptimizationResult(val, u, iters, conv, idx, trace)
    if objective == "l1":
        warm = best.trace[0] if best.restart == 0 else f(starts[0])
        if best.value > warm + 1e-6:
            log.warning("l1 optimum %.9g exceeds the uniform-diagonal value %.9g", best.value, warm)
    return best


def c1(rho, cfg: OptimizerConfig | None = None) -> float:
    return maximize_over_basis(rho, "l1", cfg).value


def c1_tilde(rho, cfg: OptimizerConfig | None = None) -> float:
    return maximize_over_basis(rho, "l1_distance", cfg).value


def bloch_radius_c1(rho) -> float:
    """Qubit-only closed form for the l1 optimum: the Bloch radius ``sqrt(2 Tr rho^2 - 1)``."""
    rho = as_density(rho)
    if rho.shape[0] != 2:
        raise PreconditionError("the Bloch-radius formula applies to qubits only")
    return float(np.sqrt(max(2 * measures.purity(rho) - 1, 0.0)))


class ClosedFormViolation(AssertionError):
    """A search found a basis beating (or the uniformizer missing) a closed form."""

    def __init__(self, objective: str, value: float, closed: float, witness: np.ndarray):
        self.objective = objective
        self.value = value
        self.closed = closed
        self.witness = witness
        super().__init__(f"{objective}: value {value:.12g} vs closed form {closed:.12g}")


@dataclass
class ClosedFormCheck:
    objective: str
    closed_form: float
    sampled_max: float
    optimized: float
    uniformizer_value: float

    @property
    def gap(self) -> float:
        return self.closed_form - max(self.sampled_max, self.optimized)


def validate_closed_forms(rho, n_samples: int = 500, cfg: OptimizerConfig | None = None,
                          base: float = 2.0, tol: float = 1e-9) -> dict[str, ClosedFormCheck]:
    """Check the l2 and relative-entropy closed forms are the true maxima.

    Haar sampling plus a short optimization must never exceed the closed
    form, and the uniformizing unitary must attain it.

    Raises:
        ClosedFormViolation: carrying the offending unitary.
    """
    cfg = cfg if cfg is not None else OptimizerConfig(restarts=2, max_iters=200)
    rho = as_density(rho)
    n = rho.shape[0]
    closed = {"l2": measures.c2(rho), "re": measures.c_re(rho, base)}
    uni = measures.uniformizing_unitary(rho)
    samples = haar_unitaries(n, n_samples, cfg.stream)
    out = {}
    for name, cf in closed.items():
        f = _objective(name, rho, base)
        vals = measures.basis_coherence_batch(rho, samples, name, base)
        i_max = int(np.argmax(vals)) if vals.size else 0
        smax = float(vals[i_max]) if vals.size else -np.inf
        if smax > cf + tol:
            raise ClosedFormViolation(name, smax, cf, samples[i_max])
        opt = maximize_over_basis(rho, name, cfg, base)
        if opt.value > cf + tol:
            raise ClosedFormViolation(name, opt.value, cf, opt.unitary)
        uval = f(uni)
        if abs(uval - cf) > tol:
            raise ClosedFormViolation(name, uval, cf, uni)
        out[name] = ClosedFormCheck(name, cf, smax, opt.value, uval)
    return out


def eigenbasis_unitary(rho) -> np.ndarray:
    """A unitary that diagonalizes ``rho`` (rows are eigenvectors)."""
    _, v = eigh(as_density(rho))
    return dagger(v)
