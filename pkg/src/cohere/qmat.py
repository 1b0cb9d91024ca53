"""Dense complex linear algebra and quantum-state primitives.

Everything here operates on plain ``numpy`` arrays. Density matrices and
unitaries are validated on entry by :func:`as_density` / :func:`as_unitary`
and returned as fresh complex arrays, so callers never share mutable state.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Literal

import numpy as np

VALIDATION_TOL = 1e-10
EQUALITY_TOL = 1e-9
HERMITIAN_PRE_TOL = 1e-8
CLAMP_TOL = 1e-9
# |eigenvalue| below this is rounding noise of a rank-deficient state
ZERO_SNAP = 1e-14
SQRT_CLAMP_TOL = 1e-8

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


class InvalidStateError(ValueError):
    """A matrix violates a density-matrix or unitarity invariant."""

    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        msg = f"invariant violated: {invariant}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class PreconditionError(ValueError):
    """Input does not satisfy an operation's precondition."""


class NumericalError(ArithmeticError):
    """An underlying numerical routine failed to converge."""


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def _max_abs(m: np.ndarray) -> float:
    return float(np.max(np.abs(m))) if m.size else 0.0


def as_matrix(m) -> np.ndarray:
    """Coerce to a square 2-D complex array."""
    arr = np.array(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise PreconditionError(f"expected a non-empty square matrix, got shape {arr.shape}")
    return arr


def as_density(rho, tol: float = VALIDATION_TOL) -> np.ndarray:
    """Validate ``rho`` as a density matrix and return a complex copy.

    Raises:
        InvalidStateError: naming the first violated invariant (hermitian,
            unit-trace, positive-semidefinite).
    """
    rho = as_matrix(rho)
    herm_err = _max_abs(rho - dagger(rho))
    if herm_err > tol:
        raise InvalidStateError("hermitian", f"max deviation {herm_err:.3g}")
    tr = np.trace(rho)
    if abs(tr - 1) > tol:
        raise InvalidStateError("unit-trace", f"trace {tr.real:.12g}{tr.imag:+.3g}j")
    min_eig = float(np.linalg.eigvalsh((rho + dagger(rho)) / 2)[0])
    if min_eig < -tol:
        raise InvalidStateError("positive-semidefinite", f"min eigenvalue {min_eig:.3g}")
    return rho


def as_unitary(u, tol: float = VALIDATION_TOL) -> np.ndarray:
    u = as_matrix(u)
    err = _max_abs(dagger(u) @ u - np.eye(u.shape[0]))
    if err > tol:
        raise InvalidStateError("unitary", f"max deviation of U^dag U from identity {err:.3g}")
    return u


def is_hermitian(m: np.ndarray, tol: float = VALIDATION_TOL) -> bool:
    return _max_abs(m - dagger(m)) <= tol


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    # first non-negligible component of each column made real positive
    idx = np.argmax(np.abs(vecs) > 1e-12, axis=0)
    c = vecs[idx, np.arange(vecs.shape[1])]
    mag = np.abs(c)
    phase = np.where(mag > 0, mag / np.where(mag > 0, c, 1), 1)
    return vecs * phase


def _hermitian_part(h) -> np.ndarray:
    h = as_matrix(h)
    err = _max_abs(h - dagger(h))
    if err > HERMITIAN_PRE_TOL:
        raise PreconditionError(f"matrix is not Hermitian (max deviation {err:.3g})")
    return (h + dagger(h)) / 2


def eigh(h) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Eigenvalues are returned in descending order; each eigenvector has its
    first non-negligible component real and positive so the output is
    reproducible.

    Returns:
        ``(values, vectors)`` with ``h == vectors @ diag(values) @ vectors^dag``.

    Raises:
        PreconditionError: if ``h`` is not Hermitian within 1e-8.
        NumericalError: if LAPACK fails to converge.
    """
    h = _hermitian_part(h)
    try:
        vals, vecs = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        # LAPACK's heevd does not expose its sweep count; report the dimension instead
        raise NumericalError(f"eigensolver did not converge for n={h.shape[0]}: {exc}") from exc
    order = np.argsort(-vals, kind="stable")
    return vals[order], _fix_phases(vecs[:, order])


def eigvalsh(h) -> np.ndarray:
    """Descending eigenvalues of a Hermitian matrix, without eigenvectors."""
    h = _hermitian_part(h)
    try:
        vals = np.linalg.eigvalsh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver did not converge for n={h.shape[0]}: {exc}") from exc
    return vals[::-1]


def density_eigh(rho, tol: float = VALIDATION_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Validate a density matrix and return its :func:`eigh` in one pass.

    Same checks and errors as :func:`as_density`, but the positivity test
    reuses the decomposition instead of running a second eigensolve.
    """
    rho = as_matrix(rho)
    herm_err = _max_abs(rho - dagger(rho))
    if herm_err > tol:
        raise InvalidStateError("hermitian", f"max deviation {herm_err:.3g}")
    tr = np.trace(rho)
    if abs(tr - 1) > tol:
        raise InvalidStateError("unit-trace", f"trace {tr.real:.12g}{tr.imag:+.3g}j")
    vals, vecs = eigh(rho)
    if vals[-1] < -tol:
        raise InvalidStateError("positive-semidefinite", f"min eigenvalue {vals[-1]:.3g}")
    return vals, vecs


def spectrum(rho) -> np.ndarray:
    """Descending eigenvalues of a density matrix, clamped and renormalized.

    Values in ``[-1e-9, 1e-14]`` are set to zero and the result rescaled to
    sum to one; anything below -1e-9 is an invalid state. Snapping the tiny
    positive values matters for spectral functions with infinite slope at
    zero (``sqrt``, ``x log x``).
    """
    vals = eigvalsh(rho)
    if vals[-1] < -CLAMP_TOL:
        raise InvalidStateError("positive-semidefinite", f"eigenvalue {vals[-1]:.3g}")
    vals = np.where(vals <= ZERO_SNAP, 0.0, vals)
    total = vals.sum()
    if total <= 0:
        raise InvalidStateError("unit-trace", "spectrum sums to zero")
    return vals / total


def matrix_sqrt(rho) -> np.ndarray:
    """Principal square root of a positive semidefinite matrix."""
    vals, vecs = eigh(rho)
    if vals[-1] < -SQRT_CLAMP_TOL:
        raise InvalidStateError("positive-semidefinite", f"eigenvalue {vals[-1]:.3g}")
    root = np.sqrt(np.clip(vals, 0.0, None))
    return (vecs * root) @ dagger(vecs)


def purity(rho) -> float:
    rho = as_matrix(rho)
    # Tr rho^2 = sum |rho_ij|^2 for Hermitian rho
    return float(np.sum(np.abs(rho) ** 2))


def shannon_entropy(probs, base: float = 2.0) -> float:
    p = np.asarray(probs, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)) / np.log(base))


def von_neumann_entropy(rho, base: float = 2.0) -> float:
    if base <= 1:
        raise PreconditionError("logarithm base must exceed 1")
    return max(shannon_entropy(spectrum(rho), base), 0.0)


def fidelity(rho, sigma) -> float:
    """Root fidelity ``Tr sqrt(sqrt(sigma) rho sqrt(sigma))``.

    Note this is the un-squared convention, so ``fidelity(rho, rho) == 1``.
    """
    rho, sigma = as_matrix(rho), as_matrix(sigma)
    if rho.shape != sigma.shape:
        raise PreconditionError(f"dimension mismatch: {rho.shape} vs {sigma.shape}")
    s = matrix_sqrt(sigma)
    inner = s @ rho @ s
    vals = eigvalsh((inner + dagger(inner)) / 2)
    vals = np.where(vals <= ZERO_SNAP, 0.0, vals)
    return float(np.sum(np.sqrt(vals)))


def partial_trace(rho, dims: tuple[int, int], keep: Literal["A", "B"] = "A") -> np.ndarray:
    """Reduced state of a bipartite operator on ``C^dA (x) C^dB``."""
    rho = as_matrix(rho)
    d_a, d_b = dims
    if d_a < 1 or d_b < 1 or d_a * d_b != rho.shape[0]:
        raise PreconditionError(f"dims {dims} do not factor joint dimension {rho.shape[0]}")
    t = rho.reshape(d_a, d_b, d_a, d_b)
    if keep == "A":
        return np.einsum("ijkj->ik", t)
    if keep == "B":
        return np.einsum("ijil->jl", t)
    raise PreconditionError(f"keep must be 'A' or 'B', got {keep!r}")


def dft_unitary(n: int) -> np.ndarray:
    """Discrete Fourier transform matrix ``F_jk = exp(2 pi i jk / n) / sqrt(n)``."""
    if n < 1:
        raise PreconditionError("n must be positive")
    j = np.arange(n)
    return np.exp(2j * np.pi * np.outer(j, j) / n) / np.sqrt(n)


def maximally_mixed(n: int) -> np.ndarray:
    return np.eye(n, dtype=complex) / n


def pure_state(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=complex).ravel()
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def kron_all(mats) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


# -- matrix file format -------------------------------------------------------

def matrix_to_doc(m: np.ndarray) -> dict:
    m = as_matrix(m)
    return {
        "dim": int(m.shape[0]),
        "entries": [[float(z.real), float(z.imag)] for z in m.ravel()],
    }


def matrix_from_doc(doc: dict) -> np.ndarray:
    """Parse ``{"dim": n, "entries": [[re, im], ...]}`` (row-major)."""
    try:
        dim = doc["dim"]
        entries = doc["entries"]
    except (KeyError, TypeError) as exc:
        raise PreconditionError(f"matrix document needs 'dim' and 'entries': {exc}") from exc
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise PreconditionError(f"'dim' must be a positive integer, got {dim!r}")
    if not isinstance(entries, list) or len(entries) != dim * dim:
        n = len(entries) if isinstance(entries, list) else "?"
        raise PreconditionError(f"'entries' must hold dim*dim = {dim * dim} pairs, got {n}")
    vals = []
    for k, pair in enumerate(entries):
        if (not isinstance(pair, (list, tuple)) or len(pair) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair)):
            raise PreconditionError(f"entry {k} is not a [re, im] pair of numbers: {pair!r}")
        vals.append(complex(pair[0], pair[1]))
    arr = np.array(vals, dtype=complex).reshape(dim, dim)
    if not np.all(np.isfinite(arr)):
        raise PreconditionError("matrix entries must be finite")
    return arr


def load_matrix(path: str | Path) -> np.ndarray:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise PreconditionError(f"cannot read matrix file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise PreconditionError(f"matrix file {path} is not valid JSON: {exc}") from exc
    return matrix_from_doc(doc)


def load_density(path: str | Path) -> np.ndarray:
    return as_density(load_matrix(path))


def save_matrix(path: str | Path, m: np.ndarray) -> None:
    Path(path).write_text(json.dumps(matrix_to_doc(m), indent=1) + "\n")
