"""Random states, Haar unitaries and mixed-unitary (unital) channels."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .qmat import PAULI_I, PAULI_X, PAULI_Y, PAULI_Z, PreconditionError, as_density, as_matrix, dagger

DEFAULT_ALGORITHM = "PCG64"
_BIT_GENERATORS = {"PCG64": np.random.PCG64, "PCG64DXSM": np.random.PCG64DXSM, "Philox": np.random.Philox}


class SeededStream:
    """A named, seeded random stream.

    Two streams built from the same ``(seed, algorithm)`` yield identical
    sample sequences. Use :meth:`spawn` to hand independent child streams to
    parallel workers; a stream itself must not be shared between them.
    """

    def __init__(self, seed: int = 0, algorithm: str = DEFAULT_ALGORITHM, *, _seq=None):
        if algorithm not in _BIT_GENERATORS:
            raise PreconditionError(f"unknown stream algorithm {algorithm!r}")
        if not 0 <= int(seed) < 2**64:
            raise PreconditionError("seed must be an unsigned 64-bit integer")
        self.seed = int(seed)
        self.algorithm = algorithm
        self._seq = _seq if _seq is not None else np.random.SeedSequence(self.seed)
        self.rng = np.random.Generator(_BIT_GENERATORS[algorithm](self._seq))

    def spawn(self, n: int) -> list["SeededStream"]:
        """Derive ``n`` independent child streams (deterministic in the parent seed)."""
        return [SeededStream(self.seed, self.algorithm, _seq=s) for s in self._seq.spawn(n)]

    def child(self, index: int) -> "SeededStream":
        """The ``index``-th derived stream, independent of how many siblings exist."""
        seq = np.random.SeedSequence(self.seed, spawn_key=(int(index),))
        return SeededStream(self.seed, self.algorithm, _seq=seq)

    def __repr__(self):
        return f"SeededStream(seed={self.seed}, algorithm={self.algorithm!r})"


def _rng(stream) -> np.random.Generator:
    if isinstance(stream, SeededStream):
        return stream.rng
    if isinstance(stream, np.random.Generator):
        return stream
    if isinstance(stream, (int, np.integer)):
        return SeededStream(int(stream)).rng
    raise TypeError(f"expected SeededStream, Generator or int seed, got {type(stream).__name__}")


def _ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def haar_unitary(n: int, stream) -> np.ndarray:
    """Haar-distributed ``n x n`` unitary via phase-corrected QR of a Ginibre matrix."""
    if n < 1:
        raise PreconditionError("n must be positive")
    q, r = np.linalg.qr(_ginibre(_rng(stream), n, n))
    d = np.diag(r)
    return q * (d / np.abs(d))


def haar_unitaries(n: int, count: int, stream) -> np.ndarray:
    """``count`` Haar unitaries as a ``(count, n, n)`` stack."""
    rng = _rng(stream)
    g = (rng.standard_normal((count, n, n)) + 1j * rng.standard_normal((count, n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(g)
    d = np.diagonal(r, axis1=1, axis2=2)
    return q * (d / np.abs(d))[:, None, :]


def random_density(n: int, rank: int | None, stream) -> np.ndarray:
    """Induced-measure random state ``G G^dag / Tr(G G^dag)`` with ``G`` n-by-rank."""
    rank = n if rank is None else rank
    if not 1 <= rank <= n:
        raise PreconditionError(f"rank must lie in [1, {n}], got {rank}")
    g = _ginibre(_rng(stream), n, rank)
    rho = g @ dagger(g)
    rho = (rho + dagger(rho)) / 2
    return rho / np.trace(rho).real


def random_pure(n: int, stream) -> np.ndarray:
    v = _ginibre(_rng(stream), n, 1)[:, 0]
    v /= np.linalg.norm(v)
    return np.outer(v, v.conj())


def random_probabilities(k: int, stream) -> np.ndarray:
    """Uniform sample from the (k-1)-simplex (normalized exponentials)."""
    if k < 1:
        raise PreconditionError("need at least one component")
    e = _rng(stream).exponential(size=k)
    return e / e.sum()


@dataclass(frozen=True)
class KrausChannel:
    """A channel in Kraus form.

    ``probabilities`` and ``unitaries`` are set only for channels built as
    explicit mixed-unitary ensembles (``K_i = sqrt(p_i) U_i``).
    """

    kraus_ops: tuple[np.ndarray, ...]
    probabilities: tuple[float, ...] | None = None
    unitaries: tuple[np.ndarray, ...] | None = field(default=None, repr=False)

    def __post_init__(self):
        ops = tuple(as_matrix(k) for k in self.kraus_ops)
        if not ops:
            raise PreconditionError("a channel needs at least one Kraus operator")
        if len({k.shape for k in ops}) != 1:
            raise PreconditionError("Kraus operators must share one square shape")
        object.__setattr__(self, "kraus_ops", ops)

    @property
    def dim(self) -> int:
        return self.kraus_ops[0].shape[0]

    def _sum_err(self, adjoint_first: bool) -> float:
        acc = sum((dagger(k) @ k) if adjoint_first else (k @ dagger(k)) for k in self.kraus_ops)
        return float(np.max(np.abs(acc - np.eye(self.dim))))

    @property
    def trace_preserving(self) -> bool:
        return self._sum_err(True) <= 1e-9

    @property
    def unital(self) -> bool:
        return self._sum_err(False) <= 1e-9


def mixed_unitary_channel(probabilities, unitaries) -> KrausChannel:
    p = np.asarray(probabilities, dtype=float)
    us = tuple(as_matrix(u) for u in unitaries)
    if len(p) != len(us):
        raise PreconditionError("need one probability per unitary")
    if np.any(p < 0) or abs(p.sum() - 1) > 1e-12:
        raise PreconditionError("probabilities must be non-negative and sum to 1")
    ops = tuple(np.sqrt(pi) * u for pi, u in zip(p, us))
    return KrausChannel(ops, tuple(float(x) for x in p), us)


def random_unital_channel(n: int, k: int, stream) -> KrausChannel:
    """Random mixed-unitary channel with ``k`` Haar branches.

    Mixed-unitary channels are trace preserving and unital, so they belong to
    both operation classes under which total coherence is non-increasing.
    """
    if k < 1:
        raise PreconditionError("k must be at least 1")
    rng = _rng(stream)
    p = random_probabilities(k, rng)
    return mixed_unitary_channel(p, [haar_unitary(n, rng) for _ in range(k)])


def uniform_pauli_channel() -> KrausChannel:
    return mixed_unitary_channel([0.25] * 4, [PAULI_I, PAULI_X, PAULI_Y, PAULI_Z])


def apply_channel(ch: KrausChannel, rho) -> np.ndarray:
    """``sum_i K_i rho K_i^dag``; output validated as a density matrix."""
    rho = as_density(rho)
    if rho.shape[0] != ch.dim:
        raise PreconditionError(f"channel acts on dim {ch.dim}, state has dim {rho.shape[0]}")
    if not ch.trace_preserving:
        raise PreconditionError("channel is not trace preserving")
    out = sum(k @ rho @ dagger(k) for k in ch.kraus_ops)
    return as_density((out + dagger(out)) / 2)
