"""Total (basis-independent) coherence measures.

Closed forms are spectral functions of the state; the fixed-basis evaluators
compute the coherence of ``U rho U^dag`` in the computational basis, which is
the quantity maximized over ``U`` to obtain the closed forms.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .qmat import (
    PreconditionError,
    as_density,
    as_unitary,
    as_matrix,
    dagger,
    density_eigh,
    dft_unitary,
    purity,
    shannon_entropy,
    spectrum,
    von_neumann_entropy,
)


def c2(rho) -> float:
    """l2 total coherence ``Tr rho^2 - 1/n``."""
    rho = as_density(rho)
    return purity(rho) - 1.0 / rho.shape[0]


def c_re(rho, base: float = 2.0) -> float:
    """Relative-entropy total coherence ``log n - S(rho)``."""
    rho = as_density(rho)
    n = rho.shape[0]
    return max(np.log(n) / np.log(base) - von_neumann_entropy(rho, base), 0.0)


def c_skew(rho) -> float:
    """Skew-information total coherence ``1 - (sum_i sqrt(lambda_i))^2 / n``."""
    lam = spectrum(as_density(rho))
    return max(1.0 - np.sum(np.sqrt(lam)) ** 2 / lam.size, 0.0)


def c_trace(rho) -> float:
    """Trace distance to the maximally mixed state, ``sum_i |lambda_i - 1/n|``."""
    lam = spectrum(as_density(rho))
    return float(np.sum(np.abs(lam - 1.0 / lam.size)))


# -- distance-framework evaluations (no spectral shortcut) --------------------

def c2_distance(rho) -> float:
    """Squared Hilbert-Schmidt distance ``||rho - 1/n||_2^2``."""
    rho = as_density(rho)
    d = rho - np.eye(rho.shape[0]) / rho.shape[0]
    return float(np.sum(np.abs(d) ** 2))


def relative_entropy(rho, sigma, base: float = 2.0) -> float:
    """``S(rho || sigma) = Tr rho log rho - Tr rho log sigma``.

    Returns ``inf`` when the support of ``rho`` is not contained in that of
    ``sigma``.
    """
    lr, vr = density_eigh(rho)
    ls, vs = density_eigh(sigma)
    if lr.shape != ls.shape:
        raise PreconditionError("dimension mismatch")
    lr = np.clip(lr, 0.0, None)
    ls = np.clip(ls, 0.0, None)
    # overlaps |<r_i|s_j>|^2
    w = np.abs(dagger(vr) @ vs) ** 2
    mask = lr > 0
    rr = float(np.sum(lr[mask] * np.log(lr[mask])))
    weight = w[mask] * lr[mask][:, None]
    if np.any((weight > 1e-14) & (ls[None, :] <= 0)):
        return float("inf")
    with np.errstate(divide="ignore"):
        logs = np.where(ls > 0, np.log(np.where(ls > 0, ls, 1.0)), 0.0)
    rs = float(np.sum(weight * logs[None, :]))
    return (rr - rs) / np.log(base)


def c_re_distance(rho, base: float = 2.0) -> float:
    n = as_matrix(rho).shape[0]
    return relative_entropy(rho, np.eye(n) / n, base)


def l1_distance(rho, u) -> float:
    """Entrywise l1 norm of ``U rho U^dag - 1/n``."""
    rho, u = _pair(rho, u)
    r = u @ rho @ dagger(u)
    return float(np.sum(np.abs(r - np.eye(r.shape[0]) / r.shape[0])))


# -- fixed-basis evaluators ----------------------------------------------------

def _pair(rho, u) -> tuple[np.ndarray, np.ndarray]:
    rho, u = as_density(rho), as_unitary(u)
    if rho.shape != u.shape:
        raise PreconditionError(f"dimension mismatch: state {rho.shape}, unitary {u.shape}")
    return rho, u


def _rotated(rho, u) -> np.ndarray:
    rho, u = _pair(rho, u)
    r = u @ rho @ dagger(u)
    return (r + dagger(r)) / 2


def basis_coherence_l2(rho, u) -> float:
    r = _rotated(rho, u)
    d = np.real(np.diag(r))
    return max(purity(r) - float(np.sum(d**2)), 0.0)


def basis_coherence_re(rho, u, base: float = 2.0) -> float:
    r = _rotated(rho, u)
    d = np.clip(np.real(np.diag(r)), 0.0, None)
    return max(shannon_entropy(d, base) - von_neumann_entropy(r, base), 0.0)


def basis_coherence_l1(rho, u) -> float:
    r = _rotated(rho, u)
    return float(np.sum(np.abs(r)) - np.sum(np.abs(np.diag(r))))


def basis_coherence_batch(rho, unitaries, kind: str = "l2", base: float = 2.0) -> np.ndarray:
    """Fixed-basis coherence for a stack of unitaries at once.

    ``kind`` is one of ``"l2"``, ``"re"`` or ``"l1"``. Unitaries are not
    validated individually; pass Haar samples or other trusted input.
    """
    rho = as_density(rho)
    us = np.asarray(unitaries, dtype=complex)
    if us.ndim != 3 or us.shape[1:] != rho.shape:
        raise PreconditionError(f"expected a (m, {rho.shape[0]}, {rho.shape[0]}) stack")
    r = us @ rho @ us.conj().transpose(0, 2, 1)
    d = np.real(np.diagonal(r, axis1=1, axis2=2))
    if kind == "l2":
        return purity(rho) - np.sum(d**2, axis=1)
    if kind == "re":
        d = np.clip(d, 0.0, None)
        with np.errstate(divide="ignore", invalid="ignore"):
            h = -np.sum(np.where(d > 0, d * np.log(np.where(d > 0, d, 1.0)), 0.0), axis=1)
        return h / np.log(base) - von_neumann_entropy(rho, base)
    if kind == "l1":
        return np.sum(np.abs(r), axis=(1, 2)) - np.sum(np.abs(d), axis=1)
    raise PreconditionError(f"unknown kind {kind!r}")


def uniformizing_unitary(rho) -> np.ndarray:
    """A unitary whose rotated state has every diagonal entry equal to ``1/n``.

    Built as ``F V^dag`` with ``V`` the eigenbasis of ``rho`` and ``F`` the DFT
    matrix: the rotated state is ``F diag(lambda) F^dag`` whose diagonal is
    ``sum_k |F_jk|^2 lambda_k = 1/n``. The same unitary flattens the diagonal
    of any function of ``rho``, in particular ``sqrt(rho)``.
    """
    _, v = density_eigh(rho)
    return dft_unitary(v.shape[0]) @ dagger(v)


@dataclass(frozen=True)
class MeasureReport:
    dim: int
    purity: float
    c2: float
    c_re: float
    c_skew: float
    c_trace: float
    c1: float | None
    log_base: float

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["c1"] is None:
            del d["c1"]
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def report_from_spectrum(lam, base: float = 2.0, c1: float | None = None) -> MeasureReport:
    """Evaluate every closed-form measure from an eigenvalue list."""
    lam = np.clip(np.asarray(lam, dtype=float), 0.0, None)
    lam = lam / lam.sum()
    n = lam.size
    p = float(np.sum(lam**2))
    return MeasureReport(
        dim=n,
        purity=p,
        c2=p - 1.0 / n,
        c_re=max(np.log(n) / np.log(base) - shannon_entropy(lam, base), 0.0),
        c_skew=max(1.0 - float(np.sum(np.sqrt(lam))) ** 2 / n, 0.0),
        c_trace=float(np.sum(np.abs(lam - 1.0 / n))),
        c1=c1,
        log_base=float(base),
    )


def measure_report(rho, base: float = 2.0, with_c1: bool = False, cfg=None) -> MeasureReport:
    rho = as_density(rho)
    c1_val = None
    if with_c1:
        from .basis_opt import OptimizerConfig, c1

        c1_val = c1(rho, cfg if cfg is not None else OptimizerConfig())
    rep = report_from_spectrum(spectrum(rho), base, c1_val)
    # purity straight from the matrix keeps c2 = purity - 1/n exact
    p = purity(rho)
    return MeasureReport(rep.dim, p, p - 1.0 / rep.dim, rep.c_re, rep.c_skew, rep.c_trace,
                         rep.c1, rep.log_base)
