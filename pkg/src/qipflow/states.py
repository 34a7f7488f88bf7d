"""Two-qubit density matrices and the correlation quantities compared against QIP.

Basis order is |00>, |01>, |10>, |11> with the first label the system qubit a
and the second the ancilla b.
"""
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .errors import InvalidInputError
from .numerics import (HERMITIAN_TOL, PAULIS, SIGMA_Y, hermitian_eig, hermitian_eig_batch,
                       partial_trace, trace_norm)

TRACE_TOL = 1e-10
PSD_TOL = 1e-10


def validate_density(rho, dims=None):
    """Check the density-matrix invariants and return ``rho`` as a complex array."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidInputError(f"density matrix must be square, got shape {rho.shape}")
    if dims is not None and int(np.prod(dims)) != rho.shape[0]:
        raise InvalidInputError(f"subsystem dims {tuple(dims)} do not match dimension {rho.shape[0]}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > HERMITIAN_TOL:
        raise InvalidInputError(f"density matrix not Hermitian (deviation {herm:.3e})")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvalidInputError(f"density matrix trace is {tr!r}, expected 1")
    low = hermitian_eig(rho).eigenvalues[0]
    if low < -PSD_TOL:
        raise InvalidInputError(f"density matrix not PSD (smallest eigenvalue {low:.3e})")
    return rho


def _two_qubit(rho):
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise InvalidInputError(f"expected a two-qubit (4x4) state, got shape {rho.shape}")
    return rho


@dataclass(frozen=True)
class DensityMatrix:
    """A validated density matrix with its subsystem dimensions."""

    matrix: np.ndarray
    dims: Tuple[int, ...] = field(default=(2, 2))

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "matrix", validate_density(self.matrix, self.dims))

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    def to_dict(self):
        return {
            "dims": list(self.dims),
            "re": [float(x) for x in self.matrix.real.ravel()],
            "im": [float(x) for x in self.matrix.imag.ravel()],
        }

    @classmethod
    def from_dict(cls, data):
        try:
            dims = tuple(int(d) for d in data["dims"])
            n = int(np.prod(dims))
            re = np.asarray(data["re"], dtype=float)
            im = np.asarray(data["im"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"malformed density-matrix document: {exc}") from exc
        if re.size != n * n or im.size != n * n:
            raise InvalidInputError(f"expected {n * n} entries in 're' and 'im'")
        return cls((re + 1j * im).reshape(n, n), dims)


def bell_phi():
    """Projector onto (|00> + |11>)/sqrt(2)."""
    psi = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    return np.outer(psi, psi.conj())


def werner(r: float):
    """Werner state (I + r XX - r YY + r ZZ)/4, r in [0, 1]."""
    if not 0.0 <= r <= 1.0:
        raise InvalidInputError(f"Werner parameter must lie in [0, 1], got {r}")
    rho = np.eye(4, dtype=complex)
    for coeff, p in zip((r, -r, r), PAULIS):
        rho = rho + coeff * np.kron(p, p)
    return rho / 4.0


def pure_schmidt(theta: float):
    """cos(theta)|00> + sin(theta)|11>."""
    psi = np.array([np.cos(theta), 0, 0, np.sin(theta)], dtype=complex)
    return np.outer(psi, psi.conj())


def random_density(rng, dim=4):
    """Ginibre-distributed full-rank state."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def _entropy_from_eigs(eigs):
    p = np.clip(eigs, 0.0, None)
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def von_neumann_entropy(rho) -> float:
    """Entropy in bits."""
    return _entropy_from_eigs(hermitian_eig(rho).eigenvalues)


def mutual_information(rho) -> float:
    rho = _two_qubit(rho)
    s_a = von_neumann_entropy(partial_trace(rho, 0))
    s_b = von_neumann_entropy(partial_trace(rho, 1))
    return s_a + s_b - von_neumann_entropy(rho)


def mutual_information_batch(rhos):
    rhos = np.asarray(rhos, dtype=complex)
    r = rhos.reshape(-1, 2, 2, 2, 2)
    rho_a = np.einsum("nijkj->nik", r)
    rho_b = np.einsum("njijk->nik", r)
    ea, _ = hermitian_eig_batch(rho_a)
    eb, _ = hermitian_eig_batch(rho_b)
    eab, _ = hermitian_eig_batch(rhos)

    def ent(e):
        p = np.clip(e, 0.0, None)
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(p > 0, -p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
        return terms.sum(axis=1)

    return ent(ea) + ent(eb) - ent(eab)


_YY = np.kron(SIGMA_Y, SIGMA_Y)


def concurrence_batch(rhos):
    """Wootters concurrence for a stack of two-qubit states."""
    rhos = np.asarray(rhos, dtype=complex)
    tilde = _YY @ rhos.conj() @ _YY
    eigs = np.linalg.eigvals(rhos @ tilde)
    lam = np.sqrt(np.clip(eigs.real, 0.0, None))
    lam = -np.sort(-lam, axis=1)
    return np.clip(lam[:, 0] - lam[:, 1] - lam[:, 2] - lam[:, 3], 0.0, None)


def concurrence(rho) -> float:
    return float(concurrence_batch(_two_qubit(rho)[None])[0])


def trace_distance(rho, sigma) -> float:
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape != sigma.shape:
        raise InvalidInputError(f"dimension mismatch: {rho.shape} vs {sigma.shape}")
    return 0.5 * trace_norm(rho - sigma)
