"""Quantum Fisher information for local ancilla generators and the interferometric power.

For a qubit ancilla the minimum over generators H_b = n.sigma is a 3x3
eigenvalue problem.  Two matrices carry the same information:

* ``w_matrix``: the weighted cross-correlations of the ancilla Paulis; the
  QIP is ``1 - max eig(W)``.
* ``fisher_matrix``: the quadratic form ``F(n)/4 = n.M.n``.  ``M = I - W``
  exactly, but building ``M`` from squared eigenvalue gaps avoids the
  cancellation in ``1 - max eig(W)`` when the QIP is tiny, so the QIP is
  evaluated as ``min eig(M)``.
"""
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .numerics import IDENTITY_2, PAULIS, hermitian_eig_batch

SPECTRAL_CUTOFF = 1e-12
CONVENTIONS = ("eq4", "sqrt")

# I_a (x) sigma_b^i, shape (3, 4, 4)
_ANCILLA_PAULIS = np.stack([np.kron(IDENTITY_2, p) for p in PAULIS])


@dataclass(frozen=True)
class LocalHamiltonian:
    """Ancilla generator r.sigma with a unit Bloch vector."""

    bloch: tuple

    def __post_init__(self):
        v = np.asarray(self.bloch, dtype=float)
        if v.shape != (3,):
            raise InvalidInputError(f"Bloch vector needs 3 components, got {v.shape}")
        if abs(np.linalg.norm(v) - 1.0) > 1e-12:
            raise InvalidInputError(f"Bloch vector must have unit norm, got {np.linalg.norm(v)!r}")
        object.__setattr__(self, "bloch", tuple(float(x) for x in v))

    @classmethod
    def along(cls, vec):
        v = np.asarray(vec, dtype=float)
        return cls(tuple(v / np.linalg.norm(v)))

    def matrix(self):
        return np.tensordot(np.asarray(self.bloch), PAULIS, axes=1)


def _check_states(rhos):
    rhos = np.asarray(rhos, dtype=complex)
    if rhos.ndim == 2:
        rhos = rhos[None]
    if rhos.shape[1:] != (4, 4):
        raise InvalidInputError(
            f"only qubit ancillas are supported: expected 4x4 two-qubit states, got {rhos.shape[1:]}")
    return rhos


def _spectral_parts(rhos):
    """Eigenvalues, pair mask and ancilla Pauli matrix elements in the eigenbasis."""
    e, v = hermitian_eig_batch(rhos)
    e = np.clip(e, 0.0, None)
    esum = e[:, :, None] + e[:, None, :]
    mask = esum > SPECTRAL_CUTOFF
    # A[b, i, m, n] = <phi_m| I (x) sigma_i |phi_n>
    a = np.einsum("bkm,ikl,bln->bimn", v.conj(), _ANCILLA_PAULIS, v)
    return e, esum, mask, a


def _pair_weights(e, esum, mask, kind):
    safe = np.where(mask, esum, 1.0)
    if kind == "w":
        w = 2.0 * e[:, :, None] * e[:, None, :] / safe
    else:
        w = 0.5 * (e[:, :, None] - e[:, None, :]) ** 2 / safe
    return np.where(mask, w, 0.0)


def _quadratic_form(weights, a):
    # sum_mn w_mn Re(A_i[m,n] A_j[n,m]) = sum_mn w_mn Re(A_i[m,n] conj(A_j[m,n]))
    out = np.einsum("bmn,bimn,bjmn->bij", weights, a, a.conj()).real
    return 0.5 * (out + out.transpose(0, 2, 1))


def w_matrix_batch(rhos):
    e, esum, mask, a = _spectral_parts(_check_states(rhos))
    return _quadratic_form(_pair_weights(e, esum, mask, "w"), a)


def fisher_matrix_batch(rhos):
    e, esum, mask, a = _spectral_parts(_check_states(rhos))
    return _quadratic_form(_pair_weights(e, esum, mask, "f"), a)


def w_matrix(rho):
    return w_matrix_batch(rho)[0]


def fisher_matrix(rho):
    """Matrix M with fisher_information(rho, n.sigma) = 4 n.M.n for unit n."""
    return fisher_matrix_batch(rho)[0]


def fisher_information(rho, hamiltonian: LocalHamiltonian) -> float:
    """Quantum Fisher information of rho for the generator I_a (x) H_b.

    Evaluated over eigenpairs of rho with e_m + e_n above SPECTRAL_CUTOFF as
    2 * sum_{m,n} (e_m - e_n)^2 / (e_m + e_n) |<m|I (x) H|n>|^2.
    """
    rhos = _check_states(rho)
    if not isinstance(hamiltonian, LocalHamiltonian):
        hamiltonian = LocalHamiltonian.along(hamiltonian)
    e, v = hermitian_eig_batch(rhos)
    e, v = np.clip(e[0], 0.0, None), v[0]
    h = v.conj().T @ np.kron(IDENTITY_2, hamiltonian.matrix()) @ v
    esum = e[:, None] + e[None, :]
    mask = esum > SPECTRAL_CUTOFF
    gap = (e[:, None] - e[None, :]) ** 2 / np.where(mask, esum, 1.0)
    return float(2.0 * np.sum(np.where(mask, gap, 0.0) * np.abs(h) ** 2))


def qip_batch(rhos, convention="eq4"):
    """Interferometric power of each state: ``1 - max eig(W)`` or its square root."""
    if convention not in CONVENTIONS:
        raise InvalidInputError(f"convention must be one of {CONVENTIONS}, got {convention!r}")
    m = fisher_matrix_batch(rhos)
    low = hermitian_eig_batch(m.astype(complex))[0][:, 0]
    q = np.clip(low, 0.0, 1.0)
    return np.sqrt(q) if convention == "sqrt" else q


def qip(rho) -> float:
    return float(qip_batch(rho, "eq4")[0])


def qip_sqrt(rho) -> float:
    return float(qip_batch(rho, "sqrt")[0])


def fibonacci_sphere(n):
    """Deterministic quasi-uniform unit vectors, shape (n, 3)."""
    k = np.arange(n) + 0.5
    z = 1.0 - 2.0 * k / n
    rxy = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = np.pi * (3.0 - np.sqrt(5.0)) * np.arange(n)
    return np.column_stack([rxy * np.cos(phi), rxy * np.sin(phi), z])


def qip_bruteforce(rho, n_dirs=20000) -> float:
    """Minimum of fisher_information / 4 over a Fibonacci sphere of generator directions.

    Each direction is scored independently from the spectral sum, without the
    W-matrix; the result approaches ``qip`` from above as ``n_dirs`` grows.
    """
    if n_dirs < 100:
        raise InvalidInputError(f"n_dirs must be at least 100, got {n_dirs}")
    rhos = _check_states(rho)
    e, v = hermitian_eig_batch(rhos)
    e, v = np.clip(e[0], 0.0, None), v[0]
    paulis = np.einsum("km,ikl,ln->imn", v.conj(), _ANCILLA_PAULIS, v)
    esum = e[:, None] + e[None, :]
    mask = esum > SPECTRAL_CUTOFF
    gap = np.where(mask, (e[:, None] - e[None, :]) ** 2 / np.where(mask, esum, 1.0), 0.0)
    best = np.inf
    dirs = fibonacci_sphere(n_dirs)
    for chunk in np.array_split(dirs, max(1, n_dirs // 4096)):
        h = np.einsum("di,imn->dmn", chunk, paulis)
        f = 2.0 * np.einsum("mn,dmn->d", gap, np.abs(h) ** 2)
        best = min(best, float(f.min()) / 4.0)
    return best
