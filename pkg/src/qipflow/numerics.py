"""Small dense linear algebra, quadrature and special functions."""
import math
from typing import Callable, NamedTuple

import numpy as np

from . import _kernels
from .errors import InvalidInputError, NumericalFailureError

HERMITIAN_TOL = 1e-10
OFFDIAG_TOL = 1e-12

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)
PAULIS = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])


class HermitianEigenResult(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _check_square(m, name="matrix"):
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise InvalidInputError(f"{name} must be square, got shape {m.shape}")


def hermitian_eig_batch(mats):
    """Eigen-decompose a stack of Hermitian matrices with cyclic Jacobi.

    Returns eigenvalues of shape ``(N, n)`` in nondecreasing order and the
    matching eigenvectors as columns, shape ``(N, n, n)``.
    """
    mats = np.asarray(mats, dtype=complex)
    if mats.ndim == 2:
        mats = mats[None]
    _check_square(mats)
    if mats.shape[0] == 0:
        n = mats.shape[-1]
        return np.zeros((0, n)), np.zeros((0, n, n), dtype=complex)
    asym = np.max(np.abs(mats - mats.conj().transpose(0, 2, 1)))
    if not np.isfinite(asym):
        raise InvalidInputError("matrix contains non-finite entries")
    if asym > HERMITIAN_TOL:
        raise InvalidInputError(f"matrix is not Hermitian (max |M - M^H| = {asym:.3e})")
    herm = 0.5 * (mats + mats.conj().transpose(0, 2, 1))
    vals, vecs, status, reduced = _kernels.jacobi_eigh(herm)
    n = herm.shape[-1]
    off = reduced.copy()
    off[:, np.arange(n), np.arange(n)] = 0.0
    off_norm = np.sqrt(np.sum(np.abs(off) ** 2, axis=(1, 2)))
    scale = np.maximum(1.0, np.sqrt(np.sum(np.abs(herm) ** 2, axis=(1, 2))))
    if np.any(status < 0) or np.any(off_norm >= OFFDIAG_TOL * scale):
        raise NumericalFailureError("Jacobi sweeps did not converge", estimate=(vals, vecs))
    order = np.argsort(vals, axis=1, kind="stable")
    vals = np.take_along_axis(vals, order, axis=1)
    vecs = np.take_along_axis(vecs, order[:, None, :], axis=2)
    return vals, vecs


def hermitian_eig(m) -> HermitianEigenResult:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise InvalidInputError(f"expected a 2-D matrix, got shape {m.shape}")
    vals, vecs = hermitian_eig_batch(m[None])
    return HermitianEigenResult(vals[0], vecs[0])


def trace_norm(m) -> float:
    """Sum of singular values."""
    m = np.asarray(m, dtype=complex)
    _check_square(m)
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def kron(a, b):
    return np.kron(np.asarray(a), np.asarray(b))


def partial_trace(rho, keep: int):
    """Reduce a two-qubit operator to subsystem ``keep`` (0 = system a, 1 = ancilla b)."""
    rho = np.asarray(rho)
    if rho.shape != (4, 4):
        raise InvalidInputError(f"partial_trace expects a 4x4 matrix with dims (2, 2), got {rho.shape}")
    r = rho.reshape(2, 2, 2, 2)
    if keep == 0:
        return np.einsum("ijkj->ik", r)
    if keep == 1:
        return np.einsum("jijk->ik", r)
    raise InvalidInputError(f"keep must be 0 or 1, got {keep}")


def adaptive_quad(f: Callable[[float], float], a: float, b: float, tol: float = 1e-10,
                  max_intervals: int = _kernels.QUAD_MAX_INTERVALS) -> float:
    """Adaptive Simpson quadrature of a scalar function on ``[a, b]``."""
    if not a <= b:
        raise InvalidInputError(f"need a <= b, got a={a}, b={b}")
    if a == b:
        return 0.0
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    if not all(map(math.isfinite, (fa, fm, fb))):
        raise InvalidInputError("integrand is not finite on the interval")
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    stack = [(a, b, fa, fm, fb, whole, tol)]
    total = 0.0
    intervals = 1
    failed = False
    while stack:
        a0, b0, fa0, fm0, fb0, whole0, tol0 = stack.pop()
        m0 = 0.5 * (a0 + b0)
        lm, rm = 0.5 * (a0 + m0), 0.5 * (m0 + b0)
        flm, frm = f(lm), f(rm)
        left = (m0 - a0) / 6.0 * (fa0 + 4.0 * flm + fm0)
        right = (b0 - m0) / 6.0 * (fm0 + 4.0 * frm + fb0)
        delta = left + right - whole0
        if abs(delta) <= 15.0 * tol0 or failed or m0 in (a0, b0):
            total += left + right + delta / 15.0
            continue
        intervals += 1
        if intervals > max_intervals:
            failed = True
        stack.append((m0, b0, fm0, frm, fb0, right, 0.5 * tol0))
        stack.append((a0, m0, fa0, flm, fm0, left, 0.5 * tol0))
    if failed:
        raise NumericalFailureError(
            f"adaptive Simpson exceeded {max_intervals} subintervals", estimate=total)
    return total


# Lanczos approximation, g = 7, n = 9
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma_function(x: float) -> float:
    """Euler Gamma function for positive real arguments."""
    x = float(x)
    if not x > 0 or not math.isfinite(x):
        raise InvalidInputError(f"gamma_function needs a finite x > 0, got {x}")
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma_function(1.0 - x))
    z = x - 1.0
    acc = _LANCZOS_COEF[0]
    for k, c in enumerate(_LANCZOS_COEF[1:], start=1):
        acc += c / (z + k)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2 * math.pi) * t ** (z + 0.5) * math.exp(-t) * acc


def sampled_derivative(times, values):
    """Second-order finite-difference derivative of samples on a (possibly nonuniform) grid."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.ndim != 1 or times.shape != values.shape:
        raise InvalidInputError("times and values must be 1-D arrays of equal length")
    if times.size < 3:
        raise InvalidInputError(f"need at least 3 samples, got {times.size}")
    if np.any(np.diff(times) <= 0):
        raise InvalidInputError("time grid must be strictly increasing")
    return np.gradient(values, times, edge_order=2)
