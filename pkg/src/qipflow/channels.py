"""Single-qubit dephasing and amplitude-damping channels acting on the system qubit.

Dephasing is driven by an Ohmic reservoir, amplitude damping by a Lorentzian
one.  Every map acts on slot a of a two-qubit state and as the identity on the
ancilla b.
"""
import cmath
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .errors import InvalidInputError, NumericalFailureError, SingularMapError
from .numerics import IDENTITY_2, SIGMA_Z, adaptive_quad, gamma_function

SINGULAR_TOL = 1e-12
PARAM_TOL = 1e-12


@dataclass(frozen=True)
class OhmicSpectralDensity:
    alpha: float
    omega_c: float = 1.0
    S: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "omega_c", "S"):
            if not getattr(self, name) > 0:
                raise InvalidInputError(f"{name} must be positive, got {getattr(self, name)}")

    def __call__(self, omega):
        """J(omega) = alpha * omega_c * (omega/omega_c)^S * exp(-omega/omega_c)."""
        x = np.asarray(omega, dtype=float) / self.omega_c
        return self.alpha * self.omega_c * x ** self.S * np.exp(-x)


@dataclass(frozen=True)
class LorentzianSpectralDensity:
    gamma0: float
    lam: float
    delta: float = 0.0

    def __post_init__(self):
        if not self.gamma0 > 0:
            raise InvalidInputError(f"gamma0 must be positive, got {self.gamma0}")
        if not self.lam > 0:
            raise InvalidInputError(f"lambda must be positive, got {self.lam}")

    def __call__(self, omega, omega_c=0.0):
        """Spectral density centred on ``omega_c``."""
        w = np.asarray(omega, dtype=float)
        return self.gamma0 * self.lam ** 2 / (2 * np.pi * ((w - omega_c) ** 2 + self.lam ** 2))


@dataclass(frozen=True)
class MapDescriptor:
    """A single-qubit map: ``kind`` is 'dephasing' (value = Gamma) or 'damping' (value = J)."""

    kind: str
    value: complex

    def __post_init__(self):
        if self.kind not in ("dephasing", "damping"):
            raise InvalidInputError(f"unknown channel kind {self.kind!r}")



@dataclass
class ChannelTrajectory:
    """Channel parameters sampled on a time grid.

    Dephasing trajectories fill ``gamma`` (rate) and ``Gamma`` (coherence factor),
    optionally ``log_Gamma`` so ratios stay finite where Gamma underflows;
    damping trajectories fill ``J``.
    """

    times: np.ndarray
    kind: str
    gamma: Optional[np.ndarray] = None
    Gamma: Optional[np.ndarray] = None
    J: Optional[np.ndarray] = None
    log_Gamma: Optional[np.ndarray] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.ndim != 1 or self.times.size < 3:
            raise InvalidInputError("a trajectory needs at least 3 time points")
        if np.any(np.diff(self.times) <= 0):
            raise InvalidInputError("time grid must be strictly increasing")
        if self.kind == "dephasing":
            if self.Gamma is None:
                raise InvalidInputError("dephasing trajectory needs Gamma samples")
            self.Gamma = np.asarray(self.Gamma, dtype=float)
        elif self.kind == "damping":
            if self.J is None:
                raise InvalidInputError("damping trajectory needs J samples")
            self.J = np.asarray(self.J, dtype=complex)
            if np.max(np.abs(self.J)) > 1 + 1e-9:
                raise InvalidInputError("|J| exceeds 1 on the trajectory")
        else:
            raise InvalidInputError(f"unknown channel kind {self.kind!r}")

    @property
    def values(self):
        return self.Gamma if self.kind == "dephasing" else self.J

    def __len__(self):
        return self.times.size

    def descriptor(self, i):
        return MapDescriptor(self.kind, self.values[i])


# ---------------------------------------------------------------------------
# Dephasing
# ---------------------------------------------------------------------------

def ohmic_rate(sd: OhmicSpectralDensity, t):
    """Zero-temperature dephasing rate of the Ohmic reservoir.

    gamma(t) = alpha*omega_c*Gamma0(S)*sin(S*atan(omega_c t)) / (1 + (omega_c t)^2)^(S/2),
    the closed form of int J(w) sin(w t)/w dw.
    """
    x = sd.omega_c * np.asarray(t, dtype=float)
    out = sd.alpha * sd.omega_c * gamma_function(sd.S) * np.sin(sd.S * np.arctan(x)) \
        / (1.0 + x * x) ** (0.5 * sd.S)
    return float(out) if out.ndim == 0 else out


def ohmic_negative_windows(sd: OhmicSpectralDensity, t_max: float):
    """Closed intervals in [0, t_max] on which the Ohmic rate is negative.

    The rate changes sign where S*atan(omega_c t) crosses a multiple of pi.
    """
    edges = []
    k = 1
    while k * math.pi < sd.S * math.pi / 2:
        edges.append(math.tan(k * math.pi / sd.S) / sd.omega_c)
        k += 1
    windows = []
    for j in range(0, len(edges), 2):
        start = edges[j]
        stop = edges[j + 1] if j + 1 < len(edges) else math.inf
        if start >= t_max:
            break
        windows.append((start, min(stop, t_max)))
    return windows


def dephasing_factor(sd: OhmicSpectralDensity, t: float, tol: float = 1e-10) -> float:
    """Gamma(t) = exp(-2 int_0^t gamma)."""
    if t < 0:
        raise InvalidInputError(f"time must be nonnegative, got {t}")
    if t == 0:
        return 1.0
    return math.exp(-2.0 * adaptive_quad(lambda s: ohmic_rate(sd, s), 0.0, t, tol))


def dephasing_trajectory(sd: OhmicSpectralDensity, times, tol: float = 1e-10) -> ChannelTrajectory:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 3:
        raise InvalidInputError("a trajectory needs at least 3 time points")
    if times[0] != 0.0 or np.any(np.diff(times) <= 0):
        raise InvalidInputError("time grid must start at 0 and increase strictly")
    pref = sd.alpha * sd.omega_c * gamma_function(sd.S)
    integral, ok = _kernels.ohmic_cumulative(times, tol, pref, sd.omega_c, sd.S)
    if not ok:
        raise NumericalFailureError("dephasing integral hit the subdivision cap",
                                    estimate=np.exp(-2.0 * integral))
    params = {"alpha": sd.alpha, "omega_c": sd.omega_c, "S": sd.S}
    return ChannelTrajectory(times, "dephasing", gamma=ohmic_rate(sd, times),
                             Gamma=np.exp(-2.0 * integral), log_Gamma=-2.0 * integral, params=params)


def _dephasing_kraus(g):
    g = float(np.real(g))
    if not -PARAM_TOL <= g <= 1 + PARAM_TOL:
        raise InvalidInputError(f"dephasing factor must lie in [0, 1], got {g}")
    g = min(max(g, 0.0), 1.0)
    return [math.sqrt((1 + g) / 2) * IDENTITY_2, math.sqrt((1 - g) / 2) * SIGMA_Z]


def _apply_local(kraus, rho):
    rho = np.asarray(rho, dtype=complex)
    if rho.shape == (2, 2):
        ops = kraus
    elif rho.shape == (4, 4):
        ops = [np.kron(k, IDENTITY_2) for k in kraus]
    else:
        raise InvalidInputError(f"expected a 2x2 or 4x4 state, got shape {rho.shape}")
    return sum(k @ rho @ k.conj().T for k in ops)


def apply_dephasing_system(rho_a, gamma_factor):
    """Scale the coherences of a qubit state by Gamma."""
    rho_a = np.asarray(rho_a, dtype=complex)
    if rho_a.shape != (2, 2):
        raise InvalidInputError(f"expected a 2x2 state, got {rho_a.shape}")
    return _apply_local(_dephasing_kraus(gamma_factor), rho_a)


def apply_dephasing_joint(rho_ab, gamma_factor):
    """Dephase qubit a of a two-qubit state through the Kraus pair sqrt((1+G)/2) I, sqrt((1-G)/2) Z."""
    rho_ab = np.asarray(rho_ab, dtype=complex)
    if rho_ab.shape != (4, 4):
        raise InvalidInputError(f"expected a 4x4 state, got {rho_ab.shape}")
    return _apply_local(_dephasing_kraus(gamma_factor), rho_ab)


# ---------------------------------------------------------------------------
# Amplitude damping
# ---------------------------------------------------------------------------

def _sinhc(z):
    if abs(z) < 1e-4:
        z2 = z * z
        return 1.0 + z2 / 6.0 + z2 * z2 / 120.0
    return cmath.sinh(z) / z


def _jt_scalar(gamma0, lam, delta, t):
    kappa = complex(lam, -delta)
    eta = cmath.sqrt(kappa * kappa - 2.0 * gamma0 * lam)
    half = 0.5 * t
    if abs(eta) * half < 1.0:
        # cosh + kappa/eta*sinh written without the 1/eta, safe as eta -> 0
        return cmath.exp(-kappa * half) * (cmath.cosh(eta * half) + kappa * half * _sinhc(eta * half))
    # split into growing/decaying exponentials so large t cannot overflow
    ratio = kappa / eta
    return 0.5 * (1 + ratio) * cmath.exp((eta - kappa) * half) + \
        0.5 * (1 - ratio) * cmath.exp((-eta - kappa) * half)


def lorentzian_jt(sd: LorentzianSpectralDensity, t):
    """Closed-form solution J_t of the memory-kernel equation for a Lorentzian reservoir.

    J_t = exp(-(lam - i delta) t/2) [cosh(eta t/2) + (lam - i delta)/eta sinh(eta t/2)],
    eta = sqrt((lam - i delta)^2 - 2 gamma0 lam).
    """
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0):
        raise InvalidInputError("time must be nonnegative")
    out = np.array([_jt_scalar(sd.gamma0, sd.lam, sd.delta, float(x)) for x in arr.ravel()],
                   dtype=complex).reshape(arr.shape)
    return complex(out) if out.ndim == 0 else out


def memory_kernel(sd: LorentzianSpectralDensity, tau):
    """Reservoir correlation f(tau) = (gamma0 lam / 2) exp((i delta - lam) tau)."""
    tau = np.asarray(tau, dtype=float)
    out = 0.5 * sd.gamma0 * sd.lam * np.exp((1j * sd.delta - sd.lam) * tau)
    return complex(out) if out.ndim == 0 else out


def _uniform_step(times):
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 2 or times[0] != 0.0:
        raise InvalidInputError("Volterra grid must be 1-D and start at 0")
    steps = np.diff(times)
    h = (times[-1] - times[0]) / (times.size - 1)
    if np.any(steps <= 0) or np.max(np.abs(steps - h)) > 1e-9 * max(1.0, h):
        raise InvalidInputError("Volterra grid must be uniform")
    return h


def solve_volterra(kernel, times, tol: float = 1e-5, max_refine: int = 64):
    """Solve y' = -int_0^t k(t-s) y(s) ds, y(0) = 1 on a uniform grid.

    The step is halved until two successive refinements differ by less than
    ``tol`` on the output grid.  ``kernel`` maps an array of lags to values.
    """
    times = np.asarray(times, dtype=float)
    h = _uniform_step(times)
    n = times.size

    def run(m):
        lags = np.arange((n - 1) * m + 1) * (h / m)
        y = _kernels.volterra(np.asarray(kernel(lags), dtype=complex), h / m)
        return y[::m]

    m = 1
    prev = run(m)
    while True:
        m *= 2
        cur = run(m)
        diff = float(np.max(np.abs(cur - prev)))
        if diff < tol:
            return cur
        if m >= max_refine:
            raise NumericalFailureError(
                f"step too coarse: refinement still changes the solution by {diff:.2e}", estimate=cur)
        prev = cur


def solve_volterra_jt(sd: LorentzianSpectralDensity, times, tol: float = 1e-5):
    return solve_volterra(lambda lags: memory_kernel(sd, lags), times, tol)


def damping_trajectory(sd: LorentzianSpectralDensity, times, method: str = "closed") -> ChannelTrajectory:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 3:
        raise InvalidInputError("a trajectory needs at least 3 time points")
    if method == "closed":
        j = lorentzian_jt(sd, times)
    elif method == "volterra":
        j = solve_volterra_jt(sd, times)
    else:
        raise InvalidInputError(f"unknown method {method!r}")
    params = {"gamma0": sd.gamma0, "lambda": sd.lam, "delta": sd.delta}
    return ChannelTrajectory(times, "damping", J=j, params=params)


def _damping_kraus(j):
    j = complex(j)
    if abs(j) > 1 + PARAM_TOL:
        raise InvalidInputError(f"|J| must not exceed 1, got {abs(j)}")
    mod = min(abs(j), 1.0)
    k0 = np.array([[1, 0], [0, j]], dtype=complex)
    k1 = np.array([[0, math.sqrt(1 - mod * mod)], [0, 0]], dtype=complex)
    return [k0, k1]


def apply_amplitude_damping_system(rho_a, j):
    """Decay |1> -> |0>: populations scale with |J|^2, the coherence <1|rho|0> with J."""
    rho_a = np.asarray(rho_a, dtype=complex)
    if rho_a.shape != (2, 2):
        raise InvalidInputError(f"expected a 2x2 state, got {rho_a.shape}")
    return _apply_local(_damping_kraus(j), rho_a)


def apply_amplitude_damping_joint(rho_ab, j):
    rho_ab = np.asarray(rho_ab, dtype=complex)
    if rho_ab.shape != (4, 4):
        raise InvalidInputError(f"expected a 4x4 state, got {rho_ab.shape}")
    return _apply_local(_damping_kraus(j), rho_ab)


def damping_element_rules(rho_ab, j):
    """Element-by-element two-qubit damping table (cross-check for the Kraus form).

    Index labels are (a, b) bit pairs; J^2 in populations is read as |J|^2.
    """
    r = np.asarray(rho_ab, dtype=complex)
    j = complex(j)
    p = abs(j) ** 2
    i00, i01, i10, i11 = 0, 1, 2, 3
    out = np.zeros((4, 4), dtype=complex)
    out[i11, i11] = r[i11, i11] * p
    out[i10, i10] = r[i10, i10] * p
    out[i01, i01] = r[i01, i01] + r[i11, i11] * (1 - p)
    out[i00, i00] = 1 - (out[i01, i01] + out[i10, i10] + out[i11, i11])
    out[i11, i10] = r[i11, i10] * p
    out[i11, i01] = r[i11, i01] * j
    out[i11, i00] = r[i11, i00] * j
    out[i10, i01] = r[i10, i01] * j
    out[i01, i00] = r[i01, i00] + r[i11, i10] * (1 - p)
    out[i10, i00] = r[i10, i00] * j
    lower = np.tril_indices(4, -1)
    out[lower[1], lower[0]] = out[lower].conj()
    return out


# ---------------------------------------------------------------------------
# Whole trajectories, Choi matrices, intermediate maps
# ---------------------------------------------------------------------------

def evolve_joint(traj: ChannelTrajectory, rho0):
    """States (Omega_a(t) (x) I_b) rho0 for every grid time, shape (N, 4, 4)."""
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (4, 4):
        raise InvalidInputError(f"expected a 4x4 initial state, got {rho0.shape}")
    r = rho0.reshape(2, 2, 2, 2)
    n = len(traj)
    out = np.empty((n, 2, 2, 2, 2), dtype=complex)
    if traj.kind == "dephasing":
        g = traj.Gamma
        out[:] = r
        out[:, 0, :, 1, :] *= g[:, None, None]
        out[:, 1, :, 0, :] *= g[:, None, None]
    else:
        j = traj.J
        p = np.abs(j) ** 2
        out[:, 0, :, 0, :] = r[0, :, 0, :] + (1 - p)[:, None, None] * r[1, :, 1, :]
        out[:, 1, :, 1, :] = p[:, None, None] * r[1, :, 1, :]
        out[:, 1, :, 0, :] = j[:, None, None] * r[1, :, 0, :]
        out[:, 0, :, 1, :] = j.conj()[:, None, None] * r[0, :, 1, :]
    return out.reshape(n, 4, 4)


def evolve_system(traj: ChannelTrajectory, rho_a):
    """Qubit states Omega(t) rho_a for every grid time, shape (N, 2, 2)."""
    rho_a = np.asarray(rho_a, dtype=complex)
    if rho_a.shape != (2, 2):
        raise InvalidInputError(f"expected a 2x2 state, got {rho_a.shape}")
    n = len(traj)
    out = np.broadcast_to(rho_a, (n, 2, 2)).copy()
    if traj.kind == "dephasing":
        out[:, 0, 1] *= traj.Gamma
        out[:, 1, 0] *= traj.Gamma
    else:
        p = np.abs(traj.J) ** 2
        out[:, 0, 0] = rho_a[0, 0] + (1 - p) * rho_a[1, 1]
        out[:, 1, 1] = p * rho_a[1, 1]
        out[:, 1, 0] = traj.J * rho_a[1, 0]
        out[:, 0, 1] = traj.J.conj() * rho_a[0, 1]
    return out


def _linear_action(desc: MapDescriptor, basis_op):
    """Action of the (possibly non-CP) map on a single-qubit operator."""
    x = np.asarray(basis_op, dtype=complex)
    v = complex(desc.value)
    if desc.kind == "dephasing":
        return np.array([[x[0, 0], v * x[0, 1]], [v * x[1, 0], x[1, 1]]])
    p = abs(v) ** 2
    return np.array([[x[0, 0] + (1 - p) * x[1, 1], v.conjugate() * x[0, 1]],
                     [v * x[1, 0], p * x[1, 1]]])


def choi_matrix(desc: MapDescriptor):
    """(Omega (x) I)|Phi><Phi| with |Phi> = (|00> + |11>)/sqrt(2); unit trace for TP maps."""
    out = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for k in range(2):
            e = np.zeros((2, 2), dtype=complex)
            e[i, k] = 1.0
            out += 0.5 * np.kron(_linear_action(desc, e), e)
    return out


def intermediate_map(traj: ChannelTrajectory, i: int, j: int) -> MapDescriptor:
    """Map taking the state at t_i to the state at t_j (both channels are commutative families)."""
    if not 0 <= i <= j < len(traj):
        raise InvalidInputError(f"need 0 <= i <= j < {len(traj)}, got i={i}, j={j}")
    if i == j:
        return MapDescriptor(traj.kind, 1.0)
    if traj.kind == "dephasing" and traj.log_Gamma is not None:
        return MapDescriptor(traj.kind, math.exp(traj.log_Gamma[j] - traj.log_Gamma[i]))
    base = traj.values[i]
    if abs(base) < SINGULAR_TOL:
        raise SingularMapError(f"channel parameter vanishes at index {i}", index=i)
    return MapDescriptor(traj.kind, traj.values[j] / base)
