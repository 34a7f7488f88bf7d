"""Non-Markovianity measures built on the backflow of a monitored quantity."""
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .channels import (ChannelTrajectory, OhmicSpectralDensity, choi_matrix, dephasing_factor,
                       evolve_joint, evolve_system, intermediate_map, ohmic_negative_windows,
                       ohmic_rate)
from .errors import InvalidInputError, SingularMapError
from .numerics import adaptive_quad, hermitian_eig_batch, sampled_derivative, trace_norm
from .qip import CONVENTIONS, qip_batch
from .states import bell_phi, mutual_information_batch, pure_schmidt, werner

RHP_TOL = 1e-10


@dataclass
class MeasureReport:
    measure: str
    value: float
    intervals: List[Tuple[float, float]]
    times: np.ndarray
    samples: np.ndarray
    derivative: Optional[np.ndarray] = None
    convention: Optional[str] = None
    initial_state: str = ""
    extra: dict = field(default_factory=dict)

    def monitored_at(self, t):
        """Cubic Hermite interpolant of the monitored samples (uses the sampled derivative)."""
        return _hermite(self.times, self.samples, self.derivative, t)

    def to_dict(self):
        t = self.times
        doc = {
            "measure": self.measure,
            "value": float(self.value),
            "convention": self.convention,
            "initial_state": self.initial_state,
            "intervals": [[float(a), float(b)] for a, b in self.intervals],
            "grid": {"t_start": float(t[0]), "t_end": float(t[-1]), "points": int(t.size)},
        }
        doc.update(self.extra)
        return doc


def _hermite(times, values, slopes, t):
    t = float(t)
    k = int(np.clip(np.searchsorted(times, t, side="right") - 1, 0, times.size - 2))
    h = times[k + 1] - times[k]
    s = (t - times[k]) / h
    h00 = 2 * s ** 3 - 3 * s ** 2 + 1
    h10 = s ** 3 - 2 * s ** 2 + s
    h01 = -2 * s ** 3 + 3 * s ** 2
    h11 = s ** 3 - s ** 2
    return float(h00 * values[k] + h10 * h * slopes[k] + h01 * values[k + 1] + h11 * h * slopes[k + 1])


def _positive_windows(times, d):
    """Maximal windows where d > 0, edges placed at the linearly interpolated zero crossing."""
    pos = d > 0
    windows = []
    n = times.size
    i = 0
    while i < n:
        if not pos[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and pos[j + 1]:
            j += 1
        if i == 0:
            start = times[0]
        else:
            start = times[i - 1] + (times[i] - times[i - 1]) * d[i - 1] / (d[i - 1] - d[i])
        if j == n - 1:
            stop = times[-1]
        else:
            stop = times[j] + (times[j + 1] - times[j]) * d[j] / (d[j] - d[j + 1])
        windows.append((float(start), float(stop)))
        i = j + 1
    return windows


def backflow_measure(times, q_samples, measure="qip", convention=None, initial_state=""):
    """Total increase of a monitored quantity over the windows where its derivative is positive."""
    times = np.asarray(times, dtype=float)
    q = np.asarray(q_samples, dtype=float)
    d = sampled_derivative(times, q)
    report = MeasureReport(measure, 0.0, _positive_windows(times, d), times, q, d,
                           convention=convention, initial_state=initial_state)
    report.value = float(sum(max(0.0, report.monitored_at(b) - report.monitored_at(a))
                             for a, b in report.intervals))
    return report


def qip_flow(traj: ChannelTrajectory, rho0, convention="sqrt"):
    if convention not in CONVENTIONS:
        raise InvalidInputError(f"convention must be one of {CONVENTIONS}, got {convention!r}")
    return qip_batch(evolve_joint(traj, rho0), convention)


def n_q(traj: ChannelTrajectory, rho0, convention="sqrt", label="custom"):
    return backflow_measure(traj.times, qip_flow(traj, rho0, convention), "qip", convention, label)


def n_q_dephasing_analytic(sd: OhmicSpectralDensity, t_max: float, tol: float = 1e-10) -> float:
    """-2 * integral of Gamma(t) gamma(t) over the windows where gamma < 0, by nested quadrature."""
    total = 0.0
    for a, b in ohmic_negative_windows(sd, t_max):
        g_a = dephasing_factor(sd, a, tol)

        def integrand(t, a=a, g_a=g_a):
            inner = adaptive_quad(lambda s: ohmic_rate(sd, s), a, t, tol) if t > a else 0.0
            return -2.0 * g_a * math.exp(-2.0 * inner) * ohmic_rate(sd, t)

        total += adaptive_quad(integrand, a, b, tol)
    return total


def default_blp_pair(kind):
    if kind == "dephasing":
        plus = np.full((2, 2), 0.5, dtype=complex)
        minus = np.array([[0.5, -0.5], [-0.5, 0.5]], dtype=complex)
        return plus, minus
    return np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex)


def n_blp(traj: ChannelTrajectory, pair=None):
    rho1, rho2 = pair if pair is not None else default_blp_pair(traj.kind)
    diff = evolve_system(traj, rho1) - evolve_system(traj, rho2)
    eigs, _ = hermitian_eig_batch(diff)
    dist = 0.5 * np.abs(eigs).sum(axis=1)
    return backflow_measure(traj.times, dist, "blp", initial_state="pair")


def n_mutual(traj: ChannelTrajectory, rho0, label="custom"):
    info = mutual_information_batch(evolve_joint(traj, rho0))
    return backflow_measure(traj.times, info, "mutual", initial_state=label)


def n_rhp(traj: ChannelTrajectory):
    """Divisibility measure from one-step intermediate maps.

    g_i = (||Choi(Omega(t_{i+1}, t_i))||_1 - 1) / dt_i; the value sums g_i dt_i
    over steps with g_i above RHP_TOL.  Steps starting from a vanishing channel
    parameter are skipped and listed in ``extra['skipped']``.
    """
    times = traj.times
    n = times.size
    g = np.zeros(n - 1)
    skipped = []
    for i in range(n - 1):
        try:
            desc = intermediate_map(traj, i, i + 1)
        except SingularMapError:
            skipped.append(i)
            continue
        g[i] = (trace_norm(choi_matrix(desc)) - 1.0) / (times[i + 1] - times[i])
    dt = np.diff(times)
    flagged = g > RHP_TOL
    value = float(np.sum(g[flagged] * dt[flagged]))
    intervals = []
    i = 0
    while i < n - 1:
        if flagged[i]:
            j = i
            while j + 1 < n - 1 and flagged[j + 1]:
                j += 1
            intervals.append((float(times[i]), float(times[j + 1])))
            i = j + 1
        else:
            i += 1
    extra = {"skipped": [[float(times[k]), float(times[k + 1])] for k in skipped],
             "step": float(np.max(dt))}
    return MeasureReport("rhp", value, intervals, times[:-1], g, extra=extra)


@dataclass(frozen=True)
class InitialStateFamily:
    kind: str
    grid: Tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("bell", "werner_grid", "pure_grid"):
            raise InvalidInputError(f"unknown initial-state family {self.kind!r}")
        if self.kind == "werner_grid":
            grid = self.grid or tuple(np.linspace(0.0, 1.0, 21))
            if any(not 0.0 <= r <= 1.0 for r in grid):
                raise InvalidInputError("Werner parameters must lie in [0, 1]")
        elif self.kind == "pure_grid":
            grid = self.grid or tuple(np.linspace(0.0, np.pi / 4, 64))
        else:
            grid = ()
        object.__setattr__(self, "grid", tuple(float(x) for x in grid))

    def members(self):
        if self.kind == "bell":
            yield "bell", bell_phi()
        elif self.kind == "werner_grid":
            for r in self.grid:
                yield f"werner(r={r:.6g})", werner(r)
        else:
            for theta in self.grid:
                yield f"pure(theta={theta:.6g})", pure_schmidt(theta)


def optimize_initial_state(traj: ChannelTrajectory, family: InitialStateFamily, convention="sqrt"):
    """Best QIP backflow over a finite family of inputs (a lower bound on the optimum)."""
    best = None
    for label, rho0 in family.members():
        rep = n_q(traj, rho0, convention, label)
        if best is None or rep.value > best.value:
            best = rep
    best.extra["family"] = family.kind
    best.extra["lower_bound"] = True
    return best
