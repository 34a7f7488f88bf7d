import numpy as np
import pytest
from scipy import integrate

from qipflow.channels import (ChannelTrajectory, LorentzianSpectralDensity, OhmicSpectralDensity,
                              damping_trajectory, dephasing_trajectory, ohmic_negative_windows)
from qipflow.errors import InvalidInputError
from qipflow.states import bell_phi, werner
from qipflow.witnesses import (InitialStateFamily, backflow_measure, default_blp_pair, n_blp,
                               n_mutual, n_q, n_q_dephasing_analytic, n_rhp,
                               optimize_initial_state, qip_flow)

T_DEPH = np.linspace(0, 50, 4001)
T_DAMP = np.linspace(0, 60, 6001)


def dephasing(s, t=T_DEPH, alpha=0.5):
    return dephasing_trajectory(OhmicSpectralDensity(alpha, 1.0, s), t)


def damping(ratio, delta=0.01, t=T_DAMP):
    return damping_trajectory(LorentzianSpectralDensity(1.0, ratio, delta), t)


def check_report(rep):
    assert rep.value >= 0
    t0, t1 = rep.times[0], rep.times[-1]
    flat = [x for iv in rep.intervals for x in iv]
    assert all(t0 <= x <= t1 for x in flat)
    assert all(a < b for a, b in rep.intervals)
    assert all(flat[k] <= flat[k + 1] for k in range(len(flat) - 1))
    if rep.derivative is not None:
        total = sum(rep.monitored_at(b) - rep.monitored_at(a) for a, b in rep.intervals)
        assert abs(total - rep.value) < 1e-6


class TestBackflowMeasure:
    def test_monotone(self):
        t = np.linspace(0, 5, 101)
        rep = backflow_measure(t, np.exp(-t))
        assert rep.value == 0 and rep.intervals == []

    def test_abs_cos(self):
        t = np.linspace(0, np.pi, 1000)
        rep = backflow_measure(t, np.abs(np.cos(t)))
        assert len(rep.intervals) == 1
        assert rep.intervals[0][0] == pytest.approx(np.pi / 2, abs=t[1])
        assert rep.value == pytest.approx(1.0, abs=2e-3)
        check_report(rep)

    def test_two_revivals_against_integral(self):
        # D > 0 windows of sin(t) + t/10 integrate D exactly to the endpoint differences
        t = np.linspace(0, 15, 3001)
        q = np.sin(t) + 0.1 * t
        rep = backflow_measure(t, q)
        exact = 0.0
        for a, b in rep.intervals:
            exact += integrate.quad(lambda x: max(0.0, np.cos(x) + 0.1), a, b)[0]
        assert rep.value == pytest.approx(exact, abs=1e-5)
        assert len(rep.intervals) == 3
        check_report(rep)

    def test_grid_too_short(self):
        with pytest.raises(InvalidInputError):
            backflow_measure([0, 1], [0, 1])

    def test_serialization(self):
        t = np.linspace(0, np.pi, 101)
        doc = backflow_measure(t, np.abs(np.cos(t)), convention="sqrt", initial_state="bell").to_dict()
        assert set(doc) >= {"measure", "value", "convention", "initial_state", "intervals", "grid"}
        assert doc["grid"] == {"t_start": 0.0, "t_end": float(np.pi), "points": 101}


class TestQipFlow:
    def test_bell_dephasing(self):
        traj = dephasing(3.0)
        np.testing.assert_allclose(qip_flow(traj, bell_phi(), "sqrt"), traj.Gamma, atol=1e-9)

    @pytest.mark.parametrize("ratio", [10, 0.5, 0.1])
    def test_werner_damping(self, ratio):
        traj = damping(ratio)
        np.testing.assert_allclose(qip_flow(traj, werner(1.0), "sqrt"), np.abs(traj.J), atol=1e-8)

    def test_mixed_input(self):
        for traj in (dephasing(3.0, np.linspace(0, 10, 101)), damping(0.1, t=np.linspace(0, 10, 101))):
            np.testing.assert_allclose(qip_flow(traj, np.eye(4) / 4), 0.0, atol=1e-14)

    def test_bad_convention(self):
        with pytest.raises(InvalidInputError):
            qip_flow(dephasing(1.0, np.linspace(0, 1, 5)), bell_phi(), "half")


class TestDephasingMeasures:
    def test_analytic_divisible(self):
        assert n_q_dephasing_analytic(OhmicSpectralDensity(0.5, 1.0, 1.5), 50.0) == 0.0

    def test_analytic_positive(self):
        assert n_q_dephasing_analytic(OhmicSpectralDensity(0.5, 1.0, 3.0), 50.0) > 0

    def test_analytic_against_trajectory_integral(self):
        # -2 int Gamma gamma over gamma < 0 evaluated with scipy on the sampled Gamma
        sd = OhmicSpectralDensity(0.5, 1.0, 3.0)
        t = np.linspace(0, 50, 20001)
        traj = dephasing_trajectory(sd, t)
        integrand = np.where(traj.gamma < 0, -2 * traj.Gamma * traj.gamma, 0.0)
        oracle = integrate.simpson(integrand, x=t)
        assert n_q_dephasing_analytic(sd, 50.0) == pytest.approx(oracle, abs=1e-6)

    @pytest.mark.parametrize("s", [2.5, 3.0, 4.0])
    def test_grid_matches_analytic(self, s):
        rep = n_q(dephasing(s), bell_phi(), "sqrt", "bell")
        assert rep.value == pytest.approx(n_q_dephasing_analytic(OhmicSpectralDensity(0.5, 1.0, s), 50.0),
                                          abs=1e-4)
        check_report(rep)

    @pytest.mark.parametrize("s", [2.5, 3.0, 4.0])
    def test_blp_equality(self, s):
        traj = dephasing(s)
        assert abs(n_q(traj, bell_phi(), "sqrt").value - n_blp(traj).value) < 1e-6

    def test_blp_distance_is_gamma(self):
        traj = dephasing(3.0)
        rep = n_blp(traj)
        np.testing.assert_allclose(rep.samples, traj.Gamma, atol=1e-12)

    def test_intervals_follow_negative_rate(self):
        sd = OhmicSpectralDensity(0.5, 1.0, 3.0)
        rep = n_q(dephasing_trajectory(sd, T_DEPH), bell_phi(), "sqrt")
        windows = ohmic_negative_windows(sd, 50.0)
        assert len(rep.intervals) == len(windows)
        h = T_DEPH[1]
        for (a, b), (c, d) in zip(rep.intervals, windows):
            assert abs(a - c) < h and abs(b - d) < h

    @pytest.mark.parametrize("s", [1.0, 2.0])
    def test_markovian_nulls(self, s):
        traj = dephasing(s)
        assert n_q(traj, bell_phi()).value <= 1e-8
        assert n_blp(traj).value <= 1e-8
        assert n_mutual(traj, bell_phi()).value <= 1e-8
        assert n_rhp(traj).value <= 1e-8

    def test_mutual_positive_in_nonmarkovian_regime(self):
        rep = n_mutual(dephasing(3.0), bell_phi())
        assert rep.value > 0
        check_report(rep)

    def test_convention_covariance(self):
        for s in (2.5, 3.0, 4.0):
            traj = dephasing(s)
            a = n_q(traj, bell_phi(), "eq4").intervals
            b = n_q(traj, bell_phi(), "sqrt").intervals
            assert len(a) == len(b)
            h = T_DEPH[1]
            for (a0, a1), (b0, b1) in zip(a, b):
                assert abs(a0 - b0) <= h and abs(a1 - b1) <= h


class TestRhp:
    def test_single_step(self):
        traj = ChannelTrajectory(np.array([0.0, 0.5, 1.0]), "dephasing", Gamma=np.array([1.0, 0.5, 0.6]))
        rep = n_rhp(traj)
        assert rep.value == pytest.approx(0.2, abs=1e-9)
        assert rep.intervals == [(0.5, 1.0)]
        assert rep.extra["step"] == 0.5

    def test_markovian(self):
        assert n_rhp(dephasing(1.0)).value == 0.0

    def test_increasing_in_s(self):
        vals = [n_rhp(dephasing(s)).value for s in (2.5, 3, 4, 5, 6)]
        assert np.all(np.diff(vals) > 0)

    def test_matches_log_growth(self):
        # each step contributes ratio - 1 where Gamma grows
        traj = dephasing(3.0)
        ratio = np.exp(np.diff(traj.log_Gamma))
        expected = np.sum(np.where(ratio - 1 > 1e-10 * np.diff(traj.times), ratio - 1, 0.0))
        assert n_rhp(traj).value == pytest.approx(expected, rel=1e-9)

    def test_singular_steps_recorded(self):
        traj = ChannelTrajectory(np.array([0.0, 1.0, 2.0, 3.0]), "damping",
                                 J=np.array([1.0, 0.0, 0.5, 0.4]))
        rep = n_rhp(traj)
        assert rep.extra["skipped"] == [[1.0, 2.0]]
        assert rep.value == 0.0


class TestDampingMeasures:
    def test_markovian(self):
        traj = damping(10)
        assert n_q(traj, werner(1.0)).value <= 1e-8
        assert n_blp(traj).value <= 1e-8
        assert n_mutual(traj, werner(1.0)).value <= 1e-8
        assert n_rhp(traj).value <= 1e-8

    def test_blp_strong_coupling(self):
        traj = damping(0.1)
        rep = n_blp(traj)
        np.testing.assert_allclose(rep.samples, np.abs(traj.J) ** 2, atol=1e-12)
        assert rep.value > 0

    def test_default_pairs(self):
        plus, minus = default_blp_pair("dephasing")
        assert np.trace(plus @ minus).real == pytest.approx(0.0)
        zero, one = default_blp_pair("damping")
        assert zero[0, 0] == 1 and one[1, 1] == 1


class TestFamilies:
    def test_grids(self):
        assert len(InitialStateFamily("werner_grid").grid) == 21
        assert len(InitialStateFamily("pure_grid").grid) == 64
        assert list(InitialStateFamily("bell").members())[0][0] == "bell"

    def test_invalid(self):
        with pytest.raises(InvalidInputError):
            InitialStateFamily("ghz")
        with pytest.raises(InvalidInputError):
            InitialStateFamily("werner_grid", (0.5, 1.5))

    def test_markovian_zero(self):
        rep = optimize_initial_state(dephasing(1.0), InitialStateFamily("werner_grid"))
        assert rep.value == 0.0
        assert rep.extra["lower_bound"] is True

    def test_werner_best_at_one(self):
        traj = damping(0.1)
        fam = InitialStateFamily("werner_grid", tuple(np.linspace(0, 1, 11)))
        rep = optimize_initial_state(traj, fam)
        values = [n_q(traj, werner(r)).value for r in fam.grid]
        assert int(np.argmax(values)) == 10
        assert rep.initial_state == "werner(r=1)"
        assert rep.value == max(values)

    def test_bell_family_reproduces_fixed_input(self):
        traj = dephasing(3.0)
        assert optimize_initial_state(traj, InitialStateFamily("bell")).value == \
            n_q(traj, bell_phi(), "sqrt").value
