import math

import numpy as np
import pytest

from kneepkm import (
    ExerciseKind,
    Pose,
    check_feasibility,
    gen_cpm_flexion,
    gen_gait,
    gen_lachman,
    gen_pivot_shift,
    ik,
    jacobian,
)
from kneepkm.errors import InvalidParams
from kneepkm.exercises import ExerciseTrajectory, Sample
from kneepkm.workspace import CellCode, evaluate_pose


def interior_rate_error(geom, traj, pose_rate):
    """Max deviation of finite-difference actuator rates from J times the exact pose rate."""
    rep = check_feasibility(geom, traj)
    err = 0.0
    for i in range(1, len(traj.samples) - 1):
        s = traj.samples[i]
        exact = jacobian(geom, s.pose).J @ pose_rate(s.t)
        err = max(err, np.max(np.abs(rep.samples[i].q_rate - exact)))
    return err


def gait_rate(A_x=0.15, A_z=0.10, th=math.radians(10), T=2.0):
    w = 2 * math.pi / T
    return lambda t: np.array([A_x * w * math.cos(w * t), 0.5 * A_z * w * math.sin(w * t),
                               th * w * math.cos(w * t), 0.0])


def test_gait_defaults_endpoints():
    tr = gen_gait()
    assert tr.kind is ExerciseKind.GAIT and len(tr.samples) == 101
    np.testing.assert_allclose(tr.samples[0].pose.as_array(), [0, 0.95, 0, 0], atol=1e-15)
    mid = tr.samples[50]
    assert mid.t == 1.0
    np.testing.assert_allclose(mid.pose.as_array(), [0, 1.05, 0, 0], atol=1e-15)


def test_gait_closed_form_every_sample():
    tr = gen_gait(z0=0.9, A_x=0.1, A_z=0.2, theta_amp=0.3, period=3.0, n_samples=37)
    w = 2 * math.pi / 3.0
    for s in tr.samples:
        np.testing.assert_allclose(
            s.pose.as_array(),
            [0.1 * math.sin(w * s.t), 0.9 + 0.1 * (1 - math.cos(w * s.t)),
             0.3 * math.sin(w * s.t), 0.0], atol=1e-15)


def test_gait_zero_amplitude_constant():
    tr = gen_gait(A_x=0, A_z=0, theta_amp=0)
    for s in tr.samples:
        assert s.pose.as_array().tolist() == [0, 0.95, 0, 0]


def test_gait_defaults_feasible_on_g0(g0):
    rep = check_feasibility(g0, gen_gait())
    assert rep.all_feasible
    assert rep.first_infeasible_index is None


def test_wide_gait_infeasible(g0):
    rep = check_feasibility(g0, gen_gait(A_x=0.5))
    assert not rep.all_feasible
    assert rep.first_infeasible_index is not None
    first = rep.samples[rep.first_infeasible_index]
    assert not (first.feasible and first.rate_ok)
    assert rep.max_abs_q_rate > rep.rate_limit


def test_gait_beyond_reach_reports_codes(g0, g1):
    rep = check_feasibility(g1, gen_gait(A_x=0.5))
    codes = {s.code for s in rep.samples} - {None}
    assert CellCode.UNREACHABLE in codes
    rep = check_feasibility(g0, gen_gait(z0=1.1, A_z=0.2, A_x=0.3))
    codes = {s.code for s in rep.samples} - {None}
    assert codes & {CellCode.STROKE_OVER, CellCode.STROKE_UNDER}
    assert not rep.all_feasible


def test_lachman_amplitude_and_feasibility(g0):
    tr = gen_lachman(z0=1.0, theta_fix=math.radians(10), amplitude=0.03, cycles=5)
    xs = tr.pose_array()[:, 0]
    assert math.isclose(np.max(np.abs(xs)), 0.03, rel_tol=1e-12)
    assert np.all(tr.pose_array()[:, 1] == 1.0)
    assert np.all(tr.pose_array()[:, 2] == math.radians(10))
    assert check_feasibility(g0, tr).all_feasible


@pytest.mark.parametrize("amp", [0.08, 0.0, -0.01])
def test_lachman_guard(amp):
    with pytest.raises(InvalidParams):
        gen_lachman(amplitude=amp)


def test_lachman_rates_track_jacobian(g0):
    tr = gen_lachman()
    w = 2 * math.pi * 5 / 5.0
    rate = lambda t: np.array([0.03 * w * math.cos(w * t), 0, 0, 0])  # noqa: E731
    rep = check_feasibility(g0, tr)
    peak = max(np.max(np.abs(jacobian(g0, s.pose).J @ rate(s.t))) for s in tr.samples[1:-1])
    assert interior_rate_error(g0, tr, rate) <= 0.02 * peak
    assert abs(rep.max_abs_q_rate - peak) <= 0.02 * peak


def test_pivot_shift_pure_rotation_central_constant(g0):
    tr = gen_pivot_shift(psi_amp=math.radians(15), x_couple=0.0, z0=1.0)
    rep = check_feasibility(g0, tr)
    assert all(s.q[0] == 1.0 for s in rep.samples)


def test_pivot_shift_amplitudes_and_feasible(g0):
    tr = gen_pivot_shift(psi_amp=math.radians(15), x_couple=0.02, z0=1.0)
    arr = tr.pose_array()
    assert math.isclose(np.max(np.abs(arr[:, 0])), 0.02, rel_tol=1e-12)
    assert math.isclose(np.max(np.abs(arr[:, 3])), math.radians(15), rel_tol=1e-12)
    # in-phase coupling
    np.testing.assert_allclose(arr[:, 0] / 0.02, arr[:, 3] / math.radians(15), atol=1e-15)
    assert check_feasibility(g0, tr).all_feasible


@pytest.mark.parametrize("psi", [0.0, math.radians(31)])
def test_pivot_shift_guard(psi):
    with pytest.raises(InvalidParams):
        gen_pivot_shift(psi_amp=psi)


def test_cpm_triangle():
    tr = gen_cpm_flexion(n_samples=91)
    th = tr.pose_array()[:, 2]
    assert th[0] == 0.0 and th[-1] == 0.0
    assert math.isclose(th[45], math.radians(45), rel_tol=1e-15)
    assert np.all(np.diff(th[:46]) > 0) and np.all(np.diff(th[45:]) < 0)


def test_cpm_guard():
    with pytest.raises(InvalidParams):
        gen_cpm_flexion(theta_min=0.5, theta_max=0.5)


def test_cpm_report_matches_per_pose_ik(g0):
    tr = gen_cpm_flexion(z0=0.95)
    rep = check_feasibility(g0, tr)
    assert math.isfinite(rep.max_kappa)
    for s, chk in zip(tr.samples, rep.samples):
        sol = ik(g0, s.pose)
        assert [(v.limb_id, v.kind) for v in chk.violations] == \
               [(v.limb_id, v.kind) for v in sol.violations]
        np.testing.assert_array_equal(chk.q, sol.q)


def test_stationary_trajectory(g0):
    home = Pose(0, 1.0, 0, 0)
    tr = ExerciseTrajectory(ExerciseKind.GAIT, tuple(Sample(t, home) for t in (0.0, 0.5, 1.0)), 1.0)
    rep = check_feasibility(g0, tr)
    assert rep.all_feasible
    assert rep.max_abs_q_rate <= 1e-12


def test_report_equals_pointwise_evaluation(g0):
    tr = gen_gait(n_samples=31)
    rep = check_feasibility(g0, tr)
    for s, chk in zip(tr.samples, rep.samples):
        ref = evaluate_pose(g0, s.pose)
        assert chk.feasible == ref.feasible and chk.code == ref.code
        assert chk.kappa == ref.kappa


def test_doubling_samples_keeps_verdicts(g0):
    for gen in (lambda n: gen_gait(A_x=0.45, n_samples=n), lambda n: gen_cpm_flexion(n_samples=n),
                lambda n: gen_lachman(n_samples=n)):
        a = check_feasibility(g0, gen(51))
        b = check_feasibility(g0, gen(101))
        for i, chk in enumerate(a.samples):
            assert b.samples[2 * i].t == pytest.approx(chk.t, abs=1e-12)
            assert b.samples[2 * i].feasible == chk.feasible


def test_rate_error_is_second_order(g0):
    # halving the sample spacing divides the central-difference error by four
    e1 = interior_rate_error(g0, gen_gait(n_samples=101), gait_rate())
    e2 = interior_rate_error(g0, gen_gait(n_samples=201), gait_rate())
    assert 3.6 <= e1 / e2 <= 4.4


def test_trajectory_invariants():
    home = Pose(0, 1.0, 0, 0)
    with pytest.raises(InvalidParams):
        ExerciseTrajectory(ExerciseKind.GAIT, (Sample(0.0, home),), 1.0)
    with pytest.raises(InvalidParams):
        ExerciseTrajectory(ExerciseKind.GAIT, (Sample(0.0, home), Sample(0.0, home)), 1.0)
    with pytest.raises(InvalidParams):
        gen_gait(n_samples=1)
    with pytest.raises(InvalidParams):
        gen_gait(period=0)
    with pytest.raises(InvalidParams):
        gen_gait(z0=-0.5, A_z=0.1)
