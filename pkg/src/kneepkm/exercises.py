"""Rehabilitation and diagnosis exercise trajectories and their feasibility."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from kneepkm.errors import InvalidParams
from kneepkm.geometry import MechanismGeometry, Pose
from kneepkm.kinematics import EPS_SING
from kneepkm.workspace import MARGIN_MIN, CellCode, evaluate_pose

RATE_LIMIT = 0.5  # m/s
LACHMAN_MAX_AMPLITUDE = 0.05  # m
PIVOT_MAX_PSI = math.radians(30.0)
# platform pitch per unit of knee flexion
FLEXION_TO_PITCH = 0.5


class ExerciseKind(str, enum.Enum):
    GAIT = "GAIT"
    LACHMAN = "LACHMAN"
    PIVOT_SHIFT = "PIVOT_SHIFT"
    CPM_FLEXION = "CPM_FLEXION"


@dataclass(frozen=True)
class Sample:
    t: float
    pose: Pose


@dataclass(frozen=True)
class ExerciseTrajectory:
    kind: ExerciseKind
    samples: tuple
    period: float

    def __post_init__(self):
        if len(self.samples) < 2:
            raise InvalidParams("a trajectory needs at least 2 samples")
        ts = [s.t for s in self.samples]
        if ts[0] != 0.0 or any(b <= a for a, b in zip(ts, ts[1:])):
            raise InvalidParams("sample times must start at 0 and strictly increase")

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    def pose_array(self) -> np.ndarray:
        """Poses as an (n, 4) array of ``(x, z, theta, psi)``."""
        return np.array([s.pose.as_array() for s in self.samples])


def _check_common(period, n_samples):
    if not (isinstance(n_samples, (int, np.integer)) and n_samples >= 2):
        raise InvalidParams(f"n_samples must be an integer >= 2, got {n_samples!r}")
    if not (math.isfinite(period) and period > 0):
        raise InvalidParams(f"period must be positive, got {period}")


def _build(kind, period, t, x, z, theta, psi) -> ExerciseTrajectory:
    try:
        samples = tuple(
            Sample(float(ti), Pose(float(a), float(b), float(c), float(d)))
            for ti, a, b, c, d in zip(t, x, z, theta, psi)
        )
    except ValueError as exc:
        raise InvalidParams(str(exc)) from exc
    return ExerciseTrajectory(kind, samples, float(period))


def gen_gait(z0: float = 0.95, A_x: float = 0.15, A_z: float = 0.10,
             theta_amp: float = math.radians(10.0), period: float = 2.0,
             n_samples: int = 101) -> ExerciseTrajectory:
    """Closed sagittal loop imitating the foot path during walking.

    ``x = A_x sin(wt)``, ``z = z0 + (A_z/2)(1 - cos(wt))``,
    ``theta = theta_amp sin(wt)``, ``psi = 0``.
    """
    _check_common(period, n_samples)
    if min(A_x, A_z, theta_amp) < 0:
        raise InvalidParams("gait amplitudes must be non-negative")
    t = np.linspace(0.0, period, n_samples)
    w = 2 * math.pi / period
    return _build(
        ExerciseKind.GAIT, period, t,
        A_x * np.sin(w * t),
        z0 + 0.5 * A_z * (1 - np.cos(w * t)),
        theta_amp * np.sin(w * t),
        np.zeros_like(t),
    )


def gen_lachman(z0: float = 1.0, theta_fix: float = math.radians(10.0),
                amplitude: float = 0.03, cycles: int = 5, n_samples: int = 201,
                period: float = 5.0) -> ExerciseTrajectory:
    """Anterior-posterior shuttling at a fixed pitch."""
    _check_common(period, n_samples)
    if not 0 < amplitude <= LACHMAN_MAX_AMPLITUDE:
        raise InvalidParams(
            f"Lachman amplitude must lie in (0, {LACHMAN_MAX_AMPLITUDE}] m, got {amplitude}"
        )
    if cycles < 1:
        raise InvalidParams("cycles must be >= 1")
    t = np.linspace(0.0, period, n_samples)
    ph = 2 * math.pi * cycles * t / period
    return _build(ExerciseKind.LACHMAN, period, t, amplitude * np.sin(ph),
                  np.full_like(t, z0), np.full_like(t, theta_fix), np.zeros_like(t))


def gen_pivot_shift(z0: float = 1.0, psi_amp: float = math.radians(15.0),
                    x_couple: float = 0.02, cycles: int = 3, n_samples: int = 181,
                    period: float = 6.0) -> ExerciseTrajectory:
    """Axial rotation coupled in phase with anterior translation."""
    _check_common(period, n_samples)
    if not 0 < psi_amp <= PIVOT_MAX_PSI:
        raise InvalidParams(f"psi_amp must lie in (0, 30] degrees, got {math.degrees(psi_amp)}")
    if x_couple < 0:
        raise InvalidParams("x_couple must be non-negative")
    if cycles < 1:
        raise InvalidParams("cycles must be >= 1")
    t = np.linspace(0.0, period, n_samples)
    s = np.sin(2 * math.pi * cycles * t / period)
    return _build(ExerciseKind.PIVOT_SHIFT, period, t, x_couple * s,
                  np.full_like(t, z0), np.zeros_like(t), psi_amp * s)


def gen_cpm_flexion(z0: float = 0.95, theta_min: float = 0.0,
                    theta_max: float = FLEXION_TO_PITCH * math.radians(90.0),
                    period: float = 20.0, n_samples: int = 91) -> ExerciseTrajectory:
    """Continuous passive motion: pitch ramps min -> max -> min (triangle wave).

    The default pitch range is half of a 0-90 degree knee flexion.
    """
    _check_common(period, n_samples)
    if not theta_min < theta_max:
        raise InvalidParams("theta_min must be strictly below theta_max")
    t = np.linspace(0.0, period, n_samples)
    tri = 1.0 - np.abs(1.0 - 2.0 * t / period)
    return _build(ExerciseKind.CPM_FLEXION, period, t, np.zeros_like(t), np.full_like(t, z0),
                  theta_min + (theta_max - theta_min) * tri, np.zeros_like(t))


@dataclass(frozen=True, eq=False)
class SampleCheck:
    """Per-sample verdict.

    ``feasible`` is the pose-level verdict (limits and conditioning);
    ``rate_ok`` reports the actuator rate limit separately.
    """

    t: float
    feasible: bool
    rate_ok: bool
    code: Optional[CellCode]
    violations: tuple
    kappa: Optional[float]
    q: Optional[np.ndarray]
    q_rate: np.ndarray


@dataclass(frozen=True, eq=False)
class FeasibilityReport:
    samples: tuple
    all_feasible: bool
    max_kappa: float
    max_abs_q_rate: float
    first_infeasible_index: Optional[int]
    rate_limit: float


def check_feasibility(geom: MechanismGeometry, traj: ExerciseTrajectory,
                      rate_limit: float = RATE_LIMIT, margin_min: float = MARGIN_MIN,
                      eps_sing: float = EPS_SING) -> FeasibilityReport:
    """Evaluate every sample independently, then finite-difference the actuators.

    Actuator rates use second-order central differences inside the
    trajectory and one-sided differences at both ends.  Samples next to an
    unreachable one get NaN rates, which are excluded from the maximum.
    """
    checks = [evaluate_pose(geom, s.pose, margin_min, eps_sing) for s in traj.samples]
    t = traj.times
    q = np.array([c.q if c.q is not None else np.full(4, np.nan) for c in checks])
    q_rate = np.gradient(q, t, axis=0, edge_order=1)

    finite_rates = np.abs(q_rate[np.all(np.isfinite(q_rate), axis=1)])
    max_rate = float(finite_rates.max()) if finite_rates.size else math.nan
    kappas = [c.kappa for c in checks if c.kappa is not None]
    max_kappa = float(max(kappas)) if kappas else math.nan

    out = []
    first_bad = None
    for i, (s, c) in enumerate(zip(traj.samples, checks)):
        r = q_rate[i]
        rate_ok = bool(np.all(np.isfinite(r)) and np.max(np.abs(r)) <= rate_limit)
        out.append(SampleCheck(s.t, c.feasible, rate_ok, c.code, c.violations, c.kappa, c.q, r))
        if first_bad is None and not (c.feasible and rate_ok):
            first_bad = i
    return FeasibilityReport(
        samples=tuple(out),
        all_feasible=first_bad is None,
        max_kappa=max_kappa,
        max_abs_q_rate=max_rate,
        first_infeasible_index=first_bad,
        rate_limit=rate_limit,
    )
