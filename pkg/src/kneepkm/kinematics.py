"""Inverse/forward kinematics, Jacobians and conditioning.

Both architectures share one limb model.  Every limb joins a base point to
a platform anchor ``c_k = p + R b_k``; the central limb's base point is the
origin.

* RPU_3UPS: the actuated value is the limb length ``|c_k - a_k|``.
* PRU_3PUS: the actuated value is the slider travel ``s_k`` along the rail
  direction ``d`` such that ``|c_k - a_k - s_k d| = L_k`` (lower root).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from kneepkm.errors import NoConvergence, SingularJacobian, Unreachable
from kneepkm.geometry import (
    Architecture,
    JointViolation,
    MechanismGeometry,
    Pose,
    ViolationKind,
    rotation_matrix,
)

EPS_SING = 1e-8
FK_TOL = 1e-10
FK_MAX_ITER = 100
FK_DAMPING = 0.5

_Y = np.array([0.0, 1.0, 0.0])
_Z = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True, eq=False)
class ActuatorSolution:
    """IK result for one pose.

    ``q`` holds the four actuated values (central first).  ``limb_axes`` are
    unit vectors from each limb's base-side joint toward the platform.
    """

    q: np.ndarray
    phi_central: float
    limb_axes: np.ndarray
    violations: tuple

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass(frozen=True, eq=False)
class JacobianReport:
    J: np.ndarray
    J_h: np.ndarray
    sigma_min: float
    sigma_max: float
    kappa: float
    singular: bool


def _cross(a, b):
    # np.cross is slow for the (4, 3) arrays used here
    a = np.broadcast_to(a, np.broadcast_shapes(np.shape(a), np.shape(b)))
    b = np.broadcast_to(b, a.shape)
    return np.stack([
        a[..., 1] * b[..., 2] - a[..., 2] * b[..., 1],
        a[..., 2] * b[..., 0] - a[..., 0] * b[..., 2],
        a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0],
    ], axis=-1)


def _angles(a, b):
    """Row-wise angle between unit vectors, accurate near 0."""
    c = _cross(a, b)
    return np.arctan2(np.sqrt(np.einsum("ij,ij->i", c, c)), np.einsum("ij,ij->i", a, np.broadcast_to(b, a.shape)))


def _base_points(geom: MechanismGeometry) -> np.ndarray:
    return np.vstack([np.zeros(3), geom.base_anchors])


def _platform_local(geom: MechanismGeometry) -> np.ndarray:
    return np.vstack([geom.central_platform_anchor, geom.platform_anchors])


def _limb_state(geom: MechanismGeometry, v):
    """Actuated values plus the vectors needed by the Jacobian.

    Returns ``(q, axes, w, rb, R)``: ``w`` is the physical limb vector (leg
    for UPS/RPU, strut or link for PUS/PRU) and ``rb`` the rotated platform
    anchors, both shape (4, 3).
    """
    x, z, th, ps = v
    R = rotation_matrix(th, ps)
    rb = _platform_local(geom) @ R.T
    d = np.array([x, 0.0, z]) + rb - _base_points(geom)

    if geom.architecture is Architecture.RPU_3UPS:
        q = np.sqrt(np.einsum("ij,ij->i", d, d))
        if np.any(q == 0.0):
            k = int(np.argmin(q))
            raise Unreachable(f"limb {k} has zero length; its revolute angle is undefined")
        w = d
    else:
        rail = geom.rail_direction
        lengths = np.array([geom.central_link_length] + [geom.strut_length] * 3)
        along = d @ rail
        perp = d - np.outer(along, rail)
        disc = lengths**2 - np.einsum("ij,ij->i", perp, perp)
        if np.any(disc < 0):
            k = int(np.argmin(disc))
            raise Unreachable(
                f"limb {k}: offset from rail {math.sqrt(-disc[k] + lengths[k]**2):.6g} m "
                f"exceeds link length {lengths[k]:.6g} m"
            )
        q = along - np.sqrt(disc)
        w = d - np.outer(q, rail)
    norms = np.sqrt(np.einsum("ij,ij->i", w, w))
    return q, w / norms[:, None], w, rb, R


def _jacobian_from_state(geom, axes, rb, R):
    """Rows d q_k / d(x, z, theta, psi) from the unit limb axes."""
    w = axes
    # angular velocity is theta_dot * y + psi_dot * (platform z axis)
    spin_axis = R[:, 2]
    j_theta = np.einsum("ij,ij->i", w, _cross(_Y, rb))
    j_psi = np.einsum("ij,ij->i", w, _cross(spin_axis, rb))
    J = np.column_stack([w[:, 0], w[:, 2], j_theta, j_psi])
    if geom.architecture is Architecture.PRU_3PUS:
        # implicit differentiation of |d - s*rail| = L: s_dot = (w . c_dot) / (w . rail)
        denom = w @ geom.rail_direction
        if np.any(denom == 0.0):
            raise Unreachable("a strut is perpendicular to its rail; slider rate undefined")
        J = J / denom[:, None]
    return J


def _violations(geom: MechanismGeometry, q, axes, R) -> tuple:
    out = []
    for k, (lo, hi) in enumerate(geom.stroke_limits):
        if q[k] < lo:
            out.append(JointViolation(k, ViolationKind.STROKE_UNDER, float(lo - q[k])))
        elif q[k] > hi:
            out.append(JointViolation(k, ViolationKind.STROKE_OVER, float(q[k] - hi)))

    normal = R[:, 2]
    u_lim, s_lim = geom.u_joint_cone_half_angle, geom.s_joint_cone_half_angle
    # universal joints: central limb at the platform, lateral limbs at the base;
    # spherical joints: lateral limbs at the platform
    u_ang = np.concatenate([_angles(axes[:1], normal), _angles(axes[1:], _Z)])
    s_ang = _angles(axes[1:], normal)
    for k in range(4):
        if u_ang[k] > u_lim:
            out.append(JointViolation(k, ViolationKind.U_CONE_EXCEEDED, float(u_ang[k] - u_lim)))
        if k > 0 and s_ang[k - 1] > s_lim:
            out.append(JointViolation(k, ViolationKind.S_CONE_EXCEEDED, float(s_ang[k - 1] - s_lim)))
    return tuple(out)


def ik(geom: MechanismGeometry, pose: Pose) -> ActuatorSolution:
    """Closed-form inverse kinematics.

    Limit violations are returned inside the solution, not raised.  Raises
    :class:`Unreachable` when the pose cannot be assembled at all.
    """
    q, axes, w, _, R = _limb_state(geom, (pose.x, pose.z, pose.theta, pose.psi))
    return _solution(geom, q, axes, w, R)


def _solution(geom, q, axes, w, R) -> ActuatorSolution:
    phi = math.atan2(w[0, 0], w[0, 2])
    return ActuatorSolution(
        q=_ro(q),
        phi_central=phi,
        limb_axes=_ro(axes),
        violations=_violations(geom, q, axes, R),
    )


def _ro(a):
    a = np.asarray(a)
    a.setflags(write=False)
    return a


def _svd_report(geom: MechanismGeometry, J: np.ndarray, eps_sing: float) -> JacobianReport:
    J_h = J.copy()
    J_h[:, 2:] /= geom.characteristic_length
    s = np.linalg.svd(J_h, compute_uv=False)
    smin, smax = float(s[-1]), float(s[0])
    kappa = smax / smin if smin > 0 else math.inf
    return JacobianReport(
        J=_ro(J), J_h=_ro(J_h), sigma_min=smin, sigma_max=smax,
        kappa=kappa, singular=smin < eps_sing,
    )


def jacobian(geom: MechanismGeometry, pose: Pose, eps_sing: float = EPS_SING) -> JacobianReport:
    """Analytic IK Jacobian and its conditioning.

    Rotational columns are divided by the characteristic length before the
    singular values are taken, so ``kappa`` is unit-consistent.
    """
    _, axes, _, rb, R = _limb_state(geom, (pose.x, pose.z, pose.theta, pose.psi))
    return _svd_report(geom, _jacobian_from_state(geom, axes, rb, R), eps_sing)


def ik_and_jacobian(geom: MechanismGeometry, pose: Pose, eps_sing: float = EPS_SING):
    """``(ik(geom, pose), jacobian(geom, pose))`` sharing one limb evaluation."""
    q, axes, w, rb, R = _limb_state(geom, (pose.x, pose.z, pose.theta, pose.psi))
    sol = _solution(geom, q, axes, w, R)
    return sol, _svd_report(geom, _jacobian_from_state(geom, axes, rb, R), eps_sing)


def singularity_margin(report: JacobianReport) -> float:
    """``sigma_min / sigma_max`` of the homogenized Jacobian, in [0, 1]."""
    if report.sigma_max == 0:
        return 0.0
    return report.sigma_min / report.sigma_max


def _q_and_jacobian(geom, v):
    q, axes, _, rb, R = _limb_state(geom, v)
    return q, _jacobian_from_state(geom, axes, rb, R)


def fk(
    geom: MechanismGeometry,
    q,
    guess: Pose,
    *,
    tol: float = FK_TOL,
    max_iter: int = FK_MAX_ITER,
    eps_sing: float = EPS_SING,
) -> Pose:
    """Forward kinematics by damped Newton iteration on ``ik(pose).q - q``.

    A full Newton step is halved while it increases the residual norm.  Once
    the residual is below ``tol`` a few extra steps are taken to polish the
    pose to machine precision.

    Raises :class:`NoConvergence`, :class:`SingularJacobian` (homogenized
    ``sigma_min < eps_sing`` at an iterate the solver produced; a singular
    starting guess is allowed and gets a least-squares step) or
    :class:`Unreachable`.
    """
    target = np.asarray(q, dtype=float)
    if target.shape != (4,):
        raise ValueError("q must be a 4-vector")
    v = guess.as_array()
    qv, J = _q_and_jacobian(geom, v)
    r = qv - target
    rn = float(np.max(np.abs(r)))

    for it in range(max_iter):
        if rn < tol:
            v, rn = _polish(geom, target, v, r, rn, J)
            return _finish(v, rn, tol)
        report = _svd_report(geom, J, eps_sing)
        if report.singular:
            if it > 0:
                raise SingularJacobian(
                    f"homogenized sigma_min {report.sigma_min:.3g} below {eps_sing:g}"
                )
            # a singular starting guess (e.g. the home pose) gets a minimum-norm step
            step = np.linalg.lstsq(J, -r, rcond=None)[0]
        else:
            step = np.linalg.solve(J, -r)
        alpha = 1.0
        while True:
            trial = v + alpha * step
            try:
                q_t, J_t = _q_and_jacobian(geom, trial)
                r_t = q_t - target
                rn_t = float(np.max(np.abs(r_t)))
            except Unreachable:
                if alpha < 1e-6:
                    raise
                rn_t = math.inf
            if rn_t <= rn or alpha < 1e-6:
                break
            alpha *= FK_DAMPING
        if not math.isfinite(rn_t):
            raise NoConvergence("line search left the assembly domain")
        v, r, rn, J = trial, r_t, rn_t, J_t

    raise NoConvergence(f"residual {rn:.3g} after {max_iter} iterations")


def _polish(geom, target, v, r, rn, J, steps: int = 3):
    for _ in range(steps):
        try:
            trial = v + np.linalg.solve(J, -r)
            q_t, J_t = _q_and_jacobian(geom, trial)
        except (np.linalg.LinAlgError, Unreachable):
            break
        r_t = q_t - target
        rn_t = float(np.max(np.abs(r_t)))
        if rn_t > rn:
            break
        v, r, rn, J = trial, r_t, rn_t, J_t
        if rn == 0.0:
            break
    return v, rn


def _finish(v, rn, tol) -> Pose:
    if not rn < tol:
        raise NoConvergence(f"residual {rn:.3g} not below {tol:g}")
    if not v[1] > 0:
        raise NoConvergence(f"converged to a mirror assembly below the base (z={v[1]:.6g})")
    return Pose.from_array(v)


def limb_lengths_check(geom: MechanismGeometry, pose: Pose, q: Optional[np.ndarray] = None):
    """Residuals of the physical length constraints for an IK solution.

    For RPU_3UPS each entry is ``|c_k - a_k| - q_k``; for PRU_3PUS it is
    ``|c_k - a_k - s_k d| - L_k``.
    """
    if q is None:
        q = ik(geom, pose).q
    R = rotation_matrix(pose.theta, pose.psi)
    c = np.array([pose.x, 0.0, pose.z]) + _platform_local(geom) @ R.T
    d = c - _base_points(geom)
    if geom.architecture is Architecture.RPU_3UPS:
        return np.linalg.norm(d, axis=1) - q
    lengths = np.array([geom.central_link_length] + [geom.strut_length] * 3)
    return np.linalg.norm(d - np.outer(q, geom.rail_direction), axis=1) - lengths
