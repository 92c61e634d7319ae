"""Shared data model: poses, rotations and mechanism geometry records.

Frames: the base frame has ``x`` pointing anterior, ``y`` transverse and
``z`` up.  The platform pose is ``(x, z, theta, psi)``; the platform origin
sits at ``(x, 0, z)`` and its orientation is ``rot_y(theta) @ rot_z(psi)``.

Limb indexing is uniform across the package: index 0 is the central limb,
indices 1..3 are the lateral limbs.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence

import numpy as np

from kneepkm.errors import InvalidGeometry

UNIT_TOL = 1e-12


class Architecture(str, enum.Enum):
    RPU_3UPS = "RPU_3UPS"
    PRU_3PUS = "PRU_3PUS"


class ViolationKind(str, enum.Enum):
    STROKE_UNDER = "STROKE_UNDER"
    STROKE_OVER = "STROKE_OVER"
    U_CONE_EXCEEDED = "U_CONE_EXCEEDED"
    S_CONE_EXCEEDED = "S_CONE_EXCEEDED"


@dataclass(frozen=True)
class JointViolation:
    limb_id: int
    kind: ViolationKind
    magnitude: float

    def __post_init__(self):
        if not self.magnitude > 0:
            raise ValueError("violation magnitude must be positive")


@dataclass(frozen=True)
class Pose:
    """Generalized coordinates of the moving platform (m, m, rad, rad)."""

    x: float
    z: float
    theta: float
    psi: float

    def __post_init__(self):
        values = (self.x, self.z, self.theta, self.psi)
        if not all(math.isfinite(v) for v in values):
            raise ValueError(f"pose fields must be finite, got {values}")
        if not self.z > 0:
            raise ValueError(f"pose requires z > 0, got z={self.z}")
        for name in ("theta", "psi"):
            a = getattr(self, name)
            if not -math.pi < a <= math.pi:
                raise ValueError(f"{name}={a} outside (-pi, pi]")

    @classmethod
    def from_degrees(cls, x: float, z: float, theta_deg: float, psi_deg: float) -> "Pose":
        return cls(x, z, math.radians(theta_deg), math.radians(psi_deg))

    @classmethod
    def from_array(cls, v: Sequence[float]) -> "Pose":
        """Build a pose from a 4-vector, wrapping both angles into (-pi, pi]."""
        x, z, th, ps = (float(c) for c in v)
        return cls(x, z, wrap_angle(th), wrap_angle(ps))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.z, self.theta, self.psi])


def wrap_angle(a: float) -> float:
    w = math.remainder(a, 2 * math.pi)
    return math.pi if w == -math.pi else w


def rot_y(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(psi: float) -> np.ndarray:
    c, s = math.cos(psi), math.sin(psi)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotation_matrix(theta: float, psi: float) -> np.ndarray:
    """``rot_y(theta) @ rot_z(psi)`` written out in closed form."""
    ct, st = math.cos(theta), math.sin(theta)
    cp, sp = math.cos(psi), math.sin(psi)
    return np.array([
        [ct * cp, -ct * sp, st],
        [sp, cp, 0.0],
        [-st * cp, st * sp, ct],
    ])


def rotation_from_pose(pose: Pose) -> np.ndarray:
    return rotation_matrix(pose.theta, pose.psi)


@dataclass(frozen=True, eq=False)
class MechanismGeometry:
    """One validated architecture instance.

    Arrays are read-only.  ``stroke_limits`` has one ``[q_min, q_max]`` row
    per actuated joint, central first.  ``rail_direction``, ``strut_length``
    and ``central_link_length`` are only meaningful for PRU_3PUS.
    """

    architecture: Architecture
    base_anchors: np.ndarray
    platform_anchors: np.ndarray
    central_platform_anchor: np.ndarray
    stroke_limits: np.ndarray
    u_joint_cone_half_angle: float
    s_joint_cone_half_angle: float
    characteristic_length: float
    rail_direction: Optional[np.ndarray] = None
    strut_length: Optional[float] = None
    central_link_length: Optional[float] = None
    name: str = field(default="", compare=False)

    def with_strokes(self, stroke_limits) -> "MechanismGeometry":
        """Copy with new stroke limits; goes through validation again."""
        doc = self.to_document()
        doc["stroke_limits"] = np.asarray(stroke_limits, dtype=float).tolist()
        return validate_geometry(doc)

    def with_cones(self, u_deg: float, s_deg: float) -> "MechanismGeometry":
        doc = self.to_document()
        doc["u_joint_cone_half_angle_deg"] = u_deg
        doc["s_joint_cone_half_angle_deg"] = s_deg
        return validate_geometry(doc)

    def to_document(self) -> dict:
        """Inverse of :func:`validate_geometry` (angles in degrees)."""
        doc: dict[str, Any] = {
            "name": self.name,
            "architecture": self.architecture.value,
            "base_anchors": self.base_anchors.tolist(),
            "platform_anchors": self.platform_anchors.tolist(),
            "central_platform_anchor": self.central_platform_anchor.tolist(),
            "stroke_limits": self.stroke_limits.tolist(),
            "u_joint_cone_half_angle_deg": math.degrees(self.u_joint_cone_half_angle),
            "s_joint_cone_half_angle_deg": math.degrees(self.s_joint_cone_half_angle),
            "characteristic_length": self.characteristic_length,
        }
        if self.architecture is Architecture.PRU_3PUS:
            doc["rail_direction"] = self.rail_direction.tolist()
            doc["strut_length"] = self.strut_length
            doc["central_link_length"] = self.central_link_length
        return doc


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


def _polar_points(layout: Mapping[str, Any]) -> np.ndarray:
    r = float(layout["radius"])
    h = float(layout.get("z", 0.0))
    pts = []
    for az in layout["azimuths_deg"]:
        a = math.radians(float(az))
        c, s = r * math.cos(a), r * math.sin(a)
        # cos(90 deg) and friends are ~1e-17 in floating point; snap them
        pts.append([0.0 if abs(c) < 1e-15 else c, 0.0 if abs(s) < 1e-15 else s, h])
    return np.array(pts)


def _read_points(value, n: int, label: str, problems: list) -> Optional[np.ndarray]:
    try:
        pts = _polar_points(value) if isinstance(value, Mapping) else np.array(value, dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        problems.append(f"{label}: unreadable ({exc})")
        return None
    if pts.shape != (n, 3):
        problems.append(f"{label}: expected {n} points of 3 coordinates, got shape {pts.shape}")
        return None
    if not np.all(np.isfinite(pts)):
        problems.append(f"{label}: non-finite coordinates")
        return None
    return pts


def _distinct(pts: np.ndarray, label: str, problems: list) -> None:
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if np.linalg.norm(pts[i] - pts[j]) <= UNIT_TOL:
                problems.append(f"{label}: anchors {i + 1} and {j + 1} coincide")


def _positive(doc, key, problems) -> Optional[float]:
    if key not in doc:
        problems.append(f"{key}: missing")
        return None
    try:
        v = float(doc[key])
    except (TypeError, ValueError):
        problems.append(f"{key}: not a number")
        return None
    if not (math.isfinite(v) and v > 0):
        problems.append(f"{key}: must be positive, got {v}")
        return None
    return v


def validate_geometry(raw: Mapping[str, Any]) -> MechanismGeometry:
    """Check a geometry document and build a :class:`MechanismGeometry`.

    The document uses metres for lengths and degrees for the two joint cone
    half-angles.  Anchor sets are either explicit ``[[x, y, z], ...]`` lists
    or ``{"radius": r, "azimuths_deg": [...], "z": h}`` mappings.

    Nothing is repaired: every violated invariant is collected and raised
    together as :class:`InvalidGeometry`.
    """
    problems: list[str] = []
    try:
        arch = Architecture(raw.get("architecture"))
    except ValueError:
        problems.append(f"architecture: must be one of {[a.value for a in Architecture]}")
        arch = None

    base = _read_points(raw.get("base_anchors"), 3, "base_anchors", problems)
    plat = _read_points(raw.get("platform_anchors"), 3, "platform_anchors", problems)
    if base is not None:
        _distinct(base, "base_anchors", problems)
    if plat is not None:
        _distinct(plat, "platform_anchors", problems)

    bc = np.array(raw.get("central_platform_anchor", [0.0, 0.0, 0.0]), dtype=float)
    if bc.shape != (3,) or not np.all(np.isfinite(bc)):
        problems.append("central_platform_anchor: expected one finite 3-vector")

    strokes = None
    try:
        strokes = np.array(raw.get("stroke_limits"), dtype=float)
    except (TypeError, ValueError):
        pass
    if strokes is None or strokes.shape != (4, 2) or not np.all(np.isfinite(strokes)):
        problems.append("stroke_limits: expected 4 finite [q_min, q_max] pairs")
        strokes = None
    else:
        # slider travel may start at the rail origin; a prismatic leg length may not
        lower_ok = (lambda lo: lo >= 0) if arch is Architecture.PRU_3PUS else (lambda lo: lo > 0)
        for k, (lo, hi) in enumerate(strokes):
            if not (lower_ok(lo) and lo < hi):
                problems.append(f"stroke_limits[{k}]: bounds [{lo}, {hi}] not a valid interval")

    cones = []
    for key in ("u_joint_cone_half_angle_deg", "s_joint_cone_half_angle_deg"):
        v = _positive(raw, key, problems)
        if v is not None and v > 180:
            problems.append(f"{key}: must not exceed 180 degrees")
        cones.append(math.radians(v) if v is not None else None)
    lam = _positive(raw, "characteristic_length", problems)

    rail = strut = link = None
    if arch is Architecture.PRU_3PUS:
        try:
            rail = np.array(raw.get("rail_direction"), dtype=float)
        except (TypeError, ValueError):
            rail = None
        if rail is None or rail.shape != (3,) or not np.all(np.isfinite(rail)):
            problems.append("rail_direction: expected one finite 3-vector")
        elif abs(np.linalg.norm(rail) - 1.0) > UNIT_TOL:
            problems.append(f"rail_direction: norm {np.linalg.norm(rail):.6g} is not 1")
        strut = _positive(raw, "strut_length", problems)
        link = _positive(raw, "central_link_length", problems)

    if problems:
        raise InvalidGeometry(problems)

    return MechanismGeometry(
        architecture=arch,
        base_anchors=_frozen(base),
        platform_anchors=_frozen(plat),
        central_platform_anchor=_frozen(bc),
        stroke_limits=_frozen(strokes),
        u_joint_cone_half_angle=cones[0],
        s_joint_cone_half_angle=cones[1],
        characteristic_length=lam,
        rail_direction=None if rail is None else _frozen(rail),
        strut_length=strut,
        central_link_length=link,
        name=str(raw.get("name", "")),
    )


def load_geometry(path) -> MechanismGeometry:
    """Load a geometry document.

    ``path`` may name a file on disk or one of the shipped references
    (``g0.json``, ``g1.json``).
    """
    p = Path(path)
    if p.is_file():
        text = p.read_text()
    else:
        ref = resources.files("kneepkm") / "data" / p.name
        if p.parent != Path(".") or not ref.is_file():
            raise FileNotFoundError(f"no geometry document at {path}")
        text = ref.read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidGeometry([f"document is not valid JSON: {exc}"]) from exc
    if not isinstance(doc, Mapping):
        raise InvalidGeometry(["document must be a JSON object"])
    return validate_geometry(doc)


def reference_geometry(which: str) -> MechanismGeometry:
    """The shipped reference instances: ``"G0"`` (RPU+3UPS) or ``"G1"`` (PRU+3PUS)."""
    files = {"G0": "g0.json", "G1": "g1.json"}
    try:
        return load_geometry(files[which.upper()])
    except KeyError:
        raise ValueError(f"unknown reference geometry {which!r}") from None


def platform_points_world(geom: MechanismGeometry, pose: Pose) -> np.ndarray:
    """World positions of the platform anchors, shape (4, 3).

    Row 0 is the central anchor, rows 1..3 the lateral anchors.
    """
    R = rotation_from_pose(pose)
    p = np.array([pose.x, 0.0, pose.z])
    local = np.vstack([geom.central_platform_anchor, geom.platform_anchors])
    return p + local @ R.T
