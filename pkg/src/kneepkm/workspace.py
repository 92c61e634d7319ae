"""Sagittal-plane workspace maps, orientation sweeps and metrics."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from kneepkm.errors import GridTooLarge, InvalidParams, Unreachable
from kneepkm.geometry import MechanismGeometry, Pose
from kneepkm.kinematics import EPS_SING, ik_and_jacobian, singularity_margin

# Default conditioning floor on sigma_min/sigma_max.  Zero means pure
# reachability plus joint limits; see README for why the reference
# geometry needs this.
MARGIN_MIN = 0.0
MAX_CELLS_PER_AXIS = 10_000


class CellCode(str, enum.Enum):
    """Why a node is infeasible, in decreasing priority."""

    UNREACHABLE = "UNREACHABLE"
    STROKE_UNDER = "STROKE_UNDER"
    STROKE_OVER = "STROKE_OVER"
    U_CONE_EXCEEDED = "U_CONE_EXCEEDED"
    S_CONE_EXCEEDED = "S_CONE_EXCEEDED"
    SINGULAR = "SINGULAR"


_PRIORITY = {c: i for i, c in enumerate(CellCode)}


@dataclass(frozen=True, eq=False)
class PoseCheck:
    """Feasibility verdict for one pose; ``q``/``kappa`` are None if unreachable."""

    feasible: bool
    code: Optional[CellCode]
    q: Optional[np.ndarray]
    kappa: Optional[float]
    margin: Optional[float]
    violations: tuple = ()


def evaluate_pose(geom: MechanismGeometry, pose: Pose, margin_min: float = MARGIN_MIN,
                  eps_sing: float = EPS_SING) -> PoseCheck:
    try:
        sol, rep = ik_and_jacobian(geom, pose, eps_sing)
    except Unreachable:
        return PoseCheck(False, CellCode.UNREACHABLE, None, None, None)
    margin = singularity_margin(rep)
    codes = [CellCode(v.kind.value) for v in sol.violations]
    if margin < margin_min:
        codes.append(CellCode.SINGULAR)
    code = min(codes, key=_PRIORITY.__getitem__) if codes else None
    return PoseCheck(code is None, code, sol.q, rep.kappa, margin, sol.violations)


def axis_nodes(lo: float, hi: float, step: float) -> np.ndarray:
    """Nodes ``lo, lo+step, ...`` always ending exactly at ``hi``."""
    n = int(math.floor((hi - lo) / step + 1e-9))
    nodes = [lo + i * step for i in range(n + 1)]
    if hi - nodes[-1] > 1e-9 * step:
        nodes.append(hi)
    else:
        nodes[-1] = hi
    # -0.4 + 40 * 0.01 is -3e-17, not 0
    return np.array([0.0 if abs(v) < 1e-9 * step else v for v in nodes])


def _check_count(lo, hi, step, label):
    if (hi - lo) / step > MAX_CELLS_PER_AXIS:
        raise GridTooLarge(
            f"{label}: {(hi - lo) / step:.3g} steps exceeds the {MAX_CELLS_PER_AXIS} per-axis limit"
        )


@dataclass(frozen=True)
class GridSpec:
    x_min: float
    x_max: float
    z_min: float
    z_max: float
    step: float
    theta_fixed: float = 0.0
    psi_fixed: float = 0.0

    def __post_init__(self):
        vals = (self.x_min, self.x_max, self.z_min, self.z_max, self.step,
                self.theta_fixed, self.psi_fixed)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidParams("grid values must be finite")
        if not (self.x_min < self.x_max and self.z_min < self.z_max):
            raise InvalidParams("grid requires x_min < x_max and z_min < z_max")
        if not self.step > 0:
            raise InvalidParams("grid step must be positive")
        _check_count(self.x_min, self.x_max, self.step, "x")
        _check_count(self.z_min, self.z_max, self.step, "z")

    @property
    def xs(self) -> np.ndarray:
        return axis_nodes(self.x_min, self.x_max, self.step)

    @property
    def zs(self) -> np.ndarray:
        return axis_nodes(self.z_min, self.z_max, self.step)

    def refined(self, factor: int = 2) -> "GridSpec":
        return GridSpec(self.x_min, self.x_max, self.z_min, self.z_max, self.step / factor,
                        self.theta_fixed, self.psi_fixed)


@dataclass(frozen=True, eq=False)
class Cell:
    x: float
    z: float
    feasible: bool
    kappa: Optional[float]
    q: Optional[np.ndarray]
    violation_code: Optional[CellCode]


@dataclass(frozen=True, eq=False)
class WorkspaceMap:
    """Cells are stored x-major: all z nodes for the first x, then the next."""

    grid: GridSpec
    cells: tuple

    @property
    def shape(self) -> tuple:
        return len(self.grid.xs), len(self.grid.zs)

    def feasible_mask(self) -> np.ndarray:
        return np.array([c.feasible for c in self.cells]).reshape(self.shape)

    def cell(self, x: float, z: float) -> Cell:
        for c in self.cells:
            if math.isclose(c.x, x, abs_tol=1e-12) and math.isclose(c.z, z, abs_tol=1e-12):
                return c
        raise KeyError((x, z))


@dataclass(frozen=True)
class WorkspaceMetrics:
    area: float
    x_extent: float
    z_extent: float
    aspect: float
    gci: float
    n_feasible: int


def _cell(x, z, check: PoseCheck) -> Cell:
    return Cell(float(x), float(z), check.feasible, check.kappa, check.q, check.code)


def sweep(geom: MechanismGeometry, grid: GridSpec, margin_min: float = MARGIN_MIN,
          eps_sing: float = EPS_SING) -> WorkspaceMap:
    """Evaluate every grid node at the grid's fixed orientation."""
    cells = []
    for x in grid.xs:
        for z in grid.zs:
            if not z > 0:
                cells.append(Cell(float(x), float(z), False, None, None, CellCode.UNREACHABLE))
                continue
            pose = Pose(float(x), float(z), grid.theta_fixed, grid.psi_fixed)
            cells.append(_cell(x, z, evaluate_pose(geom, pose, margin_min, eps_sing)))
    return WorkspaceMap(grid, tuple(cells))


def metrics(wmap: WorkspaceMap) -> WorkspaceMetrics:
    feas = [c for c in wmap.cells if c.feasible]
    if not feas:
        return WorkspaceMetrics(0.0, 0.0, 0.0, 0.0, 0.0, 0)
    xs = [c.x for c in feas]
    zs = [c.z for c in feas]
    x_ext = max(xs) - min(xs)
    z_ext = max(zs) - min(zs)
    if z_ext > 0:
        aspect = x_ext / z_ext
    else:
        aspect = math.inf if x_ext > 0 else 0.0
    gci = float(np.mean([0.0 if c.kappa == math.inf else 1.0 / c.kappa for c in feas]))
    return WorkspaceMetrics(len(feas) * wmap.grid.step**2, x_ext, z_ext, aspect, gci, len(feas))


class AspectOrdering(str, enum.Enum):
    HORIZONTAL_BIAS_A = "HORIZONTAL_BIAS_A"
    HORIZONTAL_BIAS_B = "HORIZONTAL_BIAS_B"
    TIE = "TIE"


@dataclass(frozen=True, eq=False)
class ComparisonReport:
    metrics_a: WorkspaceMetrics
    metrics_b: WorkspaceMetrics
    ordering: AspectOrdering
    area_ratio: Optional[float]
    map_a: WorkspaceMap
    map_b: WorkspaceMap


def compare(geom_a: MechanismGeometry, geom_b: MechanismGeometry, grid: GridSpec,
            margin_min: float = MARGIN_MIN) -> ComparisonReport:
    """Sweep both geometries on the same grid and order them by aspect.

    ``area_ratio`` is ``area_a / area_b`` and None when B has no area.
    """
    map_a = sweep(geom_a, grid, margin_min)
    map_b = sweep(geom_b, grid, margin_min)
    ma, mb = metrics(map_a), metrics(map_b)
    if ma.aspect > mb.aspect:
        order = AspectOrdering.HORIZONTAL_BIAS_A
    elif ma.aspect < mb.aspect:
        order = AspectOrdering.HORIZONTAL_BIAS_B
    else:
        order = AspectOrdering.TIE
    ratio = ma.area / mb.area if mb.area > 0 else None
    return ComparisonReport(ma, mb, order, ratio, map_a, map_b)


@dataclass(frozen=True, eq=False)
class OrientationMap:
    """Feasibility over (theta, psi) at a fixed station.

    ``feasible`` and ``codes`` are indexed ``[i_theta, i_psi]``.
    """

    x: float
    z: float
    thetas: np.ndarray
    psis: np.ndarray
    feasible: np.ndarray
    codes: tuple


def _angle_nodes(rng: Sequence[float], step: float, label: str) -> np.ndarray:
    lo, hi = (float(v) for v in rng)
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
        raise InvalidParams(f"{label} range must satisfy lo <= hi")
    if lo == hi:
        return np.array([lo])
    _check_count(lo, hi, step, label)
    return axis_nodes(lo, hi, step)


def orientation_sweep(geom: MechanismGeometry, x: float, z: float, theta_range, psi_range,
                      step: float, margin_min: float = MARGIN_MIN) -> OrientationMap:
    """Feasibility map over orientations at the station ``(x, z)``.

    A range given as ``(a, a)`` collapses to the single node ``a``.
    """
    if not step > 0:
        raise InvalidParams("orientation step must be positive")
    thetas = _angle_nodes(theta_range, step, "theta")
    psis = _angle_nodes(psi_range, step, "psi")
    feas = np.zeros((len(thetas), len(psis)), dtype=bool)
    codes = []
    for i, th in enumerate(thetas):
        row = []
        for j, ps in enumerate(psis):
            chk = evaluate_pose(geom, Pose(x, z, float(th), float(ps)), margin_min)
            feas[i, j] = chk.feasible
            row.append(chk.code)
        codes.append(tuple(row))
    feas.setflags(write=False)
    return OrientationMap(float(x), float(z), thetas, psis, feas, tuple(codes))
