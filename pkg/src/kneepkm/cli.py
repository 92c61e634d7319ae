"""Command-line front end.

Exit codes: 0 success, 2 bad input (flags, geometry, exercise parameters),
3 pose unreachable / FK failure, 4 grid too large, 5 exercise infeasible.
Angles are radians unless ``--degrees`` is given; emitted CSV angles are
always radians.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

from kneepkm.errors import (
    GridTooLarge,
    InvalidGeometry,
    InvalidParams,
    NoConvergence,
    SingularJacobian,
    Unreachable,
)
from kneepkm.exercises import (
    RATE_LIMIT,
    check_feasibility,
    gen_cpm_flexion,
    gen_gait,
    gen_lachman,
    gen_pivot_shift,
)
from kneepkm.geometry import Pose, load_geometry
from kneepkm.kinematics import fk, ik, jacobian, singularity_margin
from kneepkm.workspace import MARGIN_MIN, GridSpec, compare, metrics, sweep

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_UNREACHABLE = 3
EXIT_GRID_TOO_LARGE = 4
EXIT_INFEASIBLE = 5

WORKSPACE_HEADER = ["x", "z", "feasible", "kappa", "q_c", "q_1", "q_2", "q_3", "violation"]
TRAJECTORY_HEADER = ["t", "x", "z", "theta", "psi", "q_c", "q_1", "q_2", "q_3",
                     "kappa", "feasible", "violation"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def fmt(v) -> str:
    """CSV number formatting: 9 significant digits, empty for absent values."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    v = float(v)
    if math.isnan(v):
        return ""
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if v == 0:
        v = 0.0
    return f"{v:.9g}"


def _vector(text: str, n: int, label: str) -> list:
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError:
        raise UsageError(f"{label}: expected {n} comma-separated numbers, got {text!r}") from None
    if len(vals) != n:
        raise UsageError(f"{label}: expected {n} comma-separated numbers, got {len(vals)}")
    return vals


def _angle(v: float, degrees: bool) -> float:
    return math.radians(v) if degrees else v


def _pose(text: str, degrees: bool, label: str = "--pose") -> Pose:
    x, z, th, ps = _vector(text, 4, label)
    try:
        return Pose(x, z, _angle(th, degrees), _angle(ps, degrees))
    except ValueError as exc:
        raise UsageError(f"{label}: {exc}") from None


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _rows_to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def workspace_csv(wmap) -> str:
    rows = []
    for c in wmap.cells:
        q = list(c.q) if c.q is not None else [None] * 4
        code = c.violation_code.value if c.violation_code is not None else ""
        rows.append([fmt(c.x), fmt(c.z), fmt(c.feasible), fmt(c.kappa), *map(fmt, q), code])
    return _rows_to_csv(WORKSPACE_HEADER, rows)


def trajectory_csv(traj, report) -> str:
    rows = []
    for s, chk in zip(traj.samples, report.samples):
        q = list(chk.q) if chk.q is not None else [None] * 4
        ok = chk.feasible and chk.rate_ok
        if chk.code is not None:
            code = chk.code.value
        elif not chk.rate_ok:
            code = "RATE_LIMIT"
        else:
            code = ""
        p = s.pose
        rows.append([fmt(s.t), fmt(p.x), fmt(p.z), fmt(p.theta), fmt(p.psi),
                     *map(fmt, q), fmt(chk.kappa), fmt(ok), code])
    return _rows_to_csv(TRAJECTORY_HEADER, rows)


def _finite_or_none(v):
    return v if v is not None and math.isfinite(v) else None


def _metrics_dict(m) -> dict:
    return {
        "area": m.area,
        "x_extent": m.x_extent,
        "z_extent": m.z_extent,
        "aspect": _finite_or_none(m.aspect),
        "gci": m.gci,
        "n_feasible": m.n_feasible,
    }


def _print_metrics(label, m, out):
    print(f"{label}area = {fmt(m.area)} m^2, x_extent = {fmt(m.x_extent)} m, "
          f"z_extent = {fmt(m.z_extent)} m, aspect = {fmt(m.aspect)}, gci = {fmt(m.gci)}, "
          f"feasible cells = {m.n_feasible}", file=out)


def _grid(args) -> GridSpec:
    return GridSpec(args.x_min, args.x_max, args.z_min, args.z_max, args.step,
                    _angle(args.theta, args.degrees), _angle(args.psi, args.degrees))


def cmd_ik(args, out) -> int:
    geom = load_geometry(args.geom)
    pose = _pose(args.pose, args.degrees)
    sol = ik(geom, pose)
    rep = jacobian(geom, pose)
    print("q = (" + ", ".join(fmt(v) for v in sol.q) + ")", file=out)
    print(f"phi_central = {fmt(sol.phi_central)} rad", file=out)
    print(f"kappa = {fmt(rep.kappa)}, singularity_margin = {fmt(singularity_margin(rep))}",
          file=out)
    print(f"violations = {len(sol.violations)}", file=out)
    for v in sol.violations:
        print(f"  limb {v.limb_id}: {v.kind.value} by {fmt(v.magnitude)}", file=out)
    return EXIT_OK


def cmd_fk(args, out) -> int:
    geom = load_geometry(args.geom)
    q = _vector(args.q, 4, "--q")
    guess = _pose(args.guess, args.degrees, "--guess")
    pose = fk(geom, q, guess)
    print(f"pose = ({fmt(pose.x)}, {fmt(pose.z)}, {fmt(pose.theta)}, {fmt(pose.psi)})", file=out)
    return EXIT_OK


def cmd_workspace(args, out) -> int:
    geom = load_geometry(args.geom)
    grid = _grid(args)
    wmap = sweep(geom, grid, args.margin_min)
    _write_text(Path(args.out), workspace_csv(wmap))
    _print_metrics("", metrics(wmap), out)
    return EXIT_OK


def cmd_compare(args, out) -> int:
    geom_a = load_geometry(args.geom_a)
    geom_b = load_geometry(args.geom_b)
    grid = _grid(args)
    rep = compare(geom_a, geom_b, grid, args.margin_min)
    report_path = Path(args.out)
    csv_a = report_path.with_name(report_path.stem + "_a.csv")
    csv_b = report_path.with_name(report_path.stem + "_b.csv")
    _write_text(csv_a, workspace_csv(rep.map_a))
    _write_text(csv_b, workspace_csv(rep.map_b))
    doc = {
        "geometry_a": {"name": geom_a.name, "architecture": geom_a.architecture.value},
        "geometry_b": {"name": geom_b.name, "architecture": geom_b.architecture.value},
        "grid": {"x_min": grid.x_min, "x_max": grid.x_max, "z_min": grid.z_min,
                 "z_max": grid.z_max, "step": grid.step, "theta_fixed": grid.theta_fixed,
                 "psi_fixed": grid.psi_fixed},
        "margin_min": args.margin_min,
        "metrics_a": _metrics_dict(rep.metrics_a),
        "metrics_b": _metrics_dict(rep.metrics_b),
        "ordering": rep.ordering.value,
        "area_ratio": rep.area_ratio,
        "maps": {"a": csv_a.name, "b": csv_b.name},
    }
    _write_text(report_path, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    _print_metrics("A: ", rep.metrics_a, out)
    _print_metrics("B: ", rep.metrics_b, out)
    print(f"ordering = {rep.ordering.value}, area_ratio = {fmt(rep.area_ratio)}", file=out)
    return EXIT_OK


_KIND_ALIASES = {"pivot_shift": "pivot", "cpm_flexion": "cpm"}


def _exercise(args):
    d = args.degrees
    kind = _KIND_ALIASES.get(args.kind, args.kind)

    def opt(name, default):
        v = getattr(args, name)
        return default if v is None else v

    def ang(name, default):
        v = getattr(args, name)
        return default if v is None else _angle(v, d)

    if kind == "gait":
        kw = dict(z0=opt("z0", 0.95), A_x=opt("ax", 0.15), A_z=opt("az", 0.10),
                  theta_amp=ang("theta_amp", math.radians(10)), period=opt("period", 2.0))
        return gen_gait(n_samples=opt("n", 101), **kw)
    if kind == "lachman":
        return gen_lachman(z0=opt("z0", 1.0), theta_fix=ang("theta_fix", math.radians(10)),
                           amplitude=opt("amplitude", 0.03), cycles=opt("cycles", 5),
                           n_samples=opt("n", 201), period=opt("period", 5.0))
    if kind == "pivot":
        return gen_pivot_shift(z0=opt("z0", 1.0), psi_amp=ang("psi_amp", math.radians(15)),
                               x_couple=opt("x_couple", 0.02), cycles=opt("cycles", 3),
                               n_samples=opt("n", 181), period=opt("period", 6.0))
    return gen_cpm_flexion(z0=opt("z0", 0.95), theta_min=ang("theta_min", 0.0),
                           theta_max=ang("theta_max", math.radians(45)),
                           period=opt("period", 20.0), n_samples=opt("n", 91))


def cmd_exercise(args, out) -> int:
    traj = _exercise(args)
    geom = load_geometry(args.geom)
    rep = check_feasibility(geom, traj, args.rate_limit, args.margin_min)
    _write_text(Path(args.out), trajectory_csv(traj, rep))
    print(f"kind = {traj.kind.value}, samples = {len(traj.samples)}", file=out)
    print(f"all_feasible = {int(rep.all_feasible)}", file=out)
    print(f"max_kappa = {fmt(rep.max_kappa)}", file=out)
    print(f"max_abs_q_rate = {fmt(rep.max_abs_q_rate)} (limit {fmt(rep.rate_limit)})", file=out)
    if rep.first_infeasible_index is not None:
        print(f"first_infeasible_index = {rep.first_infeasible_index}", file=out)
    return EXIT_OK if rep.all_feasible else EXIT_INFEASIBLE


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="kneepkm", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, geom=True):
        if geom:
            sp.add_argument("--geom", default="g0.json",
                            help="geometry document (file path or shipped g0.json/g1.json)")
        sp.add_argument("--degrees", action="store_true", help="angle flags are in degrees")
        return sp

    sp = common(sub.add_parser("ik", help="inverse kinematics for one pose"))
    sp.add_argument("--pose", required=True, help="x,z,theta,psi")
    sp.set_defaults(func=cmd_ik)

    sp = common(sub.add_parser("fk", help="forward kinematics from actuator values"))
    sp.add_argument("--q", required=True, help="q_c,q_1,q_2,q_3")
    sp.add_argument("--guess", default="0,1.0,0,0", help="x,z,theta,psi starting pose")
    sp.set_defaults(func=cmd_fk)

    def grid_flags(sp):
        sp.add_argument("--x-min", type=float, default=-0.4)
        sp.add_argument("--x-max", type=float, default=0.4)
        sp.add_argument("--z-min", type=float, default=0.55)
        sp.add_argument("--z-max", type=float, default=1.25)
        sp.add_argument("--step", type=float, default=0.01)
        sp.add_argument("--theta", type=float, default=0.0)
        sp.add_argument("--psi", type=float, default=0.0)
        sp.add_argument("--margin-min", type=float, default=MARGIN_MIN)

    sp = common(sub.add_parser("workspace", help="sagittal-plane workspace map"))
    grid_flags(sp)
    sp.add_argument("--out", default="workspace.csv")
    sp.set_defaults(func=cmd_workspace)

    sp = common(sub.add_parser("compare", help="compare two architectures"), geom=False)
    sp.add_argument("--geom-a", required=True)
    sp.add_argument("--geom-b", required=True)
    grid_flags(sp)
    sp.add_argument("--out", default="compare.json")
    sp.set_defaults(func=cmd_compare)

    sp = common(sub.add_parser("exercise", help="generate and check an exercise trajectory"))
    sp.add_argument("--kind", required=True, choices=["gait", "lachman", "pivot", "pivot_shift", "cpm", "cpm_flexion"])
    sp.add_argument("--n", type=int)
    sp.add_argument("--period", type=float)
    sp.add_argument("--z0", type=float)
    sp.add_argument("--ax", type=float, help="gait horizontal amplitude (m)")
    sp.add_argument("--az", type=float, help="gait vertical excursion (m)")
    sp.add_argument("--theta-amp", type=float, help="gait pitch amplitude")
    sp.add_argument("--amplitude", type=float, help="Lachman translation amplitude (m)")
    sp.add_argument("--theta-fix", type=float, help="Lachman fixed pitch")
    sp.add_argument("--cycles", type=int)
    sp.add_argument("--psi-amp", type=float, help="pivot-shift axial rotation amplitude")
    sp.add_argument("--x-couple", type=float, help="pivot-shift coupled translation (m)")
    sp.add_argument("--theta-min", type=float)
    sp.add_argument("--theta-max", type=float)
    sp.add_argument("--rate-limit", type=float, default=RATE_LIMIT)
    sp.add_argument("--margin-min", type=float, default=MARGIN_MIN)
    sp.add_argument("--out", default="trajectory.csv")
    sp.set_defaults(func=cmd_exercise)
    return p


def run(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return args.func(args, out)
    except UsageError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_BAD_INPUT
    except InvalidGeometry as exc:
        print("error: INVALID_GEOMETRY", file=err)
        for prob in exc.problems:
            print(f"  - {prob}", file=err)
        return EXIT_BAD_INPUT
    except InvalidParams as exc:
        print(f"error: INVALID_PARAMS: {exc}", file=err)
        return EXIT_BAD_INPUT
    except GridTooLarge as exc:
        print(f"error: GRID_TOO_LARGE: {exc}", file=err)
        return EXIT_GRID_TOO_LARGE
    except Unreachable as exc:
        print(f"error: UNREACHABLE: {exc}", file=err)
        return EXIT_UNREACHABLE
    except (NoConvergence, SingularJacobian) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=err)
        return EXIT_UNREACHABLE
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_BAD_INPUT


def main(argv: Optional[Sequence[str]] = None) -> None:
    sys.exit(run(argv))
