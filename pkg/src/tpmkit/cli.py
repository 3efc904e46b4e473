"""Command-line entry point.

Exit codes: 0 success, 1 infeasible input (no real solution, singular
configuration), 2 usage errors.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

from . import differential, kinematics, topology, workspace
from .exceptions import IoFailure, KinematicsError, ParamsError
from .model import ActuatedJoints, PlatformPose, StructuralParams, load_params

# options whose values may legitimately start with '-'
VALUE_FLAGS = {"--joints", "--pose", "--branch", "--joint-range", "--rates"}


class UsageError(Exception):
    pass


def _attach_values(argv):
    out = []
    it = iter(argv)
    for tok in it:
        if tok in VALUE_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def _floats(text, count, flag):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"{flag}: expected {count} comma-separated numbers, got {text!r}") from None
    if len(vals) != count or not all(math.isfinite(v) for v in vals):
        raise UsageError(f"{flag}: expected {count} comma-separated finite numbers, got {text!r}")
    return vals


def _signs(text, count, flag):
    vals = _floats(text, count, flag)
    if any(v not in (1.0, -1.0) for v in vals):
        raise UsageError(f"{flag}: each sign must be +1 or -1, got {text!r}")
    return [int(v) for v in vals]


def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--params", help="parameter file (JSON or YAML flat map); default: prototype values")
    common.add_argument("--format", default="text", help="text, csv, json (workspace/surface also: ply)")
    common.add_argument("--out", help="write output to this path instead of stdout")
    common.add_argument("--degrees", action="store_true", help="report angles in degrees in csv/json output")
    common.add_argument("--decimals", type=int, default=4)

    parser = argparse.ArgumentParser(prog="tpmkit", description="Kinematics of the 3-DOF translational parallel manipulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fk", parents=[common], help="forward kinematics")
    p.add_argument("--joints", required=True, help="yA1,yA2,yA3 (mm)")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--branch", help="m,n (default +1,+1)")
    g.add_argument("--all", action="store_true", help="all four assembly modes")

    p = sub.add_parser("ik", parents=[common], help="inverse kinematics")
    p.add_argument("--pose", required=True, help="x,y,z (mm)")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--branch", help="v,w1,w2,w3")
    g.add_argument("--all", action="store_true", help="all sixteen sign combinations")

    for name, helptext in (("jac", "Jacobian matrices"), ("singularity", "singularity classification")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--joints", required=True, help="yA1,yA2,yA3 (mm)")
        p.add_argument("--pose", help="x,y,z (mm); default: forward kinematics on --branch")
        p.add_argument("--branch", help="m,n used when --pose is absent (default +1,+1)")
        p.add_argument("--tol", type=float, default=differential.SINGULARITY_TOL)
        if name == "jac":
            p.add_argument("--rates", help="joint rates for the velocity map, mm/s")

    for name in ("workspace", "surface"):
        p = sub.add_parser(name, parents=[common], help=f"{name} sampling")
        p.add_argument("--bounds", nargs="+", metavar="AXIS:MIN:MAX", help="e.g. x:-150:150 y:-200:200 z:380:550; omitted axes keep defaults")
        p.add_argument("--res", help="node counts per axis, e.g. 61,81,35")
        p.add_argument("--pitch", type=float, help="grid spacing (mm); overrides --res")
        if name == "workspace":
            p.add_argument("--joint-range", default=None, help="MIN:MAX slider limits or 'none' (default +-a/2)")
            p.add_argument("--project", choices=["XZ", "YZ", "XY"], help="emit the 2D projection of inside points")
            p.add_argument("--jobs", type=int, default=1)
        else:
            p.add_argument("--kind", choices=["serial", "parallel"], default="parallel")
            p.add_argument("--space", choices=["workspace", "jointspace"], default="workspace")
            p.add_argument("--factor", action="append", choices=list(workspace.SERIAL_FACTORS))
            p.add_argument("--branch", help="m,n for jointspace or v,w1,w2,w3 for workspace")

    sub.add_parser("topology", parents=[common], help="POC / DOF / coupling-degree report")
    return parser


class _Writer:
    def __init__(self, args):
        self.decimals = args.decimals
        self.degrees = args.degrees

    def num(self, v):
        if v is None or (isinstance(v, float) and math.isnan(v)):
            return "nan"
        return f"{v:.{self.decimals}f}"

    def angle(self, rad):
        return math.degrees(rad) if self.degrees else rad


def _table(rows):
    widths = [max(len(str(r[i])) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(str(c).rjust(w) for c, w in zip(r, widths)) for r in rows) + "\n"


def _csv(rows):
    return "\n".join(",".join(str(c) for c in r) for r in rows) + "\n"


def _json(records):
    return json.dumps(records, indent=2) + "\n"


def _load(args) -> StructuralParams:
    if args.params:
        return load_params(args.params)
    return StructuralParams()


def _cmd_fk(args, params, w: _Writer):
    joints = ActuatedJoints(*_floats(args.joints, 3, "--joints"))
    if args.all:
        sols = kinematics.forward_all(joints, params)
    else:
        m, n = _signs(args.branch, 2, "--branch") if args.branch else (1, 1)
        sols = [kinematics.forward(joints, params, m, n)]
    records = []
    for i, s in enumerate(sols, 1):
        rec = {"no": i, "m": s.branch.m, "n": s.branch.n, "status": s.status}
        if s.ok:
            rec.update(zip("xyz", s.pose))
            rec["alpha"], rec["beta"] = s.angles.alpha, s.angles.beta
        records.append(rec)

    code = 0 if any(s.ok for s in sols) else 1
    if not args.all and not sols[0].ok:
        code = 1
    if args.format == "json":
        for rec in records:
            for k in ("alpha", "beta"):
                if k in rec:
                    rec[k] = w.angle(rec[k])
        return _json(records), code
    if args.format == "csv":
        unit = "deg" if w.degrees else "rad"
        rows = [("no", "m", "n", "x", "y", "z", f"alpha_{unit}", f"beta_{unit}", "status")]
        for r in records:
            vals = [w.num(r.get(k)) for k in "xyz"] + [w.num(w.angle(r[k])) if k in r else "nan" for k in ("alpha", "beta")]
            rows.append((r["no"], f"{r['m']:+d}", f"{r['n']:+d}", *vals, r["status"]))
        return _csv(rows), code
    rows = [("NO.", "m", "n", "x", "y", "z", "alpha(rad)", "alpha(deg)", "beta(rad)", "beta(deg)", "status")]
    for r in records:
        ang = []
        for k in ("alpha", "beta"):
            ang += [w.num(r[k]), w.num(math.degrees(r[k]))] if k in r else ["nan", "nan"]
        rows.append((r["no"], f"{r['m']:+d}", f"{r['n']:+d}", *[w.num(r.get(k)) for k in "xyz"], *ang, r["status"]))
    return _table(rows), code


def _cmd_ik(args, params, w: _Writer):
    pose = PlatformPose(*_floats(args.pose, 3, "--pose"))
    if args.branch:
        sols = [kinematics.inverse(pose, params, *_signs(args.branch, 4, "--branch"))]
    else:
        sols = kinematics.inverse_all(pose, params)
        if not args.all:
            sols = [s for s in sols if s.ok]
    code = 0 if any(s.ok for s in sols) else 1
    if not sols:
        return "no feasible inverse solution (all branches complex or violate yA2 > yA1)\n", 1
    records = []
    for i, s in enumerate(sols, 1):
        rec = {"no": i, "v": s.branch.v, "w1": s.branch.w1, "w2": s.branch.w2, "w3": s.branch.w3, "status": s.status}
        if s.real:
            rec.update(zip(("yA1", "yA2", "yA3"), s.joints))
        records.append(rec)
    if args.format == "json":
        return _json(records), code
    if args.format == "csv":
        rows = [("no", "v", "w1", "w2", "w3", "yA1", "yA2", "yA3", "status")]
        for r in records:
            rows.append((r["no"], *(f"{r[k]:+d}" for k in ("v", "w1", "w2", "w3")), *(w.num(r.get(k)) for k in ("yA1", "yA2", "yA3")), r["status"]))
        return _csv(rows), code
    # transposed like a printed solution table: one column per solution
    rows = [("No.", *(str(r["no"]) for r in records))]
    for k in ("v", "w1", "w2", "w3"):
        rows.append((k, *(f"{r[k]:+d}" for r in records)))
    for k in ("yA1", "yA2", "yA3"):
        rows.append((k, *(w.num(r.get(k)) for r in records)))
    rows.append(("status", *(r["status"] for r in records)))
    return _table(rows), code


def _configuration(args, params):
    joints = ActuatedJoints(*_floats(args.joints, 3, "--joints"))
    if args.pose:
        pose = PlatformPose(*_floats(args.pose, 3, "--pose"))
        angles = differential.configuration_from_pose(joints, pose, params)
        return joints, pose, angles
    m, n = _signs(args.branch, 2, "--branch") if args.branch else (1, 1)
    sol = kinematics.forward(joints, params, m, n)
    if not sol.ok:
        raise KinematicsError(f"forward kinematics branch ({m:+d},{n:+d}) infeasible: {sol.status}")
    return joints, sol.pose, sol.angles


def _matrix_rows(name, M, w):
    return [(name if i == 0 else "", *(w.num(v) for v in row)) for i, row in enumerate(M)]


def _cmd_jac(args, params, w: _Writer):
    joints, pose, angles = _configuration(args, params)
    jp = differential.jacobians(joints, pose, params, angles)
    xdot = None
    if args.rates:
        xdot = differential.velocity_forward(jp, _floats(args.rates, 3, "--rates"), args.tol)
    if args.format == "json":
        rec = {
            "pose": list(pose),
            "A": jp.A.tolist(),
            "B": jp.B.tolist(),
            "detA": jp.detA,
            "detB": jp.detB,
            "normalized_detA": jp.normalized_detA,
            "normalized_detB": jp.normalized_detB,
            "alpha": w.angle(angles.alpha),
            "beta": w.angle(angles.beta),
        }
        if xdot is not None:
            rec["platform_velocity"] = xdot.tolist()
        return _json(rec), 0
    if args.format == "csv":
        rows = [("matrix", "row", "c1", "c2", "c3")]
        for name, M in (("A", jp.A), ("B", jp.B)):
            rows += [(name, i + 1, *(w.num(v) for v in r)) for i, r in enumerate(M)]
        rows += [("detA", "", w.num(jp.detA), "", ""), ("detB", "", w.num(jp.detB), "", "")]
        return _csv(rows), 0
    out = [f"pose: x={w.num(pose.x)} y={w.num(pose.y)} z={w.num(pose.z)}"]
    out.append(
        f"alpha = {w.num(angles.alpha)} rad ({w.num(math.degrees(angles.alpha))} deg), "
        f"beta = {w.num(angles.beta)} rad ({w.num(math.degrees(angles.beta))} deg)"
    )
    text = "\n".join(out) + "\n" + _table(_matrix_rows("A", jp.A, w) + _matrix_rows("B", jp.B, w))
    text += f"det(A) = {jp.detA:.6e}  normalised = {jp.normalized_detA:.6e}\n"
    text += f"det(B) = {jp.detB:.6e}  normalised = {jp.normalized_detB:.6e}\n"
    if xdot is not None:
        text += "platform velocity: " + ", ".join(w.num(v) for v in xdot) + "\n"
    return text, 0


def _cmd_singularity(args, params, w: _Writer):
    joints, pose, angles = _configuration(args, params)
    report = differential.classify(differential.jacobians(joints, pose, params, angles), args.tol)
    if args.format == "json":
        rec = {
            "kind": report.kind,
            "serial_cases": sorted(report.serial_cases),
            "parallel_cases": sorted(report.parallel_cases),
            "margins": report.margins,
        }
        return _json(rec), 0
    if args.format == "csv":
        rows = [("key", "value"), ("kind", report.kind)]
        rows.append(("serial_cases", ";".join(sorted(report.serial_cases))))
        rows.append(("parallel_cases", ";".join(sorted(report.parallel_cases))))
        rows += [(k, f"{v:.6e}") for k, v in report.margins.items()]
        return _csv(rows), 0
    return "\n".join(report.lines()) + "\n", 0


AXES = {"x": 0, "y": 1, "z": 2, "ya1": 0, "ya2": 1, "ya3": 2}


def _grid(args, space, default_bounds, default_res):
    bounds = list(default_bounds)
    if args.bounds:
        for tok in args.bounds:
            parts = tok.split(":")
            if len(parts) != 3 or parts[0].lower() not in AXES:
                raise UsageError(f"--bounds: expected AXIS:MIN:MAX, got {tok!r}")
            try:
                bounds[AXES[parts[0].lower()]] = (float(parts[1]), float(parts[2]))
            except ValueError:
                raise UsageError(f"--bounds: non-numeric limits in {tok!r}") from None
    try:
        if args.pitch:
            return workspace.GridSpec.from_pitch(bounds, args.pitch, space)
        res = [int(v) for v in _floats(args.res, 3, "--res")] if args.res else default_res
        return workspace.GridSpec.from_bounds(bounds, res, space)
    except ValueError as exc:
        raise UsageError(f"invalid grid: {exc}") from None


def _check_format(fmt, allowed):
    if fmt not in allowed:
        raise UsageError(f"--format must be one of {', '.join(allowed)}, got {fmt!r}")


def _cmd_workspace(args, params, w: _Writer):
    _check_format(args.format, ("text", "csv", "json", "ply"))
    grid = _grid(args, "pose", workspace.NOMINAL_BOUNDS, workspace.DEFAULT_RESOLUTION)
    limits = workspace.WorkspaceLimits.from_params(params)
    if args.joint_range:
        if args.joint_range.lower() == "none":
            limits = workspace.WorkspaceLimits.from_params(params, joint_range=None)
        else:
            parts = args.joint_range.split(":")
            try:
                lo, hi = float(parts[0]), float(parts[1])
            except (ValueError, IndexError):
                raise UsageError(f"--joint-range: expected MIN:MAX or none, got {args.joint_range!r}") from None
            limits = workspace.WorkspaceLimits.from_params(params, joint_range=(lo, hi))
    scan = workspace.scan_workspace(params, grid, limits, n_jobs=args.jobs)
    if args.project:
        proj = workspace.project(scan.inside_poses(), args.project, resolution=min(grid.pitch) / 2)
        if args.format == "text":
            return f"{len(proj)} projected points on {args.project}\n", 0
        cols = tuple(args.project.lower())
        if args.format == "ply":
            raise UsageError("PLY needs 3D points; use csv or json for projections")
        return workspace.export(proj, "json-lines" if args.format == "json" else "csv", columns=cols).decode(), 0
    if args.format == "text":
        inside = int(scan.inside.sum())
        lines = [
            f"grid: {' x '.join(map(str, grid.shape))} nodes, pitch {', '.join(w.num(p) for p in grid.pitch)} mm",
            f"inside: {inside} of {len(scan)}",
        ]
        if inside:
            pts = scan.inside_poses()
            for i, name in enumerate("xyz"):
                lines.append(f"{name} range: [{w.num(pts[:, i].min())}, {w.num(pts[:, i].max())}]")
        return "\n".join(lines) + "\n", 0
    fmt = {"json": "json-lines"}.get(args.format, args.format)
    return workspace.export(scan, fmt).decode(), 0


def _cmd_surface(args, params, w: _Writer):
    _check_format(args.format, ("text", "csv", "json", "ply"))
    if args.space == "jointspace":
        grid = _grid(args, "joint", ((-180.0, 180.0),) * 3, (37, 37, 37))
        branch = _signs(args.branch, 2, "--branch") if args.branch else None
    else:
        grid = _grid(args, "pose", workspace.NOMINAL_BOUNDS, workspace.DEFAULT_RESOLUTION)
        branch = _signs(args.branch, 4, "--branch") if args.branch else None
    factors = tuple(args.factor) if args.factor else workspace.SERIAL_FACTORS
    patch = workspace.singular_surface(params, grid, args.kind, args.space, branch, factors)
    if args.format == "text":
        lines = [f"{args.kind} surface in {args.space}: {len(patch)} points"]
        for label in sorted(set(patch.labels)):
            lines.append(f"  {label}: {int((patch.labels == label).sum())}")
        lines.append(f"skipped nodes: {patch.skipped}, rejected refinements: {patch.rejected}")
        return "\n".join(lines) + "\n", 0
    fmt = {"json": "json-lines"}.get(args.format, args.format)
    return workspace.export(patch, fmt).decode(), 0


def _cmd_topology(args, params, w: _Writer):
    report = topology.tpm_topology()
    if args.format == "json":
        return _json(report.to_dict()), 0
    if args.format == "csv":
        rows = [("key", "value"), ("xi", ";".join(map(str, report.xi_per_loop))), ("F", report.F)]
        rows += [("delta", ";".join(f"{d:+d}" for d in report.delta_per_loop)), ("kappa", report.kappa)]
        rows.append(("platform_poc", f"t{report.poc_platform.dim_translation} r{report.poc_platform.dim_rotation}"))
        return _csv(rows), 0
    return "\n".join(report.lines()) + "\n", 0


COMMANDS = {
    "fk": _cmd_fk,
    "ik": _cmd_ik,
    "jac": _cmd_jac,
    "singularity": _cmd_singularity,
    "workspace": _cmd_workspace,
    "surface": _cmd_surface,
    "topology": _cmd_topology,
}


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = _build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(_attach_values(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command not in ("workspace", "surface"):
        try:
            _check_format(args.format, ("text", "csv", "json"))
        except UsageError as exc:
            parser.print_usage(stderr)
            print(f"error: {exc}", file=stderr)
            return 2
    try:
        params = _load(args)
        text, code = COMMANDS[args.command](args, params, _Writer(args))
    except (UsageError, ParamsError) as exc:
        parser.print_usage(stderr)
        print(f"error: {exc}", file=stderr)
        return 2
    except KinematicsError as exc:
        print(f"infeasible: {exc}", file=stderr)
        return 1
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: {IoFailure(exc)}", file=stderr)
            return 1
    else:
        stdout.write(text)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
