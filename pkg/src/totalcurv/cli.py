"""Command line interface: ``totalcurv <command> ...``.

Metric values go to standard output as ``key=value`` lines; the resolved
configuration and diagnostics go to standard error. Exit status is 0 on
success, 2 for usage or validation errors and 3 for pipeline failures.
"""

import argparse
import json
import logging
import os
import sys
import warnings

import numpy as np

from . import __version__
from .curvature import mesh_total_curvature, vertex_normals_area_weighted
from .decimation import DecimationConfig, decimate
from .exceptions import ParseError, SizeMismatch, TargetUnreachable, TotalCurvError
from .formats import (
    PlyPayload, colorize, read_cloud, read_csv_header, read_mesh, read_ply, write_cloud,
    write_csv, write_obj, write_ply,
)
from .geometry import PointCloud, TriangleMesh
from .metrics import hausdorff_report, rmse
from .pointcloud import estimate_normals_pca, orient_normals_mst, pointcloud_total_curvature
from .repro import PCD_HEADER, TABLE3_HEADER, markdown_table, pcd_torus, table3
from .sampling import DEFAULT_SEED, SamplingConfig, sample
from .shapes import (
    ParametricSurface, Sphere, Torus, figure_eight, gt_per_triangle, icosphere, torus_grid,
    torus_knot, tube_knot,
)

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 2, 3
MIN_PCD_K = 6
SIDECAR_SUFFIX = ".surface.json"

logger = logging.getLogger("totalcurv")


class UsageError(Exception):
    """Bad flag combination detected after argument parsing."""


def _emit(**values):
    for key, value in values.items():
        if isinstance(value, (float, np.floating)):
            value = "%.10g" % value
        print(f"{key}={value}")


_OUTPUT_KEYS = ("func", "out", "csv", "ply", "out_dir")


def _config_line(args, full=False):
    """JSON of the resolved flags; output paths are left out of file headers
    so identical runs write identical files."""
    skip = ("func",) if full else _OUTPUT_KEYS
    cfg = {k: v for k, v in vars(args).items() if k not in skip}
    return "config " + json.dumps(cfg, sort_keys=True, default=str)


# ---------------------------------------------------------------- sidecars

def write_sidecar(path, surface, mesh):
    with open(path + SIDECAR_SUFFIX, "w", encoding="ascii") as fh:
        json.dump({"surface": surface.to_dict(), "uv": mesh.vertex_uv.tolist()}, fh)


def read_sidecar(mesh_path, explicit=None):
    """Surface description and per-vertex uv stored next to a generated mesh."""
    path = explicit or mesh_path + SIDECAR_SUFFIX
    if not os.path.exists(path):
        raise UsageError(f"no surface sidecar at {path}; "
                         "analytic quantities need a mesh written by 'gen'")
    with open(path, encoding="ascii") as fh:
        data = json.load(fh)
    return ParametricSurface.from_dict(data["surface"]), np.asarray(data["uv"])


def _with_uv(mesh, uv):
    if uv.shape != (mesh.n_vertices, 2):
        raise UsageError("sidecar uv does not match the mesh vertex count")
    return TriangleMesh(mesh.vertices, mesh.faces, mesh.vertex_normals, uv)


# ---------------------------------------------------------------- commands

def cmd_gen(args):
    if args.kind == "sphere":
        mesh, surface = icosphere(args.subdiv, args.radius), Sphere(args.radius)
    elif args.kind == "torus":
        mesh, surface = torus_grid(args.R, args.r, args.grid, args.grid), Torus(args.R, args.r)
    else:
        curve = torus_knot(2, 3) if args.knot == "torus23" else figure_eight()
        mesh, surface = tube_knot(curve, args.tube_radius, args.nu, args.nv)
    write_obj(args.out, mesh, [_config_line(args)])
    write_sidecar(args.out, surface, mesh)
    _emit(vertices=mesh.n_vertices, faces=mesh.n_faces, out=args.out)
    return EXIT_OK


def cmd_sample(args):
    mesh = read_mesh(args.mesh)
    count = args.count if args.count is not None else (2000 if args.mode == "sparse" else 20000)
    cfg = SamplingConfig(args.mode, count, args.seed, args.oversample)
    cloud = sample(mesh, cfg)
    if args.project:
        surface, _ = read_sidecar(args.mesh, args.surface)
        pos, nrm, _ = surface.project(cloud.points)
        cloud = PointCloud(pos, nrm)
    write_cloud(args.out, cloud, comments=[_config_line(args)])
    _emit(points=len(cloud), out=args.out)
    return EXIT_OK


def _mesh_normals(args, mesh):
    if args.normals == "auto":
        return vertex_normals_area_weighted(mesh)
    if args.normals == "analytic":
        surface, uv = read_sidecar(args.mesh, args.surface)
        return surface.normal(uv[:, 0], uv[:, 1])
    given = read_ply(args.normals)
    if given.normals is None or len(given.normals) != mesh.n_vertices:
        raise UsageError(f"{args.normals} must hold one normal per mesh vertex")
    return given.normals / np.linalg.norm(given.normals, axis=1, keepdims=True)


def cmd_curvature_mesh(args):
    mesh = read_mesh(args.mesh)
    normals = _mesh_normals(args, mesh)
    field = mesh_total_curvature(mesh, normals)
    gt = None
    sidecar = args.surface or args.mesh + SIDECAR_SUFFIX
    if os.path.exists(sidecar):
        surface, uv = read_sidecar(args.mesh, args.surface)
        gt = gt_per_triangle(_with_uv(mesh, uv), surface)
    if args.csv:
        if args.per == "triangle":
            header = ["id", "kappa", "area"] + (["gt_kappa"] if gt is not None else [])
            cols = [field.per_triangle, field.areas]
            cols += [gt.per_triangle] if gt is not None else []
        else:
            header = ["id", "density"] + (["gt_density"] if gt is not None else [])
            cols = [field.per_vertex_density]
            cols += [gt.per_vertex_density] if gt is not None else []
        write_csv(args.csv, header, [(i, *vals) for i, vals in enumerate(zip(*cols))])
    if args.ply:
        q = field.per_vertex_density
        write_ply(args.ply, PlyPayload(mesh.vertices, normals, q,
                                       colorize(q, args.clip_lo, args.clip_hi), mesh.faces),
                  [_config_line(args)])
    out = {"faces": mesh.n_faces, "total": float(field.per_triangle.sum()),
           "degenerate": field.n_degenerate}
    if gt is not None:
        out["rmse_per_triangle"] = rmse(field.per_triangle, gt.per_triangle)
        out["rmse_vertex_density"] = rmse(field.per_vertex_density, gt.per_vertex_density)
    _emit(**out)
    return EXIT_OK


def cmd_curvature_pcd(args):
    if args.k < MIN_PCD_K:
        raise UsageError(f"--k must be at least {MIN_PCD_K}")
    cloud = read_cloud(args.cloud)
    if args.normals == "est":
        normals = orient_normals_mst(cloud.points,
                                     estimate_normals_pca(cloud.points, args.k), args.k)
    else:
        if cloud.normals is None:
            raise UsageError(f"{args.cloud} carries no normals; use --normals est")
        normals = cloud.normals
    density, failed = pointcloud_total_curvature(cloud.points, normals, args.k,
                                                 return_failures=True)
    print(f"failures={int(failed.sum())} of {len(density)}", file=sys.stderr)
    if args.csv:
        write_csv(args.csv, ["id", "density"], list(enumerate(density)))
    if args.ply:
        write_ply(args.ply, PlyPayload(cloud.points, normals, density,
                                       colorize(density, args.clip_lo, args.clip_hi)),
                  [_config_line(args)])
    _emit(points=len(density), failures=int(failed.sum()), mean=float(density.mean()))
    if failed.all():
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_decimate(args):
    mesh = read_mesh(args.mesh)
    weighted = args.curvature_weight == "on"
    weights = None
    if weighted:
        weights = mesh_total_curvature(mesh, vertex_normals_area_weighted(mesh)).per_vertex_density
    cfg = DecimationConfig(args.method.replace("-", "_"), args.target_faces, weighted)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", TargetUnreachable)
        out, info = decimate(mesh, weights, cfg)
    write_obj(args.out, out, [_config_line(args)])
    _emit(faces=out.n_faces, vertices=out.n_vertices, collapses=len(info.collapses),
          target_reached=info.target_reached, out=args.out)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return EXIT_OK if info.target_reached else EXIT_RUNTIME


def _csv_column(path, column):
    header, data = read_csv_header(path)
    if column is None:
        column = header[1] if len(header) > 1 else header[0]
    if column not in header:
        raise UsageError(f"{path} has no column {column!r}; columns are {header}")
    return data[:, header.index(column)]


def cmd_eval_rmse(args):
    a = _csv_column(args.est, args.est_column)
    b = _csv_column(args.gt, args.gt_column)
    if len(a) != len(b):
        raise SizeMismatch(f"{args.est} has {len(a)} rows, {args.gt} has {len(b)}")
    _emit(rmse=rmse(a, b))
    return EXIT_OK


def cmd_eval_hausdorff(args):
    r = hausdorff_report(read_mesh(args.a), read_mesh(args.b), args.samples, args.seed)
    _emit(rms=r.hausdorff_rms, max=r.hausdorff_max, diagonal=r.diagonal,
          rms_normalized=r.hausdorff_rms_normalized,
          max_normalized=r.hausdorff_max_normalized)
    return EXIT_OK


def cmd_repro(args):
    os.makedirs(args.out_dir, exist_ok=True)
    if args.scenario == "table3":
        header, rows = TABLE3_HEADER, table3(args.R, args.r)
    else:
        header, rows = PCD_HEADER, pcd_torus(args.n_dense, args.n_sparse, args.seed)
    stem = os.path.join(args.out_dir, args.scenario)
    write_csv(stem + ".csv", header, rows)
    with open(stem + ".md", "w", encoding="ascii", newline="\n") as fh:
        fh.write(markdown_table(header, rows))
    sys.stderr.write(markdown_table(header, rows))
    for row in rows:
        if args.scenario == "table3":
            tag = f"{row[1]}_{row[2].replace('=', '')}"
            print(f"{tag}_rmse_per_triangle={row[4]:.10g}")
            print(f"{tag}_rmse_vertex_density={row[5]:.10g}")
        else:
            print(f"{row[1]}_{row[2]}_rmse={row[5]:.10g}")
    _emit(csv=stem + ".csv", markdown=stem + ".md")
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _at_least_four(text):
    value = int(text)
    if value < 4:
        raise argparse.ArgumentTypeError(f"a closed mesh needs at least 4 faces, got {text}")
    return value


def _positive_float(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def _above_one(text):
    value = float(text)
    if not value > 1:
        raise argparse.ArgumentTypeError(f"expected a number above 1, got {text}")
    return value


def _percent(text):
    value = float(text)
    if not 0 <= value <= 100:
        raise argparse.ArgumentTypeError(f"expected a percentage, got {text}")
    return value


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=_positive_int, default=1,
                        help="parallelism cap (results do not depend on it)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="totalcurv", description="Total curvature estimation on meshes and point clouds.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate an analytic test mesh")
    gen_sub = gen.add_subparsers(dest="kind", required=True)
    g = gen_sub.add_parser("sphere", parents=[common])
    g.add_argument("--subdiv", type=int, required=True)
    g.add_argument("--radius", type=_positive_float, default=1.0)
    g.add_argument("--out", required=True)
    g = gen_sub.add_parser("torus", parents=[common])
    g.add_argument("--R", type=_positive_float, default=2.0)
    g.add_argument("--r", type=_positive_float, default=1.0)
    g.add_argument("--grid", type=int, required=True, help="N for an N x N grid")
    g.add_argument("--out", required=True)
    g = gen_sub.add_parser("knot", parents=[common])
    g.add_argument("--kind", dest="knot", choices=["torus23", "fig8"], default="torus23")
    g.add_argument("--tube-radius", type=_positive_float, default=0.25)
    g.add_argument("--nu", type=int, default=400)
    g.add_argument("--nv", type=int, default=40)
    g.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_gen)

    s = sub.add_parser("sample", parents=[common], help="sample a point cloud from a mesh")
    s.add_argument("mesh")
    s.add_argument("--mode", choices=["uniform", "nonuniform", "sparse"], default="uniform")
    s.add_argument("--count", type=_positive_int,
                   help="target size (default 20000, or 2000 for sparse)")
    s.add_argument("--oversample", type=_above_one, default=2.0)
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)
    s.add_argument("--project", action="store_true",
                   help="snap samples onto the analytic surface and store exact normals")
    s.add_argument("--surface", help="surface sidecar (default <mesh>.surface.json)")
    s.add_argument("--out", required=True, help=".ply or .xyz")
    s.set_defaults(func=cmd_sample)

    c = sub.add_parser("curvature", help="estimate total curvature")
    c_sub = c.add_subparsers(dest="input_kind", required=True)
    cm = c_sub.add_parser("mesh", parents=[common])
    cm.add_argument("mesh")
    cm.add_argument("--normals", default="auto",
                    help="auto (area weighted), analytic (needs sidecar) or a PLY file")
    cm.add_argument("--per", choices=["triangle", "vertex"], default="triangle")
    cm.add_argument("--surface", help="surface sidecar (default <mesh>.surface.json)")
    cm.set_defaults(func=cmd_curvature_mesh)
    cp = c_sub.add_parser("pcd", parents=[common])
    cp.add_argument("cloud")
    cp.add_argument("--k", type=int, default=20)
    cp.add_argument("--normals", choices=["est", "file"], default="est")
    cp.set_defaults(func=cmd_curvature_pcd)
    for p in (cm, cp):
        p.add_argument("--csv")
        p.add_argument("--ply")
        p.add_argument("--clip-lo", type=_percent, default=1.0)
        p.add_argument("--clip-hi", type=_percent, default=99.0)

    d = sub.add_parser("decimate", parents=[common], help="simplify a mesh")
    d.add_argument("mesh")
    d.add_argument("--method", choices=["qslim", "edge-midpoint"], default="qslim")
    d.add_argument("--target-faces", type=_at_least_four, required=True)
    d.add_argument("--curvature-weight", choices=["on", "off"], default="on")
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_decimate)

    e = sub.add_parser("eval", help="compare results")
    e_sub = e.add_subparsers(dest="metric", required=True)
    er = e_sub.add_parser("rmse", parents=[common])
    er.add_argument("est")
    er.add_argument("gt")
    er.add_argument("--est-column", help="column name (default: first value column)")
    er.add_argument("--gt-column", help="column name (default: first value column)")
    er.set_defaults(func=cmd_eval_rmse)
    eh = e_sub.add_parser("hausdorff", parents=[common])
    eh.add_argument("a")
    eh.add_argument("b")
    eh.add_argument("--samples", type=_positive_int, default=100_000)
    eh.add_argument("--seed", type=int, default=DEFAULT_SEED)
    eh.set_defaults(func=cmd_eval_hausdorff)

    r = sub.add_parser("repro", parents=[common], help="rerun a reference experiment")
    r.add_argument("scenario", choices=["table3", "pcd-torus"])
    r.add_argument("--out-dir", default=".")
    r.add_argument("--seed", type=int, default=DEFAULT_SEED)
    r.add_argument("--R", type=_positive_float, default=2.0, help="torus major radius (table3)")
    r.add_argument("--r", type=_positive_float, default=1.0, help="torus minor radius (table3)")
    r.add_argument("--n-dense", type=_positive_int, default=20000)
    r.add_argument("--n-sparse", type=_positive_int, default=2000)
    r.set_defaults(func=cmd_repro)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    print(_config_line(args, full=True), file=sys.stderr)
    try:
        return args.func(args)
    except (UsageError, ParseError, SizeMismatch) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TotalCurvError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
