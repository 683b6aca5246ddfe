"""Command-line interface.

Subcommands: forward, inverse, roundtrip, gallery, diagnose.  Every command
writes a machine-readable report into the output directory; the exit code is
0 when all residual gates pass, 1 on a gate failure, 2 on validation errors.
SCATTER_NUM_THREADS caps the numerical thread pools.
"""

import argparse
import json
import os
import sys


def _cap_threads():
    cap = os.environ.get("SCATTER_NUM_THREADS")
    if cap:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
            os.environ.setdefault(var, cap)


_cap_threads()

import numpy as np  # noqa: E402  (thread caps must precede the import)

from . import gallery, io  # noqa: E402
from .config import RunConfig  # noqa: E402
from .errors import JacscatError, ValidationError  # noqa: E402
from .forward import (density_scattering_consistency, extract_scattering,  # noqa: E402
                      jost_solutions, jump_relation_check, wronskian_residual)
from .harmonic import CircleGrid  # noqa: E402
from .inverse import (ReflectionInput, reconstruct, roundtrip_error,  # noqa: E402
                      uniqueness_defect)
from .jacobi import interior_theta_nodes, spectral_density  # noqa: E402

EXIT_OK = 0
EXIT_GATE = 1
EXIT_INVALID = 2


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid", type=int, default=1024, help="circle grid size")
    common.add_argument("--trunc", type=int, default=256, help="matrix truncation")
    common.add_argument("--eps", type=str, default=None,
                        help="comma-separated regularization ladder")
    common.add_argument("--tol-unitarity", type=float, default=1e-10)
    common.add_argument("--tol-roundtrip", type=float, default=1e-6)
    common.add_argument("--tol-defect", type=float, default=1e-6)
    common.add_argument("--s-floor", type=float, default=1e-8)
    common.add_argument("--log-floor", type=float, default=50.0)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", type=str, default="out")

    ap = argparse.ArgumentParser(prog="jacscat",
                                 description="direct and inverse scattering "
                                             "for Jacobi matrices on [-2, 2]")
    sub = ap.add_subparsers(dest="command", required=True)

    fw = sub.add_parser("forward", parents=[common],
                        help="Jacobi window -> scattering data")
    fw.add_argument("jacobi_file")

    iv = sub.add_parser("inverse", parents=[common],
                        help="reflection coefficient -> Jacobi window")
    iv.add_argument("scattering_file")
    iv.add_argument("--half-width", type=int, default=None)

    rt = sub.add_parser("roundtrip", parents=[common],
                        help="forward then inverse, compare")
    rt.add_argument("jacobi_file")

    ga = sub.add_parser("gallery", parents=[common],
                        help="generate bundled input files")
    ga.add_argument("kind", choices=["free", "single-site", "random-window",
                                     "bernstein-szego", "example-nonunique"])
    ga.add_argument("--coupling", type=float, default=0.7)
    ga.add_argument("--width", type=int, default=4)
    ga.add_argument("--magnitude", type=float, default=0.25)
    ga.add_argument("--poly", type=str, default="1,0,0.3")
    ga.add_argument("--a-plus", type=float, default=0.5)
    ga.add_argument("--a-minus", type=float, default=0.5)
    ga.add_argument("--delta-degree", type=int, default=2)

    dg = sub.add_parser("diagnose", parents=[common],
                        help="equivalence panel for an input file")
    dg.add_argument("input_file")
    return ap


def config_from_args(args):
    kw = dict(grid_size=args.grid, truncation=args.trunc,
              tol_unitarity=args.tol_unitarity, tol_roundtrip=args.tol_roundtrip,
              tol_defect=args.tol_defect, s_floor=args.s_floor,
              log_floor=args.log_floor, output_dir=args.out, seed=args.seed)
    if args.eps:
        kw["eps_ladder"] = tuple(float(v) for v in args.eps.split(","))
    return RunConfig(**kw)


def _forward_bundle(J, cfg):
    grid = CircleGrid(cfg.grid_size)
    jost = jost_solutions(J, grid)
    sm = extract_scattering(jost)
    theta = interior_theta_nodes(cfg.grid_size // 2, guard=2)
    density = spectral_density(J, theta)
    inv = sm.invariant_report()
    report = {
        "unitarity_plus": inv["unitarity_plus"],
        "unitarity_minus": inv["unitarity_minus"],
        "compatibility": inv["compatibility"],
        "symmetry": inv["symmetry"],
        "s_at_zero": inv["s_at_zero"],
        "wronskian": wronskian_residual(jost),
        "jump": jump_relation_check(jost, sm)["jump"],
        "density_consistency": density_scattering_consistency(J, jost, sm),
        "flagged_nodes": list(sm.flagged_nodes),
    }
    gates = (max(inv["unitarity_plus"], inv["unitarity_minus"],
                 inv["compatibility"]) <= cfg.tol_unitarity
             and report["wronskian"] <= 1e-9
             and report["jump"] <= 1e-9
             and report["density_consistency"]["passed"])
    report["passed"] = bool(gates)
    return sm, density, report


def cmd_forward(args, cfg):
    J = io.load_jacobi(args.jacobi_file)
    sm, density, report = _forward_bundle(J, cfg)
    out = cfg.output_dir
    io.save_scattering(sm.s_plus, os.path.join(out, "scattering.json"))
    io.save_density_csv(density, os.path.join(out, "density.csv"))
    io.save_report(report, os.path.join(out, "forward_report.json"))
    print(json.dumps({"passed": report["passed"],
                      "unitarity": report["unitarity_plus"],
                      "wronskian": report["wronskian"]}, sort_keys=True))
    return EXIT_OK if report["passed"] else EXIT_GATE


def _inverse_bundle(s_plus, cfg, half_width):
    refl = ReflectionInput(s_plus, s_floor=cfg.s_floor, log_floor=cfg.log_floor)
    res = reconstruct(refl, half_width, trunc=cfg.truncation,
                      eps_ladder=cfg.eps_ladder)
    defects = uniqueness_defect(refl, trunc=cfg.truncation,
                                m_ladder=cfg.m_ladder,
                                eps_ladder=cfg.eps_ladder, tol=cfg.tol_defect)
    report = {
        "gram_residual": res.gram_residual,
        "qp_imag_residual": res.qp_imag_residual,
        "defect_plus": defects["defect_plus"],
        "defect_minus": defects["defect_minus"],
        "defect_trace_plus": defects["trace_plus"],
        "defect_trace_minus": defects["trace_minus"],
        "unique": defects["unique"],
        "s_at_zero": defects["s_at_zero"],
    }
    return res, report


def cmd_inverse(args, cfg):
    grid, s_plus = io.load_scattering(args.scattering_file)
    half_width = args.half_width or min(6, cfg.truncation // 8)
    res, report = _inverse_bundle(s_plus, cfg, half_width)
    out = cfg.output_dir
    io.save_jacobi(res.J, os.path.join(out, "jacobi_recovered.json"))
    io.save_report(report, os.path.join(out, "inverse_report.json"))
    print(json.dumps({"unique": report["unique"],
                      "defect_plus": report["defect_plus"],
                      "gram_residual": report["gram_residual"]}, sort_keys=True))
    return EXIT_OK


def cmd_roundtrip(args, cfg):
    J = io.load_jacobi(args.jacobi_file)
    sm, density, fw_report = _forward_bundle(J, cfg)
    n_lo = J.n_min if not J.is_free else 0
    n_hi = J.n_max if not J.is_free else 0
    half_width = max(abs(n_lo), abs(n_hi)) + 1
    res, inv_report = _inverse_bundle(sm.s_plus, cfg, half_width)
    err = roundtrip_error(J, res)
    report = {"forward": fw_report, "inverse": inv_report,
              "roundtrip_error": err,
              "passed": bool(fw_report["passed"] and err <= cfg.tol_roundtrip)}
    io.save_report(report, os.path.join(cfg.output_dir, "roundtrip_report.json"))
    io.save_jacobi(res.J, os.path.join(cfg.output_dir, "jacobi_recovered.json"))
    print(json.dumps({"roundtrip_error": err, "passed": report["passed"]},
                     sort_keys=True))
    return EXIT_OK if report["passed"] else EXIT_GATE


def cmd_gallery(args, cfg):
    out = cfg.output_dir
    kind = args.kind
    if kind == "free":
        io.save_jacobi(gallery.free(), os.path.join(out, "jacobi_free.json"))
        report = {"kind": kind}
    elif kind == "single-site":
        J = gallery.single_site(args.coupling)
        io.save_jacobi(J, os.path.join(out, "jacobi_single_site.json"))
        report = {"kind": kind, "coupling": args.coupling}
    elif kind == "random-window":
        J = gallery.random_window(args.width, args.magnitude, seed=cfg.seed)
        io.save_jacobi(J, os.path.join(out, "jacobi_random_window.json"))
        report = {"kind": kind, "n_min": J.n_min, "width": int(J.width)}
    elif kind == "bernstein-szego":
        coeffs = [float(v) for v in args.poly.split(",")]
        J = gallery.bernstein_szego(coeffs)
        io.save_jacobi(J, os.path.join(out, "jacobi_bernstein_szego.json"))
        grid = CircleGrid(cfg.grid_size)
        theta = interior_theta_nodes(cfg.grid_size // 2, guard=2)
        from .jacobi import szego_class_check
        chk = szego_class_check(spectral_density(J, theta))
        report = {"kind": kind, "poly": coeffs, "szego_check": chk}
        if not chk["passed"]:
            io.save_report(report, os.path.join(out, "gallery_report.json"))
            return EXIT_GATE
    else:
        ex = gallery.example_nonunique(args.a_plus, args.a_minus,
                                       args.delta_degree,
                                       grid=CircleGrid(cfg.grid_size))
        io.save_scattering(ex.s_plus, os.path.join(out, "scattering_example.json"))
        inv = ex.invariant_report()
        report = {"kind": kind, **inv}
        ok = (inv["min_abs_s"] < 1e-3
              and max(inv["unitarity_plus"], inv["unitarity_minus"],
                      inv["compatibility"]) <= cfg.tol_unitarity)
        report["passed"] = bool(ok)
        io.save_report(report, os.path.join(out, "gallery_report.json"))
        print(json.dumps({"kind": kind, "passed": ok}, sort_keys=True))
        return EXIT_OK if ok else EXIT_GATE
    io.save_report(report, os.path.join(out, "gallery_report.json"))
    print(json.dumps({"kind": kind}, sort_keys=True))
    return EXIT_OK


def _sniff_input(path):
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON ({exc})") from exc
    if "coeffs_s_plus" in data:
        return "scattering"
    if "p" in data and "q" in data:
        return "jacobi"
    raise ValidationError(f"{path}: neither an operator nor a scattering file")


def cmd_diagnose(args, cfg):
    from .diagnostics import theorem04_panel
    kind = _sniff_input(args.input_file)
    if kind == "jacobi":
        source = io.load_jacobi(args.input_file)
    else:
        grid, s_plus = io.load_scattering(args.input_file)
        source = ReflectionInput(s_plus, s_floor=cfg.s_floor,
                                 log_floor=cfg.log_floor)
    panel = theorem04_panel(source, grid=CircleGrid(cfg.grid_size),
                            trunc=cfg.truncation, m_ladder=cfg.m_ladder,
                            eps_ladder=cfg.eps_ladder,
                            tol_defect=cfg.tol_defect)
    out = cfg.output_dir
    io.save_report(panel, os.path.join(out, "panel.json"))
    rows = [(k, v) for k, v in enumerate(panel["a2_trend"])]
    io.save_trend_csv(rows, ["scale_index", "a2_sup"],
                      os.path.join(out, "a2_trend.csv"))
    print(_panel_table(panel))
    return EXIT_OK if panel["coherent"] else EXIT_GATE


def _panel_table(panel):
    lines = [
        "indicator            verdict",
        "-------------------  -------",
        f"A2 scale trend       {'divergent' if panel['a2_divergent'] else 'finite'}",
        f"metric operators     {'invertible' if panel['invertible'] else 'degenerate'}",
        f"uniqueness defects   {panel['defect_plus']:.3e} / {panel['defect_minus']:.3e}",
        f"unique operator      {panel['unique']}",
        f"panel coherent       {panel['coherent']}",
    ]
    if panel["warning"]:
        lines.append(f"warning: {panel['warning']}")
    return "\n".join(lines)


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = config_from_args(args)
        handler = {"forward": cmd_forward, "inverse": cmd_inverse,
                   "roundtrip": cmd_roundtrip, "gallery": cmd_gallery,
                   "diagnose": cmd_diagnose}[args.command]
        return handler(args, cfg)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except JacscatError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_GATE


if __name__ == "__main__":
    sys.exit(main())
