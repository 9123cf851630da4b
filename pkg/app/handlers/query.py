# app/handlers/query.py
"""Одиночные запросы: fk, ik, classify. Ответ: JSON-объект в stdout."""
import argparse
import logging
from typing import Any, Dict, List

from app.calculators.kinematics import closure_residual, forward_all, forward_kinematics, inverse_kinematics
from app.calculators.singularity import (
    classify_singularity,
    det_a,
    det_b,
    eps_a,
    matrices,
    solve_rates,
    solve_velocity,
    working_mode_of,
)
from app.config import add_geometry_arguments, geometry_from_args
from app.errors import ModeBoundary, NoAssembly
from app.handlers.common import (
    EXIT_OK,
    EXIT_USAGE,
    assembly_arg,
    emit,
    from_radians,
    mode_arg,
    to_radians,
)
from app.models import AssemblyMode, FullConfig, JointConfig, Point2


def config_record(cfg: FullConfig, degrees: bool = False) -> Dict[str, Any]:
    """Всё, что известно о конфигурации: позы, матрицы, режимы, класс особенности."""
    m = matrices(cfg)
    da = det_a(cfg)
    try:
        mode = working_mode_of(cfg).label
    except ModeBoundary:
        mode = None
    if abs(da) <= eps_a(cfg.geometry):
        assembly = None
    else:
        assembly = AssemblyMode(sign=1 if da > 0 else -1).label
    return {
        "p": [cfg.p.x, cfg.p.y],
        "q": [from_radians(cfg.q.theta1, degrees), from_radians(cfg.q.theta2, degrees)],
        "passive": [from_radians(cfg.passive.theta3, degrees), from_radians(cfg.passive.theta4, degrees)],
        "c": [cfg.c.x, cfg.c.y],
        "d": [cfg.d.x, cfg.d.y],
        "A": [list(row) for row in m.a],
        "B": [list(row) for row in m.b],
        "det_a": da,
        "det_b": det_b(cfg),
        "assembly": assembly,
        "working_mode": mode,
        "singularity": classify_singularity(cfg).value,
        "residual": closure_residual(cfg),
        "flags": list(cfg.flags),
    }


# ---------- fk ----------
def cmd_fk(args: argparse.Namespace) -> int:
    g = geometry_from_args(args)
    q = JointConfig(theta1=to_radians(args.theta1, args.degrees), theta2=to_radians(args.theta2, args.degrees))
    if args.assembly is not None:
        configs: List[FullConfig] = [forward_kinematics(g, q, AssemblyMode(sign=args.assembly))]
    else:
        configs = forward_all(g, q)
        if not configs:
            raise NoAssembly(f"circles around C and D do not meet at q = ({q.theta1:.6g}, {q.theta2:.6g})")

    records = []
    for cfg in configs:
        rec = config_record(cfg, args.degrees)
        if args.rates is not None:
            q_dot = [to_radians(v, args.degrees) for v in args.rates]
            rec["p_dot"] = solve_velocity(cfg, q_dot).tolist()
        records.append(rec)

    logging.info(f"✅ [CLI] fk: решений {len(records)}")
    if len(records) == 1:
        emit({"ok": True, **records[0]})
    else:
        emit({"ok": True, "solutions": records})
    return EXIT_OK


# ---------- ik ----------
def cmd_ik(args: argparse.Namespace) -> int:
    g = geometry_from_args(args)
    cfg = inverse_kinematics(g, Point2(x=args.x, y=args.y), args.mode)
    rec = config_record(cfg, args.degrees)
    if args.velocity is not None:
        rec["q_dot"] = [from_radians(v, args.degrees) for v in solve_rates(cfg, args.velocity).tolist()]
    logging.info(f"✅ [CLI] ik: режим {args.mode.label}")
    emit({"ok": True, **rec})
    return EXIT_OK


# ---------- classify ----------
def cmd_classify(args: argparse.Namespace) -> int:
    """Конфигурация задаётся либо (θ1, θ2, сборка), либо (x, y, рабочий режим)."""
    g = geometry_from_args(args)
    by_pose = args.x is not None or args.y is not None
    by_joints = args.theta1 is not None or args.theta2 is not None
    if by_pose == by_joints or (by_pose and (args.x is None or args.y is None or args.mode is None)) \
            or (by_joints and (args.theta1 is None or args.theta2 is None or args.assembly is None)):
        emit({
            "ok": False,
            "error": "UsageError",
            "message": "give either --x --y --mode or --theta1 --theta2 --assembly",
        })
        return EXIT_USAGE

    if by_pose:
        cfg = inverse_kinematics(g, Point2(x=args.x, y=args.y), args.mode)
    else:
        q = JointConfig(theta1=to_radians(args.theta1, args.degrees), theta2=to_radians(args.theta2, args.degrees))
        cfg = forward_kinematics(g, q, AssemblyMode(sign=args.assembly))
    rec = config_record(cfg, args.degrees)
    emit({"ok": True, "singularity": rec["singularity"], "det_a": rec["det_a"], "det_b": rec["det_b"],
          "working_mode": rec["working_mode"], "assembly": rec["assembly"], "p": rec["p"], "q": rec["q"]})
    return EXIT_OK


def build_query_handlers(subparsers) -> None:
    fk = subparsers.add_parser("fk", help="forward kinematics for (theta1, theta2)")
    add_geometry_arguments(fk)
    fk.add_argument("--theta1", type=float, required=True)
    fk.add_argument("--theta2", type=float, required=True)
    fk.add_argument("--assembly", type=assembly_arg, help="'+' or '-' = sign(det A); omit for all solutions")
    fk.add_argument("--rates", type=float, nargs=2, metavar=("W1", "W2"), help="joint rates for p_dot")
    fk.add_argument("--degrees", action="store_true", help="angles in degrees")
    fk.set_defaults(handler=cmd_fk)

    ik = subparsers.add_parser("ik", help="inverse kinematics for point (x, y) in a working mode")
    add_geometry_arguments(ik)
    ik.add_argument("--x", type=float, required=True)
    ik.add_argument("--y", type=float, required=True)
    ik.add_argument("--mode", type=mode_arg, required=True, help="'++', '+-', '-+', '--' (or pp, pm, mp, mm)")
    ik.add_argument("--velocity", type=float, nargs=2, metavar=("VX", "VY"), help="end-point velocity for q_dot")
    ik.add_argument("--degrees", action="store_true", help="report angles in degrees")
    ik.set_defaults(handler=cmd_ik)

    cl = subparsers.add_parser("classify", help="singularity class and working mode of a configuration")
    add_geometry_arguments(cl)
    cl.add_argument("--theta1", type=float)
    cl.add_argument("--theta2", type=float)
    cl.add_argument("--assembly", type=assembly_arg)
    cl.add_argument("--x", type=float)
    cl.add_argument("--y", type=float)
    cl.add_argument("--mode", type=mode_arg)
    cl.add_argument("--degrees", action="store_true")
    cl.set_defaults(handler=cmd_classify)
