# app/handlers/modes.py
import argparse
import logging
from typing import List

from app.calculators.singularity import enumerate_working_modes
from app.handlers.common import EXIT_OK, EXIT_USAGE, emit


def _postures(text: str) -> List[int]:
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"postures must be a comma list of integers, got {text!r}") from None
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError("every leg needs at least one posture")
    return values


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("need at least one leg")
    return value


def cmd_modes(args: argparse.Namespace) -> int:
    if args.postures is not None:
        postures = args.postures
        if args.legs is not None and args.legs != len(postures):
            emit({"ok": False, "error": "UsageError",
                  "message": f"--legs {args.legs} does not match {len(postures)} posture counts"})
            return EXIT_USAGE
    else:
        postures = [2] * (args.legs if args.legs is not None else 2)

    count, vectors = enumerate_working_modes(postures)
    payload = {"ok": True, "legs": len(postures), "postures": postures, "count": count,
               "modes": [list(v) for v in vectors]}
    if all(n == 2 for n in postures):
        payload["labels"] = ["".join("+" if i == 0 else "-" for i in v) for v in vectors]
    logging.info(f"✅ [CLI] modes: {count} рабочих режимов для {len(postures)} ног")
    emit(payload)
    return EXIT_OK


def build_modes_handlers(subparsers) -> None:
    p = subparsers.add_parser("modes", help="count and list working modes")
    p.add_argument("--legs", type=_positive, help="number of legs (two postures each unless --postures)")
    p.add_argument("--postures", type=_postures, help="posture count per leg, e.g. 2,2,2")
    p.set_defaults(handler=cmd_modes)
