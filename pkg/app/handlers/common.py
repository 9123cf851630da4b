# app/handlers/common.py
import argparse
import json
import math
import sys
from typing import Any, Dict

from app.errors import ConfigParseError, ConfigValidationError, FiveBarError, OutputError
from app.models import WorkingMode

# Коды выхода CLI
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_KINEMATIC = 2
EXIT_IO = 3


def emit(payload: Dict[str, Any]) -> None:
    """JSON в stdout; логи идут в stderr и сюда не попадают."""
    sys.stdout.write(json.dumps(payload, ensure_ascii=False, indent=2) + "\n")
    sys.stdout.flush()


def error_payload(err: Exception, code: str = "") -> Dict[str, Any]:
    payload: Dict[str, Any] = {
        "ok": False,
        "error": code or getattr(err, "code", type(err).__name__),
        "message": getattr(err, "message", str(err)),
    }
    for attr in ("matrix", "field", "line"):
        if hasattr(err, attr):
            payload[attr] = getattr(err, attr)
    return payload


def exit_code_for(err: FiveBarError) -> int:
    if isinstance(err, (ConfigParseError, ConfigValidationError)):
        return EXIT_USAGE
    if isinstance(err, OutputError):
        return EXIT_IO
    return EXIT_KINEMATIC


# ---------- Типы аргументов ----------
def mode_arg(text: str) -> WorkingMode:
    # "pm" == "+-": удобно, когда "-+" argparse принимает за флаг
    try:
        return WorkingMode.from_label(text.replace("p", "+").replace("m", "-"))
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def assembly_arg(text: str) -> int:
    text = {"p": "+", "m": "-"}.get(text, text)
    if text not in ("+", "-"):
        raise argparse.ArgumentTypeError("assembly mode must be '+' or '-'")
    return 1 if text == "+" else -1


def to_radians(value: float, degrees: bool) -> float:
    return math.radians(value) if degrees else value


def from_radians(value: float, degrees: bool) -> float:
    return math.degrees(value) if degrees else value
