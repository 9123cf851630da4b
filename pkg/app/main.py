# app/main.py
import argparse
import logging
import os
import sys
from typing import List, Optional

from dotenv import load_dotenv
from pydantic import ValidationError

from app.errors import FiveBarError
from app.handlers.atlas import build_atlas_handlers
from app.handlers.common import EXIT_USAGE, emit, error_payload, exit_code_for
from app.handlers.modes import build_modes_handlers
from app.handlers.query import build_query_handlers


def setup_logging() -> None:
    """Root logger: консоль (stderr, stdout занят JSON) и файл, если задан FIVEBAR_LOG_FILE."""
    level = getattr(logging, os.getenv("FIVEBAR_LOG_LEVEL", "INFO").upper(), logging.INFO)

    # Создаем форматтер
    formatter = logging.Formatter(
        "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S"
    )

    root_logger = logging.getLogger()
    root_logger.setLevel(level)
    root_logger.handlers.clear()

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(level)
    console_handler.setFormatter(formatter)
    root_logger.addHandler(console_handler)

    log_file = os.getenv("FIVEBAR_LOG_FILE")
    if log_file:
        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setLevel(level)
        file_handler.setFormatter(formatter)
        root_logger.addHandler(file_handler)
        logging.info(f"📝 Логи записываются в файл: {log_file}")


class CliParser(argparse.ArgumentParser):
    """Ошибка разбора аргументов: код выхода 1, а не 2 (2 занят кинематикой)."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> CliParser:
    parser = CliParser(prog="fivebar", description="Five-bar RR-RRR working modes and generalized aspects")
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=CliParser)
    build_query_handlers(subparsers)
    build_atlas_handlers(subparsers)
    build_modes_handlers(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    # Загружаем переменные окружения из .env файла
    load_dotenv()
    setup_logging()

    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except FiveBarError as e:
        logging.error(f"❌ [CLI] {args.command}: {e.code}: {e.message}")
        emit(error_payload(e))
        return exit_code_for(e)
    except ValidationError as e:
        err = e.errors()[0]
        emit({"ok": False, "error": "ValidationError", "message": err["msg"],
              "field": ".".join(str(x) for x in err["loc"])})
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
