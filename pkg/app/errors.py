# app/errors.py
"""
Ошибки пятизвенника. У каждой есть машиночитаемый `code`,
который CLI кладёт в поле "error" JSON-ответа.
"""
from __future__ import annotations


class FiveBarError(Exception):
    """Базовая ошибка: всё, что не удалось посчитать для конкретного запроса."""

    code = "FiveBarError"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code


# ---------- Кинематика ----------
class Unreachable(FiveBarError):
    """Точка вне кольца досягаемости ноги (или вне пределов приводов)."""

    code = "Unreachable"


class ModeBoundary(FiveBarError):
    """Один из B_jj почти ноль: рабочий режим в этой точке не определён."""

    code = "ModeBoundary"


class NoAssembly(FiveBarError):
    """Окружности вокруг C и D не пересекаются: сборки нет."""

    code = "NoAssembly"


class SingularSolve(FiveBarError):
    """Скоростная задача вырождена; `matrix` = "A" или "B"."""

    code = "SingularSolve"

    def __init__(self, matrix: str, message: str = ""):
        super().__init__(message or f"matrix {matrix} is singular")
        self.matrix = matrix


# ---------- Атлас ----------
class UnknownAspect(FiveBarError):
    code = "UnknownAspect"


# ---------- Конфиг и ввод-вывод ----------
class ConfigParseError(FiveBarError):
    """Синтаксическая ошибка в файле конфигурации (с номером строки)."""

    code = "ParseError"

    def __init__(self, line: int, text: str, reason: str):
        super().__init__(f"line {line}: {reason}: {text!r}")
        self.line = line
        self.text = text


class ConfigValidationError(FiveBarError):
    """Значение разобрано, но не прошло проверку; `field` называет ключ."""

    code = "ValidationError"

    def __init__(self, field: str, reason: str = ""):
        super().__init__(f"{field}: {reason}" if reason else field)
        self.field = field


class OutputError(FiveBarError):
    code = "IoError"
