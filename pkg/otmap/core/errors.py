"""
异常体系 — 所有 otmap 错误的统一基类与结构化子类。

CLI 退出码约定:
- 1: 用法 / 配置错误 (UsageError, ConfigError)
- 2: 数值失败 / 模型文件错误 (NumericalFailure, ModelFormatError, SchemaVersionError)
"""

from __future__ import annotations

from typing import Any


class OTMapError(Exception):
    """Base class for every error raised by otmap."""

    exit_code: int = 2


# ──────────────────────────────────────────────
# Usage / configuration
# ──────────────────────────────────────────────


class UsageError(OTMapError):
    """Raised when the command line is malformed."""

    exit_code = 1

    def __init__(self, message: str) -> None:
        self.message = message
        super().__init__(message)


class ConfigError(OTMapError):
    """Raised when a config record carries an unknown or invalid key."""

    exit_code = 1

    def __init__(self, key: str, reason: str = "unknown key") -> None:
        self.key = key
        self.reason = reason
        super().__init__(f"config error at {key!r}: {reason}")


# ──────────────────────────────────────────────
# Domain / numerical
# ──────────────────────────────────────────────


class DomainError(OTMapError, ValueError):
    """Invalid argument for a mathematical operation (axis range, shapes, α=∞)."""

    exit_code = 1


class EnumerationLimitError(OTMapError):
    """Raised when a scale or frequency enumeration exceeds its cap."""

    def __init__(self, kind: str, count: int, cap: int) -> None:
        self.kind = kind
        self.count = count
        self.cap = cap
        super().__init__(
            f"{kind} enumeration would produce {count} items (cap {cap}); "
            f"lower J or raise the cap"
        )


class NumericalFailure(OTMapError):
    """Non-finite values or divergence inside a solver."""

    def __init__(self, stage: str, detail: str = "", **diagnostics: Any) -> None:
        self.stage = stage
        self.detail = detail
        self.diagnostics = diagnostics
        msg = f"numerical failure in {stage}"
        if detail:
            msg += f" — {detail}"
        super().__init__(msg)


class CalibrationError(OTMapError):
    """A functional-data coefficient fell outside [0, 1]."""

    def __init__(self, row: int, col: int, value: float) -> None:
        self.row = row
        self.col = col
        self.value = value
        super().__init__(
            f"coefficient w[{row}, {col}] = {value:.6g} is outside [0, 1]; "
            f"recalibrate c1/c2"
        )


class CodeGenerationError(OTMapError):
    """Rejection sampling could not produce the requested binary codes."""

    def __init__(self, count: int, length: int, attempts: int) -> None:
        self.count = count
        self.length = length
        self.attempts = attempts
        super().__init__(
            f"could not draw {count} codes of length {length} with Hamming "
            f"distance >= {length / 8:g} after {attempts} attempts"
        )


# ──────────────────────────────────────────────
# Model artifacts
# ──────────────────────────────────────────────


class ModelFormatError(OTMapError):
    """A model file is not valid otmap JSON."""

    def __init__(self, path: str, detail: str) -> None:
        self.path = path
        self.detail = detail
        super().__init__(f"cannot read model {path!r}: {detail}")


class SchemaVersionError(OTMapError):
    """A model file was written by an incompatible schema version."""

    def __init__(self, found: Any, expected: int, min_version: str) -> None:
        self.found = found
        self.expected = expected
        super().__init__(
            f"model schema version {found!r} is not supported (expected {expected}); "
            f"re-fit the model with otmap >= {min_version}"
        )
