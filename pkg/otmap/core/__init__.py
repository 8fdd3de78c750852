"""
Core — 运行配置与异常体系。
"""

from otmap.core.config import (
    CoeffConfig,
    ConjugateConfig,
    NeuralConfig,
    RunConfig,
    SemidualConfig,
    StudyConfig,
)
from otmap.core.errors import (
    CalibrationError,
    CodeGenerationError,
    ConfigError,
    DomainError,
    EnumerationLimitError,
    ModelFormatError,
    NumericalFailure,
    OTMapError,
    SchemaVersionError,
    UsageError,
)

__all__ = [
    "CoeffConfig",
    "ConjugateConfig",
    "NeuralConfig",
    "RunConfig",
    "SemidualConfig",
    "StudyConfig",
    "CalibrationError",
    "CodeGenerationError",
    "ConfigError",
    "DomainError",
    "EnumerationLimitError",
    "ModelFormatError",
    "NumericalFailure",
    "OTMapError",
    "SchemaVersionError",
    "UsageError",
]
