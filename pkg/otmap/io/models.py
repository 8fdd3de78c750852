"""
模型文件 — 带版本号的 JSON 封装。

    {"format": "otmap-model", "version": 1, "kind": "fourier", "model": {...}, "meta": {...}}

浮点数经 json.dumps 以 repr 精度写出，加载后的模型与保存前逐位一致。
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

from otmap.core.errors import ModelFormatError, SchemaVersionError
from otmap.estimators.base import TransportEstimate
from otmap.estimators.registry import EstimatorRegistry, default_registry

logger = logging.getLogger("otmap.io")

MODEL_FORMAT = "otmap-model"
SCHEMA_VERSION = 1
# First library release that writes SCHEMA_VERSION.
SCHEMA_SINCE = "0.1.0"


def model_to_dict(estimate: TransportEstimate) -> Dict[str, Any]:
    return {"format": MODEL_FORMAT, "version": SCHEMA_VERSION, **estimate.to_dict()}


def save_model(estimate: TransportEstimate, path: Union[str, Path]) -> Path:
    """Write a fitted estimate as schema-versioned JSON."""
    path = Path(path)
    path.write_text(json.dumps(model_to_dict(estimate)), encoding="utf-8")
    logger.info("Saved %s model → %s", estimate.family, path)
    return path


def load_model(path: Union[str, Path], registry: Optional[EstimatorRegistry] = None) -> TransportEstimate:
    """Read a model written by :func:`save_model`.

    Raises:
        ModelFormatError: Unreadable file, broken JSON (with line and column),
            or a missing envelope field.
        SchemaVersionError: The file carries another schema version.
        UsageError: The model kind is not registered.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ModelFormatError(str(path), str(e)) from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelFormatError(str(path), f"line {e.lineno}, column {e.colno}: {e.msg}") from None
    return model_from_dict(data, str(path), registry)


def model_from_dict(
    data: Any, source: str = "<memory>", registry: Optional[EstimatorRegistry] = None
) -> TransportEstimate:
    if not isinstance(data, dict) or data.get("format") != MODEL_FORMAT:
        raise ModelFormatError(source, f"not an {MODEL_FORMAT} document")
    version = data.get("version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionError(version, SCHEMA_VERSION, SCHEMA_SINCE)
    for key in ("kind", "model"):
        if key not in data:
            raise ModelFormatError(source, f"missing field {key!r}")
    registry = registry or default_registry
    try:
        return registry.load(data)
    except (KeyError, TypeError, ValueError) as e:
        raise ModelFormatError(source, f"malformed {data['kind']} model: {e}") from None
