"""
IO — 模型 JSON 与数值 CSV 的读写。

Quick Start::

    from otmap.io import save_model, load_model

    save_model(estimate, "model.json")
    estimate = load_model("model.json")
"""

from otmap.io.models import (
    MODEL_FORMAT,
    SCHEMA_VERSION,
    load_model,
    model_from_dict,
    model_to_dict,
    save_model,
)
from otmap.io.tables import checksums, read_matrix, sha256_file, write_json, write_matrix

__all__ = [
    "MODEL_FORMAT",
    "SCHEMA_VERSION",
    "checksums",
    "load_model",
    "model_from_dict",
    "model_to_dict",
    "read_matrix",
    "save_model",
    "sha256_file",
    "write_json",
    "write_matrix",
]
