"""
数值表格读写 — 纯 CSV，浮点数以 17 位有效数字写出以便逐位回放。
"""

from __future__ import annotations

import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, Union

import numpy as np

from otmap.core.errors import DomainError, UsageError

logger = logging.getLogger("otmap.io")

PathLike = Union[str, Path]

FLOAT_FORMAT = "%.17g"


def write_matrix(path: PathLike, data: np.ndarray, header: str = "") -> Path:
    """Write a 2-D array as comma-separated text."""
    path = Path(path)
    data = np.atleast_2d(np.asarray(data, dtype=float))
    np.savetxt(path, data, delimiter=",", fmt=FLOAT_FORMAT, header=header, comments="")
    logger.debug("wrote %s (%d×%d)", path, *data.shape)
    return path


def read_matrix(path: PathLike, skip_header: bool = False) -> np.ndarray:
    """Read a comma-separated numeric matrix; a single row comes back as 1×d.

    Raises:
        UsageError: If the file does not exist.
        DomainError: If a cell does not parse as a number.
    """
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"no such file: {path}")
    try:
        data = np.loadtxt(path, delimiter=",", ndmin=2, skiprows=1 if skip_header else 0)
    except ValueError as e:
        raise DomainError(f"{path}: {e}") from None
    return data


def sha256_file(path: PathLike) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def checksums(paths: Iterable[PathLike]) -> Dict[str, str]:
    """``{path: sha256}`` for every existing file in *paths*."""
    return {str(p): sha256_file(p) for p in paths if p and Path(p).is_file()}


def write_json(path: PathLike, data: Any) -> Path:
    path = Path(path)
    path.write_text(json.dumps(data, indent=2), encoding="utf-8")
    return path
