"""
日志配置工具。

提供标准化的日志初始化，CLI 与库代码共用同一格式。
"""

from __future__ import annotations

import logging
import os
from logging.handlers import RotatingFileHandler
from typing import Union

_LEVELS = {
    "DEBUG": logging.DEBUG,
    "INFO": logging.INFO,
    "WARNING": logging.WARNING,
    "ERROR": logging.ERROR,
}


def parse_level(level: Union[int, str]) -> int:
    """Accept ``"info"`` / ``"DEBUG"`` / ``20`` and return a logging level."""
    if isinstance(level, int):
        return level
    return _LEVELS.get(str(level).strip().upper(), logging.INFO)


def setup_logging(
    level: Union[int, str] = logging.INFO,
    log_file: str = "",
    debug: bool = False,
) -> logging.Logger:
    """
    初始化统一的日志配置。

    Args:
        level: 默认日志级别（int 或名称）。
        log_file: 日志文件路径（为空则仅输出到终端）。
        debug: 是否开启 DEBUG 模式。

    Returns:
        ``otmap`` 根 Logger 实例。
    """
    level = logging.DEBUG if debug else parse_level(level)

    log_format = "%(asctime)s | %(name)s | %(levelname)s | %(message)s"

    logging.basicConfig(level=level, format=log_format, force=True)

    # 降低第三方库日志级别
    for name in ("matplotlib", "numba"):
        logging.getLogger(name).setLevel(logging.WARNING)

    # 文件输出
    if log_file:
        log_dir = os.path.dirname(log_file)
        if log_dir:
            os.makedirs(log_dir, exist_ok=True)
        fh = RotatingFileHandler(
            log_file, maxBytes=5 * 1024 * 1024, backupCount=3, encoding="utf-8"
        )
        fh.setFormatter(logging.Formatter(log_format))
        fh.setLevel(level)
        logging.getLogger().addHandler(fh)

    return logging.getLogger("otmap")
