import os
import sys

from loguru import logger

from config import config, config_path

_file_sink_id: int | None = None


def setup_logging(level: str | None = None) -> None:
    """
    重新配置 loguru：
    标准错误输出使用配置中的级别；如果设置了环境变量 COFLOW_LOG，
    额外把 DEBUG 级别的日志（包括单纯形表迭代、定向转储）写入该文件
    """
    global _file_sink_id
    logger.remove()
    _file_sink_id = None
    logger.add(sys.stderr, level=(level or config.log_level).upper())

    if path := os.environ.get("COFLOW_LOG"):
        _file_sink_id = logger.add(path, level="DEBUG", encoding="utf-8", mode="a")
        logger.debug(f"调试日志写入: {path}")

    if os.path.exists(config_path):
        logger.debug(f"已载入配置文件 {config_path}: {config}")
    else:
        logger.debug(f"未找到配置文件 {config_path}，使用默认配置")


def debug_dump_enabled() -> bool:
    """只有开启了 COFLOW_LOG 文件时才值得生成大段的调试转储文本"""
    return _file_sink_id is not None or config.debug
