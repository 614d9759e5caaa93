import json
import os
from pathlib import Path
from typing import IO, Union

from loguru import logger
from pathvalidate import validate_filepath, ValidationError as PathValidationError
from pydantic import ValidationError

from models.instance import Instance, EdgeCapInstance, validate
from models.schedule import Schedule, ScheduleDocument
from .exceptions import InstanceParseError, InstanceValidationError

PathOrStream = Union[str, os.PathLike, IO[str]]


def ensure_output_path_valid(path: str | os.PathLike) -> Path:
    """
    验证输出文件路径是否合法，并确保父目录存在

    参数:
        path: 输出文件路径

    返回:
        Path: 解析后的绝对路径

    异常:
        OSError: 路径无效
    """
    try:
        validate_filepath(str(path), platform="auto")
    except PathValidationError as e:
        raise OSError(f"文件路径无效: {str(e)}")

    file_path = Path(path).resolve()
    file_path.parent.mkdir(parents=True, exist_ok=True)
    return file_path


def _read_text(source: PathOrStream) -> tuple[str, str]:
    if hasattr(source, "read"):
        return source.read(), getattr(source, "name", "<stream>")
    with open(source, "r", encoding="utf-8") as f:
        return f.read(), str(source)


def _write_text(target: PathOrStream, text: str) -> None:
    if hasattr(target, "write"):
        target.write(text)
        return
    path = ensure_output_path_valid(target)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def _format_validation_error(origin: str, e: ValidationError) -> str:
    parts = []
    for err in e.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        parts.append(f"字段 {loc}: {err['msg']}")
    return f"{origin}: " + "; ".join(parts)


def parse_document(text: str, origin: str = "<string>") -> Instance | EdgeCapInstance:
    """把 JSON 文本解析成节点容量实例或边容量实例（有 edges 键的是后者）"""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceParseError(f"{origin}: 第 {e.lineno} 行第 {e.colno} 列: {e.msg}")

    if not isinstance(raw, dict):
        raise InstanceParseError(f"{origin}: 顶层必须是 JSON 对象")

    model = EdgeCapInstance if "edges" in raw else Instance
    try:
        return model.model_validate(raw)
    except ValidationError as e:
        raise InstanceParseError(_format_validation_error(origin, e))


def load_document(source: PathOrStream) -> Instance | EdgeCapInstance:
    text, origin = _read_text(source)
    return parse_document(text, origin)


def load_instance(source: PathOrStream, check: bool = True) -> Instance:
    """
    读取实例文件。

    参数:
        source: 文件路径或文本流
        check: 是否执行不变量校验（validate 命令需要读入非法实例再报告）

    异常:
        InstanceParseError: JSON 或字段错误
        InstanceValidationError: 违反实例不变量
    """
    text, origin = _read_text(source)
    document = parse_document(text, origin)
    if isinstance(document, EdgeCapInstance):
        raise InstanceParseError(f"{origin}: 这是边容量实例，请先用 reduce_edge_capacities 归约")

    if check:
        report = validate(document)
        if not report.ok:
            raise InstanceValidationError(
                f"{origin}: 实例不合法: " + "; ".join(v.message for v in report.violations),
                report.violations,
            )
    logger.debug(f"已读取实例 {origin}: {len(document.coflows)} 个 coflow, {document.total_units()} 个单位")
    return document


def dump_document(document: Instance | EdgeCapInstance) -> str:
    return json.dumps(document.model_dump(mode="json", exclude_none=True), indent=2, ensure_ascii=False) + "\n"


def save_instance(inst: Instance | EdgeCapInstance, target: PathOrStream) -> None:
    _write_text(target, dump_document(inst))


def save_schedule(schedule: Schedule, target: PathOrStream) -> None:
    document = schedule.to_document()
    _write_text(target, json.dumps(document.model_dump(mode="json", by_alias=True), indent=2, ensure_ascii=False) + "\n")


def load_schedule(source: PathOrStream) -> Schedule:
    text, origin = _read_text(source)
    try:
        return ScheduleDocument.model_validate_json(text).to_schedule()
    except ValidationError as e:
        raise InstanceParseError(_format_validation_error(origin, e))
