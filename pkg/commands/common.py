"""各命令共用的参数定义与输出工具"""
import argparse
import json
import re
import sys
from typing import Any

from algorithms.pipeline import RunConfig
from algorithms.relaxation import DeadlineMode
from algorithms.scheduler import SolveMode
from config import config


def parse_seed_range(text: str) -> range:
    """"A..B"（含两端）或单个整数"""
    if match := re.fullmatch(r"\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*", text):
        start, stop = int(match.group(1)), int(match.group(2))
    elif re.fullmatch(r"\s*-?\d+\s*", text):
        start = stop = int(text)
    else:
        raise argparse.ArgumentTypeError(f"种子范围格式应为 A..B: {text}")
    if start > stop:
        raise argparse.ArgumentTypeError(f"种子范围为空: {text}")
    return range(start, stop + 1)


def add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--mode", choices=[m.value for m in SolveMode], default=SolveMode.UNIT.value,
                        help="unit: 单位容量; capacities: 一般节点容量; bipartite: 二部 coflow")
    parser.add_argument("--deadlines", choices=[m.value for m in DeadlineMode], default=DeadlineMode.STANDARD.value,
                        help="standard: D = 2C*; improved: D = 2p/(p+1)·C*")
    parser.add_argument("--expansion-cap", type=int, default=None, help="超图展开的最大单位数")
    parser.add_argument("--unit-cap", type=int, default=None, help="精确求解允许的最大需求单位数")
    parser.add_argument("--tol", type=float, default=None, help="割平面分离容差")
    parser.add_argument("--json", action="store_true", help="输出 JSON")


def run_config_from_args(args: argparse.Namespace, **overrides: Any) -> RunConfig:
    """由命令行参数构造 RunConfig；字段不合法时抛出 pydantic.ValidationError（退出码 2）"""
    data: dict[str, Any] = {
        "mode": getattr(args, "mode", SolveMode.UNIT.value),
        "deadline_mode": getattr(args, "deadlines", DeadlineMode.STANDARD.value),
        "output": "json" if getattr(args, "json", False) else "text",
        "oracle": getattr(args, "oracle", False),
    }
    if getattr(args, "seed", None) is not None:
        data["seed"] = args.seed
    for arg_name, field in (("expansion_cap", "expansion_cap"), ("unit_cap", "oracle_unit_cap"), ("tol", "separation_tol")):
        if (value := getattr(args, arg_name, None)) is not None:
            data[field] = value
    data.update(overrides)
    return RunConfig.model_validate(data)


def emit_json(payload: Any) -> None:
    sys.stdout.write(json.dumps(payload, indent=2, ensure_ascii=False, default=str) + "\n")


def emit_lines(lines: list[str]) -> None:
    sys.stdout.write("\n".join(lines) + "\n")


def listed(items: list, limit: int | None = None) -> list:
    """文本输出里最多列出 max_listed_violations 条"""
    limit = config.max_listed_violations if limit is None else limit
    return items[:limit]
