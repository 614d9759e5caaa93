import argparse

from loguru import logger
from pydantic import ValidationError

from utils.exceptions import PcsError
from utils.log import setup_logging
from commands import gen, solve, validate, oracle, certify, history

COMMANDS = (gen, solve, validate, oracle, certify, history)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pcs",
        description="基于路径的 coflow 调度：LP 下界、近似算法、调度检查与界的批量验证",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="标准错误输出使用 DEBUG 级别")
    subparsers = parser.add_subparsers(dest="command", required=True)
    # 包含各个子命令
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def main(argv: list[str] | None = None) -> int:
    """
    命令行入口，返回退出码：
    0 成功；2 参数错误；3 不变量或界的检查失败；4 输入输出或解析错误
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    setup_logging("DEBUG" if args.verbose else None)
    try:
        return args.handler(args)
    except PcsError as e:
        logger.error(e.detail)
        return e.exit_code
    except ValidationError as e:
        logger.error(f"参数不合法: {e}")
        return 2
    except ValueError as e:
        logger.error(str(e))
        return 2
    except OSError as e:
        logger.error(f"文件读写失败: {e}")
        return 4
    except Exception as e:
        logger.exception(e)
        return 3
