import argparse

from algorithms.scheduler import validate_schedule
from models.instance import validate
from utils.files import load_instance, load_schedule
from .common import emit_json, emit_lines, listed


def register(subparsers) -> None:
    parser = subparsers.add_parser("validate", help="检查实例（以及调度）是否合法")
    parser.add_argument("file", help="实例文件")
    parser.add_argument("--schedule", default=None, help="要检查的调度文件")
    parser.add_argument("--json", action="store_true", help="输出 JSON")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    inst = load_instance(args.file, check=False)
    report = validate(inst)
    payload = {"instance": report.model_dump(mode="json")}
    lines = [f"实例: {'合法' if report.ok else '不合法'}"]
    lines += [f"  {v.code}: {v.message}" for v in listed(report.violations)]
    ok = report.ok

    if args.schedule:
        if not report.ok:
            lines.append("实例不合法，跳过调度检查")
        else:
            schedule_report = validate_schedule(inst, load_schedule(args.schedule))
            payload["schedule"] = schedule_report.model_dump(mode="json")
            lines.append(f"调度: {'可行' if schedule_report.ok else '不可行'}，目标 {schedule_report.objective:.6g}")
            lines += [f"  {v.code}: {v.message}" for v in listed(schedule_report.violations)]
            ok = ok and schedule_report.ok

    if args.json:
        payload["ok"] = ok
        emit_json(payload)
    else:
        emit_lines(lines)
    return 0 if ok else 3
