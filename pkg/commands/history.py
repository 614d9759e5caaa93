"""查看与清理 certify --db 写入的验证记录"""
import argparse

from loguru import logger

from config import config
from models import get_engine, get_session, init_db
from models.certify_record import CertifyRun
from .common import emit_json, emit_lines


def register(subparsers) -> None:
    parser = subparsers.add_parser("history", help="查看已保存的批量验证记录")
    parser.add_argument("--db", default=None, help="数据库 URL，默认取配置")
    parser.add_argument("--profile", default=None, help="只列出该 profile 的记录")
    parser.add_argument("--limit", type=int, default=20, help="最多列出的记录数")
    parser.add_argument("--offset", type=int, default=0, help="跳过最新的若干条")
    target = parser.add_mutually_exclusive_group()
    target.add_argument("--run", type=int, default=None, help="显示这条记录的逐种子结果")
    target.add_argument("--delete", type=int, default=None, help="删除这条记录及其种子结果")
    parser.add_argument("--json", action="store_true", help="输出 JSON")
    parser.set_defaults(handler=run)


def _headline(record: CertifyRun) -> str:
    verdict = "通过" if record.passed else f"失败 {record.n_failed}"
    return (
        f"#{record.id} {record.created_at:%Y-%m-%d %H:%M:%S} {record.profile} "
        f"{record.mode}/{record.deadline_mode} 种子 {record.seed_from}..{record.seed_to} {verdict}"
    )


def _fetch(session, run_id: int) -> CertifyRun:
    record = CertifyRun.get(session, CertifyRun.id == run_id, load=CertifyRun.seeds)
    if record is None:
        raise ValueError(f"验证记录 {run_id} 不存在")
    return record


def run(args: argparse.Namespace) -> int:
    if args.limit < 1 or args.offset < 0:
        raise ValueError("--limit 必须 ≥ 1，--offset 必须 ≥ 0")
    engine = get_engine(args.db or config.database_url)
    init_db(engine)

    with get_session(engine) as session:
        if args.delete is not None:
            record = _fetch(session, args.delete)
            n_seeds = len(record.seeds)
            CertifyRun.delete(session, record)
            logger.info(f"已删除验证记录 {args.delete}（{n_seeds} 个种子）")
            if args.json:
                emit_json({"deleted": args.delete, "seeds": n_seeds})
            else:
                emit_lines([f"已删除 #{args.delete}，共 {n_seeds} 个种子"])
            return 0

        if args.run is not None:
            record = _fetch(session, args.run)
            seeds = sorted(record.seeds, key=lambda s: s.seed)
            if args.json:
                payload = record.model_dump(mode="json")
                payload["seeds"] = [s.model_dump(mode="json", exclude={"run_id"}) for s in seeds]
                emit_json(payload)
            else:
                lines = [_headline(record)]
                for s in seeds:
                    status = "通过" if s.ok else f"失败: {s.failures}"
                    lines.append(
                        f"  种子 {s.seed} {s.instance_name or ''}: LP {s.lp_objective}, 算法 {s.alg_objective}, "
                        f"最优 {s.oracle_objective}, {status}"
                    )
                emit_lines(lines)
            return 0

        condition = None if args.profile is None else CertifyRun.profile == args.profile
        records = CertifyRun.get(
            session, condition, fetch_mode="all",
            order_by=[CertifyRun.id.desc()], offset=args.offset, limit=args.limit,
        )
        if args.json:
            emit_json([r.model_dump(mode="json") for r in records])
        else:
            emit_lines([_headline(r) for r in records] or ["没有验证记录"])
    return 0
